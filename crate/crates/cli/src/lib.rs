//! `hecloud`: encrypt two integers, have the cloud add the ciphertexts,
//! decrypt the sum. Also launches the service and runs benchmark sweeps.
//!
//! Exit codes: 0 success, 2 argument/usage errors, 3 transport failures
//! (unreachable endpoint, bind failure), 4 validation or decryption
//! failures (including the gsw message-space guard).

pub mod alloc_meter;
pub mod bench;
pub mod client;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use hecloud_core::cloud::{AdditionService, CloudError, LocalCloud};
use hecloud_core::wire::Scheme;
use hecloud_core::{chen, gsw, qotp};
use hecloud_service::{serve, ServiceConfig};

use client::HttpCloud;

#[global_allocator]
static GLOBAL: alloc_meter::PeakAllocator = alloc_meter::PeakAllocator;

pub const DEFAULT_ENDPOINT: &str = "http://127.0.0.1:8080";

/// Endpoint value selecting the in-process combine instead of HTTP.
pub const LOCAL_ENDPOINT: &str = "local";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRANSPORT: i32 = 3;
pub const EXIT_FAILURE: i32 = 4;

#[derive(Parser)]
#[command(
    name = "hecloud",
    version,
    about = "Additive homomorphic encryption with outsourced ciphertext addition"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt two integers, add them remotely, print the decrypted sum.
    Add(AddArgs),
    /// Run the addition service.
    Serve(ServeArgs),
    /// Run a benchmark sweep and write CSV.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Chen,
    Gsw,
    Qotp,
}

impl From<SchemeArg> for Scheme {
    fn from(value: SchemeArg) -> Scheme {
        match value {
            SchemeArg::Chen => Scheme::Chen,
            SchemeArg::Gsw => Scheme::Gsw,
            SchemeArg::Qotp => Scheme::Qotp,
        }
    }
}

#[derive(Args)]
struct AddArgs {
    /// Cryptosystem to run.
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// First summand.
    #[arg(long)]
    a: u64,
    /// Second summand.
    #[arg(long)]
    b: u64,
    /// Service URL, or `local` for the in-process combine.
    #[arg(long, env = "HECLOUD_ENDPOINT", default_value = DEFAULT_ENDPOINT)]
    endpoint: String,
    /// Seed for reproducible key material.
    #[arg(long)]
    seed: Option<u64>,
    /// gsw security parameter (bits of the modulus).
    #[arg(long, default_value_t = 8)]
    gsw_k: usize,
    /// gsw noise density.
    #[arg(long, default_value_t = 0.02)]
    gsw_p: f64,
    /// gsw message-space bound (exclusive).
    #[arg(long, default_value_t = 16)]
    gsw_bound: u64,
}

#[derive(Args)]
struct ServeArgs {
    /// Port to bind on 0.0.0.0.
    #[arg(long)]
    port: u16,
}

#[derive(Args)]
struct BenchArgs {
    /// Sweep the summand bit width or the security parameter.
    #[arg(long, value_enum)]
    sweep: SweepArg,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Timed runs per sweep point.
    #[arg(long, default_value_t = 5)]
    runs: u32,
    /// Output CSV path.
    #[arg(long)]
    out: std::path::PathBuf,
    /// Service URL, or `local` for the in-process combine.
    #[arg(long, env = "HECLOUD_ENDPOINT", default_value = LOCAL_ENDPOINT)]
    endpoint: String,
    /// Base seed for summand generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SweepArg {
    Input,
    Key,
}

enum CliError {
    Usage(String),
    Transport(String),
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Transport(_) => EXIT_TRANSPORT,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Transport(m) | CliError::Failure(m) => m,
        }
    }
}

fn classify_cloud(err: &CloudError) -> CliError {
    match err {
        CloudError::Transport(m) => CliError::Transport(m.clone()),
        other => CliError::Failure(other.to_string()),
    }
}

fn chen_error(err: chen::ChenError) -> CliError {
    match &err {
        chen::ChenError::Cloud(cloud) => classify_cloud(cloud),
        _ => CliError::Failure(err.to_string()),
    }
}

fn gsw_error(err: gsw::GswError) -> CliError {
    match &err {
        gsw::GswError::Cloud(cloud) => classify_cloud(cloud),
        _ => CliError::Failure(err.to_string()),
    }
}

fn qotp_error(err: qotp::QotpError) -> CliError {
    match &err {
        qotp::QotpError::Cloud(cloud) => classify_cloud(cloud),
        _ => CliError::Failure(err.to_string()),
    }
}

fn make_cloud(endpoint: &str) -> Result<Box<dyn AdditionService>, CliError> {
    if endpoint == LOCAL_ENDPOINT {
        Ok(Box::new(LocalCloud))
    } else {
        Ok(Box::new(
            HttpCloud::new(endpoint).map_err(|e| classify_cloud(&e))?,
        ))
    }
}

fn make_rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_os_rng(),
    }
}

fn run_add(args: AddArgs) -> Result<(), CliError> {
    for value in [args.a, args.b] {
        if value >> 63 != 0 {
            return Err(CliError::Usage(format!(
                "summand {value} exceeds the 63-bit input bound"
            )));
        }
    }
    let cloud = make_cloud(&args.endpoint)?;
    let mut rng = make_rng(args.seed);
    let sum = match args.scheme {
        SchemeArg::Chen => {
            let keys = chen::keygen(4, &mut rng).map_err(chen_error)?;
            chen::he_add(args.a, args.b, &keys, cloud.as_ref()).map_err(chen_error)?
        }
        SchemeArg::Gsw => {
            let keys =
                gsw::keygen(args.gsw_k, args.gsw_p, args.gsw_bound, &mut rng).map_err(gsw_error)?;
            gsw::he_add(args.a, args.b, &keys, cloud.as_ref(), &mut rng).map_err(gsw_error)?
        }
        SchemeArg::Qotp => {
            qotp::he_add(args.a, args.b, cloud.as_ref(), &mut rng).map_err(qotp_error)?
        }
    };
    println!("{sum}");
    Ok(())
}

fn run_serve(args: ServeArgs) -> Result<(), CliError> {
    let config = ServiceConfig::new(args.port).map_err(|e| CliError::Usage(e.to_string()))?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Transport(e.to_string()))?;
    runtime
        .block_on(serve(config))
        .map_err(|e| CliError::Transport(e.to_string()))
}

fn run_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let cloud = make_cloud(&args.endpoint)?;
    let scheme: Scheme = args.scheme.into();
    let records = match args.sweep {
        SweepArg::Input => {
            let widths: Vec<u32> = bench::DEFAULT_INPUT_WIDTHS.collect();
            bench::sweep_input_sizes(scheme, &widths, args.runs, cloud.as_ref(), args.seed)
        }
        SweepArg::Key => {
            let ks: Vec<u32> = bench::DEFAULT_KEY_SIZES.collect();
            bench::sweep_key_sizes(scheme, &ks, args.runs, cloud.as_ref(), args.seed)
        }
    };
    bench::write_csv(&records, &args.out).map_err(|e| CliError::Failure(e.to_string()))?;
    eprintln!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

/// Parses argv and runs the selected command, returning the process exit
/// code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Add(args) => run_add(args),
        Command::Serve(args) => run_serve(args),
        Command::Bench(args) => run_bench(args),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}
