//! Benchmark sweeps: per-phase wall time, exact ciphertext footprints, and
//! best-effort peak allocation, written as CSV.
//!
//! Phases are measured independently around the pipeline stages (keygen,
//! encrypt incl. the plaintext carry, one cloud round trip, decrypt incl.
//! recombination) plus an independently-timed total. Ciphertext bytes are
//! the in-memory footprint of one operand's ciphertext: chen stores one
//! byte per codeword bit (7 per segment), qotp one byte per register bit,
//! gsw eight bytes per matrix entry. Summands are sampled with their top
//! bit forced so a width-w run is exactly w bits wide.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use hecloud_core::cloud::AdditionService;
use hecloud_core::wire::{ProcessRequest, ProcessResponse, Scheme};
use hecloud_core::{chen, gsw, qotp};

use crate::alloc_meter;

pub const CSV_HEADER: &str = "scheme,sweep,param,phase,run,wall_ns,ct_bytes,peak_alloc_bytes";

/// Default widths for the input-size sweep.
pub const DEFAULT_INPUT_WIDTHS: std::ops::RangeInclusive<u32> = 1..=32;

/// Default security parameters for the key-size sweep.
pub const DEFAULT_KEY_SIZES: std::ops::RangeInclusive<u32> = 3..=12;

/// Fixed summands for the key-size sweep, small enough for every k.
pub const KEY_SWEEP_SUMMANDS: (u64, u64) = (2, 1);

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no records to write")]
    NoRecords,
    #[error("writing csv: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SweepKind {
    Input,
    Key,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Input => "input",
            SweepKind::Key => "key",
        }
    }
}

/// Pipeline phases in execution order; `Total` is timed independently
/// around the whole run, not summed from the others.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Keygen,
    Encrypt,
    Cloud,
    Decrypt,
    Total,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::Keygen,
        Phase::Encrypt,
        Phase::Cloud,
        Phase::Decrypt,
        Phase::Total,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Keygen => "keygen",
            Phase::Encrypt => "encrypt",
            Phase::Cloud => "cloud",
            Phase::Decrypt => "decrypt",
            Phase::Total => "total",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One CSV row. A failed run yields a single `Total` row with
/// ct_bytes = -1; peak_alloc_bytes is -1 whenever no figure is available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRecord {
    pub scheme: Scheme,
    pub sweep: SweepKind,
    pub param: u64,
    pub phase: Phase,
    pub run: u32,
    pub wall_ns: u64,
    pub ct_bytes: i64,
    pub peak_alloc_bytes: i64,
}

struct PhaseMeasurement {
    wall_ns: u64,
    peak_bytes: i64,
    peak_abs: usize,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, PhaseMeasurement) {
    let baseline = alloc_meter::reset_peak();
    let start = Instant::now();
    let value = f();
    let wall_ns = start.elapsed().as_nanos() as u64;
    let peak_abs = alloc_meter::peak();
    (
        value,
        PhaseMeasurement {
            wall_ns,
            peak_bytes: peak_abs.saturating_sub(baseline) as i64,
            peak_abs,
        },
    )
}

struct RunMeasurement {
    phases: [PhaseMeasurement; 4],
    total: PhaseMeasurement,
    ct_bytes: i64,
}

fn assemble(
    start_current: usize,
    started: Instant,
    phases: [PhaseMeasurement; 4],
    ct_bytes: i64,
) -> RunMeasurement {
    let total_ns = started.elapsed().as_nanos() as u64;
    let peak_abs = phases.iter().map(|p| p.peak_abs).max().unwrap_or(0);
    RunMeasurement {
        phases,
        total: PhaseMeasurement {
            wall_ns: total_ns,
            peak_bytes: peak_abs.saturating_sub(start_current) as i64,
            peak_abs,
        },
        ct_bytes,
    }
}

fn chen_pipeline(
    a: u64,
    b: u64,
    cloud: &dyn AdditionService,
    rng: &mut ChaCha20Rng,
) -> Result<RunMeasurement, String> {
    let start_current = alloc_meter::current();
    let started = Instant::now();
    let (keys, m_keygen) = timed(|| chen::keygen(4, rng));
    let keys = keys.map_err(|e| e.to_string())?;
    let ((carry, c1, c2), m_encrypt) = timed(|| {
        let carry = (a & b) << 1;
        let segments = keys.params.segments_for(a).max(keys.params.segments_for(b));
        (
            carry,
            keys.encrypt_padded(a, segments),
            keys.encrypt_padded(b, segments),
        )
    });
    let ct_bytes = (c1.segment_count() * keys.params.codeword_bits) as i64;
    let (response, m_cloud) = timed(|| cloud.process(&ProcessRequest::Chen { a: c1, b: c2 }));
    let response = response.map_err(|e| e.to_string())?;
    let (sum, m_decrypt) = timed(|| -> Result<u64, String> {
        let ProcessResponse::Chen { segments } = response else {
            return Err("non-chen response".into());
        };
        Ok(keys.decrypt(&segments).map_err(|e| e.to_string())? + carry)
    });
    let sum = sum?;
    if sum != a + b {
        return Err(format!("chen pipeline returned {sum}, expected {}", a + b));
    }
    Ok(assemble(
        start_current,
        started,
        [m_keygen, m_encrypt, m_cloud, m_decrypt],
        ct_bytes,
    ))
}

fn gsw_pipeline(
    a: u64,
    b: u64,
    k: usize,
    msg_bound: u64,
    cloud: &dyn AdditionService,
    rng: &mut ChaCha20Rng,
) -> Result<RunMeasurement, String> {
    const NOISE_DENSITY: f64 = 0.02;
    let start_current = alloc_meter::current();
    let started = Instant::now();
    let (keys, m_keygen) = timed(|| gsw::keygen(k, NOISE_DENSITY, msg_bound, rng));
    let keys = keys.map_err(|e| e.to_string())?;
    let (pair, m_encrypt) = timed(|| -> Result<_, String> {
        let c1 = gsw::encrypt(&keys.public, &keys.params, a, rng).map_err(|e| e.to_string())?;
        let c2 = gsw::encrypt(&keys.public, &keys.params, b, rng).map_err(|e| e.to_string())?;
        Ok((c1, c2))
    });
    let (c1, c2) = pair?;
    let ct_bytes = (keys.params.n * keys.params.m * std::mem::size_of::<u64>()) as i64;
    let (response, m_cloud) = timed(|| {
        cloud.process(&ProcessRequest::Gsw {
            c1: c1.c.clone(),
            c2: c2.c.clone(),
        })
    });
    let response = response.map_err(|e| e.to_string())?;
    let (sum, m_decrypt) = timed(|| -> Result<u64, String> {
        let ProcessResponse::Gsw { c } = response else {
            return Err("non-gsw response".into());
        };
        gsw::decrypt(&keys.secret, &keys.params, &gsw::GswCiphertext::from_matrix(c))
            .map_err(|e| e.to_string())
    });
    let sum = sum?;
    if sum != a + b {
        return Err(format!("gsw pipeline returned {sum}, expected {}", a + b));
    }
    Ok(assemble(
        start_current,
        started,
        [m_keygen, m_encrypt, m_cloud, m_decrypt],
        ct_bytes,
    ))
}

fn qotp_pipeline(
    a: u64,
    b: u64,
    cloud: &dyn AdditionService,
    rng: &mut ChaCha20Rng,
) -> Result<RunMeasurement, String> {
    let width = {
        let bits = |v: u64| (64 - v.leading_zeros()) as usize;
        bits(a).max(bits(b)).max(1)
    };
    let start_current = alloc_meter::current();
    let started = Instant::now();
    let (keys, m_keygen) = timed(|| qotp::keygen(width, rng));
    let keys = keys.map_err(|e| e.to_string())?;
    let (prepared, m_encrypt) = timed(|| -> Result<_, String> {
        let carry = qotp::bit_carry(a, b, width).map_err(|e| e.to_string())?;
        let pair = qotp::encrypt(a, b, &keys).map_err(|e| e.to_string())?;
        Ok((carry, pair))
    });
    let (carry, pair) = prepared?;
    let ct_bytes = width as i64;
    let (response, m_cloud) = timed(|| cloud.process(&ProcessRequest::Qotp { pair }));
    let response = response.map_err(|e| e.to_string())?;
    let (sum, m_decrypt) = timed(|| -> Result<u64, String> {
        let ProcessResponse::Qotp { bits, phase } = response else {
            return Err("non-qotp response".into());
        };
        qotp::decrypt(&bits, phase, &keys, carry).map_err(|e| e.to_string())
    });
    let sum = sum?;
    if sum != a + b {
        return Err(format!("qotp pipeline returned {sum}, expected {}", a + b));
    }
    Ok(assemble(
        start_current,
        started,
        [m_keygen, m_encrypt, m_cloud, m_decrypt],
        ct_bytes,
    ))
}

/// Deterministic per-(seed, param, run) RNG so reruns see identical inputs.
fn run_rng(base_seed: u64, param: u64, run: u32) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(
        base_seed ^ param.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ u64::from(run).wrapping_mul(0x85eb_ca6b),
    )
}

/// A uniformly random value of exactly `width` bits (top bit forced).
fn exact_width_summand(width: u32, rng: &mut ChaCha20Rng) -> u64 {
    debug_assert!((1..=63).contains(&width));
    let lo = 1u64 << (width - 1);
    let hi = 1u64 << width;
    rng.random_range(lo..hi)
}

/// GSW parameters for a width-w input sweep point: the modulus must leave
/// room for sums below 2^(w+1), so k = w + 2 capped by the desk-scale
/// maximum of 16. Widths beyond 14 bits are unrepresentable.
fn gsw_input_params(width: u32) -> Result<(usize, u64), String> {
    let k = (width as usize + 2).max(3);
    if k > 16 {
        return Err(format!(
            "gsw input width {width} needs k = {k}, beyond the desk-scale cap of 16"
        ));
    }
    Ok((k, 1u64 << (width + 1)))
}

/// Message bound for the key sweep: 16 where the modulus allows, smaller
/// for tiny moduli (k = 3 gives q = 5).
fn gsw_key_bound(k: u32) -> u64 {
    16u64.min(1u64 << (k - 1))
}

fn push_run(
    records: &mut Vec<BenchRecord>,
    scheme: Scheme,
    sweep: SweepKind,
    param: u64,
    run: u32,
    outcome: Result<RunMeasurement, String>,
) {
    match outcome {
        Ok(m) => {
            for (phase, pm) in Phase::ALL[..4].iter().zip(&m.phases) {
                records.push(BenchRecord {
                    scheme,
                    sweep,
                    param,
                    phase: *phase,
                    run,
                    wall_ns: pm.wall_ns,
                    ct_bytes: m.ct_bytes,
                    peak_alloc_bytes: pm.peak_bytes,
                });
            }
            records.push(BenchRecord {
                scheme,
                sweep,
                param,
                phase: Phase::Total,
                run,
                wall_ns: m.total.wall_ns,
                ct_bytes: m.ct_bytes,
                peak_alloc_bytes: m.total.peak_bytes,
            });
        }
        Err(reason) => {
            eprintln!("bench: {scheme} {}={param} run {run} failed: {reason}", sweep.as_str());
            records.push(BenchRecord {
                scheme,
                sweep,
                param,
                phase: Phase::Total,
                run,
                wall_ns: 0,
                ct_bytes: -1,
                peak_alloc_bytes: -1,
            });
        }
    }
}

fn run_point(
    scheme: Scheme,
    a: u64,
    b: u64,
    k: usize,
    msg_bound: u64,
    cloud: &dyn AdditionService,
    rng: &mut ChaCha20Rng,
) -> Result<RunMeasurement, String> {
    match scheme {
        Scheme::Chen => chen_pipeline(a, b, cloud, rng),
        Scheme::Gsw => gsw_pipeline(a, b, k, msg_bound, cloud, rng),
        Scheme::Qotp => qotp_pipeline(a, b, cloud, rng),
    }
}

/// Runs the full pipeline over seeded random summands of each exact bit
/// width. Failures are recorded (ct_bytes = -1) without aborting the sweep.
pub fn sweep_input_sizes(
    scheme: Scheme,
    widths: &[u32],
    runs: u32,
    cloud: &dyn AdditionService,
    base_seed: u64,
) -> Vec<BenchRecord> {
    assert!(!widths.is_empty(), "widths must not be empty");
    assert!(widths.iter().all(|&w| (1..=32).contains(&w)), "widths must be 1..=32");
    assert!(runs >= 1, "need at least one run");
    let mut records = Vec::new();
    for &width in widths {
        // Untimed warmup with the first run's inputs.
        {
            let mut rng = run_rng(base_seed, u64::from(width), 0);
            let a = exact_width_summand(width, &mut rng);
            let b = exact_width_summand(width, &mut rng);
            let _ = run_for_width(scheme, width, a, b, cloud, &mut rng);
        }
        for run in 0..runs {
            let mut rng = run_rng(base_seed, u64::from(width), run);
            let a = exact_width_summand(width, &mut rng);
            let b = exact_width_summand(width, &mut rng);
            let outcome = run_for_width(scheme, width, a, b, cloud, &mut rng);
            push_run(&mut records, scheme, SweepKind::Input, u64::from(width), run, outcome);
        }
    }
    records
}

fn run_for_width(
    scheme: Scheme,
    width: u32,
    a: u64,
    b: u64,
    cloud: &dyn AdditionService,
    rng: &mut ChaCha20Rng,
) -> Result<RunMeasurement, String> {
    let (k, bound) = match scheme {
        Scheme::Gsw => gsw_input_params(width)?,
        _ => (0, 0),
    };
    run_point(scheme, a, b, k, bound, cloud, rng)
}

/// Runs the pipeline with fixed summands across security parameters. For
/// chen and qotp, k has no effect on the pipeline and is only recorded.
pub fn sweep_key_sizes(
    scheme: Scheme,
    ks: &[u32],
    runs: u32,
    cloud: &dyn AdditionService,
    base_seed: u64,
) -> Vec<BenchRecord> {
    assert!(!ks.is_empty(), "key sizes must not be empty");
    assert!(ks.iter().all(|&k| (3..=16).contains(&k)), "key sizes must be 3..=16");
    assert!(runs >= 1, "need at least one run");
    let (a, b) = KEY_SWEEP_SUMMANDS;
    let mut records = Vec::new();
    for &k in ks {
        let bound = gsw_key_bound(k);
        {
            let mut rng = run_rng(base_seed, u64::from(k), 0);
            let _ = run_point(scheme, a, b, k as usize, bound, cloud, &mut rng);
        }
        for run in 0..runs {
            let mut rng = run_rng(base_seed, u64::from(k), run);
            let outcome = run_point(scheme, a, b, k as usize, bound, cloud, &mut rng);
            push_run(&mut records, scheme, SweepKind::Key, u64::from(k), run, outcome);
        }
    }
    records
}

/// Writes records sorted by (scheme, sweep, param, run, phase) under the
/// frozen header. Refuses to create a file for zero records.
pub fn write_csv(records: &[BenchRecord], path: &Path) -> Result<(), BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let mut sorted: Vec<&BenchRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.scheme.as_str(), r.sweep, r.param, r.run, r.phase));
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "{CSV_HEADER}")?;
    for r in sorted {
        writeln!(
            file,
            "{},{},{},{},{},{},{},{}",
            r.scheme.as_str(),
            r.sweep.as_str(),
            r.param,
            r.phase,
            r.run,
            r.wall_ns,
            r.ct_bytes,
            r.peak_alloc_bytes
        )?;
    }
    Ok(())
}

/// Median of the wall times matching (scheme, sweep, param, phase).
pub fn median_wall_ns(
    records: &[BenchRecord],
    scheme: Scheme,
    sweep: SweepKind,
    param: u64,
    phase: Phase,
) -> Option<u64> {
    let mut values: Vec<u64> = records
        .iter()
        .filter(|r| {
            r.scheme == scheme
                && r.sweep == sweep
                && r.param == param
                && r.phase == phase
                && r.ct_bytes >= 0
        })
        .map(|r| r.wall_ns)
        .collect();
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    Some(values[values.len() / 2])
}
