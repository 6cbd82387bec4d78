//! Container entrypoint: reads the port from the environment and serves
//! until stopped.

use hecloud_service::{serve, ServiceConfig};

#[tokio::main]
async fn main() {
    let config = match ServiceConfig::from_env() {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(2);
        }
    };
    if let Err(err) = serve(config).await {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
