use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use confplane_server::{Service, ServiceConfig};
use tracing_subscriber::EnvFilter;

/// Configuration control plane service.
#[derive(Parser)]
#[command(name = "confplane-server", version)]
struct Args {
    /// Address to listen on.
    #[arg(long, env = "CONFPLANE_LISTEN", default_value = "127.0.0.1:8080")]
    listen: String,
    /// Store file; created if missing.
    #[arg(long, env = "CONFPLANE_STORE", default_value = "confplane.redb")]
    store: PathBuf,
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    tracing::info!("shutting down");
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let args = Args::parse();
    let config = ServiceConfig { listen: args.listen, store: args.store };
    let service = match Service::bind(&config).await {
        Ok(s) => s,
        Err(e) => {
            eprintln!("confplane-server: {e}");
            return ExitCode::FAILURE;
        }
    };
    match service.local_addr() {
        Ok(addr) => {
            // Scripts wait for this line to learn the bound port.
            println!("listening on {addr}");
            let _ = std::io::stdout().flush();
        }
        Err(e) => {
            eprintln!("confplane-server: {e}");
            return ExitCode::FAILURE;
        }
    }
    if let Err(e) = service.run(shutdown_signal()).await {
        eprintln!("confplane-server: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
