use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use postedit_server::config::{ServiceConfig, StoreBackend};
use postedit_server::store::audit;
use postedit_server::{build_state, open_store, router};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "postedit-server", about = "MT post-editing annotation service")]
struct Cli {
    /// TOML config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Listen address, overrides the config file
    #[arg(long, global = true)]
    bind: Option<String>,
    #[arg(long, value_enum, global = true)]
    store: Option<StoreBackend>,
    #[arg(long, global = true)]
    store_path: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service (default)
    Serve,
    /// Scan the store for broken invariants and print a JSON report
    Audit,
}

fn load_config(cli: &Cli) -> Result<ServiceConfig, Box<dyn std::error::Error>> {
    let mut config = match &cli.config {
        Some(path) => ServiceConfig::load(path)?,
        None => ServiceConfig::default(),
    };
    if let Some(bind) = &cli.bind {
        config.bind = bind.clone();
    }
    if let Some(store) = cli.store {
        config.store = store;
    }
    if let Some(path) = &cli.store_path {
        config.store_path = Some(path.clone());
    }
    config.validate()?;
    Ok(config)
}

async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error>> {
    let state = build_state(&config)?;
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    tracing::info!(
        addr = %listener.local_addr()?,
        store = ?config.store,
        engines = ?state.service.engine_names(),
        auth = !state.tokens.is_empty(),
        "listening"
    );
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn run_audit(config: &ServiceConfig) -> Result<bool, Box<dyn std::error::Error>> {
    let store = open_store(config)?;
    let report = audit(&store.snapshot());
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report.is_clean())
}

async fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let config = load_config(&cli)?;
    match cli.command.unwrap_or(Command::Serve) {
        Command::Serve => serve(config).await.map(|()| ExitCode::SUCCESS),
        Command::Audit => Ok(if run_audit(&config)? {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }),
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()).await {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
