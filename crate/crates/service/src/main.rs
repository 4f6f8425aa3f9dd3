use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use clinic_core::eho::policy::load_policy;
use clinic_core::store::DocStore;
use clinic_core::{Clinic, ClinicConfig, SystemClock};
use clinic_service::{api, report, seed};

#[derive(Parser)]
#[command(name = "clinic", version, about = "Clinic 2.0 service and admin tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "CLINIC_BIND", default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long, env = "CLINIC_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        #[arg(long, env = "CLINIC_PRESENCE_WINDOW_SECS", default_value_t = 90)]
        presence_window_secs: i64,
        /// Empowerment policy file; the shipped default is used when absent.
        #[arg(long, env = "CLINIC_POLICY")]
        policy: Option<PathBuf>,
    },
    /// Check an empowerment policy file.
    ValidateConfig { path: PathBuf },
    /// Load accounts, groups and MOTD fixtures into a data directory.
    Seed {
        #[arg(long)]
        fixtures: PathBuf,
        #[arg(long, env = "CLINIC_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
    },
    /// Survey fixture reports.
    Report {
        #[command(subcommand)]
        report: ReportCommand,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Print the shipped survey tables verbatim.
    Survey {
        /// `demographics` or `empowerment`; both when omitted.
        #[arg(long)]
        table: Option<String>,
    },
    /// Compare pre and post score files (`respondent,score` CSV).
    Prepost {
        #[arg(long)]
        pre: PathBuf,
        #[arg(long)]
        post: PathBuf,
        /// `literacy` or `satisfaction`.
        #[arg(long, default_value = "literacy")]
        instrument: String,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

fn open_clinic(data_dir: &PathBuf, config: ClinicConfig) -> Result<Clinic> {
    let store = DocStore::open(data_dir).with_context(|| format!("opening data directory {}", data_dir.display()))?;
    Ok(Clinic::new(store, Arc::new(SystemClock), config))
}

async fn serve(bind: SocketAddr, data_dir: PathBuf, presence_window_secs: i64, policy: Option<PathBuf>) -> Result<()> {
    let config = ClinicConfig { presence_window: chrono::Duration::seconds(presence_window_secs), ..ClinicConfig::default() };
    let mut clinic = open_clinic(&data_dir, config)?;
    if let Some(path) = policy {
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        clinic = clinic.with_policy(load_policy(&text).with_context(|| path.display().to_string())?);
    }
    let app = api::router(Arc::new(clinic));
    let listener = tokio::net::TcpListener::bind(bind).await.with_context(|| format!("binding {bind}"))?;
    let local = listener.local_addr()?;
    println!("listening on {local}");
    tracing::info!(%local, data_dir = %data_dir.display(), "serving");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Serve { bind, data_dir, presence_window_secs, policy } => {
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(serve(bind, data_dir, presence_window_secs, policy))?;
        }
        Command::ValidateConfig { path } => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            match load_policy(&text) {
                Ok(p) => println!(
                    "ok: version {}, {} sub-modules, {} overrides",
                    p.version(),
                    p.levels().len(),
                    p.overrides().len()
                ),
                Err(e) => {
                    eprintln!("{}: {e}", path.display());
                    println!("{e}");
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Command::Seed { fixtures, data_dir } => {
            let clinic = open_clinic(&data_dir, ClinicConfig::default())?;
            let s = seed::seed(&clinic, &fixtures)?;
            println!("seeded {} rows, skipped {} already applied", s.applied, s.skipped);
        }
        Command::Report { report: ReportCommand::Survey { table } } => {
            print!("{}", report::survey(table.as_deref())?);
        }
        Command::Report { report: ReportCommand::Prepost { pre, post, instrument, json } } => {
            let r = report::prepost(&pre, &post, &instrument)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{}", r.to_text());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
