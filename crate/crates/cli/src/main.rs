//! `wisar` command-line front end.
//!
//! Operations run in-process unless `--server` points at a `wisar serve`
//! instance, in which case they go through the HTTP client. Exit status is 0
//! on success, 2 on usage errors and 1 on runtime errors. `WISAR_LOG` takes a
//! tracing filter such as `info` or `wisar_core=debug`; logs go to stderr.

mod args;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;
use tracing_subscriber::EnvFilter;

use args::{Algorithm, Cli, Command, Common, Metric, PdmCommand, RunArgs};
use wisar_client::{HttpClient, PolicyClient, POLICY_ALGORITHM};
use wisar_core::env::EnvConfig;
use wisar_core::eval::{
    aggregate, planner_for, write_summary_csv, EvalSettings, Experiment, MetricSummary, Planner, PolicyPlanner,
    RecordsHeader, RunRecord,
};
use wisar_core::pdm::Pdm;
use wisar_core::protocol::{CompareRequest, CompareResponse, GenerateRequest, PlanRequest, PlanResponse};
use wisar_server::ops;

/// Argument combinations clap cannot reject on its own.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("WISAR_LOG").unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(io::stderr)
        .init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return ExitCode::from(1);
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

enum Backend {
    Local,
    Remote(HttpClient),
}

impl Backend {
    async fn generate(&self, req: GenerateRequest) -> anyhow::Result<Pdm> {
        Ok(match self {
            Backend::Local => ops::generate(&req)?,
            Backend::Remote(c) => c.generate_pdm(&req).await?,
        })
    }

    async fn plan(&self, req: PlanRequest) -> anyhow::Result<PlanResponse> {
        Ok(match self {
            Backend::Local => ops::plan(&req)?,
            Backend::Remote(c) => c.plan(&req).await?,
        })
    }

    async fn compare(&self, req: CompareRequest) -> anyhow::Result<CompareResponse> {
        Ok(match self {
            Backend::Local => ops::compare(&req)?,
            Backend::Remote(c) => c.compare(&req).await?,
        })
    }
}

async fn run(cli: Cli) -> anyhow::Result<()> {
    let backend = match &cli.server {
        Some(url) => Backend::Remote(HttpClient::new(url.clone())),
        None => Backend::Local,
    };
    match cli.command {
        Command::Pdm { command: PdmCommand::Gen { common } } => {
            let config = load_config(common.config.as_deref())?;
            let pdm = backend.generate(GenerateRequest { seed: common.seed, config }).await?;
            let mut text = serde_json::to_string_pretty(&pdm)?;
            text.push('\n');
            write_output(common.out.as_deref(), text.as_bytes())
        }
        Command::Plan { algorithm, common } => {
            let config = load_config(common.config.as_deref())?;
            let req = PlanRequest {
                algorithm: algorithm.label().to_string(),
                seed: common.seed,
                config,
                settings: EvalSettings::default(),
            };
            let planned = backend.plan(req).await?;
            let mut line = serde_json::to_string(&planned.path)?;
            line.push('\n');
            write_output(common.out.as_deref(), line.as_bytes())
        }
        Command::Eval { metric, common, run } => eval(&backend, metric, common, run).await,
        Command::Compare { common, run, summary } => compare(&backend, common, run, summary).await,
        Command::ServeEnv { config, listen } => {
            if cli.server.is_some() {
                return Err(usage("--server cannot be combined with serve-env"));
            }
            let config = load_config(config.as_deref())?;
            config.validate()?;
            match listen {
                Some(addr) => {
                    let listener = tokio::net::TcpListener::bind(&addr).await.with_context(|| format!("binding {addr}"))?;
                    eprintln!("listening on {}", listener.local_addr()?);
                    wisar_server::serve_tcp(config, listener).await?;
                }
                None => wisar_server::serve_stdio(config).await?,
            }
            Ok(())
        }
        Command::Serve { config, listen } => {
            if cli.server.is_some() {
                return Err(usage("--server cannot be combined with serve"));
            }
            let config = load_config(config.as_deref())?;
            let listener = tokio::net::TcpListener::bind(&listen).await.with_context(|| format!("binding {listen}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            wisar_server::serve_http(listener, config).await?;
            Ok(())
        }
    }
}

async fn eval(backend: &Backend, metric: Metric, common: Common, run: RunArgs) -> anyhow::Result<()> {
    let (records, _) = run_records(backend, &common, &run, None).await?;
    let rows: Vec<MetricSummary> = aggregate(&records)
        .into_iter()
        .filter(|r| metric.summary_metrics().contains(&r.metric.as_str()))
        .collect();
    let mut out = Vec::new();
    write_summary_csv(&mut out, &rows)?;
    write_output(common.out.as_deref(), &out)
}

async fn compare(backend: &Backend, common: Common, run: RunArgs, summary: Option<PathBuf>) -> anyhow::Result<()> {
    let records_path = common.out.clone().unwrap_or_else(|| PathBuf::from("runs.jsonl"));
    let summary_path = summary.unwrap_or_else(|| records_path.with_extension("summary.csv"));
    let (records, _) = run_records(backend, &common, &run, Some(&records_path)).await?;
    let mut out = Vec::new();
    write_summary_csv(&mut out, &aggregate(&records))?;
    write_output(Some(&summary_path), &out)?;
    eprintln!("{} records in {}, summary in {}", records.len(), records_path.display(), summary_path.display());
    Ok(())
}

/// Runs the experiment; with `records_path` the records also stream to that
/// file (resuming it when run locally).
async fn run_records(
    backend: &Backend,
    common: &Common,
    run: &RunArgs,
    records_path: Option<&Path>,
) -> anyhow::Result<(Vec<RunRecord>, EvalSettings)> {
    let config = load_config(common.config.as_deref())?;
    let settings = load_settings(run.settings.as_deref())?;
    let wants_policy = run.algorithms.contains(&Algorithm::SacFsCnn);
    if wants_policy && run.policy_endpoint.is_none() {
        return Err(usage("sac-fs-cnn needs --policy-endpoint"));
    }
    let mut labels: Vec<&str> = Vec::new();
    for a in &run.algorithms {
        if !labels.contains(&a.label()) {
            labels.push(a.label());
        }
    }
    match backend {
        Backend::Remote(_) => {
            if wants_policy {
                return Err(usage("sac-fs-cnn can only be evaluated without --server"));
            }
            if let Some(p) = records_path {
                if fs::metadata(p).map(|m| m.len() > 0).unwrap_or(false) {
                    bail!("{} already exists; resuming is only supported without --server", p.display());
                }
            }
            let req = CompareRequest {
                algorithms: labels.iter().map(|s| s.to_string()).collect(),
                runs: run.runs,
                seed: common.seed,
                config: config.clone(),
                settings: settings.clone(),
            };
            let resp = backend.compare(req).await?;
            if let Some(p) = records_path {
                write_records(p, &RecordsHeader::new(&config, &settings), &resp.records)?;
            }
            Ok((resp.records, settings))
        }
        Backend::Local => {
            let mut planners: Vec<Box<dyn Planner>> = Vec::new();
            for label in &labels {
                if *label == POLICY_ALGORITHM {
                    let endpoint = run.policy_endpoint.as_deref().expect("checked above");
                    let client = PolicyClient::connect(endpoint)
                        .with_context(|| format!("connecting to policy server {endpoint}"))?;
                    planners.push(Box::new(PolicyPlanner::new(POLICY_ALGORITHM, client)));
                } else {
                    planners.push(planner_for(label, &settings)?);
                }
            }
            let exp = Experiment::new(config, settings.clone(), run.runs, common.seed)?;
            let records = match records_path {
                Some(p) => exp.run_to_file(&mut planners, p)?,
                None => exp.run(&mut planners)?,
            };
            Ok((records, settings))
        }
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<EnvConfig> {
    match path {
        None => Ok(EnvConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let config: EnvConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            config.validate()?;
            Ok(config)
        }
    }
}

fn load_settings(path: Option<&Path>) -> anyhow::Result<EvalSettings> {
    match path {
        None => Ok(EvalSettings::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?)
        }
    }
}

fn write_records(path: &Path, header: &RecordsHeader, records: &[RunRecord]) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}
