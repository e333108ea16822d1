use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "wisar", version, about = "Probabilistic search path planning and evaluation")]
pub struct Cli {
    /// Route operations through a running `wisar serve` instance.
    #[arg(long, global = true, value_name = "URL")]
    pub server: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Environment configuration (JSON, EnvConfig field names).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Evaluation settings (JSON: n_pod_steps, n_targets, n_walk, gw).
    #[arg(long, value_name = "FILE")]
    pub settings: Option<PathBuf>,

    #[arg(long, value_delimiter = ',', default_value = "lawnmower,lhc-gw-conv")]
    pub algorithms: Vec<Algorithm>,

    #[arg(long, default_value_t = 100)]
    pub runs: u64,

    /// Policy server queried for `sac-fs-cnn`.
    #[arg(long, value_name = "HOST:PORT")]
    pub policy_endpoint: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probability map utilities.
    Pdm {
        #[command(subcommand)]
        command: PdmCommand,
    },
    /// Plan a path on the PDM drawn from `--seed`; writes one Path record.
    Plan {
        algorithm: Planner,
        #[command(flatten)]
        common: Common,
    },
    /// Score algorithms over seeded runs and print the metric summary.
    Eval {
        metric: Metric,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Paired comparison: writes run records and a summary CSV.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        /// Summary CSV path; defaults to the records path with `.summary.csv`.
        #[arg(long, value_name = "FILE")]
        summary: Option<PathBuf>,
    },
    /// Serve the environment protocol on stdio, or on TCP with `--listen`.
    ServeEnv {
        /// Environment configuration served to every connection.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// TCP address to listen on.
        #[arg(long, value_name = "ADDR")]
        listen: Option<String>,
    },
    /// Run the HTTP/JSON service.
    Serve {
        /// Environment configuration for the env sessions.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "ADDR", default_value = "127.0.0.1:8080")]
        listen: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum PdmCommand {
    /// Generate a random Gaussian-mixture PDM.
    Gen {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Planner {
    Lawnmower,
    LhcGwConv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Pod,
    Dtf,
}

impl Metric {
    pub fn summary_metrics(self) -> &'static [&'static str] {
        match self {
            Metric::Pod => &["e_p_final", "p_final"],
            Metric::Dtf => &["dtf", "pf"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Lawnmower,
    LhcGwConv,
    Random,
    SacFsCnn,
}

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Lawnmower => wisar_core::planners::LAWNMOWER,
            Algorithm::LhcGwConv => wisar_core::planners::LHC_GW_CONV,
            Algorithm::Random => wisar_core::eval::RANDOM_POLICY,
            Algorithm::SacFsCnn => wisar_client::POLICY_ALGORITHM,
        }
    }
}

impl Planner {
    pub fn label(self) -> &'static str {
        match self {
            Planner::Lawnmower => wisar_core::planners::LAWNMOWER,
            Planner::LhcGwConv => wisar_core::planners::LHC_GW_CONV,
        }
    }
}
