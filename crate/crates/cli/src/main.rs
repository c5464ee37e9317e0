//! `hardy`: batch driver producing CSV/JSON reports for the experiments.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hardy_core::io::ExperimentConfig;
use hardy_core::Error;

#[derive(Parser, Debug)]
#[command(name = "hardy", version, about = "Sampling, stability and uniqueness experiments in Hardy spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extremal configurations V_n, mu_n, M_n of a point set.
    Extremal(Common),
    /// Two-sided bounds on the stability modulus for each eps.
    Stability(Common),
    /// Recovery of a model function from its values on the nodes.
    Recover(Common),
    /// Block partition, uniqueness weights and sample audit of a sequence.
    Uniqueness(Common),
    /// Mass sums, Stolz flags and E_r arc measures.
    Diagnose(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Point file (CSV: re,im | r,theta | r,theta_deg).
    #[arg(long)]
    input: PathBuf,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for reports; created if missing.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for randomized probes; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Parse { .. }) | CliError::Usage(_) => 2,
            CliError::Core(Error::BudgetExceeded { .. }) => 3,
            CliError::Core(Error::Internal(_)) | CliError::Io(..) => 1,
            CliError::Core(_) => 4,
        }
    }
}

pub struct Context {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub config: ExperimentConfig,
}

impl Context {
    fn load(common: &Common) -> Result<Self, CliError> {
        let mut config = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.clone(), e))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = common.seed {
            config.seed = seed;
        }
        std::fs::create_dir_all(&common.out_dir)
            .map_err(|e| CliError::Io(common.out_dir.clone(), e))?;
        Ok(Context {
            input: common.input.clone(),
            out_dir: common.out_dir.clone(),
            config,
        })
    }

    pub fn read_input(&self) -> Result<String, CliError> {
        std::fs::read_to_string(&self.input).map_err(|e| CliError::Io(self.input.clone(), e))
    }

    pub fn label(&self) -> String {
        self.input
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

type Handler = fn(&Context) -> Result<(), CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, cmd): (&Common, Handler) = match &cli.command {
        Command::Extremal(c) => (c, commands::extremal),
        Command::Stability(c) => (c, commands::stability),
        Command::Recover(c) => (c, commands::recover),
        Command::Uniqueness(c) => (c, commands::uniqueness),
        Command::Diagnose(c) => (c, commands::diagnose),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let ctx = Context::load(common)?;
    cmd(&ctx)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
