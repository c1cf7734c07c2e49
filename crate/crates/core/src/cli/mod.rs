//! Config-driven experiment runner.
//!
//! ```text
//! rootflow --config run.toml --out results/ [--threads 4] [--seed 0]
//! ```
//!
//! The config is a flat TOML file (see [`ExperimentConfig`]); any key can
//! be overridden with an environment variable `ROOTFLOW_<KEY>`. Outputs are
//! CSV (`t,x,u`, `x`, `t,mass`) and JSON, deterministic for a given config.
//!
//! Exit codes: 0 success, 2 config error, 3 oracle error, 4 solver error.

mod commands;
mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::Parser;

pub use commands::{cmd_compare, cmd_exact, cmd_linearized, cmd_pde, cmd_poly, profile_grid, ARCSINE_CAP, PROFILE_POINTS};
pub use config::{ExperimentConfig, FamilyKind, Mode, Side, ENV_PREFIX};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "rootflow", version, about = "Root densities under repeated differentiation")]
pub struct Args {
    /// Experiment config (flat TOML).
    #[arg(long, env = "ROOTFLOW_CONFIG")]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, env = "ROOTFLOW_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for root solves; defaults to all cores.
    #[arg(long, env = "ROOTFLOW_THREADS")]
    pub threads: Option<usize>,
    /// Reserved; sampling is deterministic.
    #[arg(long, env = "ROOTFLOW_SEED")]
    pub seed: Option<u64>,
}

/// A failed run, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Config(Error),
    Oracle(Error),
    Solver(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Oracle(_) => 3,
            Self::Solver(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e @ Error::Config(_)) => write!(f, "{e}"),
            Self::Config(e) => write!(f, "config error: {e}"),
            Self::Oracle(e) => write!(f, "oracle error: {e}"),
            Self::Solver(e) => write!(f, "solver error: {e}"),
        }
    }
}

impl std::error::Error for Failure {}

pub(crate) trait ResultExt<T> {
    fn config(self) -> Result<T, Failure>;
    fn oracle(self) -> Result<T, Failure>;
    fn solver(self) -> Result<T, Failure>;
}

impl<T> ResultExt<T> for crate::Result<T> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(Failure::Config)
    }

    fn oracle(self) -> Result<T, Failure> {
        self.map_err(Failure::Oracle)
    }

    fn solver(self) -> Result<T, Failure> {
        self.map_err(|e| match e {
            Error::RejectedInput(_) | Error::Config(_) => Failure::Config(e),
            other => Failure::Solver(other),
        })
    }
}

/// Run one experiment, writing into `out`. Returns the files written.
pub fn execute(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, Failure> {
    cfg.validate().config()?;
    std::fs::create_dir_all(out).map_err(|e| Failure::Config(Error::Io(e)))?;
    match cfg.mode {
        Mode::Exact => cmd_exact(cfg, out),
        Mode::Pde => cmd_pde(cfg, out),
        Mode::Poly => cmd_poly(cfg, out),
        Mode::Linearized => cmd_linearized(cfg, out),
        Mode::Compare => cmd_compare(cfg, out),
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match ExperimentConfig::load(&args.config, std::env::vars()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", Failure::Config(e));
            return 2;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("config error: --threads must be at least 1");
            return 2;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(&cfg, &args.out)) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}
