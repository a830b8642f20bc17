//! Command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::commands::{cmd_bench, cmd_bounds, cmd_parareal, cmd_solve, cmd_truncation};
use crate::harness::config::{hardware_threads, RunConfig, SolverKind, TestFunction};

#[derive(Debug, Parser)]
#[command(name = "fracpar", version, about = "Parareal for time-fractional subdiffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by the solver commands.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Builtin problem: paper42, linear-heat, constant-D, zero.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Coarse steps N_t.
    #[arg(long)]
    pub nt: Option<usize>,
    /// Fine steps per coarse interval M.
    #[arg(long)]
    pub m: Option<usize>,
    /// Spectral degree N.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Worker threads; defaults to the hardware parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    fn base_config(&self) -> Result<RunConfig> {
        match &self.config {
            Some(path) => RunConfig::load(path),
            None => Ok(RunConfig::default()),
        }
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.problem {
            cfg.problem = v.clone();
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.nt {
            cfg.nt = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.kmax {
            cfg.kmax = v;
        }
        if let Some(v) = self.threads {
            cfg.threads = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = self.base_config()?;
        self.apply(&mut cfg);
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-node norms of a sequential solve.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        solver: Option<SolverKind>,
    },
    /// Parareal iteration history.
    Parareal {
        #[command(flatten)]
        common: CommonArgs,
        /// Compare every iterate with the sequential fine solution.
        #[arg(long)]
        reference: bool,
        /// Skip the fine reference.
        #[arg(long, conflicts_with = "reference")]
        no_reference: bool,
    },
    /// Runtime, speedup and allocation sweep over degrees of freedom.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma separated list of N_t * M values.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<usize>>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Binomial sums of the Gronwall recurrence and their closed-form bounds.
    Bounds {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Coarse node index n.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        e0: Option<f64>,
    },
    /// Hybrid L1 operator errors against closed-form Caputo derivatives.
    Truncation {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        function: Option<TestFunction>,
        /// Comma separated list of N_t * M values; M comes from --m.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<usize>>,
    },
}

/// Effective configuration and the command to run with it.
pub fn resolve(command: &Command) -> Result<RunConfig> {
    match command {
        Command::Solve { common, solver } => {
            let mut cfg = common.resolve()?;
            if let Some(s) = solver {
                cfg.solve.solver = *s;
            }
            Ok(cfg)
        }
        Command::Parareal {
            common,
            reference,
            no_reference,
        } => {
            let mut cfg = common.resolve()?;
            if *reference {
                cfg.parareal.reference = true;
            }
            if *no_reference {
                cfg.parareal.reference = false;
            }
            Ok(cfg)
        }
        Command::Bench { common, sweep, reps } => {
            let mut cfg = common.resolve()?;
            if let Some(s) = sweep {
                cfg.bench.sweep = s.clone();
            }
            if let Some(r) = reps {
                cfg.bench.reps = *r;
            }
            Ok(cfg)
        }
        Command::Bounds {
            config,
            out,
            n,
            a,
            b,
            c,
            e0,
        } => {
            let common = CommonArgs {
                config: config.clone(),
                out: out.clone(),
                ..CommonArgs::default()
            };
            let mut cfg = common.resolve()?;
            let bounds = &mut cfg.bounds;
            if let Some(v) = n {
                bounds.n = *v;
            }
            if let Some(v) = a {
                bounds.a = *v;
            }
            if let Some(v) = b {
                bounds.b = *v;
            }
            if let Some(v) = c {
                bounds.c = *v;
            }
            if let Some(v) = e0 {
                bounds.e0 = *v;
            }
            Ok(cfg)
        }
        Command::Truncation {
            common,
            function,
            sweep,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(f) = function {
                cfg.truncation.function = *f;
            }
            if let Some(s) = sweep {
                let m = cfg.m.max(1);
                if let Some(bad) = s.iter().find(|&&d| d == 0 || d % m != 0) {
                    return Err(Error::Config(format!(
                        "truncation sweep value {bad} is not a positive multiple of M = {m}"
                    )));
                }
                cfg.truncation.sweep = s.iter().map(|d| d / m).collect();
            }
            Ok(cfg)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve(&cli.command)?;
    match &cli.command {
        Command::Solve { .. } | Command::Parareal { .. } | Command::Bench { .. } => {
            eprintln!(
                "fracpar: {} threads (hardware parallelism {})",
                cfg.threads,
                hardware_threads()
            );
        }
        _ => {}
    }
    match &cli.command {
        Command::Solve { .. } => cmd_solve(&cfg),
        Command::Parareal { .. } => cmd_parareal(&cfg),
        Command::Bench { .. } => cmd_bench(&cfg),
        Command::Bounds { .. } => cmd_bounds(&cfg),
        Command::Truncation { .. } => cmd_truncation(&cfg),
    }
}

/// Exit status for an error: 2 for invalid input, 1 for run failures.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::Argument(_)
        | Error::Domain(_)
        | Error::Parameter(_)
        | Error::Range(_) => 2,
        _ => 1,
    }
}

/// Parse the process arguments, run, and report a single-line diagnostic on failure.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracpar: error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
