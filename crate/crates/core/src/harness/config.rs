//! Run configuration: a TOML file with optional sections, overridden by flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::l1_time::FractionalOrder;
use crate::problems::builtin;
use crate::stepping::ProblemSpec;

/// Hardware parallelism, or 1 when it cannot be queried.
pub fn hardware_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Sequential L1 marching on the fine grid.
    #[default]
    Fine,
    /// Coarse propagator only.
    Coarse,
}

/// Test functions with closed-form Caputo derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    /// `y = 1`.
    Constant,
    /// `y = t`.
    Linear,
    /// `y = t^{1/2}`.
    Sqrt,
    /// `y = t^alpha + t`.
    #[default]
    PowerPlusLinear,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub solver: SolverKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PararealConfig {
    /// Compare each iterate against the sequential fine solution.
    pub reference: bool,
}

impl Default for PararealConfig {
    fn default() -> Self {
        Self { reference: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Degrees of freedom `N_t * M`, each a power of two.
    pub sweep: Vec<usize>,
    /// Timed repetitions after one warm-up run.
    pub reps: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sweep: vec![1 << 9, 1 << 11, 1 << 13],
            reps: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e0: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            n: 10,
            a: 1.0,
            b: 1.1,
            c: 1.001,
            e0: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub function: TestFunction,
    /// Coarse step counts `N_t`; `M` is taken from the top level.
    pub sweep: Vec<usize>,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            function: TestFunction::PowerPlusLinear,
            sweep: vec![16, 32, 64, 128, 256],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    pub alpha: f64,
    pub nt: usize,
    pub m: usize,
    /// Spectral degree.
    pub n: usize,
    pub tol: f64,
    pub kmax: usize,
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub solve: SolveConfig,
    pub parareal: PararealConfig,
    pub bench: BenchConfig,
    pub bounds: BoundsConfig,
    pub truncation: TruncationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "paper42".into(),
            alpha: 0.5,
            nt: 256,
            m: 32,
            n: 16,
            tol: 1e-10,
            kmax: 20,
            threads: hardware_threads(),
            out: None,
            solve: SolveConfig::default(),
            parareal: PararealConfig::default(),
            bench: BenchConfig::default(),
            bounds: BoundsConfig::default(),
            truncation: TruncationConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Check the grid, solver and thread settings used by the solver commands.
    pub fn validate(&self) -> Result<()> {
        FractionalOrder::new(self.alpha).map_err(|e| Error::Config(e.to_string()))?;
        let positive = [("nt", self.nt), ("m", self.m), ("kmax", self.kmax), ("threads", self.threads)];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.n < 2 {
            return Err(Error::Config(format!("spectral degree n must be >= 2, got {}", self.n)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        builtin(&self.problem)?;
        Ok(())
    }

    /// The selected builtin with the configured fractional order.
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let alpha = FractionalOrder::new(self.alpha).map_err(|e| Error::Config(e.to_string()))?;
        Ok(builtin(&self.problem)?.with_alpha(alpha))
    }
}
