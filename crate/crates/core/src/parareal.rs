//! Parareal driver.
//!
//! Each iteration runs the fine propagator and the old coarse propagator on
//! every interval in parallel, then a sequential coarse sweep applies
//! `U^{k+1}_{n+1} = F_old(n) + (G_new(n) - G_old(n))`.
//!
//! Intervals whose history prefix `U_{0:n}` is bitwise unchanged since the
//! previous iteration keep their cached propagator outputs.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};
use crate::l1_time::TimeGrids;
use crate::spectral::{SpectralOperator, StateVector};
use crate::stepping::{run_fine_sequential, ProblemSpec, Stepper};

/// Default stopping tolerance on successive iterate differences.
pub const DEFAULT_TOL: f64 = 1e-10;

/// States grow past this multiple of the reference norm are treated as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// Iterate `k` together with the propagator outputs that produced it.
#[derive(Clone, Debug)]
pub struct PararealIterate {
    pub k: usize,
    /// `U^k_0, ..., U^k_{N_t}`.
    pub states: Vec<StateVector>,
    /// `G_n(U^{k-1}_{0:n})`; empty for `k = 0`.
    pub g_old: Vec<StateVector>,
    /// `G_n(U^k_{0:n})`.
    pub g_new: Vec<StateVector>,
    /// Fine endpoints from `U^{k-1}`; empty for `k = 0`.
    pub f_old: Vec<StateVector>,
}

impl PararealIterate {
    /// Largest entry of `U_{n+1} - (F_old(n) + (G_new(n) - G_old(n)))`.
    /// For `k = 0` the check is against the coarse sweep `U_{n+1} = G_new(n)`.
    pub fn correction_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (n, g_new) in self.g_new.iter().enumerate() {
            let expected = if self.k == 0 {
                (**g_new).clone()
            } else {
                &*self.f_old[n] + (&**g_new - &*self.g_old[n])
            };
            worst = worst.max((&*self.states[n + 1] - expected).amax());
        }
        worst
    }

    pub fn last(&self) -> &StateVector {
        self.states.last().expect("iterate holds at least U_0")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// `max_n ||U^{k+1}_n - U^k_n|| < tol`.
    Tolerance,
    /// `k + 1 = K_max`.
    MaxIterations,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::Tolerance => write!(f, "tolerance"),
            StopReason::MaxIterations => write!(f, "max-iterations"),
        }
    }
}

/// Reference used for error reporting.
#[derive(Clone, Debug, Default)]
pub enum Reference {
    #[default]
    None,
    /// Run [`run_fine_sequential`] and time it.
    Sequential,
    /// States at the coarse nodes supplied by the caller.
    Given(Vec<StateVector>),
}

#[derive(Clone, Debug)]
pub struct PararealOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub threads: usize,
    pub reference: Reference,
}

impl Default for PararealOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iterations: 20,
            threads: 1,
            reference: Reference::None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PararealReport {
    pub iterates_used: usize,
    /// `diffs[k-1] = max_n ||U^k_n - U^{k-1}_n||` for `k = 1..=iterates_used`.
    pub diffs: Vec<f64>,
    /// Error of `U^0` at `T_{N_t}` against the reference.
    pub initial_error: Option<f64>,
    /// `final_errors[k-1] = ||U^k_{N_t} - U^ref_{N_t}||`.
    pub final_errors: Vec<f64>,
    /// `max_errors[k-1] = max_n ||U^k_n - U^ref_n||`.
    pub max_errors: Vec<f64>,
    /// Elapsed parareal time after each iteration, coarse initialization included.
    pub cumulative_times: Vec<Duration>,
    pub wall_time_parallel: Duration,
    pub wall_time_fine_reference: Option<Duration>,
    pub stop: StopReason,
    pub threads: usize,
}

/// Stateful parareal iteration over one problem and grid pair.
pub struct PararealDriver<'a> {
    stepper: Stepper<'a>,
    pool: ThreadPool,
    threads: usize,
    guard: f64,
    current: PararealIterate,
    /// First node whose state changed in the last sweep.
    stale_from: usize,
}

impl<'a> PararealDriver<'a> {
    /// Builds the thread pool and runs the coarse initialization sweep.
    pub fn new(
        problem: &'a ProblemSpec,
        op: &'a SpectralOperator,
        grids: TimeGrids,
        threads: usize,
    ) -> Result<Self> {
        if threads == 0 {
            return Err(Error::Argument("threads must be at least 1".into()));
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let stepper = Stepper::new(problem, op, grids);
        let nt = grids.coarse_steps();
        let mut states = Vec::with_capacity(nt + 1);
        states.push(stepper.initial_state());
        let mut g_new = Vec::with_capacity(nt);
        for _ in 0..nt {
            let next = stepper.coarse_step(&states)?;
            g_new.push(next.clone());
            states.push(next);
        }
        let reference = states
            .iter()
            .map(|s| op.l2_norm(s.as_slice()))
            .fold(f64::MIN_POSITIVE, f64::max);
        let guard = reference * DIVERGENCE_FACTOR;
        let current = PararealIterate {
            k: 0,
            states,
            g_old: Vec::new(),
            g_new,
            f_old: Vec::new(),
        };
        let driver = Self {
            stepper,
            pool,
            threads,
            guard,
            current,
            stale_from: 0,
        };
        driver.check_states(&driver.current.states, 0)?;
        Ok(driver)
    }

    pub fn iterate(&self) -> &PararealIterate {
        &self.current
    }

    pub fn into_iterate(self) -> PararealIterate {
        self.current
    }

    pub fn stepper(&self) -> &Stepper<'a> {
        &self.stepper
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    fn check_states(&self, states: &[StateVector], k: usize) -> Result<()> {
        let op = self.stepper.operator();
        for (n, s) in states.iter().enumerate() {
            if !s.is_finite() || op.l2_norm(s.as_slice()) > self.guard {
                return Err(Error::Divergence { k, n });
            }
        }
        Ok(())
    }

    /// `F_old(n)` and `G_old(n)` for `n = from..N_t`, in contiguous blocks per thread.
    fn parallel_stage(&self, from: usize) -> Result<Vec<(StateVector, StateVector)>> {
        let nt = self.stepper.grids().coarse_steps();
        let indices: Vec<usize> = (from..nt).collect();
        if indices.is_empty() {
            return Ok(Vec::new());
        }
        let block = indices.len().div_ceil(self.threads);
        let states = &self.current.states;
        let stepper = &self.stepper;
        let blocks: Vec<Result<Vec<(StateVector, StateVector)>>> = self.pool.install(|| {
            indices
                .par_chunks(block)
                .map(|chunk| {
                    chunk
                        .iter()
                        .map(|&n| {
                            let history = &states[..=n];
                            let f = stepper.fine_endpoint(history)?;
                            let g = stepper.coarse_step(history)?;
                            Ok((f, g))
                        })
                        .collect()
                })
                .collect()
        });
        let mut out = Vec::with_capacity(indices.len());
        for b in blocks {
            out.extend(b?);
        }
        Ok(out)
    }

    /// One parareal iteration `U^k -> U^{k+1}`. Returns `max_n ||U^{k+1}_n - U^k_n||`.
    pub fn advance(&mut self) -> Result<f64> {
        let k = self.current.k;
        let nt = self.stepper.grids().coarse_steps();
        let op = self.stepper.operator();

        // Outputs for intervals below `stale_from` only depend on unchanged states.
        let reuse = if k == 0 { 0 } else { self.stale_from.min(nt) };
        let fresh = self.parallel_stage(reuse)?;
        let mut f_old = Vec::with_capacity(nt);
        let mut g_old = Vec::with_capacity(nt);
        if reuse > 0 {
            f_old.extend_from_slice(&self.current.f_old[..reuse]);
            g_old.extend_from_slice(&self.current.g_new[..reuse]);
        }
        for (f, g) in fresh {
            f_old.push(f);
            g_old.push(g);
        }
        for (n, f) in f_old.iter().enumerate() {
            if !f.is_finite() {
                return Err(Error::Divergence { k, n: n + 1 });
            }
        }

        let mut states = Vec::with_capacity(nt + 1);
        states.push(self.current.states[0].clone());
        let mut g_new = Vec::with_capacity(nt);
        let mut changed: Option<usize> = None;
        for n in 0..nt {
            let g = if changed.is_none() {
                g_old[n].clone()
            } else {
                self.stepper.coarse_step(&states)?
            };
            let next = StateVector::new(&*f_old[n] + (&*g - &*g_old[n]));
            if changed.is_none() && next != self.current.states[n + 1] {
                changed = Some(n + 1);
            }
            g_new.push(g);
            states.push(next);
        }
        self.check_states(&states, k + 1)?;

        let diff = states
            .iter()
            .zip(&self.current.states)
            .map(|(a, b)| op.l2_distance(a.as_slice(), b.as_slice()))
            .fold(0.0, f64::max);
        self.stale_from = changed.unwrap_or(nt + 1);
        self.current = PararealIterate {
            k: k + 1,
            states,
            g_old,
            g_new,
            f_old,
        };
        Ok(diff)
    }
}

/// Error of a trajectory against reference states at the final node and over all nodes.
fn errors_against(
    op: &SpectralOperator,
    states: &[StateVector],
    reference: &[StateVector],
) -> (f64, f64) {
    let mut worst = 0.0f64;
    for (s, r) in states.iter().zip(reference) {
        worst = worst.max(op.l2_distance(s.as_slice(), r.as_slice()));
    }
    let last = op.l2_distance(
        states.last().expect("nonempty").as_slice(),
        reference.last().expect("nonempty").as_slice(),
    );
    (last, worst)
}

/// Parareal with full control over reference and stopping options.
pub fn parareal_solve_with(
    problem: &ProblemSpec,
    op: &SpectralOperator,
    grids: &TimeGrids,
    options: &PararealOptions,
) -> Result<(PararealIterate, PararealReport)> {
    if !(options.tol > 0.0) {
        return Err(Error::Argument(format!("tol must be positive, got {}", options.tol)));
    }
    if options.max_iterations == 0 {
        return Err(Error::Argument("K_max must be at least 1".into()));
    }
    let (reference, fine_time) = match &options.reference {
        Reference::None => (None, None),
        Reference::Sequential => {
            let sol = run_fine_sequential(problem, op, grids)?;
            (Some(sol.coarse_states), Some(sol.wall_time))
        }
        Reference::Given(states) => {
            if states.len() != grids.coarse_steps() + 1 {
                return Err(Error::Argument(format!(
                    "reference has {} states, expected {}",
                    states.len(),
                    grids.coarse_steps() + 1
                )));
            }
            (Some(states.clone()), None)
        }
    };

    let start = Instant::now();
    let mut driver = PararealDriver::new(problem, op, *grids, options.threads)?;
    let initial_error = reference
        .as_deref()
        .map(|r| errors_against(op, &driver.iterate().states, r).0);

    let mut diffs = Vec::new();
    let mut final_errors = Vec::new();
    let mut max_errors = Vec::new();
    let mut cumulative_times = Vec::new();
    let stop = loop {
        let diff = driver.advance()?;
        cumulative_times.push(start.elapsed());
        diffs.push(diff);
        if let Some(r) = reference.as_deref() {
            let (last, worst) = errors_against(op, &driver.iterate().states, r);
            final_errors.push(last);
            max_errors.push(worst);
        }
        if diff < options.tol {
            break StopReason::Tolerance;
        }
        if driver.iterate().k >= options.max_iterations {
            break StopReason::MaxIterations;
        }
    };
    let wall_time_parallel = start.elapsed();
    let report = PararealReport {
        iterates_used: diffs.len(),
        diffs,
        initial_error,
        final_errors,
        max_errors,
        cumulative_times,
        wall_time_parallel,
        wall_time_fine_reference: fine_time,
        stop,
        threads: options.threads,
    };
    Ok((driver.into_iterate(), report))
}

/// `parareal_solve(problem, op, grids, tol, K_max, threads)` without a reference.
pub fn parareal_solve(
    problem: &ProblemSpec,
    op: &SpectralOperator,
    grids: &TimeGrids,
    tol: f64,
    max_iterations: usize,
    threads: usize,
) -> Result<(PararealIterate, PararealReport)> {
    parareal_solve_with(
        problem,
        op,
        grids,
        &PararealOptions {
            tol,
            max_iterations,
            threads,
            reference: Reference::None,
        },
    )
}

/// Fine propagator chained sequentially over intervals `0..intervals`.
pub fn chained_fine(
    problem: &ProblemSpec,
    op: &SpectralOperator,
    grids: &TimeGrids,
    intervals: usize,
) -> Result<Vec<StateVector>> {
    Stepper::new(problem, op, *grids).chained_fine(intervals)
}

/// `max_{n <= k} ||U^k_n - V_n||` where `V` chains the fine propagator over
/// the first `k` intervals.
pub fn exactness_check(
    problem: &ProblemSpec,
    op: &SpectralOperator,
    grids: &TimeGrids,
    k: usize,
) -> Result<f64> {
    if k > grids.coarse_steps() {
        return Err(Error::Argument(format!(
            "k = {k} exceeds N_t = {}",
            grids.coarse_steps()
        )));
    }
    let mut driver = PararealDriver::new(problem, op, *grids, 1)?;
    for _ in 0..k {
        driver.advance()?;
    }
    let chain = driver.stepper().chained_fine(k)?;
    Ok(chain
        .iter()
        .zip(&driver.iterate().states)
        .map(|(a, b)| op.l2_distance(a.as_slice(), b.as_slice()))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{linear_heat, paper42};

    #[test]
    fn single_interval_reproduces_fine_endpoint() {
        let p = paper42();
        let op = SpectralOperator::new(8, 0.0, 1.0).unwrap();
        let g = TimeGrids::new(1.0, 1, 4).unwrap();
        let (it, report) = parareal_solve(&p, &op, &g, 1e-10, 5, 1).unwrap();
        let fine = Stepper::new(&p, &op, g)
            .fine_endpoint(&it.states[..1])
            .unwrap();
        assert_eq!(it.states[1], fine);
        assert_eq!(report.stop, StopReason::Tolerance);
        assert_eq!(report.iterates_used, 2);
        assert_eq!(report.diffs.len(), report.iterates_used);
    }

    #[test]
    fn correction_identity_holds_on_every_iterate() {
        let p = paper42();
        let op = SpectralOperator::new(8, 0.0, 1.0).unwrap();
        let g = TimeGrids::new(1.0, 6, 3).unwrap();
        let mut d = PararealDriver::new(&p, &op, g, 2).unwrap();
        assert_eq!(d.iterate().correction_residual(), 0.0);
        for _ in 0..3 {
            d.advance().unwrap();
            assert_eq!(d.iterate().correction_residual(), 0.0);
            assert_eq!(d.iterate().states[0], p.initial_state(&op));
        }
    }

    #[test]
    fn exactness_at_zero_and_one() {
        let p = linear_heat();
        let op = SpectralOperator::new(8, 0.0, 1.0).unwrap();
        let g = TimeGrids::new(1.0, 4, 4).unwrap();
        assert_eq!(exactness_check(&p, &op, &g, 0).unwrap(), 0.0);
        assert!(exactness_check(&p, &op, &g, 1).unwrap() <= 1e-12);
        assert!(exactness_check(&p, &op, &g, 5).is_err());
    }

    #[test]
    fn argument_checks() {
        let p = paper42();
        let op = SpectralOperator::new(6, 0.0, 1.0).unwrap();
        let g = TimeGrids::new(1.0, 2, 2).unwrap();
        assert!(parareal_solve(&p, &op, &g, 0.0, 3, 1).is_err());
        assert!(parareal_solve(&p, &op, &g, 1e-10, 0, 1).is_err());
        assert!(parareal_solve(&p, &op, &g, 1e-10, 3, 0).is_err());
    }

    #[test]
    fn blowup_is_reported_as_divergence() {
        let p = ProblemSpec::new(
            "blowup",
            0.0,
            1.0,
            1.0,
            crate::FractionalOrder::new(0.5).unwrap(),
            |_, _, _| 1.0,
            |_, _, u| 1e8 * u + 1.0,
            |_| 0.0,
        );
        let op = SpectralOperator::new(6, 0.0, 1.0).unwrap();
        let g = TimeGrids::new(1.0, 4, 8).unwrap();
        let err = parareal_solve(&p, &op, &g, 1e-10, 4, 1).unwrap_err();
        assert!(matches!(err, Error::Divergence { k: 1, .. }), "{err:?}");
    }
}
