//! Semi-implicit L1 time marching.
//!
//! Every step solves the dense interior system
//!
//! ```text
//! (I - tau A(U_prev, t_prev)) U_next = history + tau f(U_prev, t_prev),   tau = h^alpha Gamma(2 - alpha)
//! ```
//!
//! where `A` is the assembled nonlinear diffusion operator and the history is
//! the rearranged L1 sum. The coarse propagator uses the full coarse history,
//! the fine propagator uses coarse history for `[0, T_n]` plus fine values on
//! the current interval, and the sequential reference uses the full fine
//! history on `[0, T]`.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::l1_time::{
    coarse_history_terms, hybrid_coarse_terms, hybrid_fine_terms, FractionalOrder,
    FractionalWeights, TimeGrids,
};
use crate::spectral::{SpectralOperator, StateVector};
use crate::sum::CompensatedVec;

/// Coefficient `(x, t, u) -> value`.
pub type Coefficient = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
/// Initial profile `x -> u0(x)`.
pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative pivot threshold for the per-step LU factorization.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// A quasilinear subdiffusion problem
/// `d^alpha u = (D(x,t,u) u_x)_x + f(x,t,u)` on `[a, b] x (0, T]`
/// with `u = 0` on the boundary and `u(x, 0) = u0(x)`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub t_final: f64,
    pub alpha: FractionalOrder,
    diffusion: Coefficient,
    source: Coefficient,
    initial: Profile,
    /// Lipschitz constant of `f` in `u`; zero when `f` does not depend on `u`.
    pub source_lipschitz: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("t_final", &self.t_final)
            .field("alpha", &self.alpha.value())
            .field("source_lipschitz", &self.source_lipschitz)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        a: f64,
        b: f64,
        t_final: f64,
        alpha: FractionalOrder,
        diffusion: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        source: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        initial: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            a,
            b,
            t_final,
            alpha,
            diffusion: Arc::new(diffusion),
            source: Arc::new(source),
            initial: Arc::new(initial),
            source_lipschitz: 0.0,
        }
    }

    pub fn with_alpha(mut self, alpha: FractionalOrder) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_final_time(mut self, t_final: f64) -> Self {
        self.t_final = t_final;
        self
    }

    pub fn with_source_lipschitz(mut self, l: f64) -> Self {
        self.source_lipschitz = l;
        self
    }

    #[inline]
    pub fn diffusion(&self, x: f64, t: f64, u: f64) -> f64 {
        (self.diffusion)(x, t, u)
    }

    #[inline]
    pub fn source(&self, x: f64, t: f64, u: f64) -> f64 {
        (self.source)(x, t, u)
    }

    #[inline]
    pub fn initial(&self, x: f64) -> f64 {
        (self.initial)(x)
    }

    /// Interior sampling of the initial profile.
    pub fn initial_state(&self, op: &SpectralOperator) -> StateVector {
        op.sample(|x| self.initial(x))
    }

    /// Check the Dirichlet compatibility of `u0` and the lower bound
    /// `D >= d_minus` on a probe set of `(x, t, u)` points.
    pub fn validate(&self, d_minus: f64) -> Result<()> {
        if !(self.a < self.b) || !(self.t_final > 0.0) {
            return Err(Error::Argument(format!(
                "problem '{}' has an empty space or time domain",
                self.name
            )));
        }
        for x in [self.a, self.b] {
            let u0 = self.initial(x);
            if u0.abs() > 1e-12 {
                return Err(Error::Argument(format!(
                    "initial profile of '{}' is {u0:e} at boundary x = {x}, expected 0",
                    self.name
                )));
            }
        }
        let xs: Vec<f64> = (0..=32)
            .map(|i| self.a + (self.b - self.a) * i as f64 / 32.0)
            .collect();
        let scale = xs
            .iter()
            .map(|&x| self.initial(x).abs())
            .fold(0.0, f64::max);
        for &x in &xs {
            for it in 0..=8 {
                let t = self.t_final * it as f64 / 8.0;
                for s in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                    let u = s * scale;
                    let d = self.diffusion(x, t, u);
                    if !(d >= d_minus) {
                        return Err(Error::Argument(format!(
                            "diffusion of '{}' is {d} < {d_minus} at (x, t, u) = ({x}, {t}, {u})",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Coarse-node states `U_0, ..., U_n`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoarseTrajectory {
    states: Vec<StateVector>,
}

impl CoarseTrajectory {
    pub fn new(initial: StateVector) -> Self {
        Self {
            states: vec![initial],
        }
    }

    pub fn from_states(states: Vec<StateVector>) -> Self {
        Self { states }
    }

    pub fn push(&mut self, state: StateVector) {
        self.states.push(state);
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn into_states(self) -> Vec<StateVector> {
        self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&StateVector> {
        self.states.last()
    }
}

/// Output of one fine sweep over `[T_n, T_{n+1}]`.
#[derive(Clone, Debug)]
pub struct FinePath {
    /// `U_{n,M}`, the approximation at `T_{n+1}`.
    pub endpoint: StateVector,
    /// `U_{n,1..=M}`.
    pub path: Vec<StateVector>,
}

/// Result of the sequential fine solver.
#[derive(Clone, Debug)]
pub struct FineSolution {
    /// States at the coarse nodes `T_0..=T_{N_t}`.
    pub coarse_states: Vec<StateVector>,
    pub wall_time: Duration,
}

/// Solve `matrix * x = rhs` by LU with partial pivoting.
pub fn solve_dense(matrix: DMatrix<f64>, rhs: DVector<f64>, step: usize) -> Result<DVector<f64>> {
    let scale = matrix.amax();
    let threshold = PIVOT_TOLERANCE * scale;
    let lu = matrix.lu();
    let pivot = lu.u().diagonal().amin();
    if !(pivot > threshold) {
        return Err(Error::Solver {
            step,
            pivot,
            threshold,
        });
    }
    lu.solve(&rhs).ok_or(Error::Solver {
        step,
        pivot,
        threshold,
    })
}

/// `I - tau * a`.
fn shifted_identity(mut a: DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    a.scale_mut(-tau);
    for i in 0..a.nrows() {
        a[(i, i)] += 1.0;
    }
    a
}

/// Coarse and fine propagators for one problem, operator and grid pair.
///
/// Holds only shared references and an immutable weight table, so the fine
/// propagator may run concurrently on different intervals.
#[derive(Clone, Debug)]
pub struct Stepper<'a> {
    problem: &'a ProblemSpec,
    op: &'a SpectralOperator,
    grids: TimeGrids,
    weights: FractionalWeights,
    coarse_tau: f64,
    fine_tau: f64,
    history_scale: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a ProblemSpec, op: &'a SpectralOperator, grids: TimeGrids) -> Self {
        let alpha = problem.alpha;
        let gamma = alpha.gamma_two_minus();
        let a = alpha.value();
        Self {
            problem,
            op,
            grids,
            weights: FractionalWeights::for_grids(alpha, &grids),
            coarse_tau: grids.coarse_dt().powf(a) * gamma,
            fine_tau: grids.fine_dt().powf(a) * gamma,
            history_scale: (grids.fine_steps() as f64).powf(-a),
        }
    }

    pub fn problem(&self) -> &ProblemSpec {
        self.problem
    }

    pub fn operator(&self) -> &SpectralOperator {
        self.op
    }

    pub fn grids(&self) -> &TimeGrids {
        &self.grids
    }

    pub fn weights(&self) -> &FractionalWeights {
        &self.weights
    }

    pub fn initial_state(&self) -> StateVector {
        self.problem.initial_state(self.op)
    }

    fn check_history(&self, history: &[StateVector]) -> Result<usize> {
        let len = history.len();
        if len == 0 || len > self.grids.coarse_steps() {
            return Err(Error::Argument(format!(
                "history must hold 1..={} coarse states, got {len}",
                self.grids.coarse_steps()
            )));
        }
        let m = self.op.interior_len();
        if let Some(bad) = history.iter().position(|s| s.len() != m) {
            return Err(Error::Argument(format!(
                "history state {bad} has {} entries, expected {m}",
                history[bad].len()
            )));
        }
        Ok(len - 1)
    }

    /// Matrix and right-hand side of one semi-implicit step, given the
    /// already accumulated history.
    fn solve_step(
        &self,
        prev: &StateVector,
        t_prev: f64,
        tau: f64,
        mut history: CompensatedVec,
        step: usize,
    ) -> Result<StateVector> {
        let a = self.op.assemble_diffusion(prev.as_slice(), t_prev, self.problem)?;
        let f = self.op.assemble_source(prev.as_slice(), t_prev, self.problem)?;
        history.add_scaled(tau, f.as_slice());
        let x = solve_dense(shifted_identity(a, tau), history.into_vector(), step)?;
        Ok(StateVector::new(x))
    }

    /// `G_n(U_{0:n})`: one coarse L1 step from `T_n` to `T_{n+1}`.
    pub fn coarse_step(&self, history: &[StateVector]) -> Result<StateVector> {
        let n = self.check_history(history)?;
        let mut acc = CompensatedVec::zeros(self.op.interior_len());
        for (i, c) in coarse_history_terms(n, &self.weights) {
            acc.add_scaled(c, history[i].as_slice());
        }
        self.solve_step(
            &history[n],
            self.grids.coarse_time(n),
            self.coarse_tau,
            acc,
            n,
        )
    }

    /// Sequential coarse sweep over all `N_t` intervals.
    pub fn run_coarse(&self) -> Result<CoarseTrajectory> {
        let mut traj = CoarseTrajectory::new(self.initial_state());
        for _ in 0..self.grids.coarse_steps() {
            let next = self.coarse_step(traj.states())?;
            traj.push(next);
        }
        Ok(traj)
    }

    /// `F_n(U_{n,0:M}; U_{0:n})`: march the `M` fine steps of interval `n`
    /// from `U_n = history[n]`, with the coarse history `U_{0:n}`.
    pub fn fine_propagate(&self, coarse_history: &[StateVector]) -> Result<FinePath> {
        let n = self.check_history(coarse_history)?;
        let m = self.grids.fine_steps();
        let len = self.op.interior_len();
        let mut fine: Vec<StateVector> = Vec::with_capacity(m + 1);
        fine.push(coarse_history[n].clone());
        for r in 1..=m {
            let mut acc = CompensatedVec::zeros(len);
            for (i, c) in hybrid_coarse_terms(n, r, &self.weights) {
                acc.add_scaled(-self.history_scale * c, coarse_history[i].as_slice());
            }
            for (j, c) in hybrid_fine_terms(r, &self.weights) {
                acc.add_scaled(-c, fine[j].as_slice());
            }
            let next = self.solve_step(
                &fine[r - 1],
                self.grids.fine_time(n, r - 1),
                self.fine_tau,
                acc,
                n * m + r,
            )?;
            fine.push(next);
        }
        let mut path = fine.split_off(1);
        let endpoint = path.last().cloned().unwrap_or_else(|| path[0].clone());
        path.shrink_to_fit();
        Ok(FinePath { endpoint, path })
    }

    /// Endpoint of [`Stepper::fine_propagate`]; the interior fine states are dropped.
    pub fn fine_endpoint(&self, coarse_history: &[StateVector]) -> Result<StateVector> {
        self.fine_propagate(coarse_history)
            .map(|p| p.endpoint)
    }

    /// Chain the fine propagator sequentially over intervals `0..intervals`.
    /// This is the fixed point of the parareal iteration.
    pub fn chained_fine(&self, intervals: usize) -> Result<Vec<StateVector>> {
        let intervals = intervals.min(self.grids.coarse_steps());
        let mut states = vec![self.initial_state()];
        for _ in 0..intervals {
            let next = self.fine_endpoint(&states)?;
            states.push(next);
        }
        Ok(states)
    }
}

/// `coarse_step(history, op, grids, problem)`.
pub fn coarse_step(
    history: &[StateVector],
    op: &SpectralOperator,
    grids: &TimeGrids,
    problem: &ProblemSpec,
) -> Result<StateVector> {
    Stepper::new(problem, op, *grids).coarse_step(history)
}

/// `run_coarse(problem, op, grids)`.
pub fn run_coarse(
    problem: &ProblemSpec,
    op: &SpectralOperator,
    grids: &TimeGrids,
) -> Result<CoarseTrajectory> {
    Stepper::new(problem, op, *grids).run_coarse()
}

/// `fine_propagate(start, coarse_history, op, grids, problem)`; `start` must
/// be the last state of the history.
pub fn fine_propagate(
    start: &StateVector,
    coarse_history: &[StateVector],
    op: &SpectralOperator,
    grids: &TimeGrids,
    problem: &ProblemSpec,
) -> Result<FinePath> {
    match coarse_history.last() {
        Some(last) if last == start => {}
        _ => {
            return Err(Error::Argument(
                "fine start must equal the last coarse history state".into(),
            ))
        }
    }
    Stepper::new(problem, op, *grids).fine_propagate(coarse_history)
}

/// Plain L1 marching on the uniform fine grid of `N_t * M` steps with the
/// complete fine history. Returns the states at the coarse nodes.
pub fn run_fine_sequential(
    problem: &ProblemSpec,
    op: &SpectralOperator,
    grids: &TimeGrids,
) -> Result<FineSolution> {
    let start = Instant::now();
    let m = grids.fine_steps();
    let total = grids.fine_dof();
    let alpha = problem.alpha;
    let weights = FractionalWeights::new(alpha, 1, total);
    let tau = grids.fine_dt().powf(alpha.value()) * alpha.gamma_two_minus();
    let len = op.interior_len();

    let mut history: Vec<StateVector> = Vec::with_capacity(total + 1);
    history.push(problem.initial_state(op));
    let mut coarse_states = Vec::with_capacity(grids.coarse_steps() + 1);
    coarse_states.push(history[0].clone());

    for k in 0..total {
        let mut acc = CompensatedVec::zeros(len);
        for (i, c) in coarse_history_terms(k, &weights) {
            acc.add_scaled(c, history[i].as_slice());
        }
        let prev = &history[k];
        let t_prev = grids.fine_time(k / m, k % m);
        let a = op.assemble_diffusion(prev.as_slice(), t_prev, problem)?;
        let f = op.assemble_source(prev.as_slice(), t_prev, problem)?;
        acc.add_scaled(tau, f.as_slice());
        let x = solve_dense(shifted_identity(a, tau), acc.into_vector(), k + 1)?;
        let next = StateVector::new(x);
        if (k + 1) % m == 0 {
            coarse_states.push(next.clone());
        }
        history.push(next);
    }
    Ok(FineSolution {
        coarse_states,
        wall_time: start.elapsed(),
    })
}
