//! L1 discretization of the Caputo derivative.
//!
//! Two operators are provided: the classical L1 formula on the uniform
//! coarse grid, and the hybrid formula that uses coarse nodes for the history
//! `[0, T_n]` and fine nodes on the current interval `[T_n, t_{n,r}]`. The
//! hybrid formula needs weights `b_x` at fractional indices `x = j + r/M`,
//! which [`FractionalWeights`] tabulates in units of `1/M`.
//!
//! Both operators are written as `(scale) * (current value - history)`, and
//! the history is exposed as `(node index, coefficient)` term lists so the
//! time-stepping code assembles exactly the same combination on vectors.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Order of the Caputo derivative, `0 < alpha <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::Domain(format!(
                "fractional order must lie in (0, 1], got {alpha}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `alpha == 1`: the L1 formula collapses to the backward difference.
    #[inline]
    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }

    /// `Gamma(2 - alpha)`, via the log-gamma function.
    pub fn gamma_two_minus(self) -> f64 {
        if self.is_classical() {
            1.0
        } else {
            ln_gamma(2.0 - self.0).exp()
        }
    }
}

/// Uniform coarse grid `T_n = n dT` and the fine subgrid `t_{n,r} = T_n + r dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrids {
    t_final: f64,
    coarse_steps: usize,
    fine_steps: usize,
    coarse_dt: f64,
    fine_dt: f64,
}

impl TimeGrids {
    pub fn new(t_final: f64, coarse_steps: usize, fine_steps: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::Argument(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        if coarse_steps == 0 || fine_steps == 0 {
            return Err(Error::Argument(
                "coarse and fine step counts must be positive".into(),
            ));
        }
        let coarse_dt = t_final / coarse_steps as f64;
        Ok(Self {
            t_final,
            coarse_steps,
            fine_steps,
            coarse_dt,
            fine_dt: coarse_dt / fine_steps as f64,
        })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// `N_t`, the number of coarse intervals.
    pub fn coarse_steps(&self) -> usize {
        self.coarse_steps
    }

    /// `M`, the number of fine steps per coarse interval.
    pub fn fine_steps(&self) -> usize {
        self.fine_steps
    }

    pub fn coarse_dt(&self) -> f64 {
        self.coarse_dt
    }

    pub fn fine_dt(&self) -> f64 {
        self.fine_dt
    }

    /// Total number of fine steps on `[0, T]`.
    pub fn fine_dof(&self) -> usize {
        self.coarse_steps * self.fine_steps
    }

    pub fn coarse_time(&self, n: usize) -> f64 {
        if n == self.coarse_steps {
            self.t_final
        } else {
            n as f64 * self.coarse_dt
        }
    }

    /// `t_{n,r}`; `t_{n,M}` is reported as `T_{n+1}` exactly.
    pub fn fine_time(&self, n: usize, r: usize) -> f64 {
        if r == self.fine_steps {
            self.coarse_time(n + 1)
        } else {
            self.coarse_time(n) + r as f64 * self.fine_dt
        }
    }
}

/// `b_x = (x+1)^(1-alpha) - x^(1-alpha)` for real `x >= 0`.
pub fn l1_weight(x: f64, alpha: f64) -> Result<f64> {
    let order = FractionalOrder::new(alpha)?;
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!(
            "L1 weight index must be finite and >= 0, got {x}"
        )));
    }
    Ok(weight(x, order))
}

#[inline]
fn weight(x: f64, alpha: FractionalOrder) -> f64 {
    if alpha.is_classical() {
        return if x == 0.0 { 1.0 } else { 0.0 };
    }
    let p = 1.0 - alpha.value();
    if x == 0.0 {
        1.0
    } else if x < 1.0 {
        (x + 1.0).powf(p) - x.powf(p)
    } else {
        // x^p ((1 + 1/x)^p - 1), free of cancellation for large x
        x.powf(p) * (p * (1.0 / x).ln_1p()).exp_m1()
    }
}

/// Table of L1 weights `b_{q/denom}` for `q = 0..=max_index * denom`.
///
/// The table is filled eagerly and never mutated afterwards, so it can be
/// shared by the parallel fine sweeps. Indices past the table are evaluated
/// on the fly.
#[derive(Clone, Debug)]
pub struct FractionalWeights {
    alpha: FractionalOrder,
    denom: usize,
    max_index: usize,
    table: Vec<f64>,
}

impl FractionalWeights {
    pub fn new(alpha: FractionalOrder, denom: usize, max_index: usize) -> Self {
        assert!(denom > 0, "weight table denominator must be positive");
        let table = Self::fill(alpha, denom, max_index);
        Self {
            alpha,
            denom,
            max_index,
            table,
        }
    }

    /// Weights for the hybrid operator on `grids`: denominator `M`, integer
    /// indices up to `max(N_t, M)`.
    pub fn for_grids(alpha: FractionalOrder, grids: &TimeGrids) -> Self {
        let max_index = grids.coarse_steps().max(grids.fine_steps());
        Self::new(alpha, grids.fine_steps(), max_index)
    }

    fn fill(alpha: FractionalOrder, denom: usize, max_index: usize) -> Vec<f64> {
        (0..=max_index * denom)
            .map(|q| weight(q as f64 / denom as f64, alpha))
            .collect()
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn denom(&self) -> usize {
        self.denom
    }

    /// Switch to another order; the cached table is rebuilt.
    pub fn set_alpha(&mut self, alpha: FractionalOrder) {
        if alpha != self.alpha {
            self.alpha = alpha;
            self.table = Self::fill(alpha, self.denom, self.max_index);
        }
    }

    /// `b_{q / denom}`.
    #[inline]
    pub fn at(&self, q: usize) -> f64 {
        match self.table.get(q) {
            Some(&b) => b,
            None => weight(q as f64 / self.denom as f64, self.alpha),
        }
    }

    /// `b_j` at an integer index.
    #[inline]
    pub fn integer(&self, j: usize) -> f64 {
        self.at(j * self.denom)
    }

    /// `b_{j + r/denom}`.
    #[inline]
    pub fn shifted(&self, j: usize, r: usize) -> f64 {
        self.at(j * self.denom + r)
    }
}

/// History of the uniform-grid L1 formula at step `n + 1`, oldest term first:
/// `b_n y_0 + sum_{i=1}^{n} (b_{n-i} - b_{n-i+1}) y_i`.
pub fn coarse_history_terms(
    n: usize,
    weights: &FractionalWeights,
) -> impl Iterator<Item = (usize, f64)> + '_ {
    std::iter::once((0, weights.integer(n))).chain(
        (1..=n).map(move |i| (i, weights.integer(n - i) - weights.integer(n - i + 1))),
    )
}

/// Signed coefficients of the coarse bracket of the hybrid operator at
/// `t_{n,r}`, oldest first:
/// `b_{r/M} y(T_n) - b_{n-1+r/M} y(0) - sum_{i=1}^{n-1} (b_{n-i-1+r/M} - b_{n-i+r/M}) y(T_i)`.
/// Empty for `n = 0`. `weights` must have denominator `M`.
pub fn hybrid_coarse_terms(
    n: usize,
    r: usize,
    weights: &FractionalWeights,
) -> impl Iterator<Item = (usize, f64)> + '_ {
    let head = (n > 0).then(|| (0, -weights.shifted(n - 1, r)));
    let middle = (1..n.max(1)).map(move |i| {
        (
            i,
            -(weights.shifted(n - i - 1, r) - weights.shifted(n - i, r)),
        )
    });
    let tail = (n > 0).then(|| (n, weights.at(r)));
    head.into_iter().chain(middle).chain(tail)
}

/// History part of the fine bracket at `t_{n,r}` (everything except
/// `b_0 y(t_{n,r})`), oldest first:
/// `-b_{r-1} y(t_{n,0}) - sum_{j=1}^{r-1} (b_{r-j-1} - b_{r-j}) y(t_{n,j})`.
pub fn hybrid_fine_terms(
    r: usize,
    weights: &FractionalWeights,
) -> impl Iterator<Item = (usize, f64)> + '_ {
    std::iter::once((0, -weights.integer(r - 1))).chain(
        (1..r).map(move |j| (j, -(weights.integer(r - j - 1) - weights.integer(r - j)))),
    )
}

/// L1 approximation of the Caputo derivative at `T_{n+1}` from the values
/// `y(T_0), ..., y(T_{n+1})` on a uniform grid of step `dt`.
pub fn discrete_caputo_coarse(history: &[f64], dt: f64, weights: &FractionalWeights) -> Result<f64> {
    if history.len() < 2 {
        return Err(Error::Argument(format!(
            "coarse L1 operator needs at least two values, got {}",
            history.len()
        )));
    }
    let n = history.len() - 2;
    let alpha = weights.alpha();
    let mut acc = CompensatedSum::new();
    for (i, c) in coarse_history_terms(n, weights) {
        acc.add(-c * history[i]);
    }
    acc.add(history[n + 1]);
    Ok(dt.powf(-alpha.value()) / alpha.gamma_two_minus() * acc.value())
}

/// Hybrid L1 approximation `delta^alpha y(t_{n,r})`.
///
/// `coarse_history` holds `y(T_0..=T_n)` and `fine_values` holds
/// `y(t_{n,0..=r})` with `fine_values[0] == coarse_history[n]`.
pub fn discrete_caputo_hybrid(
    coarse_history: &[f64],
    fine_values: &[f64],
    grids: &TimeGrids,
    weights: &FractionalWeights,
) -> Result<f64> {
    let m = grids.fine_steps();
    if weights.denom() != m {
        return Err(Error::Argument(format!(
            "weight table denominator {} does not match M = {m}",
            weights.denom()
        )));
    }
    let Some(&y_n) = coarse_history.last() else {
        return Err(Error::Argument("coarse history is empty".into()));
    };
    if fine_values.len() < 2 || fine_values.len() > m + 1 {
        return Err(Error::Argument(format!(
            "fine values must cover t_(n,0..r) with 1 <= r <= {m}, got {} values",
            fine_values.len()
        )));
    }
    if (fine_values[0] - y_n).abs() > 1e-12 * y_n.abs().max(1.0) {
        return Err(Error::Argument(format!(
            "fine start {} does not continue the coarse history value {y_n}",
            fine_values[0]
        )));
    }
    let n = coarse_history.len() - 1;
    let r = fine_values.len() - 1;
    let alpha = weights.alpha();

    let coarse_bracket: CompensatedSum = hybrid_coarse_terms(n, r, weights)
        .map(|(i, c)| c * coarse_history[i])
        .collect();
    let mut fine_bracket: CompensatedSum = hybrid_fine_terms(r, weights)
        .map(|(j, c)| c * fine_values[j])
        .collect();
    fine_bracket.add(fine_values[r]);

    let a = alpha.value();
    Ok((grids.coarse_dt().powf(-a) * coarse_bracket.value()
        + grids.fine_dt().powf(-a) * fine_bracket.value())
        / alpha.gamma_two_minus())
}
