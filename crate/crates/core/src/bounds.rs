//! Lipschitz constants of the propagators and the Gronwall-type parareal
//! error bounds.
//!
//! The recurrence `f^{k+1}_{n+1} = a + b f^k_n + c f^{k+1}_n` with
//! `f^k_0 = 0`, `f^0_n = E0` is solved by
//!
//! ```text
//! f^k_n = a sum_{j<k} sum_{i<n-j} C(i+j, j) c^i b^j  +  E0 b^k sum_{j=k}^{n-1} C(j-1, k-1) c^{j-k}
//! ```
//!
//! with the convention `C(-1, -1) = 1`.

use crate::error::{Error, Result};
use crate::l1_time::{l1_weight, FractionalOrder};
use crate::sum::CompensatedSum;

/// Largest `n` or `k` accepted by the recurrence evaluators.
pub const MAX_INDEX: usize = 512;

/// Below this distance from 1 the `c -> 1` limit forms are used.
const NEAR_ONE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: usize,
    pub k: usize,
    pub e0: f64,
}

impl BoundParams {
    pub fn new(a: f64, b: f64, c: f64, n: usize, k: usize, e0: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("E0", e0)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if n == 0 {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        if n > MAX_INDEX || k > MAX_INDEX {
            return Err(Error::Range(format!(
                "n = {n}, k = {k} exceed the table limit {MAX_INDEX}"
            )));
        }
        Ok(Self { a, b, c, n, k, e0 })
    }

    pub fn with_k(self, k: usize) -> Result<Self> {
        Self::new(self.a, self.b, self.c, self.n, k, self.e0)
    }
}

/// `C_G`, `C_F` and the derived recurrence coefficients
/// `a = 1 + C_F`, `b = C_F + C_G`, `c = C_G`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzConstants {
    pub c_g: f64,
    pub c_f: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LipschitzConstants {
    pub fn new(c_g: f64, c_f: f64) -> Result<Self> {
        if !(c_g >= 1.0 && c_f >= 1.0) || !c_g.is_finite() || !c_f.is_finite() {
            return Err(Error::Parameter(format!(
                "Lipschitz constants must be finite and >= 1, got C_G = {c_g}, C_F = {c_f}"
            )));
        }
        Ok(Self {
            c_g,
            c_f,
            a: 1.0 + c_f,
            b: c_f + c_g,
            c: c_g,
        })
    }

    /// Measured constants raised to the admissible floor of 1.
    pub fn from_measured(c_g: f64, c_f: f64) -> Result<Self> {
        Self::new(c_g.max(1.0), c_f.max(1.0))
    }
}

fn step_factor(dt: f64, alpha: FractionalOrder, l_f: f64) -> Result<(f64, f64)> {
    if !(dt > 0.0) || !(l_f >= 0.0) {
        return Err(Error::Parameter(format!(
            "need dt > 0 and L_f >= 0, got dt = {dt}, L_f = {l_f}"
        )));
    }
    let tau = dt.powf(alpha.value()) * alpha.gamma_two_minus();
    let denom = 1.0 - l_f * tau;
    if !(denom > 0.0) {
        return Err(Error::Parameter(format!(
            "L_f dt^alpha Gamma(2 - alpha) = {} >= 1; time step too large",
            l_f * tau
        )));
    }
    Ok((tau, denom))
}

/// `sqrt((1 + C tau) / (1 - L_f tau))` with `tau = dT^alpha Gamma(2 - alpha)`.
pub fn lipschitz_coarse(dt_coarse: f64, alpha: FractionalOrder, c: f64, l_f: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::Parameter(format!("C must be non-negative, got {c}")));
    }
    let (tau, denom) = step_factor(dt_coarse, alpha, l_f)?;
    Ok(((1.0 + c * tau) / denom).sqrt())
}

/// `(sqrt(1 + C tau) + sqrt(2 b_{r/M}) M^{-alpha}) / sqrt(1 - L_f tau)` with
/// `tau = dt^alpha Gamma(2 - alpha)`.
#[allow(clippy::too_many_arguments)]
pub fn lipschitz_fine(
    dt_coarse: f64,
    dt_fine: f64,
    m: usize,
    alpha: FractionalOrder,
    c: f64,
    l_f: f64,
    r: usize,
) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::Parameter(format!("C must be non-negative, got {c}")));
    }
    if m == 0 || r == 0 || r > m {
        return Err(Error::Parameter(format!("need 1 <= r <= M, got r = {r}, M = {m}")));
    }
    if !(dt_fine <= dt_coarse * (1.0 + 1e-12)) {
        return Err(Error::Parameter(format!(
            "fine step {dt_fine} exceeds coarse step {dt_coarse}"
        )));
    }
    let (tau, denom) = step_factor(dt_fine, alpha, l_f)?;
    let b = l1_weight(r as f64 / m as f64, alpha.value())?;
    let history = (2.0 * b).sqrt() * (m as f64).powf(-alpha.value());
    Ok(((1.0 + c * tau).sqrt() + history) / denom.sqrt())
}

/// `C(n, k)` for integer arguments, with `C(-1, -1) = 1` and zero outside
/// `0 <= k <= n`. Exact while the value fits in `u128`.
pub fn binomial(n: i64, k: i64) -> f64 {
    if n == -1 && k == -1 {
        return 1.0;
    }
    if n < 0 || k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut exact: u128 = 1;
    for i in 0..k {
        match exact.checked_mul(n - i) {
            Some(p) => exact = p / (i + 1),
            None => {
                let mut v = exact as f64;
                for j in i..k {
                    v = v * (n - j) as f64 / (j + 1) as f64;
                }
                return v;
            }
        }
    }
    exact as f64
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("{what} overflowed")))
    }
}

/// `f^k_n` by iterating the recurrence table.
pub fn gronwall_brute(p: &BoundParams) -> Result<f64> {
    let (n, k) = (p.n, p.k);
    let mut prev = vec![p.e0; n + 1];
    prev[0] = 0.0;
    for _ in 0..k {
        let mut next = vec![0.0; n + 1];
        for j in 1..=n {
            next[j] = p.a + p.b * prev[j - 1] + p.c * next[j - 1];
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Range("recurrence overflowed".into()));
        }
        prev = next;
    }
    Ok(prev[n])
}

/// `sum_{j<k} sum_{i<n-j} C(i+j, j) c^i b^j`.
pub fn double_sum(p: &BoundParams) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for j in 0..p.k.min(p.n) {
        let bj = p.b.powi(j as i32);
        for i in 0..(p.n - j) {
            acc.add(binomial((i + j) as i64, j as i64) * p.c.powi(i as i32) * bj);
        }
    }
    finite(acc.value(), "double sum")
}

/// `sum_{j=k}^{n-1} C(j-1, k-1) c^{j-k}`.
pub fn single_sum(p: &BoundParams) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for j in p.k..p.n {
        acc.add(binomial(j as i64 - 1, p.k as i64 - 1) * p.c.powi((j - p.k) as i32));
    }
    finite(acc.value(), "single sum")
}

/// `f^k_n` from the closed form.
pub fn gronwall_closed(p: &BoundParams) -> Result<f64> {
    let head = p.a * double_sum(p)?;
    let tail = if p.e0 == 0.0 {
        0.0
    } else {
        p.e0 * p.b.powi(p.k as i32) * single_sum(p)?
    };
    finite(head + tail, "closed form")
}

/// `(c (b + c)^{m-1} - (1 + b)^{m-1}) / (c - 1)` for `m >= 1`; near `c = 1`
/// through the equal finite sum `sum_j C(m-1, j) b^j sum_{i<m-j} c^i`.
fn binomial_geometric(b: f64, c: f64, m: usize) -> f64 {
    debug_assert!(m >= 1);
    if (c - 1.0).abs() >= NEAR_ONE {
        let e = (m - 1) as i32;
        return (c * (b + c).powi(e) - (1.0 + b).powi(e)) / (c - 1.0);
    }
    let mut acc = CompensatedSum::new();
    for j in 0..m {
        let geometric: f64 = (0..m - j).map(|i| c.powi(i as i32)).sum();
        acc.add(binomial((m - 1) as i64, j as i64) * b.powi(j as i32) * geometric);
    }
    acc.value()
}

/// Bound on [`double_sum`] independent of `k`:
/// `(c (b + c)^{n-1} - (1 + b)^{n-1}) / (c - 1)`, and `(1 + b)^{n-2} (n + b)` at `c = 1`.
pub fn double_sum_bound(p: &BoundParams) -> Result<f64> {
    finite(binomial_geometric(p.b, p.c, p.n), "double sum bound")
}

/// `c^{n-k-1} C(n-1, k)`, zero for `k >= n`.
pub fn single_sum_bound(p: &BoundParams) -> Result<f64> {
    if p.k >= p.n {
        return Ok(0.0);
    }
    let v = p.c.powi((p.n - p.k - 1) as i32) * binomial(p.n as i64 - 1, p.k as i64);
    finite(v, "single sum bound")
}

/// Two-term bound on `||u(T_n) - U^k_n||`:
///
/// ```text
/// a (c (b + c)^{m-1} - (b + 1)^{m-1}) / (c - 1) * fine_err + b^k c^{n-k-1} C(n-1, k) * coarse_err
/// ```
///
/// with `m = min(k, n)`. The first term is zero for `m = 0` and the second
/// for `k >= n`.
pub fn theorem_bound(
    consts: &LipschitzConstants,
    n: usize,
    k: usize,
    fine_err: f64,
    coarse_err: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    if n > MAX_INDEX || k > MAX_INDEX {
        return Err(Error::Range(format!(
            "n = {n}, k = {k} exceed the table limit {MAX_INDEX}"
        )));
    }
    if !(fine_err >= 0.0 && coarse_err >= 0.0) {
        return Err(Error::Parameter(format!(
            "propagator errors must be non-negative, got {fine_err}, {coarse_err}"
        )));
    }
    let m = k.min(n);
    let first = if m == 0 {
        0.0
    } else {
        consts.a * binomial_geometric(consts.b, consts.c, m) * fine_err
    };
    let second = if k >= n {
        0.0
    } else {
        consts.b.powi(k as i32)
            * consts.c.powi((n - k - 1) as i32)
            * binomial(n as i64 - 1, k as i64)
            * coarse_err
    };
    finite(first + second, "theorem bound")
}
