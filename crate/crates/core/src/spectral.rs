//! Chebyshev–Lobatto collocation on an interval `[a, b]`.
//!
//! Nodes are ordered from `b` down to `a` (`x_j` is the image of
//! `cos(j pi / N)`). Unknowns live on the interior nodes `1..N`; the two
//! boundary nodes carry the homogeneous Dirichlet value.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut, Range};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::stepping::ProblemSpec;

/// Nodal values at the interior collocation points at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(DVector<f64>);

impl StateVector {
    pub fn new(values: DVector<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(DVector::zeros(len))
    }

    pub fn from_slice(values: &[f64]) -> Self {
        Self(DVector::from_column_slice(values))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl Deref for StateVector {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut DVector<f64> {
        &mut self.0
    }
}

impl From<DVector<f64>> for StateVector {
    fn from(v: DVector<f64>) -> Self {
        Self(v)
    }
}

/// Differentiation matrices, nodes and quadrature weights of degree `N`.
#[derive(Clone, Debug)]
pub struct SpectralOperator {
    degree: usize,
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    quad_weights: Vec<f64>,
}

/// Chebyshev–Lobatto points `cos(j pi / N)` on `[-1, 1]`, written as
/// `sin(pi (N - 2j) / 2N)` so that the set is exactly antisymmetric.
pub fn reference_nodes(degree: usize) -> Vec<f64> {
    let n = degree as f64;
    (0..=degree)
        .map(|j| (PI * (n - 2.0 * j as f64) / (2.0 * n)).sin())
        .collect()
}

/// First-derivative matrix on `[-1, 1]` with the negative-row-sum diagonal.
pub fn reference_d1(degree: usize) -> DMatrix<f64> {
    let x = reference_nodes(degree);
    let c = |j: usize| if j == 0 || j == degree { 2.0 } else { 1.0 };
    let mut d = DMatrix::zeros(degree + 1, degree + 1);
    for i in 0..=degree {
        for j in 0..=degree {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = c(i) / c(j) * sign / (x[i] - x[j]);
            }
        }
    }
    for i in 0..=degree {
        let off: f64 = (0..=degree).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -off;
    }
    d
}

/// Closed-form diagonal of the reference first-derivative matrix.
pub fn closed_form_diagonal(degree: usize) -> Vec<f64> {
    let x = reference_nodes(degree);
    let n2 = (degree * degree) as f64;
    (0..=degree)
        .map(|i| {
            if i == 0 {
                (2.0 * n2 + 1.0) / 6.0
            } else if i == degree {
                -(2.0 * n2 + 1.0) / 6.0
            } else {
                -x[i] / (2.0 * (1.0 - x[i] * x[i]))
            }
        })
        .collect()
}

/// Clenshaw–Curtis weights for the Chebyshev–Lobatto nodes on `[-1, 1]`.
pub fn clenshaw_curtis_weights(degree: usize) -> Vec<f64> {
    let n = degree;
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let end = if n.is_multiple_of(2) {
        1.0 / (nf * nf - 1.0)
    } else {
        1.0 / (nf * nf)
    };
    w[0] = end;
    w[n] = end;
    for (j, wj) in w.iter_mut().enumerate().take(n).skip(1) {
        let theta = j as f64 * PI / nf;
        let mut v = 1.0;
        if n.is_multiple_of(2) {
            for k in 1..n / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
            v -= (nf * theta).cos() / (nf * nf - 1.0);
        } else {
            for k in 1..=(n - 1) / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        *wj = 2.0 * v / nf;
    }
    w
}

impl SpectralOperator {
    /// Build the degree-`N` operator on `[a, b]`.
    pub fn new(degree: usize, a: f64, b: f64) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Argument(format!(
                "spectral degree must be at least 2 to have interior nodes, got {degree}"
            )));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Argument(format!("invalid interval [{a}, {b}]")));
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let nodes = reference_nodes(degree)
            .into_iter()
            .map(|xi| mid + half * xi)
            .collect();
        let d1 = reference_d1(degree) * (1.0 / half);
        let d2 = &d1 * &d1;
        let quad_weights = clenshaw_curtis_weights(degree)
            .into_iter()
            .map(|w| w * half)
            .collect();
        Ok(Self {
            degree,
            a,
            b,
            nodes,
            d1,
            d2,
            quad_weights,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// All `N + 1` physical nodes, from `b` down to `a`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interior(&self) -> Range<usize> {
        1..self.degree
    }

    pub fn interior_len(&self) -> usize {
        self.degree - 1
    }

    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[self.interior()]
    }

    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d1
    }

    pub fn d2(&self) -> &DMatrix<f64> {
        &self.d2
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Interior block of the second-derivative matrix.
    pub fn d2_interior(&self) -> DMatrix<f64> {
        let m = self.interior_len();
        self.d2.view((1, 1), (m, m)).clone_owned()
    }

    /// Sample `f` at the interior nodes.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> StateVector {
        StateVector::new(DVector::from_iterator(
            self.interior_len(),
            self.interior_nodes().iter().map(|&x| f(x)),
        ))
    }

    /// Full-grid vector with zero boundary values.
    pub fn extend_with_boundary(&self, state: &[f64]) -> DVector<f64> {
        let mut full = DVector::zeros(self.degree + 1);
        full.rows_mut(1, self.interior_len())
            .copy_from_slice(state);
        full
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.interior_len() {
            return Err(Error::Argument(format!(
                "state has {len} entries, operator has {} interior nodes",
                self.interior_len()
            )));
        }
        Ok(())
    }

    /// Interior matrix of `v -> D1 diag(D(x_p, t, u_p)) D1 v` with `u = 0`
    /// on the boundary nodes.
    pub fn assemble_diffusion(
        &self,
        state: &[f64],
        t: f64,
        problem: &ProblemSpec,
    ) -> Result<DMatrix<f64>> {
        self.check_len(state.len())?;
        let m = self.interior_len();
        let u = self.extend_with_boundary(state);
        let mut left = self.d1.rows(1, m).clone_owned();
        for (p, (&x, &up)) in self.nodes.iter().zip(u.iter()).enumerate() {
            let coeff = problem.diffusion(x, t, up);
            if !coeff.is_finite() {
                return Err(Error::Evaluation { node: p });
            }
            left.column_mut(p).scale_mut(coeff);
        }
        Ok(left * self.d1.columns(1, m))
    }

    /// Source `f(x_p, t, u_p)` at the interior nodes.
    pub fn assemble_source(
        &self,
        state: &[f64],
        t: f64,
        problem: &ProblemSpec,
    ) -> Result<DVector<f64>> {
        self.check_len(state.len())?;
        let nodes = self.interior_nodes();
        let mut out = DVector::zeros(state.len());
        for (k, (&x, &u)) in nodes.iter().zip(state).enumerate() {
            let f = problem.source(x, t, u);
            if !f.is_finite() {
                return Err(Error::Evaluation { node: k + 1 });
            }
            out[k] = f;
        }
        Ok(out)
    }

    /// Clenshaw–Curtis discrete L2 norm; boundary entries count as zero.
    pub fn l2_norm(&self, state: &[f64]) -> f64 {
        debug_assert_eq!(state.len(), self.interior_len());
        state
            .iter()
            .zip(&self.quad_weights[1..self.degree])
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Norm of the difference of two interior states.
    pub fn l2_distance(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), v.len());
        u.iter()
            .zip(v)
            .zip(&self.quad_weights[1..self.degree])
            .map(|((a, b), w)| w * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// `build_operator(N, a, b)`.
pub fn build_operator(degree: usize, a: f64, b: f64) -> Result<SpectralOperator> {
    SpectralOperator::new(degree, a, b)
}
