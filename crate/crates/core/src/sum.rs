//! Compensated (Neumaier) summation for scalars and nodal vectors.

use nalgebra::DVector;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Entrywise compensated accumulation of `weight * vector` terms.
#[derive(Clone, Debug)]
pub struct CompensatedVec {
    sum: Vec<f64>,
    carry: Vec<f64>,
}

impl CompensatedVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            sum: vec![0.0; len],
            carry: vec![0.0; len],
        }
    }

    #[inline]
    pub fn add_scaled(&mut self, weight: f64, v: &[f64]) {
        debug_assert_eq!(v.len(), self.sum.len());
        for ((s, c), &x) in self.sum.iter_mut().zip(self.carry.iter_mut()).zip(v) {
            let term = weight * x;
            let t = *s + term;
            if s.abs() >= term.abs() {
                *c += (*s - t) + term;
            } else {
                *c += (term - t) + *s;
            }
            *s = t;
        }
    }

    pub fn into_vector(self) -> DVector<f64> {
        DVector::from_iterator(
            self.sum.len(),
            self.sum.iter().zip(&self.carry).map(|(s, c)| s + c),
        )
    }
}
