//! Pointwise error of the hybrid L1 operator against closed-form Caputo
//! derivatives, with fitted orders per region.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::harness::config::TestFunction;
use crate::l1_time::{discrete_caputo_hybrid, FractionalOrder, FractionalWeights, TimeGrids};

impl TestFunction {
    pub fn value(self, alpha: f64, t: f64) -> f64 {
        match self {
            TestFunction::Constant => 1.0,
            TestFunction::Linear => t,
            TestFunction::Sqrt => t.sqrt(),
            TestFunction::PowerPlusLinear => t.powf(alpha) + t,
        }
    }

    /// Caputo derivative of order `alpha` at `t > 0`.
    pub fn caputo(self, alpha: f64, t: f64) -> f64 {
        // d^alpha t^beta = Gamma(beta + 1) / Gamma(beta + 1 - alpha) t^(beta - alpha)
        let power = |beta: f64| gamma(beta + 1.0) / gamma(beta + 1.0 - alpha) * t.powf(beta - alpha);
        match self {
            TestFunction::Constant => 0.0,
            TestFunction::Linear => power(1.0),
            TestFunction::Sqrt => power(0.5),
            TestFunction::PowerPlusLinear => power(alpha) + power(1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Region {
    /// `n = 0`.
    First,
    /// `n = 1`.
    Second,
    /// `n >= 2`.
    Later,
}

impl Region {
    pub fn of(n: usize) -> Self {
        match n {
            0 => Region::First,
            1 => Region::Second,
            _ => Region::Later,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Region::First => "n=0",
            Region::Second => "n=1",
            Region::Later => "n>=2",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TruncationPoint {
    pub nt: usize,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub t: f64,
    pub error: f64,
    /// `|error| t_{0,r}^{1-alpha}` for `n = 0`, `|error|` for `n = 1`,
    /// `|error| T_n^{1-alpha}` for `n >= 2`.
    pub weighted: f64,
}

#[derive(Clone, Debug)]
pub struct RegionOrder {
    pub region: Region,
    /// `(dT, max weighted error)` per grid.
    pub levels: Vec<(f64, f64)>,
    /// Least-squares slope of `log(error)` against `log(dT)`; NaN when an
    /// error vanishes.
    pub order: f64,
}

#[derive(Clone, Debug)]
pub struct TruncationStudy {
    pub alpha: f64,
    pub function: TestFunction,
    pub points: Vec<TruncationPoint>,
    pub orders: Vec<RegionOrder>,
}

/// Least-squares slope of `y` against `x`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Log-log order of `(step, error)` pairs.
pub fn fitted_order(levels: &[(f64, f64)]) -> f64 {
    if levels.len() < 2 || levels.iter().any(|&(_, e)| !(e > 0.0)) {
        return f64::NAN;
    }
    let xs: Vec<f64> = levels.iter().map(|l| l.0.ln()).collect();
    let ys: Vec<f64> = levels.iter().map(|l| l.1.ln()).collect();
    fitted_slope(&xs, &ys)
}

/// Errors on `[0, t_final]` for each `N_t` in `sweep` with fixed `M`.
pub fn truncation_study(
    function: TestFunction,
    alpha: f64,
    m: usize,
    sweep: &[usize],
    t_final: f64,
) -> Result<TruncationStudy> {
    let order = FractionalOrder::new(alpha)?;
    if sweep.is_empty() {
        return Err(Error::Argument("truncation sweep is empty".into()));
    }
    let mut points = Vec::new();
    let mut levels: [Vec<(f64, f64)>; 3] = Default::default();
    for &nt in sweep {
        let grids = TimeGrids::new(t_final, nt, m)?;
        let weights = FractionalWeights::for_grids(order, &grids);
        let coarse: Vec<f64> = (0..=nt)
            .map(|i| function.value(alpha, grids.coarse_time(i)))
            .collect();
        let mut worst = [0.0f64; 3];
        for n in 0..nt {
            let fine: Vec<f64> = (0..=m)
                .map(|j| if j == 0 { coarse[n] } else { function.value(alpha, grids.fine_time(n, j)) })
                .collect();
            for r in 1..=m {
                let t = grids.fine_time(n, r);
                let approx = discrete_caputo_hybrid(&coarse[..=n], &fine[..=r], &grids, &weights)?;
                let error = approx - function.caputo(alpha, t);
                let weighted = match Region::of(n) {
                    Region::First => error.abs() * t.powf(1.0 - alpha),
                    Region::Second => error.abs(),
                    Region::Later => error.abs() * grids.coarse_time(n).powf(1.0 - alpha),
                };
                let slot = Region::of(n) as usize;
                worst[slot] = worst[slot].max(weighted);
                points.push(TruncationPoint { nt, m, n, r, t, error, weighted });
            }
        }
        for (slot, w) in worst.iter().enumerate() {
            if slot < 2 || nt > 2 {
                levels[slot].push((grids.coarse_dt(), *w));
            }
        }
    }
    let orders = [Region::First, Region::Second, Region::Later]
        .into_iter()
        .zip(levels)
        .map(|(region, levels)| RegionOrder {
            region,
            order: fitted_order(&levels),
            levels,
        })
        .collect();
    Ok(TruncationStudy {
        alpha,
        function,
        points,
        orders,
    })
}
