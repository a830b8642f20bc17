use fracpar::l1_time::{
    coarse_history_terms, discrete_caputo_coarse, discrete_caputo_hybrid, hybrid_coarse_terms,
    hybrid_fine_terms, l1_weight,
};
use fracpar::{FractionalOrder, FractionalWeights, TimeGrids};
use proptest::prelude::*;
use statrs::function::gamma::gamma;

/// Exact Caputo derivative at `t` of the piecewise-linear interpolant of
/// `(nodes, values)`, integrating the kernel piece by piece.
fn piecewise_linear_caputo(nodes: &[f64], values: &[f64], alpha: f64, t: f64) -> f64 {
    let mut sum = 0.0;
    for j in 0..nodes.len() - 1 {
        let slope = (values[j + 1] - values[j]) / (nodes[j + 1] - nodes[j]);
        let left = (t - nodes[j]).powf(1.0 - alpha);
        let right = (t - nodes[j + 1]).max(0.0).powf(1.0 - alpha);
        sum += slope * (left - right);
    }
    sum / gamma(2.0 - alpha)
}

/// `b_x` straight from the definition.
fn weight_oracle(x: f64, alpha: f64) -> f64 {
    (x + 1.0).powf(1.0 - alpha) - x.powf(1.0 - alpha)
}

/// Rounding error of [`weight_oracle`], dominated by the cancellation.
fn oracle_slack(x: f64, alpha: f64) -> f64 {
    8.0 * f64::EPSILON * (x + 1.0).powf(1.0 - alpha)
}

/// `B(p, q)` by midpoint rule after substitutions that remove both endpoint
/// singularities: `u = s^(1/q)` on `[0, 1/2]` and `1 - u = w^(1/p)` on `[1/2, 1]`.
fn beta_quadrature(p: f64, q: f64) -> f64 {
    let midpoint = |f: &dyn Fn(f64) -> f64, hi: f64| {
        let steps = 20_000;
        let h = hi / steps as f64;
        (0..steps).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
    };
    let left = midpoint(&|s: f64| (1.0 - s.powf(1.0 / q)).powf(p - 1.0) / q, 0.5f64.powf(q));
    let right = midpoint(&|w: f64| (1.0 - w.powf(1.0 / p)).powf(q - 1.0) / p, 0.5f64.powf(p));
    left + right
}

#[test]
fn spec_weight_values() {
    assert!((l1_weight(1.0, 0.5).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    assert_eq!(l1_weight(0.0, 0.3).unwrap(), 1.0);
    assert_eq!(l1_weight(0.0, 1.0).unwrap(), 1.0);
    assert_eq!(l1_weight(3.0, 1.0).unwrap(), 0.0);
    assert!(l1_weight(-0.5, 0.5).is_err());
    assert!(l1_weight(1.0, 0.0).is_err());
    assert!(l1_weight(1.0, 1.2).is_err());
}

#[test]
fn alpha_one_reduces_to_backward_euler() {
    let w = FractionalWeights::new(FractionalOrder::new(1.0).unwrap(), 1, 16);
    let ys: Vec<f64> = (0..8).map(|i| (i as f64 * 0.3).exp()).collect();
    let dt = 0.1;
    let d = discrete_caputo_coarse(&ys, dt, &w).unwrap();
    let euler = (ys[7] - ys[6]) / dt;
    assert!((d - euler).abs() <= 1e-13 * euler.abs());
    assert!(coarse_history_terms(6, &w).all(|(i, c)| c == if i == 6 { 1.0 } else { 0.0 }));
}

#[test]
fn caputo_of_powers_matches_beta_quadrature() {
    // d^alpha t^beta = beta / Gamma(1 - alpha) * t^(beta - alpha) * B(1 - alpha, beta)
    for (alpha, beta) in [(0.5, 0.5), (0.3, 1.0), (0.7, 1.3), (0.5, 0.5 + 1.0)] {
        let beta_int = beta_quadrature(1.0 - alpha, beta);
        let t: f64 = 0.8;
        let quad = beta / gamma(1.0 - alpha) * t.powf(beta - alpha) * beta_int;
        let closed = gamma(beta + 1.0) / gamma(beta + 1.0 - alpha) * t.powf(beta - alpha);
        assert!((quad - closed).abs() < 1e-8 * closed, "alpha={alpha} beta={beta}");
    }
}

#[test]
fn telescoping_sums_up_to_ten_thousand() {
    for alpha in [0.2, 0.5, 0.9] {
        let w = FractionalWeights::new(FractionalOrder::new(alpha).unwrap(), 1, 10_000);
        for n in [0usize, 1, 7, 100, 9_999] {
            let s: f64 = coarse_history_terms(n, &w).map(|(_, c)| c).sum();
            assert!((s - 1.0).abs() < 1e-13, "alpha={alpha} n={n} sum={s}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_are_positive_and_decreasing(alpha in 0.01f64..0.99, x in 0.0f64..1e6) {
        let b = l1_weight(x, alpha).unwrap();
        let next = l1_weight(x + 0.5, alpha).unwrap();
        prop_assert!(b > 0.0 && b <= 1.0);
        prop_assert!(next < b);
        let oracle = weight_oracle(x, alpha);
        prop_assert!((b - oracle).abs() <= 1e-13 * oracle + oracle_slack(x, alpha));
    }

    #[test]
    fn coarse_operator_is_exact_for_piecewise_linear_data(
        alpha in 0.05f64..1.0,
        values in prop::collection::vec(-2.0f64..2.0, 2..24),
        dt in 0.01f64..0.5,
    ) {
        let order = FractionalOrder::new(alpha).unwrap();
        let w = FractionalWeights::new(order, 1, values.len());
        let nodes: Vec<f64> = (0..values.len()).map(|i| i as f64 * dt).collect();
        let t = *nodes.last().unwrap();
        let got = discrete_caputo_coarse(&values, dt, &w).unwrap();
        let want = piecewise_linear_caputo(&nodes, &values, alpha, t);
        prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()), "{got} vs {want}");
    }

    #[test]
    fn hybrid_operator_is_exact_for_piecewise_linear_data(
        alpha in 0.05f64..1.0,
        nt in 2usize..12,
        m in 1usize..9,
        seed in prop::collection::vec(-2.0f64..2.0, 32),
        n_frac in 0.0f64..1.0,
        r_frac in 0.0f64..1.0,
    ) {
        let grids = TimeGrids::new(1.0, nt, m).unwrap();
        let order = FractionalOrder::new(alpha).unwrap();
        let w = FractionalWeights::for_grids(order, &grids);
        let n = ((n_frac * nt as f64) as usize).min(nt - 1);
        let r = 1 + ((r_frac * m as f64) as usize).min(m - 1);
        let coarse: Vec<f64> = (0..=n).map(|i| seed[i % seed.len()]).collect();
        let mut fine = vec![coarse[n]];
        fine.extend((1..=r).map(|j| seed[(n + 7 * j) % seed.len()]));

        let mut nodes: Vec<f64> = (0..=n).map(|i| grids.coarse_time(i)).collect();
        let mut values = coarse.clone();
        for (j, &v) in fine.iter().enumerate().skip(1) {
            nodes.push(grids.fine_time(n, j));
            values.push(v);
        }
        let t = grids.fine_time(n, r);
        let got = discrete_caputo_hybrid(&coarse, &fine, &grids, &w).unwrap();
        let want = piecewise_linear_caputo(&nodes, &values, alpha, t);
        let scale = 1.0 + want.abs() + (m * nt) as f64;
        prop_assert!((got - want).abs() <= 1e-10 * scale, "n={n} r={r}: {got} vs {want}");
    }

    #[test]
    fn hybrid_brackets_annihilate_constants(
        alpha in 0.05f64..1.0,
        n in 0usize..40,
        m in 1usize..16,
        r_frac in 0.0f64..1.0,
    ) {
        let r = 1 + ((r_frac * m as f64) as usize).min(m - 1);
        let w = FractionalWeights::new(FractionalOrder::new(alpha).unwrap(), m, (n + 1).max(m));
        let coarse: f64 = hybrid_coarse_terms(n, r, &w).map(|(_, c)| c).sum();
        let fine: f64 = hybrid_fine_terms(r, &w).map(|(_, c)| c).sum();
        prop_assert!(coarse.abs() < 1e-12);
        prop_assert!((fine + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_index_weights_match_definition(
        alpha in 0.05f64..1.0,
        m in 1usize..32,
        q in 0usize..2000,
    ) {
        let w = FractionalWeights::new(FractionalOrder::new(alpha).unwrap(), m, 2000 / m + 1);
        let x = q as f64 / m as f64;
        let oracle = weight_oracle(x, alpha);
        prop_assert!((w.at(q) - oracle).abs() <= 1e-13 * oracle + oracle_slack(x, alpha));
    }
}
