//! Acceptance criteria 1 to 11. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured quantities.

use std::time::{Duration, Instant};

use fracpar::bounds::{
    binomial, double_sum, double_sum_bound, gronwall_brute, gronwall_closed, single_sum,
    single_sum_bound, theorem_bound, BoundParams, LipschitzConstants,
};
use fracpar::harness::commands::run_bench;
use fracpar::harness::config::{hardware_threads, BenchConfig, RunConfig, TestFunction};
use fracpar::harness::truncation::{fitted_slope, truncation_study, Region};
use fracpar::l1_time::{coarse_history_terms, discrete_caputo_coarse, l1_weight};
use fracpar::parareal::{
    exactness_check, parareal_solve, parareal_solve_with, PararealDriver, PararealOptions,
    Reference,
};
use fracpar::problems::{linear_heat, paper42};
use fracpar::spectral::reference_nodes;
use fracpar::stepping::{fine_propagate, run_coarse, run_fine_sequential};
use fracpar::{FractionalOrder, FractionalWeights, SpectralOperator, StateVector, Stepper, TimeGrids};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, pass: bool, detail: String, elapsed: Duration, budget: Duration) {
    let within = elapsed <= budget;
    let verdict = if pass && within { "PASS" } else { "FAIL" };
    println!(
        "criterion {id}: {verdict} ({detail}; {:.2}s of {:.0}s budget)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(within, "criterion {id} over its time budget");
}

#[test]
fn criterion_01_weight_identities() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut b0_ok = true;
    for alpha in [0.1, 0.5, 0.9] {
        b0_ok &= l1_weight(0.0, alpha).unwrap() == 1.0;
        let w = FractionalWeights::new(FractionalOrder::new(alpha).unwrap(), 1, 10_000);
        // every n for one order, a stride for the others
        let stride = if alpha == 0.5 { 1 } else { 97 };
        for n in (0..10_000).step_by(stride).chain([9_999]) {
            let s: f64 = coarse_history_terms(n, &w).map(|(_, c)| c).sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    let w = FractionalWeights::new(FractionalOrder::new(1.0).unwrap(), 1, 64);
    let euler_terms = (0..64).all(|n| {
        coarse_history_terms(n, &w).all(|(i, c)| c == if i == n { 1.0 } else { 0.0 })
    });
    let ys: Vec<f64> = (0..20).map(|i| (0.37 * i as f64).sin()).collect();
    let d = discrete_caputo_coarse(&ys, 0.25, &w).unwrap();
    let euler_value = d == (ys[19] - ys[18]) / 0.25;
    report(
        1,
        b0_ok && worst < 1e-13 && euler_terms && euler_value,
        format!("b_0 = 1: {b0_ok}, max |sum - 1| = {worst:.1e}, backward Euler exact: {}", euler_terms && euler_value),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_02_caputo_truncation_order() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.3, 0.5, 0.7] {
        let study = truncation_study(
            TestFunction::PowerPlusLinear,
            alpha,
            4,
            &[16, 32, 64, 128, 256],
            1.0,
        )
        .unwrap();
        let order = study
            .orders
            .iter()
            .find(|o| o.region == Region::Later)
            .unwrap()
            .order;
        pass &= (order - (1.0 - alpha)).abs() <= 0.2;
        detail.push(format!("alpha {alpha}: order {order:.3} vs {:.1}", 1.0 - alpha));
    }
    report(2, pass, detail.join(", "), start.elapsed(), Duration::from_secs(10));
}

/// Chebyshev series value and derivative by the `T_k`, `U_k` recurrences.
fn chebyshev_series(coeffs: &[f64], x: f64) -> (f64, f64) {
    let (mut t_prev, mut t, mut u_prev, mut u) = (1.0, x, 0.0, 1.0);
    let (mut value, mut deriv) = (coeffs[0], 0.0);
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        value += c * t;
        deriv += c * k as f64 * u;
        (t_prev, t) = (t, 2.0 * x * t - t_prev);
        (u_prev, u) = (u, 2.0 * x * u - u_prev);
    }
    (value, deriv)
}

#[test]
fn criterion_03_spectral_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_deriv = 0.0f64;
    let mut worst_row = 0.0f64;
    for degree in 2..=32 {
        let op = SpectralOperator::new(degree, -1.0, 1.0).unwrap();
        let x = reference_nodes(degree);
        for _ in 0..8 {
            let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let values = DVector::from_iterator(degree + 1, x.iter().map(|&xi| chebyshev_series(&coeffs, xi).0));
            let got = op.d1() * values;
            let scale = x.iter().map(|&xi| chebyshev_series(&coeffs, xi).1.abs()).fold(1.0, f64::max);
            for (i, &xi) in x.iter().enumerate() {
                worst_deriv = worst_deriv.max((got[i] - chebyshev_series(&coeffs, xi).1).abs() / scale);
            }
        }
        let n2 = (degree * degree) as f64;
        for m in [op.d1(), op.d2()] {
            for i in 0..=degree {
                worst_row = worst_row.max(m.row(i).iter().sum::<f64>().abs() / n2);
            }
        }
    }
    report(
        3,
        worst_deriv <= 1e-8 && worst_row <= 1e-10,
        format!("relative derivative error {worst_deriv:.1e}, row sum / N^2 {worst_row:.1e}"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_04_single_fine_step_equivalence() {
    let start = Instant::now();
    let p = paper42();
    let op = SpectralOperator::new(16, 0.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    for nt in [1, 8, 32, 64] {
        let grids = TimeGrids::new(1.0, nt, 1).unwrap();
        let traj = run_coarse(&p, &op, &grids).unwrap();
        let states = traj.states();
        for n in 0..nt {
            let path = fine_propagate(&states[n], &states[..=n], &op, &grids, &p).unwrap();
            worst = worst.max((&*path.endpoint - &*states[n + 1]).amax());
        }
    }
    report(
        4,
        worst <= 1e-12,
        format!("max |F - G| = {worst:.1e}"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_05_finite_termination() {
    let start = Instant::now();
    let p = linear_heat();
    let op = SpectralOperator::new(8, 0.0, 1.0).unwrap();
    let grids = TimeGrids::new(1.0, 8, 4).unwrap();
    let errors: Vec<f64> = (0..=8)
        .map(|k| exactness_check(&p, &op, &grids, k).unwrap())
        .collect();
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    report(
        5,
        worst <= 1e-10,
        format!("max over k of node error vs chained fine = {worst:.1e}, at k = 8: {:.1e}", errors[8]),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_06_error_drops_then_plateaus() {
    let start = Instant::now();
    let p = paper42();
    let op = SpectralOperator::new(16, 0.0, 1.0).unwrap();
    let grids = TimeGrids::new(1.0, 64, 8).unwrap();
    let options = PararealOptions {
        tol: 1e-14,
        max_iterations: 12,
        threads: hardware_threads(),
        reference: Reference::Sequential,
    };
    let (_, rep) = parareal_solve_with(&p, &op, &grids, &options).unwrap();
    let e = &rep.final_errors;
    assert!(e.len() >= 6, "stopped after {} iterations", e.len());
    let ratio = e[0] / e[5];
    let plateau = e[5..].windows(2).all(|w| w[1] <= 1.1 * w[0]);
    report(
        6,
        ratio >= 1e3 && plateau,
        format!(
            "err_vs_fine k=1 {:.3e}, k=6 {:.3e}, ratio {ratio:.1} (need >= 1e3), plateau after k=6: {plateau}",
            e[0], e[5]
        ),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_07_binomial_sums_and_bounds() {
    let start = Instant::now();
    let (n, b, c) = (10, 1.1, 1.001);
    let mut dominated = true;
    let mut hockey = true;
    let mut vanish = true;
    for k in 0..=n + 4 {
        let p = BoundParams::new(1.0, b, c, n, k, 1.0).unwrap();
        let (ds, ss) = (double_sum(&p).unwrap(), single_sum(&p).unwrap());
        dominated &= double_sum_bound(&p).unwrap() >= ds && single_sum_bound(&p).unwrap() >= ss;
        if k >= n {
            vanish &= ss == 0.0 && single_sum_bound(&p).unwrap() == 0.0;
        }
        if k >= 1 {
            let at_one = BoundParams::new(1.0, b, 1.0, n, k, 1.0).unwrap();
            let s = single_sum(&at_one).unwrap();
            hockey &= s == single_sum_bound(&at_one).unwrap();
            hockey &= s == if k < n { binomial(n as i64 - 1, k as i64) } else { 0.0 };
        }
    }
    report(
        7,
        dominated && hockey && vanish,
        format!("bound >= sum: {dominated}, equality at c = 1: {hockey}, zero for k >= n: {vanish}"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_08_closed_form_matches_recurrence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut saturated = true;
    for _ in 0..200 {
        let (a, b, c, e0) = (
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
        );
        let n = rng.gen_range(1..=20);
        let k = rng.gen_range(0..=20);
        let p = BoundParams::new(a, b, c, n, k, e0).unwrap();
        let brute = gronwall_brute(&p).unwrap();
        let closed = gronwall_closed(&p).unwrap();
        if brute != 0.0 {
            worst = worst.max((brute - closed).abs() / brute.abs());
        } else {
            worst = worst.max(closed.abs());
        }
        if k >= n {
            let later = p.with_k(20).unwrap();
            saturated &= gronwall_brute(&later).unwrap() == brute;
            saturated &= gronwall_closed(&later).unwrap() == gronwall_closed(&p.with_k(n).unwrap()).unwrap();
        }
    }
    report(
        8,
        worst <= 1e-10 && saturated,
        format!("max relative gap {worst:.1e}, saturation exact: {saturated}"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

fn random_direction(rng: &mut ChaCha8Rng, op: &SpectralOperator, size: f64) -> DVector<f64> {
    let v = DVector::from_fn(op.interior_len(), |_, _| rng.gen_range(-1.0..1.0));
    let norm = op.l2_norm(v.as_slice());
    v * (size / norm)
}

/// Largest observed `||P(V) - P(W)|| / max_i ||V_i - W_i||` over random
/// perturbations `W` of the histories `u[..=n]`.
fn fitted_lipschitz(
    op: &SpectralOperator,
    u: &[StateVector],
    eps: f64,
    rng: &mut ChaCha8Rng,
    propagate: impl Fn(&[StateVector]) -> StateVector,
) -> f64 {
    let mut worst = 0.0f64;
    for n in 0..u.len() - 1 {
        let base = propagate(&u[..=n]);
        for _ in 0..6 {
            let perturbed: Vec<StateVector> = u[..=n]
                .iter()
                .map(|s| StateVector::new(&**s + random_direction(rng, op, eps)))
                .collect();
            let moved = propagate(&perturbed);
            worst = worst.max(op.l2_distance(moved.as_slice(), base.as_slice()) / eps);
        }
    }
    worst
}

#[test]
fn criterion_09_theorem_bound_dominates() {
    let start = Instant::now();
    let p = linear_heat();
    let op = SpectralOperator::new(8, 0.0, 1.0).unwrap();
    let grids = TimeGrids::new(1.0, 8, 4).unwrap();
    let stepper = Stepper::new(&p, &op, grids);
    let u = run_fine_sequential(&p, &op, &grids).unwrap().coarse_states;

    let local = |step: &dyn Fn(&[StateVector]) -> StateVector| {
        (0..8)
            .map(|j| op.l2_distance(u[j + 1].as_slice(), step(&u[..=j]).as_slice()))
            .fold(0.0, f64::max)
    };
    let fine_err = local(&|h| stepper.fine_endpoint(h).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let c_g = fitted_lipschitz(&op, &u, 1e-6, &mut rng, |h| stepper.coarse_step(h).unwrap());
    let c_f = fitted_lipschitz(&op, &u, 1e-6, &mut rng, |h| stepper.fine_endpoint(h).unwrap());
    let consts = LipschitzConstants::from_measured(c_g, c_f).unwrap();

    let mut driver = PararealDriver::new(&p, &op, grids, 1).unwrap();
    let error_at = |states: &[StateVector], n: usize| op.l2_distance(states[n].as_slice(), u[n].as_slice());
    let coarse_err = (1..=8).map(|n| error_at(&driver.iterate().states, n)).fold(0.0, f64::max);

    let mut pass = true;
    let mut tightest = f64::INFINITY;
    for k in 0..=8 {
        if k > 0 {
            driver.advance().unwrap();
        }
        for n in 1..=8 {
            let measured = error_at(&driver.iterate().states, n);
            let bound = theorem_bound(&consts, n, k, fine_err, coarse_err).unwrap();
            pass &= bound >= measured;
            if measured > 0.0 {
                tightest = tightest.min(bound / measured);
            }
        }
    }
    report(
        9,
        pass,
        format!(
            "C_G {c_g:.4}, C_F {c_f:.4}, fine error {fine_err:.2e}, initial error {coarse_err:.2e}, min bound/measured {tightest:.2e}"
        ),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_10_speedup_trend() {
    let start = Instant::now();
    let threads = hardware_threads();
    let cfg = RunConfig {
        threads,
        bench: BenchConfig {
            sweep: vec![1 << 10, 1 << 11, 1 << 12, 1 << 13],
            reps: 3,
        },
        ..RunConfig::default()
    };
    let records = run_bench(&cfg).unwrap();
    let speedup = |dof: usize| records.iter().find(|r| r.dof == dof).unwrap().speedup;
    let xs: Vec<f64> = records.iter().map(|r| r.dof as f64).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.speedup).collect();
    let slope = fitted_slope(&xs, &ys);
    let enough_threads = threads >= 4;
    let growing = speedup(1 << 13) > speedup(1 << 10);
    let beats_fine = records.iter().filter(|r| r.dof >= 1 << 12).all(|r| r.speedup > 1.0);
    let table: Vec<String> = records.iter().map(|r| format!("{}: {:.2}", r.dof, r.speedup)).collect();
    report(
        10,
        enough_threads && growing && beats_fine && slope > 0.0,
        format!(
            "hardware threads {threads} (need >= 4), speedups [{}], slope {slope:.2e}, growing {growing}, > 1 from 2^12: {beats_fine}",
            table.join(", ")
        ),
        start.elapsed(),
        Duration::from_secs(600),
    );
}

#[test]
fn criterion_11_thread_count_determinism() {
    let start = Instant::now();
    let p = paper42();
    let op = SpectralOperator::new(16, 0.0, 1.0).unwrap();
    let grids = TimeGrids::new(1.0, 32, 8).unwrap();
    let max = hardware_threads();
    let runs: Vec<_> = [1, 2, max]
        .iter()
        .map(|&t| parareal_solve(&p, &op, &grids, 1e-10, 20, t).unwrap().0)
        .collect();
    let mut worst = 0.0f64;
    for run in &runs[1..] {
        for (a, b) in run.states.iter().zip(&runs[0].states) {
            worst = worst.max((&**a - &**b).amax());
        }
    }
    report(
        11,
        worst <= 1e-13,
        format!("threads {{1, 2, {max}}}: max state difference {worst:.1e}"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}
