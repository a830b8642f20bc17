//! The five harness commands. Each has a `run_*` function returning the
//! table and a `write_*` function emitting its CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use crate::bounds::{
    double_sum, double_sum_bound, single_sum, single_sum_bound, BoundParams,
};
use crate::error::{Error, Result};
use crate::harness::alloc;
use crate::harness::config::{RunConfig, SolverKind};
use crate::harness::csv::{sci, write_header, write_row};
use crate::harness::truncation::{truncation_study, TruncationStudy};
use crate::l1_time::TimeGrids;
use crate::parareal::{parareal_solve_with, PararealOptions, PararealReport, Reference, StopReason};
use crate::spectral::{SpectralOperator, StateVector};
use crate::stepping::{run_coarse, run_fine_sequential};

/// Open `path`, or standard output when `None`, and hand it to `f`.
pub fn with_output<T>(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> Result<T>,
) -> Result<T> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            let out = f(&mut w)?;
            w.flush()?;
            Ok(out)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)
        }
    }
}

fn setup(cfg: &RunConfig) -> Result<(crate::stepping::ProblemSpec, SpectralOperator, TimeGrids)> {
    cfg.validate()?;
    let problem = cfg.problem_spec()?;
    let op = SpectralOperator::new(cfg.n, problem.a, problem.b)?;
    let grids = TimeGrids::new(problem.t_final, cfg.nt, cfg.m)?;
    Ok((problem, op, grids))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveRow {
    pub n: usize,
    pub t: f64,
    pub l2_norm: f64,
    pub min: f64,
    pub max: f64,
}

pub fn run_solve(cfg: &RunConfig) -> Result<Vec<SolveRow>> {
    let (problem, op, grids) = setup(cfg)?;
    let states: Vec<StateVector> = match cfg.solve.solver {
        SolverKind::Fine => run_fine_sequential(&problem, &op, &grids)?.coarse_states,
        SolverKind::Coarse => run_coarse(&problem, &op, &grids)?.into_states(),
    };
    Ok(states
        .iter()
        .enumerate()
        .map(|(n, s)| SolveRow {
            n,
            t: grids.coarse_time(n),
            l2_norm: op.l2_norm(s.as_slice()),
            min: s.min(),
            max: s.max(),
        })
        .collect())
}

pub fn write_solve(rows: &[SolveRow], w: &mut dyn Write) -> Result<()> {
    write_header(w, &["n", "T_n", "l2_norm", "min", "max"])?;
    for r in rows {
        write_row(w, &[r.n.to_string(), sci(r.t), sci(r.l2_norm), sci(r.min), sci(r.max)])?;
    }
    Ok(())
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<()> {
    let rows = run_solve(cfg)?;
    with_output(cfg.out.as_deref(), |w| write_solve(&rows, w))
}

pub fn run_parareal(cfg: &RunConfig) -> Result<PararealReport> {
    let (problem, op, grids) = setup(cfg)?;
    let options = PararealOptions {
        tol: cfg.tol,
        max_iterations: cfg.kmax,
        threads: cfg.threads,
        reference: if cfg.parareal.reference {
            Reference::Sequential
        } else {
            Reference::None
        },
    };
    Ok(parareal_solve_with(&problem, &op, &grids, &options)?.1)
}

pub fn write_parareal(report: &PararealReport, w: &mut dyn Write) -> Result<()> {
    let with_reference = !report.final_errors.is_empty();
    if with_reference {
        write_header(w, &["k", "max_diff", "err_vs_fine", "wall_time_cumulative"])?;
    } else {
        write_header(w, &["k", "max_diff", "wall_time_cumulative"])?;
    }
    for k in 0..report.iterates_used {
        let mut row = vec![(k + 1).to_string(), sci(report.diffs[k])];
        if with_reference {
            row.push(sci(report.final_errors[k]));
        }
        row.push(sci(report.cumulative_times[k].as_secs_f64()));
        write_row(w, &row)?;
    }
    Ok(())
}

pub fn describe_stop(report: &PararealReport) -> String {
    let k = report.iterates_used;
    match report.stop {
        StopReason::Tolerance => format!(
            "stopped by tolerance at k = {k} (max_diff = {:e})",
            report.diffs[k - 1]
        ),
        StopReason::MaxIterations => format!("stopped by K_max at k = {k}"),
    }
}

pub fn cmd_parareal(cfg: &RunConfig) -> Result<()> {
    let report = run_parareal(cfg)?;
    eprintln!("{}", describe_stop(&report));
    with_output(cfg.out.as_deref(), |w| write_parareal(&report, w))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub dof: usize,
    pub nt: usize,
    pub m: usize,
    pub wall_time_fine: f64,
    pub wall_time_parareal: f64,
    pub speedup: f64,
    pub iterations_used: usize,
    pub peak_alloc_bytes_fine: Option<usize>,
    pub peak_alloc_bytes_parareal: Option<usize>,
    pub final_diff: f64,
}

/// `N_t = 2^ceil(log2(dof) / 2)`, `M = dof / N_t`.
pub fn split_dof(dof: usize) -> Result<(usize, usize)> {
    if dof < 2 || !dof.is_power_of_two() {
        return Err(Error::Config(format!(
            "bench dof must be a power of two >= 2, got {dof}"
        )));
    }
    let log = dof.trailing_zeros();
    let nt = 1usize << log.div_ceil(2);
    Ok((nt, dof / nt))
}

fn min_time<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(Duration, T)> {
    f()?;
    let mut best = Duration::MAX;
    let mut last = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let out = f()?;
        best = best.min(start.elapsed());
        last = Some(out);
    }
    Ok((best, last.expect("at least one repetition")))
}

pub fn run_bench(cfg: &RunConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    if cfg.bench.sweep.is_empty() {
        return Err(Error::Config("bench sweep is empty".into()));
    }
    if cfg.bench.reps < 3 {
        return Err(Error::Config(format!(
            "bench needs at least 3 repetitions, got {}",
            cfg.bench.reps
        )));
    }
    let problem = cfg.problem_spec()?;
    let op = SpectralOperator::new(cfg.n, problem.a, problem.b)?;
    let mut records = Vec::with_capacity(cfg.bench.sweep.len());
    for &dof in &cfg.bench.sweep {
        let (nt, m) = split_dof(dof)?;
        let grids = TimeGrids::new(problem.t_final, nt, m)?;
        let options = PararealOptions {
            tol: cfg.tol,
            max_iterations: cfg.kmax,
            threads: cfg.threads,
            reference: Reference::None,
        };
        let (fine_time, _) = min_time(cfg.bench.reps, || run_fine_sequential(&problem, &op, &grids))?;
        let (par_time, report) = min_time(cfg.bench.reps, || {
            Ok(parareal_solve_with(&problem, &op, &grids, &options)?.1)
        })?;
        let (_, fine_mem) = alloc::measure(|| run_fine_sequential(&problem, &op, &grids));
        let (_, par_mem) = alloc::measure(|| parareal_solve_with(&problem, &op, &grids, &options));
        let fine = fine_time.as_secs_f64();
        let par = par_time.as_secs_f64();
        records.push(BenchRecord {
            dof,
            nt,
            m,
            wall_time_fine: fine,
            wall_time_parareal: par,
            speedup: fine / par,
            iterations_used: report.iterates_used,
            peak_alloc_bytes_fine: fine_mem.map(|s| s.peak_bytes),
            peak_alloc_bytes_parareal: par_mem.map(|s| s.peak_bytes),
            final_diff: report.diffs[report.iterates_used - 1],
        });
    }
    Ok(records)
}

pub fn write_bench(records: &[BenchRecord], w: &mut dyn Write) -> Result<()> {
    write_header(
        w,
        &[
            "dof",
            "nt",
            "m",
            "wall_time_fine",
            "wall_time_parareal",
            "speedup",
            "iterations_used",
            "peak_alloc_bytes_fine_approx",
            "peak_alloc_bytes_parareal_approx",
            "final_diff",
        ],
    )?;
    let bytes = |b: Option<usize>| b.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        write_row(
            w,
            &[
                r.dof.to_string(),
                r.nt.to_string(),
                r.m.to_string(),
                sci(r.wall_time_fine),
                sci(r.wall_time_parareal),
                sci(r.speedup),
                r.iterations_used.to_string(),
                bytes(r.peak_alloc_bytes_fine),
                bytes(r.peak_alloc_bytes_parareal),
                sci(r.final_diff),
            ],
        )?;
    }
    Ok(())
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<()> {
    let records = run_bench(cfg)?;
    with_output(cfg.out.as_deref(), |w| write_bench(&records, w))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRow {
    pub k: usize,
    pub double_sum: f64,
    pub double_bound: f64,
    pub single_sum: f64,
    pub single_bound: f64,
}

/// Rows for `k = 0..=n`.
pub fn run_bounds(cfg: &RunConfig) -> Result<Vec<BoundsRow>> {
    let b = &cfg.bounds;
    let base = BoundParams::new(b.a, b.b, b.c, b.n, 0, b.e0)?;
    (0..=b.n)
        .map(|k| {
            let p = base.with_k(k)?;
            Ok(BoundsRow {
                k,
                double_sum: double_sum(&p)?,
                double_bound: double_sum_bound(&p)?,
                single_sum: single_sum(&p)?,
                single_bound: single_sum_bound(&p)?,
            })
        })
        .collect()
}

pub fn write_bounds(rows: &[BoundsRow], w: &mut dyn Write) -> Result<()> {
    write_header(w, &["k", "double_sum", "double_bound", "single_sum", "single_bound"])?;
    for r in rows {
        write_row(
            w,
            &[
                r.k.to_string(),
                sci(r.double_sum),
                sci(r.double_bound),
                sci(r.single_sum),
                sci(r.single_bound),
            ],
        )?;
    }
    Ok(())
}

pub fn cmd_bounds(cfg: &RunConfig) -> Result<()> {
    let rows = run_bounds(cfg)?;
    with_output(cfg.out.as_deref(), |w| write_bounds(&rows, w))
}

pub fn run_truncation(cfg: &RunConfig) -> Result<TruncationStudy> {
    if cfg.m == 0 {
        return Err(Error::Config("m must be positive".into()));
    }
    truncation_study(cfg.truncation.function, cfg.alpha, cfg.m, &cfg.truncation.sweep, 1.0)
}

pub fn write_truncation_points(study: &TruncationStudy, w: &mut dyn Write) -> Result<()> {
    write_header(w, &["nt", "m", "n", "r", "t", "error", "weighted_error"])?;
    for p in &study.points {
        write_row(
            w,
            &[
                p.nt.to_string(),
                p.m.to_string(),
                p.n.to_string(),
                p.r.to_string(),
                sci(p.t),
                sci(p.error),
                sci(p.weighted),
            ],
        )?;
    }
    Ok(())
}

pub fn write_truncation_orders(study: &TruncationStudy, w: &mut dyn Write) -> Result<()> {
    write_header(w, &["region", "fitted_order"])?;
    for o in &study.orders {
        write_row(w, &[o.region.label().to_string(), sci(o.order)])?;
    }
    Ok(())
}

/// Pointwise errors to `out` and fitted orders to `out` with extension
/// `orders.csv`; both tables to standard output, separated by a blank line,
/// when no path is set.
pub fn cmd_truncation(cfg: &RunConfig) -> Result<()> {
    let study = run_truncation(cfg)?;
    match cfg.out.as_deref() {
        Some(path) => {
            with_output(Some(path), |w| write_truncation_points(&study, w))?;
            let orders = path.with_extension("orders.csv");
            with_output(Some(&orders), |w| write_truncation_orders(&study, w))
        }
        None => with_output(None, |w| {
            write_truncation_points(&study, w)?;
            writeln!(w)?;
            write_truncation_orders(&study, w)
        }),
    }
}
