//! Parareal iterates against the sequential fine solution.

use fracpar::parareal::{parareal_solve_with, PararealOptions, Reference};
use fracpar::problems::paper42;
use fracpar::{SpectralOperator, TimeGrids};

fn main() -> fracpar::Result<()> {
    let problem = paper42();
    let op = SpectralOperator::new(12, problem.a, problem.b)?;
    let grids = TimeGrids::new(problem.t_final, 16, 4)?;
    let options = PararealOptions {
        max_iterations: 12,
        threads: fracpar::harness::config::hardware_threads(),
        reference: Reference::Sequential,
        ..PararealOptions::default()
    };
    let (_, report) = parareal_solve_with(&problem, &op, &grids, &options)?;

    println!(" k   max diff     error vs fine");
    for k in 0..report.iterates_used {
        println!("{:2}   {:.3e}    {:.3e}", k + 1, report.diffs[k], report.final_errors[k]);
    }
    println!("stop: {} after {} iterations", report.stop, report.iterates_used);
    Ok(())
}
