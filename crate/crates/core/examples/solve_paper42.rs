//! Coarse and sequential fine solves of D = 1 + u, f = sin(pi x) e^{-t}.

use fracpar::problems::paper42;
use fracpar::stepping::{run_coarse, run_fine_sequential};
use fracpar::{SpectralOperator, TimeGrids};

fn main() -> fracpar::Result<()> {
    let problem = paper42();
    let op = SpectralOperator::new(16, problem.a, problem.b)?;
    let grids = TimeGrids::new(problem.t_final, 16, 8)?;

    let coarse = run_coarse(&problem, &op, &grids)?;
    let fine = run_fine_sequential(&problem, &op, &grids)?;

    println!("   T_n     coarse ||U||    fine ||U||");
    for (n, (g, f)) in coarse.states().iter().zip(&fine.coarse_states).enumerate().step_by(4) {
        println!(
            "{:6.3}  {:14.8e}  {:14.8e}",
            grids.coarse_time(n),
            op.l2_norm(g.as_slice()),
            op.l2_norm(f.as_slice())
        );
    }
    println!("fine solve took {:?}", fine.wall_time);
    Ok(())
}
