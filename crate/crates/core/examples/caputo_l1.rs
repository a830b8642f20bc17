//! L1 weights and the hybrid coarse/fine Caputo approximation of t^alpha + t.

use fracpar::l1_time::{discrete_caputo_hybrid, l1_weight};
use fracpar::{FractionalOrder, FractionalWeights, TimeGrids};
use statrs::function::gamma::gamma;

fn main() -> fracpar::Result<()> {
    let alpha = 0.5;
    print!("b_0..b_4 =");
    for j in 0..5 {
        print!(" {:.6}", l1_weight(j as f64, alpha)?);
    }
    println!();

    let y = |t: f64| t.powf(alpha) + t;
    let exact = |t: f64| gamma(1.0 + alpha) + t.powf(1.0 - alpha) / gamma(2.0 - alpha);

    let order = FractionalOrder::new(alpha)?;
    for nt in [8, 16, 32, 64] {
        let grids = TimeGrids::new(1.0, nt, 4)?;
        let weights = FractionalWeights::for_grids(order, &grids);
        let coarse: Vec<f64> = (0..nt).map(|i| y(grids.coarse_time(i))).collect();
        let fine: Vec<f64> = (0..=4).map(|r| y(grids.fine_time(nt - 1, r))).collect();
        let approx = discrete_caputo_hybrid(&coarse, &fine, &grids, &weights)?;
        println!(
            "N_t = {nt:3}: delta^alpha y(1) = {approx:.10}, error {:.3e}",
            (approx - exact(1.0)).abs()
        );
    }
    Ok(())
}
