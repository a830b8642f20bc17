//! Binomial sums of the parareal error recurrence and their closed-form bounds.

use fracpar::bounds::{
    double_sum, double_sum_bound, gronwall_brute, gronwall_closed, single_sum, single_sum_bound,
    BoundParams,
};

fn main() -> fracpar::Result<()> {
    let n = 10;
    println!(" k   double sum   bound        single sum   bound");
    for k in 0..=n {
        let p = BoundParams::new(1.0, 1.1, 1.001, n, k, 1.0)?;
        println!(
            "{k:2}   {:.4e}   {:.4e}   {:.4e}   {:.4e}",
            double_sum(&p)?,
            double_sum_bound(&p)?,
            single_sum(&p)?,
            single_sum_bound(&p)?
        );
    }

    let p = BoundParams::new(0.3, 1.1, 1.001, n, 4, 2.0)?;
    println!(
        "recurrence f^4_10: iterated {:.12e}, closed form {:.12e}",
        gronwall_brute(&p)?,
        gronwall_closed(&p)?
    );
    Ok(())
}
