//! Fitted orders of the hybrid L1 operator for y = t^alpha + t.

use fracpar::harness::config::TestFunction;
use fracpar::harness::truncation::truncation_study;

fn main() -> fracpar::Result<()> {
    for alpha in [0.3, 0.5, 0.7] {
        let study = truncation_study(TestFunction::PowerPlusLinear, alpha, 4, &[16, 32, 64, 128], 1.0)?;
        print!("alpha = {alpha}:");
        for o in &study.orders {
            print!("  {} {:.3}", o.region.label(), o.order);
        }
        println!("  (expected {:.1} for n>=2)", 1.0 - alpha);
    }
    Ok(())
}
