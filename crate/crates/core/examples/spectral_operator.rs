//! Chebyshev–Lobatto differentiation and Clenshaw–Curtis norms on [0, 2].

use fracpar::SpectralOperator;

fn main() -> fracpar::Result<()> {
    let op = SpectralOperator::new(16, 0.0, 2.0)?;
    let nodes = op.nodes();

    let f: Vec<f64> = nodes.iter().map(|x| (3.0 * x).sin()).collect();
    let df = op.d1() * nalgebra::DVector::from_column_slice(&f);
    let err = nodes
        .iter()
        .zip(df.iter())
        .map(|(x, d)| (d - 3.0 * (3.0 * x).cos()).abs())
        .fold(0.0, f64::max);
    println!("max |D1 sin(3x) - 3 cos(3x)| = {err:.3e}");

    let quad: f64 = op.quad_weights().iter().sum();
    println!("sum of quadrature weights    = {quad:.15}");

    // sin(pi x / 2) vanishes at both ends; its squared L2 norm on [0, 2] is 1.
    let u = op.sample(|x| (std::f64::consts::FRAC_PI_2 * x).sin());
    println!("||sin(pi x / 2)||            = {:.15}", op.l2_norm(u.as_slice()));
    Ok(())
}
