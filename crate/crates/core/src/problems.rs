//! Named builtin problems.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::l1_time::FractionalOrder;
use crate::stepping::ProblemSpec;

/// Registry names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &["paper42", "linear-heat", "constant-D", "zero"];

/// Diffusivity of the `constant-D` problem.
pub const CONSTANT_DIFFUSIVITY: f64 = 0.5;

fn half() -> FractionalOrder {
    FractionalOrder::new(0.5).expect("0.5 is a valid order")
}

fn bump(x: f64) -> f64 {
    (x * (1.0 - x)).powi(4)
}

/// `D = 1 + u`, `f = sin(pi x) e^{-t}`, `u0 = x^4 (1 - x)^4` on `[0, 1]`, alpha = 0.5, T = 1.
pub fn paper42() -> ProblemSpec {
    ProblemSpec::new(
        "paper42",
        0.0,
        1.0,
        1.0,
        half(),
        |_, _, u| 1.0 + u,
        |x, t, _| (PI * x).sin() * (-t).exp(),
        bump,
    )
}

/// Same data as [`paper42`] with `D = 1`, so each step is affine in the state.
pub fn linear_heat() -> ProblemSpec {
    ProblemSpec::new(
        "linear-heat",
        0.0,
        1.0,
        1.0,
        half(),
        |_, _, _| 1.0,
        |x, t, _| (PI * x).sin() * (-t).exp(),
        bump,
    )
}

/// `D = 0.5`, `f = 0`, `u0 = sin(pi x)`.
pub fn constant_d() -> ProblemSpec {
    ProblemSpec::new(
        "constant-D",
        0.0,
        1.0,
        1.0,
        half(),
        |_, _, _| CONSTANT_DIFFUSIVITY,
        |_, _, _| 0.0,
        |x| (PI * x).sin(),
    )
}

/// Unit diffusion, zero source and zero initial data.
pub fn zero() -> ProblemSpec {
    ProblemSpec::new(
        "zero",
        0.0,
        1.0,
        1.0,
        half(),
        |_, _, _| 1.0,
        |_, _, _| 0.0,
        |_| 0.0,
    )
}

pub fn builtin(name: &str) -> Result<ProblemSpec> {
    match name {
        "paper42" => Ok(paper42()),
        "linear-heat" => Ok(linear_heat()),
        "constant-D" | "constant-d" => Ok(constant_d()),
        "zero" => Ok(zero()),
        other => Err(Error::Config(format!(
            "unknown problem '{other}', expected one of {}",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_is_valid() {
        for name in BUILTIN_NAMES {
            let p = builtin(name).unwrap();
            p.validate(0.4).unwrap();
            assert_eq!(p.name, *name);
        }
        assert!(matches!(builtin("heat"), Err(Error::Config(_))));
    }

    #[test]
    fn paper42_coefficients() {
        let p = paper42();
        assert_eq!(p.diffusion(0.3, 0.2, 0.25), 1.25);
        assert!((p.source(0.5, 0.0, 9.0) - 1.0).abs() < 1e-15);
        assert!((p.initial(0.5) - 0.5f64.powi(8)).abs() < 1e-18);
    }
}
