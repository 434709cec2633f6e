//! Helpers shared by the acceptance checks.

use std::sync::Arc;

use shadowsim_core::{GenericKinetics, Kinetics};

/// Kinetics with every term and partial identically zero.
pub fn inert() -> Kinetics {
    let zero = Arc::new(|_: f64, _: f64| 0.0);
    Kinetics::Generic(GenericKinetics::new(
        zero.clone(),
        zero.clone(),
        zero.clone(),
        zero.clone(),
        zero.clone(),
        zero,
    ))
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<_> = (0..5).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        assert!((ls_slope(&pts) + 2.0).abs() < 1e-14);
    }
}
