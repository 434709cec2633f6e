//! Initial profiles that can be resampled on any grid.
//!
//! The refinement check for the singular mass integrals needs the initial
//! datum at several resolutions, so it takes a [`Profile`] rather than a field.

use crate::domain::{Field, SpatialGrid};
use crate::scalar::Real;

pub trait Profile<T: Real>: Sync {
    /// Samples the profile on `grid`. Returns the field together with the node
    /// at which the profile attains its peak.
    fn sample(&self, grid: &SpatialGrid<T>) -> (Field<T>, usize);
}

/// `M(1 − |x − x_p|^ℓ)`, with `x_p` snapped to the grid node nearest `center`
/// so that the discrete peak equals `M` at every resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpPeak<T> {
    pub height: T,
    pub center: T,
    pub exponent: T,
}

impl<T: Real> SharpPeak<T> {
    pub fn new(height: T, center: T, exponent: T) -> Self {
        Self {
            height,
            center,
            exponent,
        }
    }
}

impl<T: Real> Profile<T> for SharpPeak<T> {
    fn sample(&self, grid: &SpatialGrid<T>) -> (Field<T>, usize) {
        let peak = grid.nearest_node(self.center);
        let xp = grid.nodes()[peak];
        let field = grid.sample(|x| self.height * (T::one() - (x - xp).abs().powf(self.exponent)));
        (field, peak)
    }
}

/// Any pointwise function; the peak is the first maximal node.
pub struct FnProfile<F>(pub F);

impl<T: Real, F: Fn(T) -> T + Sync> Profile<T> for FnProfile<F> {
    fn sample(&self, grid: &SpatialGrid<T>) -> (Field<T>, usize) {
        let field = grid.sample(&self.0);
        let peak = field.argmax();
        (field, peak)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_peak_hits_height_on_every_grid() {
        let p = SharpPeak::new(0.7, 0.5, 0.25);
        for n in [64, 65, 2048, 4096] {
            let g = SpatialGrid::<f64>::uniform(n).unwrap();
            let (f, i) = p.sample(&g);
            assert_eq!(f[i], 0.7);
            assert_eq!(f.argmax(), i);
            assert!((g.nodes()[i] - 0.5).abs() <= 0.5 / n as f64 + 1e-15);
        }
    }

    #[test]
    fn fn_profile_reports_argmax() {
        let g = SpatialGrid::<f64>::uniform(100).unwrap();
        let (f, i) = FnProfile(|x: f64| -(x - 0.31).powi(2)).sample(&g);
        assert_eq!(i, f.argmax());
        assert_eq!(i, 30);
    }
}
