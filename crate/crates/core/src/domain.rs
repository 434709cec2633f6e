//! Discretization of the unit interval, grid fields and the nonlocal quadrature.
//!
//! The domain is always `[0, 1]`, so the quadrature weights sum to one and the
//! integral of a constant is the constant itself.

use std::ops::{Index, IndexMut};

use crate::error::{Result, ShadowError};
use crate::scalar::Real;

/// Uniform cell-centred grid on `[0, 1]` with midpoint-rule weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> SpatialGrid<T> {
    /// Cell centres `x_i = (i + 1/2)/n` with weights `1/n`.
    pub fn uniform(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(ShadowError::InvalidGrid(format!(
                "need at least 2 cells, got {n_cells}"
            )));
        }
        let n = T::from_usize_lossy(n_cells);
        let half = T::lit(0.5);
        let nodes = (0..n_cells)
            .map(|i| (T::from_usize_lossy(i) + half) / n)
            .collect();
        let weights = vec![T::one() / n; n_cells];
        Ok(Self { nodes, weights })
    }

    /// Single cell of unit measure at `x = 1/2`; the space-homogeneous (kinetic)
    /// system is the shadow system on this grid.
    pub(crate) fn point() -> Self {
        Self {
            nodes: vec![T::lit(0.5)],
            weights: vec![T::one()],
        }
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Uniform cell width.
    pub fn spacing(&self) -> T {
        T::one() / T::from_usize_lossy(self.n_cells())
    }

    /// Index of the node closest to `x` (ties go to the right-hand node).
    pub fn nearest_node(&self, x: T) -> usize {
        let n = self.n_cells();
        let idx = (x * T::from_usize_lossy(n)).floor();
        let idx = idx.max(T::zero()).to_usize().unwrap_or(0);
        idx.min(n - 1)
    }

    /// Samples a pointwise function at the cell centres.
    pub fn sample<F: Fn(T) -> T>(&self, f: F) -> Field<T> {
        Field(self.nodes.iter().map(|&x| f(x)).collect())
    }

    pub fn check(&self, field: &Field<T>) -> Result<()> {
        if field.len() != self.n_cells() {
            return Err(ShadowError::Shape {
                expected: self.n_cells(),
                got: field.len(),
            });
        }
        Ok(())
    }

    /// `Σ w_i f_i`.
    pub fn quadrature(&self, f: &Field<T>) -> Result<T> {
        self.check(f)?;
        Ok(weighted_sum(&self.weights, &f.0))
    }

    /// Indices with `f_i ≥ max(f) − tol`. Ties are returned in full.
    pub fn argmax_set(&self, f: &Field<T>, tol: T) -> Vec<usize> {
        argmax_set(&f.0, tol)
    }

    /// Quadrature weights with the listed nodes treated as points of zero
    /// measure. The remaining weights are rescaled so they still sum to one.
    pub fn weights_without(&self, points: &[usize]) -> Result<Vec<T>> {
        let mut w = self.weights.clone();
        for &i in points {
            if i >= w.len() {
                return Err(ShadowError::InvalidInput(format!(
                    "node {i} outside grid of {} cells",
                    w.len()
                )));
            }
            w[i] = T::zero();
        }
        let total: T = w.iter().copied().sum();
        if total <= T::zero() {
            return Err(ShadowError::InvalidInput(
                "no quadrature mass left after removing point nodes".into(),
            ));
        }
        w.iter_mut().for_each(|wi| *wi /= total);
        Ok(w)
    }
}

pub(crate) fn weighted_sum<T: Real>(w: &[T], f: &[T]) -> T {
    w.iter().zip(f).map(|(&wi, &fi)| wi * fi).sum()
}

pub(crate) fn argmax_set<T: Real>(f: &[T], tol: T) -> Vec<usize> {
    let Some(max) = f.iter().copied().reduce(T::max) else {
        return Vec::new();
    };
    let floor = max - tol.max(T::zero());
    f.iter()
        .enumerate()
        .filter(|(_, &v)| v >= floor)
        .map(|(i, _)| i)
        .collect()
}

/// Values of a scalar function at the grid nodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field<T>(pub Vec<T>);

impl<T: Real> Field<T> {
    pub fn constant(n: usize, value: T) -> Self {
        Self(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.0.iter()
    }

    pub fn max(&self) -> T {
        self.0.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.0.iter().copied().fold(T::infinity(), T::min)
    }

    /// Index of the first maximal entry.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl<T> Index<usize> for Field<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Field<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T> From<Vec<T>> for Field<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

/// Snapshot `(u(·, t), ξ(t), t)` of the shadow system.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowState<T> {
    pub u: Field<T>,
    pub xi: T,
    pub t: T,
}

impl<T: Real> ShadowState<T> {
    pub fn new(u: Field<T>, xi: T, t: T) -> Self {
        Self { u, xi, t }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.xi >= T::zero() && self.u.iter().all(|&v| v >= T::zero())
    }
}

/// Indicator of a subset `Ω₁` of the grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMask(pub Vec<bool>);

impl CellMask {
    pub fn full(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// Cells whose centre lies in the closed interval `[lo, hi]`.
    pub fn interval<T: Real>(grid: &SpatialGrid<T>, lo: T, hi: T) -> Self {
        Self(grid.nodes().iter().map(|&x| x >= lo && x <= hi).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.get(i).copied().unwrap_or(false)
    }

    /// `|Ω₁|`, the sum of the masked weights.
    pub fn measure<T: Real>(&self, grid: &SpatialGrid<T>) -> Result<T> {
        if self.len() != grid.n_cells() {
            return Err(ShadowError::Shape {
                expected: grid.n_cells(),
                got: self.len(),
            });
        }
        Ok(grid
            .weights()
            .iter()
            .zip(&self.0)
            .filter(|(_, &m)| m)
            .map(|(&w, _)| w)
            .sum())
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&m| m).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn four_cell_grid() {
        let g = SpatialGrid::<f64>::uniform(4).unwrap();
        assert_eq!(g.nodes(), &[0.125, 0.375, 0.625, 0.875]);
        assert!(g.weights().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn weights_are_normalized() {
        let g2 = SpatialGrid::<f64>::uniform(2).unwrap();
        assert_eq!(g2.weights().iter().sum::<f64>(), 1.0);
        let g = SpatialGrid::<f64>::uniform(1000).unwrap();
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes().iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(matches!(
            SpatialGrid::<f64>::uniform(1),
            Err(ShadowError::InvalidGrid(_))
        ));
        assert!(SpatialGrid::<f64>::uniform(0).is_err());
    }

    #[test]
    fn quadrature_of_constant_is_exact() {
        for n in [2, 3, 7, 512] {
            let g = SpatialGrid::<f64>::uniform(n).unwrap();
            let q = g.quadrature(&Field::constant(n, 3.25)).unwrap();
            assert_abs_diff_eq!(q, 3.25, epsilon = 1e-13);
        }
    }

    #[test]
    fn quadrature_against_antiderivatives() {
        let g = SpatialGrid::<f64>::uniform(1000).unwrap();
        let lin = g.quadrature(&g.sample(|x| x)).unwrap();
        assert_abs_diff_eq!(lin, 0.5, epsilon = 1e-6);
        let pi = std::f64::consts::PI;
        let s = g.quadrature(&g.sample(|x| (3.0 * pi * x).sin())).unwrap();
        assert_abs_diff_eq!(s, 2.0 / (3.0 * pi), epsilon = 1e-5);
    }

    #[test]
    fn quadrature_shape_error() {
        let g = SpatialGrid::<f64>::uniform(4).unwrap();
        let err = g.quadrature(&Field::constant(3, 1.0)).unwrap_err();
        assert_eq!(
            err,
            ShadowError::Shape {
                expected: 4,
                got: 3
            }
        );
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let exact = 1.0 - (1.0f64).cos();
        let errs: Vec<f64> = [100, 200, 400]
            .iter()
            .map(|&n| {
                let g = SpatialGrid::<f64>::uniform(n).unwrap();
                (g.quadrature(&g.sample(f64::sin)).unwrap() - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn argmax_examples() {
        let g = SpatialGrid::<f64>::uniform(3).unwrap();
        assert_eq!(g.argmax_set(&Field(vec![1.0, 3.0, 2.0]), 0.0), vec![1]);
        assert_eq!(g.argmax_set(&Field(vec![2.0, 2.0, 1.0]), 0.0), vec![0, 1]);
    }

    #[test]
    fn argmax_of_two_bumps() {
        let g = SpatialGrid::<f64>::uniform(1000).unwrap();
        let pi = std::f64::consts::PI;
        let f = g.sample(|x| 8.0 + 0.05 * (3.0 * pi * x).sin());
        let set = g.argmax_set(&f, 1e-9);
        assert_eq!(
            set,
            vec![g.nearest_node(1.0 / 6.0), g.nearest_node(5.0 / 6.0)]
        );
    }

    #[test]
    fn weights_without_points_renormalize() {
        let g = SpatialGrid::<f64>::uniform(8).unwrap();
        let w = g.weights_without(&[3]).unwrap();
        assert_eq!(w[3], 0.0);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(g.weights_without(&[8]).is_err());
    }

    #[test]
    fn mask_measure() {
        let g = SpatialGrid::<f64>::uniform(512).unwrap();
        let m = CellMask::interval(&g, 0.25, 0.75);
        assert_eq!(m.count(), 256);
        assert_abs_diff_eq!(m.measure(&g).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn f32_grid_works() {
        let g = SpatialGrid::<f32>::uniform(64).unwrap();
        let q = g.quadrature(&g.sample(|x| x)).unwrap();
        assert!((q - 0.5).abs() < 1e-5);
    }
}
