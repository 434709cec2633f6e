//! Constant and two-level stationary solutions, their classification and the
//! eigenpair check for the linearized operator.

use crate::domain::{weighted_sum, CellMask, Field, SpatialGrid};
use crate::error::{Result, ShadowError};
use crate::scalar::Real;

use super::ModelKinetics;

/// Largest `ξ̄` reported for the activator-inhibitor family.
const AI_XI_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    TrivialStable,
    UnstableAutocatalytic,
    OdeStable,
    OdeUnstable,
    Inconclusive,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TrivialStable => "trivial-stable",
            Self::UnstableAutocatalytic => "unstable-autocatalytic",
            Self::OdeStable => "ode-stable",
            Self::OdeUnstable => "ode-unstable",
            Self::Inconclusive => "inconclusive",
        }
    }
}

/// A stationary solution taking the value `u_on` on the mask and `u_off`
/// elsewhere. Constant states have no mask and `u_on == u_off`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState<T> {
    pub u_on: T,
    pub u_off: T,
    pub xi: T,
    pub mask: Option<CellMask>,
    /// Measure of the masked set (1 for constant states).
    pub measure: T,
    pub classification: Stability,
}

impl<T: Real> SteadyState<T> {
    fn constant(u: T, xi: T) -> Self {
        Self {
            u_on: u,
            u_off: u,
            xi,
            mask: None,
            measure: T::one(),
            classification: Stability::Inconclusive,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.mask.is_none() || self.u_on == self.u_off
    }

    /// The profile `U` on `n` cells.
    pub fn field(&self, n: usize) -> Field<T> {
        match &self.mask {
            None => Field::constant(n, self.u_on),
            Some(m) => Field(
                (0..n)
                    .map(|i| if m.contains(i) { self.u_on } else { self.u_off })
                    .collect(),
            ),
        }
    }

    /// `max_i |f(U_i, ξ̄)|` and `|∫ g(U, ξ̄)|` on `grid`.
    pub fn residuals(&self, model: &ModelKinetics<T>, grid: &SpatialGrid<T>) -> Result<(T, T)> {
        let u = self.field(grid.n_cells());
        let mut f_res = T::zero();
        let mut g_vals = Vec::with_capacity(u.len());
        for &ui in u.iter() {
            f_res = f_res.max(model.eval_f(ui, self.xi)?.abs());
            g_vals.push(model.eval_g(ui, self.xi)?);
        }
        Ok((f_res, weighted_sum(grid.weights(), &g_vals).abs()))
    }
}

/// Result list plus notes on anything skipped or suspicious.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyCatalog<T> {
    pub states: Vec<SteadyState<T>>,
    pub diagnostics: Vec<String>,
}

impl<T> SteadyCatalog<T> {
    fn empty() -> Self {
        Self {
            states: Vec::new(),
            diagnostics: Vec::new(),
        }
    }
}

/// Both roots of `a x² + b x + c`, ascending, computed without cancellation.
fn quadratic_roots<T: Real>(a: T, b: T, c: T) -> Option<(T, T)> {
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        return None;
    }
    let q = -T::lit(0.5) * (b + b.signum() * disc.sqrt());
    if q == T::zero() {
        return Some((T::zero(), T::zero()));
    }
    let (r1, r2) = (q / a, c / q);
    Some((r1.min(r2), r1.max(r2)))
}

fn jacobian_class<T: Real>(model: &ModelKinetics<T>, u: T, xi: T) -> Result<Stability> {
    let p = model.eval_partials(u, xi)?;
    let (tr, det) = (p.trace(), p.det());
    Ok(if tr < T::zero() && det > T::zero() {
        Stability::OdeStable
    } else if tr > T::zero() || det < T::zero() {
        Stability::OdeUnstable
    } else {
        Stability::Inconclusive
    })
}

/// Keeps states whose residuals are within tolerance, noting the others.
fn push_checked<T: Real>(
    cat: &mut SteadyCatalog<T>,
    model: &ModelKinetics<T>,
    grid: &SpatialGrid<T>,
    state: SteadyState<T>,
) -> Result<()> {
    let tol = T::tol(1e-10);
    let (rf, rg) = state.residuals(model, grid)?;
    if rf <= tol && rg <= tol {
        cat.states.push(state);
    } else {
        cat.diagnostics.push(format!(
            "dropped candidate u={}, xi={}: residuals {rf:e}, {rg:e}",
            state.u_on, state.xi
        ));
    }
    Ok(())
}

/// Nonnegative constant solutions of the kinetic system, classified by the
/// Jacobian of the two-component ODE.
pub fn ode_steady_states<T: Real>(model: &ModelKinetics<T>) -> Result<SteadyCatalog<T>> {
    model.validate()?;
    let point = SpatialGrid::point();
    let mut cat = SteadyCatalog::empty();
    let mut candidates = Vec::new();
    match *model {
        ModelKinetics::GrayScott { b, k } => {
            candidates.push((T::zero(), T::one()));
            match quadratic_roots(b, -b, (b + k) * (b + k)) {
                Some((x1, x2)) => {
                    for xi in [x1, x2] {
                        if xi > T::zero() {
                            candidates.push(((b + k) / xi, xi));
                        }
                    }
                }
                None => cat
                    .diagnostics
                    .push("no nontrivial state: B < 4(B+k)^2".to_string()),
            }
        }
        ModelKinetics::ActivatorInhibitor { p, q, r, s, .. } => {
            candidates.push((T::one(), T::one()));
            if r * q / (p - T::one()) - s - T::one() == T::zero() {
                cat.diagnostics.push(
                    "degenerate exponent: every xi>0 with u=xi^(q/(p-1)) is stationary".into(),
                );
            }
        }
        ModelKinetics::Carcinogenesis { a, d, kappa0 } => {
            candidates.push((T::zero(), kappa0));
            if a > d {
                match quadratic_roots(d, -kappa0 * (a - d), d) {
                    Some((u1, u2)) => {
                        for u in [u2, u1] {
                            candidates.push((u, d / ((a - d) * u)));
                        }
                    }
                    None => cat
                        .diagnostics
                        .push("no positive states: kappa0^2 < 4(d/(a-d))^2".to_string()),
                }
            } else {
                cat.diagnostics
                    .push("no positive states: a <= d".to_string());
            }
        }
        ModelKinetics::Generic(_) => {
            cat.diagnostics
                .push("no closed-form steady states for generic kinetics".into());
        }
    }
    for (u, xi) in candidates {
        let mut st = SteadyState::constant(u, xi);
        st.classification = jacobian_class(model, u, xi)?;
        push_checked(&mut cat, model, &point, st)?;
    }
    Ok(cat)
}

/// Two-level stationary solutions of the shadow system: the nonzero level on
/// `mask`, zero elsewhere.
pub fn shadow_steady_states<T: Real>(
    model: &ModelKinetics<T>,
    grid: &SpatialGrid<T>,
    mask: &CellMask,
) -> Result<SteadyCatalog<T>> {
    model.validate()?;
    let m = mask.measure(grid)?;
    if !(m > T::zero() && m <= T::one() + T::tol(1e-12)) {
        return Err(ShadowError::Constraint(format!(
            "mask measure must lie in (0,1], got {m}"
        )));
    }
    let mut cat = SteadyCatalog::empty();
    let mut levels = Vec::new();
    match *model {
        ModelKinetics::GrayScott { b, k } => match quadratic_roots(b, -b, m * (b + k) * (b + k)) {
            Some((x1, x2)) => {
                if x1 > T::zero() && x2 > T::zero() {
                    cat.diagnostics.push(
                        "both roots of the xi-quadratic are positive (sum 1, positive product)"
                            .into(),
                    );
                }
                for xi in [x2, x1] {
                    if xi > T::zero() {
                        levels.push(((b + k) / xi, xi));
                    }
                }
            }
            None => cat
                .diagnostics
                .push(format!("no real root: B < 4m(B+k)^2 with m={m}")),
        },
        ModelKinetics::ActivatorInhibitor { p, q, r, s, .. } => {
            let e = r * q / (p - T::one()) - s - T::one();
            if e == T::zero() {
                cat.diagnostics.push(if m == T::one() {
                    "degenerate exponent: a continuum of states when m=1".into()
                } else {
                    "degenerate exponent: no state for m<1".into()
                });
            } else {
                let xi = m.powf(-T::one() / e);
                if xi > T::zero() && xi <= T::lit(AI_XI_CAP) {
                    levels.push((xi.powf(q / (p - T::one())), xi));
                } else {
                    cat.diagnostics
                        .push(format!("root xi={xi} outside (0, 1e6]"));
                }
            }
        }
        ModelKinetics::Carcinogenesis { a, d, kappa0 } => {
            if a > d {
                match quadratic_roots(d * m, -kappa0 * (a - d), d) {
                    Some((u1, u2)) => {
                        for u in [u2, u1] {
                            levels.push((u, d / ((a - d) * u)));
                        }
                    }
                    None => cat.diagnostics.push(format!("no real root for m={m}")),
                }
            } else {
                cat.diagnostics.push("no positive states: a <= d".into());
            }
        }
        ModelKinetics::Generic(_) => {
            cat.diagnostics
                .push("no closed-form steady states for generic kinetics".into());
        }
    }
    for (u, xi) in levels {
        let mut st = SteadyState {
            u_on: u,
            u_off: T::zero(),
            xi,
            mask: Some(mask.clone()),
            measure: m,
            classification: Stability::Inconclusive,
        };
        st.classification = classify_shadow_stability(model, &st)?;
        push_checked(&mut cat, model, grid, st)?;
    }
    Ok(cat)
}

fn is_designated_trivial<T: Real>(model: &ModelKinetics<T>, st: &SteadyState<T>) -> bool {
    let zero = st.u_on == T::zero() && (st.mask.is_none() || st.u_off == T::zero());
    match *model {
        ModelKinetics::GrayScott { .. } => zero && st.xi == T::one(),
        ModelKinetics::Carcinogenesis { kappa0, .. } => zero && st.xi == kappa0,
        _ => false,
    }
}

/// Autocatalysis test: a constant piece of positive measure with `f_u > 0`
/// makes the state unstable.
pub fn classify_shadow_stability<T: Real>(
    model: &ModelKinetics<T>,
    st: &SteadyState<T>,
) -> Result<Stability> {
    if is_designated_trivial(model, st) {
        return Ok(Stability::TrivialStable);
    }
    let mut pieces = vec![(st.u_on, st.measure)];
    if st.mask.is_some() {
        pieces.push((st.u_off, T::one() - st.measure));
    }
    for (u, measure) in pieces {
        if measure > T::zero() && model.eval_partials(u, st.xi)?.f_u > T::zero() {
            return Ok(Stability::UnstableAutocatalytic);
        }
    }
    Ok(Stability::Inconclusive)
}

/// `‖L(w0, 0) − λ0 (w0, 0)‖_∞` with `λ0 = f_u(U, ξ̄)` on the masked piece.
pub fn eigenpair_residual<T: Real>(
    model: &ModelKinetics<T>,
    grid: &SpatialGrid<T>,
    st: &SteadyState<T>,
    w0: &Field<T>,
) -> Result<T> {
    grid.check(w0)?;
    let n = grid.n_cells();
    let mask = st.mask.clone().unwrap_or_else(|| CellMask::full(n));
    if mask.len() != n {
        return Err(ShadowError::Shape {
            expected: n,
            got: mask.len(),
        });
    }
    let scale = w0.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if scale == T::zero() {
        return Err(ShadowError::InvalidEigenvector(
            "w0 is identically zero".into(),
        ));
    }
    if let Some(i) = (0..n).find(|&i| !mask.contains(i) && w0[i] != T::zero()) {
        return Err(ShadowError::InvalidEigenvector(format!(
            "w0 nonzero at node {i} outside the constant piece"
        )));
    }
    let mean = weighted_sum(grid.weights(), w0.values());
    if mean.abs() > T::tol(1e-12) * scale.max(T::one()) {
        return Err(ShadowError::InvalidEigenvector(format!(
            "w0 has nonzero mean {mean} on the constant piece"
        )));
    }

    let u = st.field(n);
    let lambda0 = model.eval_partials(st.u_on, st.xi)?.f_u;
    let mut res = T::zero();
    let mut g_u_w = Vec::with_capacity(n);
    for i in 0..n {
        let p = model.eval_partials(u[i], st.xi)?;
        res = res.max((p.f_u * w0[i] - lambda0 * w0[i]).abs());
        g_u_w.push(p.g_u * w0[i]);
    }
    let second = weighted_sum(grid.weights(), &g_u_w);
    Ok(res.max(second.abs()))
}
