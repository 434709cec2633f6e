//! Reaction terms `f(u, ξ)` and the pointwise integrand `g(u, ξ)` of the
//! nonlocal equation, with their first partial derivatives.
//!
//! `g` is written so that `ξ_t = ∫ g(u, ξ) dx` holds on a domain of unit
//! measure; local terms such as `B(1 − ξ)` are folded into the integrand.

mod steady;

use std::fmt;
use std::sync::Arc;

pub use steady::{
    classify_shadow_stability, eigenpair_residual, ode_steady_states, shadow_steady_states,
    Stability, SteadyCatalog, SteadyState,
};

use crate::error::{Result, ShadowError};
use crate::scalar::Real;

/// `∂f/∂u, ∂f/∂ξ, ∂g/∂u, ∂g/∂ξ` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials<T> {
    pub f_u: T,
    pub f_xi: T,
    pub g_u: T,
    pub g_xi: T,
}

impl<T: Real> Partials<T> {
    pub fn trace(&self) -> T {
        self.f_u + self.g_xi
    }

    pub fn det(&self) -> T {
        self.f_u * self.g_xi - self.f_xi * self.g_u
    }
}

pub type ScalarFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// User supplied kinetics.
#[derive(Clone)]
pub struct GenericKinetics<T> {
    pub f: ScalarFn<T>,
    pub g: ScalarFn<T>,
    pub f_u: ScalarFn<T>,
    pub f_xi: ScalarFn<T>,
    pub g_u: ScalarFn<T>,
    pub g_xi: ScalarFn<T>,
    /// Whether runs should enforce `u ≥ 0, ξ ≥ 0`.
    pub nonnegative: bool,
}

impl<T: Real> GenericKinetics<T> {
    pub fn new(
        f: ScalarFn<T>,
        g: ScalarFn<T>,
        f_u: ScalarFn<T>,
        f_xi: ScalarFn<T>,
        g_u: ScalarFn<T>,
        g_xi: ScalarFn<T>,
    ) -> Self {
        Self {
            f,
            g,
            f_u,
            f_xi,
            g_u,
            g_xi,
            nonnegative: false,
        }
    }

    /// Partials approximated by central differences with a relative step.
    pub fn with_numeric_partials(f: ScalarFn<T>, g: ScalarFn<T>) -> Self {
        let d = |h: ScalarFn<T>, wrt_u: bool| -> ScalarFn<T> {
            Arc::new(move |u: T, xi: T| {
                let x = if wrt_u { u } else { xi };
                let step = T::epsilon().cbrt() * x.abs().max(T::one());
                let two = T::lit(2.0);
                if wrt_u {
                    (h(u + step, xi) - h(u - step, xi)) / (two * step)
                } else {
                    (h(u, xi + step) - h(u, xi - step)) / (two * step)
                }
            })
        };
        Self::new(
            f.clone(),
            g.clone(),
            d(f.clone(), true),
            d(f, false),
            d(g.clone(), true),
            d(g, false),
        )
    }

    pub fn nonnegative(mut self, yes: bool) -> Self {
        self.nonnegative = yes;
        self
    }
}

impl<T> fmt::Debug for GenericKinetics<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericKinetics")
            .field("nonnegative", &self.nonnegative)
            .finish_non_exhaustive()
    }
}

/// The model variants.
#[derive(Debug, Clone)]
pub enum ModelKinetics<T> {
    /// `f = −(B+k)u + u²ξ`, `ξ_t = −ξ∫u² + B(1 − ξ)`.
    GrayScott {
        b: T,
        k: T,
    },
    /// `f = −u + u^p ξ^{−q}`, `τξ_t = −ξ + ∫u^r ξ^{−s}`.
    ActivatorInhibitor {
        p: T,
        q: T,
        r: T,
        s: T,
        tau: T,
    },
    /// `f = (a uξ/(1 + uξ) − d)u`, `ξ_t = −ξ − ξ∫u² + κ0`.
    Carcinogenesis {
        a: T,
        d: T,
        kappa0: T,
    },
    Generic(GenericKinetics<T>),
}

fn positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(ShadowError::Constraint(format!(
            "{name}>0 required, got {v}"
        )))
    }
}

impl<T: Real> ModelKinetics<T> {
    pub fn gray_scott(b: T, k: T) -> Result<Self> {
        let m = Self::GrayScott { b, k };
        m.validate()?;
        Ok(m)
    }

    pub fn activator_inhibitor(p: T, q: T, r: T, s: T, tau: T) -> Result<Self> {
        let m = Self::ActivatorInhibitor { p, q, r, s, tau };
        m.validate()?;
        Ok(m)
    }

    pub fn carcinogenesis(a: T, d: T, kappa0: T) -> Result<Self> {
        let m = Self::Carcinogenesis { a, d, kappa0 };
        m.validate()?;
        Ok(m)
    }

    /// Checks the parameter constraints of the variant.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::GrayScott { b, k } => {
                positive("B", b)?;
                if !(k >= T::zero() && k.is_finite()) {
                    return Err(ShadowError::Constraint(format!("k>=0 required, got {k}")));
                }
                Ok(())
            }
            Self::ActivatorInhibitor { p, q, r, s, tau } => {
                if !(p > T::one() && p.is_finite()) {
                    return Err(ShadowError::Constraint(format!("p>1 required, got {p}")));
                }
                positive("q", q)?;
                positive("r", r)?;
                if !(s >= T::zero() && s.is_finite()) {
                    return Err(ShadowError::Constraint(format!("s>=0 required, got {s}")));
                }
                positive("tau", tau)
            }
            Self::Carcinogenesis { a, d, kappa0 } => {
                positive("a", a)?;
                positive("d", d)?;
                positive("kappa0", kappa0)
            }
            Self::Generic(_) => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::GrayScott { .. } => "gray-scott",
            Self::ActivatorInhibitor { .. } => "activator-inhibitor",
            Self::Carcinogenesis { .. } => "carcinogenesis",
            Self::Generic(_) => "generic",
        }
    }

    /// Nonnegative data stay nonnegative for this model.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            Self::Generic(g) => g.nonnegative,
            _ => true,
        }
    }

    /// Whether the model is singular at `ξ = 0`.
    pub fn requires_positive_xi(&self) -> bool {
        matches!(self, Self::ActivatorInhibitor { .. })
    }

    fn check(&self, u: T, xi: T) -> Result<()> {
        if self.requires_positive_xi() && !(xi > T::zero()) {
            return Err(ShadowError::SingularKinetics {
                u: u.as_f64(),
                xi: xi.as_f64(),
                reason: "xi must be positive",
            });
        }
        Ok(())
    }

    pub fn eval_f(&self, u: T, xi: T) -> Result<T> {
        self.check(u, xi)?;
        Ok(match self {
            Self::GrayScott { b, k } => -(*b + *k) * u + u * u * xi,
            Self::ActivatorInhibitor { p, q, .. } => -u + u.powf(*p) * xi.powf(-*q),
            Self::Carcinogenesis { a, d, .. } => {
                let z = u * xi;
                (*a * z / (T::one() + z) - *d) * u
            }
            Self::Generic(gk) => (gk.f)(u, xi),
        })
    }

    pub fn eval_g(&self, u: T, xi: T) -> Result<T> {
        self.check(u, xi)?;
        Ok(match self {
            Self::GrayScott { b, .. } => -xi * u * u + *b * (T::one() - xi),
            Self::ActivatorInhibitor { r, s, tau, .. } => (-xi + u.powf(*r) * xi.powf(-*s)) / *tau,
            Self::Carcinogenesis { kappa0, .. } => -xi - xi * u * u + *kappa0,
            Self::Generic(gk) => (gk.g)(u, xi),
        })
    }

    pub fn eval_partials(&self, u: T, xi: T) -> Result<Partials<T>> {
        self.check(u, xi)?;
        let one = T::one();
        let two = T::lit(2.0);
        Ok(match self {
            Self::GrayScott { b, k } => Partials {
                f_u: -(*b + *k) + two * u * xi,
                f_xi: u * u,
                g_u: -two * xi * u,
                g_xi: -u * u - *b,
            },
            Self::ActivatorInhibitor { p, q, r, s, tau } => {
                let (p, q, r, s, tau) = (*p, *q, *r, *s, *tau);
                Partials {
                    f_u: -one + p * u.powf(p - one) * xi.powf(-q),
                    f_xi: -q * u.powf(p) * xi.powf(-q - one),
                    g_u: r * u.powf(r - one) * xi.powf(-s) / tau,
                    g_xi: (-one - s * u.powf(r) * xi.powf(-s - one)) / tau,
                }
            }
            Self::Carcinogenesis { a, d, .. } => {
                let z = u * xi;
                let den = (one + z) * (one + z);
                Partials {
                    f_u: *a * z * (two + z) / den - *d,
                    f_xi: *a * u * u / den,
                    g_u: -two * xi * u,
                    g_xi: -one - u * u,
                }
            }
            Self::Generic(gk) => Partials {
                f_u: (gk.f_u)(u, xi),
                f_xi: (gk.f_xi)(u, xi),
                g_u: (gk.g_u)(u, xi),
                g_xi: (gk.g_xi)(u, xi),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn carc() -> ModelKinetics<f64> {
        ModelKinetics::carcinogenesis(2.0, 1.0, 65.0 / 8.0).unwrap()
    }

    #[test]
    fn zero_is_fixed_for_gray_scott() {
        let m = ModelKinetics::gray_scott(1.0, 0.1).unwrap();
        for xi in [0.0, 0.3, 5.0] {
            assert_eq!(m.eval_f(0.0, xi).unwrap(), 0.0);
        }
        let m0 = ModelKinetics::gray_scott(1.0, 0.0).unwrap();
        assert_eq!(m0.eval_g(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn carcinogenesis_fixed_point() {
        let m = carc();
        assert_eq!(m.eval_f(8.0, 0.125).unwrap(), 0.0);
        assert_abs_diff_eq!(m.eval_g(8.0, 0.125).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn activator_inhibitor_unit_state() {
        let m = ModelKinetics::activator_inhibitor(2.0, 1.0, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(m.eval_f(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(m.eval_g(1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            m.eval_f(1.0, 0.0),
            Err(ShadowError::SingularKinetics { .. })
        ));
        assert!(m.eval_partials(1.0, -1.0).is_err());
    }

    #[test]
    fn partials_at_nontrivial_states() {
        let (b, k) = (1.0, 0.1);
        let gs = ModelKinetics::gray_scott(b, k).unwrap();
        let xi = 0.3;
        let p = gs.eval_partials((b + k) / xi, xi).unwrap();
        assert_abs_diff_eq!(p.f_u, b + k, epsilon = 1e-14);

        let ai = ModelKinetics::activator_inhibitor(3.0, 2.0, 1.5, 0.5, 1.0).unwrap();
        let xi: f64 = 1.7;
        let u = xi.powf(2.0 / 2.0);
        assert_abs_diff_eq!(ai.eval_partials(u, xi).unwrap().f_u, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn constraint_messages_name_the_bound() {
        let e = ModelKinetics::activator_inhibitor(0.5, 1.0, 1.0, 0.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("p>1 required"), "{e}");
        assert!(ModelKinetics::gray_scott(0.0, 1.0).is_err());
        assert!(ModelKinetics::carcinogenesis(1.0, -1.0, 1.0).is_err());
        assert!(ModelKinetics::activator_inhibitor(2.0, 1.0, 1.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn numeric_partials_for_generic() {
        let f: ScalarFn<f64> = Arc::new(|u, xi| u * u * xi - u);
        let g: ScalarFn<f64> = Arc::new(|u, xi| (u * xi).sin());
        let m = ModelKinetics::Generic(GenericKinetics::with_numeric_partials(f, g));
        let p = m.eval_partials(1.3, 0.7).unwrap();
        assert_abs_diff_eq!(p.f_u, 2.0 * 1.3 * 0.7 - 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(p.f_xi, 1.69, epsilon = 1e-8);
        assert_abs_diff_eq!(p.g_u, 0.7 * (0.91f64).cos(), epsilon = 1e-8);
        assert_abs_diff_eq!(p.g_xi, 1.3 * (0.91f64).cos(), epsilon = 1e-8);
    }
}
