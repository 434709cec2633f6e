//! Qualitative behaviour of the activator-inhibitor kinetic system.

use crate::error::Result;
use crate::kinetics::{ModelKinetics, Stability};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KineticRegime {
    /// `p − 1 ≤ r`: every solution is global.
    Global,
    /// `p − 1 > r` and `q > s + 1`: some solutions blow up.
    BlowupPossible,
    Unclassified,
}

impl KineticRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Global => "global",
            Self::BlowupPossible => "blowup-possible",
            Self::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiRegimeReport<T> {
    pub regime: KineticRegime,
    /// `(p − 1)/r < q/(s + 1)`; informational.
    pub exponent_condition: bool,
    /// Stability of `(1, 1)` for the kinetic ODE.
    pub unit_state: Stability,
    /// `(s + 1)/(p − 1)`.
    pub tau_threshold: T,
}

pub fn ai_kinetic_regime<T: Real>(p: T, q: T, r: T, s: T, tau: T) -> Result<AiRegimeReport<T>> {
    let model = ModelKinetics::activator_inhibitor(p, q, r, s, tau)?;
    let one = T::one();
    let regime = if p - one <= r {
        KineticRegime::Global
    } else if q > s + one {
        KineticRegime::BlowupPossible
    } else {
        KineticRegime::Unclassified
    };
    let exponent_condition = (p - one) / r < q / (s + one);
    let tau_threshold = (s + one) / (p - one);

    // Under the exponent condition the Jacobian determinant at (1,1) is
    // positive and the trace changes sign exactly at tau_threshold.
    let unit_state = if exponent_condition {
        if tau < tau_threshold {
            Stability::OdeStable
        } else if tau > tau_threshold {
            Stability::OdeUnstable
        } else {
            Stability::Inconclusive
        }
    } else {
        let jac = model.eval_partials(one, one)?;
        let (tr, det) = (jac.trace(), jac.det());
        if tr < T::zero() && det > T::zero() {
            Stability::OdeStable
        } else if tr > T::zero() || det < T::zero() {
            Stability::OdeUnstable
        } else {
            Stability::Inconclusive
        }
    };
    Ok(AiRegimeReport {
        regime,
        exponent_condition,
        unit_state,
        tau_threshold,
    })
}
