//! Sufficient conditions for finite-time blowup (GS, AI) and for unbounded
//! spike growth (carcinogenesis), evaluated on concrete initial data.

use crate::domain::{argmax_set, weighted_sum, SpatialGrid};
use crate::error::{Result, ShadowError};
use crate::kinetics::ModelKinetics;
use crate::profile::Profile;
use crate::scalar::Real;

use super::{singular_mass_functional, SingularMass};

/// One inequality `lhs ⋚ rhs` of a theorem's hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis<T> {
    pub name: &'static str,
    pub lhs: T,
    pub rhs: T,
    pub satisfied: bool,
}

impl<T> Hypothesis<T> {
    fn new(name: &'static str, lhs: T, rhs: T, satisfied: bool) -> Self {
        Self {
            name,
            lhs,
            rhs,
            satisfied,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupCertificate<T> {
    pub model: &'static str,
    pub hypotheses: Vec<Hypothesis<T>>,
    /// `A0` (GS) or `B0` (AI) with its refinement check.
    pub singular_mass: Option<SingularMass<T>>,
    /// Upper bound on the blowup time, derived from the lower bound on the
    /// inner integral. Only set when every hypothesis holds.
    pub tmax_upper: Option<T>,
    /// Admissible `λ` for the carcinogenesis growth theorem; the upper end is
    /// exclusive when it comes from the initial-data condition.
    pub lambda_window: Option<(T, T)>,
    pub x_star: usize,
    /// Size of the maximum set of `u0` on the evaluation grid.
    pub tie_count: usize,
    pub notes: Vec<String>,
}

impl<T: Real> BlowupCertificate<T> {
    pub fn is_satisfied(&self) -> bool {
        self.hypotheses.iter().all(|h| h.satisfied)
    }

    /// `false` when the singular mass integral failed the refinement check.
    pub fn is_reliable(&self) -> bool {
        self.singular_mass.is_none_or(|s| s.convergent)
    }

    pub fn verdict(&self) -> &'static str {
        if !self.is_reliable() {
            "unreliable"
        } else if self.is_satisfied() {
            "certified"
        } else {
            "not-certified"
        }
    }

    pub fn hypothesis(&self, name: &str) -> Option<&Hypothesis<T>> {
        self.hypotheses.iter().find(|h| h.name == name)
    }
}

/// Evaluates the hypotheses of the model's blowup or growth theorem for the
/// initial datum `profile` sampled on `grid`, with `ξ(0) = xi0`.
pub fn blowup_certificate<T: Real, P: Profile<T> + ?Sized>(
    model: &ModelKinetics<T>,
    grid: &SpatialGrid<T>,
    profile: &P,
    xi0: T,
) -> Result<BlowupCertificate<T>> {
    model.validate()?;
    let (u0, peak) = profile.sample(grid);
    if u0.iter().any(|&v| v < T::zero() || !v.is_finite()) {
        return Err(ShadowError::InvalidInput(
            "initial datum must be finite and nonnegative".into(),
        ));
    }
    let top = u0.max();
    let tie_tol = T::tol(1e-12) * top.abs().max(T::one());
    let ties = argmax_set(u0.values(), tie_tol);
    let mut cert = BlowupCertificate {
        model: model.name(),
        hypotheses: Vec::new(),
        singular_mass: None,
        tmax_upper: None,
        lambda_window: None,
        x_star: peak,
        tie_count: ties.len(),
        notes: Vec::new(),
    };
    let one = T::one();
    let unique = T::from_usize_lossy(ties.len());

    match *model {
        ModelKinetics::GrayScott { b, k } => {
            cert.hypotheses.push(Hypothesis::new(
                "strict-maximum",
                unique,
                one,
                ties.len() == 1,
            ));
            let mass = singular_mass_functional(model, profile, grid.n_cells())?;
            cert.singular_mass = Some(mass);
            cert.hypotheses.push(Hypothesis::new(
                "a0-convergent",
                (mass.ratio - one).abs(),
                T::lit(super::REFINEMENT_RTOL),
                mass.convergent,
            ));
            cert.notes
                .push("B/(A0+b) read as B/(A0+B) in the xi floor".into());
            let floor = xi0.min(b / (mass.value() + b));
            let lhs = one / top;
            let rhs = floor / (b + k);
            cert.hypotheses
                .push(Hypothesis::new("blowup-condition", lhs, rhs, lhs < rhs));
            if cert.is_satisfied() {
                cert.tmax_upper = Some(-(one - (b + k) / (top * floor)).ln() / (b + k));
            }
        }
        ModelKinetics::ActivatorInhibitor { p, q, s, .. } => {
            cert.hypotheses.push(Hypothesis::new(
                "strict-maximum",
                unique,
                one,
                ties.len() == 1,
            ));
            let mass = singular_mass_functional(model, profile, grid.n_cells())?;
            cert.singular_mass = Some(mass);
            cert.hypotheses.push(Hypothesis::new(
                "b0-convergent",
                (mass.ratio - one).abs(),
                T::lit(super::REFINEMENT_RTOL),
                mass.convergent,
            ));
            let ceiling = xi0.max(mass.value().powf(one / (one + s)));
            let lhs = top.powf(one - p);
            let rhs = ceiling.powf(-q);
            cert.hypotheses
                .push(Hypothesis::new("blowup-condition", lhs, rhs, lhs < rhs));
            if cert.is_satisfied() {
                cert.tmax_upper = Some(-(one - lhs * ceiling.powf(q)).ln() / (p - one));
            }
        }
        ModelKinetics::Carcinogenesis { a, d, kappa0 } => {
            let two = T::lit(2.0);
            let growth = two * (a - d);
            cert.hypotheses
                .push(Hypothesis::new("growth-rate", growth, one, growth >= one));
            let four_a = T::lit(4.0) * a;
            cert.hypotheses.push(Hypothesis::new(
                "kappa0-floor",
                kappa0,
                four_a,
                kappa0 >= four_a,
            ));

            let sq: Vec<T> = u0.iter().map(|&v| v * v).collect();
            let l2 = weighted_sum(grid.weights(), &sq);
            let lo = T::lit(0.5);
            let hi = (one - two * a / kappa0).min(one - xi0 / kappa0);
            let data_bound = xi0 * l2 / kappa0;
            let upper = hi.min(data_bound);
            let nonempty = lo <= hi && lo < data_bound;
            cert.hypotheses
                .push(Hypothesis::new("lambda-window", lo, upper, nonempty));
            if nonempty {
                cert.lambda_window = Some((lo, upper));
                if data_bound <= hi {
                    cert.notes
                        .push("lambda window is open at its upper end".into());
                }
            }
            cert.hypotheses.push(Hypothesis::new(
                "singleton-maximum",
                unique,
                one,
                ties.len() == 1,
            ));
        }
        ModelKinetics::Generic(_) => {
            return Err(ShadowError::NotApplicable(
                "no certificate for generic kinetics".into(),
            ))
        }
    }
    Ok(cert)
}
