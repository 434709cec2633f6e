//! Closed-form solution formulas driven by a sampled `ξ` history, the
//! singular mass integrals and the blowup/growth certificates.
//!
//! For Gray–Scott and the activator-inhibitor family, `u` at a fixed node
//! solves a Bernoulli equation once `ξ(t)` is known:
//!
//! * GS: `u = e^{−ct} / (1/u0 − J(t))`, `J = ∫₀ᵗ ξ e^{−cs} ds`, `c = B + k`
//! * AI: `u = e^{−t} / (u0^{1−p} − (p−1)J(t))^{1/(p−1)}`, `J = ∫₀ᵗ ξ^{−q} e^{−(p−1)s} ds`

mod certificate;
mod regime;

pub use certificate::{blowup_certificate, BlowupCertificate, Hypothesis};
pub use regime::{ai_kinetic_regime, AiRegimeReport, KineticRegime};

use crate::domain::{argmax_set, Field, SpatialGrid};
use crate::error::{Result, ShadowError};
use crate::integrator::Trajectory;
use crate::kinetics::ModelKinetics;
use crate::profile::Profile;
use crate::scalar::Real;

/// Piecewise-linear `ξ(t)` through sampled points.
#[derive(Debug, Clone, PartialEq)]
pub struct XiHistory<T> {
    times: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> XiHistory<T> {
    pub fn new(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(ShadowError::Shape {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.is_empty() {
            return Err(ShadowError::InvalidInput("empty xi history".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ShadowError::InvalidInput(
                "xi history times must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, values })
    }

    /// `ξ ≡ c` on `[0, t_end]`.
    pub fn constant(c: T, t_end: T) -> Result<Self> {
        Self::new(vec![T::zero(), t_end], vec![c, c])
    }

    pub fn from_trajectory(traj: &Trajectory<T>) -> Result<Self> {
        Self::new(
            traj.samples.iter().map(|s| s.t).collect(),
            traj.samples.iter().map(|s| s.xi).collect(),
        )
    }

    pub fn t_start(&self) -> T {
        self.times[0]
    }

    pub fn t_end(&self) -> T {
        *self.times.last().expect("nonempty")
    }

    pub fn value_at(&self, t: T) -> T {
        let k = self.segment(t);
        if k + 1 >= self.times.len() {
            return self.values[k];
        }
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let s = (t - t0) / (t1 - t0);
        self.values[k] + s * (self.values[k + 1] - self.values[k])
    }

    /// Index `k` with `times[k] ≤ t < times[k+1]` (clamped to the ends).
    fn segment(&self, t: T) -> usize {
        match self
            .times
            .binary_search_by(|p| p.partial_cmp(&t).expect("finite times"))
        {
            Ok(i) => i.min(self.times.len().saturating_sub(2)),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.times.len().saturating_sub(2)),
        }
    }
}

const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];
/// Sub-intervals per history segment for the inner integral.
const SUBDIVISIONS: usize = 10;

fn gauss<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut acc = T::zero();
    for (x, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS.iter()) {
        acc += T::lit(*w) * f(mid + half * T::lit(*x));
    }
    acc * half
}

fn composite<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let m = T::from_usize_lossy(SUBDIVISIONS);
    let h = (b - a) / m;
    (0..SUBDIVISIONS)
        .map(|j| {
            let lo = a + h * T::from_usize_lossy(j);
            gauss(f, lo, lo + h)
        })
        .sum()
}

/// Which Bernoulli reduction applies.
#[derive(Debug, Clone, Copy)]
enum Family<T> {
    GrayScott { c: T },
    ActivatorInhibitor { p: T, q: T },
}

impl<T: Real> Family<T> {
    fn of(model: &ModelKinetics<T>) -> Result<Self> {
        match *model {
            ModelKinetics::GrayScott { b, k } => Ok(Self::GrayScott { c: b + k }),
            ModelKinetics::ActivatorInhibitor { p, q, .. } => Ok(Self::ActivatorInhibitor { p, q }),
            _ => Err(ShadowError::NotApplicable(format!(
                "no closed-form solution for {}",
                model.name()
            ))),
        }
    }

    fn kernel(&self, s: T, xi: T) -> T {
        match *self {
            Self::GrayScott { c } => xi * (-c * s).exp(),
            Self::ActivatorInhibitor { p, q } => xi.powf(-q) * (-(p - T::one()) * s).exp(),
        }
    }

    /// Value `J` at which the denominator for initial value `u0` vanishes.
    fn threshold(&self, u0: T) -> T {
        match *self {
            Self::GrayScott { .. } => T::one() / u0,
            Self::ActivatorInhibitor { p, .. } => u0.powf(T::one() - p) / (p - T::one()),
        }
    }

    fn solution(&self, u0: T, t: T, j: T) -> Option<T> {
        match *self {
            Self::GrayScott { c } => {
                let den = T::one() / u0 - j;
                (den > T::zero()).then(|| (-c * t).exp() / den)
            }
            Self::ActivatorInhibitor { p, .. } => {
                let pm1 = p - T::one();
                let den = u0.powf(-pm1) - pm1 * j;
                (den > T::zero()).then(|| (-t).exp() / den.powf(T::one() / pm1))
            }
        }
    }
}

/// Closed-form evaluator with the inner integral tabulated at the history
/// knots, for repeated evaluation along a whole run.
#[derive(Debug, Clone)]
pub struct ExactSolution<T> {
    family: Family<T>,
    history: XiHistory<T>,
    cumulative: Vec<T>,
}

impl<T: Real> ExactSolution<T> {
    pub fn new(model: &ModelKinetics<T>, history: XiHistory<T>) -> Result<Self> {
        let family = Family::of(model)?;
        let mut cumulative = Vec::with_capacity(history.times.len());
        cumulative.push(T::zero());
        for k in 0..history.times.len() - 1 {
            let part = Self::segment_integral(&family, &history, k, history.times[k + 1]);
            let prev = *cumulative.last().expect("nonempty");
            cumulative.push(prev + part);
        }
        Ok(Self {
            family,
            history,
            cumulative,
        })
    }

    fn segment_integral(family: &Family<T>, h: &XiHistory<T>, k: usize, upto: T) -> T {
        let t0 = h.times[k];
        if upto <= t0 {
            return T::zero();
        }
        let f = |s: T| family.kernel(s, h.value_at(s));
        composite(&f, t0, upto)
    }

    pub fn history(&self) -> &XiHistory<T> {
        &self.history
    }

    /// `J(t)`, the integral from the first history time to `t`.
    pub fn kernel_integral(&self, t: T) -> Result<T> {
        let h = &self.history;
        let tol = T::tol(1e-12) * h.t_end().abs().max(T::one());
        if t < h.t_start() - tol || t > h.t_end() + tol {
            return Err(ShadowError::InvalidInput(format!(
                "t={t} outside the history range [{}, {}]",
                h.t_start(),
                h.t_end()
            )));
        }
        if h.times.len() == 1 {
            return Ok(T::zero());
        }
        let t = t.max(h.t_start()).min(h.t_end());
        let k = h.segment(t);
        Ok(self.cumulative[k] + Self::segment_integral(&self.family, h, k, t))
    }

    /// `u(x, t)` for a node with initial value `u0`.
    pub fn u_at(&self, u0: T, t: T) -> Result<T> {
        if u0 < T::zero() {
            return Err(ShadowError::InvalidInput(format!(
                "u0 must be nonnegative, got {u0}"
            )));
        }
        if u0 == T::zero() {
            self.kernel_integral(t)?;
            return Ok(T::zero());
        }
        let j = self.kernel_integral(t)?;
        match self.family.solution(u0, t, j) {
            Some(v) => Ok(v),
            None => Err(ShadowError::PastBlowup {
                crossing: self.crossing_time(u0).map(|c| c.as_f64()),
            }),
        }
    }

    /// First time at which the denominator for `u0` vanishes, if within the history.
    pub fn crossing_time(&self, u0: T) -> Option<T> {
        if !(u0 > T::zero()) {
            return None;
        }
        let target = self.family.threshold(u0);
        let h = &self.history;
        let last = *self.cumulative.last().expect("nonempty");
        if last < target {
            return None;
        }
        let (mut lo, mut hi) = (h.t_start(), h.t_end());
        let tol = T::tol(1e-12);
        while hi - lo > tol {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.kernel_integral(mid).ok()? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some((lo + hi) * T::lit(0.5))
    }
}

/// `u(x_i, t)` from the closed-form solution with the given `ξ` history.
pub fn exact_u<T: Real>(
    model: &ModelKinetics<T>,
    x_index: usize,
    t: T,
    u0: &Field<T>,
    xi_hist: &XiHistory<T>,
) -> Result<T> {
    let u0i = *u0.values().get(x_index).ok_or_else(|| {
        ShadowError::InvalidInput(format!(
            "node {x_index} outside field of {} values",
            u0.len()
        ))
    })?;
    ExactSolution::new(model, xi_hist.clone())?.u_at(u0i, t)
}

/// Time at which the solution started from `u0_max` leaves every bound, if
/// that happens within the history.
pub fn tmax_from_history<T: Real>(
    model: &ModelKinetics<T>,
    u0_max: T,
    xi_hist: &XiHistory<T>,
) -> Result<Option<T>> {
    if !(u0_max > T::zero()) {
        return Err(ShadowError::InvalidInput(format!(
            "u0_max must be positive, got {u0_max}"
        )));
    }
    Ok(ExactSolution::new(model, xi_hist.clone())?.crossing_time(u0_max))
}

/// `Σ_{i≠x*} w_i h(u0_i)` for the model's singular integrand: `A0` (GS) or `B0` (AI).
pub fn singular_mass_integral<T: Real>(
    model: &ModelKinetics<T>,
    grid: &SpatialGrid<T>,
    u0: &Field<T>,
    x_star: usize,
) -> Result<T> {
    grid.check(u0)?;
    let set = argmax_set(u0.values(), T::zero());
    if set != [x_star] {
        return Err(ShadowError::NotApplicable(format!(
            "u0 must have a strict maximum at node {x_star}"
        )));
    }
    let top = u0[x_star];
    let term: Box<dyn Fn(T) -> T> = match *model {
        ModelKinetics::GrayScott { .. } => Box::new(move |v: T| {
            let r = top * v / (top - v);
            r * r
        }),
        ModelKinetics::ActivatorInhibitor { p, r, .. } => Box::new(move |v: T| {
            let pm1 = p - T::one();
            let den = (top.powf(pm1) - v.powf(pm1)).powf(T::one() / pm1);
            (top * v / den).powf(r)
        }),
        _ => {
            return Err(ShadowError::NotApplicable(format!(
                "no singular mass integral for {}",
                model.name()
            )))
        }
    };
    Ok(grid
        .weights()
        .iter()
        .zip(u0.iter())
        .enumerate()
        .filter(|(i, _)| *i != x_star)
        .map(|(_, (&w, &v))| w * term(v))
        .sum())
}

/// Two-level evaluation of the singular mass integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularMass<T> {
    pub coarse_cells: usize,
    pub coarse: T,
    pub fine: T,
    /// `fine / coarse`.
    pub ratio: T,
    pub convergent: bool,
}

impl<T: Real> SingularMass<T> {
    pub fn value(&self) -> T {
        self.fine
    }
}

/// Smallest resolution used for the refinement check.
pub const REFINEMENT_FLOOR: usize = 2048;
/// Largest `|fine/coarse − 1|` accepted as convergent.
pub const REFINEMENT_RTOL: f64 = 0.05;

/// Evaluates the singular mass integral on `max(n, 2048)` and twice as many
/// cells and decides convergence from the ratio.
pub fn singular_mass_functional<T: Real, P: Profile<T> + ?Sized>(
    model: &ModelKinetics<T>,
    profile: &P,
    n_cells: usize,
) -> Result<SingularMass<T>> {
    let coarse_cells = n_cells.max(REFINEMENT_FLOOR);
    let level = |n: usize| -> Result<T> {
        let grid = SpatialGrid::uniform(n)?;
        let (u0, peak) = profile.sample(&grid);
        singular_mass_integral(model, &grid, &u0, peak)
    };
    let coarse = level(coarse_cells)?;
    let fine = level(2 * coarse_cells)?;
    let ratio = if coarse == T::zero() {
        if fine == T::zero() {
            T::one()
        } else {
            T::infinity()
        }
    } else {
        fine / coarse
    };
    let convergent = ratio.is_finite() && (ratio - T::one()).abs() <= T::lit(REFINEMENT_RTOL);
    Ok(SingularMass {
        coarse_cells,
        coarse,
        fine,
        ratio,
        convergent,
    })
}
