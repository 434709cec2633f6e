//! Adaptive RK4 integration of the shadow system and of the kinetic ODEs.
//!
//! Steps are controlled by step doubling: a full step and two half steps are
//! compared, the half-step solution is kept. Blowup is declared only when
//! `max u` is above the threshold and the step size cannot be reduced further.

mod monitor;
mod report;

pub use monitor::{MonitorTag, MONITOR_RTOL};
pub use report::{MonitorRecord, RunReport, RunStatus, Trajectory};

use crate::domain::{argmax_set, weighted_sum, Field, ShadowState, SpatialGrid};
use crate::error::{Result, ShadowError};
use crate::kinetics::ModelKinetics;
use crate::scalar::Real;

use monitor::MonitorSet;
use report::log_slope;

/// Values this far below zero are treated as round-off and reset to zero.
const CLAMP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SampleSchedule<T> {
    /// `t = k·dt` for `k ≥ 1`, plus `t_end` itself.
    Every(T),
    /// Explicit increasing times in `(0, t_end]`; `t_end` is appended if missing.
    At(Vec<T>),
}

impl<T: Real> SampleSchedule<T> {
    /// Sample times after `t = 0`, ending at `t_end`.
    pub fn times(&self, t_end: T) -> Result<Vec<T>> {
        let mut out = Vec::new();
        match self {
            Self::Every(dt) => {
                if !(*dt > T::zero()) {
                    return Err(ShadowError::InvalidInput(format!(
                        "sample interval must be positive, got {dt}"
                    )));
                }
                let eps = t_end * T::tol(1e-12);
                let mut k = 1usize;
                loop {
                    let t = *dt * T::from_usize_lossy(k);
                    if t >= t_end - eps {
                        break;
                    }
                    out.push(t);
                    k += 1;
                }
            }
            Self::At(ts) => {
                let mut prev = T::zero();
                for &t in ts {
                    if !(t > prev) || t > t_end {
                        return Err(ShadowError::InvalidInput(format!(
                            "sample times must increase within (0, t_end], got {t}"
                        )));
                    }
                    if t < t_end {
                        out.push(t);
                    }
                    prev = t;
                }
            }
        }
        out.push(t_end);
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig<T> {
    pub dt_init: T,
    pub dt_min: T,
    pub rel_tol: T,
    pub abs_tol: T,
    pub blowup_threshold: T,
    pub t_end: T,
    pub schedule: SampleSchedule<T>,
    pub monitors: Vec<MonitorTag<T>>,
    /// Near blowup, `dt ≤ growth_cap / (u'/u)` at the maximum.
    pub growth_cap: T,
    /// Give the unique maximum node of `u0` zero quadrature weight.
    pub isolate_peak: bool,
    pub max_steps: usize,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(t_end: T, sample_every: T) -> Self {
        Self {
            dt_init: T::lit(1e-3),
            dt_min: T::lit(1e-12),
            rel_tol: T::lit(1e-8),
            abs_tol: T::lit(1e-14),
            blowup_threshold: T::lit(1e8),
            t_end,
            schedule: SampleSchedule::Every(sample_every),
            monitors: Vec::new(),
            growth_cap: T::lit(0.1),
            isolate_peak: false,
            max_steps: 20_000_000,
        }
    }

    pub fn with_monitors(mut self, monitors: Vec<MonitorTag<T>>) -> Self {
        self.monitors = monitors;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ShadowError::InvalidInput(msg));
        if !(self.dt_min > T::zero() && self.dt_min <= self.dt_init) {
            return bad(format!(
                "need 0 < dt_min <= dt_init, got {} and {}",
                self.dt_min, self.dt_init
            ));
        }
        if !(self.rel_tol > T::zero()) || !(self.abs_tol >= T::zero()) {
            return bad("tolerances must be positive".into());
        }
        if !(self.blowup_threshold > T::one()) {
            return bad(format!(
                "blowup_threshold must exceed 1, got {}",
                self.blowup_threshold
            ));
        }
        if !(self.t_end > T::zero() && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.growth_cap > T::zero()) {
            return bad("growth_cap must be positive".into());
        }
        Ok(())
    }
}

/// Right-hand side of the semi-discrete shadow system.
struct Rhs<'a, T> {
    model: &'a ModelKinetics<T>,
    weights: &'a [T],
}

impl<T: Real> Rhs<'_, T> {
    fn eval(&self, u: &[T], xi: T, du: &mut [T]) -> Result<T> {
        let mut dxi = T::zero();
        for ((d, &ui), &w) in du.iter_mut().zip(u).zip(self.weights) {
            *d = self.model.eval_f(ui, xi)?;
            dxi += w * self.model.eval_g(ui, xi)?;
        }
        Ok(dxi)
    }

    /// One classical RK4 step from `(u, xi)` reusing the slope `k1` there.
    fn rk4(&self, u: &[T], xi: T, k1: (&[T], T), h: T) -> Result<(Vec<T>, T)> {
        let n = u.len();
        let half = h * T::lit(0.5);
        let mut tmp = vec![T::zero(); n];
        let mut k2 = vec![T::zero(); n];
        let mut k3 = vec![T::zero(); n];
        let mut k4 = vec![T::zero(); n];

        for i in 0..n {
            tmp[i] = u[i] + half * k1.0[i];
        }
        let l2 = self.eval(&tmp, xi + half * k1.1, &mut k2)?;
        for i in 0..n {
            tmp[i] = u[i] + half * k2[i];
        }
        let l3 = self.eval(&tmp, xi + half * l2, &mut k3)?;
        for i in 0..n {
            tmp[i] = u[i] + h * k3[i];
        }
        let l4 = self.eval(&tmp, xi + h * l3, &mut k4)?;

        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        for i in 0..n {
            tmp[i] = u[i] + sixth * (k1.0[i] + two * (k2[i] + k3[i]) + k4[i]);
        }
        let xi_new = xi + sixth * (k1.1 + two * (l2 + l3) + l4);
        Ok((tmp, xi_new))
    }
}

fn all_finite<T: Real>(u: &[T], xi: T) -> bool {
    xi.is_finite() && u.iter().all(|v| v.is_finite())
}

/// One classical RK4 step of the shadow system on `grid`.
pub fn step_shadow<T: Real>(
    model: &ModelKinetics<T>,
    grid: &SpatialGrid<T>,
    state: &ShadowState<T>,
    dt: T,
) -> Result<ShadowState<T>> {
    grid.check(&state.u)?;
    if !(dt > T::zero()) {
        return Err(ShadowError::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let rhs = Rhs {
        model,
        weights: grid.weights(),
    };
    let u = state.u.values();
    let mut k1 = vec![T::zero(); u.len()];
    let l1 = rhs.eval(u, state.xi, &mut k1)?;
    let (u1, xi1) = rhs.rk4(u, state.xi, (&k1, l1), dt)?;
    if !all_finite(&u1, xi1) {
        return Err(ShadowError::StepOverflow {
            t: state.t.as_f64(),
        });
    }
    Ok(ShadowState::new(Field(u1), xi1, state.t + dt))
}

fn check_initial<T: Real>(model: &ModelKinetics<T>, u0: &[T], xi0: T) -> Result<()> {
    model.validate()?;
    if !all_finite(u0, xi0) {
        return Err(ShadowError::InvalidInput(
            "initial data must be finite".into(),
        ));
    }
    if model.is_nonnegative() {
        if let Some(i) = u0.iter().position(|&v| v < T::zero()) {
            return Err(ShadowError::InvalidInput(format!(
                "u0 must be nonnegative, u0[{i}] = {}",
                u0[i]
            )));
        }
        if xi0 < T::zero() {
            return Err(ShadowError::InvalidInput(format!(
                "xi0 must be nonnegative, got {xi0}"
            )));
        }
    }
    if model.requires_positive_xi() && !(xi0 > T::zero()) {
        return Err(ShadowError::InvalidInput(format!(
            "xi0 must be positive for {}, got {xi0}",
            model.name()
        )));
    }
    Ok(())
}

/// Integrates the shadow system from `(u0, xi0)` to `cfg.t_end`.
pub fn run_shadow<T: Real>(
    model: &ModelKinetics<T>,
    grid: &SpatialGrid<T>,
    u0: &Field<T>,
    xi0: T,
    cfg: &IntegratorConfig<T>,
) -> Result<(Trajectory<T>, RunReport<T>)> {
    grid.check(u0)?;
    let weights = if cfg.isolate_peak {
        let set = argmax_set(u0.values(), T::zero());
        if set.len() != 1 {
            return Err(ShadowError::InvalidInput(
                "isolate_peak needs a strict maximum of u0".into(),
            ));
        }
        grid.weights_without(&set)?
    } else {
        grid.weights().to_vec()
    };
    integrate(
        model,
        grid.nodes().to_vec(),
        weights,
        u0.values().to_vec(),
        xi0,
        cfg,
    )
}

/// Integrates the space-homogeneous system `u' = f(u, ξ)`, `ξ' = g(u, ξ)`.
pub fn run_kinetics<T: Real>(
    model: &ModelKinetics<T>,
    u0: T,
    xi0: T,
    cfg: &IntegratorConfig<T>,
) -> Result<(Trajectory<T>, RunReport<T>)> {
    let point = SpatialGrid::point();
    integrate(
        model,
        point.nodes().to_vec(),
        point.weights().to_vec(),
        vec![u0],
        xi0,
        cfg,
    )
}

fn integrate<T: Real>(
    model: &ModelKinetics<T>,
    nodes: Vec<T>,
    weights: Vec<T>,
    u0: Vec<T>,
    xi0: T,
    cfg: &IntegratorConfig<T>,
) -> Result<(Trajectory<T>, RunReport<T>)> {
    cfg.validate()?;
    check_initial(model, &u0, xi0)?;
    let sample_times = cfg.schedule.times(cfg.t_end)?;
    let mut monitors = MonitorSet::new(&cfg.monitors, model, &weights, &u0, xi0)?;

    let rhs = Rhs {
        model,
        weights: &weights,
    };
    let nonneg = model.is_nonnegative();
    let clamp_tol = T::lit(CLAMP_TOL);
    let abs_tol = T::tol(cfg.abs_tol.as_f64());
    let cap_level = cfg.blowup_threshold.sqrt();
    let n = u0.len();

    let mut report = RunReport::new();
    let mut samples = Vec::with_capacity(sample_times.len() + 1);
    let mut record =
        |st: ShadowState<T>, report: &mut RunReport<T>, monitors: &mut MonitorSet<T>| {
            report.max_u_history.push((st.t, st.u.max()));
            monitors.evaluate(&st, &mut report.monitor_log);
            samples.push(st);
        };

    let mut u = u0;
    let mut xi = xi0;
    let mut t = T::zero();
    let mut dt = cfg.dt_init;
    record(
        ShadowState::new(Field(u.clone()), xi, t),
        &mut report,
        &mut monitors,
    );

    let mut k1 = vec![T::zero(); n];
    let mut next = 0usize;
    let mut terminal: Option<RunStatus<T>> = None;

    'outer: while next < sample_times.len() {
        let target = sample_times[next];
        if report.steps_accepted + report.steps_rejected >= cfg.max_steps {
            report
                .diagnostics
                .push(format!("step budget of {} exhausted", cfg.max_steps));
            terminal = Some(RunStatus::StepFailure { t });
            break;
        }

        let max_u = u.iter().copied().fold(T::neg_infinity(), T::max);
        let mut h = dt;
        let mut capped = false;
        if max_u > cap_level {
            let node = argmax_first(&u);
            if let Ok(fv) = model.eval_f(u[node], xi) {
                let rate = fv / u[node];
                if rate > T::zero() {
                    let cap = cfg.growth_cap / rate;
                    if cap < h {
                        h = cap;
                        capped = true;
                    }
                }
            }
            if capped && h < cfg.dt_min && max_u > cfg.blowup_threshold {
                terminal = Some(RunStatus::Blowup { t_star: t, node });
                break;
            }
            h = h.max(cfg.dt_min);
        }
        let remaining = target - t;
        let landing = h >= remaining;
        if landing {
            h = remaining;
        }

        let attempt = (|| -> Result<(Vec<T>, T, T)> {
            let l1 = rhs.eval(&u, xi, &mut k1)?;
            let (full_u, full_xi) = rhs.rk4(&u, xi, (&k1, l1), h)?;
            let half = h * T::lit(0.5);
            let (mid_u, mid_xi) = rhs.rk4(&u, xi, (&k1, l1), half)?;
            let mut k1m = vec![T::zero(); n];
            let lm = rhs.eval(&mid_u, mid_xi, &mut k1m)?;
            let (new_u, new_xi) = rhs.rk4(&mid_u, mid_xi, (&k1m, lm), half)?;
            if !all_finite(&new_u, new_xi) || !all_finite(&full_u, full_xi) {
                return Err(ShadowError::StepOverflow { t: t.as_f64() });
            }
            let fifteen = T::lit(15.0);
            let mut err =
                ((new_xi - full_xi).abs() / fifteen) / (cfg.rel_tol * new_xi.abs() + abs_tol);
            for (a, b) in new_u.iter().zip(&full_u) {
                let e = ((*a - *b).abs() / fifteen) / (cfg.rel_tol * a.abs() + abs_tol);
                err = err.max(e);
            }
            Ok((new_u, new_xi, err))
        })();

        let accepted = match attempt {
            Ok((new_u, new_xi, err)) if err <= T::one() => Some((new_u, new_xi, err)),
            Ok((_, _, err)) => {
                let fac = (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
                if h <= cfg.dt_min {
                    terminal = Some(stall_status(&u, t, cfg));
                    break 'outer;
                }
                dt = (h * fac).max(cfg.dt_min);
                None
            }
            Err(_) => {
                if h <= cfg.dt_min {
                    terminal = Some(stall_status(&u, t, cfg));
                    break 'outer;
                }
                dt = (h * T::lit(0.5)).max(cfg.dt_min);
                None
            }
        };

        let Some((mut new_u, mut new_xi, err)) = accepted else {
            report.steps_rejected += 1;
            continue;
        };
        report.steps_accepted += 1;
        if nonneg {
            for v in new_u.iter_mut().chain(std::iter::once(&mut new_xi)) {
                if *v < T::zero() {
                    if *v >= -clamp_tol {
                        *v = T::zero();
                        report.clamped += 1;
                    } else {
                        report.negativity_violations += 1;
                    }
                }
            }
        }
        u = new_u;
        xi = new_xi;
        let fac = (T::lit(0.9) * err.max(T::lit(1e-10)).powf(T::lit(-0.2)))
            .max(T::lit(0.2))
            .min(T::lit(4.0));
        let proposed = h * fac;
        dt = if landing || capped {
            dt.max(proposed)
        } else {
            proposed
        };
        dt = dt.max(cfg.dt_min);

        if landing {
            t = target;
            next += 1;
            record(
                ShadowState::new(Field(u.clone()), xi, t),
                &mut report,
                &mut monitors,
            );
        } else {
            t += h;
        }
    }

    report.status = terminal.unwrap_or(RunStatus::Completed);
    if !matches!(report.status, RunStatus::Completed) {
        report
            .max_u_history
            .push((t, u.iter().copied().fold(T::neg_infinity(), T::max)));
    }
    if report.negativity_violations > 0 {
        report.diagnostics.push(format!(
            "{} entries fell below -{CLAMP_TOL:e}",
            report.negativity_violations
        ));
    }
    report.fitted_growth_rate = log_slope(&report.max_u_history);
    let min_hist: Vec<(T, T)> = samples.iter().map(|s| (s.t, s.u.min())).collect();
    report.fitted_decay_rate = log_slope(&min_hist);

    let traj = Trajectory {
        samples,
        model: model.clone(),
        nodes,
        weights,
    };
    Ok((traj, report))
}

fn argmax_first<T: Real>(u: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in u.iter().enumerate() {
        if v > u[best] {
            best = i;
        }
    }
    best
}

fn stall_status<T: Real>(u: &[T], t: T, cfg: &IntegratorConfig<T>) -> RunStatus<T> {
    let node = argmax_first(u);
    if u[node] > cfg.blowup_threshold || !u[node].is_finite() {
        RunStatus::Blowup { t_star: t, node }
    } else {
        RunStatus::StepFailure { t }
    }
}

/// `Σ w_i u_i` with the weights the trajectory was integrated with.
pub fn trajectory_mass<T: Real>(traj: &Trajectory<T>, sample: usize) -> T {
    weighted_sum(&traj.weights, traj.samples[sample].u.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn carc() -> ModelKinetics<f64> {
        ModelKinetics::carcinogenesis(2.0, 1.0, 65.0 / 8.0).unwrap()
    }

    #[test]
    fn schedule_includes_end() {
        let s = SampleSchedule::Every(0.25).times(1.0).unwrap();
        assert_eq!(s, vec![0.25, 0.5, 0.75, 1.0]);
        let s = SampleSchedule::Every(0.3).times(1.0).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(*s.last().unwrap(), 1.0);
        assert!(SampleSchedule::At(vec![0.5, 0.2]).times(1.0).is_err());
    }

    #[test]
    fn fixed_point_step() {
        let g = SpatialGrid::uniform(16).unwrap();
        let st = ShadowState::new(Field::constant(16, 8.0), 0.125, 0.0);
        let next = step_shadow(&carc(), &g, &st, 0.01).unwrap();
        for &v in next.u.iter() {
            assert_abs_diff_eq!(v, 8.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(next.xi, 0.125, epsilon = 1e-12);
    }

    #[test]
    fn trivial_gray_scott_step() {
        let g = SpatialGrid::uniform(8).unwrap();
        let m = ModelKinetics::gray_scott(1.0, 0.1).unwrap();
        let st = ShadowState::new(Field::constant(8, 0.0), 1.0, 0.0);
        let next = step_shadow(&m, &g, &st, 0.7).unwrap();
        assert!(next.u.iter().all(|&v| v == 0.0));
        assert_eq!(next.xi, 1.0);
    }

    #[test]
    fn constant_carcinogenesis_run() {
        let g = SpatialGrid::uniform(32).unwrap();
        let cfg = IntegratorConfig::new(5.0, 0.5);
        let (traj, rep) = run_shadow(&carc(), &g, &Field::constant(32, 8.0), 0.125, &cfg).unwrap();
        assert_eq!(rep.status, RunStatus::Completed);
        for s in &traj.samples {
            assert!(s.u.iter().all(|&v| (v - 8.0).abs() < 1e-10));
        }
        assert_eq!(traj.len(), 11);
    }

    #[test]
    fn rejects_negative_data() {
        let g = SpatialGrid::uniform(4).unwrap();
        let cfg = IntegratorConfig::new(1.0, 0.5);
        let u0 = Field(vec![1.0, -1.0, 1.0, 1.0]);
        assert!(matches!(
            run_shadow(&carc(), &g, &u0, 0.1, &cfg),
            Err(ShadowError::InvalidInput(_))
        ));
        let ai = ModelKinetics::activator_inhibitor(2.0, 1.0, 2.0, 0.0, 1.0).unwrap();
        assert!(run_kinetics(&ai, 1.0, 0.0, &cfg).is_err());
    }

    #[test]
    fn kinetic_gray_scott_sum_bound() {
        let m = ModelKinetics::gray_scott(1.0, 0.1).unwrap();
        let cfg = IntegratorConfig::new(20.0, 0.05).with_monitors(vec![MonitorTag::GsKineticSum]);
        let (traj, rep) = run_kinetics(&m, 5.0, 2.0, &cfg).unwrap();
        assert_eq!(rep.status, RunStatus::Completed);
        assert!(rep.monitor_clean("gs-kinetic-sum"));
        for s in &traj.samples {
            assert!(s.u[0] + s.xi <= 7.0 + 1e-12);
        }
    }

    #[test]
    fn kinetic_activator_inhibitor_blows_up() {
        let m = ModelKinetics::activator_inhibitor(3.0, 3.0, 1.0, 0.0, 1.0).unwrap();
        // u' ≈ u³ while ξ lags, so the time left at u = 1e8 is far below dt_min
        let mut cfg = IntegratorConfig::new(10.0, 0.1);
        cfg.blowup_threshold = 1e5;
        let (_, rep) = run_kinetics(&m, 5.0, 1.0, &cfg).unwrap();
        assert!(rep.status.is_blowup(), "{:?}", rep.status);
    }
}
