//! The reaction-diffusion-ODE system `u_t = f(u, v)`, `v_t = DΔv + g(u, v)`
//! with zero-flux boundary, and the comparison against the shadow system as
//! `D → ∞`.
//!
//! Time stepping is the IMEX ARS(4,4,3) scheme: diffusion implicit (one
//! tridiagonal solve per stage), reactions explicit. The scheme is stiffly
//! accurate, so large `D` does not force small steps.

use rayon::prelude::*;

use crate::domain::{Field, SpatialGrid};
use crate::error::{Result, ShadowError};
use crate::integrator::{
    run_shadow, IntegratorConfig, RunReport, RunStatus, SampleSchedule, Trajectory,
};
use crate::kinetics::ModelKinetics;
use crate::scalar::Real;

/// `(D/h²)(f_{i−1} − 2f_i + f_{i+1})` with mirrored ghost cells.
pub fn neumann_laplacian<T: Real>(grid: &SpatialGrid<T>, f: &Field<T>, d: T) -> Result<Field<T>> {
    grid.check(f)?;
    let mut out = vec![T::zero(); f.len()];
    apply_laplacian(f.values(), d / (grid.spacing() * grid.spacing()), &mut out);
    Ok(Field(out))
}

fn apply_laplacian<T: Real>(f: &[T], scale: T, out: &mut [T]) {
    let n = f.len();
    let two = T::lit(2.0);
    for i in 0..n {
        let left = if i == 0 { f[0] } else { f[i - 1] };
        let right = if i + 1 == n { f[n - 1] } else { f[i + 1] };
        out[i] = scale * (left - two * f[i] + right);
    }
}

/// Solves `(I − c·Δ_h) x = rhs` where `Δ_h` is the unscaled Neumann stencil.
fn solve_shifted<T: Real>(c: T, rhs: &[T], out: &mut [T], scratch: &mut [T]) {
    let n = rhs.len();
    let one = T::one();
    let two = T::lit(2.0);
    let diag = |i: usize| {
        if i == 0 || i + 1 == n {
            one + c
        } else {
            one + two * c
        }
    };
    let off = -c;
    // forward sweep
    let mut denom = diag(0);
    scratch[0] = off / denom;
    out[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag(i) - off * scratch[i - 1];
        scratch[i] = off / denom;
        out[i] = (rhs[i] - off * out[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = out[i + 1];
        out[i] -= scratch[i] * next;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdState<T> {
    pub u: Field<T>,
    pub v: Field<T>,
    pub t: T,
}

#[derive(Debug, Clone)]
pub struct RdTrajectory<T> {
    pub samples: Vec<RdState<T>>,
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub diffusion: T,
}

impl<T: Real> RdTrajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

const GAMMA: f64 = 0.5;
const IMPLICIT: [[f64; 5]; 5] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.5, 0.0, 0.0, 0.0],
    [0.0, 1.0 / 6.0, 0.5, 0.0, 0.0],
    [0.0, -0.5, 0.5, 0.5, 0.0],
    [0.0, 1.5, -1.5, 0.5, 0.5],
];
const EXPLICIT: [[f64; 5]; 5] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.5, 0.0, 0.0, 0.0, 0.0],
    [11.0 / 18.0, 1.0 / 18.0, 0.0, 0.0, 0.0],
    [5.0 / 6.0, -5.0 / 6.0, 0.5, 0.0, 0.0],
    [0.25, 1.75, 0.75, -1.75, 0.0],
];

struct Imex<'a, T> {
    model: &'a ModelKinetics<T>,
    /// `D/h²`.
    scale: T,
}

impl<T: Real> Imex<'_, T> {
    fn reactions(&self, u: &[T], v: &[T], fu: &mut [T], gv: &mut [T]) -> Result<()> {
        for i in 0..u.len() {
            fu[i] = self.model.eval_f(u[i], v[i])?;
            gv[i] = self.model.eval_g(u[i], v[i])?;
        }
        Ok(())
    }

    /// One ARS(4,4,3) step; the last stage is the new state.
    fn step(&self, u: &[T], v: &[T], h: T) -> Result<(Vec<T>, Vec<T>)> {
        let n = u.len();
        let mut us: Vec<Vec<T>> = Vec::with_capacity(5);
        let mut vs: Vec<Vec<T>> = Vec::with_capacity(5);
        let mut fs: Vec<Vec<T>> = Vec::with_capacity(5);
        let mut gs: Vec<Vec<T>> = Vec::with_capacity(5);
        let mut lv: Vec<Vec<T>> = Vec::with_capacity(5);
        let mut scratch = vec![T::zero(); n];
        let c = h * T::lit(GAMMA) * self.scale;

        for stage in 0..5 {
            let (su, sv, slv) = if stage == 0 {
                (u.to_vec(), v.to_vec(), vec![T::zero(); n])
            } else {
                let mut su = u.to_vec();
                let mut rhs = v.to_vec();
                for j in 0..stage {
                    let ae = T::lit(EXPLICIT[stage][j]);
                    let ai = T::lit(IMPLICIT[stage][j]);
                    for i in 0..n {
                        su[i] += h * ae * fs[j][i];
                        rhs[i] += h * (ae * gs[j][i] + ai * lv[j][i]);
                    }
                }
                let mut sv = vec![T::zero(); n];
                solve_shifted(c, &rhs, &mut sv, &mut scratch);
                // DΔv at this stage, recovered from the stage equation
                let denom = h * T::lit(IMPLICIT[stage][stage]);
                let slv = sv
                    .iter()
                    .zip(&rhs)
                    .map(|(&a, &b)| (a - b) / denom)
                    .collect();
                (su, sv, slv)
            };
            if stage < 4 {
                let mut fu = vec![T::zero(); n];
                let mut gv = vec![T::zero(); n];
                self.reactions(&su, &sv, &mut fu, &mut gv)?;
                fs.push(fu);
                gs.push(gv);
            }
            us.push(su);
            vs.push(sv);
            lv.push(slv);
        }
        Ok((
            us.pop().expect("five stages"),
            vs.pop().expect("five stages"),
        ))
    }
}

/// One fixed ARS(4,4,3) step of the reaction-diffusion-ODE system.
pub fn step_rdode<T: Real>(
    model: &ModelKinetics<T>,
    grid: &SpatialGrid<T>,
    state: &RdState<T>,
    d: T,
    dt: T,
) -> Result<RdState<T>> {
    grid.check(&state.u)?;
    grid.check(&state.v)?;
    if !(dt > T::zero()) || !(d > T::zero()) {
        return Err(ShadowError::InvalidInput(format!(
            "dt and D must be positive, got {dt} and {d}"
        )));
    }
    let imex = Imex {
        model,
        scale: d / (grid.spacing() * grid.spacing()),
    };
    let (u, v) = imex.step(state.u.values(), state.v.values(), dt)?;
    if !finite(&u, &v) {
        return Err(ShadowError::StepOverflow {
            t: state.t.as_f64(),
        });
    }
    Ok(RdState {
        u: Field(u),
        v: Field(v),
        t: state.t + dt,
    })
}

fn finite<T: Real>(a: &[T], b: &[T]) -> bool {
    a.iter().chain(b).all(|x| x.is_finite())
}

/// Integrates the reaction-diffusion-ODE system with diffusivity `d`.
///
/// Uses the step-size control, sampling and blowup policy of
/// [`IntegratorConfig`]; monitors and `isolate_peak` are ignored.
pub fn run_rdode<T: Real>(
    model: &ModelKinetics<T>,
    grid: &SpatialGrid<T>,
    u0: &Field<T>,
    v0: &Field<T>,
    d: T,
    cfg: &IntegratorConfig<T>,
) -> Result<(RdTrajectory<T>, RunReport<T>)> {
    grid.check(u0)?;
    grid.check(v0)?;
    cfg.validate()?;
    model.validate()?;
    if !(d > T::zero() && d.is_finite()) {
        return Err(ShadowError::InvalidInput(format!(
            "D must be positive, got {d}"
        )));
    }
    if !finite(u0.values(), v0.values()) {
        return Err(ShadowError::InvalidInput(
            "initial data must be finite".into(),
        ));
    }
    if model.is_nonnegative() && u0.iter().chain(v0.iter()).any(|&x| x < T::zero()) {
        return Err(ShadowError::InvalidInput(
            "initial data must be nonnegative".into(),
        ));
    }
    let sample_times = cfg.schedule.times(cfg.t_end)?;
    let h2 = grid.spacing() * grid.spacing();
    let imex = Imex {
        model,
        scale: d / h2,
    };
    let abs_tol = T::tol(cfg.abs_tol.as_f64());
    let clamp = T::lit(1e-12);
    let nonneg = model.is_nonnegative();

    let mut report = RunReport::new();
    let mut samples = vec![RdState {
        u: u0.clone(),
        v: v0.clone(),
        t: T::zero(),
    }];
    report.max_u_history.push((T::zero(), u0.max()));

    let (mut u, mut v) = (u0.values().to_vec(), v0.values().to_vec());
    let mut t = T::zero();
    let mut dt = cfg.dt_init;
    let mut next = 0;
    let mut status = RunStatus::Completed;
    let seven = T::lit(7.0);

    while next < sample_times.len() {
        if report.steps_accepted + report.steps_rejected >= cfg.max_steps {
            status = RunStatus::StepFailure { t };
            break;
        }
        let target = sample_times[next];
        let mut h = dt;
        let landing = h >= target - t;
        if landing {
            h = target - t;
        }
        let attempt = (|| -> Result<(Vec<T>, Vec<T>, T)> {
            let (fu, fv) = imex.step(&u, &v, h)?;
            let half = h * T::lit(0.5);
            let (mu, mv) = imex.step(&u, &v, half)?;
            let (nu, nv) = imex.step(&mu, &mv, half)?;
            if !finite(&nu, &nv) || !finite(&fu, &fv) {
                return Err(ShadowError::StepOverflow { t: t.as_f64() });
            }
            let mut err = T::zero();
            for (a, b) in nu.iter().zip(&fu).chain(nv.iter().zip(&fv)) {
                err = err.max(((*a - *b).abs() / seven) / (cfg.rel_tol * a.abs() + abs_tol));
            }
            Ok((nu, nv, err))
        })();
        match attempt {
            Ok((mut nu, mut nv, err)) if err <= T::one() => {
                report.steps_accepted += 1;
                if nonneg {
                    for x in nu.iter_mut().chain(nv.iter_mut()) {
                        if *x < T::zero() {
                            if *x >= -clamp {
                                *x = T::zero();
                                report.clamped += 1;
                            } else {
                                report.negativity_violations += 1;
                            }
                        }
                    }
                }
                u = nu;
                v = nv;
                let fac = (T::lit(0.9) * err.max(T::lit(1e-12)).powf(T::lit(-0.25)))
                    .max(T::lit(0.2))
                    .min(T::lit(4.0));
                dt = if landing { dt.max(h * fac) } else { h * fac };
                dt = dt.max(cfg.dt_min);
                if landing {
                    t = target;
                    next += 1;
                    let st = RdState {
                        u: Field(u.clone()),
                        v: Field(v.clone()),
                        t,
                    };
                    report.max_u_history.push((t, st.u.max()));
                    samples.push(st);
                } else {
                    t += h;
                }
            }
            other => {
                report.steps_rejected += 1;
                if h <= cfg.dt_min {
                    let top = u.iter().copied().fold(T::neg_infinity(), T::max);
                    let node = u.iter().position(|&x| x == top).unwrap_or(0);
                    status = if top > cfg.blowup_threshold {
                        RunStatus::Blowup { t_star: t, node }
                    } else {
                        RunStatus::StepFailure { t }
                    };
                    break;
                }
                let fac = match other {
                    Ok((_, _, err)) => (T::lit(0.9) * err.powf(T::lit(-0.25))).max(T::lit(0.2)),
                    Err(_) => T::lit(0.5),
                };
                dt = (h * fac).max(cfg.dt_min);
            }
        }
    }
    report.status = status;
    Ok((
        RdTrajectory {
            samples,
            nodes: grid.nodes().to_vec(),
            weights: grid.weights().to_vec(),
            diffusion: d,
        },
        report,
    ))
}

fn aligned<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::tol(1e-12) * a.abs().max(b.abs()).max(T::one())
}

/// `max_k t_k^α (‖u^D(t_k) − u(t_k)‖_∞ + ‖v^D(t_k) − ξ(t_k)‖_∞)`.
pub fn convergence_metric<T: Real>(
    rd: &RdTrajectory<T>,
    shadow: &Trajectory<T>,
    alpha: T,
) -> Result<T> {
    if rd.samples.len() != shadow.samples.len() {
        return Err(ShadowError::Alignment(format!(
            "{} reaction-diffusion samples vs {} shadow samples",
            rd.samples.len(),
            shadow.samples.len()
        )));
    }
    let mut worst = T::zero();
    for (a, b) in rd.samples.iter().zip(&shadow.samples) {
        if !aligned(a.t, b.t) {
            return Err(ShadowError::Alignment(format!(
                "sample at t={} against t={}",
                a.t, b.t
            )));
        }
        if a.u.len() != b.u.len() || a.v.len() != b.u.len() {
            return Err(ShadowError::Shape {
                expected: b.u.len(),
                got: a.u.len(),
            });
        }
        let du =
            a.u.iter()
                .zip(b.u.iter())
                .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
        let dv = a.v.iter().fold(T::zero(), |m, x| m.max((*x - b.xi).abs()));
        let weight = if a.t == T::zero() {
            T::zero()
        } else {
            a.t.powf(alpha)
        };
        worst = worst.max(weight * (du + dv));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitStudyConfig<T> {
    pub d_list: Vec<T>,
    pub alpha: T,
    pub t_end: T,
    /// Defaults to `T/1000` followed by `k·T/100`.
    pub sample_times: Option<Vec<T>>,
    pub rel_tol: T,
}

impl<T: Real> LimitStudyConfig<T> {
    pub fn new(d_list: Vec<T>, t_end: T) -> Self {
        Self {
            d_list,
            alpha: T::lit(0.25),
            t_end,
            sample_times: None,
            rel_tol: T::lit(1e-8),
        }
    }

    fn samples(&self) -> Vec<T> {
        if let Some(s) = &self.sample_times {
            return s.clone();
        }
        let mut s = vec![self.t_end / T::lit(1000.0)];
        for k in 1..=100 {
            s.push(self.t_end * T::from_usize_lossy(k) / T::lit(100.0));
        }
        s
    }

    fn integrator(&self) -> IntegratorConfig<T> {
        let mut cfg = IntegratorConfig::new(self.t_end, self.t_end);
        cfg.schedule = SampleSchedule::At(self.samples());
        cfg.rel_tol = self.rel_tol;
        cfg.dt_init = (self.t_end * T::lit(1e-6)).max(cfg.dt_min);
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitRow<T> {
    pub diffusion: T,
    pub metric: T,
    pub status: RunStatus<T>,
    /// `sup_t (‖u^D‖_∞ + ‖v^D‖_∞)`, the quantity that must stay bounded in `D`.
    pub sup_norm: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitStudy<T> {
    pub rows: Vec<LimitRow<T>>,
    /// Least-squares slope of `ln metric` against `ln D`.
    pub fitted_slope: Option<T>,
    pub shadow_status: RunStatus<T>,
    /// Every run completed and the sup norms stay within a factor 10 of the
    /// shadow reference.
    pub uniform_bound_holds: bool,
}

/// Runs the shadow reference with `ξ0 = ∫v0` and one reaction-diffusion run
/// per `D` (in parallel), returning the metric table.
pub fn convergence_study<T: Real>(
    model: &ModelKinetics<T>,
    grid: &SpatialGrid<T>,
    u0: &Field<T>,
    v0: &Field<T>,
    cfg: &LimitStudyConfig<T>,
) -> Result<LimitStudy<T>> {
    if cfg.d_list.windows(2).any(|w| !(w[1] > w[0])) || cfg.d_list.iter().any(|&d| !(d > T::zero()))
    {
        return Err(ShadowError::InvalidInput(
            "D list must be positive and increasing".into(),
        ));
    }
    if !(cfg.alpha > T::zero() && cfg.alpha < T::lit(0.5)) {
        return Err(ShadowError::InvalidInput(format!(
            "alpha must lie in (0, 1/2), got {}",
            cfg.alpha
        )));
    }
    let icfg = cfg.integrator();
    let xi0 = grid.quadrature(v0)?;
    let (shadow, shadow_rep) = run_shadow(model, grid, u0, xi0, &icfg)?;
    let shadow_sup = shadow
        .samples
        .iter()
        .map(|s| s.u.max() + s.xi.abs())
        .fold(T::zero(), T::max);

    let rows: Vec<Result<LimitRow<T>>> = cfg
        .d_list
        .par_iter()
        .map(|&d| {
            let (rd, rep) = run_rdode(model, grid, u0, v0, d, &icfg)?;
            let sup_norm = rd
                .samples
                .iter()
                .map(|s| s.u.max() + s.v.iter().fold(T::zero(), |m, x| m.max(x.abs())))
                .fold(T::zero(), T::max);
            let metric = if rep.status == RunStatus::Completed
                && shadow_rep.status == RunStatus::Completed
            {
                convergence_metric(&rd, &shadow, cfg.alpha)?
            } else {
                T::nan()
            };
            Ok(LimitRow {
                diffusion: d,
                metric,
                status: rep.status,
                sup_norm,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let pts: Vec<(T, T)> = rows
        .iter()
        .filter(|r| r.metric > T::zero() && r.metric.is_finite())
        .map(|r| (r.diffusion.ln(), r.metric.ln()))
        .collect();
    let fitted_slope = if pts.len() >= 2 {
        let n = T::from_usize_lossy(pts.len());
        let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
        let my = pts.iter().map(|p| p.1).sum::<T>() / n;
        let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > T::zero()).then(|| sxy / sxx)
    } else {
        None
    };
    let uniform_bound_holds = rows.iter().all(|r| {
        r.status == RunStatus::Completed && r.sup_norm <= T::lit(10.0) * shadow_sup.max(T::one())
    });
    Ok(LimitStudy {
        rows,
        fitted_slope,
        shadow_status: shadow_rep.status,
        uniform_bound_holds,
    })
}
