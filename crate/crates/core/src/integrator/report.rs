use crate::domain::ShadowState;
use crate::kinetics::ModelKinetics;
use crate::scalar::Real;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus<T> {
    Completed,
    /// `max u` exceeded the threshold and the step could not be reduced further.
    Blowup {
        t_star: T,
        node: usize,
    },
    StepFailure {
        t: T,
    },
}

impl<T> RunStatus<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::Blowup { .. } => "blowup",
            Self::StepFailure { .. } => "step-failure",
        }
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self, Self::Blowup { .. })
    }
}

/// One monitor evaluation: the inequality `lhs ≤ rhs` at the worst node.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRecord<T> {
    pub monitor: &'static str,
    pub t: T,
    pub lhs: T,
    pub rhs: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport<T> {
    pub status: RunStatus<T>,
    pub monitor_log: Vec<MonitorRecord<T>>,
    /// `(t, max u)` at every sample.
    pub max_u_history: Vec<(T, T)>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Entries in `[−1e-12, 0)` that were reset to zero.
    pub clamped: usize,
    /// Entries below `−1e-12` after an accepted step.
    pub negativity_violations: usize,
    /// Slope of `ln max u` over the second half of the run. Informational only.
    pub fitted_growth_rate: Option<T>,
    /// Slope of `ln min u` over the second half of the run. Informational only.
    pub fitted_decay_rate: Option<T>,
    pub diagnostics: Vec<String>,
}

impl<T: Real> RunReport<T> {
    pub(crate) fn new() -> Self {
        Self {
            status: RunStatus::Completed,
            monitor_log: Vec::new(),
            max_u_history: Vec::new(),
            steps_accepted: 0,
            steps_rejected: 0,
            clamped: 0,
            negativity_violations: 0,
            fitted_growth_rate: None,
            fitted_decay_rate: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn violations(&self) -> impl Iterator<Item = &MonitorRecord<T>> {
        self.monitor_log.iter().filter(|r| !r.pass)
    }

    pub fn is_monitor_clean(&self) -> bool {
        self.monitor_log.iter().all(|r| r.pass)
    }

    /// Whether every record of `monitor` passed. A monitor with no records is
    /// not considered clean.
    pub fn monitor_clean(&self, monitor: &str) -> bool {
        let mut seen = false;
        for r in self.monitor_log.iter().filter(|r| r.monitor == monitor) {
            seen = true;
            if !r.pass {
                return false;
            }
        }
        seen
    }
}

/// Sampled states of one run.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub samples: Vec<ShadowState<T>>,
    pub model: ModelKinetics<T>,
    pub nodes: Vec<T>,
    /// Quadrature weights the run actually used.
    pub weights: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> Option<&ShadowState<T>> {
        self.samples.last()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// `Σ w_i u_i` at each sample.
    pub fn masses(&self) -> Vec<T> {
        self.samples
            .iter()
            .map(|s| crate::domain::weighted_sum(&self.weights, s.u.values()))
            .collect()
    }
}

/// Least-squares slope of `ln y` against `t` over the points with `t ≥ t_last/2`.
pub(crate) fn log_slope<T: Real>(points: &[(T, T)]) -> Option<T> {
    let t_last = points.last()?.0;
    let half = t_last * T::lit(0.5);
    let pts: Vec<(T, T)> = points
        .iter()
        .filter(|(t, y)| *t >= half && *y > T::zero() && y.is_finite())
        .map(|&(t, y)| (t, y.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = T::from_usize_lossy(pts.len());
    let mt = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx <= T::zero() {
        return None;
    }
    Some(sxy / sxx)
}
