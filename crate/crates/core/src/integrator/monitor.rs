//! A-priori inequalities checked at every sample of a run.

use crate::domain::{argmax_set, weighted_sum, ShadowState};
use crate::error::{Result, ShadowError};
use crate::kinetics::ModelKinetics;
use crate::scalar::Real;

use super::report::MonitorRecord;

/// Relative slack allowed before a record counts as a violation.
pub const MONITOR_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonitorTag<T> {
    /// `0 ≤ ξ ≤ max{ξ0, 1}`.
    GsXiBand,
    /// Upper envelope of `u` off the peak and the matching two-sided band for `ξ`.
    GsBlowupEnvelope,
    /// `∫u + ξ ≤ max{∫u0 + ξ0, 1}`.
    GsKineticSum,
    /// `ξ ≥ ξ0 e^{−t/τ}`.
    AiXiFloor,
    /// `0 ≤ u ≤ e^{(a−d)t} u0` and `0 < ξ ≤ max{ξ0, κ0}`.
    CarcApriori,
    /// `∫u + aξ ≤ max{∫u0 + aξ0, aκ0/min{1, d}}`.
    CarcMass,
    /// `ξ∫u² > λκ0` and `ξ ≤ (1 − λ)κ0`.
    CarcLemmaInvariant(T),
    /// `(max u)² ≥ ∫u² ≥ 1`.
    CarcMaxFloor,
    /// `u(x)/u(x*)` non-increasing wherever `u0(x) < u0(x*)`.
    CarcRatioMonotone,
}

impl<T> MonitorTag<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GsXiBand => "gs-xi-band",
            Self::GsBlowupEnvelope => "gs-blowup-envelope",
            Self::GsKineticSum => "gs-kinetic-sum",
            Self::AiXiFloor => "ai-xi-floor",
            Self::CarcApriori => "carc-apriori",
            Self::CarcMass => "carc-mass",
            Self::CarcLemmaInvariant(_) => "carc-lemma-invariant",
            Self::CarcMaxFloor => "carc-max-floor",
            Self::CarcRatioMonotone => "carc-ratio-monotone",
        }
    }
}

/// Tracks the most violated `lhs ≤ rhs` among several candidates.
struct Worst<T> {
    lhs: T,
    rhs: T,
    score: T,
}

impl<T: Real> Worst<T> {
    fn new() -> Self {
        Self {
            lhs: T::zero(),
            rhs: T::zero(),
            score: T::neg_infinity(),
        }
    }

    fn add(&mut self, lhs: T, rhs: T) {
        let scale = lhs.abs().max(rhs.abs()).max(T::min_positive_value());
        let mut score = (lhs - rhs) / scale;
        if score.is_nan() {
            score = T::infinity();
        }
        if score > self.score {
            *self = Self { lhs, rhs, score };
        }
    }

    fn record(self, monitor: &'static str, t: T) -> MonitorRecord<T> {
        let slack = T::lit(MONITOR_RTOL) * self.lhs.abs().max(self.rhs.abs());
        let pass = self.lhs <= self.rhs + slack;
        MonitorRecord {
            monitor,
            t,
            lhs: self.lhs,
            rhs: self.rhs,
            pass,
        }
    }
}

struct Envelope<T> {
    peak: usize,
    xi_floor: T,
}

/// Evaluates a fixed list of monitors along one run.
pub(crate) struct MonitorSet<T> {
    tags: Vec<MonitorTag<T>>,
    model: ModelKinetics<T>,
    weights: Vec<T>,
    u0: Vec<T>,
    xi0: T,
    mass0: T,
    envelope: Option<Envelope<T>>,
    ratio_ref: Option<usize>,
    prev_ratios: Option<Vec<T>>,
}

impl<T: Real> MonitorSet<T> {
    pub(crate) fn new(
        tags: &[MonitorTag<T>],
        model: &ModelKinetics<T>,
        weights: &[T],
        u0: &[T],
        xi0: T,
    ) -> Result<Self> {
        for tag in tags {
            let ok = matches!(
                (tag, model),
                (
                    MonitorTag::GsXiBand | MonitorTag::GsBlowupEnvelope | MonitorTag::GsKineticSum,
                    ModelKinetics::GrayScott { .. },
                ) | (
                    MonitorTag::AiXiFloor,
                    ModelKinetics::ActivatorInhibitor { .. }
                ) | (
                    MonitorTag::CarcApriori
                        | MonitorTag::CarcMass
                        | MonitorTag::CarcLemmaInvariant(_)
                        | MonitorTag::CarcMaxFloor
                        | MonitorTag::CarcRatioMonotone,
                    ModelKinetics::Carcinogenesis { .. },
                )
            );
            if !ok {
                return Err(ShadowError::InvalidInput(format!(
                    "monitor {} does not apply to {}",
                    tag.name(),
                    model.name()
                )));
            }
            if let MonitorTag::CarcLemmaInvariant(l) = tag {
                if !(*l > T::zero() && *l < T::one()) {
                    return Err(ShadowError::InvalidInput(format!(
                        "lemma monitor needs 0 < lambda < 1, got {l}"
                    )));
                }
            }
        }

        let envelope = if tags.contains(&MonitorTag::GsBlowupEnvelope) {
            let set = argmax_set(u0, T::zero());
            if set.len() != 1 {
                return Err(ShadowError::InvalidInput(
                    "envelope monitor needs a strict maximum of u0".into(),
                ));
            }
            let peak = set[0];
            let top = u0[peak];
            let a0: T = (0..u0.len())
                .filter(|&i| i != peak)
                .map(|i| {
                    let v = top * u0[i] / (top - u0[i]);
                    weights[i] * v * v
                })
                .sum();
            let ModelKinetics::GrayScott { b, .. } = *model else {
                unreachable!("checked above")
            };
            Some(Envelope {
                peak,
                xi_floor: xi0.min(b / (a0 + b)),
            })
        } else {
            None
        };

        let ratio_ref = if tags.contains(&MonitorTag::CarcRatioMonotone) {
            argmax_set(u0, T::zero()).first().copied()
        } else {
            None
        };

        let mass0 = weighted_sum(weights, u0);
        Ok(Self {
            tags: tags.to_vec(),
            model: model.clone(),
            weights: weights.to_vec(),
            u0: u0.to_vec(),
            xi0,
            mass0,
            envelope,
            ratio_ref,
            prev_ratios: None,
        })
    }

    pub(crate) fn evaluate(&mut self, st: &ShadowState<T>, out: &mut Vec<MonitorRecord<T>>) {
        let tags = self.tags.clone();
        for tag in &tags {
            let w = self.check(tag, st);
            out.push(w.record(tag.name(), st.t));
        }
    }

    fn check(&mut self, tag: &MonitorTag<T>, st: &ShadowState<T>) -> Worst<T> {
        let mut w = Worst::new();
        let (u, xi, t) = (st.u.values(), st.xi, st.t);
        let one = T::one();
        match (*tag, &self.model) {
            (MonitorTag::GsXiBand, _) => {
                w.add(T::zero(), xi);
                w.add(xi, self.xi0.max(one));
            }
            (MonitorTag::GsBlowupEnvelope, ModelKinetics::GrayScott { b, k }) => {
                let env = self.envelope.as_ref().expect("built with the tag");
                let top = self.u0[env.peak];
                let decay = (-t * (*b + *k)).exp();
                for (i, &ui) in u.iter().enumerate() {
                    if i != env.peak {
                        let u0i = self.u0[i];
                        w.add(ui, top * u0i * decay / (top - u0i));
                    }
                }
                w.add(env.xi_floor, xi);
                w.add(xi, self.xi0.max(one));
            }
            (MonitorTag::GsKineticSum, _) => {
                let bound = (self.mass0 + self.xi0).max(one);
                w.add(weighted_sum(&self.weights, u) + xi, bound);
            }
            (MonitorTag::AiXiFloor, ModelKinetics::ActivatorInhibitor { tau, .. }) => {
                w.add(self.xi0 * (-t / *tau).exp(), xi);
            }
            (MonitorTag::CarcApriori, ModelKinetics::Carcinogenesis { a, d, kappa0 }) => {
                let growth = ((*a - *d) * t).exp();
                for (&ui, &u0i) in u.iter().zip(&self.u0) {
                    w.add(T::zero(), ui);
                    w.add(ui, growth * u0i);
                }
                // strict lower bound on ξ: a zero value is a violation
                if xi <= T::zero() {
                    w.add(T::min_positive_value(), xi);
                } else {
                    w.add(T::zero(), xi);
                }
                w.add(xi, self.xi0.max(*kappa0));
            }
            (MonitorTag::CarcMass, ModelKinetics::Carcinogenesis { a, d, kappa0 }) => {
                let init = self.mass0 + *a * self.xi0;
                let bound = init.max(*a * *kappa0 / d.min(one));
                w.add(weighted_sum(&self.weights, u) + *a * xi, bound);
            }
            (
                MonitorTag::CarcLemmaInvariant(lambda),
                ModelKinetics::Carcinogenesis { kappa0, .. },
            ) => {
                let sq: Vec<T> = u.iter().map(|&v| v * v).collect();
                w.add(lambda * *kappa0, xi * weighted_sum(&self.weights, &sq));
                w.add(xi, (one - lambda) * *kappa0);
            }
            (MonitorTag::CarcMaxFloor, _) => {
                let sq: Vec<T> = u.iter().map(|&v| v * v).collect();
                let l2 = weighted_sum(&self.weights, &sq);
                let max = st.u.max();
                w.add(l2, max * max);
                w.add(one, l2);
            }
            (MonitorTag::CarcRatioMonotone, _) => {
                let Some(star) = self.ratio_ref else {
                    w.add(T::zero(), T::zero());
                    return w;
                };
                let top0 = self.u0[star];
                let ustar = u[star];
                let ratios: Vec<T> = u
                    .iter()
                    .zip(&self.u0)
                    .map(|(&ui, &u0i)| {
                        if u0i < top0 && ustar > T::zero() {
                            ui / ustar
                        } else {
                            T::nan()
                        }
                    })
                    .collect();
                if let Some(prev) = &self.prev_ratios {
                    for (&r, &p) in ratios.iter().zip(prev) {
                        if !r.is_nan() && !p.is_nan() {
                            w.add(r, p);
                        }
                    }
                }
                if w.score == T::neg_infinity() {
                    w.add(T::zero(), T::zero());
                }
                self.prev_ratios = Some(ratios);
            }
            _ => unreachable!("tags validated against the model"),
        }
        w
    }
}
