//! Simulation and analysis of shadow reaction-diffusion systems
//! `u_t = f(u, ξ)`, `ξ_t = ∫ g(u, ξ) dx` on the unit interval.
//!
//! Everything is generic over the floating point type through [`Real`]; the
//! aliases below fix it to `f64` (and `f32` where that is useful).

// `!(a > b)` is the NaN-rejecting form used throughout input validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod domain;
pub mod error;
pub mod integrator;
pub mod kinetics;
pub mod limit;
pub mod profile;
pub mod scalar;

pub use analytic::{
    ai_kinetic_regime, blowup_certificate, exact_u, singular_mass_functional,
    singular_mass_integral, tmax_from_history, AiRegimeReport, BlowupCertificate, ExactSolution,
    Hypothesis, KineticRegime, SingularMass, XiHistory,
};
pub use domain::{CellMask, Field, ShadowState, SpatialGrid};
pub use error::{Result, ShadowError};
pub use integrator::{
    run_kinetics, run_shadow, step_shadow, IntegratorConfig, MonitorRecord, MonitorTag, RunReport,
    RunStatus, SampleSchedule, Trajectory,
};
pub use kinetics::{
    classify_shadow_stability, eigenpair_residual, ode_steady_states, shadow_steady_states,
    GenericKinetics, ModelKinetics, Partials, ScalarFn, Stability, SteadyCatalog, SteadyState,
};
pub use limit::{
    convergence_metric, convergence_study, neumann_laplacian, run_rdode, step_rdode, LimitRow,
    LimitStudy, LimitStudyConfig, RdState, RdTrajectory,
};
pub use profile::{FnProfile, Profile, SharpPeak};
pub use scalar::Real;

pub type Grid = SpatialGrid<f64>;
pub type Field64 = Field<f64>;
pub type State = ShadowState<f64>;
pub type Kinetics = ModelKinetics<f64>;
pub type Steady = SteadyState<f64>;
pub type Config = IntegratorConfig<f64>;
pub type Monitor = MonitorTag<f64>;
pub type Report = RunReport<f64>;
pub type Status = RunStatus<f64>;
pub type Traj = Trajectory<f64>;
pub type History = XiHistory<f64>;
pub type Certificate = BlowupCertificate<f64>;
pub type RdTraj = RdTrajectory<f64>;
pub type StudyConfig = LimitStudyConfig<f64>;
pub type Study = LimitStudy<f64>;

pub type Grid32 = SpatialGrid<f32>;
pub type Kinetics32 = ModelKinetics<f32>;
pub type Config32 = IntegratorConfig<f32>;
