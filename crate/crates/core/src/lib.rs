//! Power analysis for ordinal-scale trial endpoints.
//!
//! Daily ordinal trajectories ([`trajectory`]), the endpoints derived from
//! them ([`endpoints`]), the tests applied to those endpoints
//! ([`inference`]), trajectory generators ([`simgen`]) and the Monte Carlo
//! and resampling power engine ([`power`]). Numeric code is generic over
//! [`Real`] (`f32` or `f64`); the aliases below fix the scalar.

pub mod dist;
pub mod endpoints;
pub mod error;
pub mod inference;
pub mod io;
pub mod power;
pub mod rng;
pub mod scalar;
pub mod simgen;
pub mod trajectory;

pub use error::{Error, Result};
pub use inference::{TestKind, TestResult};
pub use power::{Method, MethodSpec, PowerRow, PowerTable};
pub use scalar::Real;
pub use simgen::{LagMode, OrSchedule, POScenarioParams, Scenario, ScenarioParams};
pub use trajectory::{Arm, OrdinalScore, SurvivalObservation, Trajectory, TrialDataset, TrialView};

pub type ScenarioParamsF64 = ScenarioParams<f64>;
pub type ScenarioParamsF32 = ScenarioParams<f32>;
pub type POScenarioParamsF64 = POScenarioParams<f64>;
pub type POScenarioParamsF32 = POScenarioParams<f32>;
pub type ScenarioF64 = Scenario<f64>;
pub type ScenarioF32 = Scenario<f32>;
pub type TestResultF64 = TestResult<f64>;
pub type TestResultF32 = TestResult<f32>;
