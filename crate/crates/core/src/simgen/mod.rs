//! Trajectory generators.

mod line;
mod params;
mod po;

pub use line::{
    absorb_forward, gen_trajectory_eq1, gen_trajectory_lagged, gen_trial_eq1, scores_from_draws, LineDraws,
};
pub use params::{
    LagMode, OrSchedule, POScenarioParams, ScenarioParams, CALIBRATED_BASELINE_OFFSET, DEFAULT_BASELINE_PROBS,
};
pub use po::{gen_trial_po, po_shift};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::TrialDataset;

/// Either generator, as consumed by the power engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario<T> {
    Line(ScenarioParams<T>),
    PropOdds(POScenarioParams<T>),
}

/// Names accepted by [`Scenario::preset`].
pub const PRESETS: [&str; 9] = [
    "reference",
    "lagged",
    "faster_recovery",
    "faster_mortality",
    "mortality_only",
    "null",
    "scenario_a",
    "scenario_b",
    "scenario_c",
];

impl<T: Real> Scenario<T> {
    /// Published scenario by name, with the published parameters
    /// (`baseline_offset` 0).
    pub fn preset(name: &str) -> Result<Self> {
        Ok(match name {
            "reference" => Scenario::Line(ScenarioParams::reference()),
            "lagged" => Scenario::Line(ScenarioParams::lagged()),
            "faster_recovery" => Scenario::Line(ScenarioParams::faster_recovery()),
            "faster_mortality" => Scenario::Line(ScenarioParams::faster_mortality()),
            "mortality_only" => Scenario::Line(ScenarioParams::mortality_only()),
            "null" => Scenario::Line(ScenarioParams::null()),
            "scenario_a" => Scenario::PropOdds(POScenarioParams::scenario_a()),
            "scenario_b" => Scenario::PropOdds(POScenarioParams::scenario_b()),
            "scenario_c" => Scenario::PropOdds(POScenarioParams::scenario_c()),
            other => {
                return Err(Error::Config(format!(
                    "unknown preset '{other}' (one of {})",
                    PRESETS.join(", ")
                )))
            }
        })
    }

    /// The line-model parameters: the scenario itself, or the shared
    /// dynamics of the proportional-odds generator.
    pub fn line_params_mut(&mut self) -> &mut ScenarioParams<T> {
        match self {
            Scenario::Line(p) => p,
            Scenario::PropOdds(p) => &mut p.shared_dynamics,
        }
    }

    pub fn generate(&self, master_seed: u64, replicate: u64) -> Result<TrialDataset> {
        match self {
            Scenario::Line(p) => gen_trial_eq1(p, master_seed, replicate),
            Scenario::PropOdds(p) => gen_trial_po(p, master_seed, replicate),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Scenario::Line(p) => p.validate(),
            Scenario::PropOdds(p) => p.validate(),
        }
    }

    pub fn n_per_arm(&self) -> usize {
        match self {
            Scenario::Line(p) => p.n_per_arm,
            Scenario::PropOdds(p) => p.n_per_arm,
        }
    }

    pub fn horizon_days(&self) -> u32 {
        match self {
            Scenario::Line(p) => p.horizon_days,
            Scenario::PropOdds(p) => p.horizon_days,
        }
    }
}
