//! Scenario configuration files.
//!
//! A flat TOML document. Every key is optional; values override the named
//! preset (or the generator's default preset):
//!
//! ```toml
//! generator = "eq1"          # eq1 | eq1_lagged | po
//! preset = "reference"
//! n_sims = 1000
//! master_seed = 20240501
//! alpha = 0.05
//! methods = ["prop_odds@14", "cox_recovery"]
//! baseline_offset = 4.0
//! lag_mode = "corrected"
//! or_schedule = [[1, 1.0], [21, 1.5], [28, 1.75]]
//! output = "power.csv"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::power::{po_panel, simulation_panel, MethodSpec, DEFAULT_ALPHA};
use crate::simgen::{LagMode, OrSchedule, Scenario};

/// Raw contents of a configuration file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub generator: Option<String>,
    pub preset: Option<String>,
    pub n_sims: Option<u64>,
    pub master_seed: Option<u64>,
    pub alpha: Option<f64>,
    pub methods: Option<Vec<String>>,
    pub output: Option<PathBuf>,
    pub text_output: Option<PathBuf>,

    pub b0: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub w: Option<f64>,
    pub sd_intercept: Option<f64>,
    pub recover_slope_mean: Option<f64>,
    pub recover_slope_sd: Option<f64>,
    pub death_slope_mean: Option<f64>,
    pub death_slope_sd: Option<f64>,
    pub p_death_control: Option<f64>,
    pub p_death_treatment: Option<f64>,
    pub resid_sd: Option<f64>,
    pub baseline_offset: Option<f64>,
    pub lag_day: Option<u32>,
    pub lag_mode: Option<String>,
    pub n_per_arm: Option<usize>,
    pub horizon_days: Option<u32>,
    pub categories: Option<u16>,
    pub recovery_threshold: Option<u16>,

    pub baseline_probs: Option<Vec<f64>>,
    pub or_schedule: Option<Vec<(u32, f64)>>,
}

/// A configuration with presets applied and every value checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub scenario: Scenario<f64>,
    pub methods: Vec<MethodSpec>,
    pub n_sims: Option<u64>,
    pub master_seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub text_output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Generator {
    Line,
    Lagged,
    PropOdds,
}

impl Generator {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "eq1" => Ok(Generator::Line),
            "eq1_lagged" => Ok(Generator::Lagged),
            "po" => Ok(Generator::PropOdds),
            other => Err(Error::Config(format!("unknown generator '{other}' (eq1|eq1_lagged|po)"))),
        }
    }

    fn of(s: &Scenario<f64>) -> Self {
        match s {
            Scenario::Line(p) if p.lagged => Generator::Lagged,
            Scenario::Line(_) => Generator::Line,
            Scenario::PropOdds(_) => Generator::PropOdds,
        }
    }

    fn default_preset(self) -> &'static str {
        match self {
            Generator::Line => "reference",
            Generator::Lagged => "lagged",
            Generator::PropOdds => "scenario_a",
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Applies the preset and overrides and validates the result.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let generator = self.generator.as_deref().map(Generator::parse).transpose()?;
        let preset = match (&self.preset, generator) {
            (Some(p), _) => p.as_str(),
            (None, Some(g)) => g.default_preset(),
            (None, None) => "reference",
        };
        let mut scenario = Scenario::<f64>::preset(preset)?;
        if let Some(g) = generator {
            let found = Generator::of(&scenario);
            match (g, found) {
                (Generator::Lagged, Generator::Line) => scenario.line_params_mut().lagged = true,
                (Generator::Line, Generator::Lagged) => scenario.line_params_mut().lagged = false,
                (a, b) if a == b => {}
                _ => {
                    return Err(Error::Config(format!(
                        "preset '{preset}' does not fit generator '{}'",
                        self.generator.as_deref().unwrap_or_default()
                    )))
                }
            }
        }
        self.apply_overrides(&mut scenario)?;
        scenario.validate()?;

        let alpha = self.alpha.unwrap_or(DEFAULT_ALPHA);
        let methods = match &self.methods {
            Some(list) => list
                .iter()
                .map(|m| MethodSpec::parse(m).map(|s| MethodSpec { alpha, ..s }))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Config(e.to_string()))?,
            None => match scenario {
                Scenario::Line(_) => simulation_panel(),
                Scenario::PropOdds(_) => po_panel(),
            }
            .into_iter()
            .map(|s| MethodSpec { alpha, ..s })
            .collect(),
        };
        if methods.is_empty() {
            return Err(Error::Config("methods must list at least one method".into()));
        }
        for m in &methods {
            MethodSpec::with_alpha(m.method, m.day, m.alpha).map_err(|e| Error::Config(e.to_string()))?;
            m.check_horizon(scenario.horizon_days())
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.n_sims == Some(0) {
            return Err(Error::Config("n_sims must be at least 1".into()));
        }
        Ok(ResolvedConfig {
            scenario,
            methods,
            n_sims: self.n_sims,
            master_seed: self.master_seed,
            output: self.output.clone(),
            text_output: self.text_output.clone(),
        })
    }

    fn apply_overrides(&self, scenario: &mut Scenario<f64>) -> Result<()> {
        let p = scenario.line_params_mut();
        let reals = [
            (&mut p.b0, self.b0),
            (&mut p.b1, self.b1),
            (&mut p.b2, self.b2),
            (&mut p.w, self.w),
            (&mut p.sd_intercept, self.sd_intercept),
            (&mut p.recover_slope_mean, self.recover_slope_mean),
            (&mut p.recover_slope_sd, self.recover_slope_sd),
            (&mut p.death_slope_mean, self.death_slope_mean),
            (&mut p.death_slope_sd, self.death_slope_sd),
            (&mut p.p_death_control, self.p_death_control),
            (&mut p.p_death_treatment, self.p_death_treatment),
            (&mut p.resid_sd, self.resid_sd),
            (&mut p.baseline_offset, self.baseline_offset),
        ];
        for (slot, value) in reals {
            if let Some(v) = value {
                *slot = v;
            }
        }
        if let Some(d) = self.lag_day {
            p.lag_day = d;
        }
        if let Some(m) = &self.lag_mode {
            p.lag_mode = LagMode::parse(m)?;
        }
        if let Some(n) = self.n_per_arm {
            p.n_per_arm = n;
        }
        if let Some(h) = self.horizon_days {
            p.horizon_days = h;
        }
        if let Some(k) = self.categories {
            p.categories = k;
        }
        if let Some(r) = self.recovery_threshold {
            p.recovery_threshold = r;
        }
        let shared = p.clone();
        match scenario {
            Scenario::Line(_) => {
                if self.baseline_probs.is_some() || self.or_schedule.is_some() {
                    return Err(Error::Config(
                        "baseline_probs and or_schedule only apply to the po generator".into(),
                    ));
                }
            }
            Scenario::PropOdds(po) => {
                po.n_per_arm = shared.n_per_arm;
                po.horizon_days = shared.horizon_days;
                po.categories = shared.categories;
                if let Some(b) = &self.baseline_probs {
                    po.baseline_probs = b.clone();
                }
                if let Some(s) = &self.or_schedule {
                    po.or_schedule = OrSchedule::new(s.clone())?;
                }
            }
        }
        Ok(())
    }
}
