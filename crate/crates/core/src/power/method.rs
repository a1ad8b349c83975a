use std::fmt;

use crate::endpoints::{mean_score, mortality_by_day, time_to_death, time_to_improvement, time_to_recovery};
use crate::error::{Error, Result};
use crate::inference::{
    cox_fit, fisher_exact, fit_proportional_odds, log_rank, t_test, time_to_event_test, two_proportion_test,
    wilcoxon_rank_sum, TTestVariant, TestResult, Ties,
};
use crate::scalar::Real;
use crate::trajectory::{SurvivalObservation, Trajectory, TrialView};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// The analyses the power engine can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Proportional odds on the scores of one day.
    PropOdds,
    /// Welch t-test on one day's scores, or on the mean score without a day.
    TTest,
    /// Rank-sum test on each subject's mean score through the day (default:
    /// horizon).
    WilcoxonMeanScore,
    /// Pooled z test on mortality by the day (default: horizon).
    TwoProportionMortality,
    FisherMortality,
    /// Log-rank p-value with the Cox rate ratio as estimate.
    LogRankRecovery,
    LogRankImprovement { k: u16 },
    /// Cox model with Wald p-value.
    CoxRecovery,
    CoxImprovement { k: u16 },
    CoxDeath,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PropOdds => "prop_odds",
            Method::TTest => "t_test",
            Method::WilcoxonMeanScore => "wilcoxon_mean_score",
            Method::TwoProportionMortality => "two_proportion_mortality",
            Method::FisherMortality => "fisher_mortality",
            Method::LogRankRecovery => "log_rank_recovery",
            Method::LogRankImprovement { .. } => "log_rank_improvement",
            Method::CoxRecovery => "cox_recovery",
            Method::CoxImprovement { .. } => "cox_improvement",
            Method::CoxDeath => "cox_death",
        }
    }

    fn improvement_points(self) -> Option<u16> {
        match self {
            Method::LogRankImprovement { k } | Method::CoxImprovement { k } => Some(k),
            _ => None,
        }
    }

    fn requires_day(self) -> bool {
        matches!(self, Method::PropOdds)
    }

    fn accepts_day(self) -> bool {
        matches!(
            self,
            Method::PropOdds
                | Method::TTest
                | Method::WilcoxonMeanScore
                | Method::TwoProportionMortality
                | Method::FisherMortality
        )
    }
}

/// A method, its day where applicable, and the two-sided level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    pub day: Option<u32>,
    pub alpha: f64,
}

impl MethodSpec {
    pub fn new(method: Method, day: Option<u32>) -> Result<Self> {
        Self::with_alpha(method, day, DEFAULT_ALPHA)
    }

    pub fn with_alpha(method: Method, day: Option<u32>, alpha: f64) -> Result<Self> {
        if method.requires_day() && day.is_none() {
            return Err(Error::invalid(format!("{} needs a day", method.name())));
        }
        if day.is_some() && !method.accepts_day() {
            return Err(Error::invalid(format!("{} does not take a day", method.name())));
        }
        if day == Some(0) {
            return Err(Error::invalid("days start at 1"));
        }
        if method.improvement_points() == Some(0) {
            return Err(Error::invalid("improvement needs k >= 1"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(MethodSpec { method, day, alpha })
    }

    /// Parses `name[:k][@day]`, e.g. `prop_odds@14` or `cox_improvement:2`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, day) = match s.split_once('@') {
            Some((h, d)) => (
                h,
                Some(d.parse::<u32>().map_err(|_| Error::invalid(format!("bad day in method '{s}'")))?),
            ),
            None => (s, None),
        };
        let (name, k) = match head.split_once(':') {
            Some((n, k)) => (
                n,
                Some(k.parse::<u16>().map_err(|_| Error::invalid(format!("bad k in method '{s}'")))?),
            ),
            None => (head, None),
        };
        let method = match (name, k) {
            ("prop_odds", None) => Method::PropOdds,
            ("t_test", None) => Method::TTest,
            ("wilcoxon_mean_score", None) => Method::WilcoxonMeanScore,
            ("two_proportion_mortality", None) => Method::TwoProportionMortality,
            ("fisher_mortality", None) => Method::FisherMortality,
            ("log_rank_recovery", None) => Method::LogRankRecovery,
            ("log_rank_improvement", Some(k)) => Method::LogRankImprovement { k },
            ("cox_recovery", None) => Method::CoxRecovery,
            ("cox_improvement", Some(k)) => Method::CoxImprovement { k },
            ("cox_death", None) => Method::CoxDeath,
            ("log_rank_improvement" | "cox_improvement", None) => {
                return Err(Error::invalid(format!("method '{name}' needs ':k'")))
            }
            (_, Some(_)) => return Err(Error::invalid(format!("method '{name}' does not take ':k'"))),
            _ => return Err(Error::invalid(format!("unknown method '{name}'"))),
        };
        Self::new(method, day)
    }

    /// Checks the day against a follow-up horizon.
    pub fn check_horizon(&self, horizon: u32) -> Result<()> {
        match self.day {
            Some(d) if d > horizon => Err(Error::invalid(format!("{self}: day {d} is past the horizon {horizon}"))),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.method.name())?;
        if let Some(k) = self.method.improvement_points() {
            write!(f, ":{k}")?;
        }
        if let Some(d) = self.day {
            write!(f, "@{d}")?;
        }
        Ok(())
    }
}

fn specs(list: &[(Method, Option<u32>)]) -> Vec<MethodSpec> {
    list.iter()
        .map(|&(m, d)| MethodSpec::new(m, d).expect("built-in panels are valid"))
        .collect()
}

/// The simulation battery: proportional odds on days 1, 7, 14 and 28, rank
/// test on the mean score, Cox models for 2-point improvement, recovery
/// and death, and the day-28 mortality z test.
pub fn simulation_panel() -> Vec<MethodSpec> {
    specs(&[
        (Method::PropOdds, Some(1)),
        (Method::PropOdds, Some(7)),
        (Method::PropOdds, Some(14)),
        (Method::PropOdds, Some(28)),
        (Method::WilcoxonMeanScore, None),
        (Method::CoxImprovement { k: 2 }, None),
        (Method::CoxRecovery, None),
        (Method::CoxDeath, None),
        (Method::TwoProportionMortality, Some(28)),
    ])
}

/// Battery for the proportional-odds generator.
pub fn po_panel() -> Vec<MethodSpec> {
    specs(&[
        (Method::PropOdds, Some(14)),
        (Method::PropOdds, Some(28)),
        (Method::LogRankRecovery, None),
        (Method::WilcoxonMeanScore, None),
    ])
}

/// Days of the fixed-day rows of the data-analysis panel.
pub const ANALYSIS_DAYS: [u32; 7] = [3, 5, 7, 10, 14, 21, 28];

/// Full panel for a patient-level dataset: proportional odds and t-tests on
/// each of [`ANALYSIS_DAYS`] within the horizon, the t-test on the all-days
/// average, time-to-event analyses and mortality.
pub fn analysis_panel(horizon: u32) -> Vec<MethodSpec> {
    let days: Vec<u32> = ANALYSIS_DAYS.iter().copied().filter(|&d| d <= horizon).collect();
    let mut list: Vec<(Method, Option<u32>)> = days.iter().map(|&d| (Method::PropOdds, Some(d))).collect();
    list.extend(days.iter().map(|&d| (Method::TTest, Some(d))));
    list.extend([
        (Method::TTest, None),
        (Method::WilcoxonMeanScore, None),
        (Method::LogRankRecovery, None),
        (Method::LogRankImprovement { k: 1 }, None),
        (Method::LogRankImprovement { k: 2 }, None),
        (Method::CoxDeath, None),
        (Method::FisherMortality, Some(horizon)),
        (Method::TwoProportionMortality, Some(horizon)),
    ]);
    specs(&list)
}

fn scores_on(arm: &[&Trajectory], day: u32) -> Vec<u16> {
    arm.iter().filter_map(|t| t.score_at(day)).map(|s| s.value()).collect()
}

fn means<T: Real>(arm: &[&Trajectory], through: u32) -> Vec<T> {
    // Subjects with nothing observed in the window drop out.
    arm.iter().filter_map(|t| mean_score::<T>(t, through).ok()).collect()
}

fn survival(arm: &[&Trajectory], rule: impl Fn(&Trajectory) -> Result<SurvivalObservation>) -> Vec<SurvivalObservation> {
    arm.iter().filter_map(|t| rule(t).ok()).collect()
}

/// Runs one method on a trial. Errors mean the test is undefined for this
/// data (no events, separation, empty arm, ...).
pub fn evaluate<T: Real>(spec: &MethodSpec, view: &TrialView<'_>) -> Result<TestResult<T>> {
    view.require_both_arms()?;
    spec.check_horizon(view.horizon_days)?;
    let (trt, ctl) = (&view.treatment[..], &view.control[..]);
    let horizon = view.horizon_days;
    let threshold = view.recovery_threshold;
    match spec.method {
        Method::PropOdds => {
            let day = spec.day.expect("validated");
            fit_proportional_odds::<T>(&scores_on(trt, day), &scores_on(ctl, day)).map(|r| r.at_day(day))
        }
        Method::TTest => {
            let (x, y): (Vec<T>, Vec<T>) = match spec.day {
                Some(day) => (
                    scores_on(trt, day).into_iter().map(|v| T::from_u16(v).unwrap()).collect(),
                    scores_on(ctl, day).into_iter().map(|v| T::from_u16(v).unwrap()).collect(),
                ),
                None => (means(trt, horizon), means(ctl, horizon)),
            };
            let r = t_test(&x, &y, TTestVariant::Welch)?;
            Ok(match spec.day {
                Some(d) => r.at_day(d),
                None => r,
            })
        }
        Method::WilcoxonMeanScore => {
            let through = spec.day.unwrap_or(horizon);
            wilcoxon_rank_sum(&means::<T>(trt, through), &means::<T>(ctl, through)).map(|r| r.at_day(through))
        }
        Method::TwoProportionMortality | Method::FisherMortality => {
            let day = spec.day.unwrap_or(horizon);
            let m = mortality_by_day(view, day)?;
            let deaths = m.treatment_dead + m.control_dead;
            if deaths == 0 || deaths == m.treatment_n() + m.control_n() {
                return Err(Error::Degenerate(format!("mortality by day {day} is constant across subjects")));
            }
            let r = if spec.method == Method::FisherMortality {
                fisher_exact(m.treatment_dead, m.treatment_alive, m.control_dead, m.control_alive)?
            } else {
                two_proportion_test(m.treatment_dead, m.treatment_n(), m.control_dead, m.control_n())?
            };
            Ok(r.at_day(day))
        }
        Method::LogRankRecovery | Method::LogRankImprovement { .. } | Method::CoxRecovery | Method::CoxImprovement { .. } | Method::CoxDeath => {
            let rule = |t: &Trajectory| match spec.method {
                Method::LogRankRecovery | Method::CoxRecovery => time_to_recovery(t, threshold),
                Method::LogRankImprovement { k } | Method::CoxImprovement { k } => time_to_improvement(t, k),
                _ => Ok(time_to_death(t)),
            };
            let (t_obs, c_obs) = (survival(trt, rule), survival(ctl, rule));
            match spec.method {
                Method::CoxRecovery | Method::CoxImprovement { .. } | Method::CoxDeath => {
                    cox_fit(&t_obs, &c_obs, Ties::Efron)
                }
                // An infinite Cox estimate still leaves a valid log-rank test.
                _ => time_to_event_test(&t_obs, &c_obs, Ties::Efron).or_else(|_| log_rank(&t_obs, &c_obs)),
            }
        }
    }
}
