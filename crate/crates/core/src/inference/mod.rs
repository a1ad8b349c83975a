//! Two-arm tests and estimators.
//!
//! Every test takes the treatment arm first. Ratios are oriented so that a
//! value above 1 favours treatment for "good" events (recovery, better
//! ordinal category) and means higher hazard for death.

mod linalg;
pub mod prop_odds;
pub mod proportions;
pub mod rank_sum;
pub mod sample_size;
pub mod survival;

pub use prop_odds::{fit_proportional_odds, ProportionalOddsModel};
pub use proportions::{fisher_exact, two_proportion_test};
pub use rank_sum::{wilcoxon_rank_sum, wilcoxon_rank_sum_with, RankSumMethod};
pub use sample_size::{schoenfeld_sample_size, SampleSize};
pub use survival::{cox_fit, log_rank, time_to_event_test, CoxModel, RiskTable, Ties};
pub use t_test::{t_test, TTestVariant};

use crate::scalar::Real;

/// Which procedure produced a [`TestResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    ProportionalOdds,
    WilcoxonRankSum,
    WelchT,
    PooledT,
    TwoProportion,
    FisherExact,
    LogRank,
    Cox,
    /// Cox estimate and interval reported with the log-rank p-value.
    CoxWithLogRank,
}

impl TestKind {
    pub fn tag(self) -> &'static str {
        match self {
            TestKind::ProportionalOdds => "proportional_odds",
            TestKind::WilcoxonRankSum => "wilcoxon_rank_sum",
            TestKind::WelchT => "welch_t",
            TestKind::PooledT => "pooled_t",
            TestKind::TwoProportion => "two_proportion",
            TestKind::FisherExact => "fisher_exact",
            TestKind::LogRank => "log_rank",
            TestKind::Cox => "cox",
            TestKind::CoxWithLogRank => "cox_log_rank",
        }
    }
}

/// Estimate, interval, statistic and p-value of one test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult<T> {
    pub method: TestKind,
    /// Odds ratio, mean or risk difference, rate ratio or hazard ratio.
    pub estimate: T,
    /// Two-sided 95% interval, when the method defines one.
    pub ci: Option<(T, T)>,
    pub statistic: T,
    pub p_value: T,
    pub n_used: usize,
    pub day: Option<u32>,
    /// Wald p-value kept alongside a log-rank `p_value`.
    pub wald_p_value: Option<T>,
}

impl<T: Real> TestResult<T> {
    pub(crate) fn new(method: TestKind, estimate: T, statistic: T, p_value: f64, n_used: usize) -> Self {
        TestResult {
            method,
            estimate,
            ci: None,
            statistic,
            p_value: T::lit(p_value),
            n_used,
            day: None,
            wald_p_value: None,
        }
    }

    pub(crate) fn with_ci(mut self, lo: T, hi: T) -> Self {
        self.ci = Some((lo, hi));
        self
    }

    pub fn at_day(mut self, day: u32) -> Self {
        self.day = Some(day);
        self
    }

    pub fn rejects(&self, alpha: T) -> bool {
        self.p_value < alpha
    }
}

/// Critical value used for every reported interval.
pub(crate) const CI_ALPHA: f64 = 0.05;
