//! Two-group log-rank test and Cox proportional hazards with a single
//! treatment indicator.

use super::{TestKind, TestResult, CI_ALPHA};
use crate::dist::{chi2_1_sf, two_sided_normal_p, z_two_sided};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::SurvivalObservation;

const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 40;
const BETA_DIVERGENCE: f64 = 20.0;

/// Handling of tied event times in the Cox partial likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ties {
    #[default]
    Efron,
    Breslow,
}

/// At-risk and event counts at one distinct event time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RiskRow {
    pub time: u32,
    /// At risk in treatment / control (everyone with `time >= self.time`).
    pub at_risk_t: u64,
    pub at_risk_c: u64,
    pub events_t: u64,
    pub events_c: u64,
}

/// Event-time ledger of two arms; subjects censored at `t` remain at risk
/// through `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    pub rows: Vec<RiskRow>,
    pub n_t: u64,
    pub n_c: u64,
}

impl RiskTable {
    pub fn new(treatment: &[SurvivalObservation], control: &[SurvivalObservation]) -> Self {
        let mut all: Vec<(u32, bool, bool)> = treatment
            .iter()
            .map(|o| (o.time, true, o.event))
            .chain(control.iter().map(|o| (o.time, false, o.event)))
            .collect();
        all.sort_unstable_by_key(|x| x.0);
        let (mut at_t, mut at_c) = (treatment.len() as u64, control.len() as u64);
        let mut rows = Vec::new();
        let mut i = 0;
        while i < all.len() {
            let time = all[i].0;
            let mut row = RiskRow {
                time,
                at_risk_t: at_t,
                at_risk_c: at_c,
                events_t: 0,
                events_c: 0,
            };
            while i < all.len() && all[i].0 == time {
                let (_, is_t, event) = all[i];
                if is_t {
                    at_t -= 1;
                    row.events_t += u64::from(event);
                } else {
                    at_c -= 1;
                    row.events_c += u64::from(event);
                }
                i += 1;
            }
            if row.events_t + row.events_c > 0 {
                rows.push(row);
            }
        }
        RiskTable {
            rows,
            n_t: treatment.len() as u64,
            n_c: control.len() as u64,
        }
    }

    pub fn events_t(&self) -> u64 {
        self.rows.iter().map(|r| r.events_t).sum()
    }

    pub fn events_c(&self) -> u64 {
        self.rows.iter().map(|r| r.events_c).sum()
    }

    /// Observed-minus-expected treatment events and hypergeometric variance.
    pub fn log_rank_terms<T: Real>(&self) -> (T, T) {
        let mut o_minus_e = T::zero();
        let mut var = T::zero();
        for r in &self.rows {
            let n1 = T::from_u64(r.at_risk_t).unwrap();
            let n = T::from_u64(r.at_risk_t + r.at_risk_c).unwrap();
            let d = T::from_u64(r.events_t + r.events_c).unwrap();
            o_minus_e += T::from_u64(r.events_t).unwrap() - d * n1 / n;
            if n > T::one() {
                let frac = n1 / n;
                var += d * frac * (T::one() - frac) * (n - d) / (n - T::one());
            }
        }
        (o_minus_e, var)
    }
}

/// Two-group log-rank test, treatment against control.
///
/// `statistic` is the 1-df chi-square; `estimate` is the one-step
/// `exp((O - E) / V)` hazard ratio with its matching interval.
pub fn log_rank<T: Real>(treatment: &[SurvivalObservation], control: &[SurvivalObservation]) -> Result<TestResult<T>> {
    let table = RiskTable::new(treatment, control);
    if table.rows.is_empty() {
        return Err(Error::Undefined("log-rank test needs at least one event".into()));
    }
    let n_used = treatment.len() + control.len();
    let (oe, v) = table.log_rank_terms::<T>();
    if !(v > T::zero()) {
        return Ok(TestResult::new(TestKind::LogRank, T::one(), T::zero(), 1.0, n_used));
    }
    let chi2 = oe * oe / v;
    let log_hr = oe / v;
    let half = T::lit(z_two_sided(CI_ALPHA)) / v.sqrt();
    Ok(
        TestResult::new(TestKind::LogRank, log_hr.exp(), chi2, chi2_1_sf(chi2.as_f64()), n_used)
            .with_ci((log_hr - half).exp(), (log_hr + half).exp()),
    )
}

/// Partial likelihood of `h(t | z) = h0(t) exp(beta z)`, `z = 1` for
/// treatment.
#[derive(Debug, Clone)]
pub struct CoxModel {
    table: RiskTable,
    ties: Ties,
}

/// Converged Cox fit.
#[derive(Debug, Clone, Copy)]
pub struct CoxFit<T> {
    pub beta: T,
    pub se: T,
    pub iterations: usize,
}

impl CoxModel {
    pub fn new(treatment: &[SurvivalObservation], control: &[SurvivalObservation], ties: Ties) -> Self {
        CoxModel {
            table: RiskTable::new(treatment, control),
            ties,
        }
    }

    pub fn table(&self) -> &RiskTable {
        &self.table
    }

    /// Log partial likelihood, score and information at `beta`.
    pub fn evaluate<T: Real>(&self, beta: T) -> (T, T, T) {
        let w = beta.exp();
        let (mut ll, mut score, mut info) = (T::zero(), T::zero(), T::zero());
        for r in &self.table.rows {
            let n1 = T::from_u64(r.at_risk_t).unwrap();
            let n0 = T::from_u64(r.at_risk_c).unwrap();
            let d1 = T::from_u64(r.events_t).unwrap();
            let d0 = T::from_u64(r.events_c).unwrap();
            let d = r.events_t + r.events_c;
            ll += d1 * beta;
            score += d1;
            let risk_num = n1 * w;
            let risk_den = n0 + n1 * w;
            match self.ties {
                Ties::Breslow => {
                    let dt = T::from_u64(d).unwrap();
                    let m = risk_num / risk_den;
                    ll -= dt * risk_den.ln();
                    score -= dt * m;
                    info += dt * (m - m * m);
                }
                Ties::Efron => {
                    let tied_num = d1 * w;
                    let tied_den = d0 + d1 * w;
                    let dt = T::from_u64(d).unwrap();
                    for l in 0..d {
                        let frac = T::from_u64(l).unwrap() / dt;
                        let num = risk_num - frac * tied_num;
                        let den = risk_den - frac * tied_den;
                        let m = num / den;
                        ll -= den.ln();
                        score -= m;
                        info += m - m * m;
                    }
                }
            }
        }
        (ll, score, info)
    }

    pub fn log_partial_likelihood<T: Real>(&self, beta: T) -> T {
        self.evaluate(beta).0
    }

    pub fn score<T: Real>(&self, beta: T) -> T {
        self.evaluate(beta).1
    }

    pub fn information<T: Real>(&self, beta: T) -> T {
        self.evaluate(beta).2
    }

    pub fn fit<T: Real>(&self) -> Result<CoxFit<T>> {
        let (et, ec) = (self.table.events_t(), self.table.events_c());
        if et == 0 || ec == 0 {
            return Err(Error::InfiniteEstimate(format!(
                "no events in the {} arm",
                if et == 0 { "treatment" } else { "control" }
            )));
        }
        let tol = T::score_tolerance();
        let mut beta = T::zero();
        let (mut ll, mut score, mut info) = self.evaluate(beta);
        for iteration in 0..=MAX_ITERATIONS {
            let non_converged = |why: &str| Error::NonConvergence {
                iterations: iteration,
                max_score: score.abs().as_f64(),
                diagnostic: why.to_string(),
            };
            if score.abs() < tol {
                if !(info > T::zero()) {
                    return Err(non_converged("zero information at the optimum"));
                }
                return Ok(CoxFit {
                    beta,
                    se: (T::one() / info).sqrt(),
                    iterations: iteration,
                });
            }
            if iteration == MAX_ITERATIONS {
                return Err(non_converged("iteration limit reached"));
            }
            if !(info > T::zero()) {
                return Err(non_converged("non-positive information"));
            }
            let step = score / info;
            let mut scale = T::one();
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let cand = beta + scale * step;
                let cand_ll = self.log_partial_likelihood(cand);
                if cand_ll.is_finite() && cand_ll >= ll - ll.rounding_slack() {
                    accepted = Some(cand);
                    break;
                }
                scale = scale / T::lit(2.0);
            }
            beta = accepted.ok_or_else(|| non_converged("step halving failed to increase the likelihood"))?;
            if beta.abs() > T::lit(BETA_DIVERGENCE) {
                return Err(non_converged("coefficient diverging (monotone partial likelihood)"));
            }
            (ll, score, info) = self.evaluate(beta);
        }
        unreachable!()
    }
}

/// Cox fit of treatment vs control; estimate is `exp(beta)` with a Wald
/// interval and p-value. With recovery as the event this is the recovery
/// rate ratio, with death the hazard ratio.
pub fn cox_fit<T: Real>(
    treatment: &[SurvivalObservation],
    control: &[SurvivalObservation],
    ties: Ties,
) -> Result<TestResult<T>> {
    let model = CoxModel::new(treatment, control, ties);
    let fit = model.fit::<T>()?;
    let z = fit.beta / fit.se;
    let half = T::lit(z_two_sided(CI_ALPHA)) * fit.se;
    Ok(TestResult::new(
        TestKind::Cox,
        fit.beta.exp(),
        z,
        two_sided_normal_p(z.as_f64()),
        treatment.len() + control.len(),
    )
    .with_ci((fit.beta - half).exp(), (fit.beta + half).exp()))
}

/// Cox rate ratio and interval reported with the log-rank p-value; the Cox
/// Wald p-value is kept in `wald_p_value`.
pub fn time_to_event_test<T: Real>(
    treatment: &[SurvivalObservation],
    control: &[SurvivalObservation],
    ties: Ties,
) -> Result<TestResult<T>> {
    let lr = log_rank::<T>(treatment, control)?;
    let cox = cox_fit::<T>(treatment, control, ties)?;
    Ok(TestResult {
        method: TestKind::CoxWithLogRank,
        statistic: lr.statistic,
        p_value: lr.p_value,
        wald_p_value: Some(cox.p_value),
        ..cox
    })
}
