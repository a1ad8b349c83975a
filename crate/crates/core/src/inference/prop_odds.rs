//! Cumulative-logit (proportional odds) model with one binary treatment
//! covariate, fitted by Newton-Raphson on the grouped likelihood.
//!
//! `P(Y <= j | z) = logistic(alpha_j + beta * z)` for the `K' - 1` cutpoints
//! between observed categories, `z = 1` for treatment. Positive `beta` puts
//! more treatment mass on better (lower) categories, so `exp(beta) > 1`
//! favours treatment.

use super::linalg::Square;
use super::{TestKind, TestResult, CI_ALPHA};
use crate::dist::{two_sided_normal_p, z_two_sided};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 40;
/// Beyond this |beta| the likelihood is treated as monotone.
const BETA_DIVERGENCE: f64 = 30.0;

#[derive(Debug, Clone)]
pub struct ProportionalOddsModel<T> {
    /// Observed categories in increasing (worsening) order.
    categories: Vec<u16>,
    /// Counts per observed category: `[control, treatment]`.
    counts: [Vec<T>; 2],
    n: usize,
}

/// Converged fit.
#[derive(Debug, Clone)]
pub struct ProportionalOddsFit<T> {
    /// `[alpha_1, .., alpha_J, beta]`.
    pub params: Vec<T>,
    pub se_beta: T,
    pub iterations: usize,
    pub log_likelihood: T,
}

impl<T: Real> ProportionalOddsFit<T> {
    pub fn beta(&self) -> T {
        *self.params.last().unwrap()
    }
}

#[inline]
fn logistic<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Value, first and second derivative of the logistic CDF at `x`.
#[inline]
fn cdf_terms<T: Real>(x: T) -> (T, T, T) {
    let f = logistic(x);
    let d = f * (T::one() - f);
    (f, d, d * (T::one() - f - f))
}

impl<T: Real> ProportionalOddsModel<T> {
    pub fn new(control: &[u16], treatment: &[u16]) -> Result<Self> {
        if control.is_empty() || treatment.is_empty() {
            return Err(Error::Degenerate("proportional odds needs both arms non-empty".into()));
        }
        let mut categories: Vec<u16> = control.iter().chain(treatment).copied().collect();
        categories.sort_unstable();
        categories.dedup();
        if categories.len() < 2 {
            return Err(Error::Degenerate(format!(
                "only one observed category ({})",
                categories[0]
            )));
        }
        let tally = |xs: &[u16]| {
            let mut c = vec![T::zero(); categories.len()];
            for x in xs {
                let i = categories.binary_search(x).unwrap();
                c[i] += T::one();
            }
            c
        };
        Ok(ProportionalOddsModel {
            counts: [tally(control), tally(treatment)],
            categories,
            n: control.len() + treatment.len(),
        })
    }

    pub fn observed_categories(&self) -> &[u16] {
        &self.categories
    }

    /// Number of parameters, `K' - 1` cutpoints plus the treatment effect.
    pub fn n_params(&self) -> usize {
        self.categories.len()
    }

    fn cutpoints(&self) -> usize {
        self.categories.len() - 1
    }

    fn ordered(&self, theta: &[T]) -> bool {
        theta[..self.cutpoints()].windows(2).all(|w| w[0] < w[1]) && theta.iter().all(|v| v.is_finite())
    }

    /// Log-likelihood; `-inf` if the cutpoints are not strictly increasing.
    pub fn log_likelihood(&self, theta: &[T]) -> T {
        self.evaluate(theta, false).0
    }

    /// Score vector (gradient of the log-likelihood).
    pub fn gradient(&self, theta: &[T]) -> Vec<T> {
        self.evaluate(theta, true).1
    }

    /// Observed information (negative Hessian of the log-likelihood).
    pub fn information(&self, theta: &[T]) -> Vec<Vec<T>> {
        let (_, _, info) = self.evaluate(theta, true);
        let p = self.n_params();
        (0..p).map(|i| (0..p).map(|j| info.at(i, j)).collect()).collect()
    }

    fn evaluate(&self, theta: &[T], derivatives: bool) -> (T, Vec<T>, Square<T>) {
        let np = self.n_params();
        let cuts = self.cutpoints();
        let beta_idx = cuts;
        let mut grad = vec![T::zero(); np];
        let mut info = Square::zeros(np);
        if theta.len() != np || !self.ordered(theta) {
            return (T::neg_infinity(), grad, info);
        }
        let beta = theta[beta_idx];
        let mut ll = T::zero();
        for (arm, counts) in self.counts.iter().enumerate() {
            let z = if arm == 1 { T::one() } else { T::zero() };
            for (j, &n) in counts.iter().enumerate() {
                if n == T::zero() {
                    continue;
                }
                let (f_up, d_up, dd_up) = if j < cuts {
                    cdf_terms(theta[j] + beta * z)
                } else {
                    (T::one(), T::zero(), T::zero())
                };
                let (f_lo, d_lo, dd_lo) = if j > 0 {
                    cdf_terms(theta[j - 1] + beta * z)
                } else {
                    (T::zero(), T::zero(), T::zero())
                };
                let p = f_up - f_lo;
                if !(p > T::zero()) {
                    return (T::neg_infinity(), grad, info);
                }
                ll += n * p.ln();
                if !derivatives {
                    continue;
                }
                // Non-zero entries of dp/dtheta and d2p/dtheta2.
                let mut g: [(usize, T); 3] = [(usize::MAX, T::zero()); 3];
                let mut k = 0;
                if j < cuts {
                    g[k] = (j, d_up);
                    k += 1;
                }
                if j > 0 {
                    g[k] = (j - 1, -d_lo);
                    k += 1;
                }
                g[k] = (beta_idx, z * (d_up - d_lo));
                k += 1;
                let second = |a: usize, b: usize| -> T {
                    let mut h = T::zero();
                    if j < cuts {
                        let up = j;
                        let ua = a == up || a == beta_idx;
                        let ub = b == up || b == beta_idx;
                        if ua && ub {
                            let za = if a == beta_idx { z } else { T::one() };
                            let zb = if b == beta_idx { z } else { T::one() };
                            h += za * zb * dd_up;
                        }
                    }
                    if j > 0 {
                        let lo = j - 1;
                        let la = a == lo || a == beta_idx;
                        let lb = b == lo || b == beta_idx;
                        if la && lb {
                            let za = if a == beta_idx { z } else { T::one() };
                            let zb = if b == beta_idx { z } else { T::one() };
                            h -= za * zb * dd_lo;
                        }
                    }
                    h
                };
                for &(a, ga) in &g[..k] {
                    grad[a] += n * ga / p;
                    for &(b, gb) in &g[..k] {
                        let h = second(a, b);
                        // information = -(H/p - g g^T / p^2)
                        info.add(a, b, n * (ga * gb / (p * p) - h / p));
                    }
                }
            }
        }
        (ll, grad, info)
    }

    fn initial(&self) -> Vec<T> {
        let cuts = self.cutpoints();
        let total: T = self.counts[0].iter().chain(&self.counts[1]).copied().sum();
        let mut theta = Vec::with_capacity(cuts + 1);
        let mut cum = T::zero();
        for j in 0..cuts {
            cum += self.counts[0][j] + self.counts[1][j];
            let c = cum / total;
            theta.push((c / (T::one() - c)).ln());
        }
        theta.push(T::zero());
        theta
    }

    /// Separation: every treatment response strictly better than every
    /// control response, or the reverse.
    fn separated(&self) -> bool {
        let first = |c: &[T]| c.iter().position(|&v| v > T::zero()).unwrap();
        let last = |c: &[T]| c.iter().rposition(|&v| v > T::zero()).unwrap();
        last(&self.counts[1]) <= first(&self.counts[0]) || last(&self.counts[0]) <= first(&self.counts[1])
    }

    pub fn fit(&self) -> Result<ProportionalOddsFit<T>> {
        if self.separated() {
            return Err(Error::NonConvergence {
                iterations: 0,
                max_score: 0.0,
                diagnostic: "separation: the arms overlap in at most one category".into(),
            });
        }
        let tol = T::score_tolerance();
        let beta_idx = self.cutpoints();
        let mut theta = self.initial();
        let (mut ll, mut grad, mut info) = self.evaluate(&theta, true);
        for iteration in 0..=MAX_ITERATIONS {
            let max_score = grad.iter().fold(T::zero(), |m, g| m.max(g.abs()));
            if max_score < tol {
                let se2 = info
                    .inverse_column(beta_idx)
                    .map(|c| c[beta_idx])
                    .filter(|v| *v > T::zero() && v.is_finite())
                    .ok_or_else(|| Error::NonConvergence {
                        iterations: iteration,
                        max_score: max_score.as_f64(),
                        diagnostic: "information matrix is singular at the optimum".into(),
                    })?;
                return Ok(ProportionalOddsFit {
                    params: theta,
                    se_beta: se2.sqrt(),
                    iterations: iteration,
                    log_likelihood: ll,
                });
            }
            let non_converged = |why: &str| Error::NonConvergence {
                iterations: iteration,
                max_score: max_score.as_f64(),
                diagnostic: why.to_string(),
            };
            if iteration == MAX_ITERATIONS {
                return Err(non_converged("iteration limit reached"));
            }
            let step = info.solve(&grad).ok_or_else(|| non_converged("singular information matrix"))?;
            let mut scale = T::one();
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let cand: Vec<T> = theta.iter().zip(&step).map(|(t, s)| *t + scale * *s).collect();
                let cand_ll = self.log_likelihood(&cand);
                if cand_ll.is_finite() && cand_ll >= ll - ll.rounding_slack() {
                    accepted = Some(cand);
                    break;
                }
                scale = scale / T::lit(2.0);
            }
            theta = accepted.ok_or_else(|| non_converged("step halving failed to increase the likelihood"))?;
            if theta[beta_idx].abs() > T::lit(BETA_DIVERGENCE) {
                return Err(non_converged("treatment coefficient diverging (monotone likelihood)"));
            }
            (ll, grad, info) = self.evaluate(&theta, true);
        }
        unreachable!()
    }
}

/// Proportional odds test of treatment vs control scores.
///
/// Estimate is the common odds ratio of a better category for treatment,
/// with a Wald interval and p-value from the observed information.
pub fn fit_proportional_odds<T: Real>(treatment: &[u16], control: &[u16]) -> Result<TestResult<T>> {
    let model = ProportionalOddsModel::<T>::new(control, treatment)?;
    let fit = model.fit()?;
    let beta = fit.beta();
    let z = beta / fit.se_beta;
    let crit = T::lit(z_two_sided(CI_ALPHA));
    Ok(TestResult::new(
        TestKind::ProportionalOdds,
        beta.exp(),
        z,
        two_sided_normal_p(z.as_f64()),
        model.n,
    )
    .with_ci((beta - crit * fit.se_beta).exp(), (beta + crit * fit.se_beta).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rep(v: u16, n: usize) -> Vec<u16> {
        vec![v; n]
    }

    #[test]
    fn identical_arms_give_unit_odds_ratio() {
        let arm: Vec<u16> = [rep(1, 10), rep(3, 20), rep(5, 7), rep(7, 3)].concat();
        let r = fit_proportional_odds::<f64>(&arm, &arm).unwrap();
        assert_relative_eq!(r.estimate, 1.0, epsilon = 1e-10);
        assert!(r.statistic.abs() < 1e-10);
        assert_relative_eq!(r.p_value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn two_categories_reduce_to_log_odds_ratio() {
        let treatment = [rep(1, 30), rep(2, 20)].concat();
        let control = [rep(1, 20), rep(2, 30)].concat();
        let model = ProportionalOddsModel::<f64>::new(&control, &treatment).unwrap();
        let fit = model.fit().unwrap();
        assert_relative_eq!(fit.beta().exp(), 2.25, epsilon = 1e-9);
        let se = (1.0 / 30.0 + 1.0 / 20.0 + 1.0 / 20.0 + 1.0 / 30.0_f64).sqrt();
        assert_relative_eq!(fit.se_beta, se, epsilon = 1e-8);
        assert!((se - 0.408).abs() < 5e-4);
    }

    #[test]
    fn collapses_empty_categories() {
        let treatment = [rep(2, 30), rep(6, 20)].concat();
        let control = [rep(2, 20), rep(6, 30)].concat();
        let r = fit_proportional_odds::<f64>(&treatment, &control).unwrap();
        assert_relative_eq!(r.estimate, 2.25, epsilon = 1e-9);
    }

    #[test]
    fn single_category_is_degenerate() {
        assert!(matches!(
            fit_proportional_odds::<f64>(&rep(3, 5), &rep(3, 4)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn separation_is_reported_not_panicked() {
        let r = fit_proportional_odds::<f64>(&rep(5, 10), &rep(2, 10));
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn zero_cell_two_category_diverges_cleanly() {
        let treatment = [rep(1, 10), rep(2, 5)].concat();
        let control = rep(2, 15);
        let r = fit_proportional_odds::<f64>(&treatment, &control);
        assert!(matches!(r, Err(Error::NonConvergence { .. })), "{r:?}");
    }

    #[test]
    fn swapping_arms_inverts_odds_ratio() {
        let a = [rep(1, 12), rep(2, 9), rep(4, 14), rep(7, 5)].concat();
        let b = [rep(1, 7), rep(2, 11), rep(4, 13), rep(7, 9)].concat();
        let r1 = fit_proportional_odds::<f64>(&a, &b).unwrap();
        let r2 = fit_proportional_odds::<f64>(&b, &a).unwrap();
        assert_relative_eq!(r1.estimate * r2.estimate, 1.0, epsilon = 1e-9);
        assert_relative_eq!(r1.p_value, r2.p_value, epsilon = 1e-12);
    }

    #[test]
    fn f32_agrees_with_f64() {
        let a = [rep(1, 12), rep(2, 9), rep(4, 14), rep(7, 5)].concat();
        let b = [rep(1, 17), rep(2, 11), rep(4, 10), rep(7, 2)].concat();
        let r64 = fit_proportional_odds::<f64>(&a, &b).unwrap();
        let r32 = fit_proportional_odds::<f32>(&a, &b).unwrap();
        assert!((r64.estimate - r32.estimate as f64).abs() < 1e-3);
    }
}
