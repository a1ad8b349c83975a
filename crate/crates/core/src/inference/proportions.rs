//! Tests on 2x2 tables of binary outcomes by arm.

use super::{TestKind, TestResult, CI_ALPHA};
use crate::dist::{clamp_p, ln_choose, two_sided_normal_p, z_two_sided};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pooled-variance z test of `events_t / n_t` vs `events_c / n_c`, without
/// continuity correction. Estimate is the risk difference (treatment minus
/// control) with an unpooled Wald interval.
pub fn two_proportion_test<T: Real>(events_t: u64, n_t: u64, events_c: u64, n_c: u64) -> Result<TestResult<T>> {
    if n_t == 0 || n_c == 0 {
        return Err(Error::Degenerate("two-proportion test needs subjects in both arms".into()));
    }
    if events_t > n_t || events_c > n_c {
        return Err(Error::invalid("more events than subjects"));
    }
    let (nt, nc) = (T::from_u64(n_t).unwrap(), T::from_u64(n_c).unwrap());
    let pt = T::from_u64(events_t).unwrap() / nt;
    let pc = T::from_u64(events_c).unwrap() / nc;
    let pooled = T::from_u64(events_t + events_c).unwrap() / (nt + nc);
    let diff = pt - pc;
    let se0 = (pooled * (T::one() - pooled) * (T::one() / nt + T::one() / nc)).sqrt();
    let z = if se0 > T::zero() { diff / se0 } else { T::zero() };
    let se = (pt * (T::one() - pt) / nt + pc * (T::one() - pc) / nc).sqrt();
    let half = T::lit(z_two_sided(CI_ALPHA)) * se;
    let n_used = (n_t + n_c) as usize;
    Ok(
        TestResult::new(TestKind::TwoProportion, diff, z, two_sided_normal_p(z.as_f64()), n_used)
            .with_ci(diff - half, diff + half),
    )
}

/// Fisher's exact test on `[[a, b], [c, d]]` (rows = arms, columns =
/// outcome). Two-sided p sums every table with the observed margins whose
/// probability does not exceed the observed one. Estimate is the sample odds
/// ratio `ad / bc`.
pub fn fisher_exact<T: Real>(a: u64, b: u64, c: u64, d: u64) -> Result<TestResult<T>> {
    let n = a + b + c + d;
    let (row1, col1) = (a + b, a + c);
    let sample_or = {
        let (num, den) = ((a * d) as f64, (b * c) as f64);
        if den > 0.0 {
            num / den
        } else if num > 0.0 {
            f64::INFINITY
        } else {
            f64::NAN
        }
    };
    let result = |p: f64| TestResult::new(TestKind::FisherExact, T::lit(sample_or), T::lit(a as f64), p, n as usize);
    if row1 == 0 || col1 == 0 || row1 == n || col1 == n {
        return Ok(result(1.0));
    }
    let lo = col1.saturating_sub(n - row1);
    let hi = row1.min(col1);
    let ln_denom = ln_choose(n, col1);
    let ln_prob = |x: u64| ln_choose(row1, x) + ln_choose(n - row1, col1 - x) - ln_denom;
    let observed = ln_prob(a);
    // Relative slack so that tables tied with the observed one in exact
    // arithmetic are not lost to rounding.
    let cutoff = observed + 1e-7_f64.ln_1p();
    let p: f64 = (lo..=hi).map(ln_prob).filter(|&lp| lp <= cutoff).map(f64::exp).sum();
    Ok(result(clamp_p(p)))
}
