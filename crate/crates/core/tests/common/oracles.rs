//! Brute-force reference computations, written independently of the crate.

use endpower::SurvivalObservation;

/// Two-sided permutation p-value of the rank-sum statistic by listing every
/// assignment of the pooled values to an `x` sample of the same size.
pub fn wilcoxon_permutation_p(x: &[f64], y: &[f64]) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let n = pooled.len();
    // Doubled mid-ranks keep every rank sum an integer.
    let rank2: Vec<i64> = pooled
        .iter()
        .map(|&v| {
            let below = pooled.iter().filter(|&&w| w < v).count() as i64;
            let equal = pooled.iter().filter(|&&w| w == v).count() as i64;
            2 * below + equal + 1
        })
        .collect();
    let m = x.len();
    let centre2 = (m * (n + 1)) as i64;
    let observed = (rank2[..m].iter().sum::<i64>() - centre2).abs();
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let s: i64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| rank2[i]).sum();
        total += 1;
        if (s - centre2).abs() >= observed {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

fn choose(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Fisher's two-sided p for `[[a, b], [c, d]]`: the total hypergeometric
/// probability of tables with the same margins that are no more likely than
/// the observed one, compared in exact integer arithmetic.
pub fn fisher_enumeration_p(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let (r1, r2, c1) = (a + b, c + d, a + c);
    let weight = |x: u64| choose(r1, x) * choose(r2, c1 - x);
    let observed = weight(a);
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let total: u128 = (lo..=hi).map(weight).sum();
    let extreme: u128 = (lo..=hi).map(weight).filter(|&w| w <= observed).sum();
    extreme as f64 / total as f64
}

/// Log odds ratio (treatment vs control, odds of the better category) and
/// its standard error for a two-category outcome.
pub fn two_by_two_log_or(t_better: u64, t_worse: u64, c_better: u64, c_worse: u64) -> (f64, f64) {
    let [a, b, c, d] = [t_better, t_worse, c_better, c_worse].map(|v| v as f64);
    ((a * d / (b * c)).ln(), (1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d).sqrt())
}

/// Breslow log partial likelihood, summed subject by subject.
pub fn cox_log_partial_likelihood(t: &[SurvivalObservation], c: &[SurvivalObservation], beta: f64) -> f64 {
    let all: Vec<(SurvivalObservation, f64)> = t
        .iter()
        .map(|&o| (o, 1.0))
        .chain(c.iter().map(|&o| (o, 0.0)))
        .collect();
    all.iter()
        .filter(|(o, _)| o.event)
        .map(|(o, z)| {
            let risk: f64 = all
                .iter()
                .filter(|(p, _)| p.time >= o.time)
                .map(|(_, zp)| (beta * zp).exp())
                .sum();
            beta * z - risk.ln()
        })
        .sum()
}

/// Maximizer of the partial likelihood by repeated grid refinement on
/// [-10, 10].
pub fn cox_grid_beta(t: &[SurvivalObservation], c: &[SurvivalObservation]) -> f64 {
    let (mut lo, mut hi) = (-10.0f64, 10.0f64);
    while hi - lo > 1e-10 {
        let step = (hi - lo) / 100.0;
        let best = (0..=100)
            .map(|i| lo + step * f64::from(i))
            .map(|b| (b, cox_log_partial_likelihood(t, c, b)))
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        lo = best.0 - step;
        hi = best.0 + step;
    }
    0.5 * (lo + hi)
}

/// Log-rank observed-minus-expected treatment events and hypergeometric
/// variance, one distinct event time at a time.
pub fn log_rank_o_minus_e(t: &[SurvivalObservation], c: &[SurvivalObservation]) -> (f64, f64) {
    let mut times: Vec<u32> = t.iter().chain(c).filter(|o| o.event).map(|o| o.time).collect();
    times.sort_unstable();
    times.dedup();
    let (mut oe, mut v) = (0.0, 0.0);
    for &s in &times {
        let at_risk = |xs: &[SurvivalObservation]| xs.iter().filter(|o| o.time >= s).count() as f64;
        let events = |xs: &[SurvivalObservation]| xs.iter().filter(|o| o.event && o.time == s).count() as f64;
        let (n1, n) = (at_risk(t), at_risk(t) + at_risk(c));
        let (d1, d) = (events(t), events(t) + events(c));
        oe += d1 - d * n1 / n;
        if n > 1.0 {
            v += d * (n1 / n) * (1.0 - n1 / n) * (n - d) / (n - 1.0);
        }
    }
    (oe, v)
}

/// Central difference of `f` at `x` with step `h`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Relative error with an absolute floor of 1 on the scale.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
