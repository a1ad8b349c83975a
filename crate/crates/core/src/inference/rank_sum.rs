//! Wilcoxon rank-sum (Mann-Whitney) test with mid-ranks for ties.

use super::{TestKind, TestResult};
use crate::dist::{clamp_p, two_sided_normal_p};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smaller-arm size at which the normal approximation takes over.
pub const NORMAL_APPROX_MIN_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankSumMethod {
    /// Exact below [`NORMAL_APPROX_MIN_N`] per arm, normal otherwise.
    #[default]
    Auto,
    Exact,
    Normal,
}

/// Doubled mid-ranks of the pooled sample `x ++ y` (integers, so tied ranks
/// stay exact).
fn doubled_midranks<T: Real>(x: &[T], y: &[T]) -> (Vec<u64>, Vec<u64>) {
    let n = x.len() + y.len();
    let mut idx: Vec<(T, usize)> = x.iter().chain(y).copied().zip(0..).collect();
    idx.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("rank sum inputs must not be NaN"));
    let mut ranks = vec![0u64; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && idx[j + 1].0 == idx[i].0 {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1; doubled mean is i+j+2
        for item in &idx[i..=j] {
            ranks[item.1] = (i + j + 2) as u64;
        }
        ties.push((j - i + 1) as u64);
        i = j + 1;
    }
    (ranks, ties)
}

pub fn wilcoxon_rank_sum<T: Real>(x: &[T], y: &[T]) -> Result<TestResult<T>> {
    wilcoxon_rank_sum_with(x, y, RankSumMethod::Auto)
}

/// Two-sided rank-sum test of `x` (treatment) against `y` (control).
///
/// `statistic` is the standardized rank sum of `x`; `estimate` is
/// `P(X > Y) + P(X = Y) / 2`, the Mann-Whitney U scaled to [0, 1].
pub fn wilcoxon_rank_sum_with<T: Real>(x: &[T], y: &[T], method: RankSumMethod) -> Result<TestResult<T>> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Degenerate("rank-sum test needs both samples non-empty".into()));
    }
    let (nx, ny) = (x.len(), y.len());
    let n = nx + ny;
    let (ranks, ties) = doubled_midranks(x, y);
    let w2: u64 = ranks[..nx].iter().sum();
    // Doubled expectation nx (N + 1).
    let e2 = (nx * (n + 1)) as u64;
    let centered2 = w2 as f64 - e2 as f64;

    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = (nx * ny) as f64 / 12.0 * ((n + 1) as f64 - tie_term / (n as f64 * (n as f64 - 1.0)));
    // All-tied samples leave only rounding noise in the variance.
    let var = if var > 1e-9 * (nx * ny) as f64 { var } else { 0.0 };
    let z = if var > 0.0 { centered2 / 2.0 / var.sqrt() } else { 0.0 };

    let u = w2 as f64 / 2.0 - (nx * (nx + 1)) as f64 / 2.0;
    let estimate = u / (nx * ny) as f64;

    let exact = match method {
        RankSumMethod::Exact => true,
        RankSumMethod::Normal => false,
        RankSumMethod::Auto => nx.min(ny) < NORMAL_APPROX_MIN_N,
    };
    let p = if var == 0.0 {
        1.0
    } else if exact {
        // |W - E| is the same for either arm; enumerate over the smaller one.
        if nx <= ny {
            exact_two_sided(&ranks, nx, w2, e2)
        } else {
            let wy2: u64 = ranks[nx..].iter().sum();
            exact_two_sided(&ranks, ny, wy2, (ny * (n + 1)) as u64)
        }
    } else {
        two_sided_normal_p(z)
    };
    Ok(TestResult::new(TestKind::WilcoxonRankSum, T::lit(estimate), T::lit(z), p, n))
}

/// `P(|W - E| >= |w - E|)` under random allocation of `m` of the pooled
/// doubled ranks, by dynamic programming over (subset size, rank sum).
fn exact_two_sided(ranks: &[u64], m: usize, w2: u64, e2: u64) -> f64 {
    let total: u64 = {
        let mut sorted = ranks.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        sorted[..m].iter().sum()
    };
    let width = total as usize + 1;
    // ways[k][s]: number of k-subsets of the ranks seen so far with sum s.
    let mut ways = vec![vec![0.0f64; width]; m + 1];
    ways[0][0] = 1.0;
    for (seen, &r) in ranks.iter().enumerate() {
        let r = r as usize;
        for k in (1..=m.min(seen + 1)).rev() {
            let (lower, upper) = ways.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for s in (r..width).rev() {
                let v = prev[s - r];
                if v != 0.0 {
                    cur[s] += v;
                }
            }
        }
    }
    let dist = &ways[m];
    let all: f64 = dist.iter().sum();
    let obs = w2.abs_diff(e2);
    let extreme: f64 = dist
        .iter()
        .enumerate()
        .filter(|&(s, &c)| c != 0.0 && (s as u64).abs_diff(e2) >= obs)
        .map(|(_, &c)| c)
        .sum();
    clamp_p(extreme / all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_small_example() {
        let r = wilcoxon_rank_sum(&[1.0_f64, 2.0], &[3.0, 4.0]).unwrap();
        assert_relative_eq!(r.p_value, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn identical_samples() {
        let x = [3.0_f64, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0];
        for m in [RankSumMethod::Exact, RankSumMethod::Normal] {
            let r = wilcoxon_rank_sum_with(&x, &x, m).unwrap();
            assert_eq!(r.statistic, 0.0);
            assert_relative_eq!(r.p_value, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn all_tied_values() {
        let r = wilcoxon_rank_sum(&[2.0_f64; 12], &[2.0; 15]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn normal_mode_matches_hand_computation() {
        // Ranks of x: 1..10 in a sample of 20 with no ties.
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = (11..=20).map(f64::from).collect();
        let r = wilcoxon_rank_sum(&x, &y).unwrap();
        let w = 55.0;
        let e = 10.0 * 21.0 / 2.0;
        let sd = (100.0 * 21.0 / 12.0_f64).sqrt();
        assert_relative_eq!(r.statistic, (w - e) / sd, epsilon = 1e-12);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(wilcoxon_rank_sum::<f64>(&[], &[1.0]).is_err());
    }
}
