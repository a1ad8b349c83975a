//! Trajectories whose arms differ by a common odds ratio on every day.

use rayon::prelude::*;

use super::line::{absorb_forward, scores_from_draws, subject_label, LineDraws};
use super::params::POScenarioParams;
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::Real;
use crate::trajectory::{Arm, TrialDataset, Trajectory};

/// Cumulative probability `C` of "category <= k" after multiplying its odds
/// by `or`.
fn shift_cumulative<T: Real>(c: T, or: T) -> T {
    if c >= T::one() {
        return T::one();
    }
    or * c / (T::one() + (or - T::one()) * c)
}

/// Shifts `probs` (best category first) so that every cumulative odds is
/// multiplied by `odds_ratio`. `odds_ratio > 1` moves mass toward better
/// categories.
pub fn po_shift<T: Real>(probs: &[T], odds_ratio: T) -> Result<Vec<T>> {
    if !(odds_ratio > T::zero() && odds_ratio.is_finite()) {
        return Err(Error::invalid(format!("odds ratio must be positive, got {odds_ratio}")));
    }
    if probs.is_empty() || probs.iter().any(|p| !(*p >= T::zero())) {
        return Err(Error::invalid("probabilities must be non-negative"));
    }
    let total: f64 = probs.iter().map(|p| p.as_f64()).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
    }
    let mut out = Vec::with_capacity(probs.len());
    let (mut cum, mut prev) = (T::zero(), T::zero());
    for (k, &p) in probs.iter().enumerate() {
        cum += p;
        let shifted = if k + 1 == probs.len() {
            T::one()
        } else {
            shift_cumulative(cum, odds_ratio)
        };
        out.push(shifted - prev);
        prev = shifted;
    }
    Ok(out)
}

struct NullSubject<T> {
    scores: Vec<u16>,
    latent: T,
}

fn draw_null_subject<T: Real>(params: &POScenarioParams<T>, baseline_cum: &[T], stream: &mut Stream) -> NullSubject<T> {
    let shared = &params.shared_dynamics;
    let u_base = T::lit(stream.uniform());
    let baseline = baseline_cum.iter().position(|&c| u_base < c).unwrap_or(baseline_cum.len() - 1) + 1;
    let frac = T::lit(stream.uniform());
    let mut line = LineDraws::draw(shared, Arm::Control, stream);
    // The day-1 level is the drawn baseline category plus a uniform
    // fraction, so that flooring on day 1 returns the baseline.
    line.intercept = T::from_usize(baseline).unwrap() + frac - shared.b0 - shared.baseline_offset;
    let latent = T::lit(stream.uniform());
    let noise: Vec<T> = if shared.w == T::zero() {
        Vec::new()
    } else {
        (0..params.horizon_days)
            .map(|_| shared.resid_sd * T::lit(stream.std_normal()))
            .collect()
    };
    NullSubject {
        scores: scores_from_draws(shared, Arm::Control, &line, &noise),
        latent,
    }
}

/// Cumulative distribution (index `k - 1` is `P(score <= k)`) of `day`
/// across `subjects`.
fn pooled_cumulative<T: Real>(subjects: &[NullSubject<T>], day: usize, categories: usize) -> Vec<T> {
    let mut counts = vec![0usize; categories];
    for s in subjects {
        counts[s.scores[day] as usize - 1] += 1;
    }
    let n = T::from_usize(subjects.len()).unwrap();
    let mut cum = T::zero();
    let mut acc = 0usize;
    counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            acc += c;
            cum = if k + 1 == categories {
                T::one()
            } else {
                T::from_usize(acc).unwrap() / n
            };
            cum
        })
        .collect()
}

/// A trial in which, on every day, the treatment marginal is the pooled
/// null marginal shifted by that day's odds ratio.
///
/// All `2 n` subjects are first drawn from the shared null law. Control
/// subjects are kept as drawn. Each treatment subject carries one latent
/// uniform `v`; on day `d` its null score `s` is placed at rank
/// `F(s-1) + v (F(s) - F(s-1))` of the pooled day-`d` distribution `F` and
/// mapped to the category of the shifted distribution holding that rank.
/// Absorption is re-applied to the mapped trajectory.
pub fn gen_trial_po<T: Real>(params: &POScenarioParams<T>, master_seed: u64, replicate: u64) -> Result<TrialDataset> {
    params.validate()?;
    let n = params.n_per_arm;
    let k = params.categories as usize;
    let ors = params.or_schedule.expand(params.horizon_days)?;
    let baseline_cum: Vec<T> = params
        .baseline_probs
        .iter()
        .scan(T::zero(), |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect();

    let subjects: Vec<NullSubject<T>> = (0..2 * n)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| draw_null_subject(params, &baseline_cum, &mut Stream::subject(master_seed, replicate, i as u64)))
        .collect();

    let maps: Vec<Option<(Vec<T>, Vec<T>)>> = ors
        .iter()
        .enumerate()
        .map(|(d, &or)| {
            (or != T::one()).then(|| {
                let f = pooled_cumulative(&subjects, d, k);
                let g = f.iter().map(|&c| shift_cumulative(c, or)).collect();
                (f, g)
            })
        })
        .collect();

    let trajectories = subjects
        .par_iter()
        .enumerate()
        .with_min_len(64)
        .map(|(i, s)| {
            let (arm, id) = subject_label(i, n);
            if arm == Arm::Control {
                return Trajectory::from_raw_unchecked(id, arm, params.categories, &s.scores);
            }
            let mut scores = s.scores.clone();
            for (day, map) in maps.iter().enumerate() {
                if let Some((f, g)) = map {
                    let cat = scores[day] as usize;
                    let lo = if cat == 1 { T::zero() } else { f[cat - 2] };
                    let rank = lo + s.latent * (f[cat - 1] - lo);
                    scores[day] = (g.iter().position(|&c| rank < c).unwrap_or(k - 1) + 1) as u16;
                }
            }
            absorb_forward(&mut scores, params.categories);
            Trajectory::from_raw_unchecked(id, arm, params.categories, &scores)
        })
        .collect();
    TrialDataset::new(
        trajectories,
        params.horizon_days,
        params.categories,
        params.shared_dynamics.recovery_threshold,
    )
}
