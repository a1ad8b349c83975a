//! Random-line ("line of destiny") trajectories.

use rayon::prelude::*;

use super::params::{LagMode, ScenarioParams};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::{floor_clamp, Real};
use crate::trajectory::{Arm, TrialDataset, Trajectory};

/// Subject-level random effects of the line model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineDraws<T> {
    /// `b0`, already including its N(0, sd_intercept^2) draw.
    pub intercept: T,
    /// `b1` for the subject's own arm.
    pub slope: T,
    /// `b1` the same subject would have had in the control arm; used only by
    /// the corrected lag mode.
    pub control_slope: T,
}

impl<T: Real> LineDraws<T> {
    pub fn fixed(intercept: T, slope: T) -> Self {
        LineDraws {
            intercept,
            slope,
            control_slope: slope,
        }
    }

    /// Draws `b0`, then one uniform for the death component and one normal
    /// for the slope. The same two numbers give the subject's slope under
    /// either arm, so lowering the death probability only moves subjects
    /// from the death component to the recovery component.
    pub fn draw(params: &ScenarioParams<T>, arm: Arm, stream: &mut Stream) -> Self {
        let intercept = params.sd_intercept * T::lit(stream.std_normal());
        let u = T::lit(stream.uniform());
        let z = T::lit(stream.std_normal());
        let slope_given = |p: T| {
            if u < p {
                params.death_slope_mean + params.death_slope_sd * z
            } else {
                params.recover_slope_mean + params.recover_slope_sd * z
            }
        };
        LineDraws {
            intercept,
            slope: slope_given(params.p_death(arm == Arm::Treatment)),
            control_slope: slope_given(params.p_death_control),
        }
    }
}

/// Replaces every day after the first 1 or `categories` with that value.
pub fn absorb_forward(scores: &mut [u16], categories: u16) {
    if let Some(first) = scores.iter().position(|&s| s == 1 || s == categories) {
        let v = scores[first];
        scores[first..].fill(v);
    }
}

/// Daily scores for fixed random effects. `noise` holds the per-day `e_d`
/// (already scaled by `resid_sd`); an empty slice means no noise.
pub fn scores_from_draws<T: Real>(params: &ScenarioParams<T>, arm: Arm, draws: &LineDraws<T>, noise: &[T]) -> Vec<u16> {
    let z = T::from_u8(arm.indicator()).unwrap();
    let level = params.b0 + params.baseline_offset + draws.intercept;
    let lag = params.lag_day;
    let mut scores: Vec<u16> = (1..=params.horizon_days)
        .map(|d| {
            let ln_d = T::from_u32(d).unwrap().ln();
            let ln_lag = if d > lag { T::from_u32(d - lag).unwrap().ln() } else { T::zero() };
            let mut y = level + params.b1 * ln_d;
            if !params.lagged {
                y += params.b2 * z * ln_d + draws.slope * ln_d;
            } else {
                match params.lag_mode {
                    LagMode::Literal => y += (params.b2 + draws.slope) * z * ln_lag,
                    LagMode::Corrected => {
                        y += draws.control_slope * ln_d + (params.b2 + draws.slope - draws.control_slope) * z * ln_lag
                    }
                }
            }
            if let Some(&e) = noise.get(d as usize - 1) {
                y += params.w * e;
            }
            floor_clamp(y, 1, params.categories)
        })
        .collect();
    absorb_forward(&mut scores, params.categories);
    scores
}

fn draw_noise<T: Real>(params: &ScenarioParams<T>, stream: &mut Stream) -> Vec<T> {
    if params.w == T::zero() {
        return Vec::new();
    }
    (0..params.horizon_days)
        .map(|_| params.resid_sd * T::lit(stream.std_normal()))
        .collect()
}

fn gen_scores<T: Real>(params: &ScenarioParams<T>, arm: Arm, stream: &mut Stream) -> Vec<u16> {
    let draws = LineDraws::draw(params, arm, stream);
    let noise = draw_noise(params, stream);
    scores_from_draws(params, arm, &draws, &noise)
}

fn check_mode(params: &ScenarioParams<impl Real>, lagged: bool) -> Result<()> {
    if params.lagged != lagged {
        return Err(Error::invalid(if lagged {
            "lagged generator called with lagged = false"
        } else {
            "unlagged generator called with lagged = true"
        }));
    }
    Ok(())
}

/// One subject from the unlagged model.
pub fn gen_trajectory_eq1<T: Real>(
    params: &ScenarioParams<T>,
    arm: Arm,
    subject_id: impl Into<String>,
    stream: &mut Stream,
) -> Result<Trajectory> {
    check_mode(params, false)?;
    let scores = gen_scores(params, arm, stream);
    Ok(Trajectory::from_raw_unchecked(subject_id.into(), arm, params.categories, &scores))
}

/// One subject from the lagged model, in `params.lag_mode`.
pub fn gen_trajectory_lagged<T: Real>(
    params: &ScenarioParams<T>,
    arm: Arm,
    subject_id: impl Into<String>,
    stream: &mut Stream,
) -> Result<Trajectory> {
    check_mode(params, true)?;
    let scores = gen_scores(params, arm, stream);
    Ok(Trajectory::from_raw_unchecked(subject_id.into(), arm, params.categories, &scores))
}

/// Subject `index` of a two-arm trial: control occupies `0..n`, treatment
/// `n..2n`.
pub(crate) fn subject_label(index: usize, n_per_arm: usize) -> (Arm, String) {
    if index < n_per_arm {
        (Arm::Control, format!("C{:04}", index + 1))
    } else {
        (Arm::Treatment, format!("T{:04}", index - n_per_arm + 1))
    }
}

/// A full trial from the line model (lagged or not, per `params.lagged`).
/// Subject `i` reads stream `(master_seed, replicate, i)`.
pub fn gen_trial_eq1<T: Real>(params: &ScenarioParams<T>, master_seed: u64, replicate: u64) -> Result<TrialDataset> {
    params.validate()?;
    let n = params.n_per_arm;
    let trajectories: Vec<Trajectory> = (0..2 * n)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            let (arm, id) = subject_label(i, n);
            let mut stream = Stream::subject(master_seed, replicate, i as u64);
            let scores = gen_scores(params, arm, &mut stream);
            Trajectory::from_raw_unchecked(id, arm, params.categories, &scores)
        })
        .collect();
    TrialDataset::new(trajectories, params.horizon_days, params.categories, params.recovery_threshold)
}
