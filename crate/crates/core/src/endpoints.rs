//! Endpoint rules: how a trajectory becomes an analyzable outcome.
//!
//! Recovery and improvement are "good" events. A subject who dies first can
//! never recover, so deaths are censored at the last observation day rather
//! than at the day of death; under administrative censoring only this is the
//! same as treating death as a competing risk.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::{Arm, OrdinalScore, SurvivalObservation, Trajectory, TrialView};

fn check_day(traj: &Trajectory, day: u32) -> Result<()> {
    if day == 0 || day > traj.horizon() {
        return Err(Error::invalid(format!("day {day} outside 1..={}", traj.horizon())));
    }
    Ok(())
}

/// Score on `day`, or `None` if the subject has no observation that day.
pub fn score_at_day(traj: &Trajectory, day: u32) -> Result<Option<OrdinalScore>> {
    check_day(traj, day)?;
    Ok(traj.score_at(day))
}

/// Mean of the observed daily scores over days `1..=through_day`.
pub fn mean_score<T: Real>(traj: &Trajectory, through_day: u32) -> Result<T> {
    check_day(traj, through_day)?;
    let (sum, n) = (1..=through_day)
        .filter_map(|d| traj.score_at(d))
        .fold((0u64, 0u64), |(s, n), v| (s + u64::from(v.value()), n + 1));
    if n == 0 {
        return Err(Error::Undefined(format!(
            "subject {} has no observation in days 1..={through_day}",
            traj.subject_id()
        )));
    }
    Ok(T::from_u64(sum).unwrap() / T::from_u64(n).unwrap())
}

/// First day with a score at or below `threshold`; deaths and non-recoverers
/// are censored at the last observation day.
pub fn time_to_recovery(traj: &Trajectory, threshold: u16) -> Result<SurvivalObservation> {
    if threshold == 0 || threshold >= traj.categories() {
        return Err(Error::invalid(format!(
            "recovery threshold {threshold} outside 1..{}",
            traj.categories()
        )));
    }
    Ok(first_good_event(traj, |s| s <= threshold))
}

/// First day with a score at least `k_points` better than baseline (the
/// earliest recorded score). Reaching category 1 always qualifies.
pub fn time_to_improvement(traj: &Trajectory, k_points: u16) -> Result<SurvivalObservation> {
    if k_points == 0 {
        return Err(Error::invalid("improvement must be at least one point"));
    }
    let (_, baseline) = traj.earliest_recorded().ok_or_else(|| {
        Error::Undefined(format!("subject {} has no baseline score", traj.subject_id()))
    })?;
    let target = i32::from(baseline.value()) - i32::from(k_points);
    Ok(first_good_event(traj, |s| s == 1 || i32::from(s) <= target))
}

/// A subject who dies during follow-up never counts as recovered or
/// improved, even after an earlier qualifying day (possible only when the
/// threshold is above the absorbing category).
fn first_good_event(traj: &Trajectory, qualifies: impl Fn(u16) -> bool) -> SurvivalObservation {
    let censored = SurvivalObservation::censored(traj.last_observed_day().max(1));
    if time_to_death(traj).event {
        return censored;
    }
    traj.observed()
        .find(|&(_, s)| qualifies(s.value()))
        .map_or(censored, |(day, _)| SurvivalObservation::event(day))
}

pub fn time_to_death(traj: &Trajectory) -> SurvivalObservation {
    let death = traj.categories();
    traj.observed()
        .find(|&(_, s)| s.value() == death)
        .map(|(day, _)| SurvivalObservation::event(day))
        .unwrap_or_else(|| SurvivalObservation::censored(traj.last_observed_day().max(1)))
}

/// Arm-by-vital-status counts at a given day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MortalityTable {
    pub treatment_dead: u64,
    pub treatment_alive: u64,
    pub control_dead: u64,
    pub control_alive: u64,
}

impl MortalityTable {
    pub fn treatment_n(&self) -> u64 {
        self.treatment_dead + self.treatment_alive
    }

    pub fn control_n(&self) -> u64 {
        self.control_dead + self.control_alive
    }
}

/// A subject counts as dead iff an observed death falls on or before `day`.
pub fn mortality_by_day(view: &TrialView<'_>, day: u32) -> Result<MortalityTable> {
    if day == 0 || day > view.horizon_days {
        return Err(Error::invalid(format!("day {day} outside 1..={}", view.horizon_days)));
    }
    let mut table = MortalityTable::default();
    for arm in [Arm::Control, Arm::Treatment] {
        let dead = view
            .arm(arm)
            .iter()
            .filter(|t| {
                let obs = time_to_death(t);
                obs.event && obs.time <= day
            })
            .count() as u64;
        let alive = view.arm(arm).len() as u64 - dead;
        match arm {
            Arm::Control => {
                table.control_dead = dead;
                table.control_alive = alive;
            }
            Arm::Treatment => {
                table.treatment_dead = dead;
                table.treatment_alive = alive;
            }
        }
    }
    Ok(table)
}
