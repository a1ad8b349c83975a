//! Subjects, their daily ordinal trajectories, and trials made of them.

use std::num::NonZeroU16;

use crate::error::{Error, Result};

/// Category on a K-point ordinal scale; 1 is the best outcome (recovered) and
/// K is death.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrdinalScore(NonZeroU16);

impl OrdinalScore {
    pub fn new(value: u16, categories: u16) -> Result<Self> {
        if categories < 2 {
            return Err(Error::invalid(format!("scale needs at least 2 categories, got {categories}")));
        }
        if value == 0 || value > categories {
            return Err(Error::invalid(format!("score {value} outside 1..={categories}")));
        }
        Ok(OrdinalScore(NonZeroU16::new(value).unwrap()))
    }

    #[inline]
    pub fn value(self) -> u16 {
        self.0.get()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    Control,
    Treatment,
}

impl Arm {
    pub fn indicator(self) -> u8 {
        match self {
            Arm::Control => 0,
            Arm::Treatment => 1,
        }
    }

    pub fn from_indicator(z: u8) -> Option<Arm> {
        match z {
            0 => Some(Arm::Control),
            1 => Some(Arm::Treatment),
            _ => None,
        }
    }
}

/// Time-to-event outcome derived from a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SurvivalObservation {
    /// Day of the event or of censoring, at least 1.
    pub time: u32,
    /// `true` if the event occurred at `time`, `false` if censored there.
    pub event: bool,
}

impl SurvivalObservation {
    pub fn event(time: u32) -> Self {
        SurvivalObservation { time, event: true }
    }

    pub fn censored(time: u32) -> Self {
        SurvivalObservation { time, event: false }
    }
}

/// One subject's daily scores over days `1..=horizon`.
///
/// Days may be missing (ingested data). Categories 1 and K are absorbing:
/// an unrecorded day after the first recorded absorbing day reads as the
/// absorbing category, and such a trajectory counts as followed to the
/// horizon. Recorded values are never altered, so a relapse in real data is
/// visible through [`Trajectory::relapse_day`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    subject_id: String,
    arm: Arm,
    categories: u16,
    scores: Vec<Option<OrdinalScore>>,
    absorbed: Option<(u32, OrdinalScore)>,
}

impl Trajectory {
    fn build(subject_id: String, arm: Arm, categories: u16, scores: Vec<Option<OrdinalScore>>) -> Self {
        let absorbed = scores.iter().enumerate().find_map(|(i, s)| match s {
            Some(s) if s.value() == 1 || s.value() == categories => Some((i as u32 + 1, *s)),
            _ => None,
        });
        Trajectory {
            subject_id,
            arm,
            categories,
            scores,
            absorbed,
        }
    }

    /// Complete trajectory; `scores[d - 1]` is the score on day `d`.
    pub fn complete(subject_id: impl Into<String>, arm: Arm, categories: u16, scores: &[u16]) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::invalid("trajectory needs at least one day"));
        }
        let scores = scores
            .iter()
            .map(|&s| OrdinalScore::new(s, categories).map(Some))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::build(subject_id.into(), arm, categories, scores))
    }

    /// Trajectory from `(day, score)` observations on a `horizon`-day grid.
    pub fn from_observations(
        subject_id: impl Into<String>,
        arm: Arm,
        categories: u16,
        horizon: u32,
        observations: impl IntoIterator<Item = (u32, u16)>,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::invalid("horizon must be at least one day"));
        }
        let mut scores = vec![None; horizon as usize];
        for (day, value) in observations {
            if day == 0 || day > horizon {
                return Err(Error::invalid(format!("day {day} outside 1..={horizon}")));
            }
            let slot = &mut scores[day as usize - 1];
            if slot.is_some() {
                return Err(Error::invalid(format!("day {day} recorded twice")));
            }
            *slot = Some(OrdinalScore::new(value, categories)?);
        }
        Ok(Self::build(subject_id.into(), arm, categories, scores))
    }

    pub(crate) fn from_raw_unchecked(subject_id: String, arm: Arm, categories: u16, raw: &[u16]) -> Self {
        let scores = raw
            .iter()
            .map(|&s| Some(OrdinalScore(NonZeroU16::new(s).expect("score >= 1"))))
            .collect();
        Self::build(subject_id, arm, categories, scores)
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn arm(&self) -> Arm {
        self.arm
    }

    pub fn categories(&self) -> u16 {
        self.categories
    }

    pub fn horizon(&self) -> u32 {
        self.scores.len() as u32
    }

    pub fn with_subject_id(&self, subject_id: impl Into<String>) -> Self {
        Trajectory {
            subject_id: subject_id.into(),
            ..self.clone()
        }
    }

    /// Score recorded on `day`, with no absorbing fill.
    pub fn recorded(&self, day: u32) -> Option<OrdinalScore> {
        self.scores.get(day.checked_sub(1)? as usize).copied().flatten()
    }

    pub fn recorded_days(&self) -> impl Iterator<Item = (u32, OrdinalScore)> + '_ {
        self.scores
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (i as u32 + 1, s)))
    }

    /// First recorded day in an absorbing category, with that category.
    pub fn absorbed_at(&self) -> Option<(u32, OrdinalScore)> {
        self.absorbed
    }

    /// Score on `day`: the recorded value, or the absorbing category when the
    /// day is unrecorded and falls after absorption.
    pub fn score_at(&self, day: u32) -> Option<OrdinalScore> {
        if let Some(s) = self.recorded(day) {
            return Some(s);
        }
        match self.absorbed_at() {
            Some((d, s)) if d < day && day <= self.horizon() => Some(s),
            _ => None,
        }
    }

    /// Last day the subject's state is known.
    pub fn last_observed_day(&self) -> u32 {
        if self.absorbed_at().is_some() {
            return self.horizon();
        }
        self.recorded_days().last().map_or(0, |(d, _)| d)
    }

    /// Days `1..=last_observed_day` with their (fill-aware) scores.
    pub fn observed(&self) -> impl Iterator<Item = (u32, OrdinalScore)> + '_ {
        (1..=self.last_observed_day()).filter_map(move |d| self.score_at(d).map(|s| (d, s)))
    }

    pub fn earliest_recorded(&self) -> Option<(u32, OrdinalScore)> {
        self.recorded_days().next()
    }

    /// First recorded day on which the score is worse than on some earlier day
    /// where the subject had already reached `threshold` or better.
    pub fn relapse_day(&self, threshold: u16) -> Option<u32> {
        let mut reached = false;
        for (day, s) in self.recorded_days() {
            if reached && s.value() > threshold {
                return Some(day);
            }
            if s.value() <= threshold {
                reached = true;
            }
        }
        None
    }

    /// Copy of the trajectory with every day after `day` unrecorded.
    pub fn truncated_after(&self, day: u32) -> Trajectory {
        let scores = self
            .scores
            .iter()
            .enumerate()
            .map(|(i, s)| if i as u32 + 1 > day { None } else { *s })
            .collect();
        Self::build(self.subject_id.clone(), self.arm, self.categories, scores)
    }
}

/// A two-arm trial on a common scale and follow-up grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDataset {
    trajectories: Vec<Trajectory>,
    horizon_days: u32,
    categories: u16,
    recovery_threshold: u16,
}

impl TrialDataset {
    pub fn new(trajectories: Vec<Trajectory>, horizon_days: u32, categories: u16, recovery_threshold: u16) -> Result<Self> {
        if categories < 2 {
            return Err(Error::invalid("scale needs at least 2 categories"));
        }
        if recovery_threshold == 0 || recovery_threshold >= categories {
            return Err(Error::invalid(format!(
                "recovery threshold {recovery_threshold} outside 1..{categories}"
            )));
        }
        for t in &trajectories {
            if t.categories() != categories || t.horizon() != horizon_days {
                return Err(Error::invalid(format!(
                    "subject {} is on a {}-category/{}-day grid, dataset uses {categories}/{horizon_days}",
                    t.subject_id(),
                    t.categories(),
                    t.horizon()
                )));
            }
        }
        Ok(TrialDataset {
            trajectories,
            horizon_days,
            categories,
            recovery_threshold,
        })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn horizon_days(&self) -> u32 {
        self.horizon_days
    }

    pub fn categories(&self) -> u16 {
        self.categories
    }

    pub fn recovery_threshold(&self) -> u16 {
        self.recovery_threshold
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn arm(&self, arm: Arm) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.iter().filter(move |t| t.arm() == arm)
    }

    pub fn arm_size(&self, arm: Arm) -> usize {
        self.arm(arm).count()
    }

    /// Borrowed per-arm view, the form every analysis runs on.
    pub fn view(&self) -> TrialView<'_> {
        TrialView {
            control: self.arm(Arm::Control).collect(),
            treatment: self.arm(Arm::Treatment).collect(),
            horizon_days: self.horizon_days,
            categories: self.categories,
            recovery_threshold: self.recovery_threshold,
        }
    }
}

/// Per-arm borrowed subjects of a trial (or of a subsample of one).
#[derive(Debug, Clone)]
pub struct TrialView<'a> {
    pub control: Vec<&'a Trajectory>,
    pub treatment: Vec<&'a Trajectory>,
    pub horizon_days: u32,
    pub categories: u16,
    pub recovery_threshold: u16,
}

impl<'a> TrialView<'a> {
    pub fn arm(&self, arm: Arm) -> &[&'a Trajectory] {
        match arm {
            Arm::Control => &self.control,
            Arm::Treatment => &self.treatment,
        }
    }

    pub fn require_both_arms(&self) -> Result<()> {
        if self.control.is_empty() || self.treatment.is_empty() {
            return Err(Error::Degenerate(format!(
                "both arms must be non-empty (control {}, treatment {})",
                self.control.len(),
                self.treatment.len()
            )));
        }
        Ok(())
    }
}
