use crate::endpoints::time_to_recovery;
use crate::error::{Error, Result};
use crate::trajectory::TrialDataset;

/// Every subject repeated `factor` times as `id#1`, ..., `id#factor`.
pub fn augment_dataset(dataset: &TrialDataset, factor: usize) -> Result<TrialDataset> {
    if factor < 2 {
        return Err(Error::invalid(format!("augmentation factor must be at least 2, got {factor}")));
    }
    let trajectories = dataset
        .trajectories()
        .iter()
        .flat_map(|t| (1..=factor).map(move |j| t.with_subject_id(format!("{}#{j}", t.subject_id()))))
        .collect();
    TrialDataset::new(
        trajectories,
        dataset.horizon_days(),
        dataset.categories(),
        dataset.recovery_threshold(),
    )
}

/// What an analysis at a calendar cutoff would see under staggered entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InformationSnapshot {
    /// Subjects with entry day `<= cutoff`.
    pub n_enrolled: usize,
    /// Enrolled subjects followed for the whole horizon by the cutoff.
    pub n_with_full_followup: usize,
    /// Recovery events already observed by the cutoff.
    pub n_events_observed: usize,
}

/// Counts at calendar day `cutoff` when subject `i` entered on
/// `entry_days[i]` and is followed for `cutoff - entry` days.
pub fn information_snapshot(dataset: &TrialDataset, cutoff: u32, entry_days: &[u32]) -> Result<InformationSnapshot> {
    if entry_days.len() != dataset.len() {
        return Err(Error::invalid(format!(
            "{} entry days for {} subjects",
            entry_days.len(),
            dataset.len()
        )));
    }
    let threshold = dataset.recovery_threshold();
    let mut snap = InformationSnapshot::default();
    for (t, &entry) in dataset.trajectories().iter().zip(entry_days) {
        if entry > cutoff {
            continue;
        }
        let followed = cutoff - entry;
        snap.n_enrolled += 1;
        if followed >= dataset.horizon_days() {
            snap.n_with_full_followup += 1;
        }
        let obs = time_to_recovery(t, threshold)?;
        if obs.event && obs.time <= followed {
            snap.n_events_observed += 1;
        }
    }
    Ok(snap)
}
