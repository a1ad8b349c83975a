use crate::dist::normal_quantile;
use crate::error::{Error, Result};

/// Required events and enrolled subjects for a log-rank comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSize {
    pub events: u64,
    pub total_n: u64,
}

// Guards the ceiling against values like 194.00000000000003.
const CEIL_EPS: f64 = 1e-9;

fn ceil_eps(x: f64) -> u64 {
    (x - CEIL_EPS).ceil().max(0.0) as u64
}

/// Schoenfeld approximation for a two-sided level-`alpha` log-rank test.
///
/// `allocation_ratio` is the fraction allocated to treatment; `event_prob`
/// the probability that an enrolled subject contributes an event.
pub fn schoenfeld_sample_size(
    hazard_ratio: f64,
    alpha: f64,
    power: f64,
    event_prob: f64,
    allocation_ratio: f64,
) -> Result<SampleSize> {
    if !(hazard_ratio > 0.0 && hazard_ratio.is_finite()) || hazard_ratio == 1.0 {
        return Err(Error::invalid(format!("hazard ratio must be positive and not 1 (got {hazard_ratio})")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1) (got {alpha})")));
    }
    if !(power > 0.0 && power < 1.0) {
        return Err(Error::invalid(format!("power must lie in (0, 1) (got {power})")));
    }
    if !(event_prob > 0.0 && event_prob <= 1.0) {
        return Err(Error::invalid(format!("event probability must lie in (0, 1] (got {event_prob})")));
    }
    if !(allocation_ratio > 0.0 && allocation_ratio < 1.0) {
        return Err(Error::invalid(format!(
            "allocation ratio must lie in (0, 1) (got {allocation_ratio})"
        )));
    }
    let z = normal_quantile(1.0 - alpha / 2.0) + normal_quantile(power);
    let log_hr = hazard_ratio.ln();
    let raw = z * z / (allocation_ratio * (1.0 - allocation_ratio) * log_hr * log_hr);
    let events = ceil_eps(raw);
    let total_n = ceil_eps(events as f64 / event_prob);
    Ok(SampleSize { events, total_n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planning_example() {
        let s = schoenfeld_sample_size(0.65, 0.05, 0.85, 0.10, 0.5).unwrap();
        assert_eq!(s, SampleSize { events: 194, total_n: 1940 });
    }

    #[test]
    fn inverse_ratio_is_symmetric() {
        let a = schoenfeld_sample_size(0.7, 0.05, 0.8, 1.0, 0.5).unwrap();
        let b = schoenfeld_sample_size(1.0 / 0.7, 0.05, 0.8, 1.0, 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(schoenfeld_sample_size(1.0, 0.05, 0.8, 0.1, 0.5).is_err());
        assert!(schoenfeld_sample_size(0.7, 0.0, 0.8, 0.1, 0.5).is_err());
        assert!(schoenfeld_sample_size(0.7, 0.05, 1.0, 0.1, 0.5).is_err());
        assert!(schoenfeld_sample_size(0.7, 0.05, 0.8, 0.0, 0.5).is_err());
        assert!(schoenfeld_sample_size(0.7, 0.05, 0.8, 0.1, 1.0).is_err());
    }
}
