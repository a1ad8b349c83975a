//! Endpoint invariants, checked one trajectory at a time.

use endpower::endpoints::{mean_score, time_to_death, time_to_improvement, time_to_recovery};
use endpower::rng::Stream;
use endpower::simgen::absorb_forward;
use endpower::{Arm, Trajectory};

/// A random walk on `1..=K` (K in 3..=9) over 1 to 40 days, absorbed at 1
/// and K, with about a fifth of the days missing. Every eighth trajectory is
/// monotone nonincreasing and complete.
pub fn random_trajectory(stream: &mut Stream, id: usize) -> Trajectory {
    let k = 3 + (stream.uniform() * 7.0) as u16;
    let horizon = 1 + (stream.uniform() * 40.0) as usize;
    let monotone = id % 8 == 0;
    let mut s = 1 + (stream.uniform() * f64::from(k)) as i32;
    let mut scores = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        scores.push(s.clamp(1, i32::from(k)) as u16);
        let step = (stream.uniform() * 5.0) as i32 - 2;
        s += if monotone { -step.abs() } else { step };
    }
    absorb_forward(&mut scores, k);
    let arm = if id % 2 == 0 { Arm::Control } else { Arm::Treatment };
    if monotone {
        return Trajectory::complete(format!("m{id}"), arm, k, &scores).unwrap();
    }
    let obs: Vec<(u32, u16)> = scores
        .iter()
        .enumerate()
        .filter(|_| stream.uniform() > 0.2)
        .map(|(i, &v)| (i as u32 + 1, v))
        .collect();
    Trajectory::from_observations(format!("r{id}"), arm, k, horizon as u32, obs).unwrap()
}

fn same<T: PartialEq + std::fmt::Debug>(what: &str, a: T, b: T) -> Result<(), String> {
    if a == b {
        Ok(())
    } else {
        Err(format!("{what}: {a:?} != {b:?}"))
    }
}

/// Every endpoint of `t` and of `t` cut after its absorbing day agree.
pub fn absorbing_preservation(t: &Trajectory) -> Result<(), String> {
    let Some((day, _)) = t.absorbed_at() else { return Ok(()) };
    let cut = t.truncated_after(day);
    let k = t.categories();
    for thr in 1..k {
        same("recovery", time_to_recovery(t, thr), time_to_recovery(&cut, thr))?;
    }
    for pts in 1..k {
        same("improvement", time_to_improvement(t, pts), time_to_improvement(&cut, pts))?;
    }
    same("death", time_to_death(t), time_to_death(&cut))?;
    for d in 1..=t.horizon() {
        same("score", t.score_at(d), cut.score_at(d))?;
        same("mean", mean_score::<f64>(t, d), mean_score::<f64>(&cut, d))?;
    }
    Ok(())
}

/// A death is never also a recovery, and the recovery clock of a subject who
/// dies is censored at the last observed day.
pub fn death_never_recovers(t: &Trajectory) -> Result<(), String> {
    let death = time_to_death(t);
    for thr in 1..t.categories() {
        let rec = time_to_recovery(t, thr).map_err(|e| e.to_string())?;
        if rec.event && death.event {
            return Err(format!("both recovery and death at threshold {thr}"));
        }
        if death.event && (rec.event || rec.time != t.last_observed_day()) {
            return Err(format!("death on day {} but recovery {rec:?}", death.time));
        }
    }
    Ok(())
}

/// Non-events are censored at the last observed day (at least 1).
pub fn censor_at_last_day(t: &Trajectory) -> Result<(), String> {
    let last = t.last_observed_day().max(1);
    let mut outcomes = vec![time_to_death(t)];
    for thr in 1..t.categories() {
        outcomes.push(time_to_recovery(t, thr).map_err(|e| e.to_string())?);
    }
    for pts in 1..t.categories() {
        if let Ok(o) = time_to_improvement(t, pts) {
            outcomes.push(o);
        }
    }
    for o in outcomes {
        if !o.event && o.time != last {
            return Err(format!("censored at day {} instead of {last}", o.time));
        }
        if o.time == 0 || o.time > t.horizon() {
            return Err(format!("time {} outside 1..={}", o.time, t.horizon()));
        }
    }
    Ok(())
}

/// A stricter (lower) recovery threshold never gives an earlier recovery.
pub fn threshold_monotone(t: &Trajectory) -> Result<(), String> {
    for lo in 1..t.categories() {
        for hi in lo + 1..t.categories() {
            let a = time_to_recovery(t, lo).unwrap();
            let b = time_to_recovery(t, hi).unwrap();
            if a.event && !(b.event && b.time <= a.time) {
                return Err(format!("threshold {lo}: {a:?}, threshold {hi}: {b:?}"));
            }
        }
    }
    Ok(())
}

/// On a complete monotone nonincreasing trajectory, improving by
/// `baseline - threshold` points is recovering.
pub fn improvement_matches_recovery(t: &Trajectory) -> Result<(), String> {
    let complete = (1..=t.horizon()).all(|d| t.recorded(d).is_some());
    let values: Vec<u16> = t.recorded_days().map(|(_, s)| s.value()).collect();
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    if !(complete && monotone) {
        return Ok(());
    }
    let baseline = values[0];
    for thr in 1..t.categories().min(baseline) {
        same(
            "improvement vs recovery",
            time_to_improvement(t, baseline - thr),
            time_to_recovery(t, thr),
        )?;
    }
    Ok(())
}

/// Relabelling the days of a constant trajectory leaves its mean unchanged.
pub fn constant_mean_ignores_day_labels(t: &Trajectory, stream: &mut Stream) -> Result<(), String> {
    let k = t.categories();
    let h = t.horizon();
    if k < 3 {
        return Ok(());
    }
    let c = 2 + (stream.uniform() * f64::from(k - 2)) as u16;
    let mut days: Vec<u32> = (1..=h).filter(|_| stream.uniform() > 0.3).collect();
    if days.is_empty() {
        days.push(1);
    }
    let a = Trajectory::from_observations("c", Arm::Control, k, h, days.iter().map(|&d| (d, c))).unwrap();
    // Reverse the labels within 1..=h.
    let b = Trajectory::from_observations("c", Arm::Control, k, h, days.iter().map(|&d| (h + 1 - d, c))).unwrap();
    same("constant mean", mean_score::<f64>(&a, h), mean_score::<f64>(&b, h))?;
    same("constant value", mean_score::<f64>(&a, h), Ok(f64::from(c)))
}

/// All of the above; the first failure is returned.
pub fn check_all(t: &Trajectory, stream: &mut Stream) -> Result<(), String> {
    absorbing_preservation(t)?;
    death_never_recovers(t)?;
    censor_at_last_day(t)?;
    threshold_monotone(t)?;
    improvement_matches_recovery(t)?;
    constant_mean_ignores_day_labels(t, stream)
}
