use rand::seq::index::sample;
use rayon::prelude::*;

use super::method::{evaluate, MethodSpec};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::Real;
use crate::simgen::Scenario;
use crate::trajectory::{Arm, TrialDataset, TrialView};

/// Rejection rate of one method over a set of replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub spec: MethodSpec,
    pub rejections: u64,
    pub rejection_rate: f64,
    pub mc_se: f64,
    pub n_sims: u64,
    /// Replicates where the test was undefined or did not converge; they
    /// count as non-rejections.
    pub n_degenerate: u64,
}

impl PowerRow {
    fn from_counts(spec: MethodSpec, rejections: u64, degenerate: u64, n_sims: u64) -> Self {
        let r = rejections as f64 / n_sims as f64;
        PowerRow {
            spec,
            rejections,
            rejection_rate: r,
            mc_se: (r * (1.0 - r) / n_sims as f64).sqrt(),
            n_sims,
            n_degenerate: degenerate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    pub fn row(&self, label: &str) -> Option<&PowerRow> {
        self.rows.iter().find(|r| r.spec.label() == label)
    }
}

/// Per-replicate outcome flags, two bits per method.
#[derive(Clone)]
struct Tally {
    rejections: Vec<u64>,
    degenerate: Vec<u64>,
}

impl Tally {
    fn zero(m: usize) -> Self {
        Tally {
            rejections: vec![0; m],
            degenerate: vec![0; m],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.rejections.iter_mut().zip(&other.rejections) {
            *a += b;
        }
        for (a, b) in self.degenerate.iter_mut().zip(&other.degenerate) {
            *a += b;
        }
        self
    }

    fn record<T: Real>(methods: &[MethodSpec], view: &TrialView<'_>) -> Tally {
        let mut t = Tally::zero(methods.len());
        for (i, spec) in methods.iter().enumerate() {
            match evaluate::<T>(spec, view) {
                Ok(r) if r.p_value.as_f64() < spec.alpha => t.rejections[i] += 1,
                Ok(_) => {}
                Err(_) => t.degenerate[i] += 1,
            }
        }
        t
    }

    fn into_table(self, methods: &[MethodSpec], n: u64) -> PowerTable {
        PowerTable {
            rows: methods
                .iter()
                .enumerate()
                .map(|(i, spec)| PowerRow::from_counts(*spec, self.rejections[i], self.degenerate[i], n))
                .collect(),
        }
    }
}

/// Runs `f` on a pool of `workers` threads (rayon's default when `None`).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::invalid("workers must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn check_methods(methods: &[MethodSpec], horizon: u32) -> Result<()> {
    methods.iter().try_for_each(|m| m.check_horizon(horizon))
}

/// Monte Carlo power: `n_sims` trials from `scenario`, every method on
/// each. Replicate `r` draws all its randomness from `(master_seed, r)`, so
/// the table does not depend on the number of workers.
pub fn run_power_study<T: Real>(
    scenario: &Scenario<T>,
    methods: &[MethodSpec],
    n_sims: u64,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<PowerTable> {
    if n_sims == 0 {
        return Err(Error::invalid("n_sims must be at least 1"));
    }
    scenario.validate()?;
    check_methods(methods, scenario.horizon_days())?;
    let m = methods.len();
    let tally = with_workers(workers, || {
        (0..n_sims)
            .into_par_iter()
            .map(|rep| {
                let data = scenario.generate(master_seed, rep)?;
                Ok(Tally::record::<T>(methods, &data.view()))
            })
            .try_reduce(|| Tally::zero(m), |a, b| Ok(a.merge(b)))
    })??;
    Ok(tally.into_table(methods, n_sims))
}

/// Empirical power by subsampling: each replicate draws `n_per_arm`
/// subjects from each arm without replacement.
pub fn resample_power<T: Real>(
    dataset: &TrialDataset,
    n_per_arm: usize,
    n_reps: u64,
    methods: &[MethodSpec],
    master_seed: u64,
    workers: Option<usize>,
) -> Result<PowerTable> {
    if n_reps == 0 {
        return Err(Error::invalid("n_reps must be at least 1"));
    }
    if n_per_arm == 0 {
        return Err(Error::invalid("n_per_arm must be at least 1"));
    }
    let full = dataset.view();
    for arm in [Arm::Control, Arm::Treatment] {
        let size = full.arm(arm).len();
        if size < n_per_arm {
            return Err(Error::invalid(format!(
                "{arm:?} arm has {size} subjects, fewer than the {n_per_arm} requested"
            )));
        }
    }
    check_methods(methods, dataset.horizon_days())?;
    let m = methods.len();
    let tally = with_workers(workers, || {
        (0..n_reps)
            .into_par_iter()
            .map(|rep| {
                let mut stream = Stream::replicate(master_seed, rep);
                let mut pick = |arm: Arm| {
                    let pool = full.arm(arm);
                    if n_per_arm == pool.len() {
                        return pool.to_vec();
                    }
                    let mut idx = sample(stream.rng(), pool.len(), n_per_arm).into_vec();
                    idx.sort_unstable();
                    idx.into_iter().map(|i| pool[i]).collect()
                };
                let control = pick(Arm::Control);
                let treatment = pick(Arm::Treatment);
                let view = TrialView {
                    control,
                    treatment,
                    ..full.clone()
                };
                Tally::record::<T>(methods, &view)
            })
            .reduce(|| Tally::zero(m), Tally::merge)
    })?;
    Ok(tally.into_table(methods, n_reps))
}
