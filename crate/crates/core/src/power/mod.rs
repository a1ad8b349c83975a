//! Monte Carlo and resampling power.

mod augment;
mod method;
mod study;

pub use augment::{augment_dataset, information_snapshot, InformationSnapshot};
pub use method::{
    analysis_panel, evaluate, po_panel, simulation_panel, Method, MethodSpec, ANALYSIS_DAYS, DEFAULT_ALPHA,
};
pub use study::{resample_power, run_power_study, with_workers, PowerRow, PowerTable};
