//! Monte-Carlo calibration and benchmarking harness: ARL estimation,
//! threshold calibration to a target ARL, EDD measurement, scenario
//! presets and CSV/JSON artifacts.

mod calibrate;
mod config;
mod experiment;
mod run;
mod seeds;

pub use calibrate::{ArlEstimate, CalibrationResult};
pub use config::{
    default_theta0, DetectorFactory, DetectorSpec, ExperimentConfig, ParamSpec, SweepSpec,
};
pub use experiment::{
    hawkes_scenario_config, random_support, rows_to_csv, run_experiment, scenario_detectors,
    scenario_theta_gen, ExperimentRow, RunOverrides, Scale, CSV_HEADER, SCENARIO_WINDOW,
};
pub use run::{
    calibrate_threshold, estimate_arl, estimate_edd, hawkes_calibrate, hawkes_estimate_arl,
    hawkes_estimate_edd, EddResult,
};
pub use seeds::{derive_seed, label};
