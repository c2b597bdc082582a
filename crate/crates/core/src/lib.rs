//! Sequential change-point detection with one-sample-update estimators.
//!
//! The toolkit pairs likelihood-ratio stopping rules (one-sided SPRT,
//! adaptive CUSUM, adaptive Shiryaev-Roberts, classical CUSUM, window
//! limited GLR) with non-anticipating estimators built by online mirror
//! descent over exponential families, plus a Poisson-to-Hawkes scan for
//! continuous-time event streams and a Monte-Carlo harness that
//! calibrates thresholds to a target average run length and measures
//! detection delays.
//!
//! Modules:
//! - [`expfam`]: exponential-family models (Gaussian, Gamma, Bernoulli
//!   product) in natural/mean coordinates with KL and Bregman divergences.
//! - [`projection`]: feasible sets and Bregman projections (soft
//!   thresholding onto ℓ1 balls, interval clamps).
//! - [`estimators`]: the OMD one-sample update, batch MLE, regret in both
//!   direct and Bregman-sum form, method-of-moments and shrinkage
//!   baselines.
//! - [`detectors`]: the stopping rules, maintained in log domain.
//! - [`pointproc`]: Hawkes simulation, sliding-window likelihoods and the
//!   event-stream scan detector.
//! - [`harness`]: calibration, EDD measurement, scenario presets, CSV.

pub mod detectors;
pub mod error;
pub mod estimators;
pub mod expfam;
pub mod harness;
pub mod pointproc;
pub mod projection;
pub mod util;

pub use detectors::{
    Alarm, BranchEstimatorSpec, ChangeDetector, CusumDetector, Detector, DetectorKind,
    GlrDetector, Sprt,
};
pub use error::{Error, Result};
pub use estimators::{
    batch_mle, regret_direct, MleFit, MomEstimator, OmdEstimator, ShrinkEstimator, ShrinkMode,
    ShrinkThreshold, StepSchedule,
};
pub use expfam::{MeanParam, Model, NaturalParam};
pub use pointproc::{
    simulate_hawkes, simulate_poisson, sgd_update, window_loglik, window_loglik_grad, EventStream,
    HawkesEventGen, HawkesSpec, PointProcessConfig, PointProcessDetector,
};
pub use projection::{bregman_project, bregman_project_param, project_l1, FeasibleSet};
