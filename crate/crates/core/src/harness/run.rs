//! ARL estimation, threshold calibration and EDD measurement for concrete
//! detectors, discrete-time and point-process alike.
//!
//! Per-trial seeds derive from the master seed and the trial index only,
//! so bisection probes share sample paths and results are independent of
//! worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{Model, NaturalParam};
use crate::pointproc::{HawkesEventGen, PointProcessConfig, PointProcessDetector};
use crate::util::mean_stderr;

use super::calibrate::{calibrate_with, estimate_arl_with, ArlEstimate, CalibrationResult, Envelope};
use super::config::DetectorFactory;
use super::seeds::derive_seed;

/// Expected-detection-delay estimate at a fixed threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EddResult {
    pub detector: String,
    /// Scenario sweep value this row belongs to.
    pub param: f64,
    pub threshold: f64,
    pub edd_mean: f64,
    pub edd_stderr: f64,
    pub censor_frac: f64,
    pub trials: u64,
    pub seed: u64,
}

fn null_runner<'a>(
    model: &'a Model,
    theta0: &'a NaturalParam,
    factory: &'a DetectorFactory,
    cap: u64,
    seed: u64,
) -> impl Fn(u64, f64) -> Result<Envelope> + Sync + 'a {
    move |trial: u64, stop_level: f64| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[trial]));
        let mut det = factory.instantiate(model, theta0)?;
        let mut x = vec![0.0; model.dim()];
        let mut env = Envelope::default();
        for t in 1..=cap {
            model.sample_raw(theta0.as_slice(), &mut rng, &mut x);
            let alarm = det.step(model, &x, f64::INFINITY)?;
            if env.observe(alarm.statistic, t as u32) > stop_level {
                break;
            }
        }
        Ok(env)
    }
}

/// Monte-Carlo ARL of a detector at threshold `b` under the null.
pub fn estimate_arl(
    model: &Model,
    theta0: &NaturalParam,
    factory: &DetectorFactory,
    b: f64,
    trials: u64,
    cap: u64,
    seed: u64,
) -> Result<ArlEstimate> {
    let runner = null_runner(model, theta0, factory, cap, seed);
    estimate_arl_with(&runner, b, trials, cap)
}

/// Calibrate the detector's threshold to a target ARL γ.
pub fn calibrate_threshold(
    model: &Model,
    theta0: &NaturalParam,
    factory: &DetectorFactory,
    gamma: f64,
    tolerance: f64,
    trials: u64,
    cap: u64,
    seed: u64,
) -> Result<CalibrationResult> {
    let runner = null_runner(model, theta0, factory, cap, seed);
    calibrate_with(&runner, gamma, tolerance, trials, cap, seed)
}

/// Measure the expected detection delay with the change at time zero:
/// every sample is drawn from the post-change parameter produced by
/// `theta_gen` (per-trial, so random supports re-randomize across trials).
pub fn estimate_edd<G>(
    model: &Model,
    theta0: &NaturalParam,
    factory: &DetectorFactory,
    b: f64,
    theta_gen: G,
    trials: u64,
    cap: u64,
    seed: u64,
) -> Result<EddResult>
where
    G: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let times: Vec<Option<u64>> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Option<u64>> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[trial]));
            let theta = theta_gen(&mut rng);
            if !model.contains_natural(&theta) {
                return Err(Error::InvalidParameter(
                    "post-change parameter outside natural domain".into(),
                ));
            }
            let mut det = factory.instantiate(model, theta0)?;
            let mut x = vec![0.0; model.dim()];
            for t in 1..=cap {
                model.sample_raw(&theta, &mut rng, &mut x);
                if det.step(model, &x, b)?.stopped {
                    return Ok(Some(t));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    Ok(summarize_edd(factory.id.clone(), b, &times, cap, trials, seed))
}

fn summarize_edd(
    detector: String,
    threshold: f64,
    times: &[Option<u64>],
    cap: u64,
    trials: u64,
    seed: u64,
) -> EddResult {
    let values: Vec<f64> = times
        .iter()
        .map(|t| t.map_or(cap as f64, |v| v as f64))
        .collect();
    let censored = times.iter().filter(|t| t.is_none()).count();
    let (mean, stderr) = mean_stderr(&values);
    EddResult {
        detector,
        param: f64::NAN,
        threshold,
        edd_mean: mean,
        edd_stderr: stderr,
        censor_frac: censored as f64 / trials as f64,
        trials,
        seed,
    }
}

// ---------------------------------------------------------------------------
// Point-process (Poisson null vs Hawkes alternative)
// ---------------------------------------------------------------------------

fn hawkes_null_runner<'a>(
    cfg: &'a PointProcessConfig,
    cap_scans: u64,
    seed: u64,
) -> impl Fn(u64, f64) -> Result<Envelope> + Sync + 'a {
    move |trial: u64, stop_level: f64| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[trial]));
        let mut gen = HawkesEventGen::new(cfg.lambda0, cfg.beta, 0.0, 0.0)?;
        let mut det = PointProcessDetector::new(cfg.clone())?;
        let mut env = Envelope::default();
        for scan in 1..=cap_scans {
            let t = gen.next_event(&mut rng);
            let alarm = det.process_event(t, f64::INFINITY)?;
            if env.observe(alarm.statistic, scan as u32) > stop_level {
                break;
            }
        }
        Ok(env)
    }
}

/// ARL (in scans = events) of the point-process detector under the
/// Poisson null.
pub fn hawkes_estimate_arl(
    cfg: &PointProcessConfig,
    b: f64,
    trials: u64,
    cap_scans: u64,
    seed: u64,
) -> Result<ArlEstimate> {
    let runner = hawkes_null_runner(cfg, cap_scans, seed);
    estimate_arl_with(&runner, b, trials, cap_scans)
}

/// Calibrate the point-process detector threshold to a target ARL.
pub fn hawkes_calibrate(
    cfg: &PointProcessConfig,
    gamma: f64,
    tolerance: f64,
    trials: u64,
    cap_scans: u64,
    seed: u64,
) -> Result<CalibrationResult> {
    let runner = hawkes_null_runner(cfg, cap_scans, seed);
    calibrate_with(&runner, gamma, tolerance, trials, cap_scans, seed)
}

/// EDD (in scans) against a Hawkes alternative with the change at time 0.
pub fn hawkes_estimate_edd(
    cfg: &PointProcessConfig,
    theta: f64,
    b: f64,
    trials: u64,
    cap_scans: u64,
    seed: u64,
) -> Result<EddResult> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let times: Vec<Option<u64>> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Option<u64>> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[trial]));
            let mut gen = HawkesEventGen::new(cfg.lambda0, cfg.beta, theta, 0.0)?;
            let mut det = PointProcessDetector::new(cfg.clone())?;
            for scan in 1..=cap_scans {
                let t = gen.next_event(&mut rng);
                if det.process_event(t, b)?.stopped {
                    return Ok(Some(scan));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    let mut res = summarize_edd("".to_string(), b, &times, cap_scans, trials, seed);
    res.param = theta;
    Ok(res)
}
