//! Scenario presets reproducing the benchmark tables, with Monte-Carlo
//! threshold calibration, EDD sweeps, a persistent threshold cache and
//! CSV output.
//!
//! Desk scale keeps runtimes workstation-friendly (target ARL 1000,
//! 2000 trials; 500 for the point-process scenario); full scale restores
//! the original settings (ARL 10000, 10000 trials; 5000 for the
//! point-process scenario) and is hours of compute.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detectors::DetectorKind;
use crate::error::{Error, Result};
use crate::expfam::Model;
use crate::pointproc::PointProcessConfig;

use super::calibrate::CalibrationResult;
use super::config::{default_theta0, DetectorFactory, DetectorSpec, ParamSpec};
use super::run::{calibrate_threshold, estimate_edd, hawkes_calibrate, hawkes_estimate_edd};
use super::seeds::{derive_seed, label};

/// Scale of a scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Full,
}

/// Optional overrides for scenario runs (smoke tests, custom budgets).
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub gamma: Option<f64>,
    pub trials: Option<u64>,
    pub cap: Option<u64>,
    pub sweep: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
struct ScaleParams {
    gamma: f64,
    trials: u64,
    cap: u64,
    tolerance: f64,
}

fn scale_params(scenario: &str, scale: Scale) -> ScaleParams {
    let point_process = scenario == "table4";
    match scale {
        Scale::Desk => ScaleParams {
            gamma: if point_process { 500.0 } else { 1000.0 },
            trials: if point_process { 800 } else { 2000 },
            cap: if point_process { 10_000 } else { 20_000 },
            tolerance: 0.1,
        },
        Scale::Full => ScaleParams {
            gamma: if point_process { 5000.0 } else { 10_000.0 },
            trials: 10_000,
            cap: if point_process { 100_000 } else { 200_000 },
            tolerance: 0.1,
        },
    }
}

/// Scenario window size for all branch-based detectors.
pub const SCENARIO_WINDOW: usize = 100;

const HAWKES_LAMBDA0: f64 = 1.0;
const HAWKES_BETA: f64 = 1.0;
const HAWKES_WINDOW_LEN: f64 = 10.0;
const HAWKES_STEP_SIZE: f64 = 0.05;

/// Point-process scan-detector configuration used by the table4 scenario.
pub fn hawkes_scenario_config(kind: DetectorKind) -> PointProcessConfig {
    PointProcessConfig {
        kind,
        max_branches: SCENARIO_WINDOW,
        window_len: HAWKES_WINDOW_LEN,
        lambda0: HAWKES_LAMBDA0,
        beta: HAWKES_BETA,
        step_size: HAWKES_STEP_SIZE,
    }
}

/// Detector lineup of a discrete scenario.
pub fn scenario_detectors(scenario: &str) -> Result<Vec<DetectorSpec>> {
    Ok(match scenario {
        "table1" => vec![
            DetectorSpec::new("cusum", "cusum").with_theta1(ParamSpec::Uniform(1.0)),
            DetectorSpec::new("shrink", "acm").with_estimator("shrink:soft,auto"),
            DetectorSpec::new("glr", "glr"),
            DetectorSpec::new("asr", "asr"),
            DetectorSpec::new("acm", "acm"),
            DetectorSpec::new("asr-l1", "asr").with_feasible("l1:5"),
            DetectorSpec::new("acm-l1", "acm").with_feasible("l1:5"),
        ],
        "table2" => vec![
            DetectorSpec::new("cusum", "cusum").with_theta1(ParamSpec::Uniform(-2.0)),
            DetectorSpec::new("mom", "asr").with_estimator("mom"),
            DetectorSpec::new("glr", "glr"),
            DetectorSpec::new("asr", "asr").with_feasible("clamp:-inf,-1e-8"),
            DetectorSpec::new("acm", "acm").with_feasible("clamp:-inf,-1e-8"),
        ],
        "table3" => {
            let p1_logit = (0.8f64 / 0.2).ln();
            vec![
                DetectorSpec::new("cusum", "cusum").with_theta1(ParamSpec::Uniform(p1_logit)),
                DetectorSpec::new("glr", "glr"),
                DetectorSpec::new("asr", "asr"),
                DetectorSpec::new("acm", "acm"),
            ]
        }
        other => {
            return Err(Error::Config(format!(
                "no discrete detector lineup for scenario '{other}'"
            )))
        }
    })
}

fn scenario_model(scenario: &str) -> Result<Model> {
    Ok(match scenario {
        "table1" => Model::Gaussian { dim: 20 },
        "table2" => Model::Gamma,
        "table3" => Model::Bernoulli { dim: 190 },
        other => {
            return Err(Error::Config(format!(
                "no discrete model for scenario '{other}'"
            )))
        }
    })
}

fn scenario_sweep(scenario: &str) -> Vec<f64> {
    match scenario {
        "table1" => vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
        "table2" => vec![0.1, 0.5, 2.0, 5.0, 10.0],
        "table3" => vec![78.0, 100.0, 120.0, 150.0, 170.0, 190.0],
        "table4" => vec![0.4, 0.5, 0.6, 0.7],
        _ => vec![],
    }
}

/// Draw `k` distinct indices from 0..d (partial Fisher-Yates).
pub fn random_support(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d).collect();
    let k = k.min(d);
    for i in 0..k {
        let j = rng.random_range(i..d);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

/// Post-change parameter generator for a discrete scenario sweep value.
pub fn scenario_theta_gen(
    scenario: &str,
    model: &Model,
    value: f64,
) -> Result<Box<dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync + Send>> {
    let d = model.dim();
    match scenario {
        "table1" => {
            let k = ((value * d as f64).round() as usize).max(1);
            Ok(Box::new(move |rng| {
                let mut theta = vec![0.0; d];
                for i in random_support(d, k, rng) {
                    theta[i] = 1.0;
                }
                theta
            }))
        }
        "table2" => {
            let theta = vec![-value];
            Ok(Box::new(move |_| theta.clone()))
        }
        "table3" => {
            let n = value.round() as usize;
            let lo = (0.2f64 / 0.8).ln();
            let hi = (0.8f64 / 0.2).ln();
            Ok(Box::new(move |rng| {
                let mut theta = vec![lo; d];
                for i in random_support(d, n, rng) {
                    theta[i] = hi;
                }
                theta
            }))
        }
        other => Err(Error::Config(format!(
            "no theta generator for scenario '{other}'"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Threshold cache
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct CacheKey {
    scenario: String,
    detector: String,
    model: String,
    gamma: f64,
    trials: u64,
    seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheEntry {
    key: CacheKey,
    result: CalibrationResult,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct ThresholdCache {
    entries: Vec<CacheEntry>,
}

impl ThresholdCache {
    fn load(path: &Path) -> ThresholdCache {
        fs::read_to_string(path)
            .ok()
            .and_then(|s| serde_json::from_str(&s).ok())
            .unwrap_or_default()
    }

    fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    fn get(&self, key: &CacheKey) -> Option<&CalibrationResult> {
        self.entries.iter().find(|e| &e.key == key).map(|e| &e.result)
    }

    fn insert(&mut self, key: CacheKey, result: CalibrationResult) {
        self.entries.retain(|e| e.key != key);
        self.entries.push(CacheEntry { key, result });
    }
}

// ---------------------------------------------------------------------------
// Scenario runner
// ---------------------------------------------------------------------------

/// One output row of a scenario run.
#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub scenario: String,
    pub param: f64,
    pub detector: String,
    pub estimator: String,
    pub gamma: f64,
    pub threshold: f64,
    pub edd_mean: f64,
    pub edd_stderr: f64,
    pub trials: u64,
    pub censor_frac: f64,
    pub seed: u64,
}

pub const CSV_HEADER: &str =
    "scenario,param,detector,estimator,gamma,threshold,edd_mean,edd_stderr,trials,censor_frac,seed";

pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.4},{:.4},{},{:.4},{}\n",
            r.scenario,
            r.param,
            r.detector,
            r.estimator,
            r.gamma,
            r.threshold,
            r.edd_mean,
            r.edd_stderr,
            r.trials,
            r.censor_frac,
            r.seed
        ));
    }
    out
}

/// Run a scenario end to end: calibrate every detector once (reusing the
/// on-disk threshold cache), sweep the scenario parameter measuring EDDs,
/// and write `<scenario>.csv` beside `thresholds.json` in `out_dir`.
/// Returns the CSV path.  Deterministic given the master seed.
pub fn run_experiment(
    scenario: &str,
    seed: u64,
    out_dir: &Path,
    scale: Scale,
    overrides: &RunOverrides,
) -> Result<PathBuf> {
    // "hawkes" is the point-process scenario's own id.
    let scenario = if scenario == "hawkes" { "table4" } else { scenario };
    let mut params = scale_params(scenario, scale);
    if let Some(g) = overrides.gamma {
        if !(g > 1.0) {
            return Err(Error::Config("gamma override must exceed 1".into()));
        }
        params.gamma = g;
        params.cap = (20.0 * g).ceil() as u64;
    }
    if let Some(t) = overrides.trials {
        params.trials = t.max(1);
    }
    if let Some(c) = overrides.cap {
        params.cap = c;
    }
    if params.cap as f64 <= params.gamma {
        return Err(Error::Config(
            "run-length cap must exceed the target ARL".into(),
        ));
    }
    let sweep = overrides
        .sweep
        .clone()
        .unwrap_or_else(|| scenario_sweep(scenario));
    if sweep.is_empty() {
        return Err(Error::Config(format!("unknown scenario '{scenario}'")));
    }

    fs::create_dir_all(out_dir)?;
    let cache_path = out_dir.join("thresholds.json");
    let mut cache = ThresholdCache::load(&cache_path);

    let rows = match scenario {
        "table4" => run_hawkes_scenario(seed, &params, &sweep, &mut cache)?,
        _ => run_discrete_scenario(scenario, seed, &params, &sweep, &mut cache)?,
    };
    cache.save(&cache_path)?;

    let csv_path = out_dir.join(format!("{scenario}.csv"));
    fs::write(&csv_path, rows_to_csv(&rows))?;
    Ok(csv_path)
}

fn run_discrete_scenario(
    scenario: &str,
    seed: u64,
    params: &ScaleParams,
    sweep: &[f64],
    cache: &mut ThresholdCache,
) -> Result<Vec<ExperimentRow>> {
    let model = scenario_model(scenario)?;
    let theta0 = default_theta0(&model);
    let specs = scenario_detectors(scenario)?;
    let mut rows = Vec::new();
    for spec in &specs {
        let factory = DetectorFactory::resolve(&model, &theta0, spec, SCENARIO_WINDOW)?;
        let calib = calibrate_cached(
            cache,
            scenario,
            &spec.id,
            &model.spec_string(),
            params,
            seed,
            || {
                calibrate_threshold(
                    &model,
                    &theta0,
                    &factory,
                    params.gamma,
                    params.tolerance,
                    params.trials,
                    params.cap,
                    derive_seed(seed, &[label("calib"), label(&spec.id)]),
                )
            },
        )?;
        eprintln!(
            "[{scenario}] {}: threshold {:.4} (ARL {:.1}, censor {:.3})",
            spec.id, calib.threshold, calib.arl, calib.censor_frac
        );
        for &value in sweep {
            let gen = scenario_theta_gen(scenario, &model, value)?;
            let edd = estimate_edd(
                &model,
                &theta0,
                &factory,
                calib.threshold,
                gen,
                params.trials,
                params.cap,
                derive_seed(seed, &[label("edd"), label(&spec.id), value.to_bits()]),
            )?;
            eprintln!(
                "[{scenario}] {} @ {value}: EDD {:.2} ± {:.2}",
                spec.id, edd.edd_mean, edd.edd_stderr
            );
            rows.push(ExperimentRow {
                scenario: scenario.to_string(),
                param: value,
                detector: spec.id.clone(),
                estimator: spec.estimator_label(),
                gamma: params.gamma,
                threshold: calib.threshold,
                edd_mean: edd.edd_mean,
                edd_stderr: edd.edd_stderr,
                trials: params.trials,
                censor_frac: edd.censor_frac,
                seed,
            });
        }
    }
    Ok(rows)
}

fn run_hawkes_scenario(
    seed: u64,
    params: &ScaleParams,
    sweep: &[f64],
    cache: &mut ThresholdCache,
) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    for kind in [DetectorKind::Acm, DetectorKind::Asr] {
        let id = match kind {
            DetectorKind::Acm => "acm",
            DetectorKind::Asr => "asr",
        };
        let cfg = hawkes_scenario_config(kind);
        let calib = calibrate_cached(cache, "table4", id, "hawkes", params, seed, || {
            hawkes_calibrate(
                &cfg,
                params.gamma,
                params.tolerance,
                params.trials,
                params.cap,
                derive_seed(seed, &[label("calib"), label(id)]),
            )
        })?;
        eprintln!(
            "[table4] {id}: threshold {:.4} (ARL {:.1}, censor {:.3})",
            calib.threshold, calib.arl, calib.censor_frac
        );
        for &theta in sweep {
            let edd = hawkes_estimate_edd(
                &cfg,
                theta,
                calib.threshold,
                params.trials,
                params.cap,
                derive_seed(seed, &[label("edd"), label(id), theta.to_bits()]),
            )?;
            eprintln!(
                "[table4] {id} @ {theta}: EDD {:.2} ± {:.2}",
                edd.edd_mean, edd.edd_stderr
            );
            rows.push(ExperimentRow {
                scenario: "table4".to_string(),
                param: theta,
                detector: id.to_string(),
                estimator: "sgd".to_string(),
                gamma: params.gamma,
                threshold: calib.threshold,
                edd_mean: edd.edd_mean,
                edd_stderr: edd.edd_stderr,
                trials: params.trials,
                censor_frac: edd.censor_frac,
                seed,
            });
        }
    }
    Ok(rows)
}

fn calibrate_cached(
    cache: &mut ThresholdCache,
    scenario: &str,
    detector: &str,
    model: &str,
    params: &ScaleParams,
    seed: u64,
    compute: impl FnOnce() -> Result<CalibrationResult>,
) -> Result<CalibrationResult> {
    let key = CacheKey {
        scenario: scenario.to_string(),
        detector: detector.to_string(),
        model: model.to_string(),
        gamma: params.gamma,
        trials: params.trials,
        seed,
    };
    if let Some(hit) = cache.get(&key) {
        return Ok(hit.clone());
    }
    let result = compute()?;
    cache.insert(key, result.clone());
    Ok(result)
}
