//! Experiment configuration: JSON-facing specs and their resolution into
//! runnable detector factories.

use serde::{Deserialize, Serialize};

use crate::detectors::{
    BranchEstimatorSpec, ChangeDetector, CusumDetector, Detector, DetectorKind, GlrDetector,
};
use crate::error::{Error, Result};
use crate::estimators::{MomEstimator, ShrinkMode, ShrinkThreshold, StepSchedule};
use crate::expfam::{Model, NaturalParam};
use crate::projection::FeasibleSet;

/// A parameter vector given either as one value broadcast over all
/// coordinates or as an explicit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Uniform(f64),
    Vector(Vec<f64>),
}

impl ParamSpec {
    pub fn expand(&self, dim: usize) -> Result<Vec<f64>> {
        match self {
            ParamSpec::Uniform(v) => Ok(vec![*v; dim]),
            ParamSpec::Vector(v) => {
                if v.len() != dim {
                    return Err(Error::LengthMismatch {
                        expected: dim,
                        got: v.len(),
                    });
                }
                Ok(v.clone())
            }
        }
    }
}

/// One detector entry of an experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub id: String,
    /// "acm" | "asr" | "cusum" | "glr".
    pub kind: String,
    /// "omd" (default) | "glr-window" | "mom[:c0,s0]" |
    /// "shrink:<soft|hard>,<thr|auto>" | "fixed:<v|v1,v2,...>".
    #[serde(default)]
    pub estimator: Option<String>,
    /// "full" (default) | "l1:<s>" | "clamp:<lo>,<hi>".
    #[serde(default)]
    pub feasible: Option<String>,
    /// Branch window override (defaults to the experiment window).
    #[serde(default)]
    pub window: Option<usize>,
    /// Prespecified post-change parameter for CUSUM (natural coordinates).
    #[serde(default)]
    pub theta1: Option<ParamSpec>,
}

impl DetectorSpec {
    pub fn new(id: &str, kind: &str) -> Self {
        DetectorSpec {
            id: id.to_string(),
            kind: kind.to_string(),
            estimator: None,
            feasible: None,
            window: None,
            theta1: None,
        }
    }

    pub fn with_estimator(mut self, estimator: &str) -> Self {
        self.estimator = Some(estimator.to_string());
        self
    }

    pub fn with_feasible(mut self, feasible: &str) -> Self {
        self.feasible = Some(feasible.to_string());
        self
    }

    pub fn with_theta1(mut self, theta1: ParamSpec) -> Self {
        self.theta1 = Some(theta1);
        self
    }

    /// Human-readable estimator column for output tables.
    pub fn estimator_label(&self) -> String {
        match self.kind.as_str() {
            "glr" => "glr-window".to_string(),
            "cusum" => "fixed".to_string(),
            _ => self.estimator.clone().unwrap_or_else(|| "omd".to_string()),
        }
    }
}

#[derive(Debug, Clone)]
enum ResolvedKind {
    Change {
        kind: DetectorKind,
        spec: BranchEstimatorSpec,
        window: Option<usize>,
    },
    Cusum {
        theta1: Vec<f64>,
    },
    Glr {
        window: usize,
    },
}

/// A validated detector description that can stamp out per-trial
/// instances cheaply.
#[derive(Debug, Clone)]
pub struct DetectorFactory {
    pub id: String,
    resolved: ResolvedKind,
}

impl DetectorFactory {
    /// Validate a [`DetectorSpec`] against a model and default window.
    pub fn resolve(
        model: &Model,
        theta0: &NaturalParam,
        spec: &DetectorSpec,
        default_window: usize,
    ) -> Result<DetectorFactory> {
        let window = spec.window.unwrap_or(default_window);
        let resolved = match spec.kind.as_str() {
            "cusum" => {
                let theta1 = spec
                    .theta1
                    .as_ref()
                    .ok_or_else(|| {
                        Error::Config(format!("detector '{}' (cusum) needs theta1", spec.id))
                    })?
                    .expand(model.dim())?;
                // Validate eagerly.
                CusumDetector::new(model, theta0, &model.natural_param(theta1.clone())?)?;
                ResolvedKind::Cusum { theta1 }
            }
            "glr" => {
                if let Some(est) = &spec.estimator {
                    if est != "glr-window" {
                        return Err(Error::Config(format!(
                            "glr detector takes estimator 'glr-window', got '{est}'"
                        )));
                    }
                }
                GlrDetector::new(model, theta0, window)?;
                ResolvedKind::Glr { window }
            }
            kind @ ("acm" | "asr") => {
                let det_kind = if kind == "acm" {
                    DetectorKind::Acm
                } else {
                    DetectorKind::Asr
                };
                let est = parse_estimator(
                    model,
                    spec.estimator.as_deref().unwrap_or("omd"),
                    spec.feasible.as_deref().unwrap_or("full"),
                )?;
                ChangeDetector::new(model, theta0, det_kind, est.clone(), Some(window))?;
                ResolvedKind::Change {
                    kind: det_kind,
                    spec: est,
                    window: Some(window),
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown detector kind '{other}' (expected acm|asr|cusum|glr)"
                )))
            }
        };
        Ok(DetectorFactory {
            id: spec.id.clone(),
            resolved,
        })
    }

    /// Build a detector directly from parts (bypassing string specs).
    pub fn from_change(
        id: &str,
        kind: DetectorKind,
        spec: BranchEstimatorSpec,
        window: Option<usize>,
    ) -> DetectorFactory {
        DetectorFactory {
            id: id.to_string(),
            resolved: ResolvedKind::Change { kind, spec, window },
        }
    }

    pub fn from_cusum(id: &str, theta1: Vec<f64>) -> DetectorFactory {
        DetectorFactory {
            id: id.to_string(),
            resolved: ResolvedKind::Cusum { theta1 },
        }
    }

    pub fn from_glr(id: &str, window: usize) -> DetectorFactory {
        DetectorFactory {
            id: id.to_string(),
            resolved: ResolvedKind::Glr { window },
        }
    }

    pub fn instantiate(&self, model: &Model, theta0: &NaturalParam) -> Result<Detector> {
        Ok(match &self.resolved {
            ResolvedKind::Change { kind, spec, window } => Detector::Change(ChangeDetector::new(
                model,
                theta0,
                *kind,
                spec.clone(),
                *window,
            )?),
            ResolvedKind::Cusum { theta1 } => Detector::Cusum(CusumDetector::new(
                model,
                theta0,
                &NaturalParam(theta1.clone()),
            )?),
            ResolvedKind::Glr { window } => {
                Detector::Glr(GlrDetector::new(model, theta0, *window)?)
            }
        })
    }
}

fn parse_estimator(
    model: &Model,
    estimator: &str,
    feasible: &str,
) -> Result<BranchEstimatorSpec> {
    let feasible_set = FeasibleSet::parse(feasible, model.dim())?;
    if estimator == "omd" {
        return Ok(BranchEstimatorSpec::Omd {
            schedule: StepSchedule::OneOverT,
            feasible: feasible_set,
        });
    }
    if estimator == "mom" {
        MomEstimator::new(1.0, 1.0)?;
        return Ok(BranchEstimatorSpec::Mom { c0: 1.0, s0: 1.0 });
    }
    if let Some(rest) = estimator.strip_prefix("mom:") {
        let mut it = rest.splitn(2, ',');
        let c0: f64 = parse_num(it.next(), "mom c0")?;
        let s0: f64 = parse_num(it.next(), "mom s0")?;
        MomEstimator::new(c0, s0)?;
        return Ok(BranchEstimatorSpec::Mom { c0, s0 });
    }
    if let Some(rest) = estimator.strip_prefix("shrink:") {
        let mut it = rest.splitn(2, ',');
        let mode = match it.next() {
            Some("soft") => ShrinkMode::Soft,
            Some("hard") => ShrinkMode::Hard,
            other => {
                return Err(Error::Config(format!(
                    "shrink mode must be soft|hard, got {other:?}"
                )))
            }
        };
        let threshold = match it.next() {
            Some("auto") => ShrinkThreshold::Universal,
            Some(v) => {
                let t: f64 = v
                    .parse()
                    .map_err(|_| Error::Config(format!("bad shrink threshold '{v}'")))?;
                if t < 0.0 {
                    return Err(Error::Config("shrink threshold must be nonnegative".into()));
                }
                ShrinkThreshold::Fixed(t)
            }
            None => return Err(Error::Config("shrink needs '<mode>,<thr|auto>'".into())),
        };
        return Ok(BranchEstimatorSpec::Shrink { mode, threshold });
    }
    if let Some(rest) = estimator.strip_prefix("fixed:") {
        let values: Vec<f64> = rest
            .split(',')
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("bad fixed estimate '{v}'")))
            })
            .collect::<Result<_>>()?;
        let theta1 = if values.len() == 1 {
            vec![values[0]; model.dim()]
        } else {
            if values.len() != model.dim() {
                return Err(Error::LengthMismatch {
                    expected: model.dim(),
                    got: values.len(),
                });
            }
            values
        };
        return Ok(BranchEstimatorSpec::Fixed { theta1 });
    }
    Err(Error::Config(format!("unknown estimator '{estimator}'")))
}

fn parse_num(v: Option<&str>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Config(format!("bad {what}")))
}

/// Paper-scenario null parameters: zero mean (Gaussian), unit rate
/// (Gamma), edge probability 0.2 (Bernoulli).
pub fn default_theta0(model: &Model) -> NaturalParam {
    match model {
        Model::Gaussian { dim } => NaturalParam(vec![0.0; *dim]),
        Model::Gamma => NaturalParam(vec![-1.0]),
        Model::Bernoulli { dim } => model
            .natural_from_classical(&vec![0.2; *dim])
            .expect("0.2 is a valid probability"),
    }
}

/// Sweep over one scenario parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

fn default_window() -> usize {
    100
}

fn default_tolerance() -> f64 {
    0.1
}

/// A self-contained experiment description (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// "custom" or a scenario preset name (table1..table4).
    pub scenario: String,
    #[serde(default)]
    pub model: Option<String>,
    /// Natural-coordinate null parameter; model default when omitted.
    #[serde(default)]
    pub theta0: Option<ParamSpec>,
    /// Target ARL γ.
    pub gamma: f64,
    pub trials: u64,
    #[serde(default = "default_window")]
    pub window: usize,
    /// Run-length cap; defaults to 20·γ.
    #[serde(default)]
    pub cap: Option<u64>,
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub detectors: Vec<DetectorSpec>,
    /// Post-change parameter for custom EDD runs (natural coordinates).
    #[serde(default)]
    pub theta: Option<ParamSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.gamma > 1.0) {
            problems.push(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if self.trials < 1 {
            problems.push("trials must be at least 1".into());
        }
        if self.window < 1 {
            problems.push("window must be at least 1".into());
        }
        if let Some(cap) = self.cap {
            if cap as f64 <= self.gamma {
                problems.push(format!(
                    "cap {cap} must exceed the target ARL {}",
                    self.gamma
                ));
            }
        }
        if self.scenario == "custom" {
            if self.model.is_none() {
                problems.push("custom scenario needs a model".into());
            }
            if self.detectors.is_empty() {
                problems.push("custom scenario needs at least one detector".into());
            }
        }
        if let Some(model) = &self.model {
            if let Err(e) = Model::parse(model) {
                problems.push(e.to_string());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn cap(&self) -> u64 {
        self.cap.unwrap_or((20.0 * self.gamma).ceil() as u64)
    }

    pub fn resolve_model(&self) -> Result<(Model, NaturalParam)> {
        let model = Model::parse(
            self.model
                .as_deref()
                .ok_or_else(|| Error::Config("config has no model".into()))?,
        )?;
        let theta0 = match &self.theta0 {
            Some(spec) => model.natural_param(spec.expand(model.dim())?)?,
            None => default_theta0(&model),
        };
        Ok((model, theta0))
    }
}
