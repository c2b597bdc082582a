//! `seqdetect` command line: threshold calibration, detection-delay
//! measurement, scenario benchmark runs, and streaming detection.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use seqdetect::harness::{
    calibrate_threshold, derive_seed, estimate_edd, label, run_experiment, CalibrationResult,
    DetectorFactory, DetectorSpec, ExperimentConfig, ParamSpec, RunOverrides, Scale, CSV_HEADER,
};
use seqdetect::{Alarm, Detector, Model, NaturalParam};

#[derive(Parser)]
#[command(
    name = "seqdetect",
    about = "Sequential change-point detection with one-sample-update estimators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate detector thresholds to the configured target ARL.
    Calibrate {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output calibration file (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Use the original benchmark scale (ARL 10000, 10000 trials).
        #[arg(long)]
        full_scale: bool,
    },
    /// Measure expected detection delays at calibrated thresholds.
    Edd {
        /// Experiment configuration (JSON); needs a `theta` entry.
        #[arg(long)]
        config: PathBuf,
        /// Calibration file produced by `calibrate`.
        #[arg(long)]
        calib: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark scenario end to end (calibration + EDD sweep).
    Run {
        /// One of: table1, table2, table3, table4.
        #[arg(long)]
        scenario: String,
        /// Master seed; all trial seeds derive from it.
        #[arg(long)]
        seed: u64,
        /// Output directory for the CSV and the threshold cache.
        #[arg(long)]
        out: PathBuf,
        /// Use the original benchmark scale (hours of compute).
        #[arg(long)]
        full_scale: bool,
        /// Override the target ARL.
        #[arg(long)]
        gamma: Option<f64>,
        /// Override the Monte-Carlo trial count.
        #[arg(long)]
        trials: Option<u64>,
        /// Override the run-length cap.
        #[arg(long)]
        cap: Option<u64>,
        /// Override the sweep values (comma separated).
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<f64>>,
    },
    /// Stream observations through one detector, one CSV row per sample.
    Detect {
        /// Model selector: gaussian:d | gamma | bernoulli:d.
        #[arg(long)]
        model: String,
        /// Detector spec: kind[;est=...][;set=...][;w=...][;theta1=...],
        /// e.g. "acm;set=l1:5;w=100" or "cusum;theta1=1".
        #[arg(long)]
        detector: String,
        /// Alarm threshold b.
        #[arg(long)]
        threshold: f64,
        /// CSV input path, or "-" for stdin (one sample per line,
        /// d comma-separated values).
        #[arg(long)]
        input: String,
        /// Pre-change parameter in natural coordinates (single value or
        /// comma list); defaults to the model's scenario null.
        #[arg(long)]
        theta0: Option<String>,
    },
}

/// Calibration artifact written by `calibrate` and read by `edd`.
#[derive(Debug, Serialize, Deserialize)]
struct CalibFile {
    model: String,
    gamma: f64,
    window: usize,
    results: BTreeMap<String, CalibrationResult>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Calibrate {
            config,
            out,
            full_scale,
        } => cmd_calibrate(&config, &out, full_scale),
        Command::Edd { config, calib, out } => cmd_edd(&config, &calib, &out),
        Command::Run {
            scenario,
            seed,
            out,
            full_scale,
            gamma,
            trials,
            cap,
            sweep,
        } => {
            let overrides = RunOverrides {
                gamma,
                trials,
                cap,
                sweep,
            };
            let scale = if full_scale { Scale::Full } else { Scale::Desk };
            let path = run_experiment(&scenario, seed, &out, scale, &overrides)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Detect {
            model,
            detector,
            threshold,
            input,
            theta0,
        } => cmd_detect(&model, &detector, threshold, &input, theta0.as_deref()),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).context("parsing config JSON")?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_calibrate(config: &Path, out: &Path, full_scale: bool) -> Result<()> {
    let mut cfg = load_config(config)?;
    if full_scale {
        cfg.gamma = 10_000.0;
        cfg.trials = 10_000;
        cfg.cap = Some(200_000);
    }
    if cfg.scenario != "custom" {
        bail!("`calibrate` works on custom configs; use `run` for table scenarios");
    }
    let (model, theta0) = cfg.resolve_model()?;
    let mut results = BTreeMap::new();
    for spec in &cfg.detectors {
        let factory = DetectorFactory::resolve(&model, &theta0, spec, cfg.window)?;
        let res = calibrate_threshold(
            &model,
            &theta0,
            &factory,
            cfg.gamma,
            cfg.tolerance,
            cfg.trials,
            cfg.cap(),
            derive_seed(cfg.seed, &[label("calib"), label(&spec.id)]),
        )?;
        eprintln!(
            "{}: threshold {:.4} (ARL {:.1} ± {:.1}, censor {:.3}, tolerance met: {})",
            spec.id, res.threshold, res.arl, res.arl_stderr, res.censor_frac, res.tolerance_met
        );
        results.insert(spec.id.clone(), res);
    }
    let artifact = CalibFile {
        model: model.spec_string(),
        gamma: cfg.gamma,
        window: cfg.window,
        results,
    };
    fs::write(out, serde_json::to_string_pretty(&artifact)?)
        .with_context(|| format!("writing {}", out.display()))?;
    println!("{}", out.display());
    Ok(())
}

fn cmd_edd(config: &Path, calib: &Path, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    if cfg.scenario != "custom" {
        bail!("`edd` works on custom configs; use `run` for table scenarios");
    }
    let calib_text =
        fs::read_to_string(calib).with_context(|| format!("reading {}", calib.display()))?;
    let calib: CalibFile = serde_json::from_str(&calib_text).context("parsing calibration")?;
    let (model, theta0) = cfg.resolve_model()?;
    if calib.model != model.spec_string() {
        bail!(
            "calibration is for model {}, config uses {}",
            calib.model,
            model.spec_string()
        );
    }
    let theta_spec = cfg
        .theta
        .clone()
        .context("custom EDD runs need a `theta` entry (post-change natural parameter)")?;
    let theta = theta_spec.expand(model.dim())?;
    if !model.contains_natural(&theta) {
        bail!("theta lies outside the model's natural domain");
    }

    let mut lines = vec![CSV_HEADER.to_string()];
    for spec in &cfg.detectors {
        let factory = DetectorFactory::resolve(&model, &theta0, spec, cfg.window)?;
        let res = calib
            .results
            .get(&spec.id)
            .with_context(|| format!("calibration file has no entry for '{}'", spec.id))?;
        let theta_cl = theta.clone();
        let edd = estimate_edd(
            &model,
            &theta0,
            &factory,
            res.threshold,
            move |_| theta_cl.clone(),
            cfg.trials,
            cfg.cap(),
            derive_seed(cfg.seed, &[label("edd"), label(&spec.id)]),
        )?;
        eprintln!(
            "{}: EDD {:.2} ± {:.2} (censor {:.3})",
            spec.id, edd.edd_mean, edd.edd_stderr, edd.censor_frac
        );
        lines.push(format!(
            "custom,0,{},{},{},{:.6},{:.4},{:.4},{},{:.4},{}",
            spec.id,
            spec.estimator_label(),
            cfg.gamma,
            res.threshold,
            edd.edd_mean,
            edd.edd_stderr,
            cfg.trials,
            edd.censor_frac,
            cfg.seed
        ));
    }
    fs::write(out, lines.join("\n") + "\n")
        .with_context(|| format!("writing {}", out.display()))?;
    println!("{}", out.display());
    Ok(())
}

fn parse_param_arg(s: &str) -> Result<ParamSpec> {
    if s.contains(',') {
        let values: std::result::Result<Vec<f64>, _> =
            s.split(',').map(|v| v.trim().parse()).collect();
        Ok(ParamSpec::Vector(values.context("parsing parameter list")?))
    } else {
        Ok(ParamSpec::Uniform(s.trim().parse().context("parsing parameter")?))
    }
}

/// Parse the `detect` detector grammar:
/// `kind[;est=<estimator>][;set=<feasible>][;w=<window>][;theta1=<v|v,..>]`.
fn parse_detector_arg(s: &str) -> Result<DetectorSpec> {
    let mut parts = s.split(';');
    let kind = parts.next().unwrap_or("").trim();
    if kind.is_empty() {
        bail!("empty detector spec");
    }
    let mut spec = DetectorSpec::new(kind, kind);
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .with_context(|| format!("detector option '{part}' is not key=value"))?;
        match key.trim() {
            "est" => spec.estimator = Some(value.trim().to_string()),
            "set" => spec.feasible = Some(value.trim().to_string()),
            "w" => spec.window = Some(value.trim().parse().context("parsing window")?),
            "theta1" => spec.theta1 = Some(parse_param_arg(value)?),
            other => bail!("unknown detector option '{other}'"),
        }
    }
    Ok(spec)
}

fn cmd_detect(
    model_spec: &str,
    detector_spec: &str,
    threshold: f64,
    input: &str,
    theta0_arg: Option<&str>,
) -> Result<()> {
    if model_spec == "hawkes" {
        return cmd_detect_events(detector_spec, threshold, input);
    }
    let model = Model::parse(model_spec)?;
    let theta0: NaturalParam = match theta0_arg {
        Some(s) => model.natural_param(parse_param_arg(s)?.expand(model.dim())?)?,
        None => seqdetect::harness::default_theta0(&model),
    };
    let spec = parse_detector_arg(detector_spec)?;
    let factory = DetectorFactory::resolve(&model, &theta0, &spec, 100)?;
    let mut detector: Detector = factory.instantiate(&model, &theta0)?;

    let reader: Box<dyn BufRead> = if input == "-" {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(
            fs::File::open(input).with_context(|| format!("opening {input}"))?,
        ))
    };

    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "t,statistic,alarmed,khat")?;
    let mut last: Option<Alarm> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let x: std::result::Result<Vec<f64>, _> =
            trimmed.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let x = x.with_context(|| format!("parsing observation on line {}", lineno + 1))?;
        if x.len() != model.dim() {
            bail!(
                "line {}: expected {} values, got {}",
                lineno + 1,
                model.dim(),
                x.len()
            );
        }
        let alarm = detector.step(&model, &x, threshold)?;
        writeln!(
            out,
            "{},{:.6},{},{}",
            alarm.stop_time,
            alarm.statistic,
            alarm.stopped,
            alarm
                .change_point
                .map(|k| k.to_string())
                .unwrap_or_default()
        )?;
        let stopped = alarm.stopped;
        last = Some(alarm);
        if stopped {
            break;
        }
    }
    match last {
        Some(alarm) => writeln!(out, "{}", serde_json::to_string(&AlarmRecord::from(&alarm))?)?,
        None => bail!("input stream contained no observations"),
    }
    Ok(())
}

/// Event-file streaming: one event time per line, ascending, plain
/// decimal.  Detector grammar:
/// `acm|asr[;w=<branches>][;L=<len>][;lambda0=<r>][;beta=<r>][;step=<r>]`.
fn cmd_detect_events(detector_spec: &str, threshold: f64, input: &str) -> Result<()> {
    use seqdetect::{DetectorKind, PointProcessConfig, PointProcessDetector};

    let mut parts = detector_spec.split(';');
    let kind = match parts.next().unwrap_or("").trim() {
        "acm" => DetectorKind::Acm,
        "asr" => DetectorKind::Asr,
        other => bail!("event-stream detector must be acm or asr, got '{other}'"),
    };
    let mut cfg = PointProcessConfig {
        kind,
        max_branches: 100,
        window_len: 10.0,
        lambda0: 1.0,
        beta: 1.0,
        step_size: 0.05,
    };
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .with_context(|| format!("detector option '{part}' is not key=value"))?;
        let value = value.trim();
        match key.trim() {
            "w" => cfg.max_branches = value.parse().context("parsing branch count")?,
            "L" => cfg.window_len = value.parse().context("parsing window length")?,
            "lambda0" => cfg.lambda0 = value.parse().context("parsing baseline rate")?,
            "beta" => cfg.beta = value.parse().context("parsing decay")?,
            "step" => cfg.step_size = value.parse().context("parsing step size")?,
            other => bail!("unknown event-detector option '{other}'"),
        }
    }
    let mut detector = PointProcessDetector::new(cfg)?;

    let reader: Box<dyn BufRead> = if input == "-" {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(
            fs::File::open(input).with_context(|| format!("opening {input}"))?,
        ))
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "t,statistic,alarmed,khat")?;
    let mut last: Option<Alarm> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let t: f64 = trimmed
            .parse()
            .with_context(|| format!("parsing event time on line {}", lineno + 1))?;
        let alarm = detector.process_event(t, threshold)?;
        writeln!(
            out,
            "{},{:.6},{},{}",
            alarm.stop_time,
            alarm.statistic,
            alarm.stopped,
            alarm
                .change_point
                .map(|k| k.to_string())
                .unwrap_or_default()
        )?;
        let stopped = alarm.stopped;
        last = Some(alarm);
        if stopped {
            break;
        }
    }
    match last {
        Some(alarm) => writeln!(out, "{}", serde_json::to_string(&AlarmRecord::from(&alarm))?)?,
        None => bail!("input stream contained no events"),
    }
    Ok(())
}

/// Final structured record appended after the per-step rows.
#[derive(Serialize)]
struct AlarmRecord {
    stopped: bool,
    stop_time: u64,
    statistic: f64,
    change_point: Option<u64>,
}

impl From<&Alarm> for AlarmRecord {
    fn from(a: &Alarm) -> Self {
        AlarmRecord {
            stopped: a.stopped,
            stop_time: a.stop_time,
            statistic: a.statistic,
            change_point: a.change_point,
        }
    }
}
