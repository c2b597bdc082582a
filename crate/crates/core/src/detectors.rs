//! Stopping rules maintained in log domain.
//!
//! - [`Sprt`]: the one-sided sequential test, `τ(b) = min{t : log Λ_t ≥ b}`
//!   with the non-anticipating plug-in likelihood ratio.
//! - [`ChangeDetector`]: the adaptive procedures.  Each hypothetical
//!   change point k keeps its own branch likelihood ratio
//!   `log Λ_{k,t} = Σ_{i=k}^t log(f_{θ̂_{k,i−1}}(X_i)/f_{θ0}(X_i))` with a
//!   non-anticipating per-branch estimator started at θ0 (the first factor
//!   of every branch is 1).  ACM takes the max over branches, ASR the
//!   log-sum-exp; both alarm on a strict `> b`.  A window cap of w
//!   branches gives the window-limited variants.
//! - [`CusumDetector`]: the classical recursion
//!   `W_t = max(W_{t−1} + log(f_{θ1}/f_{θ0})(X_t), 0)` with a prespecified
//!   post-change parameter.
//! - [`GlrDetector`]: window-limited GLR; the only detector that stores
//!   raw samples, refitting the suffix MLE each step.
//!
//! For Bernoulli models with the 1/t schedule and no feasible-set
//! constraint, branch estimates are exact per-coordinate running means
//! `k/a`, so branches can be advanced on integer counts with precomputed
//! log tables.  The construction picks that representation automatically;
//! it is numerically the same recursion.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::estimators::{
    mle_suffix_llr, MomEstimator, OmdEstimator, ShrinkEstimator, ShrinkMode, ShrinkThreshold,
    StepSchedule,
};
use crate::expfam::{clamp_unit, dot, Model, NaturalParam};
use crate::projection::FeasibleSet;
use crate::util::logsumexp;

/// Maximum window size for the integer-count Bernoulli branch tables
/// (the tables are O(w²) floats).
const BERN_TABLE_MAX_WINDOW: usize = 512;

/// Outcome of one detector step.
#[derive(Debug, Clone, PartialEq)]
pub struct Alarm {
    pub stopped: bool,
    /// Sample index (1-based) of this step.
    pub stop_time: u64,
    pub statistic: f64,
    /// Branch origin k̂ achieving the max (ACM and GLR only): the index of
    /// the first sample attributed to the change.
    pub change_point: Option<u64>,
}

// ---------------------------------------------------------------------------
// One-sided SPRT
// ---------------------------------------------------------------------------

/// One-sided SPRT with a non-anticipating OMD estimator.
#[derive(Debug, Clone)]
pub struct Sprt {
    log_lambda: f64,
    estimator: OmdEstimator,
    t: u64,
    theta0: Vec<f64>,
    phi0: f64,
}

impl Sprt {
    pub fn new(
        model: &Model,
        theta0: &NaturalParam,
        schedule: StepSchedule,
        feasible: FeasibleSet,
    ) -> Result<Self> {
        let estimator = OmdEstimator::new_untracked(model, theta0, schedule, feasible)?;
        Ok(Sprt {
            log_lambda: 0.0,
            estimator,
            t: 0,
            theta0: theta0.as_slice().to_vec(),
            phi0: model.log_partition(theta0.as_slice()),
        })
    }

    pub fn log_lambda(&self) -> f64 {
        self.log_lambda
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Accumulate the increment of the pre-update estimate, then update
    /// the estimator.  Alarms on `log Λ_t ≥ b`.
    pub fn step(&mut self, model: &Model, x: &[f64], b: f64) -> Result<Alarm> {
        let theta = self.estimator.theta();
        let inc =
            dot(theta, x) - model.log_partition(theta) - (dot(&self.theta0, x) - self.phi0);
        self.log_lambda += inc;
        self.estimator.step(model, x)?;
        self.t += 1;
        Ok(Alarm {
            stopped: self.log_lambda >= b,
            stop_time: self.t,
            statistic: self.log_lambda,
            change_point: None,
        })
    }
}

// ---------------------------------------------------------------------------
// Branch estimators for the adaptive procedures
// ---------------------------------------------------------------------------

/// How each branch of an adaptive procedure estimates the post-change
/// parameter.
#[derive(Debug, Clone)]
pub enum BranchEstimatorSpec {
    Omd {
        schedule: StepSchedule,
        feasible: FeasibleSet,
    },
    /// Gamma-only pseudo-count method of moments.
    Mom { c0: f64, s0: f64 },
    /// Gaussian-only thresholded running mean.
    Shrink {
        mode: ShrinkMode,
        threshold: ShrinkThreshold,
    },
    /// A fixed plug-in value (natural coordinates).
    Fixed { theta1: Vec<f64> },
}

#[derive(Debug, Clone)]
enum GenericEstimator {
    Omd(OmdEstimator),
    Mom(MomEstimator),
    Shrink(ShrinkEstimator),
    Fixed(Vec<f64>),
}

impl GenericEstimator {
    fn update(&mut self, model: &Model, x: &[f64]) -> Result<()> {
        match self {
            GenericEstimator::Omd(e) => e.step(model, x),
            GenericEstimator::Mom(e) => {
                e.step(x[0]);
                Ok(())
            }
            GenericEstimator::Shrink(e) => {
                e.step(x);
                Ok(())
            }
            GenericEstimator::Fixed(_) => Ok(()),
        }
    }

    /// Log-likelihood increment of the current estimate on `x`, minus the
    /// shared null part `θ0ᵀx − Φ(θ0)`.
    fn increment(&self, model: &Model, x: &[f64], null_part: f64, mom_buf: &mut [f64; 1]) -> f64 {
        let theta: &[f64] = match self {
            GenericEstimator::Omd(e) => e.theta(),
            GenericEstimator::Mom(e) => {
                mom_buf[0] = e.theta_hat();
                &mom_buf[..]
            }
            GenericEstimator::Shrink(e) => e.theta(),
            GenericEstimator::Fixed(t) => t,
        };
        dot(theta, x) - model.log_partition(theta) - null_part
    }
}

/// Log tables for integer-count Bernoulli branches: for a branch of age
/// a with k ones in a coordinate, the estimate is clamp(k/a) and the
/// tables hold ln(p̂) and ln(1−p̂).
#[derive(Debug, Clone)]
struct BernBranchTables {
    // Row a (1-based age) has a+1 entries, flattened.
    ln_p: Vec<f64>,
    ln_1p: Vec<f64>,
    row_start: Vec<usize>,
}

impl BernBranchTables {
    fn build(wmax: usize) -> Self {
        let mut ln_p = Vec::new();
        let mut ln_1p = Vec::new();
        let mut row_start = vec![0usize; wmax + 2];
        for a in 1..=wmax {
            row_start[a] = ln_p.len();
            for k in 0..=a {
                let p = clamp_unit(k as f64 / a as f64);
                ln_p.push(p.ln());
                ln_1p.push((1.0 - p).ln());
            }
        }
        row_start[wmax + 1] = ln_p.len();
        BernBranchTables {
            ln_p,
            ln_1p,
            row_start,
        }
    }

    #[inline]
    fn row(&self, age: usize) -> (&[f64], &[f64]) {
        let s = self.row_start[age];
        let e = s + age + 1;
        (&self.ln_p[s..e], &self.ln_1p[s..e])
    }
}

#[derive(Debug, Clone)]
enum BranchKernel {
    Generic(GenericEstimator),
    /// Per-coordinate ones counts of an OMD/1-t/full-space Bernoulli
    /// branch; age is the number of samples consumed.
    BernCounts { ones: Vec<u32>, age: u32 },
}

#[derive(Debug, Clone)]
struct Branch {
    k: u64,
    log_lambda: f64,
    kernel: BranchKernel,
}

// ---------------------------------------------------------------------------
// ACM / ASR
// ---------------------------------------------------------------------------

/// Max (ACM) or log-sum-exp (ASR) combination over branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    Acm,
    Asr,
}

/// Window-limited adaptive CUSUM / adaptive Shiryaev-Roberts detector.
#[derive(Debug, Clone)]
pub struct ChangeDetector {
    kind: DetectorKind,
    spec: BranchEstimatorSpec,
    window: Option<usize>,
    t: u64,
    branches: VecDeque<Branch>,
    statistic: f64,
    argmax_k: Option<u64>,
    theta0: NaturalParam,
    phi0: f64,
    // Bernoulli fast path.
    tables: Option<BernBranchTables>,
    null_ln_p: Vec<f64>,
    null_ln_1p: Vec<f64>,
    lse_buf: Vec<f64>,
}

impl ChangeDetector {
    pub fn new(
        model: &Model,
        theta0: &NaturalParam,
        kind: DetectorKind,
        spec: BranchEstimatorSpec,
        window: Option<usize>,
    ) -> Result<Self> {
        Self::build(model, theta0, kind, spec, window, true)
    }

    #[cfg(test)]
    pub(crate) fn new_no_fastpath(
        model: &Model,
        theta0: &NaturalParam,
        kind: DetectorKind,
        spec: BranchEstimatorSpec,
        window: Option<usize>,
    ) -> Result<Self> {
        Self::build(model, theta0, kind, spec, window, false)
    }

    fn build(
        model: &Model,
        theta0: &NaturalParam,
        kind: DetectorKind,
        spec: BranchEstimatorSpec,
        window: Option<usize>,
        allow_fast: bool,
    ) -> Result<Self> {
        if let Some(w) = window {
            if w < 1 {
                return Err(Error::Config("window size must be at least 1".into()));
            }
        }
        if !model.contains_natural(theta0.as_slice()) {
            return Err(Error::InvalidParameter(
                "theta0 outside natural domain".into(),
            ));
        }
        match &spec {
            BranchEstimatorSpec::Mom { .. } if !matches!(model, Model::Gamma) => {
                return Err(Error::Config(
                    "the MOM estimator is specific to the gamma model".into(),
                ));
            }
            BranchEstimatorSpec::Shrink { .. } if !matches!(model, Model::Gaussian { .. }) => {
                return Err(Error::Config(
                    "the shrinkage estimator is specific to the gaussian model".into(),
                ));
            }
            BranchEstimatorSpec::Fixed { theta1 } => {
                if !model.contains_natural(theta1) {
                    return Err(Error::InvalidParameter(
                        "fixed estimate outside natural domain".into(),
                    ));
                }
            }
            BranchEstimatorSpec::Omd { schedule, feasible } => {
                // Validate the combination once up front.
                OmdEstimator::new_untracked(model, theta0, *schedule, feasible.clone())?;
            }
            _ => {}
        }
        let fast = allow_fast
            && matches!(model, Model::Bernoulli { .. })
            && matches!(
                &spec,
                BranchEstimatorSpec::Omd {
                    schedule: StepSchedule::OneOverT,
                    feasible: FeasibleSet::FullSpace,
                }
            )
            && window.map_or(false, |w| w <= BERN_TABLE_MAX_WINDOW);
        let (tables, null_ln_p, null_ln_1p) = if fast {
            let w = window.unwrap();
            let mut mu0 = vec![0.0; model.dim()];
            model.mean_from_natural(theta0.as_slice(), &mut mu0);
            let ln_p: Vec<f64> = mu0.iter().map(|&p| clamp_unit(p).ln()).collect();
            let ln_1p: Vec<f64> = mu0.iter().map(|&p| (1.0 - clamp_unit(p)).ln()).collect();
            (Some(BernBranchTables::build(w)), ln_p, ln_1p)
        } else {
            (None, Vec::new(), Vec::new())
        };
        Ok(ChangeDetector {
            kind,
            spec,
            window,
            t: 0,
            branches: VecDeque::new(),
            statistic: 0.0,
            argmax_k: None,
            theta0: theta0.clone(),
            phi0: model.log_partition(theta0.as_slice()),
            tables,
            null_ln_p,
            null_ln_1p,
            lse_buf: Vec::new(),
        })
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Current decision statistic (0 before any data).
    pub fn statistic(&self) -> f64 {
        self.statistic
    }

    /// Branch origins and their log likelihood ratios, oldest first.
    pub fn branch_log_ratios(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.branches.iter().map(|b| (b.k, b.log_lambda))
    }

    fn spawn_branch(&self, model: &Model) -> Result<Branch> {
        let kernel = if self.tables.is_some() {
            BranchKernel::BernCounts {
                ones: vec![0; model.dim()],
                age: 0,
            }
        } else {
            BranchKernel::Generic(match &self.spec {
                BranchEstimatorSpec::Omd { schedule, feasible } => GenericEstimator::Omd(
                    OmdEstimator::new_untracked(model, &self.theta0, *schedule, feasible.clone())?,
                ),
                BranchEstimatorSpec::Mom { c0, s0 } => {
                    GenericEstimator::Mom(MomEstimator::new(*c0, *s0)?)
                }
                BranchEstimatorSpec::Shrink { mode, threshold } => GenericEstimator::Shrink(
                    ShrinkEstimator::new(self.theta0.as_slice(), *mode, *threshold),
                ),
                BranchEstimatorSpec::Fixed { theta1 } => GenericEstimator::Fixed(theta1.clone()),
            })
        };
        Ok(Branch {
            k: self.t,
            log_lambda: 0.0,
            kernel,
        })
    }

    /// Consume one observation.  A new branch with origin k = t is spawned
    /// and takes the sample as its first post-change observation (its
    /// increment is 0 since its estimate is still θ0); every branch then
    /// adds its increment and updates its estimator; the oldest branch is
    /// evicted past the window; the statistic is recomputed.  Alarms on a
    /// strict `statistic > b`.
    pub fn step(&mut self, model: &Model, x: &[f64], b: f64) -> Result<Alarm> {
        if x.len() != self.theta0.dim() {
            return Err(Error::LengthMismatch {
                expected: self.theta0.dim(),
                got: x.len(),
            });
        }
        self.t += 1;
        let fresh = self.spawn_branch(model)?;
        self.branches.push_back(fresh);
        if let Some(w) = self.window {
            while self.branches.len() > w {
                self.branches.pop_front();
            }
        }

        if let Some(tables) = &self.tables {
            // Shared null log-density of x (carrier-free).
            let mut base = 0.0;
            for j in 0..x.len() {
                base += if x[j] == 1.0 {
                    self.null_ln_p[j]
                } else {
                    self.null_ln_1p[j]
                };
            }
            for br in self.branches.iter_mut() {
                let BranchKernel::BernCounts { ones, age } = &mut br.kernel else {
                    unreachable!("fast detector holds count branches only");
                };
                if *age > 0 {
                    let (lp, l1p) = tables.row(*age as usize);
                    let mut ll = 0.0;
                    for j in 0..x.len() {
                        let k = ones[j] as usize;
                        ll += if x[j] == 1.0 { lp[k] } else { l1p[k] };
                    }
                    br.log_lambda += ll - base;
                }
                for j in 0..x.len() {
                    if x[j] == 1.0 {
                        ones[j] += 1;
                    }
                }
                *age += 1;
            }
        } else {
            let null_part = dot(self.theta0.as_slice(), x) - self.phi0;
            let mut mom_buf = [0.0f64; 1];
            for br in self.branches.iter_mut() {
                let BranchKernel::Generic(est) = &mut br.kernel else {
                    unreachable!("generic detector holds generic branches only");
                };
                br.log_lambda += est.increment(model, x, null_part, &mut mom_buf);
                est.update(model, x)?;
            }
        }

        match self.kind {
            DetectorKind::Acm => {
                let mut best = f64::NEG_INFINITY;
                let mut best_k = 0;
                for br in &self.branches {
                    if br.log_lambda > best {
                        best = br.log_lambda;
                        best_k = br.k;
                    }
                }
                self.statistic = best;
                self.argmax_k = Some(best_k);
            }
            DetectorKind::Asr => {
                self.lse_buf.clear();
                self.lse_buf.extend(self.branches.iter().map(|b| b.log_lambda));
                self.statistic = logsumexp(&self.lse_buf);
                self.argmax_k = None;
            }
        }
        Ok(Alarm {
            stopped: self.statistic > b,
            stop_time: self.t,
            statistic: self.statistic,
            change_point: self.argmax_k,
        })
    }
}

// ---------------------------------------------------------------------------
// CUSUM
// ---------------------------------------------------------------------------

/// Classical CUSUM with a prespecified post-change parameter θ1, using the
/// full d-dimensional log ratio as the increment.
#[derive(Debug, Clone)]
pub struct CusumDetector {
    w_stat: f64,
    t: u64,
    theta0: Vec<f64>,
    theta1: Vec<f64>,
    delta_phi: f64,
}

impl CusumDetector {
    pub fn new(model: &Model, theta0: &NaturalParam, theta1: &NaturalParam) -> Result<Self> {
        if !model.contains_natural(theta0.as_slice()) || !model.contains_natural(theta1.as_slice())
        {
            return Err(Error::InvalidParameter(
                "cusum parameters outside natural domain".into(),
            ));
        }
        if theta0.as_slice() == theta1.as_slice() {
            return Err(Error::Config(
                "cusum needs theta1 != theta0 (degenerate increments)".into(),
            ));
        }
        Ok(CusumDetector {
            w_stat: 0.0,
            t: 0,
            theta0: theta0.as_slice().to_vec(),
            theta1: theta1.as_slice().to_vec(),
            delta_phi: model.log_partition(theta1.as_slice())
                - model.log_partition(theta0.as_slice()),
        })
    }

    pub fn statistic(&self) -> f64 {
        self.w_stat
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, _model: &Model, x: &[f64], b: f64) -> Result<Alarm> {
        let inc = dot(&self.theta1, x) - dot(&self.theta0, x) - self.delta_phi;
        self.w_stat = (self.w_stat + inc).max(0.0);
        self.t += 1;
        Ok(Alarm {
            stopped: self.w_stat > b,
            stop_time: self.t,
            statistic: self.w_stat,
            change_point: None,
        })
    }
}

// ---------------------------------------------------------------------------
// Window-limited GLR
// ---------------------------------------------------------------------------

/// Window-limited GLR: stores the last w sufficient statistics and plugs
/// the suffix MLE into the likelihood ratio, maximized over suffixes.
#[derive(Debug, Clone)]
pub struct GlrDetector {
    window: usize,
    buf: VecDeque<Vec<f64>>,
    t: u64,
    statistic: f64,
    khat: Option<u64>,
    theta0: Vec<f64>,
    phi0: f64,
    sum_buf: Vec<f64>,
    mean_buf: Vec<f64>,
    theta_buf: Vec<f64>,
    // Bernoulli count path: per-sample null log-densities plus running
    // aggregated tables (see `BernSuffixTables`).
    suffix_tables: Option<BernSuffixTables>,
    null_logdens: VecDeque<f64>,
    count_buf: Vec<u32>,
}

/// Aggregated Bernoulli table: entry (m, c) holds
/// `c·ln(clamp(c/m)) + (m−c)·ln(clamp(1−c/m))`, the suffix log-likelihood
/// contribution of one coordinate with c ones in m samples at the MLE.
#[derive(Debug, Clone)]
struct BernSuffixTables {
    values: Vec<f64>,
    row_start: Vec<usize>,
}

impl BernSuffixTables {
    fn build(wmax: usize) -> Self {
        let mut values = Vec::new();
        let mut row_start = vec![0usize; wmax + 2];
        for m in 1..=wmax {
            row_start[m] = values.len();
            for c in 0..=m {
                let p = clamp_unit(c as f64 / m as f64);
                values.push(c as f64 * p.ln() + (m - c) as f64 * (1.0 - p).ln());
            }
        }
        row_start[wmax + 1] = values.len();
        BernSuffixTables { values, row_start }
    }

    #[inline]
    fn row(&self, m: usize) -> &[f64] {
        &self.values[self.row_start[m]..self.row_start[m] + m + 1]
    }
}

impl GlrDetector {
    pub fn new(model: &Model, theta0: &NaturalParam, window: usize) -> Result<Self> {
        if window < 1 {
            return Err(Error::Config("glr window must be at least 1".into()));
        }
        if !model.contains_natural(theta0.as_slice()) {
            return Err(Error::InvalidParameter(
                "theta0 outside natural domain".into(),
            ));
        }
        let d = model.dim();
        let suffix_tables = match model {
            Model::Bernoulli { .. } if window <= BERN_TABLE_MAX_WINDOW => {
                Some(BernSuffixTables::build(window))
            }
            _ => None,
        };
        Ok(GlrDetector {
            window,
            buf: VecDeque::with_capacity(window),
            t: 0,
            statistic: 0.0,
            khat: None,
            theta0: theta0.as_slice().to_vec(),
            phi0: model.log_partition(theta0.as_slice()),
            sum_buf: vec![0.0; d],
            mean_buf: vec![0.0; d],
            theta_buf: vec![0.0; d],
            suffix_tables,
            null_logdens: VecDeque::with_capacity(window),
            count_buf: vec![0; d],
        })
    }

    pub fn statistic(&self) -> f64 {
        self.statistic
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, model: &Model, x: &[f64], b: f64) -> Result<Alarm> {
        if x.len() != self.theta0.len() {
            return Err(Error::LengthMismatch {
                expected: self.theta0.len(),
                got: x.len(),
            });
        }
        self.t += 1;
        if self.buf.len() == self.window {
            self.buf.pop_front();
            if self.suffix_tables.is_some() {
                self.null_logdens.pop_front();
            }
        }
        self.buf.push_back(x.to_vec());
        if let Some(tables) = &self.suffix_tables {
            // Null log-density of this sample, carrier-free.
            let nd = dot(&self.theta0, x) - self.phi0;
            self.null_logdens.push_back(nd);

            // Maximize c·ln p̂ + ... − null over suffix lengths m, newest
            // backward, with integer per-coordinate counts.
            self.count_buf.iter_mut().for_each(|c| *c = 0);
            let mut best = f64::NEG_INFINITY;
            let mut best_m = 1usize;
            let mut null_sum = 0.0;
            for (m, (sample, nd)) in self
                .buf
                .iter()
                .rev()
                .zip(self.null_logdens.iter().rev())
                .enumerate()
            {
                for j in 0..sample.len() {
                    if sample[j] == 1.0 {
                        self.count_buf[j] += 1;
                    }
                }
                null_sum += nd;
                let row = tables.row(m + 1);
                let mut fit = 0.0;
                for &c in &self.count_buf {
                    fit += row[c as usize];
                }
                let llr = fit - null_sum;
                if llr > best {
                    best = llr;
                    best_m = m + 1;
                }
            }
            self.statistic = best;
            self.khat = Some(self.t - best_m as u64 + 1);
        } else {
            self.sum_buf.iter_mut().for_each(|s| *s = 0.0);
            let mut best = f64::NEG_INFINITY;
            let mut best_m = 1usize;
            for (i, sample) in self.buf.iter().rev().enumerate() {
                for j in 0..sample.len() {
                    self.sum_buf[j] += sample[j];
                }
                let m = (i + 1) as f64;
                for j in 0..self.sum_buf.len() {
                    self.mean_buf[j] = self.sum_buf[j] / m;
                }
                let llr = mle_suffix_llr(
                    model,
                    &self.theta0,
                    self.phi0,
                    &self.mean_buf,
                    m,
                    &mut self.theta_buf,
                );
                if llr > best {
                    best = llr;
                    best_m = i + 1;
                }
            }
            self.statistic = best;
            self.khat = Some(self.t - best_m as u64 + 1);
        }
        Ok(Alarm {
            stopped: self.statistic > b,
            stop_time: self.t,
            statistic: self.statistic,
            change_point: self.khat,
        })
    }
}

// ---------------------------------------------------------------------------
// Uniform wrapper
// ---------------------------------------------------------------------------

/// Any of the discrete-time detectors behind one step interface.
#[derive(Debug, Clone)]
pub enum Detector {
    Change(ChangeDetector),
    Cusum(CusumDetector),
    Glr(GlrDetector),
}

impl Detector {
    pub fn step(&mut self, model: &Model, x: &[f64], b: f64) -> Result<Alarm> {
        match self {
            Detector::Change(d) => d.step(model, x, b),
            Detector::Cusum(d) => d.step(model, x, b),
            Detector::Glr(d) => d.step(model, x, b),
        }
    }

    pub fn statistic(&self) -> f64 {
        match self {
            Detector::Change(d) => d.statistic(),
            Detector::Cusum(d) => d.statistic(),
            Detector::Glr(d) => d.statistic(),
        }
    }
}
