//! Poisson-to-Hawkes change detection on continuous-time event streams.
//!
//! Under the null the stream is a homogeneous Poisson process with known
//! baseline rate λ₀.  Under the alternative, events after the change time
//! self-excite with intensity `λ_s = λ₀ + θ Σ_{t_j < s} β e^{−β(s−t_j)}`
//! (normalized kernel, prespecified β, unknown magnitude θ ∈ [0,1)).
//!
//! Event times are converted into overlapping scan windows of length L,
//! one scan per event.  Each window carries the log-likelihood ratio of a
//! Hawkes window against the Poisson window,
//!
//! `ℓ(θ|X) = Σ_q log[λ₀ + θ A_q] − λ₀ L − θ Σ_q (1 − e^{−β(T−t_q)})`,
//!
//! with `A_q = Σ_{t_j < t_q} β e^{−β(t_q−t_j)}` summed within the window.
//! Branch estimates are updated by stochastic gradient ascent on ℓ and
//! plugged into ACM/ASR scan statistics with the increment
//! `ℓ(θ̂|X) − ℓ(0|X)`.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::detectors::{Alarm, DetectorKind};
use crate::error::{Error, Result};
use crate::util::logsumexp;

/// Branch magnitude estimates are clamped to [0, 1−ε].
pub const THETA_CLAMP_EPS: f64 = 1e-6;

/// Strictly increasing event stamps on [0, horizon].
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    pub times: Vec<f64>,
    pub horizon: f64,
}

impl EventStream {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<EventStream> {
        if !(horizon > 0.0) {
            return Err(Error::Config("horizon must be positive".into()));
        }
        for (i, &t) in times.iter().enumerate() {
            if !(t >= 0.0 && t <= horizon) {
                return Err(Error::Config(format!("event {t} outside [0, {horizon}]")));
            }
            if i > 0 && t <= times[i - 1] {
                return Err(Error::Config("event times must be strictly increasing".into()));
            }
        }
        Ok(EventStream { times, horizon })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Hawkes alternative: baseline λ₀, decay β, magnitude θ, change time κ
/// (`None` means the process never leaves the Poisson regime).
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesSpec {
    pub baseline: f64,
    pub decay: f64,
    pub magnitude: f64,
    pub change_time: Option<f64>,
}

impl HawkesSpec {
    pub fn new(baseline: f64, decay: f64, magnitude: f64, change_time: Option<f64>) -> Result<Self> {
        if !(baseline > 0.0) || !(decay > 0.0) {
            return Err(Error::Config("baseline and decay must be positive".into()));
        }
        if !(0.0..1.0).contains(&magnitude) {
            return Err(Error::Config(format!(
                "magnitude must lie in [0,1) for stability, got {magnitude}"
            )));
        }
        Ok(HawkesSpec {
            baseline,
            decay,
            magnitude,
            change_time,
        })
    }
}

/// Homogeneous Poisson arrivals on [0, horizon].
pub fn simulate_poisson(lambda0: f64, horizon: f64, rng: &mut impl Rng) -> Result<EventStream> {
    if !(lambda0 > 0.0) {
        return Err(Error::Config("rate must be positive".into()));
    }
    let exp = Exp::new(lambda0).expect("positive rate");
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(rng);
        if t > horizon {
            break;
        }
        times.push(t);
    }
    EventStream::new(times, horizon)
}

/// Lazily generates events of a (possibly self-exciting) stream from time
/// `start`, by Ogata thinning with the exact exponential-kernel recursion.
/// With `theta = 0` this is a plain Poisson generator.
#[derive(Debug, Clone)]
pub struct HawkesEventGen {
    lambda0: f64,
    beta: f64,
    theta: f64,
    now: f64,
    /// Σ e^{−β(now − t_j)} over generated events.
    excitation: f64,
}

impl HawkesEventGen {
    pub fn new(lambda0: f64, beta: f64, theta: f64, start: f64) -> Result<Self> {
        if !(lambda0 > 0.0) || !(beta > 0.0) {
            return Err(Error::Config("baseline and decay must be positive".into()));
        }
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::Config("magnitude must lie in [0,1)".into()));
        }
        Ok(HawkesEventGen {
            lambda0,
            beta,
            theta,
            now: start,
            excitation: 0.0,
        })
    }

    /// Next event time (always succeeds: the intensity is bounded below
    /// by λ₀ > 0).
    pub fn next_event(&mut self, rng: &mut impl Rng) -> f64 {
        loop {
            // Current intensity bounds the future until the next event.
            let bound = self.lambda0 + self.theta * self.beta * self.excitation;
            let wait = Exp::new(bound).expect("positive bound").sample(rng);
            let candidate = self.now + wait;
            let decayed = self.excitation * (-self.beta * (candidate - self.now)).exp();
            let intensity = self.lambda0 + self.theta * self.beta * decayed;
            self.now = candidate;
            self.excitation = decayed;
            if rng.random::<f64>() * bound <= intensity {
                self.excitation += 1.0;
                return candidate;
            }
        }
    }
}

/// Simulate the test's alternative: Poisson(λ₀) before κ, self-exciting
/// with kernel θβe^{−βs} (fed by post-κ events only) afterwards.
pub fn simulate_hawkes(
    spec: &HawkesSpec,
    horizon: f64,
    rng: &mut impl Rng,
) -> Result<EventStream> {
    if !(horizon > 0.0) {
        return Err(Error::Config("horizon must be positive".into()));
    }
    let kappa = spec.change_time.unwrap_or(horizon).min(horizon);
    let mut times = simulate_poisson(spec.baseline, kappa.max(f64::MIN_POSITIVE), rng)
        .map(|s| s.times)
        .unwrap_or_default();
    times.retain(|&t| t <= kappa);
    if kappa < horizon {
        let mut gen = HawkesEventGen::new(spec.baseline, spec.decay, spec.magnitude, kappa)?;
        loop {
            let t = gen.next_event(rng);
            if t > horizon {
                break;
            }
            times.push(t);
        }
    }
    EventStream::new(times, horizon)
}

/// Per-window quantities shared by the likelihood, its gradient and every
/// branch: the excitation sums A_q and the compensator tails.
#[derive(Debug, Clone, Default)]
pub(crate) struct WindowStats {
    /// A_q = Σ_{t_j < t_q, in-window} β e^{−β(t_q − t_j)} per event.
    a: Vec<f64>,
    /// 1 − e^{−β(T − t_q)} per event.
    tail: Vec<f64>,
    tail_sum: f64,
}

impl WindowStats {
    pub(crate) fn compute(
        events: &[f64],
        window_end: f64,
        beta: f64,
        out: &mut WindowStats,
    ) {
        out.a.clear();
        out.tail.clear();
        out.tail_sum = 0.0;
        let mut s = 0.0; // Σ e^{−β(t_q − t_j)} over previous in-window events
        let mut prev = f64::NAN;
        for &t in events {
            if prev.is_finite() {
                s = (s + 1.0) * (-beta * (t - prev)).exp();
            }
            out.a.push(beta * s);
            let tail = 1.0 - (-beta * (window_end - t)).exp();
            out.tail.push(tail);
            out.tail_sum += tail;
            prev = t;
        }
    }

    pub(crate) fn loglik(&self, theta: f64, lambda0: f64, window_len: f64) -> Result<f64> {
        let mut s = 0.0;
        for &a in &self.a {
            let intensity = lambda0 + theta * a;
            if !(intensity > 0.0) {
                return Err(Error::NumericDomain(format!(
                    "nonpositive intensity {intensity} in window likelihood"
                )));
            }
            s += intensity.ln();
        }
        Ok(s - lambda0 * window_len - theta * self.tail_sum)
    }

    pub(crate) fn grad(&self, theta: f64, lambda0: f64) -> Result<f64> {
        let mut s = 0.0;
        for &a in &self.a {
            let intensity = lambda0 + theta * a;
            if !(intensity > 0.0) {
                return Err(Error::NumericDomain(format!(
                    "nonpositive intensity {intensity} in window gradient"
                )));
            }
            s += a / intensity;
        }
        Ok(s - self.tail_sum)
    }
}

/// Window log-likelihood ℓ(θ|X) for the events in (T−L, T], as a function
/// of the magnitude θ.  At θ = 0 this is the Poisson window likelihood
/// `m log λ₀ − λ₀ L` exactly.
pub fn window_loglik(
    events: &[f64],
    window_end: f64,
    window_len: f64,
    theta: f64,
    lambda0: f64,
    beta: f64,
) -> Result<f64> {
    check_window(events, window_end, window_len, theta, lambda0, beta)?;
    let mut stats = WindowStats::default();
    WindowStats::compute(events, window_end, beta, &mut stats);
    stats.loglik(theta, lambda0, window_len)
}

/// ∂ℓ(θ|X)/∂θ for the same window.
pub fn window_loglik_grad(
    events: &[f64],
    window_end: f64,
    window_len: f64,
    theta: f64,
    lambda0: f64,
    beta: f64,
) -> Result<f64> {
    check_window(events, window_end, window_len, theta, lambda0, beta)?;
    let mut stats = WindowStats::default();
    WindowStats::compute(events, window_end, beta, &mut stats);
    stats.grad(theta, lambda0)
}

fn check_window(
    events: &[f64],
    window_end: f64,
    window_len: f64,
    theta: f64,
    lambda0: f64,
    beta: f64,
) -> Result<()> {
    if !(window_len > 0.0) || !(lambda0 > 0.0) || !(beta > 0.0) {
        return Err(Error::Config("window length, rate and decay must be positive".into()));
    }
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Config(format!("theta must lie in [0,1), got {theta}")));
    }
    let lo = window_end - window_len;
    for (i, &t) in events.iter().enumerate() {
        if !(t > lo && t <= window_end) {
            return Err(Error::Config(format!(
                "event {t} outside window ({lo}, {window_end}]"
            )));
        }
        if i > 0 && t <= events[i - 1] {
            return Err(Error::Config("window events must be strictly increasing".into()));
        }
    }
    Ok(())
}

/// One gradient-ascent step on the window likelihood, clamped to
/// [0, 1−ε].
pub fn sgd_update(theta: f64, grad: f64, step_size: f64) -> f64 {
    (theta + step_size * grad).clamp(0.0, 1.0 - THETA_CLAMP_EPS)
}

/// Configuration of the scan detector.
#[derive(Debug, Clone)]
pub struct PointProcessConfig {
    pub kind: DetectorKind,
    /// Maximum number of simultaneous branches (w).
    pub max_branches: usize,
    /// Scan window length L (time units).
    pub window_len: f64,
    pub lambda0: f64,
    pub beta: f64,
    /// SGD step size γ.
    pub step_size: f64,
}

#[derive(Debug, Clone)]
struct PointBranch {
    k: u64,
    log_lambda: f64,
    theta: f64,
}

/// ACM/ASR scan statistics over event windows with per-branch SGD
/// magnitude estimates.  Scan times are the event times themselves, so
/// every window holds at least one event.
#[derive(Debug, Clone)]
pub struct PointProcessDetector {
    cfg: PointProcessConfig,
    branches: VecDeque<PointBranch>,
    window: VecDeque<f64>,
    scans: u64,
    statistic: f64,
    argmax_k: Option<u64>,
    stats_buf: WindowStats,
    events_buf: Vec<f64>,
    lse_buf: Vec<f64>,
}

impl PointProcessDetector {
    pub fn new(cfg: PointProcessConfig) -> Result<Self> {
        if cfg.max_branches < 1 {
            return Err(Error::Config("need at least one branch".into()));
        }
        if !(cfg.window_len > 0.0) || !(cfg.lambda0 > 0.0) || !(cfg.beta > 0.0) {
            return Err(Error::Config("window length, rate and decay must be positive".into()));
        }
        if !(cfg.step_size >= 0.0) {
            return Err(Error::Config("step size must be nonnegative".into()));
        }
        Ok(PointProcessDetector {
            cfg,
            branches: VecDeque::new(),
            window: VecDeque::new(),
            scans: 0,
            statistic: 0.0,
            argmax_k: None,
            stats_buf: WindowStats::default(),
            events_buf: Vec::new(),
            lse_buf: Vec::new(),
        })
    }

    /// Scan count so far (one scan per event).
    pub fn scans(&self) -> u64 {
        self.scans
    }

    pub fn statistic(&self) -> f64 {
        self.statistic
    }

    /// Consume the next event time and run one scan.  Branch increments
    /// are `ℓ(θ̂_k|X) − ℓ(0|X)`; a fresh branch starts at θ̂ = 0 (the null
    /// value), so its first increment is zero.  Alarms on `statistic > b`.
    pub fn process_event(&mut self, t: f64, b: f64) -> Result<Alarm> {
        if let Some(&last) = self.window.back() {
            if t <= last {
                return Err(Error::Config("event times must be strictly increasing".into()));
            }
        }
        self.window.push_back(t);
        let lo = t - self.cfg.window_len;
        while self.window.front().is_some_and(|&e| e <= lo) {
            self.window.pop_front();
        }
        self.scans += 1;

        self.events_buf.clear();
        self.events_buf.extend(self.window.iter().copied());
        WindowStats::compute(&self.events_buf, t, self.cfg.beta, &mut self.stats_buf);
        let null_ll = self.stats_buf.loglik(0.0, self.cfg.lambda0, self.cfg.window_len)?;

        self.branches.push_back(PointBranch {
            k: self.scans,
            log_lambda: 0.0,
            theta: 0.0,
        });
        while self.branches.len() > self.cfg.max_branches {
            self.branches.pop_front();
        }
        for br in self.branches.iter_mut() {
            let ll = self
                .stats_buf
                .loglik(br.theta, self.cfg.lambda0, self.cfg.window_len)?;
            br.log_lambda += ll - null_ll;
            let grad = self.stats_buf.grad(br.theta, self.cfg.lambda0)?;
            br.theta = sgd_update(br.theta, grad, self.cfg.step_size);
        }

        match self.cfg.kind {
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
            stop_time: self.scans,
            statistic: self.statistic,
            change_point: self.argmax_k,
        })
    }
}
