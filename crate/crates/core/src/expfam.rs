//! Exponential-family models in natural/mean coordinates.
//!
//! A family is described by its sufficient statistic φ, log-partition Φ,
//! mean map ∇Φ, Legendre dual Φ*, inverse mean map (∇Φ)* and natural
//! domain Θ.  Densities are `f_θ(x) = exp{θᵀφ(x) − Φ(θ)} dH(x)`; the
//! carrier `dH` is never evaluated — every quantity exposed here is a
//! ratio or a carrier-free loss `ℓ(θ;x) = Φ(θ) − θᵀφ(x)`, so carriers
//! cancel exactly.
//!
//! Three concrete families are provided:
//! - `Gaussian { dim }`: N(θ, I_d), φ(x)=x, Φ(θ)=½θᵀθ, Θ=ℝᵈ
//! - `Gamma`: fixed shape α=1 (exponential), θ=−β, Φ(θ)=−log(−θ), Θ=(−∞,0)
//! - `Bernoulli { dim }`: independent coordinates, θⱼ=log(pⱼ/(1−pⱼ)),
//!   Φ(θ)=Σⱼ log(1+exp(θⱼ)), Θ=ℝᵈ
//!
//! For all three, φ(x)=x, so observations are plain `&[f64]` vectors
//! ({0,1}-valued for Bernoulli).

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Error, Result};

/// Hard cap on the Gamma natural parameter: Θ is enforced as θ ≤ −ε so
/// that Φ(θ) = −log(−θ) and ∇Φ(θ) = −1/θ stay finite.
pub const GAMMA_THETA_MAX: f64 = -1e-8;

/// Bernoulli mean values are clamped into [ε, 1−ε] before any logarithm.
pub const BERNOULLI_MEAN_EPS: f64 = 1e-12;

/// A point of the natural parameter space Θ.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalParam(pub Vec<f64>);

/// A point of the mean (dual) parameter space, μ = ∇Φ(θ).
#[derive(Debug, Clone, PartialEq)]
pub struct MeanParam(pub Vec<f64>);

impl NaturalParam {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl MeanParam {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// An exponential-family model descriptor.  The enum variants bundle the
/// sufficient statistic, log-partition, its gradient, the dual and the
/// natural-domain predicate for one concrete family; dimension is carried
/// alongside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Multivariate normal with identity covariance and unknown mean.
    Gaussian { dim: usize },
    /// Gamma with fixed shape α=1 and unknown rate β, as θ = −β (scalar).
    Gamma,
    /// Product of independent Bernoulli coordinates (unknown pⱼ).
    Bernoulli { dim: usize },
}

impl Model {
    /// Parse a model selector: `"gaussian:d"`, `"gamma"`, `"bernoulli:d"`.
    pub fn parse(spec: &str) -> Result<Model> {
        let mut parts = spec.splitn(2, ':');
        let name = parts.next().unwrap_or("");
        let dim = parts.next();
        let parse_dim = |d: Option<&str>| -> Result<usize> {
            let d = d.ok_or_else(|| Error::Config(format!("model '{name}' needs a dimension")))?;
            let n: usize = d
                .parse()
                .map_err(|_| Error::Config(format!("bad model dimension '{d}'")))?;
            if n == 0 {
                return Err(Error::Config("model dimension must be positive".into()));
            }
            Ok(n)
        };
        match name {
            "gaussian" => Ok(Model::Gaussian {
                dim: parse_dim(dim)?,
            }),
            "gamma" => {
                if dim.is_some() {
                    return Err(Error::Config("gamma model is scalar; drop the ':d'".into()));
                }
                Ok(Model::Gamma)
            }
            "bernoulli" => Ok(Model::Bernoulli {
                dim: parse_dim(dim)?,
            }),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }

    /// Canonical selector string for this model.
    pub fn spec_string(&self) -> String {
        match self {
            Model::Gaussian { dim } => format!("gaussian:{dim}"),
            Model::Gamma => "gamma".to_string(),
            Model::Bernoulli { dim } => format!("bernoulli:{dim}"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Gaussian { dim } | Model::Bernoulli { dim } => *dim,
            Model::Gamma => 1,
        }
    }

    /// Natural-domain predicate for Θ.
    pub fn contains_natural(&self, theta: &[f64]) -> bool {
        if theta.len() != self.dim() {
            return false;
        }
        match self {
            Model::Gaussian { .. } | Model::Bernoulli { .. } => {
                theta.iter().all(|v| v.is_finite())
            }
            Model::Gamma => theta[0].is_finite() && theta[0] <= GAMMA_THETA_MAX,
        }
    }

    /// Validate and wrap a natural-parameter vector.
    pub fn natural_param(&self, value: Vec<f64>) -> Result<NaturalParam> {
        if value.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: value.len(),
            });
        }
        if !self.contains_natural(&value) {
            return Err(Error::InvalidParameter(format!(
                "{value:?} outside natural domain of {}",
                self.spec_string()
            )));
        }
        Ok(NaturalParam(value))
    }

    /// Validate and wrap a mean-parameter vector.
    pub fn mean_param(&self, value: Vec<f64>) -> Result<MeanParam> {
        if value.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: value.len(),
            });
        }
        let ok = match self {
            Model::Gaussian { .. } => value.iter().all(|v| v.is_finite()),
            Model::Gamma => value[0].is_finite() && value[0] > 0.0,
            Model::Bernoulli { .. } => value.iter().all(|v| (0.0..=1.0).contains(v)),
        };
        if !ok {
            return Err(Error::MeanDomain(format!(
                "{value:?} outside mean domain of {}",
                self.spec_string()
            )));
        }
        Ok(MeanParam(value))
    }

    /// Sufficient statistic φ(x).  Identity for all supported families.
    pub fn suff_stat<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        x
    }

    /// Log-partition Φ(θ).
    pub fn log_partition(&self, theta: &[f64]) -> f64 {
        match self {
            Model::Gaussian { .. } => 0.5 * dot(theta, theta),
            Model::Gamma => -(-theta[0]).ln(),
            Model::Bernoulli { .. } => theta.iter().map(|&t| softplus(t)).sum(),
        }
    }

    /// Mean map ∇Φ(θ) written into `out`.
    pub fn mean_from_natural(&self, theta: &[f64], out: &mut [f64]) {
        match self {
            Model::Gaussian { .. } => out.copy_from_slice(theta),
            Model::Gamma => out[0] = -1.0 / theta[0],
            Model::Bernoulli { .. } => {
                for (o, &t) in out.iter_mut().zip(theta) {
                    *o = sigmoid(t);
                }
            }
        }
    }

    /// Inverse mean map (∇Φ)* = (∇Φ)⁻¹ written into `out`.
    ///
    /// Bernoulli means are clamped into [ε, 1−ε] first; a Gamma mean μ ≤ 0
    /// produces a value outside Θ (to be repaired by projection, or to
    /// surface as a numeric-domain error downstream).
    pub fn natural_from_mean(&self, mu: &[f64], out: &mut [f64]) {
        match self {
            Model::Gaussian { .. } => out.copy_from_slice(mu),
            Model::Gamma => out[0] = -1.0 / mu[0],
            Model::Bernoulli { .. } => {
                for (o, &m) in out.iter_mut().zip(mu) {
                    let m = clamp_unit(m);
                    *o = (m / (1.0 - m)).ln();
                }
            }
        }
    }

    /// Legendre dual Φ*(μ).
    pub fn dual(&self, mu: &[f64]) -> f64 {
        match self {
            Model::Gaussian { .. } => 0.5 * dot(mu, mu),
            Model::Gamma => -1.0 - mu[0].ln(),
            Model::Bernoulli { .. } => mu
                .iter()
                .map(|&m| {
                    let m = clamp_unit(m);
                    m * m.ln() + (1.0 - m) * (1.0 - m).ln()
                })
                .sum(),
        }
    }

    /// Carrier-free loss ℓ(θ;x) = Φ(θ) − θᵀφ(x) = −log f_θ(x) + log dH(x).
    pub fn loss(&self, theta: &[f64], x: &[f64]) -> f64 {
        self.log_partition(theta) - dot(theta, x)
    }

    /// log(f_θ(x) / f_θ0(x)) = (θ−θ0)ᵀφ(x) − Φ(θ) + Φ(θ0).
    ///
    /// The carrier measure cancels exactly.
    pub fn log_density_ratio(
        &self,
        theta: &NaturalParam,
        theta0: &NaturalParam,
        x: &[f64],
    ) -> Result<f64> {
        self.check_natural(theta.as_slice())?;
        self.check_natural(theta0.as_slice())?;
        Ok(self.log_density_ratio_raw(theta.as_slice(), theta0.as_slice(), x))
    }

    /// Unchecked slice form of [`Model::log_density_ratio`] for hot loops.
    pub fn log_density_ratio_raw(&self, theta: &[f64], theta0: &[f64], x: &[f64]) -> f64 {
        dot(theta, x) - dot(theta0, x) - self.log_partition(theta) + self.log_partition(theta0)
    }

    /// KL divergence I(θ1, θ2) = Φ(θ2) − Φ(θ1) − (θ2−θ1)ᵀ∇Φ(θ1).
    pub fn kl_divergence(&self, theta1: &NaturalParam, theta2: &NaturalParam) -> Result<f64> {
        self.check_natural(theta1.as_slice())?;
        self.check_natural(theta2.as_slice())?;
        let t1 = theta1.as_slice();
        let t2 = theta2.as_slice();
        let mut grad = vec![0.0; self.dim()];
        self.mean_from_natural(t1, &mut grad);
        let mut cross = 0.0;
        for i in 0..t1.len() {
            cross += (t2[i] - t1[i]) * grad[i];
        }
        Ok(self.log_partition(t2) - self.log_partition(t1) - cross)
    }

    /// Bregman divergence in dual coordinates,
    /// B_{Φ*}(μ1, μ2) = Φ*(μ1) − Φ*(μ2) − ⟨∇Φ*(μ2), μ1−μ2⟩.
    pub fn bregman_dual(&self, mu1: &MeanParam, mu2: &MeanParam) -> Result<f64> {
        self.mean_param(mu1.0.clone())?;
        self.mean_param(mu2.0.clone())?;
        Ok(self.bregman_dual_raw(mu1.as_slice(), mu2.as_slice()))
    }

    /// Unchecked slice form of [`Model::bregman_dual`].
    pub fn bregman_dual_raw(&self, mu1: &[f64], mu2: &[f64]) -> f64 {
        let mut grad = vec![0.0; self.dim()];
        self.natural_from_mean(mu2, &mut grad);
        let mut cross = 0.0;
        for i in 0..mu1.len() {
            cross += grad[i] * (mu1[i] - mu2[i]);
        }
        self.dual(mu1) - self.dual(mu2) - cross
    }

    /// Bregman divergence in primal coordinates, B_Φ(θ1, θ2) = I(θ2, θ1).
    pub fn bregman_primal(&self, theta1: &NaturalParam, theta2: &NaturalParam) -> Result<f64> {
        self.kl_divergence(theta2, theta1)
    }

    /// Map classical parameters to the natural parameter.
    ///
    /// Gaussian: mean vector (identity).  Gamma: `[β]` with β > 0 maps to
    /// θ = −β.  Bernoulli: success probabilities pⱼ ∈ (0,1) map to
    /// θⱼ = log(pⱼ/(1−pⱼ)).
    pub fn natural_from_classical(&self, classical: &[f64]) -> Result<NaturalParam> {
        if classical.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: classical.len(),
            });
        }
        match self {
            Model::Gaussian { .. } => self.natural_param(classical.to_vec()),
            Model::Gamma => {
                let beta = classical[0];
                if !(beta > 0.0) || !beta.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "gamma rate must be positive, got {beta}"
                    )));
                }
                self.natural_param(vec![-beta])
            }
            Model::Bernoulli { .. } => {
                let mut theta = Vec::with_capacity(classical.len());
                for &p in classical {
                    if !(p > 0.0 && p < 1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "bernoulli probability must lie in (0,1), got {p}"
                        )));
                    }
                    theta.push((p / (1.0 - p)).ln());
                }
                self.natural_param(theta)
            }
        }
    }

    /// Inverse of [`Model::natural_from_classical`].
    pub fn classical_from_natural(&self, theta: &NaturalParam) -> Result<Vec<f64>> {
        self.check_natural(theta.as_slice())?;
        Ok(match self {
            Model::Gaussian { .. } => theta.0.clone(),
            Model::Gamma => vec![-theta.0[0]],
            Model::Bernoulli { .. } => theta.0.iter().map(|&t| sigmoid(t)).collect(),
        })
    }

    /// Draw one observation from f_θ into `out`.
    pub fn sample(&self, theta: &NaturalParam, rng: &mut impl Rng, out: &mut [f64]) -> Result<()> {
        self.check_natural(theta.as_slice())?;
        self.sample_raw(theta.as_slice(), rng, out);
        Ok(())
    }

    /// Unchecked slice form of [`Model::sample`] for Monte-Carlo loops.
    pub fn sample_raw(&self, theta: &[f64], rng: &mut impl Rng, out: &mut [f64]) {
        match self {
            Model::Gaussian { .. } => {
                for (o, &t) in out.iter_mut().zip(theta) {
                    let z: f64 = StandardNormal.sample(rng);
                    *o = t + z;
                }
            }
            Model::Gamma => {
                let beta = -theta[0];
                out[0] = Exp::new(beta).expect("positive rate").sample(rng);
            }
            Model::Bernoulli { .. } => {
                for (o, &t) in out.iter_mut().zip(theta) {
                    let p = sigmoid(t);
                    *o = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
                }
            }
        }
    }

    fn check_natural(&self, theta: &[f64]) -> Result<()> {
        if !self.contains_natural(theta) {
            return Err(Error::InvalidParameter(format!(
                "{theta:?} outside natural domain of {}",
                self.spec_string()
            )));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn clamp_unit(m: f64) -> f64 {
    m.clamp(BERNOULLI_MEAN_EPS, 1.0 - BERNOULLI_MEAN_EPS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    fn random_theta(model: &Model, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match model {
            Model::Gaussian { dim } => (0..*dim).map(|_| rng.random_range(-3.0..3.0)).collect(),
            Model::Gamma => vec![-rng.random_range(0.05..10.0)],
            Model::Bernoulli { dim } => (0..*dim).map(|_| rng.random_range(-5.0..5.0)).collect(),
        }
    }

    fn families() -> Vec<Model> {
        vec![
            Model::Gaussian { dim: 1 },
            Model::Gaussian { dim: 4 },
            Model::Gamma,
            Model::Bernoulli { dim: 3 },
        ]
    }

    #[test]
    fn parse_round_trips() {
        for spec in ["gaussian:20", "gamma", "bernoulli:190"] {
            let m = Model::parse(spec).unwrap();
            assert_eq!(m.spec_string(), spec);
        }
        assert!(Model::parse("gaussian").is_err());
        assert!(Model::parse("gamma:2").is_err());
        assert!(Model::parse("poisson:3").is_err());
        assert!(Model::parse("gaussian:0").is_err());
    }

    #[test]
    fn duality_round_trip_and_fenchel() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for model in families() {
            let d = model.dim();
            let mut mu = vec![0.0; d];
            let mut back = vec![0.0; d];
            for _ in 0..100 {
                let theta = random_theta(&model, &mut rng);
                model.mean_from_natural(&theta, &mut mu);
                model.natural_from_mean(&mu, &mut back);
                for i in 0..d {
                    assert!(
                        close(back[i], theta[i], 1e-10),
                        "{model:?}: roundtrip {} vs {}",
                        back[i],
                        theta[i]
                    );
                }
                // Fenchel identity: Φ(θ) + Φ*(∇Φ(θ)) = θᵀ∇Φ(θ).
                let lhs = model.log_partition(&theta) + model.dual(&mu);
                let rhs = dot(&theta, &mu);
                assert!(close(lhs, rhs, 1e-10), "{model:?}: fenchel {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn log_partition_convex_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for model in families() {
            for _ in 0..50 {
                let a = random_theta(&model, &mut rng);
                let b = random_theta(&model, &mut rng);
                // Second difference along the segment must be nonnegative.
                let f = |lambda: f64| {
                    let p: Vec<f64> = a
                        .iter()
                        .zip(&b)
                        .map(|(&ai, &bi)| ai + lambda * (bi - ai))
                        .collect();
                    model.log_partition(&p)
                };
                let h = 1e-3;
                for &l in &[0.25, 0.5, 0.75] {
                    let second = f(l + h) - 2.0 * f(l) + f(l - h);
                    assert!(second >= -1e-9, "{model:?}: nonconvex segment {second}");
                }
            }
        }
    }

    #[test]
    fn kl_matches_primal_bregman() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for model in families() {
            for _ in 0..100 {
                let t1 = model.natural_param(random_theta(&model, &mut rng)).unwrap();
                let t2 = model.natural_param(random_theta(&model, &mut rng)).unwrap();
                let kl = model.kl_divergence(&t1, &t2).unwrap();
                let breg = model.bregman_primal(&t2, &t1).unwrap();
                assert!(close(kl, breg, 1e-10));
                assert!(kl >= -1e-12);
            }
        }
    }

    #[test]
    fn log_density_ratio_examples() {
        let g1 = Model::Gaussian { dim: 1 };
        let z = g1.natural_param(vec![0.0]).unwrap();
        let one = g1.natural_param(vec![1.0]).unwrap();
        assert_eq!(g1.log_density_ratio(&z, &z, &[5.0]).unwrap(), 0.0);
        let r = g1.log_density_ratio(&one, &z, &[1.5]).unwrap();
        assert!(close(r, 1.0, 1e-12));

        // Gamma: check against the direct density formula f(x) = β e^{−βx}.
        let gm = Model::Gamma;
        let t = gm.natural_param(vec![-2.0]).unwrap();
        let t0 = gm.natural_param(vec![-1.0]).unwrap();
        let x = 1.0;
        let direct = (2.0 * (-2.0f64 * x).exp()).ln() - (1.0 * (-1.0f64 * x).exp()).ln();
        let r = gm.log_density_ratio(&t, &t0, &[x]).unwrap();
        assert!(close(r, direct, 1e-12));
        assert!(close(r, 2.0f64.ln() - 1.0, 1e-12));
    }

    #[test]
    fn kl_examples() {
        let g2 = Model::Gaussian { dim: 2 };
        let a = g2.natural_param(vec![1.0, 0.0]).unwrap();
        let b = g2.natural_param(vec![0.0, 0.0]).unwrap();
        assert!(close(g2.kl_divergence(&a, &b).unwrap(), 0.5, 1e-12));

        let gm = Model::Gamma;
        let t1 = gm.natural_param(vec![-1.0]).unwrap();
        let t2 = gm.natural_param(vec![-2.0]).unwrap();
        let kl = gm.kl_divergence(&t1, &t2).unwrap();
        assert!(close(kl, 1.0 - 2.0f64.ln(), 1e-12));

        // Independent quadrature oracle: ∫ f1 log(f1/f2) over [0, 80].
        let f = |beta: f64, x: f64| beta * (-beta * x).exp();
        let n = 400_000;
        let h = 80.0 / n as f64;
        let mut integral = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            integral += f(1.0, x) * (f(1.0, x) / f(2.0, x)).ln() * h;
        }
        assert!(close(kl, integral, 1e-5));
    }

    #[test]
    fn bregman_dual_examples() {
        let g1 = Model::Gaussian { dim: 1 };
        let m1 = g1.mean_param(vec![1.0]).unwrap();
        let m0 = g1.mean_param(vec![0.0]).unwrap();
        assert_eq!(g1.bregman_dual(&m1, &m1).unwrap(), 0.0);
        assert!(close(g1.bregman_dual(&m1, &m0).unwrap(), 0.5, 1e-12));

        let gm = Model::Gamma;
        let a = gm.mean_param(vec![2.0]).unwrap();
        let b = gm.mean_param(vec![1.0]).unwrap();
        let v = gm.bregman_dual(&a, &b).unwrap();
        assert!(close(v, 1.0 - 2.0f64.ln(), 1e-12));

        let be = Model::Bernoulli { dim: 1 };
        assert!(be.mean_param(vec![1.5]).is_err());
    }

    #[test]
    fn natural_from_classical_examples() {
        let be = Model::Bernoulli { dim: 1 };
        let t = be.natural_from_classical(&[0.5]).unwrap();
        assert_eq!(t.0[0], 0.0);
        let t = be.natural_from_classical(&[0.2]).unwrap();
        assert!(close(t.0[0], 0.25f64.ln(), 1e-12));
        assert!(be.natural_from_classical(&[0.0]).is_err());

        let gm = Model::Gamma;
        let t = gm.natural_from_classical(&[2.0]).unwrap();
        assert_eq!(t.0[0], -2.0);
        assert!(gm.natural_from_classical(&[-1.0]).is_err());

        // Inverse map round-trips.
        let p = be.classical_from_natural(&be.natural_from_classical(&[0.2]).unwrap()).unwrap();
        assert!(close(p[0], 0.2, 1e-12));
    }

    #[test]
    fn sampling_matches_known_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g1 = Model::Gaussian { dim: 1 };
        let z = g1.natural_param(vec![0.0]).unwrap();
        let mut x = [0.0];
        let mut sum = 0.0;
        for _ in 0..100_000 {
            g1.sample(&z, &mut rng, &mut x).unwrap();
            sum += x[0];
        }
        assert!((sum / 1e5).abs() < 0.02);

        let gm = Model::Gamma;
        let t = gm.natural_param(vec![-2.0]).unwrap();
        let mut sum = 0.0;
        for _ in 0..100_000 {
            gm.sample(&t, &mut rng, &mut x).unwrap();
            sum += x[0];
        }
        assert!((sum / 1e5 - 0.5).abs() < 0.02);
    }

    #[test]
    fn bernoulli_edge_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let d = 190;
        let be = Model::Bernoulli { dim: d };
        let p0 = be.natural_from_classical(&vec![0.2; d]).unwrap();
        let n = 40_000;
        let mut counts = vec![0u32; d];
        let mut x = vec![0.0; d];
        for _ in 0..n {
            be.sample(&p0, &mut rng, &mut x).unwrap();
            for (c, &v) in counts.iter_mut().zip(&x) {
                if v == 1.0 {
                    *c += 1;
                }
            }
        }
        for &c in &counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.2).abs() < 0.01, "edge frequency {freq}");
        }
    }

    #[test]
    fn likelihood_ratio_has_unit_null_mean() {
        // Single-step martingale check: E_{θ0}[f_θ(X)/f_{θ0}(X)] = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g1 = Model::Gaussian { dim: 1 };
        let theta = g1.natural_param(vec![0.7]).unwrap();
        let theta0 = g1.natural_param(vec![0.0]).unwrap();
        let n = 100_000;
        let mut x = [0.0];
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            g1.sample(&theta0, &mut rng, &mut x).unwrap();
            let w = g1.log_density_ratio(&theta, &theta0, &x).unwrap().exp();
            sum += w;
            sumsq += w * w;
        }
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * se + 1e-3,
            "mean {mean}, se {se}"
        );
    }

    #[test]
    fn gamma_domain_is_capped() {
        let gm = Model::Gamma;
        assert!(gm.natural_param(vec![0.0]).is_err());
        assert!(gm.natural_param(vec![-1e-9]).is_err());
        assert!(gm.natural_param(vec![GAMMA_THETA_MAX]).is_ok());
    }
}
