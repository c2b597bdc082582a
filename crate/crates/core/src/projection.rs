//! Feasible sets Γ and the Bregman projections used by the projected
//! primal update.
//!
//! Three set shapes are supported: the full space, the ℓ1 ball
//! `{θ : ‖θ‖₁ ≤ s}` (Gaussian only, where the Bregman divergence is
//! squared Euclidean and the projection reduces to soft thresholding),
//! and per-coordinate interval clamps in natural coordinates.  The
//! log-partitions of all supported families are separable across
//! coordinates, so the Bregman projection onto a box is the coordinatewise
//! monotone clamp.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{Model, NaturalParam};

/// A closed convex feasible set for the projected primal update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeasibleSet {
    /// No constraint; the projection is the identity.
    FullSpace,
    /// ℓ1 ball of the given radius (must be positive).
    L1Ball { radius: f64 },
    /// Per-coordinate interval `[lo[i], hi[i]]` in natural coordinates.
    /// Bounds may be infinite.
    IntervalClamp { lo: Vec<f64>, hi: Vec<f64> },
}

impl FeasibleSet {
    /// Parse a feasible-set selector: `"full"`, `"l1:<s>"`,
    /// `"clamp:<lo>,<hi>"` (uniform bounds expanded to `dim`; `-inf`/`inf`
    /// accepted).
    pub fn parse(spec: &str, dim: usize) -> Result<FeasibleSet> {
        if spec == "full" {
            return Ok(FeasibleSet::FullSpace);
        }
        if let Some(rest) = spec.strip_prefix("l1:") {
            let radius: f64 = rest
                .parse()
                .map_err(|_| Error::Config(format!("bad l1 radius '{rest}'")))?;
            return FeasibleSet::l1(radius);
        }
        if let Some(rest) = spec.strip_prefix("clamp:") {
            let mut parts = rest.splitn(2, ',');
            let lo = parse_bound(parts.next().unwrap_or(""))?;
            let hi = parse_bound(
                parts
                    .next()
                    .ok_or_else(|| Error::Config("clamp needs '<lo>,<hi>'".into()))?,
            )?;
            return FeasibleSet::clamp(vec![lo; dim], vec![hi; dim]);
        }
        Err(Error::Config(format!("unknown feasible set '{spec}'")))
    }

    pub fn l1(radius: f64) -> Result<FeasibleSet> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!("l1 radius must be positive, got {radius}")));
        }
        Ok(FeasibleSet::L1Ball { radius })
    }

    pub fn clamp(lo: Vec<f64>, hi: Vec<f64>) -> Result<FeasibleSet> {
        if lo.len() != hi.len() {
            return Err(Error::LengthMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h || l.is_nan() || h.is_nan()) {
            return Err(Error::Config("clamp bounds must satisfy lo <= hi".into()));
        }
        Ok(FeasibleSet::IntervalClamp { lo, hi })
    }

    /// Membership test (up to a 1e-12 slack on the ℓ1 radius).
    pub fn contains(&self, v: &[f64]) -> bool {
        match self {
            FeasibleSet::FullSpace => true,
            FeasibleSet::L1Ball { radius } => {
                v.iter().map(|x| x.abs()).sum::<f64>() <= radius + 1e-12
            }
            FeasibleSet::IntervalClamp { lo, hi } => v
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (l, h))| *x >= *l && *x <= *h),
        }
    }
}

fn parse_bound(s: &str) -> Result<f64> {
    match s {
        "-inf" => Ok(f64::NEG_INFINITY),
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => s
            .parse()
            .map_err(|_| Error::Config(format!("bad clamp bound '{s}'"))),
    }
}

/// Euclidean projection of `v` onto `{w : ‖w‖₁ ≤ s}` by the exact
/// sort-based soft-threshold rule.  Feasible inputs are returned
/// unchanged.
pub fn project_l1(v: &[f64], s: f64) -> Vec<f64> {
    assert!(s > 0.0, "l1 radius must be positive");
    let norm1: f64 = v.iter().map(|x| x.abs()).sum();
    // The slack keeps re-projection of an already-projected point exact.
    if norm1 <= s + 1e-12 {
        return v.to_vec();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    // Threshold level: largest rho with mags[rho-1] > (cumsum - s)/rho.
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cum += m;
        let candidate = (cum - s) / (j as f64 + 1.0);
        if m > candidate {
            tau = candidate;
        } else {
            break;
        }
    }
    v.iter()
        .map(|&x| x.signum() * (x.abs() - tau).max(0.0))
        .collect()
}

/// Applies the projection of `project_l1` in place (no-op when feasible).
pub(crate) fn project_l1_inplace(v: &mut [f64], s: f64) {
    let norm1: f64 = v.iter().map(|x| x.abs()).sum();
    if norm1 <= s + 1e-12 {
        return;
    }
    let w = project_l1(v, s);
    v.copy_from_slice(&w);
}

/// Projected primal update: argmin over u ∈ Γ of B_Φ(u, θ̃).
///
/// Returns θ̃ itself when it already lies in the set.  For the ℓ1 ball the
/// model must be Gaussian (B_Φ is squared Euclidean there); interval
/// clamps apply coordinatewise for every supported family because their
/// log-partitions are separable.
pub fn bregman_project(model: &Model, set: &FeasibleSet, theta_tilde: &[f64]) -> Result<Vec<f64>> {
    let mut out = theta_tilde.to_vec();
    bregman_project_inplace(model, set, &mut out)?;
    Ok(out)
}

/// In-place form of [`bregman_project`], used by the estimator hot path.
pub(crate) fn bregman_project_inplace(
    model: &Model,
    set: &FeasibleSet,
    theta: &mut [f64],
) -> Result<()> {
    match set {
        FeasibleSet::FullSpace => {}
        FeasibleSet::L1Ball { radius } => {
            if !matches!(model, Model::Gaussian { .. }) {
                return Err(Error::Config(
                    "l1-ball feasible set is only supported for the gaussian model".into(),
                ));
            }
            project_l1_inplace(theta, *radius);
        }
        FeasibleSet::IntervalClamp { lo, hi } => {
            if lo.len() != theta.len() {
                return Err(Error::LengthMismatch {
                    expected: theta.len(),
                    got: lo.len(),
                });
            }
            for i in 0..theta.len() {
                theta[i] = theta[i].clamp(lo[i], hi[i]);
            }
        }
    }
    if !model.contains_natural(theta) {
        let msg = format!(
            "projected point {theta:?} is outside the natural domain of {}",
            model.spec_string()
        );
        return match set {
            // A clamp always lands inside its box, so the box itself must
            // miss the natural domain.
            FeasibleSet::IntervalClamp { .. } => Err(Error::Config(msg)),
            _ => Err(Error::NumericDomain(msg)),
        };
    }
    Ok(())
}

/// Typed wrapper over [`bregman_project`] for the public operation.
pub fn bregman_project_param(
    model: &Model,
    set: &FeasibleSet,
    theta_tilde: &NaturalParam,
) -> Result<NaturalParam> {
    let v = bregman_project(model, set, theta_tilde.as_slice())?;
    Ok(NaturalParam(v))
}
