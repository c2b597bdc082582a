//! Cross-module statistical properties that don't fit a single unit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqdetect::expfam::GAMMA_THETA_MAX;
use seqdetect::{
    regret_direct, FeasibleSet, Model, OmdEstimator, StepSchedule,
};

/// Average regret curve increments shrink the way d·log t growth demands:
/// doubling the horizon adds a bounded, non-growing amount.
#[test]
fn regret_increments_shrink_like_log_growth() {
    let model = Model::Gaussian { dim: 3 };
    let d = 3.0;
    let theta0 = model.natural_param(vec![0.0; 3]).unwrap();
    let truth = model.natural_param(vec![0.8, -0.5, 0.3]).unwrap();
    let checkpoints = [50usize, 100, 200, 400];
    let streams = 300;
    let mut mean_r = [0.0f64; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..streams {
        let mut est =
            OmdEstimator::new(&model, &theta0, StepSchedule::OneOverT, FeasibleSet::FullSpace)
                .unwrap();
        let mut samples = Vec::with_capacity(400);
        let mut estimates = Vec::with_capacity(400);
        let mut x = vec![0.0; 3];
        for t in 1..=400usize {
            model.sample(&truth, &mut rng, &mut x).unwrap();
            est.step(&model, &x).unwrap();
            samples.push(x.clone());
            estimates.push(est.theta().to_vec());
            if let Some(pos) = checkpoints.iter().position(|&c| c == t) {
                mean_r[pos] +=
                    regret_direct(&model, &theta0, &samples, &estimates).unwrap();
            }
        }
    }
    for m in mean_r.iter_mut() {
        *m /= streams as f64;
    }
    let inc1 = mean_r[1] - mean_r[0];
    let inc2 = mean_r[2] - mean_r[1];
    let inc3 = mean_r[3] - mean_r[2];
    println!("mean regret {mean_r:?}, increments {inc1:.4} {inc2:.4} {inc3:.4}");
    assert!(inc1 > 0.0 && inc2 > 0.0 && inc3 > 0.0);
    // Doubling increments must not grow: logarithmic, not linear, growth.
    assert!(inc2 <= 1.3 * inc1 + 0.05 * d, "inc2 {inc2} vs inc1 {inc1}");
    assert!(inc3 <= 1.3 * inc2 + 0.05 * d, "inc3 {inc3} vs inc2 {inc2}");
    // And they are bounded by a per-dimension constant fitted on the
    // first increment.
    let c = 1.5 * inc1 / d + 0.05;
    assert!(inc3 <= c * d, "inc3 {inc3} vs c·d {}", c * d);
}

/// The estimator state invariants hold along random streams for every
/// family and feasible-set combination the experiments use.
#[test]
fn omd_state_invariants_hold_with_projections() {
    let cases: Vec<(Model, Vec<f64>, FeasibleSet)> = vec![
        (
            Model::Gaussian { dim: 4 },
            vec![0.0; 4],
            FeasibleSet::l1(1.5).unwrap(),
        ),
        (
            Model::Gaussian { dim: 2 },
            vec![0.0; 2],
            FeasibleSet::FullSpace,
        ),
        (
            Model::Gamma,
            vec![-1.0],
            FeasibleSet::clamp(vec![f64::NEG_INFINITY], vec![GAMMA_THETA_MAX]).unwrap(),
        ),
        (
            Model::Bernoulli { dim: 3 },
            vec![0.0; 3],
            FeasibleSet::FullSpace,
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    for (model, theta0, feasible) in cases {
        let theta0 = model.natural_param(theta0).unwrap();
        for _ in 0..25 {
            let mut est =
                OmdEstimator::new(&model, &theta0, StepSchedule::OneOverT, feasible.clone())
                    .unwrap();
            let mut x = vec![0.0; model.dim()];
            // Drift the generating parameter away from the null.
            let truth = match model {
                Model::Gaussian { dim } => model
                    .natural_param((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
                    .unwrap(),
                Model::Gamma => model
                    .natural_param(vec![-rng.random_range(0.2..4.0)])
                    .unwrap(),
                Model::Bernoulli { dim } => model
                    .natural_from_classical(
                        &(0..dim).map(|_| rng.random_range(0.05..0.95)).collect::<Vec<_>>(),
                    )
                    .unwrap(),
            };
            for _ in 0..100 {
                model.sample(&truth, &mut rng, &mut x).unwrap();
                est.step(&model, &x).unwrap();
                assert!(model.contains_natural(est.theta()));
                assert!(feasible.contains(est.theta()));
                let mut mu = vec![0.0; model.dim()];
                model.mean_from_natural(est.theta(), &mut mu);
                for (a, b) in mu.iter().zip(est.mu()) {
                    assert!(
                        (a - b).abs() <= 1e-10 * (1.0 + a.abs()),
                        "dual/primal inconsistency: {a} vs {b}"
                    );
                }
            }
        }
    }
}
