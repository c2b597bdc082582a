use criterion::{black_box, criterion_group, criterion_main, Criterion};

use seqdetect::harness::default_theta0;
use seqdetect::{
    project_l1, window_loglik, BranchEstimatorSpec, ChangeDetector, DetectorKind, FeasibleSet,
    Model, OmdEstimator, StepSchedule,
};
use seqdetect_bench::{bernoulli_stream, event_stream, gaussian_stream};

fn omd_spec(feasible: FeasibleSet) -> BranchEstimatorSpec {
    BranchEstimatorSpec::Omd {
        schedule: StepSchedule::OneOverT,
        feasible,
    }
}

fn bench_omd_step(c: &mut Criterion) {
    let model = Model::Gaussian { dim: 20 };
    let theta0 = default_theta0(&model);
    let stream = gaussian_stream(512, 20, 1);
    c.bench_function("omd_step/gaussian_d20", |b| {
        b.iter(|| {
            let mut est = OmdEstimator::new_untracked(
                &model,
                &theta0,
                StepSchedule::OneOverT,
                FeasibleSet::FullSpace,
            )
            .unwrap();
            for x in &stream {
                est.step(&model, black_box(x)).unwrap();
            }
            black_box(est.theta()[0])
        })
    });
}

fn bench_change_detectors(c: &mut Criterion) {
    let model = Model::Gaussian { dim: 20 };
    let theta0 = default_theta0(&model);
    let stream = gaussian_stream(256, 20, 2);
    c.bench_function("acm_l1_step/gaussian_d20_w100", |b| {
        b.iter(|| {
            let mut det = ChangeDetector::new(
                &model,
                &theta0,
                DetectorKind::Acm,
                omd_spec(FeasibleSet::l1(5.0).unwrap()),
                Some(100),
            )
            .unwrap();
            let mut last = 0.0;
            for x in &stream {
                last = det.step(&model, black_box(x), f64::INFINITY).unwrap().statistic;
            }
            black_box(last)
        })
    });

    let model = Model::Bernoulli { dim: 190 };
    let theta0 = default_theta0(&model);
    let stream = bernoulli_stream(256, 190, 0.2, 3);
    c.bench_function("asr_step/bernoulli_d190_w100", |b| {
        b.iter(|| {
            let mut det = ChangeDetector::new(
                &model,
                &theta0,
                DetectorKind::Asr,
                omd_spec(FeasibleSet::FullSpace),
                Some(100),
            )
            .unwrap();
            let mut last = 0.0;
            for x in &stream {
                last = det.step(&model, black_box(x), f64::INFINITY).unwrap().statistic;
            }
            black_box(last)
        })
    });
}

fn bench_l1_projection(c: &mut Criterion) {
    let v: Vec<f64> = gaussian_stream(1, 1000, 4).pop().unwrap();
    c.bench_function("project_l1/d1000", |b| {
        b.iter(|| black_box(project_l1(black_box(&v), 5.0)))
    });
}

fn bench_window_loglik(c: &mut Criterion) {
    let events = event_stream(64, 5);
    let end = events.last().unwrap() + 0.1;
    let window: Vec<f64> = events.iter().copied().filter(|&t| t > end - 10.0).collect();
    c.bench_function("window_loglik/m~10", |b| {
        b.iter(|| {
            black_box(
                window_loglik(black_box(&window), end, 10.0, 0.5, 1.0, 1.0).unwrap(),
            )
        })
    });
}

criterion_group!(
    benches,
    bench_omd_step,
    bench_change_detectors,
    bench_l1_projection,
    bench_window_loglik
);
criterion_main!(benches);
