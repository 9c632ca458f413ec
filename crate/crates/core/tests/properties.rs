use hardkernel_core::harness::{fit_loglog_slope, ExperimentConfig};
use hardkernel_core::instance::BlockKernel;
use hardkernel_core::learners::LearnerSpec;
use hardkernel_core::losses::Loss;
use hardkernel_core::oracle::BudgetedOracle;
use hardkernel_core::solvers::{
    delta_gap, kernel_quadratic_form, objective_value, reduce_coefficients, spread_block_coefficients,
    BlockCoefficients, Coefficients, Objective,
};
use proptest::prelude::*;

fn loss() -> impl Strategy<Value = Loss> {
    prop::sample::select(Loss::ALL.to_vec())
}

fn label(loss: Loss) -> BoxedStrategy<f64> {
    match loss {
        Loss::Hinge => prop::sample::select(vec![-1.0, 1.0]).boxed(),
        _ => (-2.0..2.0f64).boxed(),
    }
}

fn learner() -> impl Strategy<Value = LearnerSpec> {
    prop_oneof![
        Just(LearnerSpec::Subsample { size: None }),
        Just(LearnerSpec::Nystrom { landmarks: None }),
        Just(LearnerSpec::UniformRandomQueries),
        Just(LearnerSpec::Zero),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn u_star_is_a_local_minimum((loss, y) in loss().prop_flat_map(|l| (Just(l), label(l))), a in 0.01..5.0f64) {
        let u = loss.u_star(y, a).unwrap();
        let f = |v: f64| loss.eval(v, y).unwrap() + a * v * v;
        for eps in [1e-3, 1e-5] {
            prop_assert!(f(u) <= f(u + eps) + 1e-12);
            prop_assert!(f(u) <= f(u - eps) + 1e-12);
        }
    }

    #[test]
    fn gap_is_nonnegative(
        d in 1usize..6,
        half in 1usize..20,
        seed in any::<u64>(),
        (loss, y) in loss().prop_flat_map(|l| (Just(l), label(l))),
        lambda in 0.01..2.0f64,
        alpha in prop::collection::vec(-1.0..1.0f64, 40),
    ) {
        let kernel = BlockKernel::sample(d, 2 * half, seed).unwrap();
        let obj = Objective::soft(loss, lambda).unwrap();
        let alpha = Coefficients(alpha[..2 * half].to_vec());
        let gap = delta_gap(&kernel, &obj, &alpha, y).unwrap();
        prop_assert!(gap.value >= 0.0);
    }

    #[test]
    fn spread_then_reduce_round_trips(d in 1usize..6, half in 6usize..30, seed in any::<u64>(), raw in prop::collection::vec(-3.0..3.0f64, 12)) {
        let kernel = BlockKernel::sample(d, 2 * half, seed).unwrap();
        let mut beta = BlockCoefficients::zeros(d);
        for (i, b) in beta.beta.iter_mut().enumerate() {
            if kernel.block_sizes()[i] > 0 {
                *b = [raw[2 * i], raw[2 * i + 1]];
            }
        }
        let alpha = spread_block_coefficients(&kernel, &beta).unwrap();
        let back = reduce_coefficients(&kernel, &alpha).unwrap();
        for (x, y) in back.beta.iter().zip(&beta.beta) {
            prop_assert!((x[0] - y[0]).abs() < 1e-12 && (x[1] - y[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_form_is_nonnegative_and_matches_dense(d in 1usize..5, half in 1usize..15, seed in any::<u64>(), alpha in prop::collection::vec(-1.0..1.0f64, 30)) {
        let kernel = BlockKernel::sample(d, 2 * half, seed).unwrap();
        let alpha = Coefficients(alpha[..2 * half].to_vec());
        let q = kernel_quadratic_form(&kernel, &alpha).unwrap();
        let dense = kernel.materialize().unwrap().quadratic_form(alpha.as_slice());
        prop_assert!(q >= 0.0);
        prop_assert!((q - dense).abs() < 1e-10);
    }

    #[test]
    fn learners_respect_their_budget(learner in learner(), budget in 0usize..200, seed in any::<u64>(), d in 1usize..10) {
        let kernel = BlockKernel::sample(d, 64, seed).unwrap();
        let mut oracle = BudgetedOracle::new(&kernel, budget);
        let obj = Objective::norm_bound(2.0).unwrap();
        let alpha = learner.learn(&mut oracle, &obj, 0.5, seed).unwrap();
        prop_assert!(oracle.used() <= budget);
        prop_assert_eq!(alpha.len(), 64);
        prop_assert!(objective_value(&kernel, &obj, &alpha, 0.5).unwrap().is_finite());
    }

    #[test]
    fn learner_spec_round_trips(learner in learner(), k in prop::option::of(1usize..100)) {
        let spec = match learner {
            LearnerSpec::Subsample { .. } => LearnerSpec::Subsample { size: k },
            LearnerSpec::Nystrom { .. } => LearnerSpec::Nystrom { landmarks: k },
            other => other,
        };
        prop_assert_eq!(spec.to_string().parse::<LearnerSpec>().unwrap(), spec);
    }

    #[test]
    fn power_laws_give_their_exponent(c in 0.01..100.0f64, p in -3.0..3.0f64, n in 4usize..12) {
        let pts: Vec<(f64, f64)> = (0..n).map(|i| {
            let x = 2f64.powi(i as i32 + 1);
            (x, c * x.powf(p))
        }).collect();
        let fit = fit_loglog_slope(&pts).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-9);
    }

    #[test]
    fn config_text_round_trips(trials in 1usize..5000, seed in any::<u64>(), budget in 1usize..10_000) {
        let mut cfg = ExperimentConfig::default();
        cfg.set("trials", &trials.to_string()).unwrap();
        cfg.set("seed", &seed.to_string()).unwrap();
        cfg.set("budget", &budget.to_string()).unwrap();
        let back: ExperimentConfig = cfg.to_string().parse().unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn exact_quarter_power_slope() {
    let pts: Vec<(f64, f64)> = (6..=12).map(|k| (2f64.powi(k), 2f64.powi(k).powf(-0.25))).collect();
    let fit = fit_loglog_slope(&pts).unwrap();
    assert!((fit.slope + 0.25).abs() < 1e-9);
}
