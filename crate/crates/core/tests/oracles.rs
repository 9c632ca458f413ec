//! Independent reference computations checked against the library paths.

use hardkernel_core::instance::{adversarial_score, search_adversarial_labels, BlockKernel, LowRankInstance};
use hardkernel_core::learners::nystrom_gram;
use hardkernel_core::linalg::{psd_pseudo_inverse, symmetric_eigen, DenseMatrix};
use hardkernel_core::losses::Loss;
use hardkernel_core::oracle::BudgetedOracle;
use hardkernel_core::solvers::{
    objective_value_blocks, objective_value_dense, ridge_dense, solve_objective, spread_block_coefficients,
    BlockCoefficients, Objective,
};
use hardkernel_core::Error;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

fn random_psd(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let f = DenseMatrix::from_fn(n, rank, |_, _| rng.random_range(-1.0..1.0));
    f.matmul(&f.transpose())
}

#[test]
fn eigenvalues_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [2, 5, 12, 32] {
        let a = random_psd(n, n / 2 + 1, &mut rng);
        let ours = symmetric_eigen(&a).unwrap();
        let mut theirs: Vec<f64> = to_na(&a).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.values.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-10, "n = {n}: {x} vs {y}");
        }
        for k in 0..n {
            let v = ours.vector(k);
            let av = a.matvec(&v);
            for (p, q) in av.iter().zip(&v) {
                assert!((p - ours.values[k] * q).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn pseudo_inverse_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_psd(10, 4, &mut rng);
    let ours = to_na(&psd_pseudo_inverse(&a, 1e-10).unwrap());
    let theirs = to_na(&a).pseudo_inverse(1e-10).unwrap();
    assert!((ours - theirs).abs().max() < 1e-8);
}

#[test]
fn ridge_matches_nalgebra_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let m = rng.random_range(4..40);
        let k = random_psd(m, rng.random_range(1..m), &mut rng);
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lambda = rng.random_range(0.01..2.0);
        let ours = ridge_dense(&k, &y, lambda).unwrap();
        let shifted = to_na(&k) + DMatrix::identity(m, m) * (lambda * m as f64 / 2.0);
        let theirs = shifted.lu().solve(&DVector::from_vec(y)).unwrap();
        for (a, b) in ours.as_slice().iter().zip(theirs.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn soft_squared_optimum_matches_dense_closed_form() {
    for seed in 0..20 {
        let kernel = BlockKernel::sample(4, 40, seed).unwrap();
        let k = kernel.materialize().unwrap();
        let (lambda, y) = (0.3, 0.8);
        let shifted = to_na(&k) + DMatrix::identity(40, 40) * (lambda * 20.0);
        let alpha = shifted.lu().solve(&DVector::from_element(40, y)).unwrap();
        let obj = Objective::soft(Loss::Squared, lambda).unwrap();
        let dense = objective_value_dense(&k, &obj, alpha.as_slice(), &[y; 40]).unwrap();
        let block = solve_objective(&kernel, &obj, y).unwrap().value;
        assert!((dense - block).abs() < 1e-10, "seed {seed}: {dense} vs {block}");
    }
}

fn grid_min(f: impl Fn(f64, f64) -> f64, mut center: (f64, f64), mut half: f64) -> f64 {
    let steps = 60;
    let mut best = f(center.0, center.1);
    for _ in 0..25 {
        let start = center;
        for i in 0..=steps {
            for j in 0..=steps {
                let a = start.0 - half + 2.0 * half * i as f64 / steps as f64;
                let b = start.1 - half + 2.0 * half * j as f64 / steps as f64;
                let v = f(a, b);
                if v < best {
                    best = v;
                    center = (a, b);
                }
            }
        }
        half *= 0.25;
    }
    best
}

#[test]
fn single_block_solutions_match_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..40 {
        let kernel = BlockKernel::sample(1, 2 * rng.random_range(1..12), rng.random()).unwrap();
        let loss = Loss::ALL[case % 4];
        let y = if loss == Loss::Hinge {
            if rng.random_bool(0.5) { 1.0 } else { -1.0 }
        } else {
            rng.random_range(-1.5..1.5)
        };
        let obj = Objective::soft(loss, rng.random_range(0.05..2.0)).unwrap();
        let exact = solve_objective(&kernel, &obj, y).unwrap().value;
        let f = |a: f64, b: f64| objective_value_blocks(&kernel, &obj, &BlockCoefficients { beta: vec![[a, b]] }, y);
        let grid = grid_min(f, (0.0, 0.0), 20.0);
        assert!(grid >= exact - 1e-9, "case {case}: grid {grid} beat exact {exact}");
        assert!(grid <= exact + 1e-7, "case {case}: grid {grid} vs exact {exact}");
    }
}

/// Projected subgradient descent on `α` for the norm-constrained absolute
/// loss, using the dense kernel and its square root.
fn projected_subgradient(k: &DMatrix<f64>, y: f64, radius_sq: f64) -> f64 {
    let m = k.nrows();
    let eig = k.clone().symmetric_eigen();
    // w = K^{1/2} α, so αᵀKα = |w|² and Kα = K^{1/2} w
    let sqrt = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt())) * eig.eigenvectors.transpose();
    let value = |w: &DVector<f64>| (&sqrt * w).iter().map(|u| (u - y).abs()).sum::<f64>() / m as f64;
    let mut w = DVector::zeros(m);
    let mut best = value(&w);
    for t in 0..20_000 {
        let pred = &sqrt * &w;
        let g = sqrt.transpose() * pred.map(|u| (u - y).signum()) / m as f64;
        w -= g * (0.5 / ((t + 1) as f64).sqrt());
        let n2 = w.norm_squared();
        if n2 > radius_sq {
            w *= (radius_sq / n2).sqrt();
        }
        best = best.min(value(&w));
    }
    best
}

#[test]
fn norm_constrained_solution_matches_projected_subgradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..6 {
        let kernel = BlockKernel::sample(3, 24, rng.random()).unwrap();
        let radius_sq = rng.random_range(0.2..3.0);
        let y = rng.random_range(0.1..1.0);
        let obj = Objective::norm_bound(radius_sq).unwrap();
        let sol = solve_objective(&kernel, &obj, y).unwrap();
        let reference = projected_subgradient(&to_na(&kernel.materialize().unwrap()), y, radius_sq);
        assert!(reference >= sol.value - 1e-9, "case {case}: {reference} below {}", sol.value);
        assert!(reference <= sol.value + 2e-3, "case {case}: {reference} vs {}", sol.value);

        let alpha = spread_block_coefficients(&kernel, &sol.beta).unwrap();
        let k = kernel.materialize().unwrap();
        assert!(k.quadratic_form(alpha.as_slice()) <= radius_sq * (1.0 + 1e-9));
    }
}

#[test]
fn random_feasible_points_never_beat_the_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let kernel = BlockKernel::sample(5, 60, 9).unwrap();
    let k = kernel.materialize().unwrap();
    for loss in Loss::ALL {
        let y = 1.0;
        let obj = Objective::soft(loss, 0.2).unwrap();
        let sol = solve_objective(&kernel, &obj, y).unwrap();
        let alpha = spread_block_coefficients(&kernel, &sol.beta).unwrap();
        let at = objective_value_dense(&k, &obj, alpha.as_slice(), &[y; 60]).unwrap();
        assert!((at - sol.value).abs() < 1e-10);
        for _ in 0..200 {
            let scale = 10f64.powi(rng.random_range(-4..0));
            let probe: Vec<f64> = alpha.as_slice().iter().map(|a| a + scale * rng.random_range(-1.0..1.0)).collect();
            let v = objective_value_dense(&k, &obj, &probe, &[y; 60]).unwrap();
            assert!(v >= sol.value - 1e-10, "{loss}: {v} < {}", sol.value);
        }
    }
}

#[test]
fn sign_search_agrees_with_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in 1..=6 {
        let m = 4 * d;
        let placeholder = LowRankInstance::new(d, m, vec![1; 2 * d]).unwrap();
        for _ in 0..3 {
            let k = rng.random_range(1..=d);
            let marks = rand::seq::index::sample(&mut rng, m, k).into_vec();
            let gram = nystrom_gram(&placeholder, &marks).unwrap();
            let best = (0..1u32 << (2 * d))
                .map(|bits| {
                    let z: Vec<i8> = (0..2 * d).map(|j| if bits >> j & 1 == 1 { 1 } else { -1 }).collect();
                    adversarial_score(&gram, d, &z).unwrap()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(best >= d as f64 - 1e-9, "d = {d}: exhaustive maximum {best}");
            let found = search_adversarial_labels(&gram, d, 1_000_000, rng.random()).unwrap();
            assert!(found.score >= d as f64 * (1.0 - 1e-12));
            assert!(found.score <= best + 1e-9);
            assert!((adversarial_score(&gram, d, &found.z).unwrap() - found.score).abs() < 1e-9);
        }
    }
}

#[test]
fn sampled_kernels_follow_the_hard_distribution() {
    let (d, m, n) = (5, 40, 4000);
    let mut popcount = 0.0;
    let mut sizes = vec![0.0; d];
    let mut first_block_sq = 0.0;
    for seed in 0..n {
        let kernel = BlockKernel::sample(d, m, seed).unwrap();
        popcount += kernel.sigma_popcount() as f64;
        for (s, &b) in sizes.iter_mut().zip(kernel.block_sizes()) {
            assert_eq!(b % 2, 0);
            *s += b as f64;
        }
        first_block_sq += (kernel.block_sizes()[0] as f64).powi(2);
        for t in 0..m {
            assert_eq!(kernel.entry(t, t).unwrap(), 1);
        }
    }
    let n = n as f64;
    // popcount ~ Binomial(d, 1/2)
    let se = (d as f64 * 0.25 / n).sqrt();
    assert!((popcount / n - d as f64 / 2.0).abs() < 4.0 * se);
    // N_i = 2·Binomial(m/2, 1/d): mean m/d, variance 4(m/2)(1/d)(1 − 1/d)
    let var = 4.0 * (m as f64 / 2.0) * (1.0 / d as f64) * (1.0 - 1.0 / d as f64);
    for s in &sizes {
        assert!((s / n - m as f64 / d as f64).abs() < 4.0 * (var / n).sqrt());
    }
    let mean = sizes[0] / n;
    let sample_var = first_block_sq / n - mean * mean;
    assert!((sample_var - var).abs() < 0.15 * var);
}

#[test]
fn kernel_entries_follow_block_structure() {
    let kernel = BlockKernel::sample(6, 60, 11).unwrap();
    for s in 0..60 {
        for r in 0..60 {
            let (a, b) = (kernel.slot(s), kernel.slot(r));
            let expected = a.block == b.block && (a.sub == b.sub || kernel.sigma()[a.block]);
            assert_eq!(kernel.entry(s, r).unwrap(), u8::from(expected));
        }
    }
}

#[test]
fn oracle_charges_distinct_pairs_and_enforces_budget() {
    let kernel = BlockKernel::sample(3, 20, 2).unwrap();
    let mut oracle = BudgetedOracle::new(&kernel, 2);
    assert_eq!(oracle.missed_count(), 3);
    oracle.query(0, 1).unwrap();
    oracle.query(1, 0).unwrap();
    assert_eq!(oracle.used(), 1);
    oracle.query(2, 3).unwrap();
    assert!(matches!(oracle.query(4, 5), Err(Error::BudgetExhausted { budget: 2 })));
    oracle.query(3, 2).unwrap();
    assert_eq!(oracle.used(), 2);
    assert!(matches!(oracle.query(0, 20), Err(Error::IndexOutOfRange { .. })));
}
