//! Verification suites. Each suite returns what it measured; the pass
//! thresholds used by the `verify` command live in [`run_criterion`].

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::output::write_csv;
use crate::harness::stats::{SlopeFit, Summary};
use crate::harness::sweep::{run_scaling_experiment, PointSummary};
use crate::harness::trial::derive_seed;
use crate::instance::{search_adversarial_labels, BlockKernel, BlockPartition, LowRankInstance};
use crate::learners::{nystrom_gram, nystrom_learn, LearnerSpec};
use crate::linalg::DenseMatrix;
use crate::losses::Loss;
use crate::oracle::BudgetedOracle;
use crate::solvers::{
    delta_gap, kernel_quadratic_form, lowrank_delta_gap, objective_value, objective_value_dense,
    reduced_ridge_objective, ridge_dense, ridge_reduced, norm_certificate, Coefficients, Objective,
    PartitionedMatrix,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn random_label(rng: &mut ChaCha8Rng, loss: Loss) -> f64 {
    if loss == Loss::Hinge {
        if rng.random_bool(0.5) {
            1.0
        } else {
            -1.0
        }
    } else {
        rng.random_range(-2.0..2.0)
    }
}

/// Minimum of a convex scalar function on `[lo, hi]` by ternary search.
pub fn ternary_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    for _ in 0..300 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub block_cases: usize,
    /// Block-sum objective against the dense evaluation.
    pub block_max_dev: f64,
    pub ridge_cases: usize,
    /// Block sums of the dense ridge solution against the reduced solve.
    pub ridge_beta_max_dev: f64,
    /// Dense ridge objective against the reduced rewrite.
    pub ridge_objective_max_dev: f64,
    /// Reduced solve with `G = I` against `z/(1+dλ)`.
    pub identity_gram_max_dev: f64,
    /// `αᵀKα` against `(Σα)²` on all-ones kernels, both paths.
    pub all_ones_max_dev: f64,
}

fn random_objective(rng: &mut ChaCha8Rng) -> (Objective, f64) {
    let loss = Loss::ALL[rng.random_range(0..4)];
    let objective = if loss == Loss::Absolute && rng.random_bool(0.5) {
        Objective::norm_bound(2.0).expect("valid")
    } else {
        Objective::soft(loss, log_uniform(rng, 1e-3, 2.0)).expect("valid")
    };
    (objective, random_label(rng, loss))
}

pub fn verify_identities(seed: u64, block_cases: usize, ridge_cases: usize) -> Result<IdentityReport> {
    let mut rng = rng(seed);
    let mut block_max_dev: f64 = 0.0;
    for case in 0..block_cases {
        let m = 2 * rng.random_range(4..=128);
        let d = rng.random_range(1..=m / 4);
        let kernel = BlockKernel::sample(d, m, derive_seed(seed, 1, case))?;
        let scale = 1.0 / (m as f64).sqrt();
        let alpha = Coefficients((0..m).map(|_| rng.random_range(-scale..scale)).collect());
        let (objective, y) = random_objective(&mut rng);
        let block = objective_value(&kernel, &objective, &alpha, y)?;
        let dense = objective_value_dense(&kernel.materialize()?, &objective, alpha.as_slice(), &vec![y; m])?;
        block_max_dev = block_max_dev.max((block - dense).abs());
    }

    let mut ridge_beta_max_dev: f64 = 0.0;
    let mut ridge_objective_max_dev: f64 = 0.0;
    for _ in 0..ridge_cases {
        let d = rng.random_range(1..=8);
        let len = rng.random_range(1..=96 / (2 * d)).min(6);
        let blocks = 2 * d;
        let m = blocks * len;
        let rank = rng.random_range(1..=blocks);
        let a = DenseMatrix::from_fn(blocks, rank, |_, _| rng.random_range(-1.0..1.0));
        let gram = a.matmul(&a.transpose());
        let matrix = PartitionedMatrix::new(BlockPartition::new(m, blocks)?, gram)?;
        let z: Vec<f64> = (0..blocks).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let targets: Vec<f64> = (0..m).map(|t| z[matrix.partition().block_of(t)]).collect();
        let lambda = log_uniform(&mut rng, 0.01, 2.0);
        let dense = matrix.expand()?;
        let alpha = ridge_dense(&dense, &targets, lambda)?;
        let reduced = ridge_reduced(&matrix, &z, lambda)?;
        let beta = matrix.partition().block_sums(alpha.as_slice());
        for (x, y) in beta.iter().zip(&reduced.beta) {
            ridge_beta_max_dev = ridge_beta_max_dev.max((x - y).abs());
        }
        let probe: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let squared = Objective::soft(Loss::Squared, lambda)?;
        let dense_value = objective_value_dense(&dense, &squared, &probe, &targets)?;
        let reduced_value =
            reduced_ridge_objective(matrix.gram(), &z, lambda, &matrix.partition().block_sums(&probe));
        ridge_objective_max_dev = ridge_objective_max_dev.max((dense_value - reduced_value).abs());
    }

    let mut identity_gram_max_dev: f64 = 0.0;
    for d in 1..=8 {
        let lambda = log_uniform(&mut rng, 0.01, 2.0);
        let matrix = PartitionedMatrix::new(BlockPartition::new(4 * d, 2 * d)?, DenseMatrix::identity(2 * d))?;
        let z: Vec<f64> = (0..2 * d).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let r = ridge_reduced(&matrix, &z, lambda)?;
        for (b, zi) in r.beta.iter().zip(&z) {
            identity_gram_max_dev = identity_gram_max_dev.max((b - zi / (1.0 + d as f64 * lambda)).abs());
        }
    }

    let mut all_ones_max_dev: f64 = 0.0;
    for case in 0..10 {
        let m = 2 * rng.random_range(1..=16);
        let kernel = loop {
            let k = BlockKernel::sample(1, m, derive_seed(seed, 2, case) ^ rng.random::<u64>())?;
            if k.sigma()[0] {
                break k;
            }
        };
        let alpha = Coefficients((0..m).map(|_| rng.random_range(-1.0..1.0)).collect());
        let total: f64 = alpha.as_slice().iter().sum();
        let block = kernel_quadratic_form(&kernel, &alpha)?;
        let dense = kernel.materialize()?.quadratic_form(alpha.as_slice());
        all_ones_max_dev = all_ones_max_dev
            .max((block - total * total).abs())
            .max((dense - total * total).abs());
    }

    Ok(IdentityReport {
        block_cases,
        block_max_dev,
        ridge_cases,
        ridge_beta_max_dev,
        ridge_objective_max_dev,
        identity_gram_max_dev,
        all_ones_max_dev,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizerReport {
    pub cases: usize,
    /// Closed form against ternary search, over random `(loss, y, a)`.
    pub max_dev: f64,
    /// Closed form against the anchor values.
    pub anchor_max_dev: f64,
}

pub fn verify_scalar_minimizers(seed: u64, cases: usize) -> Result<MinimizerReport> {
    let mut rng = rng(seed);
    let mut max_dev: f64 = 0.0;
    for _ in 0..cases {
        let loss = Loss::ALL[rng.random_range(0..4)];
        let y = random_label(&mut rng, loss);
        let a = log_uniform(&mut rng, 0.05, 10.0);
        let closed = loss.u_star(y, a)?;
        let width = 10.0 * y.abs() + 10.0;
        let (found, _) = ternary_min(|u| loss.eval_unchecked(u, y) + a * u * u, -width, width);
        max_dev = max_dev.max((closed - found).abs());
    }
    let mut anchor_max_dev: f64 = 0.0;
    for &(lambda, d, p) in &[(0.1, 5usize, 1.0), (0.02, 10, 0.5), (0.3, 1, 2.0)] {
        let a = p * lambda * d as f64;
        let anchors = [
            (Loss::Squared, 1.0, a, 1.0 / (1.0 + a)),
            (Loss::Squared, 1.0, a / 2.0, 1.0 / (1.0 + a / 2.0)),
            (Loss::Absolute, 1.0 / (2.0 * a), a, 1.0 / (2.0 * a)),
            (Loss::Linear, 1.0, a, -1.0 / (2.0 * a)),
        ];
        for (loss, y, weight, expected) in anchors {
            anchor_max_dev = anchor_max_dev.max((loss.u_star(y, weight)? - expected).abs());
        }
        if a <= 0.5 {
            anchor_max_dev = anchor_max_dev.max((Loss::Hinge.u_star(1.0, a)? - 1.0).abs());
        }
        if a <= 1.0 {
            anchor_max_dev = anchor_max_dev.max((Loss::Hinge.u_star(1.0, a / 2.0)? - 1.0).abs());
        }
    }
    Ok(MinimizerReport {
        cases,
        max_dev,
        anchor_max_dev,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearReport {
    pub instances: usize,
    pub max_gap: f64,
    pub max_queries: usize,
    /// `max |K(v + λα)|` on the dense path.
    pub max_first_order_residual: f64,
}

pub fn verify_linear_zero_query(seed: u64, instances: usize) -> Result<LinearReport> {
    let mut rng = rng(seed);
    let mut report = LinearReport {
        instances,
        max_gap: 0.0,
        max_queries: 0,
        max_first_order_residual: 0.0,
    };
    for case in 0..instances {
        let d = rng.random_range(1..=32);
        let m = 2 * rng.random_range(d..=128);
        let kernel = BlockKernel::sample(d, m, derive_seed(seed, 3, case))?;
        let lambda = log_uniform(&mut rng, 0.01, 1.0);
        let y = rng.random_range(-2.0..2.0);
        let objective = Objective::soft(Loss::Linear, lambda)?;
        let mut oracle = BudgetedOracle::new(&kernel, 0);
        let alpha = LearnerSpec::LinearClosedForm.learn(&mut oracle, &objective, y, 0)?;
        report.max_queries = report.max_queries.max(oracle.used());
        report.max_gap = report.max_gap.max(delta_gap(&kernel, &objective, &alpha, y)?.value.abs());
        let shifted: Vec<f64> = alpha.as_slice().iter().map(|a| y / m as f64 + lambda * a).collect();
        let residual = kernel.materialize()?.matvec(&shifted);
        report.max_first_order_residual = residual.iter().fold(report.max_first_order_residual, |acc, r| acc.max(r.abs()));
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub instances: usize,
    pub max_objective: f64,
    pub max_quadratic_form: f64,
}

pub fn verify_certificate(seed: u64, instances: usize, max_d: usize) -> Result<CertificateReport> {
    let mut rng = rng(seed);
    let objective = Objective::norm_bound(2.0)?;
    let mut report = CertificateReport {
        instances,
        max_objective: 0.0,
        max_quadratic_form: 0.0,
    };
    for case in 0..instances {
        let d = rng.random_range(1..=max_d);
        let m = 2 * d * rng.random_range(1..=64);
        let kernel = BlockKernel::sample(d, m, derive_seed(seed, 4, case))?;
        let alpha = norm_certificate(&kernel);
        let y = 1.0 / (d as f64).sqrt();
        report.max_objective = report.max_objective.max(objective_value(&kernel, &objective, &alpha, y)?);
        report.max_quadratic_form = report.max_quadratic_form.max(kernel_quadratic_form(&kernel, &alpha)?);
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageEstimate {
    pub learner: String,
    pub d: usize,
    /// Monte Carlo estimate of `Σ_i Pr(E_i)`.
    pub missed: Summary,
}

impl CoverageEstimate {
    /// `estimate − 3·stderr > d/2`.
    pub fn passes(&self) -> bool {
        self.missed.lower(3.0) > self.d as f64 / 2.0
    }
}

pub fn verify_block_coverage(
    learner: LearnerSpec,
    d: usize,
    m: usize,
    budget: usize,
    trials: usize,
    seed: u64,
) -> Result<CoverageEstimate> {
    let mut cfg = ExperimentConfig {
        learner,
        trials,
        seed,
        ..ExperimentConfig::default()
    };
    cfg.set("d", &d.to_string())?;
    cfg.set("m", &m.to_string())?;
    cfg.set("budget", &budget.to_string())?;
    let (report, _) = run_scaling_experiment(&cfg)?;
    Ok(CoverageEstimate {
        learner: learner.to_string(),
        d,
        missed: report.points[0].missed_blocks,
    })
}

/// One `(loss, λ, n/m, y)` case of the per-block min-max inequality.
#[derive(Debug, Clone, Serialize)]
pub struct MinimaxCase {
    pub loss: Loss,
    pub lambda: f64,
    /// `n/m`, the share of points in the block.
    pub ratio: f64,
    pub y: f64,
    pub u1: f64,
    pub u2: f64,
    /// Smallest `max_σ g^σ` found on the refined grid.
    pub lhs: f64,
    /// `(λ/12)(2u₁* − u₂*)²`.
    pub rhs: f64,
    /// Distance of the grid minimizer of the averaged quadratic surrogate
    /// from `u = v = (u₁*+u₂*)/3`, in grid steps.
    pub surrogate_offset_steps: f64,
    /// `|surrogate(c, c) − rhs|`.
    pub surrogate_value_dev: f64,
    /// Worst violation of the two strong-convexity displacement bounds on
    /// the grid (0 when both hold).
    pub displacement_violation: f64,
    /// Closed-form minima of `f^σ` against ternary search.
    pub closed_form_dev: f64,
}

impl MinimaxCase {
    pub fn passes(&self, tol: f64) -> bool {
        self.lhs >= self.rhs - tol
            && self.surrogate_offset_steps <= 1.0
            && self.surrogate_value_dev <= 1e-12 * (1.0 + self.rhs)
            && self.displacement_violation == 0.0
            && self.closed_form_dev <= 1e-9
    }
}

pub fn verify_block_minimax(loss: Loss, lambda: f64, ratio: f64, y: f64, grid: usize) -> Result<MinimaxCase> {
    if !(lambda > 0.0) || !(ratio > 0.0) || grid < 3 {
        return Err(Error::invalid("need λ > 0, n/m > 0 and a grid of at least 3 points"));
    }
    loss.check_label(y)?;
    let l = |u: f64| loss.eval_unchecked(u, y);
    let f0 = |u: f64, v: f64| ratio / 2.0 * (l(u) + l(v)) + lambda / 2.0 * (u * u + v * v);
    let f1 = |u: f64, v: f64| ratio / 2.0 * (l(u + v) + l(u + v)) + lambda / 2.0 * (u + v) * (u + v);
    let u1 = loss.u_star(y, lambda / ratio)?;
    let u2 = loss.u_star(y, lambda / (2.0 * ratio))?;

    let min0_closed = 2.0 * (ratio / 2.0 * l(u1) + lambda / 2.0 * u1 * u1);
    let min1_closed = ratio * l(u2) + lambda / 2.0 * u2 * u2;
    let reach = 4.0 * (u1.abs() + u2.abs() + y.abs()) + 10.0;
    let (_, half0) = ternary_min(|u| ratio / 2.0 * l(u) + lambda / 2.0 * u * u, -reach, reach);
    let (_, min1_search) = ternary_min(|s| ratio * l(s) + lambda / 2.0 * s * s, -reach, reach);
    let closed_form_dev = (min0_closed - 2.0 * half0).abs().max((min1_closed - min1_search).abs());

    let g = |u: f64, v: f64| (f0(u, v) - min0_closed).max(f1(u, v) - min1_closed);
    let rhs = lambda / 12.0 * (2.0 * u1 - u2).powi(2);
    let centre = (u1 + u2) / 3.0;

    let lo = [u1, u2, u2 / 2.0, centre, 0.0].into_iter().fold(f64::INFINITY, f64::min);
    let hi = [u1, u2, u2 / 2.0, centre, 0.0].into_iter().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.5 * (hi - lo) + 1e-3 * (1.0 + y.abs());
    let (lo, hi) = (lo - pad, hi + pad);
    let step = (hi - lo) / (grid - 1) as f64;
    let at = |k: usize| lo + step * k as f64;

    let surrogate =
        |u: f64, v: f64| lambda / 4.0 * ((u - u1).powi(2) + (v - u1).powi(2) + (u + v - u2).powi(2));
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut best_surrogate = (f64::INFINITY, 0.0, 0.0);
    let mut displacement_violation: f64 = 0.0;
    for i in 0..grid {
        for j in 0..grid {
            let (u, v) = (at(i), at(j));
            let g0 = f0(u, v) - min0_closed;
            let g1 = f1(u, v) - min1_closed;
            let tol = 1e-9 * (1.0 + f0(u, v).abs() + f1(u, v).abs());
            let lower0 = lambda / 2.0 * ((u - u1).powi(2) + (v - u1).powi(2));
            let lower1 = lambda / 2.0 * (u + v - u2).powi(2);
            displacement_violation = displacement_violation
                .max(lower0 - g0 - tol)
                .max(lower1 - g1 - tol);
            let value = g0.max(g1);
            if value < best.0 {
                best = (value, u, v);
            }
            let s = surrogate(u, v);
            if s < best_surrogate.0 {
                best_surrogate = (s, u, v);
            }
        }
    }
    // two refinement passes around the best cell
    let mut span = step;
    for _ in 0..2 {
        let (_, cu, cv) = best;
        let fine = span / 20.0;
        for i in -40i32..=40 {
            for j in -40i32..=40 {
                let (u, v) = (cu + fine * f64::from(i), cv + fine * f64::from(j));
                let value = g(u, v);
                if value < best.0 {
                    best = (value, u, v);
                }
            }
        }
        span = fine;
    }
    let offset = ((best_surrogate.1 - centre).powi(2) + (best_surrogate.2 - centre).powi(2)).sqrt();
    Ok(MinimaxCase {
        loss,
        lambda,
        ratio,
        y,
        u1,
        u2,
        lhs: best.0,
        rhs,
        surrogate_offset_steps: offset / step,
        surrogate_value_dev: (surrogate(centre, centre) - rhs).abs(),
        displacement_violation: displacement_violation.max(0.0),
        closed_form_dev,
    })
}

/// Random `(λ, d, n, y)` configurations with `n/m = 1/(pd)`, `p ∈ [1/2, 2]`.
pub fn verify_minimax_suite(seed: u64, per_loss: usize, grid: usize) -> Result<Vec<MinimaxCase>> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for loss in Loss::ALL {
        for _ in 0..per_loss {
            let lambda = log_uniform(&mut rng, 1e-3, 1.0);
            let d = rng.random_range(1..=200);
            let p = rng.random_range(0.5..2.0);
            let ratio = 1.0 / (p * d as f64);
            let y = match loss {
                Loss::Absolute if rng.random_bool(0.5) => {
                    // around the kink of the two minimizers
                    rng.random_range(0.5..2.0) * ratio / (2.0 * lambda)
                }
                _ => random_label(&mut rng, loss),
            };
            out.push(verify_block_minimax(loss, lambda, ratio, y, grid)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct LowRankCase {
    pub d: usize,
    pub lambda: f64,
    pub landmarks: usize,
    pub gap: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowRankReport {
    /// Landmark counts `k ≤ d` on adversarial labels.
    pub low_rank: Vec<LowRankCase>,
    /// One landmark per block.
    pub covering: Vec<LowRankCase>,
}

impl LowRankReport {
    /// Smallest `gap − bound` over the low-rank cases.
    pub fn min_margin(&self) -> f64 {
        self.low_rank.iter().map(|c| c.gap - c.bound).fold(f64::INFINITY, f64::min)
    }

    pub fn max_covering_gap(&self) -> f64 {
        self.covering.iter().map(|c| c.gap).fold(0.0, f64::max)
    }
}

pub const SIGN_SEARCH_BUDGET: usize = 1_000_000;

pub fn verify_lowrank(seed: u64, dims: &[usize], lambdas: &[f64], sets_per_k: usize) -> Result<LowRankReport> {
    let mut rng = rng(seed);
    let mut report = LowRankReport {
        low_rank: Vec::new(),
        covering: Vec::new(),
    };
    for &d in dims {
        let m = 8 * d;
        let placeholder = LowRankInstance::new(d, m, vec![1; 2 * d])?;
        let truth = PartitionedMatrix::new(placeholder.partition(), DenseMatrix::identity(2 * d))?;
        let len = placeholder.partition().block_len();
        for &lambda in lambdas {
            let bound = bounds::lowrank_ridge_bound(lambda, d);
            let case = |landmarks: Vec<usize>, search_seed: u64| -> Result<LowRankCase> {
                let gram = nystrom_gram(&placeholder, &landmarks)?;
                let z = search_adversarial_labels(&gram, d, SIGN_SEARCH_BUDGET, search_seed)?.z;
                let instance = LowRankInstance::new(d, m, z)?;
                let fit = nystrom_learn(&instance, &landmarks, lambda)?;
                let gap = lowrank_delta_gap(&truth, &instance.z_f64(), lambda, &fit.ridge.coefficients)?;
                Ok(LowRankCase {
                    d,
                    lambda,
                    landmarks: landmarks.len(),
                    gap: gap.value,
                    bound,
                })
            };
            for k in 1..=d {
                for _ in 0..sets_per_k {
                    let landmarks = rand::seq::index::sample(&mut rng, m, k).into_vec();
                    let s = rng.random();
                    report.low_rank.push(case(landmarks, s)?);
                }
            }
            let covering: Vec<usize> = (0..2 * d).map(|a| a * len + rng.random_range(0..len)).collect();
            let s = rng.random();
            report.covering.push(case(covering, s)?);
        }
    }
    Ok(report)
}

/// Runs the same sweep twice, on one worker and on four, and compares the
/// CSV bytes.
pub fn verify_reproducibility(cfg: &ExperimentConfig) -> Result<bool> {
    let render = |threads: usize| -> Result<Vec<u8>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?;
        let (_, records) = pool.install(|| run_scaling_experiment(cfg))?;
        let mut buf = Vec::new();
        write_csv(&records, &mut buf)?;
        Ok(buf)
    };
    Ok(render(1)? == render(4)?)
}

/// Experiment configurations behind the Monte Carlo criteria.
pub mod experiments {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        text.parse().expect("built-in configuration parses")
    }

    pub fn budgeted_learners() -> [LearnerSpec; 4] {
        [
            LearnerSpec::Subsample { size: None },
            LearnerSpec::Nystrom { landmarks: None },
            LearnerSpec::UniformRandomQueries,
            LearnerSpec::Zero,
        ]
    }

    /// Norm-constrained absolute loss at `d = 64`, `B = 245`.
    pub fn norm_gap(learner: LearnerSpec, seed: u64) -> ExperimentConfig {
        let mut c = config("loss = absolute\nregime = norm\nradius_sq = 2\nbudget = 245\nd = 64\nm = 8192\ny = inv_sqrt_d\ntrials = 500");
        c.learner = learner;
        c.seed = seed;
        c
    }

    /// Sub-sampling upper rate, `B = 2⁶ … 2¹²`.
    pub fn subsample_rate(seed: u64) -> ExperimentConfig {
        let mut c = config("loss = absolute\nregime = norm\nradius_sq = 2\nbudget = 64,128,256,512,1024,2048,4096\nd = budget\nm = auto\ny = inv_sqrt_d\nlearner = subsample\ntrials = 200");
        c.seed = seed;
        c
    }

    /// Soft absolute loss with the kink label.
    pub fn soft_absolute_rate(seed: u64) -> ExperimentConfig {
        let mut c = config("loss = absolute\nregime = soft\nlambda = 0.1\nbudget = 16,32,64,128,256,512,1024\nd = budget\nm = auto\ny = kink\nlearner = subsample\ntrials = 200");
        c.seed = seed;
        c
    }

    pub const HINGE_BUDGETS: &str = "1,16,64,256,595";

    pub fn hinge_regime(learner: LearnerSpec, seed: u64) -> ExperimentConfig {
        let mut c = config(&format!(
            "loss = hinge\nregime = soft\nlambda = 0.005\nbudget = {HINGE_BUDGETS}\nd = 100\nm = 12800\ny = 1\ntrials = 200"
        ));
        c.learner = learner;
        c.seed = seed;
        c
    }

    pub fn hinge_full_info(seed: u64) -> ExperimentConfig {
        let mut c = config("loss = hinge\nregime = soft\nlambda = 0.005\nbudget = full\nd = 100\nm = 12800\ny = 1\nlearner = full_info\ntrials = 20");
        c.seed = seed;
        c
    }

    /// Squared loss, `B = ⌊1/λ²⌋`, `d = ⌈√(100/3)/λ⌉`, `m = 128d ≤ 16384`.
    pub fn squared_floor(learner: LearnerSpec, seed: u64) -> ExperimentConfig {
        let mut c = config("loss = squared\nregime = soft\nlambda = 0.05,0.1,0.2,0.5,1.0\nbudget = inv_lambda_sq\nd = lambda\nm = auto\ny = 1\nsweep = lambda\ntrials = 200");
        c.learner = learner;
        c.seed = seed;
        c
    }

    pub fn reproducibility(seed: u64) -> ExperimentConfig {
        let mut c = config("loss = absolute\nregime = norm\nbudget = 16,64,256\nd = budget\nm = auto\ny = inv_sqrt_d\nlearner = subsample\ntrials = 40");
        c.seed = seed;
        c
    }
}

/// Outcome of one acceptance criterion as run by `verify`.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: &[(u8, &str)] = &[
    (1, "block objective identity"),
    (2, "block-constant ridge reduction"),
    (3, "scalar minimizers"),
    (4, "linear loss with zero queries"),
    (5, "norm-constrained certificate"),
    (6, "block coverage"),
    (7, "norm-constrained expected gap"),
    (8, "per-block min-max inequality"),
    (9, "sub-sampling upper rate"),
    (10, "soft absolute-loss rate"),
    (11, "hinge loss regime"),
    (12, "squared-loss floor"),
    (13, "low-rank ridge gap"),
    (14, "reproducible sweep output"),
];

fn slope_text(fit: Option<&SlopeFit>) -> String {
    fit.map_or("no slope".into(), |f| format!("slope {:.4} [{:.4}, {:.4}]", f.slope, f.ci_low, f.ci_high))
}

fn points_hold(points: &[PointSummary]) -> bool {
    points.iter().all(|p| p.bound_holds == Some(true))
}

pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionResult> {
    let title = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Config(format!("unknown criterion {id}")))?;
    let start = Instant::now();
    let (passed, detail) = match id {
        1 | 2 => {
            let r = verify_identities(seed, 100, 50)?;
            if id == 1 {
                (
                    r.block_max_dev <= 1e-10 && r.all_ones_max_dev <= 1e-10,
                    format!("max deviation {:.3e} over {} cases", r.block_max_dev, r.block_cases),
                )
            } else {
                (
                    r.ridge_beta_max_dev <= 1e-9 && r.ridge_objective_max_dev <= 1e-9 && r.identity_gram_max_dev <= 1e-9,
                    format!(
                        "beta {:.3e}, objective {:.3e}, identity {:.3e}",
                        r.ridge_beta_max_dev, r.ridge_objective_max_dev, r.identity_gram_max_dev
                    ),
                )
            }
        }
        3 => {
            let r = verify_scalar_minimizers(seed, 1000)?;
            (
                r.max_dev <= 1e-6 && r.anchor_max_dev <= 1e-12,
                format!("max deviation {:.3e}, anchors {:.3e}", r.max_dev, r.anchor_max_dev),
            )
        }
        4 => {
            let r = verify_linear_zero_query(seed, 100)?;
            (
                r.max_gap <= 1e-10 && r.max_queries == 0,
                format!("max gap {:.3e}, queries {}, first-order {:.3e}", r.max_gap, r.max_queries, r.max_first_order_residual),
            )
        }
        5 => {
            let r = verify_certificate(seed, 100, 64)?;
            (
                r.max_objective <= 1e-12 && r.max_quadratic_form <= 2.0 + 1e-12,
                format!("objective {:.3e}, αᵀKα {:.6}", r.max_objective, r.max_quadratic_form),
            )
        }
        6 => {
            let mut ok = true;
            let mut parts = Vec::new();
            for learner in [
                LearnerSpec::Subsample { size: None },
                LearnerSpec::UniformRandomQueries,
                LearnerSpec::Nystrom { landmarks: None },
            ] {
                let c = verify_block_coverage(learner, 40, 5120, 95, 1000, seed)?;
                ok &= c.passes();
                parts.push(format!("{} {:.2}±{:.2}", c.learner, c.missed.mean, c.missed.stderr));
            }
            (ok, parts.join(", "))
        }
        7 => {
            let mut ok = true;
            let mut parts = Vec::new();
            for learner in experiments::budgeted_learners() {
                let (report, _) = run_scaling_experiment(&experiments::norm_gap(learner, seed))?;
                let p = &report.points[0];
                ok &= p.gap.lower(3.0) >= 1.0 / 560.0;
                parts.push(format!("{learner} {:.4e}", p.gap.mean));
            }
            (ok, parts.join(", "))
        }
        8 => {
            let cases = verify_minimax_suite(seed, 20, 201)?;
            let failures = cases.iter().filter(|c| !c.passes(1e-6)).count();
            let margin = cases.iter().map(|c| c.lhs - c.rhs).fold(f64::INFINITY, f64::min);
            (failures == 0, format!("{} cases, {failures} failures, min lhs − rhs {margin:.3e}", cases.len()))
        }
        9 => {
            let (report, _) = run_scaling_experiment(&experiments::subsample_rate(seed))?;
            let ok = report.slope.is_some_and(|f| (-0.35..=-0.15).contains(&f.slope));
            (ok, slope_text(report.slope.as_ref()))
        }
        10 => {
            let (report, _) = run_scaling_experiment(&experiments::soft_absolute_rate(seed))?;
            let ok = points_hold(&report.points) && report.slope.is_some_and(|f| (f.slope + 0.5).abs() <= 0.15);
            (ok, slope_text(report.slope.as_ref()))
        }
        11 => {
            let mut ok = true;
            let mut worst = f64::INFINITY;
            for learner in experiments::budgeted_learners() {
                let (report, _) = run_scaling_experiment(&experiments::hinge_regime(learner, seed))?;
                for p in &report.points {
                    worst = worst.min(p.gap.lower(3.0));
                    ok &= p.gap.lower(3.0) >= bounds::HINGE_FLOOR;
                }
            }
            let (full, records) = run_scaling_experiment(&experiments::hinge_full_info(seed))?;
            let full_max = records.iter().map(|r| r.gap).fold(0.0, f64::max);
            ok &= full.points[0].trials > 0 && full_max <= 1e-10;
            (ok, format!("smallest mean − 3se {worst:.4e}, full information max gap {full_max:.3e}"))
        }
        12 => {
            let mut ok = true;
            let mut worst = f64::INFINITY;
            for learner in experiments::budgeted_learners() {
                let (report, _) = run_scaling_experiment(&experiments::squared_floor(learner, seed))?;
                for p in &report.points {
                    worst = worst.min(p.gap.lower(3.0));
                    ok &= p.gap.lower(3.0) >= bounds::SQUARED_CONSTANT;
                }
            }
            (ok, format!("smallest mean − 3se {worst:.4e}"))
        }
        13 => {
            let r = verify_lowrank(seed, &[4, 8, 16], &[0.1, 0.5, 1.0], 3)?;
            (
                r.min_margin() >= -1e-9 && r.max_covering_gap() <= 1e-9,
                format!("min gap − bound {:.3e}, covering gap {:.3e}", r.min_margin(), r.max_covering_gap()),
            )
        }
        14 => {
            let same = verify_reproducibility(&experiments::reproducibility(seed))?;
            (same, if same { "identical bytes".into() } else { "outputs differ".into() })
        }
        _ => unreachable!("criterion ids are checked above"),
    };
    Ok(CriterionResult {
        id,
        title,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}
