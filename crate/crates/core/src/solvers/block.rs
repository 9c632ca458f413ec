use crate::error::{Error, Result};
use crate::instance::{BlockKernel, DENSE_LIMIT};
use crate::linalg::DenseMatrix;
use crate::solvers::{BlockCoefficients, ClassProblem, Coefficients, Gap, Objective, Regime};

/// `β_{i,sub} = Σ_{t ∈ T_{i,sub}} α_t`.
pub fn reduce_coefficients(kernel: &BlockKernel, alpha: &Coefficients) -> Result<BlockCoefficients> {
    check_len(kernel, alpha)?;
    let mut out = BlockCoefficients::zeros(kernel.d());
    for (slot, a) in kernel.assignment().iter().zip(alpha.as_slice()) {
        out.beta[slot.block][slot.sub.index()] += a;
    }
    Ok(out)
}

fn check_len(kernel: &BlockKernel, alpha: &Coefficients) -> Result<()> {
    if alpha.len() != kernel.m() {
        return Err(Error::invalid(format!(
            "coefficient vector has length {}, kernel has m = {}",
            alpha.len(),
            kernel.m()
        )));
    }
    Ok(())
}

/// Average loss plus penalty written through the block sums:
/// `Σ_i (N_i/2m)[ℓ(β₁+σβ₂, y) + ℓ(σβ₁+β₂, y)]` and
/// `αᵀKα = Σ_i β₁² + β₂² + 2σβ₁β₂`.
pub fn objective_value_blocks(kernel: &BlockKernel, objective: &Objective, beta: &BlockCoefficients, y: f64) -> f64 {
    let loss = objective.loss();
    let m = kernel.m() as f64;
    let mut data = 0.0;
    let mut quad = 0.0;
    for ((&[b1, b2], &sigma), &n) in beta.beta.iter().zip(kernel.sigma()).zip(kernel.block_sizes()) {
        let s = if sigma { 1.0 } else { 0.0 };
        if n > 0 {
            data += n as f64 / (2.0 * m) * (loss.eval_unchecked(b1 + s * b2, y) + loss.eval_unchecked(s * b1 + b2, y));
        }
        quad += b1 * b1 + b2 * b2 + 2.0 * s * b1 * b2;
    }
    data + objective.penalty_weight() * quad
}

/// `αᵀKα` through the block sums.
pub fn kernel_quadratic_form(kernel: &BlockKernel, alpha: &Coefficients) -> Result<f64> {
    let beta = reduce_coefficients(kernel, alpha)?;
    Ok(beta
        .beta
        .iter()
        .zip(kernel.sigma())
        .map(|(&[b1, b2], &sigma)| b1 * b1 + b2 * b2 + if sigma { 2.0 * b1 * b2 } else { 0.0 })
        .sum())
}

pub fn objective_value(kernel: &BlockKernel, objective: &Objective, alpha: &Coefficients, y: f64) -> Result<f64> {
    objective.loss().check_label(y)?;
    let beta = reduce_coefficients(kernel, alpha)?;
    Ok(objective_value_blocks(kernel, objective, &beta, y))
}

/// `(1/m) Σ_t ℓ(αᵀK e_t, y_t) + penalty · αᵀKα` straight from a dense
/// matrix. Verification path only.
pub fn objective_value_dense(kernel: &DenseMatrix, objective: &Objective, alpha: &[f64], targets: &[f64]) -> Result<f64> {
    let m = kernel.rows();
    if m > DENSE_LIMIT {
        return Err(Error::TooLargeForDense { m, limit: DENSE_LIMIT });
    }
    if !kernel.is_square() || alpha.len() != m || targets.len() != m {
        return Err(Error::invalid("dense objective needs an m×m kernel and length-m vectors"));
    }
    let loss = objective.loss();
    let predictions = kernel.matvec(alpha);
    let mut data = 0.0;
    for (&u, &y) in predictions.iter().zip(targets) {
        data += loss.eval(u, y)?;
    }
    let quad = crate::linalg::dot(alpha, &predictions);
    Ok(data / m as f64 + objective.penalty_weight() * quad)
}

/// Class weights of a hard kernel: `σ_i = 0` gives classes `i` and `i+d`
/// with weight `N_i/2m` each, `σ_i = 1` a single class `i` with `N_i/m`.
fn class_problem(kernel: &BlockKernel) -> ClassProblem {
    let d = kernel.d();
    let m = kernel.m() as f64;
    let mut weights = vec![0.0; 2 * d];
    for (i, (&n, &sigma)) in kernel.block_sizes().iter().zip(kernel.sigma()).enumerate() {
        if sigma {
            weights[i] = n as f64 / m;
        } else {
            weights[i] = n as f64 / (2.0 * m);
            weights[i + d] = n as f64 / (2.0 * m);
        }
    }
    ClassProblem::new(weights, 0.0).expect("block weights are non-negative")
}

/// Class sums back to `(β_{i,1}, β_{i,2})`; merged blocks put the whole
/// sum on the first sub-block.
fn blocks_from_classes(kernel: &BlockKernel, sums: &[f64]) -> BlockCoefficients {
    let d = kernel.d();
    BlockCoefficients {
        beta: kernel
            .sigma()
            .iter()
            .enumerate()
            .map(|(i, &sigma)| if sigma { [sums[i], 0.0] } else { [sums[i], sums[i + d]] })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSolution {
    pub beta: BlockCoefficients,
    pub value: f64,
}

/// Exact global minimum of the soft-regularized objective, block by block:
/// `σ_i = 0` gives `β = u*(y, λm/N_i)` on each half, `σ_i = 1` gives
/// `s = u*(y, λm/2N_i)` split as `(s, 0)`.
pub fn solve_block_erm(kernel: &BlockKernel, objective: &Objective, y: f64) -> Result<BlockSolution> {
    let Regime::Soft { .. } = objective.regime() else {
        return Err(Error::invalid("solve_block_erm needs the soft-regularized regime"));
    };
    solve_objective(kernel, objective, y)
}

/// Exact minimum of `avg |αᵀKe_t − y|` subject to `αᵀKα ≤ radius_sq`.
pub fn solve_norm_constrained_abs(kernel: &BlockKernel, radius_sq: f64, y: f64) -> Result<BlockSolution> {
    solve_objective(kernel, &Objective::norm_bound(radius_sq)?, y)
}

/// Exact minimum in either regime.
pub fn solve_objective(kernel: &BlockKernel, objective: &Objective, y: f64) -> Result<BlockSolution> {
    let problem = class_problem(kernel);
    let sums = problem.solve(objective, y)?;
    let beta = blocks_from_classes(kernel, &sums);
    let value = objective_value_blocks(kernel, objective, &beta, y);
    Ok(BlockSolution { beta, value })
}

/// `objective(α) − min objective`. In the norm regime the learner's `α` is
/// evaluated as is, feasible or not.
pub fn delta_gap(kernel: &BlockKernel, objective: &Objective, alpha: &Coefficients, y: f64) -> Result<Gap> {
    let achieved = objective_value(kernel, objective, alpha, y)?;
    let optimum = solve_objective(kernel, objective, y)?.value;
    Ok(Gap::from_difference(achieved - optimum))
}

/// Spreads each `β_{i,sub}` uniformly over the points of its sub-block.
pub fn spread_block_coefficients(kernel: &BlockKernel, beta: &BlockCoefficients) -> Result<Coefficients> {
    if beta.beta.len() != kernel.d() {
        return Err(Error::invalid("block coefficient count does not match d"));
    }
    Ok(Coefficients(
        kernel
            .assignment()
            .iter()
            .map(|slot| {
                let half = kernel.block_sizes()[slot.block] as f64 / 2.0;
                beta.beta[slot.block][slot.sub.index()] / half
            })
            .collect(),
    ))
}

/// Coefficients with zero absolute loss at `y = 1/√d` and `αᵀKα ≤ 2`:
/// `β = (1/√d, 1/√d)` on split blocks, `(1/√d, 0)` on merged ones.
pub fn norm_certificate(kernel: &BlockKernel) -> Coefficients {
    let level = 1.0 / (kernel.d() as f64).sqrt();
    let beta = BlockCoefficients {
        beta: kernel
            .sigma()
            .iter()
            .map(|&sigma| if sigma { [level, 0.0] } else { [level, level] })
            .collect(),
    };
    spread_block_coefficients(kernel, &beta).expect("beta sized from the kernel")
}

/// Optimum of the linear-loss problem without looking at the kernel:
/// `α = −v/λ` with `v_t = y_t/m`.
pub fn linear_loss_solution(targets: &[f64], lambda: f64) -> Result<Coefficients> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda must be positive"));
    }
    let m = targets.len() as f64;
    Ok(Coefficients(targets.iter().map(|y| -y / (m * lambda)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Slot, Sub};
    use crate::losses::Loss;

    fn small_kernel() -> BlockKernel {
        BlockKernel::sample(3, 12, 21).unwrap()
    }

    #[test]
    fn zero_alpha_reduces_to_zero() {
        let k = small_kernel();
        let b = reduce_coefficients(&k, &Coefficients::zeros(12)).unwrap();
        assert_eq!(b, BlockCoefficients::zeros(3));
    }

    #[test]
    fn unit_alpha_lands_in_its_sub_block() {
        let k = small_kernel();
        let t = k
            .assignment()
            .iter()
            .position(|s| *s == Slot { block: k.slot(0).block, sub: Sub::Second })
            .unwrap();
        let mut alpha = Coefficients::zeros(12);
        alpha.0[t] = 1.0;
        let b = reduce_coefficients(&k, &alpha).unwrap();
        let slot = k.slot(t);
        for (i, pair) in b.beta.iter().enumerate() {
            for (j, &v) in pair.iter().enumerate() {
                let expected = if i == slot.block && j == 1 { 1.0 } else { 0.0 };
                assert_eq!(v, expected);
            }
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let k = small_kernel();
        assert!(reduce_coefficients(&k, &Coefficients::zeros(11)).is_err());
    }

    #[test]
    fn zero_predictor_squared_loss_value_is_one() {
        let k = small_kernel();
        let obj = Objective::soft(Loss::Squared, 0.3).unwrap();
        assert_eq!(objective_value(&k, &obj, &Coefficients::zeros(12), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn block_solver_requires_soft_regime() {
        let k = small_kernel();
        assert!(solve_block_erm(&k, &Objective::norm_bound(2.0).unwrap(), 1.0).is_err());
    }

    #[test]
    fn constrained_solver_with_zero_radius() {
        let k = small_kernel();
        let sol = solve_norm_constrained_abs(&k, 0.0, 0.4).unwrap();
        assert_eq!(sol.beta, BlockCoefficients::zeros(3));
        assert!((sol.value - 0.4).abs() < 1e-15);
    }

    #[test]
    fn certificate_for_single_merged_pair() {
        let k = BlockKernel::from_parts(
            vec![true],
            vec![Slot { block: 0, sub: Sub::First }, Slot { block: 0, sub: Sub::Second }],
        )
        .unwrap();
        let alpha = norm_certificate(&k);
        // all of β on the first sub-block
        assert_eq!(alpha.0, vec![1.0, 0.0]);
        let dense = k.materialize().unwrap();
        assert_eq!(dense.quadratic_form(&alpha.0), 1.0);
    }

    #[test]
    fn linear_solution_of_zero_targets_is_zero() {
        assert_eq!(linear_loss_solution(&[0.0; 5], 0.2).unwrap().0, vec![0.0; 5]);
        assert!(linear_loss_solution(&[1.0], 0.0).is_err());
    }
}
