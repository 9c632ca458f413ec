use crate::error::{Error, Result};
use crate::instance::{BlockPartition, DENSE_LIMIT};
use crate::linalg::{dot, Cholesky, DenseMatrix};
use crate::solvers::{Coefficients, Gap};

/// An m×m matrix that is constant on every pair of partition blocks,
/// stored as its `blocks × blocks` representative `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedMatrix {
    partition: BlockPartition,
    gram: DenseMatrix,
}

impl PartitionedMatrix {
    pub fn new(partition: BlockPartition, gram: DenseMatrix) -> Result<Self> {
        let b = partition.blocks();
        if gram.rows() != b || gram.cols() != b {
            return Err(Error::invalid(format!("representative must be {b}x{b}")));
        }
        if !gram.is_symmetric(0.0) {
            return Err(Error::invalid("representative must be symmetric"));
        }
        Ok(Self { partition, gram })
    }

    pub fn partition(&self) -> BlockPartition {
        self.partition
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    #[inline]
    pub fn entry(&self, s: usize, r: usize) -> f64 {
        self.gram[(self.partition.block_of(s), self.partition.block_of(r))]
    }

    pub fn expand(&self) -> Result<DenseMatrix> {
        let m = self.partition.m();
        if m > DENSE_LIMIT {
            return Err(Error::TooLargeForDense { m, limit: DENSE_LIMIT });
        }
        Ok(DenseMatrix::from_fn(m, m, |s, r| self.entry(s, r)))
    }
}

/// Reads the representative `G_{i(t),i(t')} = K_{t,t'}` off a dense matrix,
/// failing if `K` is not constant on some block pair.
pub fn reduce_gram(kernel: &DenseMatrix, partition: BlockPartition) -> Result<DenseMatrix> {
    let m = partition.m();
    if kernel.rows() != m || kernel.cols() != m {
        return Err(Error::invalid(format!("matrix must be {m}x{m}")));
    }
    let b = partition.blocks();
    let len = partition.block_len();
    let gram = DenseMatrix::from_fn(b, b, |a, c| kernel[(a * len, c * len)]);
    for s in 0..m {
        for r in 0..m {
            if kernel[(s, r)] != gram[(partition.block_of(s), partition.block_of(r))] {
                return Err(Error::NotBlockConstant { row: s, col: r });
            }
        }
    }
    Ok(gram)
}

/// `α = (K + (λm/2) I)⁻¹ y` by a dense Cholesky solve.
pub fn ridge_dense(kernel: &DenseMatrix, targets: &[f64], lambda: f64) -> Result<Coefficients> {
    let m = kernel.rows();
    if m > DENSE_LIMIT {
        return Err(Error::TooLargeForDense { m, limit: DENSE_LIMIT });
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda must be positive"));
    }
    if targets.len() != m {
        return Err(Error::invalid("target length does not match the kernel"));
    }
    let chol = Cholesky::factor(&kernel.add_diagonal(lambda * m as f64 / 2.0))?;
    Ok(Coefficients(chol.solve(targets)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedRidge {
    /// Block sums of the solution, `(G + (λb/2) I)⁻¹ z` for `b` blocks.
    pub beta: Vec<f64>,
    /// The full solution, constant `β_{i(t)}/len` on each block.
    pub coefficients: Coefficients,
}

/// Ridge regression on a block-constant matrix with block-constant targets
/// `y_t = z_{i(t)}`, solved on the `b × b` system only. With `b = 2d` the
/// shift is `dλ`.
pub fn ridge_reduced(matrix: &PartitionedMatrix, z: &[f64], lambda: f64) -> Result<ReducedRidge> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda must be positive"));
    }
    let partition = matrix.partition();
    let b = partition.blocks();
    if z.len() != b {
        return Err(Error::invalid(format!("z must have {b} entries")));
    }
    let shift = lambda * b as f64 / 2.0;
    let beta = Cholesky::factor(&matrix.gram().add_diagonal(shift))?.solve(z);
    let len = partition.block_len() as f64;
    let coefficients = Coefficients(
        (0..partition.m())
            .map(|t| beta[partition.block_of(t)] / len)
            .collect(),
    );
    Ok(ReducedRidge { beta, coefficients })
}

/// The ridge objective `(1/m)Σ(αᵀKe_t − y_t)² + (λ/2)αᵀKα` of any `α` with
/// block sums `β`, written on the representative:
/// `(1/b)(βᵀ(G + (λb/2)I)Gβ − 2zᵀGβ + |z|²)`.
pub fn reduced_ridge_objective(gram: &DenseMatrix, z: &[f64], lambda: f64, beta: &[f64]) -> f64 {
    let b = gram.rows() as f64;
    let g_beta = gram.matvec(beta);
    let quad = dot(&g_beta, &g_beta) + lambda * b / 2.0 * dot(beta, &g_beta);
    (quad - 2.0 * dot(z, &g_beta) + dot(z, z)) / b
}

/// Ridge gap of `α` measured against the true block-constant kernel.
pub fn lowrank_delta_gap(truth: &PartitionedMatrix, z: &[f64], lambda: f64, alpha: &Coefficients) -> Result<Gap> {
    let partition = truth.partition();
    if alpha.len() != partition.m() {
        return Err(Error::invalid("coefficient length does not match m"));
    }
    let best = ridge_reduced(truth, z, lambda)?;
    let beta = partition.block_sums(alpha.as_slice());
    let achieved = reduced_ridge_objective(truth.gram(), z, lambda, &beta);
    let optimum = reduced_ridge_objective(truth.gram(), z, lambda, &best.beta);
    Ok(Gap::from_difference(achieved - optimum))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_matrix(d: usize, m: usize) -> PartitionedMatrix {
        PartitionedMatrix::new(BlockPartition::new(m, 2 * d).unwrap(), DenseMatrix::identity(2 * d)).unwrap()
    }

    #[test]
    fn identity_gram_shrinks_labels() {
        let (d, lambda) = (2, 0.5);
        let z = [1.0, -1.0, 1.0, 1.0];
        let r = ridge_reduced(&identity_matrix(d, 16), &z, lambda).unwrap();
        for (b, zi) in r.beta.iter().zip(z) {
            assert!((b - zi / (1.0 + d as f64 * lambda)).abs() < 1e-15);
        }
    }

    #[test]
    fn reduce_gram_round_trip() {
        let pm = identity_matrix(2, 8);
        let dense = pm.expand().unwrap();
        assert_eq!(reduce_gram(&dense, pm.partition()).unwrap(), DenseMatrix::identity(4));
    }

    #[test]
    fn reduce_gram_rejects_non_constant() {
        let mut dense = identity_matrix(1, 4).expand().unwrap();
        dense[(0, 1)] = 0.5;
        assert!(matches!(
            reduce_gram(&dense, BlockPartition::new(4, 2).unwrap()),
            Err(Error::NotBlockConstant { row: 0, col: 1 })
        ));
    }

    #[test]
    fn optimum_has_zero_gap() {
        let pm = identity_matrix(3, 24);
        let z = [1.0, 1.0, -1.0, 1.0, -1.0, -1.0];
        let r = ridge_reduced(&pm, &z, 0.3).unwrap();
        let gap = lowrank_delta_gap(&pm, &z, 0.3, &r.coefficients).unwrap();
        assert!(gap.value.abs() < 1e-14);
    }

    #[test]
    fn zero_predictor_gap_on_identity() {
        // objective(0) = |z|²/2d = 1, optimum = dλ/(1+dλ)
        let (d, lambda) = (2, 0.25);
        let pm = identity_matrix(d, 8);
        let z = [1.0, -1.0, -1.0, 1.0];
        let gap = lowrank_delta_gap(&pm, &z, lambda, &Coefficients::zeros(8)).unwrap();
        let ld = lambda * d as f64;
        assert!((gap.value - (1.0 - ld / (1.0 + ld))).abs() < 1e-14);
    }
}
