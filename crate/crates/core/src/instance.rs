//! Hard kernel instances.
//!
//! A [`BlockKernel`] is a permuted block-diagonal 0/1 Gram matrix with `d`
//! blocks, each block either one all-ones block (`σ_i = 1`) or two
//! equal-sized all-ones sub-blocks with zeros between them (`σ_i = 0`).
//! Only the per-index assignment and `σ` are stored; entries are computed on
//! demand.
//!
//! A [`LowRankInstance`] is the low-rank ridge training set: `2d` equal
//! all-ones blocks laid out contiguously, with a ±1 label per block.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, DenseMatrix};

/// Materializing an m×m matrix is only allowed up to this size.
pub const DENSE_LIMIT: usize = 2048;

/// Which of the two paired instances of block `i` a point corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sub {
    First,
    Second,
}

impl Sub {
    pub fn index(self) -> usize {
        match self {
            Sub::First => 0,
            Sub::Second => 1,
        }
    }
}

/// Block membership of a single point (0-based block index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub block: usize,
    pub sub: Sub,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockKernel {
    d: usize,
    sigma: Vec<bool>,
    assignment: Vec<Slot>,
    block_sizes: Vec<usize>,
}

impl BlockKernel {
    /// Draws a kernel from the hard distribution: uniform `σ`, `m/2` pairs
    /// with uniformly chosen block labels, then a uniform permutation.
    pub fn sample(d: usize, m: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::sample_with(d, m, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d must be at least 1"));
        }
        if m == 0 || !m.is_multiple_of(2) {
            return Err(Error::invalid(format!("m must be a positive even number, got {m}")));
        }
        if m < 2 * d {
            log::warn!("m = {m} < 2d = {}: most blocks will be empty", 2 * d);
        }
        let sigma: Vec<bool> = (0..d).map(|_| rng.random_bool(0.5)).collect();
        let mut assignment = Vec::with_capacity(m);
        for _ in 0..m / 2 {
            let block = rng.random_range(0..d);
            assignment.push(Slot { block, sub: Sub::First });
            assignment.push(Slot { block, sub: Sub::Second });
        }
        assignment.shuffle(rng);
        Ok(Self::assemble(d, sigma, assignment))
    }

    /// Builds a kernel from explicit parts, checking that every block has
    /// equally many first and second members.
    pub fn from_parts(sigma: Vec<bool>, assignment: Vec<Slot>) -> Result<Self> {
        let d = sigma.len();
        if d == 0 {
            return Err(Error::invalid("sigma must have at least one entry"));
        }
        if assignment.is_empty() || !assignment.len().is_multiple_of(2) {
            return Err(Error::invalid("assignment length must be positive and even"));
        }
        let mut halves = vec![[0usize; 2]; d];
        for slot in &assignment {
            if slot.block >= d {
                return Err(Error::invalid(format!("block {} out of range for d = {d}", slot.block)));
            }
            halves[slot.block][slot.sub.index()] += 1;
        }
        if let Some(i) = halves.iter().position(|h| h[0] != h[1]) {
            return Err(Error::invalid(format!(
                "block {i} has unequal sub-blocks ({} vs {})",
                halves[i][0], halves[i][1]
            )));
        }
        Ok(Self::assemble(d, sigma, assignment))
    }

    fn assemble(d: usize, sigma: Vec<bool>, assignment: Vec<Slot>) -> Self {
        let mut block_sizes = vec![0; d];
        for slot in &assignment {
            block_sizes[slot.block] += 1;
        }
        Self {
            d,
            sigma,
            assignment,
            block_sizes,
        }
    }

    /// Same `σ` and block sizes, fresh uniform permutation of the points.
    pub fn repermuted(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut assignment = self.assignment.clone();
        assignment.shuffle(&mut rng);
        Self::assemble(self.d, self.sigma.clone(), assignment)
    }

    pub fn m(&self) -> usize {
        self.assignment.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sigma(&self) -> &[bool] {
        &self.sigma
    }

    pub fn sigma_popcount(&self) -> usize {
        self.sigma.iter().filter(|&&s| s).count()
    }

    pub fn assignment(&self) -> &[Slot] {
        &self.assignment
    }

    pub fn slot(&self, t: usize) -> Slot {
        self.assignment[t]
    }

    /// `N_i`, the number of points in block `i`.
    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Index of the basis vector point `t` is realized as: `e_i` for the
    /// first sub-block (and for merged blocks), `e_{i+d}` otherwise.
    pub fn class_of(&self, t: usize) -> usize {
        let slot = self.assignment[t];
        match slot.sub {
            Sub::Second if !self.sigma[slot.block] => slot.block + self.d,
            _ => slot.block,
        }
    }

    pub fn entry(&self, s: usize, r: usize) -> Result<u8> {
        let m = self.m();
        for index in [s, r] {
            if index >= m {
                return Err(Error::IndexOutOfRange { index, len: m });
            }
        }
        Ok(self.entry_unchecked(s, r))
    }

    #[inline]
    pub fn entry_unchecked(&self, s: usize, r: usize) -> u8 {
        let a = self.assignment[s];
        let b = self.assignment[r];
        u8::from(a.block == b.block && (a.sub == b.sub || self.sigma[a.block]))
    }

    /// Dense copy of the kernel, for verification at small sizes only.
    pub fn materialize(&self) -> Result<DenseMatrix> {
        let m = self.m();
        if m > DENSE_LIMIT {
            return Err(Error::TooLargeForDense { m, limit: DENSE_LIMIT });
        }
        Ok(DenseMatrix::from_fn(m, m, |s, r| f64::from(self.entry_unchecked(s, r))))
    }

    /// Explicit instance vectors in `R^{2d}` whose inner products reproduce
    /// the kernel.
    pub fn realize_instances(&self) -> Vec<Vec<f64>> {
        (0..self.m())
            .map(|t| {
                let mut v = vec![0.0; 2 * self.d];
                v[self.class_of(t)] = 1.0;
                v
            })
            .collect()
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            m: self.m(),
            d: self.d,
            sigma: self.sigma.iter().map(|&s| u8::from(s)).collect(),
            assignment: self
                .assignment
                .iter()
                .map(|s| [s.block + 1, s.sub.index() + 1])
                .collect(),
            z: None,
        }
    }
}

/// Contiguous partition of `m` points into `blocks` equal groups:
/// `i(t) = ⌊t / (m / blocks)⌋` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPartition {
    m: usize,
    blocks: usize,
}

impl BlockPartition {
    pub fn new(m: usize, blocks: usize) -> Result<Self> {
        if blocks == 0 || m == 0 || !m.is_multiple_of(blocks) {
            return Err(Error::invalid(format!("{blocks} blocks must evenly divide m = {m}")));
        }
        Ok(Self { m, blocks })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_len(&self) -> usize {
        self.m / self.blocks
    }

    #[inline]
    pub fn block_of(&self, t: usize) -> usize {
        t / self.block_len()
    }

    /// Per-block sums of a length-`m` vector.
    pub fn block_sums(&self, values: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.blocks];
        for (t, v) in values.iter().enumerate() {
            sums[self.block_of(t)] += v;
        }
        sums
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowRankInstance {
    partition: BlockPartition,
    z: Vec<i8>,
}

impl LowRankInstance {
    pub fn new(d: usize, m: usize, z: Vec<i8>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d must be at least 1"));
        }
        let partition = BlockPartition::new(m, 2 * d)?;
        if z.len() != 2 * d {
            return Err(Error::invalid(format!("z must have 2d = {} entries, got {}", 2 * d, z.len())));
        }
        if z.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::invalid("z entries must be ±1"));
        }
        Ok(Self { partition, z })
    }

    pub fn d(&self) -> usize {
        self.partition.blocks() / 2
    }

    pub fn m(&self) -> usize {
        self.partition.m()
    }

    pub fn partition(&self) -> BlockPartition {
        self.partition
    }

    pub fn z(&self) -> &[i8] {
        &self.z
    }

    pub fn z_f64(&self) -> Vec<f64> {
        self.z.iter().map(|&v| f64::from(v)).collect()
    }

    /// Per-point targets `y_t = z_{i(t)}`.
    pub fn targets(&self) -> Vec<f64> {
        (0..self.m())
            .map(|t| f64::from(self.z[self.partition.block_of(t)]))
            .collect()
    }

    /// The training kernel: 1 iff both points lie in the same block.
    #[inline]
    pub fn entry(&self, s: usize, r: usize) -> u8 {
        u8::from(self.partition.block_of(s) == self.partition.block_of(r))
    }

    pub fn materialize(&self) -> Result<DenseMatrix> {
        let m = self.m();
        if m > DENSE_LIMIT {
            return Err(Error::TooLargeForDense { m, limit: DENSE_LIMIT });
        }
        Ok(DenseMatrix::from_fn(m, m, |s, r| f64::from(self.entry(s, r))))
    }

    /// The same matrix viewed as a hard kernel with `σ = 0`: partition block
    /// `j < d` is sub-block 1 of block `j`, block `j ≥ d` is sub-block 2 of
    /// block `j - d`.
    pub fn as_block_kernel(&self) -> BlockKernel {
        let d = self.d();
        let assignment = (0..self.m())
            .map(|t| {
                let j = self.partition.block_of(t);
                if j < d {
                    Slot { block: j, sub: Sub::First }
                } else {
                    Slot { block: j - d, sub: Sub::Second }
                }
            })
            .collect();
        BlockKernel::assemble(d, vec![false; d], assignment)
    }

    pub fn to_document(&self) -> InstanceDocument {
        let mut doc = self.as_block_kernel().to_document();
        doc.z = Some(self.z.clone());
        doc
    }
}

/// How the block labels of a low-rank instance are chosen.
#[derive(Debug, Clone)]
pub enum LabelChoice<'a> {
    Given(Vec<i8>),
    /// Adversarial search against the learner's reduced Gram matrix.
    Search { gram: &'a DenseMatrix, budget: usize },
}

pub fn build_lowrank_instance(d: usize, m: usize, labels: LabelChoice<'_>, seed: u64) -> Result<LowRankInstance> {
    match labels {
        LabelChoice::Given(z) => LowRankInstance::new(d, m, z),
        LabelChoice::Search { gram, budget } => {
            BlockPartition::new(m, 2 * d)?;
            let found = search_adversarial_labels(gram, d, budget, seed)?;
            LowRankInstance::new(d, m, found.z)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SignSearch {
    pub z: Vec<i8>,
    /// `Σ_{i≤d} (u_iᵀ z)²` over the bottom-`d` eigenvectors.
    pub score: f64,
    pub evaluations: usize,
}

/// Number of random restarts of the greedy sign-flip search.
pub const SIGN_SEARCH_RESTARTS: usize = 32;

/// Projector onto the span of the `d` eigenvectors of `gram` with the
/// smallest eigenvalues.
pub fn bottom_projector(gram: &DenseMatrix, d: usize) -> Result<DenseMatrix> {
    let n = gram.rows();
    if !gram.is_square() || n != 2 * d {
        return Err(Error::invalid(format!("gram must be {0}x{0}", 2 * d)));
    }
    let eig = symmetric_eigen(gram)?;
    let mut proj = DenseMatrix::zeros(n, n);
    for k in 0..d {
        for r in 0..n {
            for c in 0..n {
                proj[(r, c)] += eig.vectors[(r, k)] * eig.vectors[(c, k)];
            }
        }
    }
    Ok(proj)
}

/// `Σ_{i≤d} (u_iᵀ z)²` for the bottom-`d` eigenvectors `u_i` of `gram`.
pub fn adversarial_score(gram: &DenseMatrix, d: usize, z: &[i8]) -> Result<f64> {
    let proj = bottom_projector(gram, d)?;
    let zf: Vec<f64> = z.iter().map(|&v| f64::from(v)).collect();
    Ok(proj.quadratic_form(&zf))
}

/// Finds `z ∈ {±1}^{2d}` with `Σ_{i≤d}(u_iᵀz)² ≥ d` by random restarts and
/// greedy single-coordinate flips. Stops at the first success.
pub fn search_adversarial_labels(gram: &DenseMatrix, d: usize, budget: usize, seed: u64) -> Result<SignSearch> {
    let proj = bottom_projector(gram, d)?;
    let n = 2 * d;
    let target = d as f64;
    let accept = target * (1.0 - 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evaluations = 0usize;
    let mut best: Option<(Vec<i8>, f64)> = None;

    'restarts: for _ in 0..SIGN_SEARCH_RESTARTS {
        if evaluations >= budget {
            break;
        }
        let mut z: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let mut pz = proj.matvec(&z);
        let mut score = crate::linalg::dot(&z, &pz);
        evaluations += 1;
        loop {
            if best.as_ref().is_none_or(|(_, b)| score > *b) {
                best = Some((z.iter().map(|&v| v as i8).collect(), score));
            }
            if score >= accept {
                break 'restarts;
            }
            // flipping z_j changes the score by 4 (P_jj - z_j (Pz)_j)
            let mut step = None;
            let mut step_gain = 1e-12;
            for j in 0..n {
                if evaluations >= budget {
                    break;
                }
                evaluations += 1;
                let gain = 4.0 * (proj[(j, j)] - z[j] * pz[j]);
                if gain > step_gain {
                    step_gain = gain;
                    step = Some(j);
                }
            }
            let Some(j) = step else { break };
            let delta = -2.0 * z[j];
            z[j] = -z[j];
            for (r, v) in pz.iter_mut().enumerate() {
                *v += proj[(r, j)] * delta;
            }
            score = crate::linalg::dot(&z, &pz);
        }
    }

    let (z, score) = best.unwrap_or_else(|| (vec![1; n], f64::NEG_INFINITY));
    if score >= accept {
        Ok(SignSearch { z, score, evaluations })
    } else {
        Err(Error::SearchExhausted {
            evaluations,
            best: score,
            target,
        })
    }
}

/// JSON form of an instance. Block and sub indices are 1-based; `z` is
/// present only for low-rank instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub m: usize,
    pub d: usize,
    pub sigma: Vec<u8>,
    pub assignment: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Hard(BlockKernel),
    LowRank(LowRankInstance),
}

impl Instance {
    pub fn to_document(&self) -> InstanceDocument {
        match self {
            Instance::Hard(k) => k.to_document(),
            Instance::LowRank(l) => l.to_document(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDocument = serde_json::from_str(text)?;
        Self::from_document(doc)
    }

    pub fn from_document(doc: InstanceDocument) -> Result<Self> {
        if doc.sigma.len() != doc.d {
            return Err(Error::invalid(format!("sigma has {} entries, d = {}", doc.sigma.len(), doc.d)));
        }
        if doc.assignment.len() != doc.m {
            return Err(Error::invalid(format!(
                "assignment has {} entries, m = {}",
                doc.assignment.len(),
                doc.m
            )));
        }
        let sigma = doc
            .sigma
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::invalid(format!("sigma bit must be 0 or 1, got {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let assignment = doc
            .assignment
            .iter()
            .map(|&[block, sub]| {
                let sub = match sub {
                    1 => Sub::First,
                    2 => Sub::Second,
                    other => return Err(Error::invalid(format!("sub index must be 1 or 2, got {other}"))),
                };
                if block == 0 {
                    return Err(Error::invalid("block indices are 1-based"));
                }
                Ok(Slot { block: block - 1, sub })
            })
            .collect::<Result<Vec<_>>>()?;
        let kernel = BlockKernel::from_parts(sigma, assignment)?;
        match doc.z {
            None => Ok(Instance::Hard(kernel)),
            Some(z) => {
                let inst = LowRankInstance::new(doc.d, doc.m, z)?;
                if inst.as_block_kernel() != kernel {
                    return Err(Error::invalid("assignment does not match the contiguous low-rank layout"));
                }
                Ok(Instance::LowRank(inst))
            }
        }
    }
}
