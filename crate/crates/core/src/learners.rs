//! Learners that read the kernel only through a [`BudgetedOracle`], plus
//! reference baselines and the low-rank Nyström ridge learner.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::LowRankInstance;
use crate::linalg::{psd_pseudo_inverse, DenseMatrix};
use crate::losses::Loss;
use crate::oracle::BudgetedOracle;
use crate::solvers::{
    linear_loss_solution, ridge_reduced, solve_objective, spread_block_coefficients, ClassProblem, Coefficients,
    Objective, PartitionedMatrix, ReducedRidge,
};

/// Relative eigenvalue cutoff for the landmark pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    /// Train exactly on `size` points drawn with replacement (default
    /// `⌊√B⌋`), predict zero elsewhere.
    Subsample { size: Option<usize> },
    /// Nyström approximation from `landmarks` columns (default `⌊√B⌋`):
    /// spends the budget on the landmark block first, then on full
    /// landmark rows of random points.
    Nystrom { landmarks: Option<usize> },
    /// `B` distinct random off-diagonal pairs, unobserved entries assumed 0.
    UniformRandomQueries,
    /// Exact solution with every entry known. Needs `B ≥ m(m−1)/2`.
    FullInfo,
    Zero,
    /// `α = −y/(mλ)`, optimal for the linear loss without any query.
    LinearClosedForm,
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Subsample { .. } => "subsample",
            LearnerSpec::Nystrom { .. } => "nystrom",
            LearnerSpec::UniformRandomQueries => "uniform_random_queries",
            LearnerSpec::FullInfo => "full_info",
            LearnerSpec::Zero => "zero",
            LearnerSpec::LinearClosedForm => "linear_closed_form",
        }
    }

    /// Learners whose query pattern is limited by `B` and for which the
    /// lower bounds apply.
    pub fn is_budgeted(&self) -> bool {
        !matches!(self, LearnerSpec::FullInfo)
    }

    pub fn supports(&self, objective: &Objective) -> bool {
        match self {
            LearnerSpec::LinearClosedForm => objective.loss() == Loss::Linear,
            _ => true,
        }
    }

    pub fn learn(&self, oracle: &mut BudgetedOracle<'_>, objective: &Objective, y: f64, seed: u64) -> Result<Coefficients> {
        objective.loss().check_label(y)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match *self {
            LearnerSpec::Subsample { size } => subsample_learn(oracle, objective, y, size, &mut rng),
            LearnerSpec::Nystrom { landmarks } => nystrom_query_learn(oracle, objective, y, landmarks, &mut rng),
            LearnerSpec::UniformRandomQueries => uniform_random_learn(oracle, objective, y, &mut rng),
            LearnerSpec::FullInfo => full_info_learn(oracle, objective, y),
            LearnerSpec::Zero => Ok(Coefficients::zeros(oracle.m())),
            LearnerSpec::LinearClosedForm => {
                let Some(lambda) = objective.lambda().filter(|_| objective.loss() == Loss::Linear) else {
                    return Err(Error::invalid("linear_closed_form needs the linear loss with a soft penalty"));
                };
                linear_loss_solution(&vec![y; oracle.m()], lambda)
            }
        }
    }
}

impl fmt::Display for LearnerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerSpec::Subsample { size: Some(k) } => write!(f, "subsample:{k}"),
            LearnerSpec::Nystrom { landmarks: Some(k) } => write!(f, "nystrom:{k}"),
            other => f.write_str(other.name()),
        }
    }
}

/// Accepts `name`, `name:param` or a JSON object `{"kind": ...}`.
impl FromStr for LearnerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Config(format!("learner spec {s:?}: {e}")));
        }
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let param = param
            .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad learner parameter in {s:?}"))))
            .transpose()?;
        let spec = match name {
            "subsample" => LearnerSpec::Subsample { size: param },
            "nystrom" => LearnerSpec::Nystrom { landmarks: param },
            "uniform_random_queries" => LearnerSpec::UniformRandomQueries,
            "full_info" => LearnerSpec::FullInfo,
            "zero" => LearnerSpec::Zero,
            "linear_closed_form" => LearnerSpec::LinearClosedForm,
            other => return Err(Error::Config(format!("unknown learner {other:?}"))),
        };
        if param.is_some() && !matches!(spec, LearnerSpec::Subsample { .. } | LearnerSpec::Nystrom { .. }) {
            return Err(Error::Config(format!("learner {name} takes no parameter")));
        }
        Ok(spec)
    }
}

fn isqrt(b: usize) -> usize {
    let mut k = (b as f64).sqrt() as usize;
    while k * k > b {
        k -= 1;
    }
    while (k + 1) * (k + 1) <= b {
        k += 1;
    }
    k
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Dense class labels `0..k` in order of first appearance.
    fn labels(&mut self) -> Vec<usize> {
        let mut ids = HashMap::new();
        (0..self.parent.len())
            .map(|x| {
                let root = self.find(x);
                let next = ids.len();
                *ids.entry(root).or_insert(next)
            })
            .collect()
    }
}

/// Solves the class problem and gives every member of a class an equal
/// share of its sum. Points with `class == None` get zero.
fn spread_over_classes(
    m: usize,
    members: &[(usize, Option<usize>)],
    problem: &ClassProblem,
    objective: &Objective,
    y: f64,
) -> Result<Coefficients> {
    let sums = problem.solve(objective, y)?;
    let mut counts = vec![0usize; problem.classes()];
    for &(_, c) in members {
        if let Some(c) = c {
            counts[c] += 1;
        }
    }
    let mut alpha = Coefficients::zeros(m);
    for &(t, c) in members {
        if let Some(c) = c {
            alpha.0[t] += sums[c] / counts[c] as f64;
        }
    }
    Ok(alpha)
}

fn subsample_learn(
    oracle: &mut BudgetedOracle<'_>,
    objective: &Objective,
    y: f64,
    size: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<Coefficients> {
    let m = oracle.m();
    let k = size.unwrap_or_else(|| isqrt(oracle.budget()));
    if k == 0 {
        return Ok(Coefficients::zeros(m));
    }
    let sample: Vec<usize> = (0..k).map(|_| rng.random_range(0..m)).collect();
    let mut distinct = sample.clone();
    distinct.sort_unstable();
    distinct.dedup();

    let position: HashMap<usize, usize> = distinct.iter().enumerate().map(|(j, &t)| (t, j)).collect();
    let mut sets = DisjointSets::new(distinct.len());
    let mut observed = Vec::new();
    for a in 0..distinct.len() {
        for b in a + 1..distinct.len() {
            let v = oracle.query(distinct[a], distinct[b])?;
            if v == 1 {
                sets.union(a, b);
            }
            observed.push((a, b, v));
        }
    }
    let labels = sets.labels();
    // the full sub-kernel is known, so it must be an equivalence pattern
    if let Some(&(a, b, _)) = observed.iter().find(|&&(a, b, v)| (v == 1) != (labels[a] == labels[b])) {
        return Err(Error::NotEquivalence(format!(
            "points {} and {} are linked but K = 0",
            distinct[a], distinct[b]
        )));
    }
    let classes = labels.iter().max().map_or(0, |c| c + 1);
    // duplicates stay duplicates: each draw is one loss term of the sub-problem
    let mut counts = vec![0usize; classes];
    let members: Vec<(usize, Option<usize>)> = sample
        .iter()
        .map(|t| {
            let c = labels[position[t]];
            counts[c] += 1;
            (*t, Some(c))
        })
        .collect();
    let problem = ClassProblem::from_counts(&counts, 0, k)?;
    spread_over_classes(m, &members, &problem, objective, y)
}

fn uniform_random_learn(
    oracle: &mut BudgetedOracle<'_>,
    objective: &Objective,
    y: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Coefficients> {
    let m = oracle.m();
    let total_pairs = (m as u128 * (m as u128 - 1) / 2) as usize;
    let target = oracle.budget().min(total_pairs);
    let mut sets = DisjointSets::new(m);
    while oracle.used() < target {
        let s = rng.random_range(0..m);
        let r = rng.random_range(0..m);
        if s == r || oracle.is_known(s, r) {
            continue;
        }
        if oracle.query(s, r)? == 1 {
            sets.union(s, r);
        }
    }
    // completion: transitive closure of the observed ones, zero elsewhere
    let labels = sets.labels();
    let classes = labels.iter().max().map_or(0, |c| c + 1);
    let mut counts = vec![0usize; classes];
    for &c in &labels {
        counts[c] += 1;
    }
    let members: Vec<(usize, Option<usize>)> = labels.iter().enumerate().map(|(t, &c)| (t, Some(c))).collect();
    let problem = ClassProblem::from_counts(&counts, 0, m)?;
    spread_over_classes(m, &members, &problem, objective, y)
}

fn nystrom_query_learn(
    oracle: &mut BudgetedOracle<'_>,
    objective: &Objective,
    y: f64,
    landmarks: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<Coefficients> {
    let m = oracle.m();
    let k = landmarks.unwrap_or_else(|| isqrt(oracle.budget())).min(m);
    if k == 0 {
        return Ok(Coefficients::zeros(m));
    }
    let order = index::sample(rng, m, m).into_vec();
    let (marks, others) = order.split_at(k);

    let mut w = DenseMatrix::identity(k);
    for a in 0..k {
        for b in a + 1..k {
            let v = f64::from(oracle.query(marks[a], marks[b])?);
            w[(a, b)] = v;
            w[(b, a)] = v;
        }
    }
    // rows C_t of the landmark columns, for landmarks and then for random
    // points as long as a full row fits in the budget
    let mut rows: Vec<(usize, Vec<u8>)> = (0..k)
        .map(|a| (marks[a], (0..k).map(|b| w[(a, b)] as u8).collect()))
        .collect();
    for &t in others {
        if oracle.remaining() < k {
            break;
        }
        let row = marks.iter().map(|&l| oracle.query(t, l)).collect::<Result<Vec<u8>>>()?;
        rows.push((t, row));
    }

    // K'_{t,t'} = C_tᵀ W⁺ C_t' only depends on the row pattern
    let pinv = psd_pseudo_inverse(&w, PINV_CUTOFF)?;
    let mut patterns: Vec<Vec<u8>> = Vec::new();
    let mut pattern_of = HashMap::new();
    let mut members = Vec::with_capacity(rows.len());
    for (t, row) in rows {
        if row.iter().all(|&v| v == 0) {
            members.push((t, None));
            continue;
        }
        let next = patterns.len();
        let c = *pattern_of.entry(row.clone()).or_insert_with(|| {
            patterns.push(row);
            next
        });
        members.push((t, Some(c)));
    }
    let as_f64 = |p: &[u8]| p.iter().map(|&v| f64::from(v)).collect::<Vec<f64>>();
    for (a, pa) in patterns.iter().enumerate() {
        let wa = pinv.matvec(&as_f64(pa));
        for (b, pb) in patterns.iter().enumerate() {
            let g = crate::linalg::dot(&wa, &as_f64(pb));
            let expected = if a == b { 1.0 } else { 0.0 };
            if (g - expected).abs() > 1e-8 {
                return Err(Error::NotEquivalence(format!(
                    "Nyström approximation is not a class kernel (pattern Gram {g} at ({a}, {b}))"
                )));
            }
        }
    }
    let mut counts = vec![0usize; patterns.len()];
    for &(_, c) in &members {
        if let Some(c) = c {
            counts[c] += 1;
        }
    }
    let covered: usize = counts.iter().sum();
    let problem = ClassProblem::from_counts(&counts, m - covered, m)?;
    spread_over_classes(m, &members, &problem, objective, y)
}

fn full_info_learn(oracle: &mut BudgetedOracle<'_>, objective: &Objective, y: f64) -> Result<Coefficients> {
    let kernel = oracle.kernel();
    let m = kernel.m();
    let needed = (m as u128 * (m as u128 - 1) / 2) as usize;
    if oracle.budget() < needed {
        return Err(Error::invalid(format!(
            "full_info needs a budget of at least m(m-1)/2 = {needed}, got {}",
            oracle.budget()
        )));
    }
    let solution = solve_objective(kernel, objective, y)?;
    spread_block_coefficients(kernel, &solution.beta)
}

/// Number of entries the full-information learner is charged.
pub fn full_info_queries(m: usize) -> usize {
    (m as u128 * (m as u128).saturating_sub(1) / 2) as usize
}

/// Nyström representative `G'_{a,b} = c_aᵀ W⁺ c_b`, where `W` is the true
/// kernel on the landmarks and `c_a` the landmark column pattern of block `a`.
pub fn nystrom_gram(instance: &LowRankInstance, landmarks: &[usize]) -> Result<DenseMatrix> {
    let m = instance.m();
    if landmarks.is_empty() {
        return Err(Error::invalid("need at least one landmark"));
    }
    if let Some(&bad) = landmarks.iter().find(|&&l| l >= m) {
        return Err(Error::IndexOutOfRange { index: bad, len: m });
    }
    let k = landmarks.len();
    let w = DenseMatrix::from_fn(k, k, |a, b| f64::from(instance.entry(landmarks[a], landmarks[b])));
    let pinv = psd_pseudo_inverse(&w, PINV_CUTOFF)?;
    let partition = instance.partition();
    let blocks = partition.blocks();
    let len = partition.block_len();
    let c = DenseMatrix::from_fn(blocks, k, |a, j| f64::from(instance.entry(a * len, landmarks[j])));
    let mut g = c.matmul(&pinv).matmul(&c.transpose());
    // exact symmetry for the Cholesky and eigen paths
    for a in 0..blocks {
        for b in a + 1..blocks {
            let v = 0.5 * (g[(a, b)] + g[(b, a)]);
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone)]
pub struct NystromFit {
    pub approximation: PartitionedMatrix,
    pub ridge: ReducedRidge,
}

/// Ridge regression on the Nyström approximation of the instance kernel.
/// Low rank needs at most `d` landmarks; more are accepted for comparison.
pub fn nystrom_learn(instance: &LowRankInstance, landmarks: &[usize], lambda: f64) -> Result<NystromFit> {
    let gram = nystrom_gram(instance, landmarks)?;
    let approximation = PartitionedMatrix::new(instance.partition(), gram)?;
    let ridge = ridge_reduced(&approximation, &instance.z_f64(), lambda)?;
    Ok(NystromFit { approximation, ridge })
}
