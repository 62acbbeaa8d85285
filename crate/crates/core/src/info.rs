//! Exact plug-in information functionals and coarse-graining.
//!
//! Everything here is a pure function of its inputs. Logarithms are base 2,
//! `0·log 0` is taken as 0, and a KL divergence with a "magic word" (mass in
//! `p` where `q` has none) is `f64::INFINITY` rather than an error.

use crate::error::{InfoError, Result};

/// Absolute tolerance on the total mass of a [`Simplex`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// `x·log2(x)` with the continuous extension at zero.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Entropy in bits of non-negative weights that sum to one.
pub fn entropy_of_weights(weights: &[f64]) -> f64 {
    -weights.iter().map(|&w| xlog2x(w)).sum::<f64>()
}

/// Entropy in bits of the empirical distribution of `counts`.
///
/// Returns 0 for an all-zero vector; callers that must reject empty samples
/// check the total themselves.
pub fn entropy_of_counts(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let s: f64 = counts.iter().map(|&c| xlog2x(c as f64)).sum();
    (nf.log2() - s / nf).max(0.0)
}

/// A probability distribution over `k ≥ 1` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    weights: Vec<f64>,
}

impl Simplex {
    /// Validate `weights` as a distribution.
    ///
    /// Weights must be finite and non-negative and sum to one within
    /// [`SIMPLEX_TOLERANCE`]; inside the tolerance they are renormalized.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(InfoError::InvalidDistribution("no outcomes".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(InfoError::InvalidDistribution(format!("bad weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(InfoError::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Simplex { weights })
    }

    /// Normalize arbitrary non-negative weights (with positive total).
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(InfoError::InvalidDistribution(format!("bad weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || total <= 0.0 {
            return Err(InfoError::InvalidDistribution("zero total mass".into()));
        }
        Ok(Simplex {
            weights: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// The empirical distribution `n_i / n`.
    pub fn empirical(counts: &CountVector) -> Result<Self> {
        if counts.total() == 0 {
            return Err(InfoError::EmptySample);
        }
        let n = counts.total() as f64;
        Ok(Simplex {
            weights: counts.counts().iter().map(|&c| c as f64 / n).collect(),
        })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(InfoError::InvalidDistribution("no outcomes".into()));
        }
        Ok(Simplex {
            weights: vec![1.0 / k as f64; k],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// `α·self + (1-α)·other`.
    pub fn mix(&self, other: &Simplex, alpha: f64) -> Result<Simplex> {
        check_same_len(self.len(), other.len())?;
        check_probability(alpha)?;
        let beta = 1.0 - alpha;
        Ok(Simplex {
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(p, q)| alpha * p + beta * q)
                .collect(),
        })
    }

    /// The distribution conditioned on the outcomes in `members`, or `None`
    /// if they carry no mass.
    pub fn restrict(&self, members: &[usize]) -> Option<Simplex> {
        let sub: Vec<f64> = members.iter().map(|&i| self.weights[i]).collect();
        Simplex::from_unnormalized(sub).ok()
    }
}

/// Observation tallies over `k ≥ 1` bins.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CountVector {
    counts: Vec<u64>,
    total: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(InfoError::InvalidDistribution("no bins".into()));
        }
        let total = counts.iter().sum();
        Ok(CountVector { counts, total })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of bins with a nonzero count.
    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn into_counts(self) -> Vec<u64> {
        self.counts
    }

    /// The sub-vector of the bins in `members`.
    pub fn restrict(&self, members: &[usize]) -> CountVector {
        let counts: Vec<u64> = members.iter().map(|&i| self.counts[i]).collect();
        let total = counts.iter().sum();
        CountVector { counts, total }
    }
}

/// A `rows × cols` contingency table, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointCountMatrix {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    total: u64,
}

impl JointCountMatrix {
    pub fn new(rows: usize, cols: usize, counts: Vec<u64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(InfoError::InvalidDistribution("empty table shape".into()));
        }
        check_same_len(rows * cols, counts.len())?;
        let total = counts.iter().sum();
        Ok(JointCountMatrix {
            rows,
            cols,
            counts,
            total,
        })
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(InfoError::LengthMismatch {
                left: cols,
                right: r.len(),
            });
        }
        JointCountMatrix::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Cell counts, row-major.
    pub fn cells(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut out = vec![0; self.cols];
        for row in self.counts.chunks(self.cols) {
            for (o, &c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// The flattened cell counts as a single histogram.
    pub fn flatten(&self) -> CountVector {
        CountVector {
            counts: self.counts.clone(),
            total: self.total,
        }
    }

    /// Keep only the columns in `members` (rows unchanged).
    pub fn restrict_cols(&self, members: &[usize]) -> JointCountMatrix {
        let counts: Vec<u64> = self
            .counts
            .chunks(self.cols)
            .flat_map(|r| members.iter().map(move |&j| r[j]))
            .collect();
        let total = counts.iter().sum();
        JointCountMatrix {
            rows: self.rows,
            cols: members.len(),
            counts,
            total,
        }
    }
}

/// A joint distribution over a `rows × cols` grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    p: Simplex,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, p: Simplex) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(InfoError::InvalidDistribution("empty table shape".into()));
        }
        check_same_len(rows * cols, p.len())?;
        Ok(JointDistribution { rows, cols, p })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(InfoError::LengthMismatch {
                left: cols,
                right: r.len(),
            });
        }
        JointDistribution::new(rows.len(), cols, Simplex::new(rows.concat())?)
    }

    /// Joint with independent marginals, `p_ij = r_i c_j`.
    pub fn product(row: &Simplex, col: &Simplex) -> Self {
        let w = row
            .weights()
            .iter()
            .flat_map(|r| col.weights().iter().map(move |c| r * c))
            .collect();
        JointDistribution {
            rows: row.len(),
            cols: col.len(),
            p: Simplex { weights: w },
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn simplex(&self) -> &Simplex {
        &self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p.weights[i * self.cols + j]
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.p
            .weights
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.p.weights.chunks(self.cols) {
            for (o, &c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// The joint conditioned on the columns in `members`, or `None` if they
    /// carry no mass.
    pub fn restrict_cols(&self, members: &[usize]) -> Option<JointDistribution> {
        let w: Vec<f64> = self
            .p
            .weights
            .chunks(self.cols)
            .flat_map(|r| members.iter().map(move |&j| r[j]))
            .collect();
        let p = Simplex::from_unnormalized(w).ok()?;
        Some(JointDistribution {
            rows: self.rows,
            cols: members.len(),
            p,
        })
    }
}

/// A surjective map from `fine_len` bins onto `coarse_len` bins.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitionMap {
    assignment: Vec<usize>,
    coarse_len: usize,
}

impl PartitionMap {
    pub fn new(assignment: Vec<usize>, coarse_len: usize) -> Result<Self> {
        if assignment.is_empty() || coarse_len == 0 {
            return Err(InfoError::InvalidPartition("empty map".into()));
        }
        let mut hit = vec![false; coarse_len];
        for &a in &assignment {
            if a >= coarse_len {
                return Err(InfoError::InvalidPartition(format!(
                    "target {a} outside 0..{coarse_len}"
                )));
            }
            hit[a] = true;
        }
        if let Some(missing) = hit.iter().position(|h| !h) {
            return Err(InfoError::InvalidPartition(format!(
                "coarse bin {missing} has no preimage"
            )));
        }
        Ok(PartitionMap {
            assignment,
            coarse_len,
        })
    }

    pub fn identity(k: usize) -> Result<Self> {
        PartitionMap::new((0..k).collect(), k)
    }

    /// Merge the bins in `group` into one coarse bin placed last; all other
    /// bins keep their relative order.
    pub fn merging(k: usize, group: &[usize]) -> Result<Self> {
        if group.iter().any(|&g| g >= k) {
            return Err(InfoError::InvalidPartition("group outside range".into()));
        }
        let mut assignment = vec![usize::MAX; k];
        let mut next = 0;
        for (i, a) in assignment.iter_mut().enumerate() {
            if !group.contains(&i) {
                *a = next;
                next += 1;
            }
        }
        for &g in group {
            assignment[g] = next;
        }
        PartitionMap::new(assignment, next + usize::from(!group.is_empty()))
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn fine_len(&self) -> usize {
        self.assignment.len()
    }

    pub fn coarse_len(&self) -> usize {
        self.coarse_len
    }

    /// Fine bins mapped onto `coarse`, in increasing order.
    pub fn block(&self, coarse: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == coarse)
            .map(|(i, _)| i)
            .collect()
    }

    /// All blocks, indexed by coarse bin.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.coarse_len];
        for (i, &a) in self.assignment.iter().enumerate() {
            out[a].push(i);
        }
        out
    }
}

/// Something with non-negative mass per bin: a distribution or a histogram.
pub trait Histogram {
    fn bins(&self) -> usize;
    fn mass(&self, i: usize) -> f64;
    fn total_mass(&self) -> f64;
}

impl Histogram for Simplex {
    fn bins(&self) -> usize {
        self.len()
    }
    fn mass(&self, i: usize) -> f64 {
        self.weights[i]
    }
    fn total_mass(&self) -> f64 {
        1.0
    }
}

impl Histogram for CountVector {
    fn bins(&self) -> usize {
        self.len()
    }
    fn mass(&self, i: usize) -> f64 {
        self.counts[i] as f64
    }
    fn total_mass(&self) -> f64 {
        self.total as f64
    }
}

/// Plug-in entropy in bits.
///
/// Errors with [`InfoError::EmptySample`] on a histogram with no
/// observations.
pub fn entropy_naive<D: Histogram + ?Sized>(d: &D) -> Result<f64> {
    let total = d.total_mass();
    if total <= 0.0 {
        return Err(InfoError::EmptySample);
    }
    let h: f64 = (0..d.bins()).map(|i| -xlog2x(d.mass(i) / total)).sum();
    Ok(h.max(0.0))
}

/// Miller-Madow corrected entropy: `H + (m̂ - 1) / (2 n ln 2)` bits, with
/// `m̂` the number of occupied bins.
pub fn entropy_miller_madow(c: &CountVector) -> Result<f64> {
    let h = entropy_naive(c)?;
    let occupied = c.occupied() as f64;
    Ok(h + (occupied - 1.0) / (2.0 * c.total() as f64 * std::f64::consts::LN_2))
}

/// Miller-Madow MI: the corrected marginal entropies minus the corrected
/// joint entropy.
pub fn mi_miller_madow(j: &JointCountMatrix) -> Result<f64> {
    let mm = |v: Vec<u64>| entropy_miller_madow(&CountVector::new(v)?);
    Ok(mm(j.row_sums())? + mm(j.col_sums())? - mm(j.cells().to_vec())?)
}

/// Kullback-Leibler divergence `D(p‖q)` in bits; `f64::INFINITY` when `p`
/// puts mass where `q` has none.
pub fn kl_divergence(p: &Simplex, q: &Simplex) -> Result<f64> {
    check_same_len(p.len(), q.len())?;
    let mut d = 0.0;
    for (&pi, &qi) in p.weights.iter().zip(&q.weights) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Ok(f64::INFINITY);
            }
            d += pi * (pi / qi).log2();
        }
    }
    Ok(d.max(0.0))
}

/// Jensen-Shannon divergence `H(αp + βq) − αH(p) − βH(q)` in bits.
pub fn jsd_naive(p: &Simplex, q: &Simplex, alpha: f64) -> Result<f64> {
    let m = p.mix(q, alpha)?;
    let j = entropy_of_weights(&m.weights)
        - alpha * entropy_of_weights(&p.weights)
        - (1.0 - alpha) * entropy_of_weights(&q.weights);
    Ok(j.max(0.0))
}

/// Plug-in JSD between two empirical distributions.
pub fn jsd_counts(c1: &CountVector, c2: &CountVector, alpha: f64) -> Result<f64> {
    jsd_naive(&Simplex::empirical(c1)?, &Simplex::empirical(c2)?, alpha)
}

/// A joint histogram or distribution over a two-dimensional grid.
pub trait JointHistogram {
    fn shape(&self) -> (usize, usize);
    fn cell_mass(&self, i: usize, j: usize) -> f64;
    fn total_mass(&self) -> f64;
}

impl JointHistogram for JointCountMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    fn cell_mass(&self, i: usize, j: usize) -> f64 {
        self.get(i, j) as f64
    }
    fn total_mass(&self) -> f64 {
        self.total as f64
    }
}

impl JointHistogram for JointDistribution {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    fn cell_mass(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
    fn total_mass(&self) -> f64 {
        1.0
    }
}

/// Plug-in mutual information in bits: the KL divergence between the joint
/// and the product of its marginals.
pub fn mi_naive<J: JointHistogram + ?Sized>(j: &J) -> Result<f64> {
    let total = j.total_mass();
    if total <= 0.0 {
        return Err(InfoError::EmptySample);
    }
    let (rows, cols) = j.shape();
    let mut r = vec![0.0; rows];
    let mut c = vec![0.0; cols];
    for (a, ra) in r.iter_mut().enumerate() {
        for (b, cb) in c.iter_mut().enumerate() {
            let m = j.cell_mass(a, b) / total;
            *ra += m;
            *cb += m;
        }
    }
    let mut mi = 0.0;
    for (a, &ra) in r.iter().enumerate() {
        for (b, &cb) in c.iter().enumerate() {
            let m = j.cell_mass(a, b) / total;
            if m > 0.0 {
                // Logs of each factor: ra·cb can underflow for tiny cells.
                mi += m * (m.log2() - ra.log2() - cb.log2());
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Mutual information from row-major cell counts, as `H_r + H_c − H_joint`.
pub fn mi_of_cells(cells: &[u64], rows: usize, cols: usize) -> f64 {
    let mut r = vec![0u64; rows];
    let mut c = vec![0u64; cols];
    for (idx, &v) in cells.iter().enumerate() {
        r[idx / cols] += v;
        c[idx % cols] += v;
    }
    (entropy_of_counts(&r) + entropy_of_counts(&c) - entropy_of_counts(cells)).max(0.0)
}

/// Apply a coarse-graining map: each coarse bin gets the sum of its fine bins.
pub trait CoarseGrain: Sized {
    fn coarse_grain(&self, map: &PartitionMap) -> Result<Self>;
}

impl CoarseGrain for Simplex {
    fn coarse_grain(&self, map: &PartitionMap) -> Result<Self> {
        check_same_len(map.fine_len(), self.len())?;
        let mut w = vec![0.0; map.coarse_len()];
        for (&a, &p) in map.assignment.iter().zip(&self.weights) {
            w[a] += p;
        }
        Ok(Simplex { weights: w })
    }
}

impl CoarseGrain for CountVector {
    fn coarse_grain(&self, map: &PartitionMap) -> Result<Self> {
        check_same_len(map.fine_len(), self.len())?;
        let mut counts = vec![0; map.coarse_len()];
        for (&a, &c) in map.assignment.iter().zip(&self.counts) {
            counts[a] += c;
        }
        Ok(CountVector {
            counts,
            total: self.total,
        })
    }
}

/// Free-function form of [`CoarseGrain::coarse_grain`].
pub fn coarse_grain<D: CoarseGrain>(d: &D, map: &PartitionMap) -> Result<D> {
    d.coarse_grain(map)
}

fn coarse_cells<T: Copy + std::ops::AddAssign + Default>(
    cells: &[T],
    cols: usize,
    row_map: &PartitionMap,
    col_map: &PartitionMap,
) -> Vec<T> {
    let cc = col_map.coarse_len();
    let mut out = vec![T::default(); row_map.coarse_len() * cc];
    for (idx, &v) in cells.iter().enumerate() {
        let (i, j) = (idx / cols, idx % cols);
        out[row_map.assignment[i] * cc + col_map.assignment[j]] += v;
    }
    out
}

/// Coarse-grain rows and columns of a joint independently.
pub trait CoarseGrainJoint: Sized {
    fn coarse_grain_joint(&self, row_map: &PartitionMap, col_map: &PartitionMap) -> Result<Self>;
}

impl CoarseGrainJoint for JointCountMatrix {
    fn coarse_grain_joint(&self, row_map: &PartitionMap, col_map: &PartitionMap) -> Result<Self> {
        check_same_len(row_map.fine_len(), self.rows)?;
        check_same_len(col_map.fine_len(), self.cols)?;
        let counts = coarse_cells(&self.counts, self.cols, row_map, col_map);
        JointCountMatrix::new(row_map.coarse_len(), col_map.coarse_len(), counts)
    }
}

impl CoarseGrainJoint for JointDistribution {
    fn coarse_grain_joint(&self, row_map: &PartitionMap, col_map: &PartitionMap) -> Result<Self> {
        check_same_len(row_map.fine_len(), self.rows)?;
        check_same_len(col_map.fine_len(), self.cols)?;
        let w = coarse_cells(&self.p.weights, self.cols, row_map, col_map);
        Ok(JointDistribution {
            rows: row_map.coarse_len(),
            cols: col_map.coarse_len(),
            p: Simplex { weights: w },
        })
    }
}

pub fn coarse_grain_joint<J: CoarseGrainJoint>(
    j: &J,
    row_map: &PartitionMap,
    col_map: &PartitionMap,
) -> Result<J> {
    j.coarse_grain_joint(row_map, col_map)
}

pub(crate) fn check_same_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(InfoError::LengthMismatch { left, right });
    }
    Ok(())
}

pub(crate) fn check_probability(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(InfoError::param(format!("probability {alpha} outside [0, 1]")));
    }
    Ok(())
}
