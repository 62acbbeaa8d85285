//! Samplers for the prior hierarchy: symmetric Dirichlet, the NSB mixture of
//! Dirichlets, and `D'` (a larger NSB system randomly coarse-grained down to
//! `k` bins).

use std::sync::OnceLock;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::bayes::nsb_weight;
use crate::error::{InfoError, Result};
use crate::info::{CoarseGrain, CountVector, PartitionMap, Simplex};

/// Points on the NSB β grid.
pub const NSB_GRID_POINTS: usize = 10_000;
pub const NSB_BETA_MIN: f64 = 1e-6;
pub const NSB_BETA_MAX: f64 = 1e4;

// Below this table size the Stirling recursion is used for uniform partitions.
const STIRLING_TABLE_LIMIT: usize = 100_000;

/// How `D'` splits the fine bins into `k` groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionScheme {
    /// Uniform over set partitions into exactly `k` nonempty blocks.
    #[default]
    Uniform,
    /// Uniform composition of block sizes (random cut points), then a random
    /// assignment of elements. Favours unequal block sizes.
    RandomComposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PriorKind {
    Dirichlet { beta: f64 },
    Nsb,
    Dprime { scheme: PartitionScheme },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    #[serde(flatten)]
    pub kind: PriorKind,
    pub k: usize,
}

impl PriorSpec {
    pub fn dirichlet(k: usize, beta: f64) -> Self {
        PriorSpec { kind: PriorKind::Dirichlet { beta }, k }
    }

    pub fn nsb(k: usize) -> Self {
        PriorSpec { kind: PriorKind::Nsb, k }
    }

    pub fn dprime(k: usize) -> Self {
        PriorSpec {
            kind: PriorKind::Dprime { scheme: PartitionScheme::Uniform },
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(InfoError::param("k must be at least 1"));
        }
        match self.kind {
            PriorKind::Dirichlet { beta } if !(beta > 0.0 && beta.is_finite()) => {
                Err(InfoError::param(format!("beta must be positive, got {beta}")))
            }
            PriorKind::Nsb if self.k < 2 => Err(InfoError::param("NSB prior needs k >= 2")),
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Simplex> {
        self.validate()?;
        match self.kind {
            PriorKind::Dirichlet { beta } => sample_dirichlet(self.k, beta, rng),
            PriorKind::Nsb => sample_nsb(self.k, rng),
            PriorKind::Dprime { scheme } => sample_dprime(self.k, scheme, rng),
        }
    }
}

/// One draw from Dirichlet(`alphas`).
///
/// Gamma variates are formed in log space as `ln G(a+1) + ln(U)/a`, so shapes
/// down to 1e-6 neither underflow nor collapse to an all-zero vector.
pub fn sample_dirichlet_with<R: Rng + ?Sized>(alphas: &[f64], rng: &mut R) -> Result<Simplex> {
    if alphas.is_empty() {
        return Err(InfoError::param("no concentrations"));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(InfoError::param(format!("concentration must be positive, got {a}")));
    }
    let logs: Vec<f64> = alphas.iter().map(|&a| log_gamma_variate(a, rng)).collect();
    Simplex::from_unnormalized(shift_exp(logs))
}

/// One draw from the symmetric Dirichlet(β) over `k` bins.
pub fn sample_dirichlet<R: Rng + ?Sized>(k: usize, beta: f64, rng: &mut R) -> Result<Simplex> {
    if k == 0 {
        return Err(InfoError::param("k must be at least 1"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(InfoError::param(format!("beta must be positive, got {beta}")));
    }
    let g = Gamma::new(beta + 1.0, 1.0).map_err(|e| InfoError::param(e.to_string()))?;
    let logs: Vec<f64> = (0..k)
        .map(|_| g.sample(rng).ln() + open_unit(rng).ln() / beta)
        .collect();
    Simplex::from_unnormalized(shift_exp(logs))
}

fn log_gamma_variate<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(a + 1.0, 1.0).expect("shape is positive");
    g.sample(rng).ln() + open_unit(rng).ln() / a
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn shift_exp(mut logs: Vec<f64>) -> Vec<f64> {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for l in &mut logs {
        *l = (*l - top).exp();
    }
    logs
}

/// `n` i.i.d. observations from `p`, tallied per bin.
pub fn sample_counts<R: Rng + ?Sized>(p: &Simplex, n: u64, rng: &mut R) -> CountVector {
    let mut out = vec![0u64; p.len()];
    let mut left = n;
    let mut mass = 1.0;
    for (o, &w) in out.iter_mut().zip(p.weights()) {
        if left == 0 {
            break;
        }
        if w <= 0.0 {
            continue;
        }
        let x = if w >= mass {
            left
        } else {
            Binomial::new(left, (w / mass).clamp(0.0, 1.0)).expect("p in [0, 1]").sample(rng)
        };
        *o = x;
        left -= x;
        mass -= w;
    }
    // Rounding can leave mass on the table; give it to the last occupied bin.
    if left > 0 {
        let last = p.weights().iter().rposition(|&w| w > 0.0).expect("nonempty support");
        out[last] += left;
    }
    CountVector::new(out).expect("nonempty")
}

/// Inverse-CDF sampler for β under the NSB density `dξ/dβ` on a log-spaced
/// grid, with trapezoid cumulative mass and linear interpolation.
#[derive(Debug, Clone)]
pub struct NsbSampler {
    k: usize,
    betas: Vec<f64>,
    cdf: Vec<f64>,
}

impl NsbSampler {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(InfoError::param("NSB prior needs k >= 2"));
        }
        let (lo, hi) = (NSB_BETA_MIN.ln(), NSB_BETA_MAX.ln());
        let step = (hi - lo) / (NSB_GRID_POINTS - 1) as f64;
        let betas: Vec<f64> = (0..NSB_GRID_POINTS).map(|i| (lo + i as f64 * step).exp()).collect();
        let dens: Vec<f64> = betas.iter().map(|&b| nsb_weight(k, b)).collect();
        let mut cdf = Vec::with_capacity(NSB_GRID_POINTS);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..NSB_GRID_POINTS {
            acc += 0.5 * (dens[i] + dens[i - 1]) * (betas[i] - betas[i - 1]);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(NsbSampler { k, betas, cdf })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// β at cumulative probability `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.betas[i - 1] + t.clamp(0.0, 1.0) * (self.betas[i] - self.betas[i - 1])
    }

    pub fn sample_beta<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Simplex {
        let beta = self.sample_beta(rng);
        sample_dirichlet(self.k, beta, rng).expect("valid parameters")
    }
}

/// One draw from the NSB mixture over `k` bins.
pub fn sample_nsb<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Simplex> {
    Ok(NsbSampler::new(k)?.sample(rng))
}

/// One draw from `D'` over `k` bins: `k'` uniform on `[k, k²]`, an NSB draw
/// over `k'` bins, and a random partition of those bins into `k` groups.
pub fn sample_dprime<R: Rng + ?Sized>(k: usize, scheme: PartitionScheme, rng: &mut R) -> Result<Simplex> {
    if k == 0 {
        return Err(InfoError::param("k must be at least 1"));
    }
    let k_prime = rng.random_range(k..=k * k);
    sample_dprime_given(k, k_prime, scheme, rng)
}

/// `D'` with the fine size `k'` fixed.
pub fn sample_dprime_given<R: Rng + ?Sized>(
    k: usize,
    k_prime: usize,
    scheme: PartitionScheme,
    rng: &mut R,
) -> Result<Simplex> {
    if k == 0 || k_prime < k {
        return Err(InfoError::param(format!("need 1 <= k <= k', got k={k}, k'={k_prime}")));
    }
    if k == 1 {
        return Simplex::new(vec![1.0]);
    }
    let fine = sample_nsb(k_prime, rng)?;
    let map = random_partition(k_prime, k, scheme, rng)?;
    fine.coarse_grain(&map)
}

// Largest number of distinct fine sizes for which `D'` keeps one NSB sampler
// per size.
const DPRIME_CACHE_LIMIT: usize = 1024;

/// A [`PriorSpec`] with its NSB grids built once, for repeated draws. Draws
/// match [`PriorSpec::sample`] for the same RNG state.
#[derive(Debug)]
pub struct PriorSampler {
    spec: PriorSpec,
    nsb: Option<NsbSampler>,
    // Indexed by `k' - k`.
    fine: Vec<OnceLock<NsbSampler>>,
}

impl PriorSampler {
    pub fn new(spec: PriorSpec) -> Result<Self> {
        spec.validate()?;
        let nsb = match spec.kind {
            PriorKind::Nsb => Some(NsbSampler::new(spec.k)?),
            _ => None,
        };
        let span = spec.k * spec.k - spec.k + 1;
        let fine = match spec.kind {
            PriorKind::Dprime { .. } if spec.k > 1 && span <= DPRIME_CACHE_LIMIT => {
                (0..span).map(|_| OnceLock::new()).collect()
            }
            _ => Vec::new(),
        };
        Ok(PriorSampler { spec, nsb, fine })
    }

    pub fn spec(&self) -> &PriorSpec {
        &self.spec
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Simplex> {
        let k = self.spec.k;
        match (self.spec.kind, &self.nsb) {
            (PriorKind::Nsb, Some(s)) => Ok(s.sample(rng)),
            (PriorKind::Dprime { scheme }, _) if !self.fine.is_empty() => {
                let k_prime = rng.random_range(k..=k * k);
                let sampler = self.fine[k_prime - k]
                    .get_or_init(|| NsbSampler::new(k_prime).expect("k' >= k >= 2"));
                let fine = sampler.sample(rng);
                let map = random_partition(k_prime, k, scheme, rng)?;
                fine.coarse_grain(&map)
            }
            _ => self.spec.sample(rng),
        }
    }
}

/// A random map of `k_fine` bins onto `k_coarse` nonempty groups.
///
/// Under [`PartitionScheme::Uniform`] every set partition into `k_coarse`
/// blocks is equally likely, and blocks get coarse indices by a uniform
/// bijection. Small cases use the Stirling recursion; large ones draw block
/// sizes as zero-truncated Poisson variates conditioned on their sum, which has
/// the same law.
pub fn random_partition<R: Rng + ?Sized>(
    k_fine: usize,
    k_coarse: usize,
    scheme: PartitionScheme,
    rng: &mut R,
) -> Result<PartitionMap> {
    if k_coarse == 0 || k_coarse > k_fine {
        return Err(InfoError::param(format!(
            "need 1 <= k_coarse <= k_fine, got {k_coarse} and {k_fine}"
        )));
    }
    let assignment = match scheme {
        PartitionScheme::Uniform if (k_fine + 1) * (k_coarse + 1) <= STIRLING_TABLE_LIMIT => {
            stirling_partition(k_fine, k_coarse, rng)
        }
        PartitionScheme::Uniform => {
            let sizes = conditioned_ztp_sizes(k_fine, k_coarse, rng);
            chunk_assignment(k_fine, &sizes, rng)
        }
        PartitionScheme::RandomComposition => {
            let sizes = composition_sizes(k_fine, k_coarse, rng);
            chunk_assignment(k_fine, &sizes, rng)
        }
    };
    PartitionMap::new(assignment, k_coarse)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln S(i, j)` for `i ≤ n`, `j ≤ k`, row-major with stride `k + 1`.
fn log_stirling_table(n: usize, k: usize) -> Vec<f64> {
    let w = k + 1;
    let mut t = vec![f64::NEG_INFINITY; (n + 1) * w];
    t[0] = 0.0;
    for i in 1..=n {
        for j in 1..=k.min(i) {
            let stay = t[(i - 1) * w + j] + (j as f64).ln();
            let open = t[(i - 1) * w + j - 1];
            t[i * w + j] = log_add(stay, open);
        }
    }
    t
}

fn stirling_partition<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let w = k + 1;
    let t = log_stirling_table(n, k);
    let mut labels = vec![0usize; n];
    let mut blocks = k;
    // Element i (counting down) opens a new block with probability
    // S(i-1, b-1)/S(i, b), otherwise joins one of the b blocks formed by the
    // remaining elements. Those blocks are labelled in the order they will be
    // opened, so a uniform label is a uniform block.
    for i in (1..=n).rev() {
        let p_open = (t[(i - 1) * w + blocks - 1] - t[i * w + blocks]).exp();
        if blocks == i || rng.random::<f64>() < p_open {
            blocks -= 1;
            labels[i - 1] = blocks;
        } else {
            labels[i - 1] = rng.random_range(0..blocks);
        }
    }
    let mut perm: Vec<usize> = (0..k).collect();
    perm.shuffle(rng);
    labels.iter().map(|&b| perm[b]).collect()
}

/// Solve `λ / (1 − e^{−λ}) = r` for `r > 1`.
fn ztp_rate(r: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, r);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mean = if mid < 1e-12 { 1.0 } else { mid / (-(-mid).exp_m1()) };
        if mean < r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ztp_log_pmf(s: usize, lambda: f64) -> f64 {
    let s = s as f64;
    s * lambda.ln() - crate::special::ln_gamma(s + 1.0) - (lambda.exp_m1()).ln()
}

fn ztp_draw<R: Rng + ?Sized>(lambda: f64, poisson: &Poisson<f64>, rng: &mut R) -> usize {
    if lambda > 1.0 {
        loop {
            let x = poisson.sample(rng) as usize;
            if x > 0 {
                return x;
            }
        }
    }
    // Inverse CDF; for small λ the mass sits on the first few sizes.
    let u: f64 = rng.random();
    let mut s = 1usize;
    let mut pmf = lambda / lambda.exp_m1();
    let mut cdf = pmf;
    while u > cdf && pmf > 0.0 {
        s += 1;
        pmf *= lambda / s as f64;
        cdf += pmf;
    }
    s
}

/// Block sizes of a uniform surjection: i.i.d. zero-truncated Poisson sizes
/// conditioned on summing to `n`. The last size is accepted in proportion to
/// its probability, which avoids waiting for an exact sum.
fn conditioned_ztp_sizes<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    if n == k {
        return vec![1; k];
    }
    if k == 1 {
        return vec![n];
    }
    let lambda = ztp_rate(n as f64 / k as f64);
    let poisson = Poisson::new(lambda).expect("positive rate");
    let mode = (lambda.floor() as usize).max(1);
    let log_peak = ztp_log_pmf(mode, lambda).max(ztp_log_pmf(mode + 1, lambda));
    let mut sizes = Vec::with_capacity(k);
    loop {
        sizes.clear();
        let mut total = 0usize;
        for _ in 0..k - 1 {
            let s = ztp_draw(lambda, &poisson, rng);
            total += s;
            sizes.push(s);
            if total >= n {
                break;
            }
        }
        if sizes.len() < k - 1 || total >= n {
            continue;
        }
        let last = n - total;
        let accept = (ztp_log_pmf(last, lambda) - log_peak).exp();
        if rng.random::<f64>() < accept {
            sizes.push(last);
            return sizes;
        }
    }
}

/// Block sizes from `k − 1` distinct uniform cut points in `1..n`.
fn composition_sizes<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut cuts: Vec<usize> = index::sample(rng, n - 1, k - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts {
        sizes.push(c - prev);
        prev = c;
    }
    sizes.push(n - prev);
    sizes
}

/// Shuffle the elements and hand out consecutive runs of the given sizes.
fn chunk_assignment<R: Rng + ?Sized>(n: usize, sizes: &[usize], rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = vec![0usize; n];
    let mut at = 0;
    for (block, &s) in sizes.iter().enumerate() {
        for &e in &order[at..at + s] {
            out[e] = block;
        }
        at += s;
    }
    out
}
