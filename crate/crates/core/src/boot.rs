//! Multinomial resampling and zeroth-order bootstrap bias correction.
//!
//! For a plug-in statistic `F` the corrected value is `2·F(data) − ⟨F(resample)⟩`
//! and the reported standard error is the spread of `F(resample)`. The
//! expectation comes from one of three places:
//!
//! - Monte Carlo replicates, each drawn from its own counter-derived ChaCha
//!   stream, so the result does not depend on thread count;
//! - exact enumeration of every resample outcome (small samples only);
//! - for entropy and mutual information, the `B → ∞` limit in closed form.
//!   Both are sums of per-cell terms and each resampled cell count is
//!   marginally binomial, so the expectation needs only one-dimensional sums
//!   ([`expected_resampled_entropy`]).

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{InfoError, Result};
use crate::info::{
    check_probability, entropy_of_counts, mi_of_cells, CountVector, JointCountMatrix,
};
use crate::par::{map_indexed, pairwise_sum, Execution};
use crate::rng;
use crate::special::ln_factorial;

/// Default limit on the number of resample outcomes in exact mode.
pub const DEFAULT_EXACT_CAP: u64 = 1_000_000;

// Stream tags keep the three statistics on disjoint RNG streams.
const TAG_ENTROPY: u64 = 0x01;
const TAG_MI: u64 = 0x02;
const TAG_JSD: u64 = 0x03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapMode {
    #[default]
    MonteCarlo,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    /// Replicate count `B` (Monte Carlo mode).
    pub replicates: usize,
    pub seed: u64,
    pub mode: BootstrapMode,
    /// Largest enumeration allowed in exact mode.
    pub exact_cap: u64,
    /// Clamp corrected values into the statistic's attainable range.
    pub clamp: bool,
    pub execution: Execution,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 1000,
            seed: 0,
            mode: BootstrapMode::MonteCarlo,
            exact_cap: DEFAULT_EXACT_CAP,
            clamp: false,
            execution: Execution::default(),
        }
    }
}

impl BootstrapConfig {
    pub fn monte_carlo(replicates: usize, seed: u64) -> Self {
        BootstrapConfig {
            replicates,
            seed,
            ..Default::default()
        }
    }

    pub fn exact() -> Self {
        BootstrapConfig {
            mode: BootstrapMode::Exact,
            ..Default::default()
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == BootstrapMode::MonteCarlo && self.replicates < 2 {
            return Err(InfoError::param("Monte Carlo bootstrap needs at least 2 replicates"));
        }
        Ok(())
    }
}

/// Estimator tag carried by an [`Estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "naive")]
    Naive,
    #[serde(rename = "mm")]
    MillerMadow,
    #[serde(rename = "boot")]
    Bootstrap,
    #[serde(rename = "boot-exact")]
    BootstrapExact,
    #[serde(rename = "ww")]
    WolpertWolf,
    #[serde(rename = "nsb")]
    Nsb,
}

/// A point value in bits with its uncertainty and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value_bits: f64,
    pub stderr_bits: f64,
    pub method: Method,
    /// Monte Carlo replicates, or the number of enumerated outcomes in exact
    /// mode.
    pub replicates: u64,
    pub seed: u64,
    /// The input had zero plug-in entropy.
    pub degenerate: bool,
}

impl Estimate {
    /// A deterministic estimate with no spread.
    pub fn point(value_bits: f64, method: Method, degenerate: bool) -> Self {
        Estimate {
            value_bits,
            stderr_bits: 0.0,
            method,
            replicates: 0,
            seed: 0,
            degenerate,
        }
    }
}

/// One multinomial draw of `c.total()` items from the empirical distribution
/// of `c`, by sequential conditional binomials.
pub fn resample<R: Rng + ?Sized>(c: &CountVector, rng: &mut R) -> Result<CountVector> {
    if c.total() == 0 {
        return Err(InfoError::EmptySample);
    }
    CountVector::new(resample_cells(c.counts(), c.total(), rng))
}

/// Resample every cell of a joint table, total fixed.
pub fn resample_joint<R: Rng + ?Sized>(j: &JointCountMatrix, rng: &mut R) -> Result<JointCountMatrix> {
    if j.total() == 0 {
        return Err(InfoError::EmptySample);
    }
    JointCountMatrix::new(j.rows(), j.cols(), resample_cells(j.cells(), j.total(), rng))
}

fn resample_cells<R: Rng + ?Sized>(counts: &[u64], n: u64, rng: &mut R) -> Vec<u64> {
    let mut out = vec![0; counts.len()];
    let mut left = n;
    let mut mass = n;
    for (o, &c) in out.iter_mut().zip(counts) {
        if left == 0 {
            break;
        }
        if c == 0 {
            continue;
        }
        let x = if c == mass {
            left
        } else {
            let p = c as f64 / mass as f64;
            Binomial::new(left, p).expect("p in (0, 1)").sample(rng)
        };
        *o = x;
        left -= x;
        mass -= c;
    }
    out
}

struct Moments {
    mean: f64,
    sd: f64,
    count: u64,
}

fn mc_moments<F>(cfg: &BootstrapConfig, tag: u64, stat: F) -> Moments
where
    F: Fn(&mut rng::StreamRng) -> f64 + Sync,
{
    let values = map_indexed(cfg.execution, cfg.replicates, |r| {
        let mut g = rng::stream(cfg.seed, &[tag, r as u64]);
        stat(&mut g)
    });
    let b = values.len() as f64;
    let mean = pairwise_sum(&values) / b;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    Moments {
        mean,
        sd: (pairwise_sum(&dev) / (b - 1.0)).sqrt(),
        count: cfg.replicates as u64,
    }
}

fn finish(
    naive: f64,
    m: Moments,
    cfg: &BootstrapConfig,
    range: (f64, f64),
    degenerate: bool,
) -> Estimate {
    let mut value = 2.0 * naive - m.mean;
    if cfg.clamp {
        value = value.clamp(range.0, range.1);
    }
    let method = match cfg.mode {
        BootstrapMode::MonteCarlo => Method::Bootstrap,
        BootstrapMode::Exact => Method::BootstrapExact,
    };
    Estimate {
        value_bits: value,
        stderr_bits: m.sd.max(0.0),
        method,
        replicates: m.count,
        seed: cfg.seed,
        degenerate,
    }
}

/// Bootstrap-corrected entropy in bits.
pub fn entropy_boot(c: &CountVector, cfg: &BootstrapConfig) -> Result<Estimate> {
    cfg.validate()?;
    if c.total() == 0 {
        return Err(InfoError::EmptySample);
    }
    let naive = entropy_of_counts(c.counts());
    let m = match cfg.mode {
        BootstrapMode::MonteCarlo => mc_moments(cfg, TAG_ENTROPY, |g| {
            entropy_of_counts(&resample_cells(c.counts(), c.total(), g))
        }),
        BootstrapMode::Exact => exact_moments(c.counts(), cfg.exact_cap, entropy_of_counts)?,
    };
    let k = c.len() as f64;
    Ok(finish(naive, m, cfg, (0.0, k.log2()), naive == 0.0))
}

/// Bootstrap-corrected mutual information in bits. The value may be negative
/// and is only clamped on request.
pub fn mi_boot(j: &JointCountMatrix, cfg: &BootstrapConfig) -> Result<Estimate> {
    cfg.validate()?;
    if j.total() == 0 {
        return Err(InfoError::EmptySample);
    }
    let (rows, cols) = (j.rows(), j.cols());
    let naive = mi_of_cells(j.cells(), rows, cols);
    let m = match cfg.mode {
        BootstrapMode::MonteCarlo => mc_moments(cfg, TAG_MI, |g| {
            mi_of_cells(&resample_cells(j.cells(), j.total(), g), rows, cols)
        }),
        BootstrapMode::Exact => {
            exact_moments(j.cells(), cfg.exact_cap, |x| mi_of_cells(x, rows, cols))?
        }
    };
    let top = (rows.min(cols) as f64).log2();
    let degenerate = entropy_of_counts(j.cells()) == 0.0;
    Ok(finish(naive, m, cfg, (0.0, top), degenerate))
}

/// Plug-in Jensen-Shannon divergence between two histograms.
pub fn jsd_of_counts(a: &[u64], b: &[u64], alpha: f64) -> f64 {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let (na, nb) = (na as f64, nb as f64);
    let beta = 1.0 - alpha;
    let mix: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let m = alpha * x as f64 / na + beta * y as f64 / nb;
            if m > 0.0 {
                -m * m.log2()
            } else {
                0.0
            }
        })
        .sum();
    (mix - alpha * entropy_of_counts(a) - beta * entropy_of_counts(b)).max(0.0)
}

/// Bootstrap-corrected JSD. The two samples are resampled independently;
/// `alpha = None` uses `n / (n + m)`.
pub fn jsd_boot(
    c1: &CountVector,
    c2: &CountVector,
    alpha: Option<f64>,
    cfg: &BootstrapConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    crate::info::check_same_len(c1.len(), c2.len())?;
    if c1.total() == 0 || c2.total() == 0 {
        return Err(InfoError::EmptySample);
    }
    let alpha = alpha.unwrap_or(c1.total() as f64 / (c1.total() + c2.total()) as f64);
    check_probability(alpha)?;
    let naive = jsd_of_counts(c1.counts(), c2.counts(), alpha);
    let m = match cfg.mode {
        BootstrapMode::MonteCarlo => mc_moments(cfg, TAG_JSD, |g| {
            let a = resample_cells(c1.counts(), c1.total(), g);
            let b = resample_cells(c2.counts(), c2.total(), g);
            jsd_of_counts(&a, &b, alpha)
        }),
        BootstrapMode::Exact => {
            let left = enumerate_outcomes(c1.counts(), cfg.exact_cap)?;
            let right = enumerate_outcomes(c2.counts(), cfg.exact_cap)?;
            let states = left.len() as u128 * right.len() as u128;
            if states > cfg.exact_cap as u128 {
                return Err(InfoError::EnumerationCap {
                    states,
                    cap: cfg.exact_cap,
                });
            }
            let (mut s1, mut s2) = (0.0, 0.0);
            for (wa, a) in &left {
                for (wb, b) in &right {
                    let v = jsd_of_counts(a, b, alpha);
                    s1 += wa * wb * v;
                    s2 += wa * wb * v * v;
                }
            }
            Moments {
                mean: s1,
                sd: (s2 - s1 * s1).max(0.0).sqrt(),
                count: states as u64,
            }
        }
    };
    let top = crate::info::entropy_of_weights(&[alpha, 1.0 - alpha]);
    let degenerate = entropy_of_counts(c1.counts()) == 0.0 && entropy_of_counts(c2.counts()) == 0.0;
    Ok(finish(naive, m, cfg, (0.0, top), degenerate))
}

/// Statistics available to [`exact_bootstrap_expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    Entropy,
    MillerMadow,
}

impl Statistic {
    fn eval(self, counts: &[u64]) -> f64 {
        let h = entropy_of_counts(counts);
        match self {
            Statistic::Entropy => h,
            Statistic::MillerMadow => {
                let n: u64 = counts.iter().sum();
                let occupied = counts.iter().filter(|&&c| c > 0).count() as f64;
                h + (occupied - 1.0) / (2.0 * n as f64 * std::f64::consts::LN_2)
            }
        }
    }
}

/// Exact `⟨F(n*)⟩` over every resample outcome, weighted by its multinomial
/// probability.
pub fn exact_bootstrap_expectation(c: &CountVector, statistic: Statistic, cap: u64) -> Result<f64> {
    if c.total() == 0 {
        return Err(InfoError::EmptySample);
    }
    Ok(exact_moments(c.counts(), cap, |x| statistic.eval(x))?.mean)
}

/// Exact `⟨I(n̄*)⟩` for a joint table.
pub fn exact_mi_expectation(j: &JointCountMatrix, cap: u64) -> Result<f64> {
    if j.total() == 0 {
        return Err(InfoError::EmptySample);
    }
    let (rows, cols) = (j.rows(), j.cols());
    Ok(exact_moments(j.cells(), cap, |x| mi_of_cells(x, rows, cols))?.mean)
}

/// Number of compositions of `n` into `parts` non-negative parts,
/// `C(n + parts − 1, parts − 1)`, saturating.
pub fn composition_count(n: u64, parts: usize) -> u128 {
    if parts == 0 {
        return u128::from(n == 0);
    }
    let r = (parts - 1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=r {
        acc = match acc.checked_mul(n as u128 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// Every resample outcome with its probability. Only occupied bins can
/// receive resampled mass, so enumeration runs over those.
fn enumerate_outcomes(counts: &[u64], cap: u64) -> Result<Vec<(f64, Vec<u64>)>> {
    let n: u64 = counts.iter().sum();
    let occupied: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
    let states = composition_count(n, occupied.len());
    if states > cap as u128 {
        return Err(InfoError::EnumerationCap { states, cap });
    }
    let p: Vec<f64> = occupied.iter().map(|&i| counts[i] as f64 / n as f64).collect();
    let mut out = Vec::with_capacity(states as usize);
    let mut current = vec![0u64; counts.len()];
    let mut walk = Walk {
        occupied: &occupied,
        p: &p,
        linear: n <= LINEAR_WEIGHTS_UP_TO,
        current: &mut current,
        out: &mut out,
    };
    let start = if walk.linear { 1.0 } else { ln_factorial(n) };
    walk.descend(0, n, start);
    Ok(out)
}

// Up to this total, multinomial coefficients are exact in f64 and weights are
// built as products; above it they are built in log space.
const LINEAR_WEIGHTS_UP_TO: u64 = 50;

struct Walk<'a> {
    occupied: &'a [usize],
    p: &'a [f64],
    linear: bool,
    current: &'a mut [u64],
    out: &'a mut Vec<(f64, Vec<u64>)>,
}

impl Walk<'_> {
    fn term(&self, depth: usize, left: u64, x: u64) -> f64 {
        if self.linear {
            binomial_coefficient(left, x) * self.p[depth].powi(x as i32)
        } else {
            x as f64 * self.p[depth].ln() - ln_factorial(x)
        }
    }

    fn descend(&mut self, depth: usize, left: u64, w: f64) {
        let bin = self.occupied[depth];
        let range = if depth + 1 == self.occupied.len() { left..=left } else { 0..=left };
        for x in range {
            let t = self.term(depth, left, x);
            let w = if self.linear { w * t } else { w + t };
            self.current[bin] = x;
            if depth + 1 == self.occupied.len() {
                let weight = if self.linear { w } else { w.exp() };
                self.out.push((weight, self.current.to_vec()));
            } else {
                self.descend(depth + 1, left - x, w);
            }
        }
        self.current[bin] = 0;
    }
}

fn binomial_coefficient(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 1..=k {
        acc = acc * (n - k + i) as f64 / i as f64;
    }
    acc
}

fn exact_moments<F: Fn(&[u64]) -> f64>(counts: &[u64], cap: u64, stat: F) -> Result<Moments> {
    let outcomes = enumerate_outcomes(counts, cap)?;
    let (mut s1, mut s2) = (0.0, 0.0);
    for (w, x) in &outcomes {
        let v = stat(x);
        s1 += w * v;
        s2 += w * v * v;
    }
    Ok(Moments {
        mean: s1,
        sd: (s2 - s1 * s1).max(0.0).sqrt(),
        count: outcomes.len() as u64,
    })
}

// Binomial tail mass below this fraction of the modal probability is dropped.
const BINOMIAL_CUTOFF: f64 = 1e-18;

/// `E[-(X/n) ln(X/n)]` in nats for `X ~ Binomial(n, c/n)`.
fn expected_cell_term(c: u64, n: u64) -> f64 {
    if c == 0 || c == n {
        return 0.0;
    }
    let nf = n as f64;
    let p = c as f64 / nf;
    let odds = p / (1.0 - p);
    let g = |x: u64| {
        if x == 0 {
            0.0
        } else {
            let f = x as f64 / nf;
            -f * f.ln()
        }
    };
    let mode = (((n + 1) as f64) * p).floor().min(nf) as u64;
    let log_pmf = ln_factorial(n) - ln_factorial(mode) - ln_factorial(n - mode)
        + mode as f64 * p.ln()
        + (n - mode) as f64 * (1.0 - p).ln();
    let peak = log_pmf.exp();
    let mut sum = peak * g(mode);
    let mut pmf = peak;
    let mut x = mode;
    while x < n {
        pmf *= (n - x) as f64 / (x + 1) as f64 * odds;
        x += 1;
        sum += pmf * g(x);
        if pmf < BINOMIAL_CUTOFF * peak {
            break;
        }
    }
    let mut pmf = peak;
    let mut x = mode;
    while x > 0 {
        pmf *= x as f64 / ((n - x + 1) as f64 * odds);
        x -= 1;
        sum += pmf * g(x);
        if pmf < BINOMIAL_CUTOFF * peak {
            break;
        }
    }
    sum
}

/// The exact bootstrap expectation `⟨H(n*)⟩` in bits, the `B → ∞` limit of
/// the Monte Carlo mean.
pub fn expected_resampled_entropy(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let mut sorted: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    sorted.sort_unstable();
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let c = sorted[i];
        let run = sorted[i..].iter().take_while(|&&v| v == c).count();
        total += run as f64 * expected_cell_term(c, n);
        i += run;
    }
    total / std::f64::consts::LN_2
}

/// The exact bootstrap expectation `⟨I(n̄*)⟩` in bits: row, column and joint
/// resampled entropies combine linearly.
pub fn expected_resampled_mi(j: &JointCountMatrix) -> f64 {
    expected_resampled_entropy(&j.row_sums()) + expected_resampled_entropy(&j.col_sums())
        - expected_resampled_entropy(j.cells())
}

/// Bootstrap-corrected entropy at `B → ∞`.
pub fn entropy_boot_limit(c: &CountVector) -> Result<f64> {
    if c.total() == 0 {
        return Err(InfoError::EmptySample);
    }
    Ok(2.0 * entropy_of_counts(c.counts()) - expected_resampled_entropy(c.counts()))
}

/// Bootstrap-corrected mutual information at `B → ∞`.
pub fn mi_boot_limit(j: &JointCountMatrix) -> Result<f64> {
    if j.total() == 0 {
        return Err(InfoError::EmptySample);
    }
    Ok(2.0 * mi_of_cells(j.cells(), j.rows(), j.cols()) - expected_resampled_mi(j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(c: &[u64]) -> CountVector {
        CountVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn resample_degenerate_is_fixed() {
        let mut g = rng::stream(3, &[]);
        for _ in 0..50 {
            assert_eq!(resample(&cv(&[3, 0]), &mut g).unwrap().counts(), &[3, 0]);
        }
        assert!(resample(&cv(&[0, 0]), &mut g).is_err());
    }

    #[test]
    fn resample_one_one_frequencies() {
        let mut g = rng::stream(11, &[]);
        let mut tally = [0u32; 3];
        let draws = 40_000;
        for _ in 0..draws {
            let r = resample(&cv(&[1, 1]), &mut g).unwrap();
            tally[r.counts()[0] as usize] += 1;
        }
        let expect = [0.25, 0.5, 0.25];
        for (t, e) in tally.iter().zip(expect) {
            let f = *t as f64 / draws as f64;
            let se = (e * (1.0 - e) / draws as f64).sqrt();
            assert!((f - e).abs() < 5.0 * se, "{f} vs {e}");
        }
    }

    #[test]
    fn exact_enumeration_examples() {
        let e = |c: &[u64]| exact_bootstrap_expectation(&cv(c), Statistic::Entropy, DEFAULT_EXACT_CAP).unwrap();
        assert!((e(&[1, 1]) - 0.5).abs() < 1e-14);
        assert_eq!(e(&[2, 0]), 0.0);
        // 6/27 of outcomes are (1,1,1); 18/27 have a (2,1,0) shape
        let h210 = -(2.0f64 / 3.0 * (2.0f64 / 3.0).log2() + 1.0 / 3.0 * (1.0f64 / 3.0).log2());
        let expect = 6.0 / 27.0 * 3f64.log2() + 18.0 / 27.0 * h210;
        assert!((e(&[1, 1, 1]) - expect).abs() < 1e-14);
        assert!((e(&[1, 1, 1]) - 0.964_411).abs() < 1e-6);
    }

    #[test]
    fn enumeration_cap_enforced() {
        let err = exact_bootstrap_expectation(&cv(&[50; 10]), Statistic::Entropy, 1000).unwrap_err();
        assert!(matches!(err, InfoError::EnumerationCap { .. }));
        assert_eq!(composition_count(3, 3), 10);
        assert_eq!(composition_count(4, 1), 1);
    }

    #[test]
    fn entropy_boot_examples() {
        let est = entropy_boot(&cv(&[1, 1]), &BootstrapConfig::exact()).unwrap();
        assert_eq!(est.value_bits, 1.5);
        assert_eq!(est.replicates, 3);
        assert_eq!(est.method, Method::BootstrapExact);

        let d = entropy_boot(&cv(&[7, 0]), &BootstrapConfig::monte_carlo(100, 1)).unwrap();
        assert!(d.degenerate);
        assert_eq!(d.value_bits, 0.0);

        let big = entropy_boot(&cv(&[500, 500]), &BootstrapConfig::monte_carlo(10_000, 5)).unwrap();
        assert!((0.995..=1.005).contains(&big.value_bits), "{}", big.value_bits);
    }

    #[test]
    fn clamp_is_opt_in() {
        let mut cfg = BootstrapConfig::exact();
        assert_eq!(entropy_boot(&cv(&[1, 1]), &cfg).unwrap().value_bits, 1.5);
        cfg.clamp = true;
        assert_eq!(entropy_boot(&cv(&[1, 1]), &cfg).unwrap().value_bits, 1.0);
    }

    #[test]
    fn mi_boot_examples() {
        let diag = JointCountMatrix::from_rows(&[vec![5, 0], vec![0, 5]]).unwrap();
        let e = mi_boot(&diag, &BootstrapConfig::exact()).unwrap();
        assert!(e.value_bits > 1.0);

        let flat = JointCountMatrix::from_rows(&[vec![2, 2], vec![2, 2]]).unwrap();
        let e = mi_boot(&flat, &BootstrapConfig::exact()).unwrap();
        assert!(e.value_bits < 0.0);

        let big = JointCountMatrix::from_rows(&[vec![100, 100], vec![100, 100]]).unwrap();
        let e = mi_boot(&big, &BootstrapConfig::monte_carlo(10_000, 9)).unwrap();
        assert!(e.value_bits.abs() < 0.01, "{}", e.value_bits);
    }

    #[test]
    fn jsd_boot_examples() {
        let e = jsd_boot(&cv(&[1, 1]), &cv(&[1, 1]), Some(0.5), &BootstrapConfig::exact()).unwrap();
        assert_eq!(e.replicates, 9);
        assert!(e.value_bits < 0.0);

        let e = jsd_boot(&cv(&[10, 0]), &cv(&[0, 10]), Some(0.5), &BootstrapConfig::monte_carlo(200, 2)).unwrap();
        assert_eq!(e.value_bits, 1.0);
        assert!(e.degenerate);

        let e = jsd_boot(&cv(&[500, 500]), &cv(&[250, 750]), Some(0.5), &BootstrapConfig::monte_carlo(10_000, 4)).unwrap();
        let p = crate::info::Simplex::new(vec![0.5, 0.5]).unwrap();
        let q = crate::info::Simplex::new(vec![0.25, 0.75]).unwrap();
        let truth = crate::info::jsd_naive(&p, &q, 0.5).unwrap();
        assert!((e.value_bits - truth).abs() < 0.01);

        assert!(jsd_boot(&cv(&[0, 0]), &cv(&[1, 1]), None, &BootstrapConfig::exact()).is_err());
    }

    #[test]
    fn closed_form_matches_enumeration() {
        for c in [[1u64, 1, 1], [3, 2, 1], [5, 0, 1], [2, 2, 2], [6, 0, 0]] {
            let exact = exact_bootstrap_expectation(&cv(&c), Statistic::Entropy, DEFAULT_EXACT_CAP).unwrap();
            assert!((expected_resampled_entropy(&c) - exact).abs() < 1e-12, "{c:?}");
        }
        let j = JointCountMatrix::from_rows(&[vec![2, 1, 0], vec![1, 3, 1]]).unwrap();
        let exact = exact_mi_expectation(&j, DEFAULT_EXACT_CAP).unwrap();
        assert!((expected_resampled_mi(&j) - exact).abs() < 1e-12);
    }

    #[test]
    fn closed_form_large_sample_is_stable() {
        let c: Vec<u64> = (1..=16).map(|i| i * 40).collect();
        let e = expected_resampled_entropy(&c);
        assert!(e < entropy_of_counts(&c) && e > entropy_of_counts(&c) - 0.01);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let c = cv(&[4, 7, 1, 0, 9]);
        let seq = BootstrapConfig::monte_carlo(500, 17).with_execution(Execution::Sequential);
        let par = seq.with_execution(Execution::Parallel);
        assert_eq!(entropy_boot(&c, &seq).unwrap(), entropy_boot(&c, &par).unwrap());
    }
}
