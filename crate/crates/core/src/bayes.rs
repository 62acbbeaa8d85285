//! Dirichlet posterior (Wolpert-Wolf) and NSB mixture estimators.
//!
//! Internally everything is in nats; public results are in bits. Counts are
//! grouped by distinct value before any special function is evaluated, since
//! histograms with many cells usually repeat a handful of small counts.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{InfoError, Result};
use crate::info::{CountVector, JointCountMatrix};
use crate::special::{digamma, ln_gamma, trigamma};

/// Symmetric Dirichlet concentration over `k` bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletParam {
    pub beta: f64,
    pub k: usize,
}

impl DirichletParam {
    pub fn new(beta: f64, k: usize) -> Result<Self> {
        check_beta(beta)?;
        if k == 0 {
            return Err(InfoError::param("k must be at least 1"));
        }
        Ok(DirichletParam { beta, k })
    }

    /// Prior mean entropy in bits, `ψ(kβ+1) − ψ(β+1)`.
    pub fn mean_entropy(&self) -> f64 {
        prior_mean_entropy(self.k, self.beta)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(InfoError::param(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

/// Grid over `u = ln β` for the NSB integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub lower: f64,
    pub upper: f64,
    /// Nodes on the initial scan and on the first Simpson pass.
    pub nodes: usize,
    /// Convergence threshold on node doubling, bits.
    pub tolerance: f64,
    pub max_doublings: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            lower: 1e-6f64.ln(),
            upper: 1e4f64.ln(),
            nodes: 200,
            tolerance: 1e-6,
            max_doublings: 8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(InfoError::param("quadrature bounds must be finite with lower < upper"));
        }
        if self.nodes < 32 {
            return Err(InfoError::param("quadrature needs at least 32 nodes"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(InfoError::param("quadrature tolerance must be positive"));
        }
        Ok(())
    }
}

/// Distinct values with multiplicities.
fn group(values: impl IntoIterator<Item = u64>) -> Vec<(f64, f64)> {
    let mut v: Vec<u64> = values.into_iter().collect();
    v.sort_unstable();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for x in v {
        match out.last_mut() {
            Some((val, m)) if *val == x as f64 => *m += 1.0,
            _ => out.push((x as f64, 1.0)),
        }
    }
    out
}

/// Posterior mean entropy in nats for grouped counts with a shared pseudo-count.
fn ww_nats(groups: &[(f64, f64)], pseudo: f64) -> f64 {
    let total: f64 = groups.iter().map(|(c, m)| m * (c + pseudo)).sum();
    let s: f64 = groups
        .iter()
        .map(|(c, m)| m * (c + pseudo) * digamma(c + pseudo + 1.0))
        .sum();
    digamma(total + 1.0) - s / total
}

/// Wolpert-Wolf posterior mean entropy, bits, under a symmetric
/// Dirichlet(β) prior. Zero counts give the prior mean.
pub fn ww_entropy(c: &CountVector, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(ww_nats(&group(c.counts().iter().copied()), beta) / LN_2)
}

struct JointGroups {
    rows: Vec<(f64, f64)>,
    cols: Vec<(f64, f64)>,
    cells: Vec<(f64, f64)>,
    nrows: f64,
    ncols: f64,
}

impl JointGroups {
    fn new(j: &JointCountMatrix) -> Self {
        JointGroups {
            rows: group(j.row_sums()),
            cols: group(j.col_sums()),
            cells: group(j.cells().iter().copied()),
            nrows: j.rows() as f64,
            ncols: j.cols() as f64,
        }
    }

    // A row margin aggregates `cols` cells, so its concentration is cols·β.
    fn ww_mi_nats(&self, beta: f64) -> f64 {
        ww_nats(&self.rows, self.ncols * beta) + ww_nats(&self.cols, self.nrows * beta)
            - ww_nats(&self.cells, beta)
    }
}

/// Posterior mean mutual information, bits, under Dirichlet(β) on the joint
/// cells: `E[H_rows] + E[H_cols] − E[H_joint]`, with margins carrying the
/// aggregated concentrations.
pub fn ww_mi(j: &JointCountMatrix, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(JointGroups::new(j).ww_mi_nats(beta) / LN_2)
}

/// Prior mean entropy of Dirichlet(β) over `k` bins, bits.
pub fn prior_mean_entropy(k: usize, beta: f64) -> f64 {
    (digamma(k as f64 * beta + 1.0) - digamma(beta + 1.0)) / LN_2
}

/// NSB mixing density `dξ/dβ = k·ψ₁(kβ+1) − ψ₁(β+1)`.
pub fn nsb_weight(k: usize, beta: f64) -> f64 {
    let k = k as f64;
    k * trigamma(k * beta + 1.0) - trigamma(beta + 1.0)
}

/// `ln P(n | β)` for the Dirichlet-multinomial, dropping the multinomial
/// coefficient (constant in β).
fn log_evidence(groups: &[(f64, f64)], k: f64, n: f64, beta: f64) -> f64 {
    let lg_beta = ln_gamma(beta);
    let cells: f64 = groups
        .iter()
        .filter(|(c, _)| *c > 0.0)
        .map(|(c, m)| m * (ln_gamma(c + beta) - lg_beta))
        .sum();
    ln_gamma(k * beta) - ln_gamma(n + k * beta) + cells
}

/// Posterior average of `value(β)` under the NSB mixture, integrated in
/// `u = ln β`. Returns nats.
fn nsb_integral<F>(groups: &[(f64, f64)], k: usize, q: &QuadratureSpec, value: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    q.validate()?;
    if k < 2 {
        return Err(InfoError::param("NSB needs at least 2 bins"));
    }
    let n: f64 = groups.iter().map(|(c, m)| c * m).sum();
    let kf = k as f64;
    let log_integrand = |u: f64| {
        let beta = u.exp();
        nsb_weight(k, beta).ln() + u + log_evidence(groups, kf, n, beta)
    };

    // Locate the bulk of the posterior on a coarse scan.
    let h0 = (q.upper - q.lower) / (q.nodes - 1) as f64;
    let scan: Vec<f64> = (0..q.nodes).map(|i| log_integrand(q.lower + i as f64 * h0)).collect();
    let peak = scan.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(InfoError::NonConvergence { change: f64::NAN });
    }
    let keep = |l: &f64| *l > peak - 40.0;
    let first = scan.iter().position(keep).unwrap_or(0).saturating_sub(1);
    let last = (scan.iter().rposition(keep).unwrap_or(q.nodes - 1) + 1).min(q.nodes - 1);
    let (a, b) = (q.lower + first as f64 * h0, q.lower + last as f64 * h0);

    let simpson = |intervals: usize| {
        let h = (b - a) / intervals as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=intervals {
            let u = a + i as f64 * h;
            let coef = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let w = coef * (log_integrand(u) - peak).exp();
            if w > 0.0 {
                num += w * value(u.exp());
                den += w;
            }
        }
        num / den
    };

    let mut intervals = q.nodes + q.nodes % 2;
    let mut prev = simpson(intervals);
    let mut change = f64::INFINITY;
    for _ in 0..q.max_doublings {
        intervals *= 2;
        let next = simpson(intervals);
        change = (next - prev).abs() / LN_2;
        prev = next;
        if change < q.tolerance {
            return Ok(prev);
        }
    }
    Err(InfoError::NonConvergence { change })
}

/// NSB posterior mean entropy, bits.
pub fn nsb_entropy(c: &CountVector, q: &QuadratureSpec) -> Result<f64> {
    let groups = group(c.counts().iter().copied());
    nsb_integral(&groups, c.len(), q, |beta| ww_nats(&groups, beta)).map(|h| h / LN_2)
}

/// NSB posterior mean mutual information, bits, with one concentration on the
/// joint cell space.
pub fn nsb_mi(j: &JointCountMatrix, q: &QuadratureSpec) -> Result<f64> {
    let g = JointGroups::new(j);
    nsb_integral(&g.cells, j.rows() * j.cols(), q, |beta| g.ww_mi_nats(beta)).map(|i| i / LN_2)
}
