//! Experiment harness: coarse-graining consistency, bias and RMS error,
//! error-bar coverage and prior entropy histograms, over systems drawn from a
//! prior and sampled at several sampling factors (observations per state).
//!
//! Trials are independent. Trial `t` draws its system from stream `[t]` and its
//! sample at factor `f` from stream `[t, f]`, so every cell is reproducible
//! from the seed alone and one system is shared across all factors.

use std::f64::consts::LN_2;
use std::io::Write;

use infoest::bayes::{nsb_entropy, nsb_mi, ww_entropy, ww_mi, QuadratureSpec};
use infoest::boot::{
    entropy_boot, entropy_boot_limit, mi_boot, mi_boot_limit, BootstrapConfig,
};
use infoest::info::{
    entropy_naive, entropy_of_counts, mi_naive, mi_of_cells, CountVector, JointCountMatrix,
    JointDistribution,
};
use infoest::par::map_indexed;
use infoest::priors::{sample_counts, PriorSampler, PriorSpec};
use infoest::rng::{child_seed, stream};
use infoest::{Execution, InfoError};
use serde::{Deserialize, Serialize};

pub mod io;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ConsistencyEntropy,
    ConsistencyMi,
    BiasRms,
    Coverage,
    EntropyHistogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Naive,
    Mm,
    Boot,
    Ww,
    Nsb,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Naive => "naive",
            Estimator::Mm => "mm",
            Estimator::Boot => "boot",
            Estimator::Ww => "ww",
            Estimator::Nsb => "nsb",
        }
    }
}

/// What is being estimated: entropy over `k` states or MI over a
/// `rows × cols` table (the prior is drawn over all cells).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "quantity", rename_all = "lowercase")]
pub enum Target {
    Entropy { k: usize },
    Mi { rows: usize, cols: usize },
}

impl Target {
    pub fn states(self) -> usize {
        match self {
            Target::Entropy { k } => k,
            Target::Mi { rows, cols } => rows * cols,
        }
    }
}

/// How the bootstrap mean `⟨F*⟩` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "eval", rename_all = "kebab-case")]
pub enum BootEval {
    /// The `B → ∞` limit, computed exactly.
    ClosedForm,
    MonteCarlo { replicates: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub kind: ExperimentKind,
    pub prior: PriorSpec,
    pub target: Target,
    pub factors: Vec<u64>,
    pub trials: usize,
    pub estimators: Vec<Estimator>,
    pub seed: u64,
    pub boot: BootEval,
    /// Concentration used by the Wolpert-Wolf column.
    pub ww_beta: f64,
    pub quadrature: QuadratureSpec,
    /// Width of true-entropy bins for bias breakdowns; `None` skips them.
    pub entropy_bin_width: Option<f64>,
    #[serde(skip)]
    pub execution: Execution,
}

impl BenchSpec {
    pub fn new(kind: ExperimentKind, prior: PriorSpec, target: Target) -> Self {
        BenchSpec {
            kind,
            prior,
            target,
            factors: vec![1, 2, 4, 8, 16],
            trials: 10_000,
            estimators: vec![Estimator::Ww, Estimator::Nsb, Estimator::Boot],
            seed: 0,
            boot: BootEval::ClosedForm,
            ww_beta: 1.0,
            quadrature: QuadratureSpec::default(),
            entropy_bin_width: None,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let spec_err = |m: &str| Err(BenchError::Invalid(m.into()));
        if self.trials < 100 {
            return spec_err("trials must be at least 100");
        }
        if self.factors.is_empty() || self.factors.contains(&0) {
            return spec_err("sampling factors must be positive");
        }
        if self.prior.k != self.target.states() {
            return spec_err("prior size must equal the number of states");
        }
        self.prior.validate()?;
        match (self.kind, self.target) {
            (ExperimentKind::ConsistencyEntropy, Target::Entropy { k }) if k < 3 => {
                spec_err("consistency needs at least 3 states")
            }
            (ExperimentKind::ConsistencyEntropy, Target::Mi { .. }) => {
                spec_err("entropy consistency needs an entropy target")
            }
            (ExperimentKind::ConsistencyMi, Target::Mi { cols, .. }) if cols < 3 => {
                spec_err("MI consistency needs at least 3 columns")
            }
            (ExperimentKind::ConsistencyMi, Target::Entropy { .. }) => {
                spec_err("MI consistency needs an MI target")
            }
            (ExperimentKind::Coverage, _) if !matches!(self.boot, BootEval::MonteCarlo { .. }) => {
                spec_err("coverage needs Monte Carlo bootstrap error bars")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub estimator: Estimator,
    pub factor: u64,
    pub rms_bits: f64,
    pub mean_bias_bits: f64,
    pub coverage_1sigma: Option<f64>,
    pub coverage_2sigma: Option<f64>,
    pub trials: usize,
    /// Trials dropped because the sample had zero plug-in entropy.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedBias {
    pub estimator: Estimator,
    pub factor: u64,
    pub entropy_lo: f64,
    pub entropy_hi: f64,
    pub mean_bias_bits: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyHistogram {
    pub bin_width: f64,
    /// Probability mass per bin, starting at 0 bits.
    pub mass: Vec<f64>,
    pub draws: usize,
    pub mean_entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub spec: BenchSpec,
    pub cells: Vec<CellResult>,
    pub binned: Vec<BinnedBias>,
    pub histogram: Option<EntropyHistogram>,
}

impl BenchResult {
    pub fn cell(&self, estimator: Estimator, factor: u64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.estimator == estimator && c.factor == factor)
    }

    pub fn rms(&self, estimator: Estimator, factor: u64) -> f64 {
        self.cell(estimator, factor).map_or(f64::NAN, |c| c.rms_bits)
    }

    /// RMS as a table: one row per factor, one column per estimator.
    pub fn write_table_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["factor".to_string()];
        header.extend(self.spec.estimators.iter().map(|e| e.name().to_string()));
        out.write_record(&header)?;
        for &f in &self.spec.factors {
            let mut row = vec![f.to_string()];
            row.extend(self.spec.estimators.iter().map(|&e| format!("{:.6}", self.rms(e, f))));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Every cell as one CSV row.
    pub fn write_cells_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for c in &self.cells {
            out.serialize(c)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Per-trial outcome at one factor: `None` when excluded.
type FactorOutcome = Option<TrialValues>;

struct TrialValues {
    truth_entropy: f64,
    /// Error or violation per estimator, in `spec.estimators` order.
    values: Vec<f64>,
    /// Bootstrap stderr when Monte Carlo error bars are available.
    boot_stderr: Option<f64>,
}

fn estimate_entropy(
    spec: &BenchSpec,
    e: Estimator,
    c: &CountVector,
    seed: u64,
) -> Result<(f64, Option<f64>)> {
    Ok(match e {
        Estimator::Naive => (entropy_of_counts(c.counts()), None),
        Estimator::Mm => (infoest::info::entropy_miller_madow(c)?, None),
        Estimator::Ww => (ww_entropy(c, spec.ww_beta)?, None),
        Estimator::Nsb => (nsb_entropy(c, &spec.quadrature)?, None),
        Estimator::Boot => match spec.boot {
            BootEval::ClosedForm => (entropy_boot_limit(c)?, None),
            BootEval::MonteCarlo { replicates } => {
                let cfg = BootstrapConfig::monte_carlo(replicates, seed)
                    .with_execution(Execution::Sequential);
                let est = entropy_boot(c, &cfg)?;
                (est.value_bits, Some(est.stderr_bits))
            }
        },
    })
}

fn estimate_mi(
    spec: &BenchSpec,
    e: Estimator,
    j: &JointCountMatrix,
    seed: u64,
) -> Result<(f64, Option<f64>)> {
    Ok(match e {
        Estimator::Naive => (mi_of_cells(j.cells(), j.rows(), j.cols()), None),
        Estimator::Mm => (infoest::info::mi_miller_madow(j)?, None),
        Estimator::Ww => (ww_mi(j, spec.ww_beta)?, None),
        Estimator::Nsb => (nsb_mi(j, &spec.quadrature)?, None),
        Estimator::Boot => match spec.boot {
            BootEval::ClosedForm => (mi_boot_limit(j)?, None),
            BootEval::MonteCarlo { replicates } => {
                let cfg = BootstrapConfig::monte_carlo(replicates, seed)
                    .with_execution(Execution::Sequential);
                let est = mi_boot(j, &cfg)?;
                (est.value_bits, Some(est.stderr_bits))
            }
        },
    })
}

/// `F(fine) − F(coarse) − w·F(sub)` where the last two entropy bins, or the
/// last two MI columns, are merged.
fn consistency_violation(
    spec: &BenchSpec,
    e: Estimator,
    counts: &CountVector,
    seed: u64,
) -> Result<f64> {
    let n = counts.total() as f64;
    match spec.target {
        Target::Entropy { k } => {
            let c = counts.counts();
            let mut coarse = c[..k - 2].to_vec();
            coarse.push(c[k - 2] + c[k - 1]);
            let sub = CountVector::new(c[k - 2..].to_vec())?;
            let w = sub.total() as f64 / n;
            let f = |x: &CountVector, s: u64| estimate_entropy(spec, e, x, s).map(|v| v.0);
            let mut v = f(counts, child_seed(seed, &[0]))?
                - f(&CountVector::new(coarse)?, child_seed(seed, &[1]))?;
            if sub.total() > 0 {
                v -= w * f(&sub, child_seed(seed, &[2]))?;
            }
            Ok(v)
        }
        Target::Mi { rows, cols } => {
            let j = JointCountMatrix::new(rows, cols, counts.counts().to_vec())?;
            let keep: Vec<usize> = (0..cols - 2).collect();
            let fine_cols = keep.len();
            let mut coarse = Vec::with_capacity(rows * (fine_cols + 1));
            for i in 0..rows {
                coarse.extend(keep.iter().map(|&c| j.get(i, c)));
                coarse.push(j.get(i, cols - 2) + j.get(i, cols - 1));
            }
            let coarse = JointCountMatrix::new(rows, fine_cols + 1, coarse)?;
            let sub = j.restrict_cols(&[cols - 2, cols - 1]);
            let w = sub.total() as f64 / n;
            let f = |x: &JointCountMatrix, s: u64| estimate_mi(spec, e, x, s).map(|v| v.0);
            let mut v = f(&j, child_seed(seed, &[0]))? - f(&coarse, child_seed(seed, &[1]))?;
            if sub.total() > 0 {
                v -= w * f(&sub, child_seed(seed, &[2]))?;
            }
            Ok(v)
        }
    }
}

fn true_value(target: Target, p: &infoest::info::Simplex) -> Result<f64> {
    Ok(match target {
        Target::Entropy { .. } => entropy_naive(p)?,
        Target::Mi { rows, cols } => mi_naive(&JointDistribution::new(rows, cols, p.clone())?)?,
    })
}

fn run_trial(spec: &BenchSpec, prior: &PriorSampler, t: usize) -> Result<Vec<FactorOutcome>> {
    let mut g = stream(spec.seed, &[t as u64]);
    let p = prior.sample(&mut g)?;
    let truth = true_value(spec.target, &p)?;
    let truth_entropy = entropy_naive(&p)?;
    let k = spec.target.states() as u64;
    let consistency = matches!(
        spec.kind,
        ExperimentKind::ConsistencyEntropy | ExperimentKind::ConsistencyMi
    );
    spec.factors
        .iter()
        .map(|&f| {
            let mut g = stream(spec.seed, &[t as u64, f]);
            let counts = sample_counts(&p, f * k, &mut g);
            if entropy_of_counts(counts.counts()) == 0.0 {
                return Ok(None);
            }
            let boot_seed = child_seed(spec.seed, &[t as u64, f, 0xb007]);
            let mut values = Vec::with_capacity(spec.estimators.len());
            let mut boot_stderr = None;
            for &e in &spec.estimators {
                if consistency {
                    values.push(consistency_violation(spec, e, &counts, boot_seed)?);
                    continue;
                }
                let (v, se) = match spec.target {
                    Target::Entropy { .. } => estimate_entropy(spec, e, &counts, boot_seed)?,
                    Target::Mi { rows, cols } => {
                        let j = JointCountMatrix::new(rows, cols, counts.counts().to_vec())?;
                        estimate_mi(spec, e, &j, boot_seed)?
                    }
                };
                if e == Estimator::Boot {
                    boot_stderr = se;
                }
                values.push(v - truth);
            }
            Ok(Some(TrialValues { truth_entropy, values, boot_stderr }))
        })
        .collect()
}

fn run_cells(spec: &BenchSpec) -> Result<BenchResult> {
    spec.validate()?;
    let prior = PriorSampler::new(spec.prior)?;
    let outcomes = map_indexed(spec.execution, spec.trials, |t| run_trial(spec, &prior, t));
    let outcomes: Vec<Vec<FactorOutcome>> = outcomes.into_iter().collect::<Result<_>>()?;

    let mut cells = Vec::new();
    let mut binned = Vec::new();
    for (fi, &f) in spec.factors.iter().enumerate() {
        let kept: Vec<&TrialValues> = outcomes.iter().filter_map(|o| o[fi].as_ref()).collect();
        let excluded = spec.trials - kept.len();
        for (ei, &e) in spec.estimators.iter().enumerate() {
            let vals: Vec<f64> = kept.iter().map(|tv| tv.values[ei]).collect();
            let m = vals.len().max(1) as f64;
            let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
            let (cov1, cov2) = if spec.kind == ExperimentKind::Coverage && e == Estimator::Boot {
                let inside = |z: f64| {
                    kept.iter()
                        .filter(|tv| tv.values[ei].abs() <= z * tv.boot_stderr.unwrap_or(0.0))
                        .count() as f64
                        / m
                };
                (Some(inside(1.0)), Some(inside(2.0)))
            } else {
                (None, None)
            };
            cells.push(CellResult {
                estimator: e,
                factor: f,
                rms_bits: (infoest::par::pairwise_sum(&sq) / m).sqrt(),
                mean_bias_bits: infoest::par::pairwise_sum(&vals) / m,
                coverage_1sigma: cov1,
                coverage_2sigma: cov2,
                trials: kept.len(),
                excluded,
            });
            if let Some(width) = spec.entropy_bin_width {
                binned.extend(bin_bias(&kept, ei, e, f, width));
            }
        }
    }
    Ok(BenchResult { spec: spec.clone(), cells, binned, histogram: None })
}

fn bin_bias(kept: &[&TrialValues], ei: usize, e: Estimator, f: u64, width: f64) -> Vec<BinnedBias> {
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for tv in kept {
        let b = (tv.truth_entropy / width).floor().max(0.0) as usize;
        if sums.len() <= b {
            sums.resize(b + 1, (0.0, 0));
        }
        sums[b].0 += tv.values[ei];
        sums[b].1 += 1;
    }
    sums.iter()
        .enumerate()
        .filter(|(_, s)| s.1 > 0)
        .map(|(b, &(s, n))| BinnedBias {
            estimator: e,
            factor: f,
            entropy_lo: b as f64 * width,
            entropy_hi: (b + 1) as f64 * width,
            mean_bias_bits: s / n as f64,
            trials: n,
        })
        .collect()
}

/// RMS coarse-graining violation per estimator and factor.
pub fn run_consistency(spec: &BenchSpec) -> Result<BenchResult> {
    if !matches!(spec.kind, ExperimentKind::ConsistencyEntropy | ExperimentKind::ConsistencyMi) {
        return Err(BenchError::Invalid("not a consistency experiment".into()));
    }
    run_cells(spec)
}

/// Mean bias and RMS error against the true value of each drawn system.
pub fn run_bias_rms(spec: &BenchSpec) -> Result<BenchResult> {
    if spec.kind != ExperimentKind::BiasRms {
        return Err(BenchError::Invalid("not a bias-rms experiment".into()));
    }
    run_cells(spec)
}

/// Fraction of trials whose truth lies within one and two bootstrap standard
/// errors of the estimate.
pub fn run_coverage(spec: &BenchSpec) -> Result<BenchResult> {
    if spec.kind != ExperimentKind::Coverage {
        return Err(BenchError::Invalid("not a coverage experiment".into()));
    }
    if !spec.estimators.contains(&Estimator::Boot) {
        return Err(BenchError::Invalid("coverage needs the bootstrap estimator".into()));
    }
    run_cells(spec)
}

pub const HISTOGRAM_BIN_WIDTH: f64 = 0.25;

/// Histogram of the entropy of prior draws (`spec.trials` draws).
pub fn run_entropy_histogram(spec: &BenchSpec) -> Result<BenchResult> {
    if spec.kind != ExperimentKind::EntropyHistogram {
        return Err(BenchError::Invalid("not an entropy-histogram experiment".into()));
    }
    spec.prior.validate()?;
    if spec.trials < 100 {
        return Err(BenchError::Invalid("trials must be at least 100".into()));
    }
    let prior = PriorSampler::new(spec.prior)?;
    let hs = map_indexed(spec.execution, spec.trials, |t| {
        let mut g = stream(spec.seed, &[t as u64]);
        prior.sample(&mut g).and_then(|p| entropy_naive(&p))
    });
    let hs: Vec<f64> = hs.into_iter().collect::<std::result::Result<_, _>>()?;
    Ok(BenchResult {
        spec: spec.clone(),
        cells: Vec::new(),
        binned: Vec::new(),
        histogram: Some(histogram(&hs, (spec.prior.k as f64).log2(), HISTOGRAM_BIN_WIDTH)),
    })
}

fn histogram(values: &[f64], top: f64, width: f64) -> EntropyHistogram {
    let bins = ((top / width).ceil() as usize).max(1);
    let mut mass = vec![0.0; bins];
    for &h in values {
        let b = ((h / width).floor() as usize).min(bins - 1);
        mass[b] += 1.0;
    }
    let n = values.len() as f64;
    for m in &mut mass {
        *m /= n;
    }
    EntropyHistogram {
        bin_width: width,
        mass,
        draws: values.len(),
        mean_entropy: values.iter().sum::<f64>() / n,
    }
}

/// Dispatch on `spec.kind`.
pub fn run(spec: &BenchSpec) -> Result<BenchResult> {
    match spec.kind {
        ExperimentKind::ConsistencyEntropy | ExperimentKind::ConsistencyMi => run_consistency(spec),
        ExperimentKind::BiasRms => run_bias_rms(spec),
        ExperimentKind::Coverage => run_coverage(spec),
        ExperimentKind::EntropyHistogram => run_entropy_histogram(spec),
    }
}

/// `nats → bits` for callers that mix conventions.
pub fn nats_to_bits(x: f64) -> f64 {
    x / LN_2
}
