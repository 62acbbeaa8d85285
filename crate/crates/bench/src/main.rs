use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use infoest::bayes::{nsb_entropy, nsb_mi, ww_entropy, ww_mi, QuadratureSpec};
use infoest::boot::{entropy_boot, jsd_boot, mi_boot, BootstrapConfig, Estimate, Method};
use infoest::decision::{
    bhattacharyya, bayes_error, lin_bound, subclass_experiment, BinaryClassModel, SubclassConfig,
};
use infoest::info::{
    entropy_miller_madow, entropy_naive, jsd_counts, kl_divergence, mi_miller_madow, mi_of_cells,
};
use infoest::priors::{PartitionScheme, PriorSampler, PriorSpec};
use infoest::rng::stream;
use infoest::series::{lagged_mi_curve, LagSpec};
use infoest::InfoError;
use infoest_bench::io::{parse_counts, parse_distribution, parse_joint, parse_series};
use infoest_bench::{run, BenchError, BenchSpec, BootEval, Estimator, ExperimentKind, Target};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "infoest", version, about = "Small-sample information estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "boot")]
    method: Estimator,
    /// Dirichlet concentration for the Wolpert-Wolf estimator.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumerate the bootstrap distribution instead of sampling it.
    #[arg(long)]
    exact: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl Common {
    fn boot_config(&self) -> BootstrapConfig {
        if self.exact {
            BootstrapConfig::exact()
        } else {
            BootstrapConfig::monte_carlo(self.replicates, self.seed)
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorArg {
    Dirichlet,
    Nsb,
    Dprime,
}

#[derive(Args)]
struct PriorArgs {
    #[arg(long, value_enum, default_value = "dprime")]
    prior: PriorArg,
    /// Concentration of the Dirichlet prior.
    #[arg(long = "prior-beta", default_value_t = 1.0)]
    prior_beta: f64,
    /// Draw D' partitions by random cut points instead of uniformly over set
    /// partitions.
    #[arg(long)]
    composition: bool,
}

impl PriorArgs {
    fn spec(&self, k: usize) -> PriorSpec {
        let scheme = if self.composition {
            PartitionScheme::RandomComposition
        } else {
            PartitionScheme::Uniform
        };
        match self.prior {
            PriorArg::Dirichlet => PriorSpec::dirichlet(k, self.prior_beta),
            PriorArg::Nsb => PriorSpec::nsb(k),
            PriorArg::Dprime => PriorSpec { kind: infoest::priors::PriorKind::Dprime { scheme }, k },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Entropy of a count vector (file, or stdin when omitted).
    EstEntropy {
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Mutual information of a joint count table given as a CSV matrix.
    EstMi {
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Jensen-Shannon divergence between two count vectors.
    EstJsd {
        first: PathBuf,
        second: PathBuf,
        /// Weight of the first sample; defaults to its share of observations.
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// KL divergence between two distributions, in bits.
    Kl {
        p: PathBuf,
        q: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Bhattacharyya bound curve, and the observation count reaching a target.
    Bhatta {
        p: PathBuf,
        q: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 20)]
        n_max: u64,
        #[arg(long)]
        target: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Single-observation error bound and the Bayes error.
    LinBound {
        p: PathBuf,
        q: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Error curves for a class made of two subclasses.
    SubclassSim {
        p1: PathBuf,
        p2: PathBuf,
        q: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Bootstrap-corrected MI between `a` at day t and the modal symbol of `b`
    /// over a shifted window.
    LagMi {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = -10)]
        from: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 10)]
        to: i64,
        #[arg(long, default_value_t = 1)]
        window: usize,
        #[arg(long, default_value_t = 4)]
        alphabet: usize,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Draw distributions from a prior.
    PriorSample {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run one benchmark experiment.
    Bench {
        #[arg(value_enum)]
        kind: ExperimentKind,
        /// States for entropy targets.
        #[arg(long)]
        k: Option<usize>,
        /// Table shape for MI targets, e.g. `4x4`.
        #[arg(long)]
        shape: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        factors: Vec<u64>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "ww,nsb,boot")]
        estimators: Vec<Estimator>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bootstrap replicates; the exact B → ∞ limit is used when omitted
        /// (coverage defaults to 1000).
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Width of true-entropy bins for a bias breakdown.
        #[arg(long)]
        bin_width: Option<f64>,
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn read_input(path: Option<&Path>) -> Result<String, BenchError> {
    let mut text = String::new();
    match path {
        Some(p) if p != Path::new("-") => text = std::fs::read_to_string(p)?,
        _ => {
            io::stdin().read_to_string(&mut text)?;
        }
    }
    Ok(text)
}

fn read(path: &Path) -> Result<String, BenchError> {
    read_input(Some(path))
}

fn emit_rows<T: Serialize>(format: Format, rows: &[T]) -> Result<(), BenchError> {
    let stdout = io::stdout();
    match format {
        Format::Json => {
            let mut out = stdout.lock();
            serde_json::to_writer(&mut out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(stdout.lock());
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn emit<T: Serialize>(format: Format, record: &T) -> Result<(), BenchError> {
    match format {
        Format::Json => {
            let mut out = io::stdout().lock();
            serde_json::to_writer(&mut out, record)?;
            writeln!(out)?;
            Ok(())
        }
        Format::Csv => emit_rows(format, std::slice::from_ref(record)),
    }
}

fn point(value: f64, method: Method, degenerate: bool) -> Estimate {
    Estimate::point(value, method, degenerate)
}

fn bayes_method(e: Estimator) -> Method {
    match e {
        Estimator::Naive => Method::Naive,
        Estimator::Mm => Method::MillerMadow,
        Estimator::Ww => Method::WolpertWolf,
        Estimator::Nsb => Method::Nsb,
        Estimator::Boot => Method::Bootstrap,
    }
}

fn est_entropy(input: Option<&Path>, c: &Common) -> Result<Estimate, BenchError> {
    let counts = parse_counts(&read_input(input)?)?;
    let naive = entropy_naive(&counts)?;
    let degenerate = naive == 0.0;
    let value = match c.method {
        Estimator::Boot => return Ok(entropy_boot(&counts, &c.boot_config())?),
        Estimator::Naive => naive,
        Estimator::Mm => entropy_miller_madow(&counts)?,
        Estimator::Ww => ww_entropy(&counts, c.beta)?,
        Estimator::Nsb => nsb_entropy(&counts, &QuadratureSpec::default())?,
    };
    Ok(point(value, bayes_method(c.method), degenerate))
}

fn est_mi(input: Option<&Path>, c: &Common) -> Result<Estimate, BenchError> {
    let j = parse_joint(&read_input(input)?)?;
    let naive = mi_of_cells(j.cells(), j.rows(), j.cols());
    let degenerate = entropy_naive(&j.flatten())? == 0.0;
    let value = match c.method {
        Estimator::Boot => return Ok(mi_boot(&j, &c.boot_config())?),
        Estimator::Naive => naive,
        Estimator::Mm => mi_miller_madow(&j)?,
        Estimator::Ww => ww_mi(&j, c.beta)?,
        Estimator::Nsb => nsb_mi(&j, &QuadratureSpec::default())?,
    };
    Ok(point(value, bayes_method(c.method), degenerate))
}

fn est_jsd(a: &Path, b: &Path, alpha: Option<f64>, c: &Common) -> Result<Estimate, BenchError> {
    let (x, y) = (parse_counts(&read(a)?)?, parse_counts(&read(b)?)?);
    match c.method {
        Estimator::Boot => Ok(jsd_boot(&x, &y, alpha, &c.boot_config())?),
        Estimator::Naive => {
            let n = x.total() as f64;
            let a = alpha.unwrap_or(n / (n + y.total() as f64));
            let degenerate = entropy_naive(&x)? == 0.0 && entropy_naive(&y)? == 0.0;
            Ok(point(jsd_counts(&x, &y, a)?, Method::Naive, degenerate))
        }
        other => Err(BenchError::Invalid(format!("JSD supports naive and boot, not {}", other.name()))),
    }
}

#[derive(Serialize)]
struct Value {
    value_bits: f64,
}

#[derive(Serialize)]
struct LinRecord {
    lin_bound: f64,
    bayes_error: f64,
}

#[derive(Serialize)]
struct CurveRow {
    n: u64,
    value: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct BhattaRecord {
    rho: f64,
    prefactor: f64,
    threshold: Option<u64>,
    curve: Vec<f64>,
}

#[derive(Serialize)]
struct SubclassRow {
    n: u64,
    class_level: f64,
    class_level_stderr: f64,
    per_instance: f64,
    per_instance_stderr: f64,
    bound: f64,
}

#[derive(Serialize)]
struct LagRow {
    offset: i64,
    window: usize,
    #[serde(flatten)]
    estimate: Estimate,
}

fn model(p: &Path, q: &Path, alpha: f64) -> Result<BinaryClassModel, BenchError> {
    let p = parse_distribution(&read(p)?, false)?;
    let q = parse_distribution(&read(q)?, false)?;
    Ok(BinaryClassModel::new(p, q, alpha)?)
}

fn parse_shape(s: &str) -> Result<(usize, usize), BenchError> {
    let bad = || BenchError::Invalid(format!("shape must look like 4x4, got {s:?}"));
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
}

fn execute(cmd: Command) -> Result<(), BenchError> {
    match cmd {
        Command::EstEntropy { input, common } => {
            emit(common.format, &est_entropy(input.as_deref(), &common)?)
        }
        Command::EstMi { input, common } => emit(common.format, &est_mi(input.as_deref(), &common)?),
        Command::EstJsd { first, second, alpha, common } => {
            emit(common.format, &est_jsd(&first, &second, alpha, &common)?)
        }
        Command::Kl { p, q, format } => {
            let p = parse_distribution(&read(&p)?, false)?;
            let q = parse_distribution(&read(&q)?, false)?;
            emit(format, &Value { value_bits: kl_divergence(&p, &q)? })
        }
        Command::LinBound { p, q, alpha, format } => {
            let m = model(&p, &q, alpha)?;
            emit(format, &LinRecord { lin_bound: lin_bound(&m), bayes_error: bayes_error(&m) })
        }
        Command::Bhatta { p, q, alpha, n_max, target, format } => {
            let b = bhattacharyya(&model(&p, &q, alpha)?);
            let threshold = target.map(|t| b.threshold(t)).transpose()?;
            match format {
                Format::Json => emit(
                    format,
                    &BhattaRecord {
                        rho: b.rho,
                        prefactor: b.prefactor,
                        threshold,
                        curve: b.curve(n_max).values(),
                    },
                ),
                Format::Csv => {
                    let rows: Vec<CurveRow> = b
                        .curve(n_max)
                        .points
                        .iter()
                        .map(|p| CurveRow { n: p.n, value: p.value, stderr: p.stderr })
                        .collect();
                    emit_rows(format, &rows)
                }
            }
        }
        Command::SubclassSim { p1, p2, q, alpha, n_max, trials, seed, format } => {
            let p1 = parse_distribution(&read(&p1)?, false)?;
            let p2 = parse_distribution(&read(&p2)?, false)?;
            let q = parse_distribution(&read(&q)?, false)?;
            let cfg = SubclassConfig { n_max, trials, seed, execution: Default::default() };
            let r = subclass_experiment(&p1, &p2, &q, alpha, &cfg)?;
            let b = bhattacharyya(&BinaryClassModel::new(p1.mix(&p2, 0.5)?, q, alpha)?);
            let rows: Vec<SubclassRow> = r
                .class_level
                .points
                .iter()
                .zip(&r.per_instance.points)
                .map(|(c, i)| SubclassRow {
                    n: c.n,
                    class_level: c.value,
                    class_level_stderr: c.stderr,
                    per_instance: i.value,
                    per_instance_stderr: i.stderr,
                    bound: b.bound(c.n),
                })
                .collect();
            emit_rows(format, &rows)
        }
        Command::LagMi { a, b, from, to, window, alphabet, replicates, seed, format } => {
            let a = parse_series(&read(&a)?, alphabet)?;
            let b = parse_series(&read(&b)?, alphabet)?;
            let spec = LagSpec::uniform(from..=to, window)?;
            let curve = lagged_mi_curve(&a, &b, &spec, &BootstrapConfig::monte_carlo(replicates, seed))?;
            let rows: Vec<LagRow> = curve
                .into_iter()
                .map(|(offset, estimate)| LagRow { offset, window, estimate })
                .collect();
            emit_rows(format, &rows)
        }
        Command::PriorSample { k, count, seed, prior, format } => {
            let sampler = PriorSampler::new(prior.spec(k))?;
            let draws: Vec<Vec<f64>> = (0..count)
                .map(|i| sampler.sample(&mut stream(seed, &[i as u64])).map(|p| p.into_weights()))
                .collect::<Result<_, _>>()?;
            match format {
                Format::Json => emit(format, &draws),
                Format::Csv => {
                    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(io::stdout().lock());
                    for d in &draws {
                        w.serialize(d)?;
                    }
                    w.flush()?;
                    Ok(())
                }
            }
        }
        Command::Bench {
            kind,
            k,
            shape,
            trials,
            factors,
            estimators,
            seed,
            replicates,
            beta,
            bin_width,
            prior,
            format,
        } => {
            let target = match (k, shape) {
                (Some(k), None) => Target::Entropy { k },
                (None, Some(s)) => {
                    let (rows, cols) = parse_shape(&s)?;
                    Target::Mi { rows, cols }
                }
                _ => return Err(BenchError::Invalid("give exactly one of --k and --shape".into())),
            };
            let mut spec = BenchSpec::new(kind, prior.spec(target.states()), target);
            spec.trials = trials;
            spec.factors = factors;
            spec.estimators = estimators;
            spec.seed = seed;
            spec.ww_beta = beta;
            spec.entropy_bin_width = bin_width;
            spec.boot = match (kind, replicates) {
                (_, Some(replicates)) => BootEval::MonteCarlo { replicates },
                (ExperimentKind::Coverage, None) => BootEval::MonteCarlo { replicates: 1000 },
                _ => BootEval::ClosedForm,
            };
            if kind == ExperimentKind::Coverage {
                spec.estimators = vec![Estimator::Boot];
            }
            let result = run(&spec)?;
            match format {
                Format::Json => {
                    let mut out = io::stdout().lock();
                    serde_json::to_writer_pretty(&mut out, &result)?;
                    writeln!(out)?;
                    Ok(())
                }
                Format::Csv if kind == ExperimentKind::EntropyHistogram => {
                    let h = result.histogram.expect("histogram run");
                    let mut w = csv::Writer::from_writer(io::stdout().lock());
                    w.write_record(["entropy_lo", "entropy_hi", "mass"])?;
                    for (i, m) in h.mass.iter().enumerate() {
                        let lo = i as f64 * h.bin_width;
                        w.write_record(&[lo.to_string(), (lo + h.bin_width).to_string(), m.to_string()])?;
                    }
                    w.flush()?;
                    Ok(())
                }
                Format::Csv if kind == ExperimentKind::Coverage => result.write_cells_csv(io::stdout().lock()),
                Format::Csv => result.write_table_csv(io::stdout().lock()),
            }
        }
    }
}

fn exit_code(e: &BenchError) -> u8 {
    match e {
        BenchError::Info(InfoError::UnreachableTarget { .. } | InfoError::NonConvergence { .. }) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("infoest: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
