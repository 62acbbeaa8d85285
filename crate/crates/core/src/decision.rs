//! Error bounds for telling two classes apart from observations, and the
//! subclass experiment where a single-class decision rule is applied to data
//! generated by one of two hidden subclasses.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{InfoError, Result};
use crate::info::{check_same_len, entropy_of_weights, jsd_naive, Simplex};
use crate::par::{map_indexed, Execution};
use crate::rng;

/// Two classes `p` (prior `alpha`) and `q` (prior `1 − alpha`).
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryClassModel {
    p: Simplex,
    q: Simplex,
    alpha: f64,
}

impl BinaryClassModel {
    pub fn new(p: Simplex, q: Simplex, alpha: f64) -> Result<Self> {
        check_same_len(p.len(), q.len())?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(InfoError::param(format!("alpha must be in (0, 1), got {alpha}")));
        }
        Ok(BinaryClassModel { p, q, alpha })
    }

    pub fn p(&self) -> &Simplex {
        &self.p
    }

    pub fn q(&self) -> &Simplex {
        &self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        1.0 - self.alpha
    }
}

/// Lin's single-observation bound `½(H(α, β) − J_α(p, q))`.
pub fn lin_bound(m: &BinaryClassModel) -> f64 {
    let j = jsd_naive(&m.p, &m.q, m.alpha).expect("validated model");
    (0.5 * (entropy_of_weights(&[m.alpha, m.beta()]) - j)).clamp(0.0, 1.0)
}

/// Bayes error of a single observation, `Σ min(α p_i, β q_i)`.
pub fn bayes_error(m: &BinaryClassModel) -> f64 {
    m.p.weights()
        .iter()
        .zip(m.q.weights())
        .map(|(p, q)| (m.alpha * p).min(m.beta() * q))
        .sum()
}

/// Bhattacharyya coefficient `ρ = Σ √(p_i q_i)`.
pub fn bhattacharyya_coefficient(p: &Simplex, q: &Simplex) -> Result<f64> {
    check_same_len(p.len(), q.len())?;
    let rho: f64 = p.weights().iter().zip(q.weights()).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(rho.min(1.0))
}

/// The bound `P_e(n) ≤ √(αβ)·ρⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bhattacharyya {
    pub rho: f64,
    /// `√(αβ)`, the bound with no observations.
    pub prefactor: f64,
}

impl Bhattacharyya {
    pub fn from_rho(rho: f64, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(InfoError::param(format!("rho must be in [0, 1], got {rho}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(InfoError::param(format!("alpha must be in (0, 1), got {alpha}")));
        }
        Ok(Bhattacharyya {
            rho,
            prefactor: (alpha * (1.0 - alpha)).sqrt(),
        })
    }

    pub fn bound(&self, n: u64) -> f64 {
        self.prefactor * self.rho.powf(n as f64)
    }

    pub fn curve(&self, n_max: u64) -> ErrorCurve {
        ErrorCurve {
            points: (0..=n_max)
                .map(|n| CurvePoint { n, value: self.bound(n), stderr: 0.0 })
                .collect(),
        }
    }

    /// Smallest `n` with `bound(n) ≤ target`.
    pub fn threshold(&self, target: f64) -> Result<u64> {
        if !(target > 0.0 && target <= 1.0) {
            return Err(InfoError::param(format!("target must be in (0, 1], got {target}")));
        }
        if target >= self.prefactor {
            return Ok(0);
        }
        if self.rho >= 1.0 {
            return Err(InfoError::UnreachableTarget { target, floor: self.prefactor });
        }
        if self.rho == 0.0 {
            return Ok(1);
        }
        let mut n = ((target / self.prefactor).ln() / self.rho.ln()).ceil().max(0.0) as u64;
        // The closed form can land one step off under rounding.
        while self.bound(n) > target {
            n += 1;
        }
        while n > 0 && self.bound(n - 1) <= target {
            n -= 1;
        }
        Ok(n)
    }
}

pub fn bhattacharyya(m: &BinaryClassModel) -> Bhattacharyya {
    let rho = bhattacharyya_coefficient(&m.p, &m.q).expect("validated model");
    Bhattacharyya::from_rho(rho, m.alpha).expect("validated model")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Observation count.
    pub n: u64,
    /// Bound or empirical error rate.
    pub value: f64,
    /// Binomial standard error for empirical rates, 0 for bounds.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub points: Vec<CurvePoint>,
}

impl ErrorCurve {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubclassResult {
    /// Observations drawn i.i.d. from the class distribution (the subclass
    /// mixture for class `p`).
    pub class_level: ErrorCurve,
    /// All observations of a trial drawn from one subclass.
    pub per_instance: ErrorCurve,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubclassConfig {
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub execution: Execution,
}

/// Running log-likelihood comparison between the two class models. A
/// zero-likelihood observation rules a class out for good.
struct Tally {
    llr: f64,
    p_dead: bool,
    q_dead: bool,
}

impl Tally {
    fn new(alpha: f64) -> Self {
        Tally { llr: alpha.ln() - (1.0 - alpha).ln(), p_dead: false, q_dead: false }
    }

    fn observe(&mut self, lp: f64, lq: f64) {
        self.p_dead |= lp == f64::NEG_INFINITY;
        self.q_dead |= lq == f64::NEG_INFINITY;
        if lp.is_finite() && lq.is_finite() {
            self.llr += lp - lq;
        }
    }

    /// Decide for class `p`? Ties go to the class with the larger prior.
    fn says_p(&self, alpha: f64) -> bool {
        match (self.p_dead, self.q_dead) {
            (true, false) => false,
            (false, true) => true,
            (true, true) => alpha >= 0.5,
            (false, false) if self.llr == 0.0 => alpha >= 0.5,
            (false, false) => self.llr > 0.0,
        }
    }
}

const TAG_SUBCLASS: u64 = 0x5c;

/// Classify growing observation sequences with the single-class rule
/// `α·Π p(x) vs β·Π q(x)`, where `p = ½(p1 + p2)`.
pub fn subclass_experiment(
    p1: &Simplex,
    p2: &Simplex,
    q: &Simplex,
    alpha: f64,
    cfg: &SubclassConfig,
) -> Result<SubclassResult> {
    check_same_len(p1.len(), p2.len())?;
    let mixture = p1.mix(p2, 0.5)?;
    let model = BinaryClassModel::new(mixture, q.clone(), alpha)?;
    if cfg.trials < 100 {
        return Err(InfoError::param("subclass experiment needs at least 100 trials"));
    }
    let sampler = |s: &Simplex| WeightedIndex::new(s.weights()).map_err(|e| InfoError::param(e.to_string()));
    let (d_mix, d_p1, d_p2, d_q) = (sampler(model.p())?, sampler(p1)?, sampler(p2)?, sampler(q)?);
    let lp: Vec<f64> = model.p().weights().iter().map(|w| w.ln()).collect();
    let lq: Vec<f64> = q.weights().iter().map(|w| w.ln()).collect();

    let run = |truth_is_p: bool, source: &WeightedIndex<f64>, g: &mut rng::StreamRng| {
        let mut tally = Tally::new(alpha);
        let mut wrong = Vec::with_capacity(cfg.n_max + 1);
        wrong.push(tally.says_p(alpha) != truth_is_p);
        for _ in 0..cfg.n_max {
            let x = source.sample(g);
            tally.observe(lp[x], lq[x]);
            wrong.push(tally.says_p(alpha) != truth_is_p);
        }
        wrong
    };

    let per_trial = map_indexed(cfg.execution, cfg.trials, |t| {
        let mut g = rng::stream(cfg.seed, &[TAG_SUBCLASS, t as u64]);
        let class_is_p = g.random::<f64>() < alpha;
        let class_level = run(class_is_p, if class_is_p { &d_mix } else { &d_q }, &mut g);
        let instance_is_p = g.random::<f64>() < alpha;
        let source = if !instance_is_p {
            &d_q
        } else if g.random::<bool>() {
            &d_p1
        } else {
            &d_p2
        };
        let per_instance = run(instance_is_p, source, &mut g);
        (class_level, per_instance)
    });

    let curve = |second: bool| {
        let mut errors = vec![0u64; cfg.n_max + 1];
        for trial in &per_trial {
            let wrong = if second { &trial.1 } else { &trial.0 };
            for (e, &w) in errors.iter_mut().zip(wrong) {
                *e += u64::from(w);
            }
        }
        let t = cfg.trials as f64;
        ErrorCurve {
            points: errors
                .iter()
                .enumerate()
                .map(|(n, &e)| {
                    let rate = e as f64 / t;
                    CurvePoint { n: n as u64, value: rate, stderr: (rate * (1.0 - rate) / t).sqrt() }
                })
                .collect(),
        }
    };

    Ok(SubclassResult {
        class_level: curve(false),
        per_instance: curve(true),
        trials: cfg.trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(w: &[f64]) -> Simplex {
        Simplex::new(w.to_vec()).unwrap()
    }

    fn model(p: &[f64], q: &[f64], alpha: f64) -> BinaryClassModel {
        BinaryClassModel::new(s(p), s(q), alpha).unwrap()
    }

    #[test]
    fn lin_bound_examples() {
        assert!((lin_bound(&model(&[0.3, 0.7], &[0.3, 0.7], 0.5)) - 0.5).abs() < 1e-12);
        assert!(lin_bound(&model(&[1.0, 0.0], &[0.0, 1.0], 0.5)).abs() < 1e-12);
        let half_h = 0.5 * -(0.76f64 * 0.76f64.log2() + 0.24 * 0.24f64.log2());
        let lb = lin_bound(&model(&[0.5, 0.5], &[0.5, 0.5], 0.76));
        assert!((lb - half_h).abs() < 1e-12);
        assert!((lb - 0.39751).abs() < 2e-5);
        assert!((bayes_error(&model(&[0.5, 0.5], &[0.5, 0.5], 0.76)) - 0.24).abs() < 1e-12);
    }

    #[test]
    fn bhattacharyya_examples() {
        let b = bhattacharyya(&model(&[0.2, 0.8], &[0.2, 0.8], 0.3));
        assert!((b.rho - 1.0).abs() < 1e-12);
        assert!((b.bound(0) - (0.3f64 * 0.7).sqrt()).abs() < 1e-12);

        let b = Bhattacharyya::from_rho(0.998, 0.76).unwrap();
        assert!((b.bound(0) - 0.4271).abs() < 1e-4);
        assert_eq!(b.threshold(0.05).unwrap(), 1072);

        let flat = Bhattacharyya::from_rho(1.0, 0.76).unwrap();
        assert!(matches!(flat.threshold(0.05), Err(InfoError::UnreachableTarget { .. })));
        assert_eq!(flat.threshold(0.5).unwrap(), 0);

        let disjoint = bhattacharyya(&model(&[1.0, 0.0], &[0.0, 1.0], 0.5));
        assert_eq!(disjoint.rho, 0.0);
    }

    #[test]
    fn threshold_is_exact() {
        for (rho, alpha, target) in [(0.998, 0.76, 0.05), (0.998, 0.76, 0.01), (0.5, 0.5, 1e-3), (0.9, 0.2, 0.3)] {
            let b = Bhattacharyya::from_rho(rho, alpha).unwrap();
            let n = b.threshold(target).unwrap();
            assert!(b.bound(n) <= target);
            assert!(n == 0 || b.bound(n - 1) > target);
        }
    }

    #[test]
    fn bound_curve_strictly_decreases() {
        let c = Bhattacharyya::from_rho(0.9, 0.4).unwrap().curve(30).values();
        assert!(c.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn tally_ties_and_zeros() {
        let mut t = Tally::new(0.3);
        assert!(!t.says_p(0.3));
        t.observe(f64::NEG_INFINITY, -1.0);
        assert!(!t.says_p(0.3));
        let mut t = Tally::new(0.5);
        assert!(t.says_p(0.5));
        t.observe(-1.0, f64::NEG_INFINITY);
        assert!(t.says_p(0.5));
    }

    #[test]
    fn no_subclass_structure_gives_matching_curves() {
        let p = s(&[0.5, 0.3, 0.2]);
        let q = s(&[0.2, 0.3, 0.5]);
        let cfg = SubclassConfig { n_max: 20, trials: 4000, seed: 3, execution: Execution::Parallel };
        let r = subclass_experiment(&p, &p, &q, 0.6, &cfg).unwrap();
        for (a, b) in r.class_level.points.iter().zip(&r.per_instance.points) {
            let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt().max(1e-3);
            assert!((a.value - b.value).abs() < 4.0 * se, "n={}", a.n);
        }
        let v = r.class_level.values();
        assert!(v[20] < v[1] && v[1] <= v[0]);
    }

    #[test]
    fn experiment_is_deterministic_across_execution() {
        let p1 = s(&[0.7, 0.1, 0.1, 0.1]);
        let p2 = s(&[0.1, 0.1, 0.1, 0.7]);
        let q = s(&[0.55, 0.2, 0.2, 0.05]);
        let mut cfg = SubclassConfig { n_max: 10, trials: 300, seed: 9, execution: Execution::Sequential };
        let a = subclass_experiment(&p1, &p2, &q, 0.76, &cfg).unwrap();
        cfg.execution = Execution::Parallel;
        assert_eq!(a, subclass_experiment(&p1, &p2, &q, 0.76, &cfg).unwrap());
        cfg.trials = 50;
        assert!(subclass_experiment(&p1, &p2, &q, 0.76, &cfg).is_err());
    }
}
