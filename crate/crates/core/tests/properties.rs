use infoest::bayes::ww_entropy;
use infoest::boot::{
    entropy_boot, expected_resampled_entropy, resample, BootstrapConfig, Statistic,
};
use infoest::decision::{bayes_error, bhattacharyya_coefficient, lin_bound, BinaryClassModel};
use infoest::info::{
    coarse_grain_joint, entropy_naive, jsd_naive, kl_divergence, mi_naive, CoarseGrain,
    CountVector, JointDistribution, PartitionMap, Simplex,
};
use infoest::priors::{sample_dirichlet, sample_dprime, sample_nsb, PartitionScheme};
use infoest::rng::stream;
use infoest::Execution;
use proptest::prelude::*;

fn simplex(k: usize) -> impl Strategy<Value = Simplex> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.001f64..1.0], k)
        .prop_filter("positive mass", |w| w.iter().sum::<f64>() > 0.0)
        .prop_map(|w| Simplex::from_unnormalized(w).unwrap())
}

fn partition(fine: usize) -> impl Strategy<Value = PartitionMap> {
    (1..=fine)
        .prop_flat_map(move |coarse| (Just(coarse), prop::collection::vec(0..coarse, fine)))
        .prop_map(|(coarse, mut a)| {
            // The first `coarse` bins seed every block so the map is onto.
            for (i, slot) in a.iter_mut().take(coarse).enumerate() {
                *slot = i;
            }
            PartitionMap::new(a, coarse).unwrap()
        })
}

fn joint(rows: usize, cols: usize) -> impl Strategy<Value = JointDistribution> {
    simplex(rows * cols).prop_map(move |p| JointDistribution::new(rows, cols, p).unwrap())
}

fn channel(from: usize, to: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(simplex(to).prop_map(|s| s.into_weights()), from)
}

fn apply_channels(j: &JointDistribution, a: &[Vec<f64>], b: &[Vec<f64>]) -> JointDistribution {
    let (ka, kb) = (a[0].len(), b[0].len());
    let mut out = vec![0.0; ka * kb];
    for (x, ax) in a.iter().enumerate().take(j.rows()) {
        for (y, by) in b.iter().enumerate().take(j.cols()) {
            for u in 0..ka {
                for v in 0..kb {
                    out[u * kb + v] += j.get(x, y) * ax[u] * by[v];
                }
            }
        }
    }
    JointDistribution::new(ka, kb, Simplex::from_unnormalized(out).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn entropy_chain_rule((p, map) in (2usize..=9).prop_flat_map(|k| (simplex(k), partition(k)))) {
        let coarse = p.coarse_grain(&map).unwrap();
        let mut rhs = entropy_naive(&coarse).unwrap();
        for (c, block) in map.blocks().iter().enumerate() {
            let w = coarse.weights()[c];
            if let Some(sub) = p.restrict(block) {
                rhs += w * entropy_naive(&sub).unwrap();
            }
        }
        let lhs = entropy_naive(&p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn mi_combine_identity(j in joint(2, 3)) {
        let id = PartitionMap::identity(2).unwrap();
        let merge = PartitionMap::merging(3, &[1, 2]).unwrap();
        let coarse = coarse_grain_joint(&j, &id, &merge).unwrap();
        let weight = j.col_marginal()[1] + j.col_marginal()[2];
        let sub = j.restrict_cols(&[1, 2]).map_or(0.0, |s| mi_naive(&s).unwrap());
        let lhs = mi_naive(&j).unwrap();
        prop_assert!((lhs - (mi_naive(&coarse).unwrap() + weight * sub)).abs() < 1e-12);
    }

    #[test]
    fn deterministic_dpi(j in joint(4, 5), rm in partition(4), cm in partition(5)) {
        let coarse = coarse_grain_joint(&j, &rm, &cm).unwrap();
        prop_assert!(mi_naive(&coarse).unwrap() <= mi_naive(&j).unwrap() + 1e-12);
    }

    #[test]
    fn stochastic_dpi(j in joint(3, 4), a in channel(3, 3), b in channel(4, 2)) {
        let out = apply_channels(&j, &a, &b);
        prop_assert!(mi_naive(&out).unwrap() <= mi_naive(&j).unwrap() + 1e-12);
    }

    #[test]
    fn kl_nonnegative(p in simplex(5), q in simplex(5)) {
        let d = kl_divergence(&p, &q).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-12);
        let same = p.weights().iter().zip(q.weights()).all(|(a, b)| (a - b).abs() < 1e-9);
        if !same {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn jsd_symmetry_and_bound(p in simplex(6), q in simplex(6), alpha in 0.0f64..=1.0) {
        let a = jsd_naive(&p, &q, alpha).unwrap();
        let b = jsd_naive(&q, &p, 1.0 - alpha).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        let h = -[alpha, 1.0 - alpha].iter().filter(|w| **w > 0.0).map(|w| w * w.log2()).sum::<f64>();
        prop_assert!(a >= 0.0 && a <= h + 1e-12);
    }

    #[test]
    fn sqrt_jsd_triangle(p in simplex(5), q in simplex(5), r in simplex(5)) {
        let d = |x: &Simplex, y: &Simplex| jsd_naive(x, y, 0.5).unwrap().sqrt();
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-9);
    }

    #[test]
    fn jsd_is_class_indicator_mi(p in simplex(6), q in simplex(6), alpha in 0.01f64..0.99) {
        let rows = vec![
            p.weights().iter().map(|w| alpha * w).collect::<Vec<_>>(),
            q.weights().iter().map(|w| (1.0 - alpha) * w).collect::<Vec<_>>(),
        ];
        let j = JointDistribution::from_rows(&rows).unwrap();
        prop_assert!((jsd_naive(&p, &q, alpha).unwrap() - mi_naive(&j).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn jsd_coarse_graining_identity(p in simplex(4), q in simplex(4), alpha in 0.01f64..0.99) {
        let merge = PartitionMap::merging(4, &[2, 3]).unwrap();
        let (pc, qc) = (p.coarse_grain(&merge).unwrap(), q.coarse_grain(&merge).unwrap());
        let (ps, qs) = (pc.weights()[2], qc.weights()[2]);
        let mass = alpha * ps + (1.0 - alpha) * qs;
        let mut rhs = jsd_naive(&pc, &qc, alpha).unwrap();
        if mass > 0.0 {
            let a = alpha * ps / mass;
            let sub = |s: &Simplex| s.restrict(&[2, 3]).unwrap_or_else(|| Simplex::uniform(2).unwrap());
            rhs += mass * jsd_naive(&sub(&p), &sub(&q), a).unwrap();
        }
        prop_assert!((jsd_naive(&p, &q, alpha).unwrap() - rhs).abs() < 1e-12);
    }

    #[test]
    fn ww_entropy_monotone_in_beta(counts in prop::collection::vec(0u64..20, 2..8)) {
        let c = CountVector::new(counts).unwrap();
        let top = (c.len() as f64).log2();
        let mut last = f64::NEG_INFINITY;
        for b in [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0] {
            let h = ww_entropy(&c, b).unwrap();
            prop_assert!(h >= last - 1e-12 && h < top);
            last = h;
        }
    }

    #[test]
    fn lin_bound_dominates_bayes_error(p in simplex(5), q in simplex(5), alpha in 0.01f64..0.99) {
        let m = BinaryClassModel::new(p, q, alpha).unwrap();
        prop_assert!(lin_bound(&m) >= bayes_error(&m) - 1e-12);
    }

    #[test]
    fn rho_properties(p in simplex(5), q in simplex(5)) {
        let r = bhattacharyya_coefficient(&p, &q).unwrap();
        prop_assert!((r - bhattacharyya_coefficient(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!(r <= 1.0);
        prop_assert!((bhattacharyya_coefficient(&p, &p).unwrap() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resample_preserves_total(counts in prop::collection::vec(0u64..30, 1..10), seed in any::<u64>()) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let c = CountVector::new(counts).unwrap();
        let mut g = stream(seed, &[]);
        for _ in 0..20 {
            let r = resample(&c, &mut g).unwrap();
            prop_assert_eq!(r.total(), c.total());
            for (x, &orig) in r.counts().iter().zip(c.counts()) {
                prop_assert!(orig > 0 || *x == 0);
            }
        }
    }

    #[test]
    fn correction_raises_entropy(counts in prop::collection::vec(0u64..40, 2..12)) {
        prop_assume!(counts.iter().filter(|&&c| c > 0).count() > 1);
        let c = CountVector::new(counts.clone()).unwrap();
        let h = entropy_naive(&c).unwrap();
        prop_assert!(expected_resampled_entropy(&counts) <= h + 1e-12);
    }

    #[test]
    fn bootstrap_is_thread_count_independent(counts in prop::collection::vec(0u64..15, 2..6), seed in any::<u64>()) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let c = CountVector::new(counts).unwrap();
        let seq = BootstrapConfig::monte_carlo(64, seed).with_execution(Execution::Sequential);
        let par = seq.with_execution(Execution::Parallel);
        prop_assert_eq!(entropy_boot(&c, &seq).unwrap(), entropy_boot(&c, &par).unwrap());
    }

    #[test]
    fn sampler_outputs_are_valid(k in 1usize..12, seed in any::<u64>()) {
        let mut g = stream(seed, &[]);
        let mut draws = vec![
            sample_dirichlet(k, 0.7, &mut g).unwrap(),
            sample_dprime(k, PartitionScheme::Uniform, &mut g).unwrap(),
            sample_dprime(k, PartitionScheme::RandomComposition, &mut g).unwrap(),
        ];
        if k >= 2 {
            draws.push(sample_nsb(k, &mut g).unwrap());
        }
        for p in draws {
            prop_assert_eq!(p.len(), k);
            prop_assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.weights().iter().all(|w| *w >= 0.0));
        }
    }
}

#[test]
fn exact_statistic_tags() {
    let c = CountVector::new(vec![2, 1]).unwrap();
    let h = infoest::boot::exact_bootstrap_expectation(&c, Statistic::Entropy, 100).unwrap();
    let mm = infoest::boot::exact_bootstrap_expectation(&c, Statistic::MillerMadow, 100).unwrap();
    assert!(mm > h);
}
