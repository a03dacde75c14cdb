use gfield::fbm::HurstModel;
use gfield::field::{self, FieldSpec};
use gfield::kernels::{self, MeasureKernel};
use gfield::laplacian::WeightedGraph;
use gfield::measure::{Interval, Measure, MeasureConfig, Partition, Region};
use gfield::shannon::BandlimitedSignal;
use gfield::timechange::TimeChange;
use proptest::prelude::*;

fn region() -> impl Strategy<Value = Region> {
    prop::collection::vec((0.0..1.0f64, 0.0..0.4f64), 1..4)
        .prop_map(|v| Region::union_of(v.into_iter().map(|(a, w)| Interval::new(a, (a + w).min(1.0))).collect()))
}

fn measures() -> Vec<Measure> {
    vec![
        Measure::unit_lebesgue(),
        Measure::cantor_with_depth(24),
        Measure::atomic(vec![(0.1, 1.0), (0.5, 2.0), (0.75, 0.5)]).unwrap(),
    ]
}

/// Exact overlap length of two interval unions, by sweeping all pairs.
fn overlap(a: &Region, b: &Region) -> f64 {
    let (Region::Intervals(a), Region::Intervals(b)) = (a, b) else { unreachable!() };
    a.iter().flat_map(|x| b.iter().map(move |y| (x.hi.min(y.hi) - x.lo.max(y.lo)).max(0.0))).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inclusion_exclusion(a in region(), b in region()) {
        let u = a.union(&b).unwrap();
        for m in measures() {
            let lhs = m.measure_of(&u).unwrap() + m.intersection_measure(&a, &b).unwrap();
            let rhs = m.measure_of(&a).unwrap() + m.measure_of(&b).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12, "{m:?}: {lhs} vs {rhs}");
            prop_assert_eq!(m.intersection_measure(&a, &b).unwrap(), m.intersection_measure(&b, &a).unwrap());
        }
    }

    #[test]
    fn lebesgue_kernel_matches_pairwise_overlap(a in region(), b in region()) {
        let k = Measure::unit_lebesgue().intersection_measure(&a, &b).unwrap();
        prop_assert!((k - overlap(&a, &b)).abs() < 1e-14);
    }

    #[test]
    fn measure_kernel_gram_is_psd(items in prop::collection::vec(region(), 1..9)) {
        for m in measures() {
            let g = kernels::gram(&MeasureKernel { measure: m }, &items).unwrap();
            prop_assert!(kernels::check_pd(&g, kernels::PD_TOL).unwrap().is_pd);
        }
    }

    #[test]
    fn fbm_self_similarity(h in 0.02..0.98f64, c in 0.05..20.0f64, s in 0.0..4.0f64, t in 0.0..4.0f64) {
        let m = HurstModel::new(h).unwrap();
        let lhs = m.covariance(c * s, c * t).unwrap();
        let rhs = c.powf(2.0 * h) * m.covariance(s, t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1e-300));
        prop_assert_eq!(m.covariance(s, t).unwrap(), m.covariance(t, s).unwrap());
    }

    #[test]
    fn fbm_increment_variance(h in 0.02..0.98f64, s in 0.0..4.0f64, t in 0.0..4.0f64) {
        // E(X_t − X_s)² = |t − s|^{2H}
        let m = HurstModel::new(h).unwrap();
        let v = m.covariance(t, t).unwrap() + m.covariance(s, s).unwrap() - 2.0 * m.covariance(s, t).unwrap();
        prop_assert!((v - (t - s).abs().powf(2.0 * h)).abs() < 1e-12);
    }

    #[test]
    fn monotone_clock_commutes_with_min(p in 0.1..4.0f64, s in 0.0..2.0f64, t in 0.0..2.0f64) {
        let tc = TimeChange::power(p, 2.0).unwrap();
        prop_assert_eq!(tc.h(s).unwrap().min(tc.h(t).unwrap()), tc.h(s.min(t)).unwrap());
        prop_assert_eq!(tc.covariance(s, t).unwrap(), tc.h(s.min(t)).unwrap());
    }

    #[test]
    fn greens_identity_on_random_graphs(seed in any::<u64>(), n in 2usize..15, p in 0.1..1.0f64) {
        let g = WeightedGraph::random(n, p, seed).unwrap();
        let phi: Vec<f64> = (0..n).map(|x| ((x * 7 + 3) % 5) as f64 - 2.0).collect();
        let f: Vec<f64> = (0..n).map(|x| (x as f64 * 0.37).sin()).collect();
        let r = g.greens_identity_check(&phi, &f).unwrap();
        prop_assert!(r.holds(1e-10), "{r:?}");
        // needs c(x) > 0 everywhere
        let g = WeightedGraph::random_connected(n, p, seed).unwrap();
        let v = g.variance_decomposition_check(&f).unwrap();
        prop_assert!(v.diff <= 1e-10 * v.scale.max(1.0));
    }

    #[test]
    fn shannon_interpolates_its_samples(coeffs in prop::collection::vec(-5.0..5.0f64, 1..20), first in -10i64..10) {
        let sig = BandlimitedSignal::new(first, coeffs.clone());
        for (k, c) in coeffs.iter().enumerate() {
            prop_assert!((sig.reconstruct((first + k as i64) as f64) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_cells_add_up(n in 1usize..64, lo in -2.0..0.0f64, w in 0.1..3.0f64) {
        let part = Partition::uniform(lo, lo + w, n).unwrap();
        let m = Measure::lebesgue(lo - 1.0, lo + w + 1.0);
        let total: f64 = part.cell_regions().iter().map(|c| m.measure_of(c).unwrap()).sum();
        prop_assert!((total - w).abs() < 1e-12);
    }
}

#[test]
fn measure_configs_round_trip_through_json() {
    let text = r#"[{"kind": "lebesgue", "domain": [0, 2]},
                   {"kind": "density", "density": "power:0.5"},
                   {"kind": "atomic", "dirac_comb": 3},
                   {"kind": "cantor", "depth": 12}]"#;
    let cfgs: Vec<MeasureConfig> = serde_json::from_str(text).unwrap();
    let back: Vec<MeasureConfig> = serde_json::from_str(&serde_json::to_string(&cfgs).unwrap()).unwrap();
    assert_eq!(cfgs, back);
    assert_eq!(cfgs[2].build().unwrap().total_mass().unwrap(), 7.0);
    assert!(serde_json::from_str::<MeasureConfig>(r#"{"kind": "lebesgue", "domian": [0, 1]}"#).is_err());
}

#[test]
fn ensembles_depend_only_on_seed() {
    let regions = [Region::interval(0.0, 0.5), Region::interval(0.25, 1.0)];
    let a = field::sample_field(&FieldSpec::new(Measure::unit_lebesgue(), 9), &regions, 500).unwrap();
    let b = field::sample_field(&FieldSpec::new(Measure::unit_lebesgue(), 9), &regions, 500).unwrap();
    let c = field::sample_field(&FieldSpec::new(Measure::unit_lebesgue(), 10), &regions, 500).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.values, c.values);
    // a prefix of the paths does not depend on how many paths are drawn
    let short = field::sample_field(&FieldSpec::new(Measure::unit_lebesgue(), 9), &regions, 100).unwrap();
    assert_eq!(short.values[..], a.values[..short.values.len()]);
}
