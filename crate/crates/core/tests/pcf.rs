mod common;

use common::{disjoint_type_maps, map, simple_conjugators};
use multispec::families::{elementary_transform, random_map, random_mobius};
use multispec::forms::BinaryFormPair;
use multispec::map::RationalMap;
use multispec::pcf::*;
use multispec::spectrum::{compare_spectra, spectrum, zero_multiplier_count, SpectrumConfig};
use proptest::prelude::*;

fn cfg() -> SpectrumConfig {
    SpectrumConfig::default()
}

fn divisors_below(p: u32) -> impl Iterator<Item = u32> {
    (1..p).filter(move |q| p % q == 0)
}

fn assert_minimal_periods(f: &RationalMap, max_period: u32) {
    let result = classify_disjoint_type(f, max_period).unwrap();
    for cycle in &result.cycles {
        let mut x = cycle.representative;
        let mut orbit = vec![x];
        for _ in 0..cycle.exact_period {
            x = f.eval(&x);
            orbit.push(x);
        }
        let p = cycle.exact_period as usize;
        assert!(orbit[p].chordal(&orbit[0]) <= CYCLE_TOL * 10.0, "{f}: period {p} does not close");
        for q in divisors_below(cycle.exact_period) {
            assert!(orbit[q as usize].chordal(&orbit[0]) > CYCLE_TOL, "{f}: period {p} closes at {q}");
        }
    }
}

#[test]
fn reported_periods_are_minimal() {
    for (f, _) in disjoint_type_maps() {
        assert_minimal_periods(&f, 4);
    }
    for text in ["z^3", "z^2+1", "z^2-2", "(z^2-1)/(z^2+0.25)", "1/z^2"] {
        assert_minimal_periods(&map(text), 4);
    }
    for seed in 0..20 {
        assert_minimal_periods(&random_map(2, seed).unwrap(), 4);
    }
}

#[test]
fn disjoint_type_examples() {
    let z2 = classify_disjoint_type(&map("z^2"), 2).unwrap();
    assert_eq!(z2.status, ClassificationStatus::DisjointType(vec![1, 1]));
    let basilica = classify_disjoint_type(&map("z^2-1"), 2).unwrap();
    assert_eq!(basilica.status, ClassificationStatus::DisjointType(vec![1, 2]));
    assert!(basilica.cycles.iter().all(|c| c.multiplier.norm() < SUPERATTRACTING_TOL));
    assert_eq!(classify_disjoint_type(&map("z^3"), 2).unwrap().status, ClassificationStatus::PcfNotDisjoint);
    assert_eq!(classify_disjoint_type(&map("z^2+1"), 2).unwrap().status, ClassificationStatus::NotPcfWithinBudget);
}

#[test]
fn zero_counts_match_classified_periods() {
    for (f, periods) in disjoint_type_maps() {
        let result = classify_disjoint_type(&f, 3).unwrap();
        assert_eq!(result.periods(), Some(periods.as_slice()), "{f}");
        // levels up to 6 keep d^n + 1 <= 65
        let s = spectrum(&f, 6, &cfg()).unwrap();
        for n in 1..=6u32 {
            let want: u32 = periods.iter().filter(|&&p| n % p == 0).sum();
            let got = zero_multiplier_count(&s.levels[n as usize - 1]);
            assert_eq!(got, want as usize, "{f} level {n}");
        }
    }
}

#[test]
fn spectrum_periods_agree_with_orbits() {
    for (f, periods) in disjoint_type_maps() {
        let report = cross_spectrum_pcf_consistency(&f, &f, 3, &cfg()).unwrap();
        assert!(report.applicable() && report.consistent);
        assert_eq!(report.from_spectrum.unwrap().periods, periods);
    }
}

#[test]
fn consistency_needs_equal_spectra() {
    assert!(matches!(
        cross_spectrum_pcf_consistency(&map("z^2"), &map("z^2+1"), 2, &cfg()),
        Err(multispec::error::Error::SpectraDiffer { .. })
    ));
}

#[test]
fn consistency_on_conjugate_pairs() {
    for (f, periods) in disjoint_type_maps() {
        for phi in simple_conjugators() {
            let g = f.conjugate(&phi).unwrap();
            let report = cross_spectrum_pcf_consistency(&f, &g, 3, &cfg()).unwrap();
            assert!(report.applicable(), "{f}");
            assert!(report.consistent, "{f} vs {g}: {:?}", report.g.status);
            assert_eq!(report.g.periods(), Some(periods.as_slice()));
        }
    }
}

#[test]
fn non_disjoint_pairs_are_not_applicable() {
    let pair = elementary_transform(&map("z^2+1"), &map("z^2")).unwrap();
    let report = cross_spectrum_pcf_consistency(&pair.f, &pair.g, 2, &cfg()).unwrap();
    assert!(!report.applicable());
    assert!(report.consistent);
}

#[test]
fn witnesses_reject_wrong_maps() {
    let f = map("z^2-1");
    let g = map("z^2+1");
    let h = BinaryFormPair::identity();
    assert!(semiconjugacy_check(&f, &f, &h, WitnessMode::Exact).unwrap());
    assert!(!semiconjugacy_check(&f, &g, &h, WitnessMode::Exact).unwrap());
    assert!(!semiconjugacy_check(&f, &g, &h, WitnessMode::Sampled).unwrap());
    assert!(!semiconjugacy_check(&f, &map("z^3"), &h, WitnessMode::Exact).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn exact_witness_implies_close_spectra(s1 in 0u64..1_000_000, s2 in 0u64..1_000_000) {
        let pair = elementary_transform(&random_map(2, s1).unwrap(), &random_map(2, s2).unwrap()).unwrap();
        if semiconjugacy_check(&pair.f, &pair.g, pair.witness.forms(), WitnessMode::Exact).unwrap() {
            let a = spectrum(&pair.f, 2, &cfg()).unwrap();
            let b = spectrum(&pair.g, 2, &cfg()).unwrap();
            let (_, dist) = compare_spectra(&a, &b, 1e-7).unwrap();
            prop_assert!(dist <= 1e-7, "distance {:e}", dist);
        }
    }

    #[test]
    fn conjugation_witness_is_accepted(seed in 0u64..1_000_000) {
        let f = random_map(2, seed).unwrap();
        let phi = random_mobius(seed + 5);
        let g = f.conjugate(&phi).unwrap();
        prop_assert!(semiconjugacy_check(&f, &g, &phi.forms(), WitnessMode::Exact).unwrap());
        prop_assert!(semiconjugacy_check(&f, &g, &phi.forms(), WitnessMode::Sampled).unwrap());
    }

    #[test]
    fn classification_is_conjugacy_invariant(k in 0usize..6, seed in 0u64..1_000_000) {
        let mut maps = disjoint_type_maps();
        maps.push((map("z^3"), vec![]));
        let (f, _) = &maps[k];
        let g = f.conjugate(&random_mobius(seed)).unwrap();
        let a = classify_disjoint_type(f, 3).unwrap();
        let b = classify_disjoint_type(&g, 3).unwrap();
        prop_assert_eq!(a.status, b.status);
    }

    #[test]
    fn random_conjugates_are_consistent_or_rejected(k in 0usize..5, seed in 0u64..1_000_000) {
        // coefficient rounding can move a zero multiplier far enough to fail
        // the precondition, which must then be reported
        let (f, periods) = &disjoint_type_maps()[k];
        let g = f.conjugate(&random_mobius(seed)).unwrap();
        match cross_spectrum_pcf_consistency(f, &g, 3, &cfg()) {
            Ok(report) => {
                prop_assert!(report.consistent);
                prop_assert_eq!(report.g.periods(), Some(periods.as_slice()));
            }
            Err(e) => prop_assert!(matches!(e, multispec::error::Error::SpectraDiffer { .. }), "{}", e),
        }
    }

    #[test]
    fn hyperbolic_non_pcf_stays_unclassified(seed in 0u64..1_000_000) {
        let f = map("z^2+1");
        let g = f.conjugate(&random_mobius(seed)).unwrap();
        prop_assert_eq!(classify_disjoint_type(&g, 3).unwrap().status, ClassificationStatus::NotPcfWithinBudget);
    }
}
