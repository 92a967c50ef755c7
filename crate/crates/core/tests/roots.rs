use std::f64::consts::PI;

use multispec::dd::Dd;
use multispec::poly::Polynomial;
use multispec::rootfind::{binary_form_roots, roots, RootConfig};
use num_complex::{Complex, Complex64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Jittered points around a circle, pairwise separated by a fixed fraction
/// of the spacing.
fn separated_roots(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let theta = 2.0 * PI * (k as f64 + rng.gen_range(-0.25..0.25)) / n as f64;
            let r = rng.gen_range(0.85..1.15);
            Complex64::from_polar(r, theta)
        })
        .collect()
}

/// Monic polynomial with the given roots, expanded in double-double: a
/// double-precision expansion of degree 64 loses up to 1e-1 to cancellation.
fn monic_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let lift = |z: Complex64| Complex::new(Dd::new(z.re), Dd::new(z.im));
    let zero = lift(Complex64::new(0.0, 0.0));
    let mut c = vec![lift(Complex64::new(1.0, 0.0))];
    for &r in roots {
        let r = lift(r);
        let mut next = vec![zero; c.len() + 1];
        for (k, &a) in c.iter().enumerate() {
            next[k + 1] = next[k + 1] + a;
            next[k] = next[k] - a * r;
        }
        c = next;
    }
    c.iter().map(|z| Complex64::new(z.re.to_f64(), z.im.to_f64())).collect()
}

fn max_coeff_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = a.iter().map(|c| c.norm()).fold(1.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm() / scale).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monic_reconstruction(n in 1usize..=64, seed in any::<u64>()) {
        let truth = separated_roots(n, seed);
        let p = Polynomial::from_roots(&truth);
        let found = roots(&p, &RootConfig::default()).unwrap();
        prop_assert_eq!(found.total_multiplicity(), n);
        let rebuilt = monic_from_roots(&found.finite_with_multiplicity());
        prop_assert_eq!(rebuilt.len(), p.coeffs().len());
        let err = max_coeff_error(p.coeffs(), &rebuilt);
        prop_assert!(err <= 1e-8, "degree {} error {:e}", n, err);
    }

    #[test]
    fn multiplicity_is_conserved(m in 1usize..=24, zeros_low in 0usize..3, zeros_high in 0usize..3, seed in any::<u64>()) {
        prop_assume!(zeros_low + zeros_high <= m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs: Vec<Complex64> = (0..=m)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for c in coeffs.iter_mut().take(zeros_low) {
            *c = Complex64::new(0.0, 0.0);
        }
        for c in coeffs.iter_mut().rev().take(zeros_high) {
            *c = Complex64::new(0.0, 0.0);
        }
        prop_assume!(coeffs.iter().any(|c| c.norm() > 0.0));
        let set = binary_form_roots(&coeffs, &RootConfig::default()).unwrap();
        prop_assert_eq!(set.total_multiplicity(), m);
        prop_assert!(set.infinity_multiplicity() >= zeros_high);
    }

    #[test]
    fn repeated_roots_are_conserved(seed in any::<u64>(), mult in 2usize..4) {
        let base = separated_roots(4, seed);
        let mut all = Vec::new();
        for (i, r) in base.iter().enumerate() {
            for _ in 0..if i == 0 { mult } else { 1 } {
                all.push(*r);
            }
        }
        let set = roots(&Polynomial::from_roots(&all), &RootConfig::default()).unwrap();
        prop_assert_eq!(set.total_multiplicity(), all.len());
    }
}

#[test]
fn fixed_input_gives_identical_output() {
    let p = Polynomial::from_roots(&separated_roots(40, 7));
    let a = roots(&p, &RootConfig::default()).unwrap();
    let b = roots(&p, &RootConfig::default()).unwrap();
    let bits = |s: &multispec::rootfind::RootSet| -> Vec<(u64, u64, usize)> {
        s.iter()
            .map(|r| {
                let z = r.location.finite().unwrap();
                (z.re.to_bits(), z.im.to_bits(), r.multiplicity)
            })
            .collect()
    };
    assert_eq!(bits(&a), bits(&b));
}
