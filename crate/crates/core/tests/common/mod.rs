#![allow(dead_code)]

use multispec::map::RationalMap;
use num_complex::Complex64;

pub fn map(text: &str) -> RationalMap {
    RationalMap::parse(text).unwrap()
}

/// `e_1..e_n` of the given values by direct expansion of `prod (1 + v t)`.
pub fn expand(values: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for &v in values {
        let mut next = e.clone();
        next.push(Complex64::new(0.0, 0.0));
        for k in 1..next.len() {
            next[k] += v * e[k - 1];
        }
        e = next;
    }
    e.remove(0);
    e
}

/// Entrywise distance scaled by `max(1, |a|, |b|)`.
pub fn scaled_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / 1f64.max(x.norm()).max(y.norm()))
        .fold(0.0, f64::max)
}

/// Parameters `c` with `0` periodic of exact period 3 under `z^2 + c`, found
/// by Newton on `c^3 + 2c^2 + c + 1`.
pub fn period_three_parameters() -> Vec<Complex64> {
    let p = |c: Complex64| c * c * c + 2.0 * c * c + c + 1.0;
    let dp = |c: Complex64| 3.0 * c * c + 4.0 * c + 1.0;
    [Complex64::new(-1.75, 0.0), Complex64::new(-0.12, 0.74), Complex64::new(-0.12, -0.74)]
        .iter()
        .map(|&start| {
            let mut c = start;
            for _ in 0..60 {
                c -= p(c) / dp(c);
            }
            c
        })
        .collect()
}

pub fn quadratic_polynomial(c: Complex64) -> RationalMap {
    map(&format!("z^2+({})", multispec::expr::format_complex(c)))
}

/// Hyperbolic postcritically finite maps of disjoint type with their
/// superattracting periods.
pub fn disjoint_type_maps() -> Vec<(RationalMap, Vec<u32>)> {
    let mut out = vec![(map("z^2"), vec![1, 1]), (map("z^2-1"), vec![1, 2])];
    for c in period_three_parameters() {
        out.push((quadratic_polynomial(c), vec![1, 3]));
    }
    out
}

/// Möbius maps with small integer entries: conjugating by them adds only
/// coefficient rounding of order 1e-16.
pub fn simple_conjugators() -> Vec<multispec::map::MobiusTransform> {
    use multispec::map::MobiusTransform;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let (one, zero) = (c(1.0, 0.0), c(0.0, 0.0));
    [
        (one, c(0.5, 0.0), zero, one),
        (c(2.0, 0.0), zero, zero, one),
        (zero, one, one, zero),
        (one, one, one, -one),
        (c(0.0, 1.0), zero, zero, one),
        (one, zero, one, one),
    ]
    .iter()
    .map(|&(a, b, c, d)| MobiusTransform::new(a, b, c, d).unwrap())
    .collect()
}
