//! Named families of maps and seeded random sampling.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::BinaryFormPair;
use crate::map::{MobiusTransform, RationalMap};
use crate::poly::{Polynomial, ONE, ZERO};
use crate::rootfind::{self, RootConfig};
use crate::spectrum::{self, SpectrumConfig};

/// `|lambda1 lambda2 - 1|` at or below this breaks the Milnor normal form.
pub const MILNOR_DEGENERATE_TOL: f64 = 1e-9;
/// Allowed deviation from `sigma3 = sigma1 - 2`, relative to `max(1, |sigma1|)`.
pub const MILNOR_RELATION_TOL: f64 = 1e-8;
pub const DISCRIMINANT_TOL: f64 = 1e-9;
/// Resultant floor for random sampling.
pub const RANDOM_RESULTANT_FLOOR: f64 = 1e-6;
/// Determinant floor for random Möbius transforms, after scaling to unit max
/// modulus.
pub const RANDOM_MOBIUS_DET_FLOOR: f64 = 0.1;

/// Elementary symmetric values of the three fixed-point multipliers of a
/// quadratic map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MilnorPoint {
    pub sigma1: Complex64,
    pub sigma2: Complex64,
    pub sigma3: Complex64,
}

impl MilnorPoint {
    pub fn new(sigma1: Complex64, sigma2: Complex64, sigma3: Complex64) -> Self {
        MilnorPoint { sigma1, sigma2, sigma3 }
    }

    /// The point with `sigma3 = sigma1 - 2`.
    pub fn on_relation(sigma1: Complex64, sigma2: Complex64) -> Self {
        Self::new(sigma1, sigma2, sigma1 - 2.0)
    }

    pub fn from_level(level: &[Complex64]) -> Result<Self> {
        match level {
            [s1, s2, s3] => Ok(Self::new(*s1, *s2, *s3)),
            _ => Err(Error::ShapeMismatch(format!(
                "expected 3 entries, got {}",
                level.len()
            ))),
        }
    }

    pub fn as_array(&self) -> [Complex64; 3] {
        [self.sigma1, self.sigma2, self.sigma3]
    }

    /// Scaled entrywise distance, as in spectrum comparison.
    pub fn distance(&self, other: &MilnorPoint) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).norm() / 1f64.max(a.norm()).max(b.norm()))
            .fold(0.0, f64::max)
    }
}

/// Short Weierstrass coefficients of `y^2 = x^3 + a x + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LattesParams {
    pub a: Complex64,
    pub b: Complex64,
}

impl LattesParams {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        LattesParams { a, b }
    }

    pub fn discriminant(&self) -> Complex64 {
        -16.0 * (4.0 * self.a.powu(3) + 27.0 * self.b * self.b)
    }
}

/// `(z^2 + l1 z) / (l2 z + 1)`: fixed points 0 and infinity with multipliers
/// `l1` and `l2`, third multiplier `(2 - l1 - l2) / (1 - l1 l2)`.
pub fn milnor_quadratic(l1: Complex64, l2: Complex64) -> Result<RationalMap> {
    if (l1 * l2 - ONE).norm() <= MILNOR_DEGENERATE_TOL {
        return Err(Error::DegenerateParameters(format!(
            "lambda1 * lambda2 = 1 for ({l1}, {l2})"
        )));
    }
    RationalMap::new(
        &Polynomial::new(vec![ZERO, l1, ONE]),
        &Polynomial::new(vec![ONE, l2]),
    )
}

/// The third fixed-point multiplier of the Milnor normal form.
pub fn milnor_third_multiplier(l1: Complex64, l2: Complex64) -> Complex64 {
    (2.0 - l1 - l2) / (ONE - l1 * l2)
}

/// A quadratic map whose fixed-point multipliers have elementary symmetric
/// values `sigma`.
pub fn invert_sigma(sigma: &MilnorPoint) -> Result<RationalMap> {
    let gap = (sigma.sigma3 - (sigma.sigma1 - 2.0)).norm();
    if gap > MILNOR_RELATION_TOL * sigma.sigma1.norm().max(1.0) {
        return Err(Error::NotRealizable(format!(
            "|sigma3 - (sigma1 - 2)| = {gap:e}"
        )));
    }
    let cubic = Polynomial::new(vec![-sigma.sigma3, sigma.sigma2, -sigma.sigma1, ONE]);
    let lambdas = rootfind::roots(&cubic, &RootConfig::default())?.finite_with_multiplicity();
    let mut best: Option<(f64, Complex64, Complex64)> = None;
    for i in 0..lambdas.len() {
        for j in (i + 1)..lambdas.len() {
            let score = (lambdas[i] * lambdas[j] - ONE).norm();
            if best.map_or(true, |(s, _, _)| score > s) {
                best = Some((score, lambdas[i], lambdas[j]));
            }
        }
    }
    match best {
        Some((score, l1, l2)) if score > MILNOR_DEGENERATE_TOL => milnor_quadratic(l1, l2),
        _ => Err(Error::DegenerateParameters(
            "every multiplier pair has product 1".into(),
        )),
    }
}

/// The x-coordinate of multiplication by 2 on `y^2 = x^3 + a x + b`.
pub fn lattes_mult2(p: &LattesParams) -> Result<RationalMap> {
    let disc = p.discriminant();
    if disc.norm() <= DISCRIMINANT_TOL {
        return Err(Error::SingularCurve { discriminant: disc });
    }
    let (a, b) = (p.a, p.b);
    let num = Polynomial::new(vec![a * a, -8.0 * b, -2.0 * a, ZERO, ONE]);
    let den = Polynomial::new(vec![4.0 * b, 4.0 * a, ZERO, 4.0 * ONE]);
    RationalMap::new(&num, &den)
}

/// `x(2P)` from the tangent line at `P = (x, y)`.
pub fn tangent_double_x(p: &LattesParams, x: Complex64, y: Complex64) -> Complex64 {
    let s = (3.0 * x * x + p.a) / (2.0 * y);
    s * s - 2.0 * x
}

/// `f = h1 ∘ h2`, its elementary transformation `g = h2 ∘ h1`, and the
/// witness `h2` with `h2 ∘ f = g ∘ h2`.
#[derive(Clone, Debug)]
pub struct ElementaryPair {
    pub f: RationalMap,
    pub g: RationalMap,
    pub witness: RationalMap,
}

pub fn elementary_transform(h1: &RationalMap, h2: &RationalMap) -> Result<ElementaryPair> {
    Ok(ElementaryPair {
        f: h1.compose(h2)?,
        g: h2.compose(h1)?,
        witness: h2.clone(),
    })
}

pub fn power_map(d: usize) -> Result<RationalMap> {
    if d < 2 {
        return Err(Error::DegreeTooLow { degree: d });
    }
    RationalMap::new(&Polynomial::monomial(ONE, d), &Polynomial::constant(ONE))
}

fn disk_sample(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = rng.gen::<f64>().sqrt();
    let theta = 2.0 * PI * rng.gen::<f64>();
    Complex64::from_polar(r, theta)
}

/// A degree-`d` map with all `2(d + 1)` coefficients uniform on the unit disk,
/// drawn from ChaCha8 seeded with `seed` and resampled until the normalized
/// resultant exceeds the floor.
pub fn random_map(d: usize, seed: u64) -> Result<RationalMap> {
    if d < 2 {
        return Err(Error::DegreeTooLow { degree: d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let p: Vec<Complex64> = (0..=d).map(|_| disk_sample(&mut rng)).collect();
        let q: Vec<Complex64> = (0..=d).map(|_| disk_sample(&mut rng)).collect();
        let forms = BinaryFormPair::new(p, q)?.normalized();
        if forms.resultant_modulus() > RANDOM_RESULTANT_FLOOR {
            return RationalMap::from_forms(forms);
        }
    }
}

/// A Möbius transform with entries uniform on the unit disk, resampled until
/// it is comfortably invertible.
pub fn random_mobius(seed: u64) -> MobiusTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let e: Vec<Complex64> = (0..4).map(|_| disk_sample(&mut rng)).collect();
        if let Ok(m) = MobiusTransform::new(e[0], e[1], e[2], e[3]) {
            if (m.a * m.d - m.b * m.c).norm() > RANDOM_MOBIUS_DET_FLOOR {
                return m;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FiberOutcome {
    /// Scaled round-trip error of `(sigma1, sigma2, sigma3)`.
    RoundTrip(f64),
    Degenerate(String),
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberCell {
    pub row: usize,
    pub col: usize,
    pub sigma: MilnorPoint,
    pub outcome: FiberOutcome,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FiberSummary {
    pub cells: usize,
    pub realizable: usize,
    pub degenerate: usize,
    pub failed: usize,
    pub worst_error: f64,
}

pub fn grid_coordinate(k: usize, grid: usize, radius: f64) -> f64 {
    if grid <= 1 {
        0.0
    } else {
        -radius + 2.0 * radius * k as f64 / (grid - 1) as f64
    }
}

/// Round trip `sigma -> invert_sigma -> S_1` over a `grid x grid` lattice of
/// real `(sigma1, sigma2)` in `[-radius, radius]^2` with `sigma3 = sigma1 - 2`.
/// Row `i` carries `sigma1`, column `j` carries `sigma2`; cells come back in
/// row-major order.
pub fn fiber_scan(grid: usize, radius: f64, cfg: &SpectrumConfig) -> Vec<FiberCell> {
    (0..grid * grid)
        .into_par_iter()
        .map(|cell| {
            let (row, col) = (cell / grid, cell % grid);
            let sigma = MilnorPoint::on_relation(
                Complex64::new(grid_coordinate(row, grid, radius), 0.0),
                Complex64::new(grid_coordinate(col, grid, radius), 0.0),
            );
            let outcome = match invert_sigma(&sigma)
                .and_then(|f| spectrum::spectrum_level(&f, 1, cfg))
                .and_then(|level| MilnorPoint::from_level(&level))
            {
                Ok(back) => FiberOutcome::RoundTrip(back.distance(&sigma)),
                Err(e @ Error::DegenerateParameters(_)) | Err(e @ Error::DegenerateMap { .. }) => {
                    FiberOutcome::Degenerate(e.to_string())
                }
                Err(e) => FiberOutcome::Failed(e.to_string()),
            };
            FiberCell { row, col, sigma, outcome }
        })
        .collect()
}

pub fn summarize_fiber(cells: &[FiberCell]) -> FiberSummary {
    let mut s = FiberSummary {
        cells: cells.len(),
        ..Default::default()
    };
    for c in cells {
        match c.outcome {
            FiberOutcome::RoundTrip(err) => {
                s.realizable += 1;
                s.worst_error = s.worst_error.max(err);
            }
            FiberOutcome::Degenerate(_) => s.degenerate += 1,
            FiberOutcome::Failed(_) => s.failed += 1,
        }
    }
    s
}
