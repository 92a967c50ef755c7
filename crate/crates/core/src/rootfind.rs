//! Simultaneous root finding (Aberth–Ehrlich) with multiplicity clustering.
//!
//! The solver starts from a rotated circle of roots of unity whose radius is
//! the Fujiwara bound, runs Gauss–Seidel Aberth sweeps until every estimate is
//! stationary or has backward error at round-off level, polishes each root
//! with guarded Newton steps and finally merges estimates that fall inside
//! the cluster radius into one root carrying the summed multiplicity.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{Polynomial, ZERO};

/// Offset of the starting circle, in radians. Irrational so that the start is
/// never aligned with the symmetry axes of power maps.
const START_ROTATION: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootConfig {
    pub max_iter: usize,
    /// Relative merge radius: two estimates are one root when they are closer
    /// than `cluster_radius * max(1, |root|)`.
    pub cluster_radius: f64,
    /// Largest acceptable backward error `|p(z)| / sum |a_k| |z|^k`.
    pub residual_tol: f64,
    /// Coefficients smaller than this fraction of the largest one count as
    /// zero when deciding multiplicities at 0 and at infinity.
    pub zero_coeff_tol: f64,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            max_iter: 500,
            cluster_radius: 1e-7,
            residual_tol: 1e-10,
            zero_coeff_tol: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    Finite(Complex64),
    Infinity,
}

impl Location {
    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            Location::Finite(z) => Some(z),
            Location::Infinity => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Location::Infinity)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub location: Location,
    pub multiplicity: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Root>,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter()
    }

    /// Finite roots repeated according to multiplicity.
    pub fn finite_with_multiplicity(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .filter_map(|r| r.location.finite().map(|z| (z, r.multiplicity)))
            .flat_map(|(z, m)| std::iter::repeat(z).take(m))
            .collect()
    }

    pub fn infinity_multiplicity(&self) -> usize {
        self.roots
            .iter()
            .filter(|r| r.location.is_infinity())
            .map(|r| r.multiplicity)
            .sum()
    }
}

/// A polynomial known through its Newton correction rather than its
/// coefficients.
pub trait RootEvaluator {
    /// Number of roots, counted with multiplicity.
    fn degree(&self) -> usize;
    /// `p(z) / p'(z)` and a scale-free residual of `p` at `z`.
    fn newton(&self, z: Complex64) -> (Complex64, f64);
}

struct Coefficients<'a>(&'a Polynomial);

impl RootEvaluator for Coefficients<'_> {
    fn degree(&self) -> usize {
        self.0.degree()
    }

    fn newton(&self, z: Complex64) -> (Complex64, f64) {
        newton_ratio(self.0, z)
    }
}

/// All roots of `p` with multiplicity. A constant polynomial has no roots.
pub fn roots(p: &Polynomial, cfg: &RootConfig) -> Result<RootSet> {
    let coeffs = p.coeffs();
    let scale = p.max_modulus();
    if p.degree() == 0 {
        return Ok(RootSet::default());
    }
    let zero_cut = cfg.zero_coeff_tol * scale;
    let low_zeros = coeffs.iter().take_while(|c| c.norm() <= zero_cut).count();
    let reduced = Polynomial::new(coeffs[low_zeros..].to_vec());

    let mut out = match reduced.degree() {
        0 => Vec::new(),
        1 => {
            let c = reduced.coeffs();
            vec![Root {
                location: Location::Finite(-c[0] / c[1]),
                multiplicity: 1,
                residual: 0.0,
            }]
        }
        _ => solve(&Coefficients(&reduced), circle_start(reduced.degree(), fujiwara_bound(&reduced)), cfg)?,
    };
    if low_zeros > 0 {
        // merge any estimate that clustered onto the exact zero
        let mut merged = low_zeros;
        out.retain(|r| match r.location {
            Location::Finite(z) if z.norm() <= cfg.cluster_radius => {
                merged += r.multiplicity;
                false
            }
            _ => true,
        });
        out.push(Root {
            location: Location::Finite(ZERO),
            multiplicity: merged,
            residual: 0.0,
        });
    }
    out.sort_by(|a, b| {
        let (za, zb) = (a.location.finite().unwrap(), b.location.finite().unwrap());
        za.re.total_cmp(&zb.re).then(za.im.total_cmp(&zb.im))
    });
    Ok(RootSet { roots: out })
}

/// Projective roots of the binary form `sum c_k X^k Y^(m-k)` of formal degree
/// `m = coeffs.len() - 1`: the affine roots of `F(z, 1)` plus infinity with
/// multiplicity equal to the degree deficit.
pub fn binary_form_roots(coeffs: &[Complex64], cfg: &RootConfig) -> Result<RootSet> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if coeffs.is_empty() || scale == 0.0 || !scale.is_finite() {
        return Err(Error::ShapeMismatch(
            "binary form is identically zero or not finite".into(),
        ));
    }
    let m = coeffs.len() - 1;
    let top = degree_below(coeffs, cfg);
    let mut set = roots(&Polynomial::new(coeffs[..=top].to_vec()), cfg)?;
    if top < m {
        set.roots.push(Root {
            location: Location::Infinity,
            multiplicity: m - top,
            residual: 0.0,
        });
    }
    Ok(set)
}

/// Index of the last coefficient above the zero cut.
pub(crate) fn degree_below(coeffs: &[Complex64], cfg: &RootConfig) -> usize {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    coeffs
        .iter()
        .rposition(|c| c.norm() > cfg.zero_coeff_tol * scale)
        .unwrap_or(0)
}

/// Number of leading coefficients at or below the zero cut.
pub(crate) fn low_zero_count(coeffs: &[Complex64], cfg: &RootConfig) -> usize {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    coeffs
        .iter()
        .take_while(|c| c.norm() <= cfg.zero_coeff_tol * scale)
        .count()
}

/// Aberth iteration, polishing, the residual check and clustering for an
/// implicitly given polynomial, from one starting estimate per root.
pub fn solve(eval: &dyn RootEvaluator, start: Vec<Complex64>, cfg: &RootConfig) -> Result<Vec<Root>> {
    if start.len() != eval.degree() {
        return Err(Error::ShapeMismatch(format!(
            "{} starting points for {} roots",
            start.len(),
            eval.degree()
        )));
    }
    let mut estimates = aberth(eval, start, cfg)?;
    for z in estimates.iter_mut() {
        polish(eval, z);
    }
    let worst = estimates
        .iter()
        .map(|&z| eval.newton(z).1)
        .fold(0.0, f64::max);
    if !(worst <= cfg.residual_tol) {
        return Err(Error::NoConvergence {
            worst_residual: worst,
        });
    }
    Ok(cluster(eval, &estimates, cfg.cluster_radius))
}

/// `p(z)/p'(z)` and the backward error at `z`, evaluated in the reversed
/// polynomial when `|z| > 1` so large estimates never overflow.
fn newton_ratio(p: &Polynomial, z: Complex64) -> (Complex64, f64) {
    let c = p.coeffs();
    let n = p.degree();
    if z.norm() <= 1.0 {
        let (v, dv) = p.eval_with_derivative(z);
        let mut s = 0.0;
        let az = z.norm();
        for a in c.iter().rev() {
            s = s * az + a.norm();
        }
        (v / dv, v.norm() / s)
    } else {
        let y = z.inv();
        let ay = y.norm();
        let mut r = ZERO;
        let mut dr = ZERO;
        let mut s = 0.0;
        for a in c.iter() {
            dr = dr * y + r;
            r = r * y + a;
            s = s * ay + a.norm();
        }
        let denom = r * n as f64 - y * dr;
        (z * r / denom, r.norm() / s)
    }
}

/// `2 max_k |a_(n-k) / a_n|^(1/k)`, halving the constant term.
pub(crate) fn fujiwara_bound(p: &Polynomial) -> f64 {
    let c = p.coeffs();
    let n = p.degree();
    let lead = c[n].norm();
    let mut bound: f64 = 0.0;
    for k in 1..=n {
        let mut ratio = c[n - k].norm() / lead;
        if k == n {
            ratio /= 2.0;
        }
        bound = bound.max(ratio.powf(1.0 / k as f64));
    }
    2.0 * bound
}

/// `n` points on a circle, rotated off the real axis.
pub fn circle_start(n: usize, radius: f64) -> Vec<Complex64> {
    let radius = if radius.is_finite() {
        radius.max(f64::MIN_POSITIVE.sqrt())
    } else {
        1.0
    };
    (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + START_ROTATION))
        .collect()
}

/// Starting points read off the upper convex hull of `(k, ln |a_k|)`: each
/// hull edge from `i` to `j` places `j - i` points on the circle of radius
/// `(|a_i| / |a_j|)^(1 / (j - i))`. Both end coefficients must be nonzero.
pub fn newton_polygon_start(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len().saturating_sub(1);
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(k, a)| (k, a.norm().ln()))
        .collect();
    if n == 0 || pts.len() < 2 || pts[0].0 != 0 || pts[pts.len() - 1].0 != n {
        return circle_start(n, 1.0);
    }
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or below the chord from a to p
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    for edge in hull.windows(2) {
        let (i, li) = edge[0];
        let (j, lj) = edge[1];
        let m = j - i;
        let radius = ((li - lj) / m as f64).exp();
        let offset = 2.0 * PI * i as f64 / n as f64 + START_ROTATION;
        for k in 0..m {
            out.push(Complex64::from_polar(radius, 2.0 * PI * k as f64 / m as f64 + offset));
        }
    }
    out
}

fn aberth(eval: &dyn RootEvaluator, start: Vec<Complex64>, cfg: &RootConfig) -> Result<Vec<Complex64>> {
    let n = eval.degree();
    let mut z = start;
    let stop = 4.0 * f64::EPSILON * (n as f64 + 1.0);
    let mut done = vec![false; n];

    for _ in 0..cfg.max_iter {
        let mut active = false;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, be) = eval.newton(z[i]);
            if be <= stop {
                done[i] = true;
                continue;
            }
            let mut repulsion = ZERO;
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    repulsion += (z[i] - zj).inv();
                }
            }
            let mut step = ratio / (1.0 - ratio * repulsion);
            if !step.is_finite() {
                // stationary derivative: nudge off the critical point
                step = Complex64::from_polar(1e-3 * z[i].norm().max(1.0), i as f64 + START_ROTATION);
            }
            z[i] -= step;
            if step.norm() <= 2.0 * f64::EPSILON * z[i].norm() {
                done[i] = true;
            } else {
                active = true;
            }
        }
        if !active {
            break;
        }
    }
    if z.iter().any(|w| !w.is_finite()) {
        return Err(Error::NoConvergence {
            worst_residual: f64::INFINITY,
        });
    }
    Ok(z)
}

/// A few guarded Newton steps; a step is kept only if it lowers the backward
/// error.
fn polish(eval: &dyn RootEvaluator, z: &mut Complex64) {
    let (mut ratio, mut best) = eval.newton(*z);
    for _ in 0..3 {
        if best == 0.0 {
            break;
        }
        let candidate = *z - ratio;
        if !candidate.is_finite() {
            break;
        }
        let (r, be) = eval.newton(candidate);
        if be < best {
            best = be;
            ratio = r;
            *z = candidate;
        } else {
            break;
        }
    }
}

fn cluster(eval: &dyn RootEvaluator, z: &[Complex64], radius: f64) -> Vec<Root> {
    let n = z.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let tol = radius * 1f64.max(z[i].norm()).max(z[j].norm());
            if (z[i] - z[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += z[i];
                g.2 += 1;
            }
            None => groups.push((r, z[i], 1)),
        }
    }
    groups
        .into_iter()
        .map(|(_, sum, m)| {
            let centroid = sum / m as f64;
            Root {
                location: Location::Finite(centroid),
                multiplicity: m,
                residual: eval.newton(centroid).1,
            }
        })
        .collect()
}
