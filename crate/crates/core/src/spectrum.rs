//! Periodic points, multipliers and the spectra built from them.

use num_complex::{Complex, Complex64};
use num_traits::{Num, Zero};
use rayon::prelude::*;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::forms::{BinaryFormPair, Chart, ProjectivePoint};
use crate::map::{check_budget, location_point, RationalMap, DEFAULT_MAX_ROOTS};
use crate::poly::{ONE, ZERO};
use crate::rootfind::{self, RootConfig};

pub use crate::oracle::{elementary_oracle, power_sums_oracle, ORACLE_MAX_POINTS};


/// Distance to 1 below which a multiplier counts as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-6;
/// Relative size below which a top elementary symmetric value counts as zero.
pub const VANISHING_TOL: f64 = 1e-6;
pub const DEFAULT_QUANTUM: f64 = 1e-6;
pub const DEFAULT_COMPARE_TOL: f64 = 1e-8;
/// Largest relative move accepted from the double-double refinement of a
/// simple periodic point.
const REFINE_RADIUS: f64 = 1e-8;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumConfig {
    pub roots: RootConfig,
    /// Cap on `d^n + 1`.
    pub max_roots: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            roots: RootConfig::default(),
            max_roots: DEFAULT_MAX_ROOTS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicPoint {
    pub point: ProjectivePoint,
    pub multiplicity: usize,
    pub multiplier: Complex64,
}

/// The fixed points of `f^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPointSet {
    pub n: u32,
    pub points: Vec<PeriodicPoint>,
}

impl PeriodicPointSet {
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Multipliers repeated according to multiplicity.
    pub fn multipliers(&self) -> Vec<Complex64> {
        self.points
            .iter()
            .flat_map(|p| std::iter::repeat(p.multiplier).take(p.multiplicity))
            .collect()
    }
}

/// `levels[n - 1]` holds `(e_1, ..., e_N)` for the `N = d^n + 1` multipliers
/// of `f^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierSpectrum {
    pub degree: usize,
    pub max_period: u32,
    pub levels: Vec<Vec<Complex64>>,
}

/// Elementary symmetric values of the multiplier moduli.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthSpectrum {
    pub degree: usize,
    pub max_period: u32,
    pub levels: Vec<Vec<f64>>,
}

/// One quantized spectrum entry: the value is
/// `(re + i im) * quantum * 10^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuantizedEntry {
    pub exponent: i32,
    pub re: i64,
    pub im: i64,
}

impl QuantizedEntry {
    pub fn value(&self, quantum: f64) -> Complex64 {
        let scale = quantum * 10f64.powi(self.exponent);
        Complex64::new(self.re as f64 * scale, self.im as f64 * scale)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumFingerprint {
    pub digest: u64,
    pub quantum: f64,
    pub degree: usize,
    pub max_period: u32,
    pub levels: Vec<Vec<QuantizedEntry>>,
}

impl SpectrumFingerprint {
    pub fn digest_hex(&self) -> String {
        format!("{:016x}", self.digest)
    }
}

/// Exact periods of superattracting cycles, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointType {
    pub periods: Vec<u32>,
    /// True when the multiset has the full `2d - 2` members.
    pub complete: bool,
}

/// `Y P_n - X Q_n` for `f^n = (P_n : Q_n)`, normalized to unit max modulus.
pub fn fixed_point_form(f: &RationalMap, n: u32, max_roots: usize) -> Result<Vec<Complex64>> {
    let g = f.iterate(n, max_roots)?;
    let form = g.forms().fixed_point_form();
    let scale = form.iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(form.into_iter().map(|c| c / scale).collect())
}

/// Follows `n` steps of the orbit of the point with coordinate `t` in `chart`,
/// reading each step in the chart where the image has modulus at most 1 and
/// the last step back in `chart`. Returns the final coordinate and the chain
/// rule product of the derivatives.
fn orbit_in_charts(
    f: &BinaryFormPair,
    chart: Chart,
    t: Complex64,
    n: u32,
) -> Result<(Complex64, Complex64)> {
    let mut src = chart;
    let mut t = t;
    let mut lambda = ONE;
    for step in 0..n {
        let dst = if step + 1 == n {
            chart
        } else {
            f.eval(&ProjectivePoint::from_coordinate(src, t)).chart()
        };
        let (v, dv) = f.eval_in_charts(t, src, dst)?;
        lambda *= dv;
        src = dst;
        t = v;
    }
    Ok((t, lambda))
}

/// Complex scalars the orbit evaluation runs in.
trait OrbitScalar: Copy + Num {
    fn real(x: f64) -> Self;
    fn lift(z: Complex64) -> Self;
    fn size(&self) -> f64;
}

impl OrbitScalar for Complex64 {
    fn real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn lift(z: Complex64) -> Self {
        z
    }
    fn size(&self) -> f64 {
        self.norm()
    }
}

type ComplexDd = Complex<Dd>;

impl OrbitScalar for ComplexDd {
    fn real(x: f64) -> Self {
        Complex::new(Dd::new(x), Dd::new(0.0))
    }
    fn lift(z: Complex64) -> Self {
        Complex::new(Dd::new(z.re), Dd::new(z.im))
    }
    fn size(&self) -> f64 {
        lower(*self).norm()
    }
}

fn lower(z: ComplexDd) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

/// One step `v -> (P(v), Q(v))` with the tangent vector carried along, both
/// rescaled by the same factor so the larger coordinate has modulus 1.
fn homogeneous_step<T: OrbitScalar>(f: &BinaryFormPair, v: [T; 2], dv: [T; 2]) -> ([T; 2], [T; 2]) {
    let d = f.degree();
    let mut xp = vec![T::one(); d + 1];
    let mut yp = vec![T::one(); d + 1];
    for k in 1..=d {
        xp[k] = xp[k - 1] * v[0];
        yp[k] = yp[k - 1] * v[1];
    }
    let eval = |c: &[Complex64]| {
        let mut val = T::zero();
        let mut dx = T::zero();
        let mut dy = T::zero();
        for (k, &a) in c.iter().enumerate() {
            let a = T::lift(a);
            val = val + a * xp[k] * yp[d - k];
            if k > 0 {
                dx = dx + a * T::real(k as f64) * xp[k - 1] * yp[d - k];
            }
            if k < d {
                dy = dy + a * T::real((d - k) as f64) * xp[k] * yp[d - k - 1];
            }
        }
        (val, dx * dv[0] + dy * dv[1])
    };
    let (p, dp) = eval(f.p());
    let (q, dq) = eval(f.q());
    let s = p.size().max(q.size());
    if s > 0.0 && s.is_finite() {
        let inv = T::real(1.0 / s);
        ([p * inv, q * inv], [dp * inv, dq * inv])
    } else {
        ([p, q], [dp, dq])
    }
}

/// Orbit of the point with coordinate `t` in `chart` under `f^n`, with the
/// tangent to the chart coordinate: returns `(v_0, v_n, dv_n)`.
fn chart_orbit<T: OrbitScalar>(f: &BinaryFormPair, chart: Chart, t: T, n: u32) -> ([T; 2], [T; 2], [T; 2]) {
    let (v0, dv0) = match chart {
        Chart::Z => ([t, T::one()], [T::one(), T::zero()]),
        Chart::W => ([T::one(), t], [T::zero(), T::one()]),
    };
    let (mut v, mut dv) = (v0, dv0);
    for _ in 0..n {
        (v, dv) = homogeneous_step(f, v, dv);
    }
    (v0, v, dv)
}

/// Newton steps in double-double on the fixed-point form at a simple root,
/// followed by the multiplier from the double-double orbit derivative.
/// Returns `None` when the steps wander off the starting estimate.
fn refine_simple(f: &BinaryFormPair, chart: Chart, t: Complex64, n: u32) -> Option<(Complex64, Complex64)> {
    let mut u = ComplexDd::lift(t);
    for _ in 0..2 {
        let (v0, v, dv) = chart_orbit(f, chart, u, n);
        let g = v0[1] * v[0] - v0[0] * v[1];
        let dg = match chart {
            Chart::Z => dv[0] - v[1] - u * dv[1],
            Chart::W => v[0] + u * dv[0] - dv[1],
        };
        if dg.is_zero() {
            break;
        }
        u = u - g / dg;
    }
    let moved = lower(u) - t;
    if !(moved.norm() <= REFINE_RADIUS * t.norm().max(1.0)) {
        return None;
    }
    let (_, v, dv) = chart_orbit(f, chart, u, n);
    let lambda = match chart {
        Chart::Z => (dv[0] * v[1] - v[0] * dv[1]) / (v[1] * v[1]),
        Chart::W => (dv[1] * v[0] - v[1] * dv[0]) / (v[0] * v[0]),
    };
    let lambda = lower(lambda);
    lambda.is_finite().then(|| (lower(u), lambda))
}

/// The fixed-point form `Y P_n - X Q_n` of `f^n`, evaluated through the orbit
/// of `f` instead of the coefficients of `f^n`. Known roots at 0 and at
/// infinity are divided out.
struct OrbitForm<'a> {
    f: &'a BinaryFormPair,
    n: u32,
    /// Formal degree `d^n + 1`.
    full: usize,
    at_zero: usize,
    at_infinity: usize,
}

impl OrbitForm<'_> {
    /// Value and derivative of the form in the given chart, up to a common
    /// factor, and the scale-free residual.
    fn eval(&self, chart: Chart, t: Complex64) -> (Complex64, Complex64, f64) {
        let (v0, v, dv) = chart_orbit(self.f, chart, t, self.n);
        let (x0, y0) = (v0[0], v0[1]);
        let g = y0 * v[0] - x0 * v[1];
        let dg = match chart {
            Chart::Z => dv[0] - v[1] - t * dv[1],
            Chart::W => v[0] + t * dv[0] - dv[1],
        };
        // rounding along a repelling orbit is amplified by the derivative, so
        // the value alone overstates the error; a perturbation of the chart
        // coordinate explaining the value is the other admissible measure
        let scale = y0.norm() * v[0].norm() + x0.norm() * v[1].norm();
        let residual = (g.norm() / scale).min(g.norm() / dg.norm());
        (g, dg, residual)
    }
}

impl rootfind::RootEvaluator for OrbitForm<'_> {
    fn degree(&self) -> usize {
        self.full - self.at_zero - self.at_infinity
    }

    fn newton(&self, z: Complex64) -> (Complex64, f64) {
        if z.norm() <= 1.0 {
            let (g, dg, res) = self.eval(Chart::Z, z);
            let denom = if self.at_zero > 0 {
                dg - g * self.at_zero as f64 / z
            } else {
                dg
            };
            (g / denom, res)
        } else {
            let w = z.inv();
            let (r, dr, res) = self.eval(Chart::W, w);
            let k = (self.full - self.at_zero) as f64;
            (z * r / (r * k - w * dr), res)
        }
    }
}

/// Fixed points of `f^n` with multiplicities and multipliers.
///
/// Exact roots at 0 and infinity are read off the coefficients of `f^n`; the
/// remaining ones are found by Aberth iteration on the orbit evaluation of the
/// fixed-point form, which stays well conditioned where the coefficients of
/// `f^n` suffer cancellation.
pub fn periodic_points(f: &RationalMap, n: u32, cfg: &SpectrumConfig) -> Result<PeriodicPointSet> {
    let form = fixed_point_form(f, n, cfg.max_roots)?;
    let full = form.len() - 1;
    let at_zero = rootfind::low_zero_count(&form, &cfg.roots);
    let top = rootfind::degree_below(&form, &cfg.roots);
    let at_infinity = full - top;
    let orbit = OrbitForm {
        f: f.forms(),
        n,
        full,
        at_zero,
        at_infinity,
    };
    let mut roots = if top > at_zero {
        let start = rootfind::newton_polygon_start(&form[at_zero..=top]);
        rootfind::solve(&orbit, start, &cfg.roots)?
    } else {
        Vec::new()
    };
    if at_zero > 0 {
        roots.push(rootfind::Root {
            location: rootfind::Location::Finite(ZERO),
            multiplicity: at_zero,
            residual: 0.0,
        });
    }
    if at_infinity > 0 {
        roots.push(rootfind::Root {
            location: rootfind::Location::Infinity,
            multiplicity: at_infinity,
            residual: 0.0,
        });
    }
    let forms = f.forms();
    let mut points = Vec::with_capacity(roots.len());
    for root in &roots {
        let mut pt = location_point(root.location);
        let chart = pt.chart();
        let t = pt.coordinate(chart);
        let refined = if root.multiplicity == 1 {
            refine_simple(forms, chart, t, n)
        } else {
            None
        };
        let multiplier = match refined {
            Some((u, lambda)) => {
                pt = ProjectivePoint::from_coordinate(chart, u);
                lambda
            }
            None => orbit_in_charts(forms, chart, t, n)?.1,
        };
        if !multiplier.is_finite() {
            return Err(Error::NoConvergence {
                worst_residual: f64::INFINITY,
            });
        }
        points.push(PeriodicPoint {
            point: pt,
            multiplicity: root.multiplicity,
            multiplier,
        });
    }
    Ok(PeriodicPointSet { n, points })
}

/// `(e_1, ..., e_N)` of the given values by incremental product expansion.
pub fn elementary_symmetric(values: &[Complex64]) -> Vec<Complex64> {
    // accumulated in double-double: the expansion cancels heavily when the
    // values spread over many decades
    let lift = |z: Complex64| Complex::new(Dd::new(z.re), Dd::new(z.im));
    let mut e = vec![lift(ZERO); values.len() + 1];
    e[0] = lift(ONE);
    for (j, &v) in values.iter().enumerate() {
        let v = lift(v);
        for k in (1..=j + 1).rev() {
            e[k] = e[k] + v * e[k - 1];
        }
    }
    e.iter()
        .skip(1)
        .map(|z| Complex64::new(z.re.to_f64(), z.im.to_f64()))
        .collect()
}

fn elementary_symmetric_real(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (j, &v) in values.iter().enumerate() {
        for k in (1..=j + 1).rev() {
            let below = e[k - 1];
            e[k] += v * below;
        }
    }
    e.remove(0);
    e
}

pub fn spectrum_level(f: &RationalMap, n: u32, cfg: &SpectrumConfig) -> Result<Vec<Complex64>> {
    Ok(elementary_symmetric(&periodic_points(f, n, cfg)?.multipliers()))
}

fn check_levels(f: &RationalMap, max_period: u32, cfg: &SpectrumConfig) -> Result<()> {
    check_budget(f.degree(), max_period, cfg.max_roots)
}

fn all_levels(f: &RationalMap, max_period: u32, cfg: &SpectrumConfig) -> Result<Vec<Vec<Complex64>>> {
    check_levels(f, max_period, cfg)?;
    (1..=max_period)
        .into_par_iter()
        .map(|n| Ok(periodic_points(f, n, cfg)?.multipliers()))
        .collect()
}

pub fn spectrum(f: &RationalMap, max_period: u32, cfg: &SpectrumConfig) -> Result<MultiplierSpectrum> {
    Ok(spectrum_from_multipliers(f.degree(), &all_levels(f, max_period, cfg)?))
}

pub fn length_spectrum(f: &RationalMap, max_period: u32, cfg: &SpectrumConfig) -> Result<LengthSpectrum> {
    Ok(length_from_multipliers(f.degree(), &all_levels(f, max_period, cfg)?))
}

/// Both spectra from one periodic-point computation.
pub fn spectra(
    f: &RationalMap,
    max_period: u32,
    cfg: &SpectrumConfig,
) -> Result<(MultiplierSpectrum, LengthSpectrum)> {
    let levels = all_levels(f, max_period, cfg)?;
    Ok((
        spectrum_from_multipliers(f.degree(), &levels),
        length_from_multipliers(f.degree(), &levels),
    ))
}

fn spectrum_from_multipliers(degree: usize, levels: &[Vec<Complex64>]) -> MultiplierSpectrum {
    MultiplierSpectrum {
        degree,
        max_period: levels.len() as u32,
        levels: levels.iter().map(|m| elementary_symmetric(m)).collect(),
    }
}

fn length_from_multipliers(degree: usize, levels: &[Vec<Complex64>]) -> LengthSpectrum {
    LengthSpectrum {
        degree,
        max_period: levels.len() as u32,
        levels: levels
            .iter()
            .map(|m| elementary_symmetric_real(&m.iter().map(|l| l.norm()).collect::<Vec<_>>()))
            .collect(),
    }
}

/// Newton's identities: elementary symmetric values from power sums.
pub fn newton_to_elementary(power_sums: &[Complex64]) -> Vec<Complex64> {
    crate::oracle::newton_to_elementary(power_sums)
}

/// `sum m_i / (1 - lambda_i)`, which equals 1 for every level of every map.
pub fn fixed_point_index_sum(pps: &PeriodicPointSet) -> Result<Complex64> {
    let mut sum = ZERO;
    for p in &pps.points {
        if (p.multiplier - ONE).norm() <= PARABOLIC_TOL {
            return Err(Error::ParabolicPresent {
                tolerance: PARABOLIC_TOL,
            });
        }
        sum += (ONE - p.multiplier).inv() * p.multiplicity as f64;
    }
    Ok(sum)
}

/// Scaled sup-distance between two spectra and whether it is within `tol`.
pub fn compare_spectra(a: &MultiplierSpectrum, b: &MultiplierSpectrum, tol: f64) -> Result<(bool, f64)> {
    if a.degree != b.degree || a.max_period != b.max_period {
        return Err(Error::ShapeMismatch(format!(
            "degree/max_period {}/{} vs {}/{}",
            a.degree, a.max_period, b.degree, b.max_period
        )));
    }
    let mut dist: f64 = 0.0;
    for (la, lb) in a.levels.iter().zip(&b.levels) {
        if la.len() != lb.len() {
            return Err(Error::ShapeMismatch("level lengths differ".into()));
        }
        for (x, y) in la.iter().zip(lb) {
            let scale = 1f64.max(x.norm()).max(y.norm());
            dist = dist.max((x - y).norm() / scale);
        }
    }
    Ok((dist <= tol, dist))
}

/// Same metric for length spectra.
pub fn compare_length_spectra(a: &LengthSpectrum, b: &LengthSpectrum, tol: f64) -> Result<(bool, f64)> {
    if a.degree != b.degree || a.max_period != b.max_period {
        return Err(Error::ShapeMismatch("degree or max_period differ".into()));
    }
    let mut dist: f64 = 0.0;
    for (la, lb) in a.levels.iter().zip(&b.levels) {
        for (x, y) in la.iter().zip(lb) {
            dist = dist.max((x - y).abs() / 1f64.max(x.abs()).max(y.abs()));
        }
    }
    Ok((dist <= tol, dist))
}

/// Decade scaling: `e = m * 10^E` with `E = max(0, ceil(log10 |e|))`, so the
/// mantissa has modulus at most 1, then the mantissa is rounded to the
/// quantum grid.
pub fn quantize(e: Complex64, quantum: f64) -> QuantizedEntry {
    let modulus = e.norm();
    let mut exponent = if modulus > 1.0 { modulus.log10().ceil() as i32 } else { 0 };
    if modulus > 1.0 && modulus / 10f64.powi(exponent) > 1.0 {
        exponent += 1;
    }
    let m = e / 10f64.powi(exponent);
    let round = |x: f64| {
        let r = (x / quantum).round();
        if r == 0.0 { 0 } else { r as i64 }
    };
    QuantizedEntry {
        exponent,
        re: round(m.re),
        im: round(m.im),
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    fnv1a_extend(FNV_OFFSET, bytes)
}

pub(crate) fn fnv1a_extend(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// FNV-1a over the quantized levels: per level its index and entry count as
/// u32 little-endian, then per entry the exponent as i32 and the two grid
/// coordinates as i64, all little-endian.
pub fn digest_levels(levels: &[Vec<QuantizedEntry>]) -> u64 {
    let mut h = FNV_OFFSET;
    for (i, level) in levels.iter().enumerate() {
        h = fnv1a_extend(h, &(i as u32 + 1).to_le_bytes());
        h = fnv1a_extend(h, &(level.len() as u32).to_le_bytes());
        for q in level {
            h = fnv1a_extend(h, &q.exponent.to_le_bytes());
            h = fnv1a_extend(h, &q.re.to_le_bytes());
            h = fnv1a_extend(h, &q.im.to_le_bytes());
        }
    }
    h
}

pub fn fingerprint(s: &MultiplierSpectrum, quantum: f64) -> SpectrumFingerprint {
    let levels: Vec<Vec<QuantizedEntry>> = s
        .levels
        .iter()
        .map(|l| l.iter().map(|&e| quantize(e, quantum)).collect())
        .collect();
    SpectrumFingerprint {
        digest: digest_levels(&levels),
        quantum,
        degree: s.degree,
        max_period: s.max_period,
        levels,
    }
}

/// Number of zero multipliers at one level: the length of the vanishing tail.
pub fn zero_multiplier_count(level: &[Complex64]) -> usize {
    let biggest = level.iter().map(|e| e.norm()).fold(1.0, f64::max);
    let cut = VANISHING_TOL * biggest;
    level.iter().rev().take_while(|e| e.norm() <= cut).count()
}

/// Recovers the periods of superattracting cycles from zero-multiplier counts:
/// `z_n = sum_{p | n} p c_p`, solved level by level.
pub fn disjoint_type_from_spectrum(s: &MultiplierSpectrum, d: usize) -> Result<DisjointType> {
    let mut counts: Vec<u64> = Vec::with_capacity(s.levels.len());
    for (i, level) in s.levels.iter().enumerate() {
        let n = i as u64 + 1;
        let z = zero_multiplier_count(level) as u64;
        let lower: u64 = (1..n).filter(|p| n % p == 0).map(|p| p * counts[p as usize - 1]).sum();
        if z < lower || (z - lower) % n != 0 {
            return Err(Error::InconsistentZeroCounts { level: n as usize });
        }
        counts.push((z - lower) / n);
        if counts.iter().sum::<u64>() > (2 * d - 2) as u64 {
            return Err(Error::InconsistentZeroCounts { level: n as usize });
        }
    }
    let periods: Vec<u32> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat(i as u32 + 1).take(c as usize))
        .collect();
    Ok(DisjointType {
        complete: periods.len() == 2 * d - 2,
        periods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn map(text: &str) -> RationalMap {
        RationalMap::parse(text).unwrap()
    }

    fn cfg() -> SpectrumConfig {
        SpectrumConfig::default()
    }

    fn assert_close(a: &[Complex64], b: &[Complex64], tol: f64) {
        assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).norm() <= tol, "{a:?} vs {b:?}");
        }
    }

    fn reals(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn fixed_point_form_of_squaring() {
        let form = fixed_point_form(&map("z^2"), 1, 2000).unwrap();
        assert_eq!(form.len(), 4);
        let set = rootfind::binary_form_roots(&form, &RootConfig::default()).unwrap();
        assert_eq!(set.total_multiplicity(), 3);
        assert_eq!(set.infinity_multiplicity(), 1);
        let form2 = fixed_point_form(&map("z^2"), 2, 2000).unwrap();
        assert_eq!(form2.len(), 6);
    }

    #[test]
    fn multipliers_of_power_maps() {
        let pps = periodic_points(&map("z^2"), 1, &cfg()).unwrap();
        assert_eq!(pps.total_multiplicity(), 3);
        let mut found = [false; 3];
        for p in &pps.points {
            if p.point.is_infinity() {
                found[0] = p.multiplier.norm() < 1e-14;
            } else if p.point.affine().unwrap().norm() < 1e-12 {
                found[1] = p.multiplier.norm() < 1e-14;
            } else {
                found[2] = (p.multiplier - 2.0).norm() < 1e-12;
            }
        }
        assert_eq!(found, [true; 3]);

        let pps = periodic_points(&map("z^3"), 1, &cfg()).unwrap();
        let mut mult = pps.multipliers();
        mult.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_close(&mult, &reals(&[0.0, 0.0, 3.0, 3.0]), 1e-12);
    }

    #[test]
    fn basilica_two_cycle_is_superattracting() {
        let f = map("z^2-1");
        let pps = periodic_points(&f, 2, &cfg()).unwrap();
        assert_eq!(pps.total_multiplicity(), 5);
        // direct orbit oracle: 0 -> -1 -> 0 and f'(0) f'(-1) = 0 * -2
        for z in [c(0.0, 0.0), c(-1.0, 0.0)] {
            let p = pps
                .points
                .iter()
                .find(|p| p.point.affine().is_some_and(|w| (w - z).norm() < 1e-9))
                .expect("cycle point present");
            assert!(p.multiplier.norm() < 1e-12);
        }
        // fixed points (1 +- sqrt 5)/2 with multiplier 2z, squared at level 2
        for z in [(1.0 + 5f64.sqrt()) / 2.0, (1.0 - 5f64.sqrt()) / 2.0] {
            let p = pps
                .points
                .iter()
                .find(|p| p.point.affine().is_some_and(|w| (w - z).norm() < 1e-9))
                .expect("fixed point present");
            assert!((p.multiplier - 4.0 * z * z).norm() < 1e-10);
        }
    }

    #[test]
    fn golden_levels() {
        assert_close(&spectrum_level(&map("z^2"), 1, &cfg()).unwrap(), &reals(&[2.0, 0.0, 0.0]), 1e-10);
        assert_close(
            &spectrum_level(&map("z^2"), 2, &cfg()).unwrap(),
            &reals(&[12.0, 48.0, 64.0, 0.0, 0.0]),
            1e-10,
        );
        assert_close(&spectrum_level(&map("z^3"), 1, &cfg()).unwrap(), &reals(&[6.0, 9.0, 0.0, 0.0]), 1e-10);
    }

    #[test]
    fn length_spectrum_of_milnor_map() {
        // multipliers {-2, 0, 4}
        let f = map("(z^2-2*z)/(1)");
        let s = spectrum(&f, 1, &cfg()).unwrap();
        assert_close(&s.levels[0], &reals(&[2.0, -8.0, 0.0]), 1e-10);
        let l = length_spectrum(&f, 1, &cfg()).unwrap();
        for (x, y) in l.levels[0].iter().zip([6.0, 8.0, 0.0]) {
            assert!((x - y).abs() < 1e-10, "{:?}", l.levels);
        }
    }

    #[test]
    fn power_sums_of_power_maps() {
        let p = power_sums_oracle(&map("z^2"), 1, 2).unwrap();
        assert_close(&p, &reals(&[2.0, 4.0]), 1e-12);
        let p = power_sums_oracle(&map("z^3"), 1, 2).unwrap();
        assert_close(&p, &reals(&[6.0, 18.0]), 1e-12);
        let p = power_sums_oracle(&map("z^2"), 2, 5).unwrap();
        let e = newton_to_elementary(&p);
        assert_close(&e, &reals(&[12.0, 48.0, 64.0, 0.0, 0.0]), 1e-9);
    }

    #[test]
    fn power_sums_budget() {
        assert!(matches!(
            power_sums_oracle(&map("z^2"), 8, 3),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn newton_identities() {
        assert_close(&newton_to_elementary(&reals(&[2.0, 4.0, 8.0])), &reals(&[2.0, 0.0, 0.0]), 1e-14);
        assert_close(&newton_to_elementary(&reals(&[0.0, 0.0])), &reals(&[0.0, 0.0]), 0.0);
        assert_close(&newton_to_elementary(&reals(&[3.0, 3.0, 3.0])), &reals(&[3.0, 3.0, 1.0]), 1e-14);
    }

    #[test]
    fn index_sums() {
        let pps = periodic_points(&map("z^2"), 1, &cfg()).unwrap();
        assert!((fixed_point_index_sum(&pps).unwrap() - ONE).norm() < 1e-12);
        // milnor normal form with fixed multipliers 3 and 5 at 0 and infinity
        let pps = periodic_points(&map("(z^2+3*z)/(5*z+1)"), 1, &cfg()).unwrap();
        let mut m = pps.multipliers();
        m.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_close(&m, &reals(&[3.0 / 7.0, 3.0, 5.0]), 1e-10);
        assert!((fixed_point_index_sum(&pps).unwrap() - ONE).norm() < 1e-12);
        // z^2 + 1/4 has a parabolic fixed point at 1/2
        let pps = PeriodicPointSet {
            n: 1,
            points: vec![PeriodicPoint {
                point: ProjectivePoint::finite(c(0.5, 0.0)),
                multiplicity: 2,
                multiplier: ONE,
            }],
        };
        assert!(matches!(fixed_point_index_sum(&pps), Err(Error::ParabolicPresent { .. })));
    }

    #[test]
    fn comparisons() {
        let a = spectrum(&map("z^2"), 1, &cfg()).unwrap();
        assert_eq!(compare_spectra(&a, &a, 1e-8).unwrap(), (true, 0.0));
        let b = spectrum(&map("z^2+0.1"), 1, &cfg()).unwrap();
        let (eq, dist) = compare_spectra(&a, &b, 1e-8).unwrap();
        assert!(!eq && dist > 0.0);
        let c3 = spectrum(&map("z^3"), 1, &cfg()).unwrap();
        assert!(matches!(compare_spectra(&a, &c3, 1e-8), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn fingerprints() {
        let a = spectrum(&map("z^2"), 2, &cfg()).unwrap();
        assert_eq!(fingerprint(&a, 1e-6), fingerprint(&a, 1e-6));
        let mut nudged = a.clone();
        for level in nudged.levels.iter_mut() {
            for e in level.iter_mut() {
                // well inside a grid cell after decade scaling
                *e += c(1e-8, -1e-8) * e.norm().max(1.0);
            }
        }
        assert_eq!(fingerprint(&a, 1e-6).digest, fingerprint(&nudged, 1e-6).digest);
        let b = spectrum(&map("z^3"), 2, &cfg()).unwrap();
        assert_ne!(fingerprint(&a, 1e-6).digest, fingerprint(&b, 1e-6).digest);
    }

    #[test]
    fn quantization_keeps_magnitude() {
        let q = quantize(c(12.0, -0.5), 1e-6);
        assert_eq!(q.exponent, 2);
        assert_eq!((q.re, q.im), (120_000, -5_000));
        assert!((q.value(1e-6) - c(12.0, -0.5)).norm() < 1e-9);
        assert_eq!(quantize(c(-1e-17, 0.0), 1e-6), QuantizedEntry { exponent: 0, re: 0, im: 0 });
        assert_eq!(quantize(c(100.0, 0.0), 1e-6).exponent, 2);
    }

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn disjoint_types() {
        let s = spectrum(&map("z^2"), 2, &cfg()).unwrap();
        assert_eq!(
            disjoint_type_from_spectrum(&s, 2).unwrap(),
            DisjointType { periods: vec![1, 1], complete: true }
        );
        let s = spectrum(&map("z^2-1"), 2, &cfg()).unwrap();
        assert_eq!(
            disjoint_type_from_spectrum(&s, 2).unwrap(),
            DisjointType { periods: vec![1, 2], complete: true }
        );
        let s = spectrum(&map("z^3"), 2, &cfg()).unwrap();
        assert_eq!(
            disjoint_type_from_spectrum(&s, 3).unwrap(),
            DisjointType { periods: vec![1, 1], complete: false }
        );
    }

    #[test]
    fn inconsistent_zero_counts() {
        // one zero multiplier at level 2 but none at level 1 cannot come from cycles
        let s = MultiplierSpectrum {
            degree: 2,
            max_period: 2,
            levels: vec![reals(&[1.0, 2.0, 3.0]), reals(&[1.0, 2.0, 3.0, 4.0, 0.0])],
        };
        assert!(matches!(
            disjoint_type_from_spectrum(&s, 2),
            Err(Error::InconsistentZeroCounts { level: 2 })
        ));
    }
}
