//! Binary forms, projective points and the chart calculus on the Riemann
//! sphere.
//!
//! A binary form of degree `m` is stored as `m + 1` coefficients, index `k`
//! holding the coefficient of `X^k Y^(m-k)`. Dehomogenizing at `Y = 1` gives
//! the affine polynomial with the same coefficient vector.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{convolve, Polynomial, ONE, ZERO};

/// Relative tolerance used to break ties when picking the pivot coefficient
/// for normalization.
const PIVOT_TIE: f64 = 1e-12;

/// Affine chart of the projective line: `Z` is `z = X/Y`, `W` is `w = Y/X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    Z,
    W,
}

/// A point of the projective line, stored with its larger homogeneous
/// coordinate equal to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectivePoint {
    x: Complex64,
    y: Complex64,
}

impl ProjectivePoint {
    pub fn finite(z: Complex64) -> Self {
        Self::from_homogeneous(z, ONE)
    }

    pub fn infinity() -> Self {
        ProjectivePoint { x: ONE, y: ZERO }
    }

    /// Normalizes `(x : y)`. Returns the point at infinity for `(x : 0)` and
    /// NaN coordinates for `(0 : 0)`.
    pub fn from_homogeneous(x: Complex64, y: Complex64) -> Self {
        if x.norm() <= y.norm() {
            ProjectivePoint { x: x / y, y: ONE }
        } else {
            ProjectivePoint { x: ONE, y: y / x }
        }
    }

    pub fn x(&self) -> Complex64 {
        self.x
    }

    pub fn y(&self) -> Complex64 {
        self.y
    }

    pub fn is_finite_value(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn is_infinity(&self) -> bool {
        self.y == ZERO
    }

    /// The affine coordinate, or `None` at infinity.
    pub fn affine(&self) -> Option<Complex64> {
        if self.y == ZERO {
            None
        } else {
            Some(self.x / self.y)
        }
    }

    /// The chart in which this point has coordinate of modulus at most 1.
    pub fn chart(&self) -> Chart {
        if self.y == ONE {
            Chart::Z
        } else {
            Chart::W
        }
    }

    pub fn coordinate(&self, chart: Chart) -> Complex64 {
        match chart {
            Chart::Z => self.x / self.y,
            Chart::W => self.y / self.x,
        }
    }

    pub fn from_coordinate(chart: Chart, t: Complex64) -> Self {
        match chart {
            Chart::Z => Self::from_homogeneous(t, ONE),
            Chart::W => Self::from_homogeneous(ONE, t),
        }
    }

    /// Chordal distance, bounded by 1.
    pub fn chordal(&self, other: &Self) -> f64 {
        let num = (self.x * other.y - self.y * other.x).norm();
        let na = (self.x.norm_sqr() + self.y.norm_sqr()).sqrt();
        let nb = (other.x.norm_sqr() + other.y.norm_sqr()).sqrt();
        num / (na * nb)
    }
}

/// Evaluates the form at `(t, 1)` (chart `Z`) or `(1, t)` (chart `W`),
/// together with the derivative in `t`.
pub(crate) fn eval_form_in_chart(
    coeffs: &[Complex64],
    chart: Chart,
    t: Complex64,
) -> (Complex64, Complex64) {
    let mut v = ZERO;
    let mut dv = ZERO;
    match chart {
        Chart::Z => {
            for &c in coeffs.iter().rev() {
                dv = dv * t + v;
                v = v * t + c;
            }
        }
        Chart::W => {
            for &c in coeffs.iter() {
                dv = dv * t + v;
                v = v * t + c;
            }
        }
    }
    (v, dv)
}

pub(crate) fn eval_form(coeffs: &[Complex64], x: Complex64, y: Complex64) -> Complex64 {
    // Horner in the smaller ratio keeps intermediate values bounded.
    if x.norm() <= y.norm() {
        let t = x / y;
        let m = coeffs.len() as i32 - 1;
        eval_form_in_chart(coeffs, Chart::Z, t).0 * y.powi(m)
    } else {
        let t = y / x;
        let m = coeffs.len() as i32 - 1;
        eval_form_in_chart(coeffs, Chart::W, t).0 * x.powi(m)
    }
}

/// The pair `(P, Q)` of degree-`d` binary forms defining `[X : Y] -> [P : Q]`.
/// Degree 1 pairs are allowed here (Möbius maps, identity witnesses); the
/// degree-at-least-2 constraint lives on `RationalMap`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryFormPair {
    p: Vec<Complex64>,
    q: Vec<Complex64>,
}

impl BinaryFormPair {
    /// Both forms must have the same formal degree `>= 1`.
    pub fn new(p: Vec<Complex64>, q: Vec<Complex64>) -> Result<Self> {
        if p.len() != q.len() || p.len() < 2 {
            return Err(Error::ShapeMismatch(format!(
                "forms of lengths {} and {}",
                p.len(),
                q.len()
            )));
        }
        Ok(BinaryFormPair { p, q })
    }

    /// Homogenizes `num / den` at degree `max(deg num, deg den)`.
    pub fn from_polynomials(num: &Polynomial, den: &Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let d = num.degree().max(den.degree()).max(1);
        let pad = |poly: &Polynomial| {
            let mut c = poly.coeffs().to_vec();
            c.resize(d + 1, ZERO);
            c
        };
        Self::new(pad(num), pad(den))
    }

    pub fn identity() -> Self {
        BinaryFormPair {
            p: vec![ZERO, ONE],
            q: vec![ONE, ZERO],
        }
    }

    pub fn degree(&self) -> usize {
        self.p.len() - 1
    }

    pub fn p(&self) -> &[Complex64] {
        &self.p
    }

    pub fn q(&self) -> &[Complex64] {
        &self.q
    }

    pub fn numerator(&self) -> Polynomial {
        Polynomial::new(self.p.clone())
    }

    pub fn denominator(&self) -> Polynomial {
        Polynomial::new(self.q.clone())
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(&self.q).all(|c| c.is_finite())
    }

    pub fn max_modulus(&self) -> f64 {
        self.p.iter().chain(&self.q).map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Divides both forms by the coefficient of largest modulus, so that it
    /// becomes exactly 1. Near-ties are broken by scanning `P` from the top
    /// degree down, then `Q` likewise.
    pub fn normalized(&self) -> Self {
        let max = self.max_modulus();
        if max == 0.0 || !max.is_finite() {
            return self.clone();
        }
        let pivot = self
            .p
            .iter()
            .rev()
            .chain(self.q.iter().rev())
            .find(|c| c.norm() >= max * (1.0 - PIVOT_TIE))
            .copied()
            .unwrap_or(ONE);
        let inv = pivot.inv();
        let scale = |v: &[Complex64]| {
            v.iter()
                .map(|&c| if c == ZERO { ZERO } else { c * inv })
                .collect::<Vec<_>>()
        };
        let mut out = BinaryFormPair {
            p: scale(&self.p),
            q: scale(&self.q),
        };
        // the pivot itself is set exactly
        if let Some(slot) = out
            .p
            .iter_mut()
            .rev()
            .chain(out.q.iter_mut().rev())
            .find(|c| (**c - ONE).norm() <= 4.0 * f64::EPSILON)
        {
            *slot = ONE;
        }
        out
    }

    /// Largest coefficient-wise distance to `other` (same degree required).
    pub fn coefficient_distance(&self, other: &Self) -> f64 {
        if self.degree() != other.degree() {
            return f64::INFINITY;
        }
        self.p
            .iter()
            .zip(&other.p)
            .chain(self.q.iter().zip(&other.q))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `self ∘ inner`: substitutes `(P_inner, Q_inner)` into both forms.
    pub fn compose(&self, inner: &Self) -> Self {
        let d = self.degree();
        let e = inner.degree();
        // powers of the inner forms, P_i^k and Q_i^k for k = 0..=d
        let mut pp = vec![vec![ONE]];
        let mut qq = vec![vec![ONE]];
        for k in 1..=d {
            pp.push(convolve(&pp[k - 1], &inner.p));
            qq.push(convolve(&qq[k - 1], &inner.q));
        }
        let n = d * e + 1;
        let mut p = vec![ZERO; n];
        let mut q = vec![ZERO; n];
        for k in 0..=d {
            let (a, b) = (self.p[k], self.q[k]);
            if a == ZERO && b == ZERO {
                continue;
            }
            let term = convolve(&pp[k], &qq[d - k]);
            for (i, t) in term.iter().enumerate() {
                if a != ZERO {
                    p[i] += a * t;
                }
                if b != ZERO {
                    q[i] += b * t;
                }
            }
        }
        BinaryFormPair { p, q }
    }

    pub fn eval(&self, pt: &ProjectivePoint) -> ProjectivePoint {
        let (x, y) = (pt.x(), pt.y());
        ProjectivePoint::from_homogeneous(eval_form(&self.p, x, y), eval_form(&self.q, x, y))
    }

    /// The map read from chart `src` (coordinate `t`) to chart `dst`: value
    /// and derivative.
    pub fn eval_in_charts(
        &self,
        t: Complex64,
        src: Chart,
        dst: Chart,
    ) -> Result<(Complex64, Complex64)> {
        let (p, dp) = eval_form_in_chart(&self.p, src, t);
        let (q, dq) = eval_form_in_chart(&self.q, src, t);
        let (num, dnum, den, dden) = match dst {
            Chart::Z => (p, dp, q, dq),
            Chart::W => (q, dq, p, dp),
        };
        let scale = p.norm().max(q.norm());
        if !(scale > 0.0) || !scale.is_finite() || den.norm() <= 1e-300 {
            return Err(Error::IndeterminateDerivative);
        }
        let value = num / den;
        let deriv = (dnum * den - num * dden) / (den * den);
        if !deriv.is_finite() {
            return Err(Error::IndeterminateDerivative);
        }
        Ok((value, deriv))
    }

    /// Derivative at `pt`, read in the chart natural for `pt` on the source
    /// side and the chart natural for the image on the target side.
    pub fn derivative_at(&self, pt: &ProjectivePoint) -> Result<Complex64> {
        let image = self.eval(pt);
        if !image.is_finite_value() {
            return Err(Error::IndeterminateDerivative);
        }
        let src = pt.chart();
        Ok(self.eval_in_charts(pt.coordinate(src), src, image.chart())?.1)
    }

    /// `P_X Q_Y - P_Y Q_X`, a form of degree `2d - 2` vanishing exactly at the
    /// critical points.
    pub fn wronskian(&self) -> Vec<Complex64> {
        let d = self.degree();
        let dx = |f: &[Complex64]| -> Vec<Complex64> {
            (1..=d).map(|k| f[k] * k as f64).collect()
        };
        let dy = |f: &[Complex64]| -> Vec<Complex64> {
            (0..d).map(|k| f[k] * (d - k) as f64).collect()
        };
        let a = convolve(&dx(&self.p), &dy(&self.q));
        let b = convolve(&dy(&self.p), &dx(&self.q));
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    }

    /// `Y P - X Q`, the form of degree `d + 1` whose roots are the fixed
    /// points.
    pub fn fixed_point_form(&self) -> Vec<Complex64> {
        let d = self.degree();
        let mut g = vec![ZERO; d + 2];
        for k in 0..=d {
            g[k] += self.p[k];
            g[k + 1] -= self.q[k];
        }
        g
    }

    /// Modulus of the Sylvester resultant of `P(z, 1)` and `Q(z, 1)` taken at
    /// formal degree `d`.
    pub fn resultant_modulus(&self) -> f64 {
        self.resultant_log_modulus().exp()
    }

    pub fn resultant_log_modulus(&self) -> f64 {
        let d = self.degree();
        let n = 2 * d;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for row in 0..d {
            for k in 0..=d {
                // highest coefficient first
                m[(row, row + k)] = self.p[d - k];
                m[(row + d, row + k)] = self.q[d - k];
            }
        }
        let lu = m.lu();
        let u = lu.u();
        (0..n).map(|i| u[(i, i)].norm().ln()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn chordal_distance_basics() {
        let a = ProjectivePoint::finite(ZERO);
        let b = ProjectivePoint::infinity();
        assert!((a.chordal(&b) - 1.0).abs() < 1e-15);
        assert_eq!(a.chordal(&a), 0.0);
        let big = ProjectivePoint::finite(c(1e20, 0.0));
        assert!(big.chordal(&b) < 1e-19);
    }

    #[test]
    fn compose_squares() {
        // z^2 ∘ (z^2 + 1)
        let sq = BinaryFormPair::new(real(&[0.0, 0.0, 1.0]), real(&[1.0, 0.0, 0.0])).unwrap();
        let h = BinaryFormPair::new(real(&[1.0, 0.0, 1.0]), real(&[1.0, 0.0, 0.0])).unwrap();
        let f = sq.compose(&h);
        assert_eq!(f.p, real(&[1.0, 0.0, 2.0, 0.0, 1.0]));
        assert_eq!(f.q, real(&[1.0, 0.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn chart_derivative_of_square() {
        let sq = BinaryFormPair::new(real(&[0.0, 0.0, 1.0]), real(&[1.0, 0.0, 0.0])).unwrap();
        let at_one = sq.derivative_at(&ProjectivePoint::finite(ONE)).unwrap();
        assert!((at_one - 2.0).norm() < 1e-15);
        let at_inf = sq.derivative_at(&ProjectivePoint::infinity()).unwrap();
        assert_eq!(at_inf, ZERO);
    }

    #[test]
    fn resultant_matches_root_product() {
        // P = z^3 - z, Q = 3z^2 - 1 (formal degree 3). Res = lc(P)^3 prod Q(roots of P)
        let p = real(&[0.0, -1.0, 0.0, 1.0]);
        let q = real(&[-1.0, 0.0, 3.0, 0.0]);
        let forms = BinaryFormPair::new(p, q).unwrap();
        let qpoly = Polynomial::new(forms.q.clone());
        let expected: f64 = [0.0, 1.0, -1.0]
            .iter()
            .map(|&r| qpoly.eval(c(r, 0.0)).norm())
            .product();
        assert!((forms.resultant_modulus() - expected).abs() < 1e-12);
        assert!((expected - 4.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_prefers_top_of_p() {
        let f = BinaryFormPair::new(real(&[1.0, 0.0, 1.0]), real(&[-1.0, 1.0, 0.0])).unwrap();
        let n = f.normalized();
        assert_eq!(n.p, real(&[1.0, 0.0, 1.0]));
        assert_eq!(n.q, real(&[-1.0, 1.0, 0.0]));
        let g = BinaryFormPair::new(real(&[0.0, 0.0, 0.5]), real(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(g.normalized(), g);
    }

    #[test]
    fn wronskian_of_square() {
        let sq = BinaryFormPair::new(real(&[0.0, 0.0, 1.0]), real(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(sq.wronskian(), real(&[0.0, 4.0, 0.0]));
    }
}
