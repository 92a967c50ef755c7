//! Rational self-maps of the projective line of degree at least 2.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forms::{BinaryFormPair, ProjectivePoint};
use crate::poly::{Polynomial, ONE, ZERO};
use crate::rootfind::{self, Location, RootConfig};

/// Default cap on `d^n + 1`, the number of roots a single level may need.
pub const DEFAULT_MAX_ROOTS: usize = 2000;

/// Chordal radius under which two critical values count as one.
pub const CRITICAL_VALUE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapConfig {
    /// Maps whose normalized resultant modulus is at most this are rejected.
    pub degenerate_eps: f64,
    /// Relative radius for matching common roots of numerator and denominator.
    pub gcd_radius: f64,
    pub roots: RootConfig,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            degenerate_eps: 1e-12,
            gcd_radius: 1e-9,
            roots: RootConfig::default(),
        }
    }
}

/// A rational map of degree `d >= 2`, normalized so that its largest
/// coefficient is exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    forms: BinaryFormPair,
}

impl RationalMap {
    /// Builds `num / den` after cancelling approximate common roots.
    pub fn new(num: &Polynomial, den: &Polynomial) -> Result<Self> {
        make_map(num, den, &MapConfig::default())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let expr = crate::expr::parse_map(text)?;
        let (num, den) = expr.to_rational_function()?;
        Self::new(&num, &den)
    }

    /// Validates a pair of forms of degree at least 2 (no common-factor
    /// reduction is attempted).
    pub fn from_forms(forms: BinaryFormPair) -> Result<Self> {
        Self::from_forms_with(forms, MapConfig::default().degenerate_eps)
    }

    pub(crate) fn from_forms_with(forms: BinaryFormPair, eps: f64) -> Result<Self> {
        if forms.degree() < 2 {
            return Err(Error::DegreeTooLow {
                degree: forms.degree(),
            });
        }
        let forms = forms.normalized();
        let res = forms.resultant_modulus();
        if !(res > eps) {
            return Err(Error::DegenerateMap {
                resultant: res,
                threshold: eps,
            });
        }
        Ok(RationalMap { forms })
    }

    /// Wraps the output of an algebraic operation on valid maps. Those are
    /// nondegenerate in exact arithmetic (the resultant is multiplicative
    /// under composition), so only precision exhaustion is checked.
    pub(crate) fn from_derived(forms: BinaryFormPair) -> Result<Self> {
        let forms = forms.normalized();
        if !forms.is_finite() || forms.max_modulus() == 0.0 {
            return Err(Error::DegenerateMap {
                resultant: 0.0,
                threshold: MapConfig::default().degenerate_eps,
            });
        }
        Ok(RationalMap { forms })
    }

    pub fn degree(&self) -> usize {
        self.forms.degree()
    }

    pub fn forms(&self) -> &BinaryFormPair {
        &self.forms
    }

    pub fn numerator(&self) -> Polynomial {
        self.forms.numerator()
    }

    pub fn denominator(&self) -> Polynomial {
        self.forms.denominator()
    }

    pub fn resultant_modulus(&self) -> f64 {
        self.forms.resultant_modulus()
    }

    pub fn eval(&self, pt: &ProjectivePoint) -> ProjectivePoint {
        self.forms.eval(pt)
    }

    /// Affine evaluation; `None` when the image is infinity.
    pub fn eval_affine(&self, z: Complex64) -> Option<Complex64> {
        self.eval(&ProjectivePoint::finite(z)).affine()
    }

    pub fn derivative_at(&self, pt: &ProjectivePoint) -> Result<Complex64> {
        self.forms.derivative_at(pt)
    }

    /// Largest coefficient difference after normalization.
    pub fn distance(&self, other: &RationalMap) -> f64 {
        self.forms.coefficient_distance(&other.forms)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &RationalMap) -> Result<RationalMap> {
        RationalMap::from_derived(self.forms.compose(&inner.forms))
    }

    /// The `n`-th iterate, refusing when `d^n + 1` exceeds `max_roots`.
    pub fn iterate(&self, n: u32, max_roots: usize) -> Result<RationalMap> {
        check_budget(self.degree(), n, max_roots)?;
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// `phi ∘ self ∘ phi^-1`.
    pub fn conjugate(&self, phi: &MobiusTransform) -> Result<RationalMap> {
        let inner = self.forms.compose(&phi.inverse().forms());
        RationalMap::from_derived(phi.forms().compose(&inner))
    }

    pub fn critical_data(&self) -> Result<CriticalData> {
        self.critical_data_with(&RootConfig::default())
    }

    pub fn critical_data_with(&self, cfg: &RootConfig) -> Result<CriticalData> {
        let set = rootfind::binary_form_roots(&self.forms.wronskian(), cfg)?;
        let points: Vec<(ProjectivePoint, usize)> = set
            .iter()
            .map(|r| (location_point(r.location), r.multiplicity))
            .collect();
        let values: Vec<ProjectivePoint> = points.iter().map(|(p, _)| self.eval(p)).collect();
        let mut distinct: Vec<ProjectivePoint> = Vec::new();
        for v in &values {
            if !distinct.iter().any(|u| u.chordal(v) < CRITICAL_VALUE_TOL) {
                distinct.push(*v);
            }
        }
        Ok(CriticalData {
            points,
            values,
            distinct_value_count: distinct.len(),
        })
    }

    /// True iff the map has exactly `2d - 2` distinct critical values.
    pub fn is_simple(&self) -> Result<bool> {
        Ok(self.critical_data()?.distinct_value_count == 2 * self.degree() - 2)
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::expr::format_map(self))
    }
}

pub(crate) fn location_point(loc: Location) -> ProjectivePoint {
    match loc {
        Location::Finite(z) => ProjectivePoint::finite(z),
        Location::Infinity => ProjectivePoint::infinity(),
    }
}

pub(crate) fn check_budget(d: usize, n: u32, max_roots: usize) -> Result<()> {
    let needed = (d as u128)
        .checked_pow(n)
        .and_then(|v| v.checked_add(1))
        .unwrap_or(u128::MAX);
    if n == 0 || needed > max_roots as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            cap: max_roots,
        });
    }
    Ok(())
}

/// Builds a map from affine numerator and denominator: common roots closer
/// than `cfg.gcd_radius` are cancelled, then the degree and the resultant
/// are validated.
pub fn make_map(num: &Polynomial, den: &Polynomial, cfg: &MapConfig) -> Result<RationalMap> {
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if num.is_zero() {
        return Err(Error::DegreeTooLow { degree: 0 });
    }
    let (num, den) = cancel_common_roots(num, den, cfg)?;
    let degree = num.degree().max(den.degree());
    if degree < 2 {
        return Err(Error::DegreeTooLow { degree });
    }
    RationalMap::from_forms_with(
        BinaryFormPair::from_polynomials(&num, &den)?,
        cfg.degenerate_eps,
    )
}

fn cancel_common_roots(
    num: &Polynomial,
    den: &Polynomial,
    cfg: &MapConfig,
) -> Result<(Polynomial, Polynomial)> {
    if num.degree() == 0 || den.degree() == 0 {
        return Ok((num.clone(), den.clone()));
    }
    let a = rootfind::roots(num, &cfg.roots)?.finite_with_multiplicity();
    let mut b = rootfind::roots(den, &cfg.roots)?.finite_with_multiplicity();
    let mut num = num.clone();
    let mut den = den.clone();
    for ra in a {
        let hit = b.iter().position(|rb| {
            (ra - rb).norm() <= cfg.gcd_radius * 1f64.max(ra.norm()).max(rb.norm())
        });
        if let Some(j) = hit {
            let r = (ra + b.swap_remove(j)) * 0.5;
            num = num.deflate(r);
            den = den.deflate(r);
        }
    }
    Ok((num, den))
}

/// `z -> (a z + b) / (c z + d)`, scaled so the largest entry has modulus 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusTransform {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusTransform {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let s = [a, b, c, d].iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::DegenerateParameters("zero Möbius matrix".into()));
        }
        let (a, b, c, d) = (a / s, b / s, c / s, d / s);
        let det = a * d - b * c;
        if det.norm() <= 1e-14 {
            return Err(Error::DegenerateParameters(format!(
                "Möbius determinant {det} vanishes"
            )));
        }
        Ok(MobiusTransform { a, b, c, d })
    }

    pub fn identity() -> Self {
        MobiusTransform {
            a: ONE,
            b: ZERO,
            c: ZERO,
            d: ONE,
        }
    }

    pub fn inverse(&self) -> Self {
        MobiusTransform {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn forms(&self) -> BinaryFormPair {
        BinaryFormPair::new(vec![self.b, self.a], vec![self.d, self.c]).expect("degree 1")
    }

    pub fn apply(&self, pt: &ProjectivePoint) -> ProjectivePoint {
        self.forms().eval(pt)
    }
}

/// Critical points (roots of the Wronskian, with multiplicity) and their
/// images.
#[derive(Clone, Debug)]
pub struct CriticalData {
    pub points: Vec<(ProjectivePoint, usize)>,
    pub values: Vec<ProjectivePoint>,
    pub distinct_value_count: usize,
}

impl CriticalData {
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }
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

    #[test]
    fn square_map() {
        let f = RationalMap::new(&Polynomial::from_real(&[0.0, 0.0, 1.0]), &Polynomial::from_real(&[1.0])).unwrap();
        assert_eq!(f.degree(), 2);
        assert_eq!(f.numerator(), Polynomial::from_real(&[0.0, 0.0, 1.0]));
    }

    #[test]
    fn common_factor_reduces_degree() {
        let err = RationalMap::new(&Polynomial::from_real(&[0.0, 1.0, 1.0]), &Polynomial::from_real(&[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::DegreeTooLow { degree: 1 }));
    }

    #[test]
    fn common_factor_is_cancelled_at_higher_degree() {
        // (z^3 + z^2) / (z + 1) = z^2
        let f = RationalMap::new(&Polynomial::from_real(&[0.0, 0.0, 1.0, 1.0]), &Polynomial::from_real(&[1.0, 1.0])).unwrap();
        assert!(f.distance(&map("z^2")) < 1e-12);
    }

    #[test]
    fn newton_shape_is_valid() {
        let f = RationalMap::new(&Polynomial::from_real(&[0.0, -1.0, 0.0, 1.0]), &Polynomial::from_real(&[-1.0, 0.0, 3.0])).unwrap();
        assert_eq!(f.degree(), 3);
        // |Res| = 4 before normalization; the pivot is the coefficient 3.
        assert!((f.resultant_modulus() - 4.0 / 3f64.powi(6)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_zero_inputs() {
        assert!(matches!(
            RationalMap::new(&Polynomial::from_real(&[1.0, 1.0]), &Polynomial::zero()),
            Err(Error::DivisionByZero)
        ));
        assert!(matches!(
            RationalMap::new(&Polynomial::zero(), &Polynomial::from_real(&[1.0])),
            Err(Error::DegreeTooLow { .. })
        ));
        // roots 1e-7 apart: outside the gcd radius, inside the degenerate band
        let nearly = RationalMap::new(
            &Polynomial::from_real(&[1e-7, 1.0, 1.0]),
            &Polynomial::from_real(&[0.0, 1.0, 1.0]),
        );
        assert!(matches!(nearly, Err(Error::DegenerateMap { .. })));
    }

    #[test]
    fn compose_examples() {
        assert!(map("z^2").compose(&map("z^3")).unwrap().distance(&map("z^6")) < 1e-15);
        assert!(map("z^2+1").compose(&map("z^2")).unwrap().distance(&map("z^4+1")) < 1e-15);
    }

    #[test]
    fn iterate_examples() {
        let f = map("z^2");
        assert!(f.iterate(3, DEFAULT_MAX_ROOTS).unwrap().distance(&map("z^8")) < 1e-15);
        assert_eq!(f.iterate(1, DEFAULT_MAX_ROOTS).unwrap(), f);
        assert!(matches!(f.iterate(11, DEFAULT_MAX_ROOTS), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(f.iterate(0, DEFAULT_MAX_ROOTS), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn conjugation_examples() {
        let f = map("z^2");
        let inv = MobiusTransform::new(ZERO, ONE, ONE, ZERO).unwrap();
        assert!(f.conjugate(&inv).unwrap().distance(&f) < 1e-15);
        let dil = MobiusTransform::new(c(2.0, 0.0), ZERO, ZERO, ONE).unwrap();
        assert!(f.conjugate(&dil).unwrap().distance(&map("z^2/2")) < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let f = map("z^2");
        assert!((f.derivative_at(&ProjectivePoint::finite(ONE)).unwrap() - 2.0).norm() < 1e-15);
        assert_eq!(f.derivative_at(&ProjectivePoint::infinity()).unwrap(), ZERO);
        let g = map("(z^2+3*z)/(5*z+1)");
        assert!((g.derivative_at(&ProjectivePoint::finite(ZERO)).unwrap() - 3.0).norm() < 1e-14);
    }

    #[test]
    fn critical_data_examples() {
        let cd = map("z^2").critical_data().unwrap();
        assert_eq!(cd.total_multiplicity(), 2);
        assert_eq!(cd.distinct_value_count, 2);
        assert!(cd.points.iter().any(|(p, _)| p.is_infinity()));
        assert!(cd.points.iter().any(|(p, _)| p.affine() == Some(ZERO)));

        let cd = map("z^2+z").critical_data().unwrap();
        let finite: Vec<_> = cd.points.iter().filter_map(|(p, _)| p.affine()).collect();
        assert_eq!(finite.len(), 1);
        assert!((finite[0] + 0.5).norm() < 1e-14);
        let vals: Vec<_> = cd.values.iter().filter_map(|v| v.affine()).collect();
        assert!((vals[0] + 0.25).norm() < 1e-14);

        let cd = map("(z^2+1)^2").critical_data().unwrap();
        assert_eq!(cd.total_multiplicity(), 6);
        assert!(cd.distinct_value_count < 6);
    }

    #[test]
    fn simplicity() {
        assert!(map("z^2").is_simple().unwrap());
        for d in 3..6 {
            let f = map(&format!("z^{d}"));
            assert!(!f.is_simple().unwrap());
        }
    }
}
