//! Root-free power sums of the multipliers at fixed points of an iterate.
//!
//! The monomial basis of the quotient algebra is badly conditioned once the
//! fixed points spread over several decades of modulus, and double precision
//! loses every digit well before the point budget is reached. The work runs
//! in double-double first and escalates to wider binary floats when the two
//! coordinate charts used as a self-check disagree.

use num_complex::{Complex, Complex64};
use num_traits::{Num, One, Zero};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::map::{check_budget, RationalMap};
use crate::mp::Mp;

/// Fixed points allowed per oracle call.
pub const ORACLE_MAX_POINTS: usize = 200;

/// Relative disagreement between the two chart evaluations beyond which the
/// result is treated as numerically singular.
const POWER_SUM_AGREEMENT_TOL: f64 = 1e-12;
const ELEMENTARY_AGREEMENT_TOL: f64 = 1e-10;

pub(crate) trait Scalar: Clone + Num + Send + Sync {
    fn unit_roundoff() -> f64;
    fn of(x: f64) -> Self;
    fn approx(&self) -> f64;
}

impl Scalar for Dd {
    fn unit_roundoff() -> f64 {
        2f64.powi(-104)
    }
    fn of(x: f64) -> Self {
        Dd::new(x)
    }
    fn approx(&self) -> f64 {
        self.to_f64()
    }
}

impl<const BITS: u64> Scalar for Mp<BITS> {
    fn unit_roundoff() -> f64 {
        2f64.powi(1 - BITS as i32)
    }
    fn of(x: f64) -> Self {
        Mp::from_f64(x)
    }
    fn approx(&self) -> f64 {
        self.to_f64()
    }
}

type C<T> = Complex<T>;
type Poly<T> = Vec<C<T>>;
type Matrix<T> = Vec<Vec<C<T>>>;

fn lift<T: Scalar>(z: Complex64) -> C<T> {
    Complex::new(T::of(z.re), T::of(z.im))
}

fn lower<T: Scalar>(z: &C<T>) -> Complex64 {
    Complex64::new(z.re.approx(), z.im.approx())
}

fn modulus<T: Scalar>(z: &C<T>) -> f64 {
    lower(z).norm()
}

fn real<T: Scalar>(x: f64) -> C<T> {
    lift(Complex64::new(x, 0.0))
}

fn poly_mul<T: Scalar>(a: &[C<T>], b: &[C<T>]) -> Poly<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C::<T>::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + x * y;
        }
    }
    out
}

fn poly_sub<T: Scalar>(a: &[C<T>], b: &[C<T>]) -> Poly<T> {
    let mut out = vec![C::<T>::zero(); a.len().max(b.len())];
    out[..a.len()].clone_from_slice(a);
    for (i, y) in b.iter().enumerate() {
        out[i] = &out[i] - y;
    }
    out
}

fn derivative<T: Scalar>(a: &[C<T>]) -> Poly<T> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * real::<T>(k as f64))
        .collect()
}

/// `a mod g` for monic `g`, padded to `deg g` entries.
fn rem_monic<T: Scalar>(a: &[C<T>], g: &[C<T>]) -> Poly<T> {
    let m = g.len() - 1;
    let mut r = a.to_vec();
    for top in (m..r.len()).rev() {
        let c = r[top].clone();
        if c.is_zero() {
            continue;
        }
        for i in 0..m {
            r[top - m + i] = &r[top - m + i] - &c * &g[i];
        }
        r[top] = C::zero();
    }
    r.resize(m, C::zero());
    r
}

fn scale_to_unit<T: Scalar>(p: &mut [C<T>], q: &mut [C<T>]) {
    let big = p.iter().chain(q.iter()).map(modulus).fold(0.0, f64::max);
    if big > 0.0 {
        let s = real::<T>(1.0 / big);
        for c in p.iter_mut().chain(q.iter_mut()) {
            *c = &*c * &s;
        }
    }
}

/// Forms of `f^n`, composed without rounding to double precision in between.
fn iterate_forms<T: Scalar>(p: &[C<T>], q: &[C<T>], n: u32) -> (Poly<T>, Poly<T>) {
    let d = p.len() - 1;
    let (mut gp, mut gq) = (p.to_vec(), q.to_vec());
    for _ in 1..n {
        // powers of the inner forms, as polynomials in z = X / Y
        let mut pp = vec![vec![C::<T>::one()]];
        let mut qp = vec![vec![C::<T>::one()]];
        for k in 1..=d {
            pp.push(poly_mul(&pp[k - 1], &gp));
            qp.push(poly_mul(&qp[k - 1], &gq));
        }
        let big = (gp.len() - 1) * d;
        let mut np = vec![C::<T>::zero(); big + 1];
        let mut nq = vec![C::<T>::zero(); big + 1];
        for k in 0..=d {
            let term = poly_mul(&pp[k], &qp[d - k]);
            for (i, t) in term.iter().enumerate() {
                np[i] = &np[i] + &p[k] * t;
                nq[i] = &nq[i] + &q[k] * t;
            }
        }
        scale_to_unit(&mut np, &mut nq);
        gp = np;
        gq = nq;
    }
    (gp, gq)
}

fn multiplication_matrix<T: Scalar>(a: &[C<T>], g: &[C<T>]) -> Matrix<T> {
    let m = g.len() - 1;
    let mut col = rem_monic(a, g);
    let mut out = vec![vec![C::<T>::zero(); m]; m];
    for j in 0..m {
        for i in 0..m {
            out[i][j] = col[i].clone();
        }
        let top = col[m - 1].clone();
        for i in (1..m).rev() {
            col[i] = &col[i - 1] - &top * &g[i];
        }
        col[0] = C::<T>::zero() - &top * &g[0];
    }
    out
}

/// Solves `b x = a` by LU with partial pivoting.
fn solve<T: Scalar>(mut b: Matrix<T>, mut a: Poly<T>) -> Result<Poly<T>> {
    let m = b.len();
    let mut pivots = Vec::with_capacity(m);
    for k in 0..m {
        let (row, size) = (k..m)
            .map(|i| (i, modulus(&b[i][k])))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if size == 0.0 {
            return Err(Error::SingularReduction);
        }
        pivots.push(size);
        b.swap(k, row);
        a.swap(k, row);
        let inv = C::<T>::one() / &b[k][k];
        for i in k + 1..m {
            let factor = &b[i][k] * &inv;
            if factor.is_zero() {
                continue;
            }
            for j in k..m {
                let t = &factor * &b[k][j];
                b[i][j] = &b[i][j] - t;
            }
            a[i] = &a[i] - &factor * &a[k];
        }
    }
    let biggest = pivots.iter().cloned().fold(0.0, f64::max);
    let smallest = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smallest > 1e4 * T::unit_roundoff() * biggest) {
        return Err(Error::SingularReduction);
    }
    for k in (0..m).rev() {
        let mut acc = a[k].clone();
        for i in k + 1..m {
            acc = acc - &b[k][i] * &a[i];
        }
        a[k] = acc / &b[k][k];
    }
    Ok(a)
}

/// Power sums `s_j = sum z_i^j`, `j < m`, of the roots of monic `g`; these are
/// the traces of multiplication by `z^j` on the quotient algebra.
fn root_power_sums<T: Scalar>(g: &[C<T>]) -> Poly<T> {
    let m = g.len() - 1;
    let mut s = vec![real::<T>(m as f64)];
    for j in 1..m {
        let mut acc = &g[m - j] * &real::<T>(j as f64);
        for i in 1..j {
            acc = acc + &g[m - i] * &s[j - i];
        }
        s.push(C::<T>::zero() - acc);
    }
    s
}

fn mul_mod<T: Scalar>(a: &[C<T>], b: &[C<T>], g: &[C<T>]) -> Poly<T> {
    rem_monic(&poly_mul(a, b), g)
}

/// Trace of multiplication by `h` on the quotient algebra.
fn algebra_trace<T: Scalar>(h: &[C<T>], s: &[C<T>]) -> C<T> {
    h.iter().zip(s).fold(C::zero(), |acc, (x, y)| acc + x * y)
}

/// Power sums for the map with forms `p`, `q` (coefficient `k` on `X^k Y^(d-k)`).
fn power_sums_in_chart<T: Scalar>(p: &[C<T>], q: &[C<T>], n: u32, kmax: usize) -> Result<Poly<T>> {
    let (gp, gq) = iterate_forms(p, q, n);
    let big_d = gp.len() - 1;
    let mut fixed = vec![C::<T>::zero(); big_d + 2];
    for k in 0..=big_d {
        fixed[k] = &fixed[k] + &gp[k];
        fixed[k + 1] = &fixed[k + 1] - &gq[k];
    }
    let top = fixed.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    let at_infinity = big_d + 1 - top;
    let lead = C::<T>::one() / &fixed[top];
    let monic: Poly<T> = fixed[..=top].iter().map(|c| c * &lead).collect();

    let mut sums = vec![C::<T>::zero(); kmax];
    if top > 0 && kmax > 0 {
        let a = poly_sub(&poly_mul(&derivative(&gp), &gq), &poly_mul(&gp, &derivative(&gq)));
        let b = poly_mul(&gq, &gq);
        // the derivative of f^n on the algebra: c = a / b mod g, so that
        // multiplication by c^k has trace sum lambda_i^k
        let c = solve(multiplication_matrix(&b, &monic), rem_monic(&a, &monic))?;
        let s = root_power_sums(&monic);
        let mut power = c.clone();
        for (k, out) in sums.iter_mut().enumerate() {
            if k > 0 {
                power = mul_mod(&power, &c, &monic);
            }
            *out = algebra_trace(&power, &s);
        }
    }
    if at_infinity > 0 {
        // chart derivative at w = 0 is q_(D-1) / p_D when infinity is simple
        let lambda = if at_infinity > 1 {
            C::<T>::one()
        } else {
            &gq[big_d - 1] / &gp[big_d]
        };
        let weight = real::<T>(at_infinity as f64);
        let mut acc = C::<T>::one();
        for s in sums.iter_mut() {
            acc = acc * &lambda;
            *s = &*s + &acc * &weight;
        }
    }
    Ok(sums)
}

fn newton<T: Scalar>(p: &[C<T>]) -> Poly<T> {
    let n = p.len();
    let mut e = vec![C::<T>::zero(); n + 1];
    e[0] = C::one();
    for k in 1..=n {
        let mut acc = C::<T>::zero();
        for j in 1..=k {
            let term = &e[k - j] * &p[j - 1];
            if j % 2 == 1 {
                acc = acc + term;
            } else {
                acc = acc - term;
            }
        }
        e[k] = acc / real::<T>(k as f64);
    }
    e.remove(0);
    e
}

/// Newton's identities in double-double arithmetic.
pub(crate) fn newton_to_elementary(p: &[Complex64]) -> Vec<Complex64> {
    let lifted: Vec<C<Dd>> = p.iter().map(|c| lift(*c)).collect();
    newton(&lifted).iter().map(lower).collect()
}

/// Forms of `z -> s z` conjugating `f`: `P(sX, Y)` and `s Q(sX, Y)`.
fn scaled_forms<T: Scalar>(f: &RationalMap, s: Complex64) -> (Poly<T>, Poly<T>) {
    let forms = f.forms();
    let s = lift::<T>(s);
    let mut acc = C::<T>::one();
    let mut p = Vec::new();
    let mut q = Vec::new();
    for (a, b) in forms.p().iter().zip(forms.q()) {
        p.push(lift::<T>(*a) * &acc);
        q.push(lift::<T>(*b) * &acc * &s);
        acc = acc * &s;
    }
    scale_to_unit(&mut p, &mut q);
    (p, q)
}

/// Modulus scaling that brings the geometric mean of the affine fixed points
/// of `f^n` to 1.
fn balancing_radius(f: &RationalMap, n: u32) -> f64 {
    let (p, q) = scaled_forms::<Dd>(f, Complex64::new(1.0, 0.0));
    let (gp, gq) = iterate_forms(&p, &q, n);
    let big_d = gp.len() - 1;
    let mut fixed = vec![Complex64::new(0.0, 0.0); big_d + 2];
    for k in 0..=big_d {
        fixed[k] += lower(&gp[k]);
        fixed[k + 1] -= lower(&gq[k]);
    }
    let lo = fixed.iter().position(|c| *c != Complex64::new(0.0, 0.0));
    let hi = fixed.iter().rposition(|c| *c != Complex64::new(0.0, 0.0));
    match (lo, hi) {
        (Some(lo), Some(hi)) if hi > lo => {
            let r = (fixed[lo].norm() / fixed[hi].norm()).powf(1.0 / (hi - lo) as f64);
            if r.is_finite() && r > 0.0 {
                r
            } else {
                1.0
            }
        }
        _ => 1.0,
    }
}

/// Power sums in two coordinates related by a non-dyadic scaling, which
/// leaves every multiplier unchanged.
fn power_sums_two_charts<T: Scalar>(f: &RationalMap, n: u32, kmax: usize) -> Result<(Poly<T>, Poly<T>)> {
    let r = balancing_radius(f, n);
    let (p, q) = scaled_forms::<T>(f, Complex64::new(r, 0.0));
    let first = power_sums_in_chart(&p, &q, n, kmax)?;
    let (p, q) = scaled_forms::<T>(f, Complex64::from_polar(1.37 * r, 0.61));
    let second = power_sums_in_chart(&p, &q, n, kmax)?;
    Ok((first, second))
}

/// Entrywise `|x - y| <= tol * max(1, |x|)`, formed in working precision so
/// that entries beyond the double range still compare.
fn agree<T: Scalar>(a: &[C<T>], b: &[C<T>], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| {
        let diff = x - y;
        let gap = if modulus(x) >= 1.0 { modulus(&(diff / x)) } else { modulus(&diff) };
        gap <= tol
    })
}

fn power_sums_at<T: Scalar>(f: &RationalMap, n: u32, kmax: usize) -> Result<Vec<Complex64>> {
    let (first, second) = power_sums_two_charts::<T>(f, n, kmax)?;
    if !agree(&first, &second, POWER_SUM_AGREEMENT_TOL) {
        return Err(Error::SingularReduction);
    }
    Ok(first.iter().map(lower).collect())
}

fn elementary_at<T: Scalar>(f: &RationalMap, n: u32, count: usize) -> Result<Vec<Complex64>> {
    let (first, second) = power_sums_two_charts::<T>(f, n, count)?;
    let (e1, e2) = (newton(&first), newton(&second));
    if !agree(&e1, &e2, ELEMENTARY_AGREEMENT_TOL) {
        return Err(Error::SingularReduction);
    }
    Ok(e1.iter().map(lower).collect())
}

type Attempt = fn(&RationalMap, u32, usize) -> Result<Vec<Complex64>>;

/// Tries each precision in turn until one stops reporting a singular
/// reduction.
fn escalate(f: &RationalMap, n: u32, k: usize, attempts: [Attempt; 4]) -> Result<Vec<Complex64>> {
    check_budget(f.degree(), n, ORACLE_MAX_POINTS)?;
    for attempt in attempts {
        match attempt(f, n, k) {
            Err(Error::SingularReduction) => continue,
            other => return other,
        }
    }
    Err(Error::SingularReduction)
}

/// Power sums `p_k = sum lambda_i^k`, `k = 1..=kmax`, over the fixed points
/// of `f^n` with multiplicity, computed from traces in the quotient algebra of
/// the fixed-point polynomial without extracting any root.
///
/// Each attempt is repeated after a change of coordinate; if no precision
/// makes the two agree the reduction is reported as numerically singular.
pub fn power_sums_oracle(f: &RationalMap, n: u32, kmax: usize) -> Result<Vec<Complex64>> {
    escalate(
        f,
        n,
        kmax,
        [
            power_sums_at::<Dd>,
            power_sums_at::<Mp<256>>,
            power_sums_at::<Mp<512>>,
            power_sums_at::<Mp<1024>>,
        ],
    )
}

/// Elementary symmetric values of all multipliers at fixed points of `f^n`,
/// from the oracle power sums by Newton's identities without rounding the
/// power sums to double precision in between. Large multipliers make the
/// power sums grow much faster than the elementary values, so rounding first
/// would lose them.
pub fn elementary_oracle(f: &RationalMap, n: u32) -> Result<Vec<Complex64>> {
    check_budget(f.degree(), n, ORACLE_MAX_POINTS)?;
    let count = f.degree().pow(n) + 1;
    escalate(
        f,
        n,
        count,
        [
            elementary_at::<Dd>,
            elementary_at::<Mp<256>>,
            elementary_at::<Mp<512>>,
            elementary_at::<Mp<1024>>,
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn map(num: &[f64], den: &[f64]) -> RationalMap {
        let c = |v: &[f64]| Polynomial::new(v.iter().map(|&x| Complex64::new(x, 0.0)).collect());
        RationalMap::new(&c(num), &c(den)).unwrap()
    }

    #[test]
    fn square_map_fixed_points() {
        // fixed points 0, 1, infinity with multipliers 0, 2, 0
        let f = map(&[0.0, 0.0, 1.0], &[1.0]);
        let p = power_sums_oracle(&f, 1, 3).unwrap();
        for (k, v) in p.iter().enumerate() {
            let expect = 2f64.powi(k as i32 + 1);
            assert!((v - expect).norm() < 1e-12, "{k}: {v}");
        }
    }

    #[test]
    fn square_map_second_iterate() {
        // z^4: fixed points 0, infinity and three roots of unity with multiplier 4
        let f = map(&[0.0, 0.0, 1.0], &[1.0]);
        let p = power_sums_oracle(&f, 2, 5).unwrap();
        for (k, v) in p.iter().enumerate() {
            let expect = 3.0 * 4f64.powi(k as i32 + 1);
            assert!((v - expect).norm() < 1e-9 * expect, "{k}: {v}");
        }
    }

    #[test]
    fn reduction_matches_direct_polynomial_arithmetic() {
        let g: Poly<Dd> = vec![real(2.0), real(-3.0), real(1.0)];
        let a: Poly<Dd> = vec![real(1.0), real(0.0), real(0.0), real(1.0)];
        let r = rem_monic(&a, &g);
        // z^3 + 1 = (z + 3)(z^2 - 3z + 2) + 7z - 5
        assert!((lower(&r[0]) - Complex64::new(-5.0, 0.0)).norm() < 1e-15);
        assert!((lower(&r[1]) - Complex64::new(7.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn budget_is_enforced() {
        let f = map(&[0.0, 0.0, 1.0], &[1.0]);
        assert!(matches!(power_sums_oracle(&f, 8, 3), Err(Error::BudgetExceeded { .. })));
    }
}
