//! Binary floating point with a fixed number of mantissa bits, for the rare
//! problems double-double cannot resolve.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_bigint::BigUint;
use num_traits::{Num, One, ToPrimitive, Zero};

/// `(-1)^neg * man * 2^exp`, with `man` holding at most `BITS` bits.
#[derive(Clone, Debug, PartialEq)]
pub struct Mp<const BITS: u64> {
    neg: bool,
    man: BigUint,
    exp: i64,
}

impl<const BITS: u64> Mp<BITS> {
    fn from_parts(neg: bool, man: BigUint, exp: i64) -> Self {
        if man.is_zero() {
            return Self::zero();
        }
        let bits = man.bits();
        if bits <= BITS {
            return Mp { neg, man, exp };
        }
        // round half up on the magnitude
        let shift = bits - BITS;
        let half = BigUint::one() << (shift - 1);
        let man = (man + half) >> shift;
        let exp = exp + shift as i64;
        if man.bits() > BITS {
            return Mp {
                neg,
                man: man >> 1u32,
                exp: exp + 1,
            };
        }
        Mp { neg, man, exp }
    }

    /// Position one past the leading bit, so the value lies in `[2^(t-1), 2^t)`.
    fn top(&self) -> i64 {
        self.exp + self.man.bits() as i64
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 || !x.is_finite() {
            return Self::zero();
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (man, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Self::from_parts(neg, BigUint::from(man), exp)
    }

    pub fn to_f64(&self) -> f64 {
        if self.man.is_zero() {
            return 0.0;
        }
        let bits = self.man.bits();
        let (head, exp) = if bits > 64 {
            let shift = bits - 64;
            ((&self.man >> shift).to_u64().unwrap_or(u64::MAX), self.exp + shift as i64)
        } else {
            (self.man.to_u64().unwrap_or(0), self.exp)
        };
        let mut v = head as f64;
        // scale in steps that stay inside the exponent range
        let mut e = exp;
        while e > 0 {
            let step = e.min(1000);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        while e < 0 {
            let step = e.max(-1000);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        if self.neg {
            -v
        } else {
            v
        }
    }

    fn add_signed(&self, other: &Self, flip: bool) -> Self {
        let other_neg = other.neg ^ flip;
        if self.man.is_zero() {
            return Mp {
                neg: other_neg && !other.man.is_zero(),
                ..other.clone()
            };
        }
        if other.man.is_zero() {
            return self.clone();
        }
        // an addend entirely below the rounding position is dropped
        let gap = self.top() - other.top();
        if gap > BITS as i64 + 2 {
            return self.clone();
        }
        if -gap > BITS as i64 + 2 {
            return Mp {
                neg: other_neg,
                ..other.clone()
            };
        }
        let exp = self.exp.min(other.exp);
        let a = &self.man << (self.exp - exp) as u64;
        let b = &other.man << (other.exp - exp) as u64;
        if self.neg == other_neg {
            return Self::from_parts(self.neg, a + b, exp);
        }
        match a.cmp(&b) {
            Ordering::Equal => Self::zero(),
            Ordering::Greater => Self::from_parts(self.neg, a - b, exp),
            Ordering::Less => Self::from_parts(other_neg, b - a, exp),
        }
    }
}

impl<const BITS: u64> Add for Mp<BITS> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.add_signed(&o, false)
    }
}

impl<const BITS: u64> Sub for Mp<BITS> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.add_signed(&o, true)
    }
}

impl<const BITS: u64> Neg for Mp<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        let neg = !self.neg && !self.man.is_zero();
        Mp { neg, ..self }
    }
}

impl<const BITS: u64> Mul for Mp<BITS> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::from_parts(self.neg ^ o.neg, self.man * o.man, self.exp + o.exp)
    }
}

impl<const BITS: u64> Div for Mp<BITS> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        if o.man.is_zero() {
            panic!("division by zero");
        }
        if self.man.is_zero() {
            return Self::zero();
        }
        let shift = (BITS + 2 + o.man.bits()).saturating_sub(self.man.bits());
        let num = self.man << shift;
        Self::from_parts(self.neg ^ o.neg, num / o.man, self.exp - o.exp - shift as i64)
    }
}

impl<const BITS: u64> Rem for Mp<BITS> {
    type Output = Self;
    fn rem(self, o: Self) -> Self {
        let q = (self.clone() / o.clone()).to_f64().trunc();
        self - o * Self::from_f64(q)
    }
}

impl<const BITS: u64> Zero for Mp<BITS> {
    fn zero() -> Self {
        Mp {
            neg: false,
            man: BigUint::zero(),
            exp: 0,
        }
    }
    fn is_zero(&self) -> bool {
        self.man.is_zero()
    }
}

impl<const BITS: u64> One for Mp<BITS> {
    fn one() -> Self {
        Mp {
            neg: false,
            man: BigUint::one(),
            exp: 0,
        }
    }
}

impl<const BITS: u64> Num for Mp<BITS> {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(Self::from_f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Mp<256>;

    #[test]
    fn f64_round_trip() {
        for x in [1.0, -2.5, 1e-300, 3.0e300, 0.1, -7.25e-5, 5e-324] {
            assert_eq!(M::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn keeps_bits_far_below_double_precision() {
        let tiny = M::from_f64(1e-60);
        let x = (M::from_f64(1.0) + tiny) - M::from_f64(1.0);
        assert_eq!(x.to_f64(), 1e-60);
    }

    #[test]
    fn division_round_trips() {
        let third = M::one() / M::from_f64(3.0);
        let back = third * M::from_f64(3.0) - M::one();
        assert!(back.to_f64().abs() < 1e-75);
    }

    #[test]
    fn signs() {
        let a = M::from_f64(2.0);
        let b = M::from_f64(-3.0);
        assert_eq!((a.clone() + b.clone()).to_f64(), -1.0);
        assert_eq!((a.clone() - b.clone()).to_f64(), 5.0);
        assert_eq!((a.clone() * b.clone()).to_f64(), -6.0);
        assert_eq!((b / a).to_f64(), -1.5);
        assert!((M::from_f64(1.5) - M::from_f64(1.5)).is_zero());
    }
}
