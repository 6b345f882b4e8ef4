//! Exact scalars in the quadratic field Q(√2).
//!
//! These carry the coefficients of shifted polynomial expansions, where the
//! change of variable r = s + √2 produces terms `a + b·√2`. Sign decisions
//! are exact: no floating fallback anywhere.

use crate::rat::{format_rat, sign, to_f64, BigRat};
use num::traits::Zero;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// `a + b·√2` with exact rational parts.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Sqrt2Scalar {
    pub a: BigRat,
    pub b: BigRat,
}

impl Sqrt2Scalar {
    pub fn new(a: BigRat, b: BigRat) -> Self {
        Sqrt2Scalar { a, b }
    }

    pub fn from_rat(a: BigRat) -> Self {
        Sqrt2Scalar { a, b: BigRat::zero() }
    }

    pub fn zero() -> Self {
        Self::from_rat(BigRat::zero())
    }

    pub fn sqrt2() -> Self {
        Sqrt2Scalar { a: BigRat::zero(), b: BigRat::from_integer(1.into()) }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign: case split on the signs of `a` and `b`, ties resolved by
    /// comparing a² with 2b². Since √2 is irrational, a² = 2b² only at zero.
    pub fn sign(&self) -> i32 {
        let (sa, sb) = (sign(&self.a), sign(&self.b));
        match (sa, sb) {
            (0, 0) => 0,
            (_, 0) => sa,
            (0, _) => sb,
            _ if sa == sb => sa,
            _ => {
                let d = &self.a * &self.a - BigRat::from_integer(2.into()) * &self.b * &self.b;
                // sa > 0, sb < 0: positive iff a² > 2b²; the mirrored case flips.
                if sa > 0 {
                    sign(&d)
                } else {
                    -sign(&d)
                }
            }
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::from_rat(BigRat::from_integer(1.into()));
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.a) + to_f64(&self.b) * std::f64::consts::SQRT_2
    }
}

impl Add for &Sqrt2Scalar {
    type Output = Sqrt2Scalar;
    fn add(self, o: &Sqrt2Scalar) -> Sqrt2Scalar {
        Sqrt2Scalar { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl Sub for &Sqrt2Scalar {
    type Output = Sqrt2Scalar;
    fn sub(self, o: &Sqrt2Scalar) -> Sqrt2Scalar {
        Sqrt2Scalar { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl Mul for &Sqrt2Scalar {
    type Output = Sqrt2Scalar;
    fn mul(self, o: &Sqrt2Scalar) -> Sqrt2Scalar {
        let two = BigRat::from_integer(2.into());
        Sqrt2Scalar {
            a: &self.a * &o.a + two * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Neg for &Sqrt2Scalar {
    type Output = Sqrt2Scalar;
    fn neg(self) -> Sqrt2Scalar {
        Sqrt2Scalar { a: -self.a.clone(), b: -self.b.clone() }
    }
}

impl fmt::Display for Sqrt2Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", format_rat(&self.a)),
            (true, false) => write!(f, "{}*sqrt2", format_rat(&self.b)),
            (false, false) => write!(f, "{} + {}*sqrt2", format_rat(&self.a), format_rat(&self.b)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn s2(a: (i64, i64), b: (i64, i64)) -> Sqrt2Scalar {
        Sqrt2Scalar::new(rat(a.0, a.1), rat(b.0, b.1))
    }

    #[test]
    fn sign_cases_are_exact() {
        assert_eq!(Sqrt2Scalar::zero().sign(), 0);
        assert_eq!(s2((3, 1), (0, 1)).sign(), 1);
        assert_eq!(s2((0, 1), (-1, 2)).sign(), -1);
        // 3 - 2√2 > 0 (since 9 > 8), and 2√2 - 3 < 0.
        assert_eq!(s2((3, 1), (-2, 1)).sign(), 1);
        assert_eq!(s2((-3, 1), (2, 1)).sign(), -1);
        // 7 - 5√2 < 0 (49 < 50).
        assert_eq!(s2((7, 1), (-5, 1)).sign(), -1);
    }

    #[test]
    fn sign_matches_float_on_random_instances() {
        // Spec invariant: exact sign agrees with floating evaluation, 1000 cases.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 2001) as i64 - 1000
        };
        for _ in 0..1000 {
            let v = s2((next(), 1 + next().unsigned_abs() as i64), (next(), 1 + next().unsigned_abs() as i64));
            let f = v.to_f64();
            if f.abs() > 1e-9 {
                assert_eq!(v.sign(), if f > 0.0 { 1 } else { -1 }, "value {v}");
            } else {
                // Near-zero floats still get a decisive exact answer.
                let _ = v.sign();
            }
        }
    }

    #[test]
    fn field_arithmetic() {
        let x = s2((1, 1), (1, 1)); // 1 + √2
        let y = s2((3, 1), (-1, 1)); // 3 - √2
        assert_eq!(&x * &y, s2((1, 1), (2, 1))); // 3 - √2 + 3√2 - 2 = 1 + 2√2
        assert_eq!(&x + &y, s2((4, 1), (0, 1)));
        assert_eq!(x.pow(2), s2((3, 1), (2, 1)));
    }
}
