//! Exact rational functions of the radii (r1, r2).
//!
//! The closed-form obstruction pipeline only ever divides by radii, by the
//! moment denominators (r² + 2 + 4j)/2, and by 1 + 2M₋₂; so denominators
//! stay inside a small multiplicative family. Normalization trial-divides
//! numerator and denominator by that family plus rational content, which is
//! enough for the final results to be recognized as polynomials exactly.

use crate::bivar::BivarPoly;
use crate::rat::{int, BigRat};
use num::traits::{One, Signed, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

fn reduction_basis() -> &'static Vec<BivarPoly> {
    static BASIS: OnceLock<Vec<BivarPoly>> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut v = Vec::new();
        // r1, r2
        v.push(BivarPoly::monomial(1, 0, int(1)));
        v.push(BivarPoly::monomial(0, 1, int(1)));
        // r_b^2 + 2 + 4j for the moment denominators
        for j in 0..4 {
            v.push(BivarPoly::from_terms([(2, 0, int(1)), (0, 0, int(2 + 4 * j))]));
            v.push(BivarPoly::from_terms([(0, 2, int(1)), (0, 0, int(2 + 4 * j))]));
        }
        // r1² r2² + 2 r1² + 2 r2², the cleared form of 1 + 2 M₋₂
        v.push(BivarPoly::from_terms([(2, 2, int(1)), (2, 0, int(2)), (0, 2, int(2))]));
        // 1 + 2 r_b², used by the alternative lower-bound combination
        v.push(BivarPoly::from_terms([(2, 0, int(2)), (0, 0, int(1))]));
        v.push(BivarPoly::from_terms([(0, 2, int(2)), (0, 0, int(1))]));
        v
    })
}

/// num/den pair of exact bivariate polynomials; den is never zero.
#[derive(Clone, Debug)]
pub struct RatFunc {
    pub num: BivarPoly,
    pub den: BivarPoly,
}

impl RatFunc {
    pub fn from_poly(p: BivarPoly) -> Self {
        RatFunc { num: p, den: BivarPoly::constant(BigRat::one()) }
    }

    pub fn from_rat(q: BigRat) -> Self {
        Self::from_poly(BivarPoly::constant(q))
    }

    pub fn zero() -> Self {
        Self::from_rat(BigRat::zero())
    }

    pub fn one() -> Self {
        Self::from_rat(BigRat::one())
    }

    /// r_b as a rational function.
    pub fn radius(f: crate::radical::Factor) -> Self {
        match f {
            crate::radical::Factor::One => Self::from_poly(BivarPoly::monomial(1, 0, int(1))),
            crate::radical::Factor::Two => Self::from_poly(BivarPoly::monomial(0, 1, int(1))),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalized(mut self) -> Self {
        assert!(!self.den.is_zero(), "zero denominator");
        if self.num.is_zero() {
            return Self::zero();
        }
        for f in reduction_basis() {
            loop {
                let (Some(n), Some(d)) = (self.num.exact_div(f), self.den.exact_div(f)) else {
                    break;
                };
                self.num = n;
                self.den = d;
            }
        }
        // Normalize the rational scale: make den's leading coefficient one.
        let lead = self
            .den
            .terms()
            .max_by_key(|((a, b), _)| (a + b, *a))
            .map(|(_, c)| c.clone())
            .unwrap();
        if !lead.is_one() {
            let inv = lead.recip();
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
        self
    }

    pub fn inv(&self) -> Self {
        assert!(!self.num.is_zero(), "division by zero rational function");
        let mut v = RatFunc { num: self.den.clone(), den: self.num.clone() };
        // Keep denominators positively oriented for stable comparisons.
        if v.den.terms().next().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            v.num = v.num.neg();
            v.den = v.den.neg();
        }
        v.normalized()
    }

    /// Structural equality after cross-multiplication: exact.
    pub fn eq_exact(&self, o: &Self) -> bool {
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }

    /// The polynomial this function reduces to, if the denominator divides
    /// the numerator exactly.
    pub fn to_poly(&self) -> Option<BivarPoly> {
        self.num.exact_div(&self.den)
    }

    /// Exact evaluation at the shrinker radii.
    pub fn radical_eval(&self, k1: u32, k2: u32) -> crate::radical::RadicalScalar {
        let n = self.num.radical_eval(k1, k2);
        let d = self.den.radical_eval(k1, k2);
        &n / &d
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, o: &Self) -> bool {
        self.eq_exact(o)
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        RatFunc {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
        .normalized()
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        RatFunc {
            num: self.num.mul(&o.den).sub(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
        .normalized()
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        RatFunc { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }.normalized()
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    fn div(self, o: &RatFunc) -> RatFunc {
        self * &o.inv()
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }
}

impl std::fmt::Display for RatFunc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == BivarPoly::constant(BigRat::one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radical::Factor;
    use crate::rat::rat;

    #[test]
    fn arithmetic_reduces_known_factors() {
        let r1 = RatFunc::radius(Factor::One);
        let r2 = RatFunc::radius(Factor::Two);
        // 1/r1² + 1/r2² = (r1² + r2²) / (r1² r2²)
        let m22 = &(&(&RatFunc::one() / &(&r1 * &r1)) + &(&RatFunc::one() / &(&r2 * &r2)));
        let num_expect = BivarPoly::from_terms([(2, 0, int(1)), (0, 2, int(1))]);
        let den_expect = BivarPoly::monomial(2, 2, int(1));
        assert!(m22.eq_exact(&RatFunc { num: num_expect, den: den_expect }));
        // Multiplying back by r1² r2² recovers a polynomial.
        let cleared = &(*m22).clone() * &RatFunc::from_poly(BivarPoly::monomial(2, 2, int(1)));
        assert_eq!(cleared.to_poly().unwrap(), BivarPoly::from_terms([(2, 0, int(1)), (0, 2, int(1))]));
    }

    #[test]
    fn radical_eval_of_quotients() {
        let r1 = RatFunc::radius(Factor::One);
        let v = &RatFunc::one() / &r1; // 1/r1
        let x = v.radical_eval(1, 2);
        // 1/√2 = √2/2
        assert_eq!(x, crate::radical::RadicalScalar::new(1, 2, [int(0), rat(1, 2), int(0), int(0)]));
    }

    #[test]
    fn division_round_trip() {
        let a = RatFunc::from_poly(BivarPoly::from_terms([(3, 1, int(2)), (0, 0, int(-1))]));
        let b = RatFunc::from_poly(BivarPoly::from_terms([(1, 1, int(1)), (2, 0, int(5))]));
        let q = &a / &b;
        assert!((&q * &b).eq_exact(&a));
    }
}
