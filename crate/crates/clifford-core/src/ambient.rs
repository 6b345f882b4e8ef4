//! Sparse polynomials in the ambient coordinates of a sphere product.
//!
//! Monomials carry one exponent list per factor (x over the first sphere's
//! R^{k1+1}, y over the second's R^{k2+1}). The coefficient ring is generic:
//! the moment layer instantiates rationals, the field calculus instantiates
//! radical scalars.

use crate::rat::BigRat;
use crate::radical::RadicalScalar;
use num::traits::Zero;
use std::collections::BTreeMap;
use std::fmt::Debug;

/// Minimal ring interface for polynomial coefficients. No zero constructor:
/// the sparse representation never materializes zeros, so all operations are
/// merge-based.
pub trait CoeffRing: Clone + PartialEq + Debug {
    fn is_zero(&self) -> bool;
    fn add_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn mul_rat(&self, q: &BigRat) -> Self;
}

impl CoeffRing for BigRat {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_ref(&self) -> Self {
        -self.clone()
    }
    fn mul_rat(&self, q: &BigRat) -> Self {
        self * q
    }
}

impl CoeffRing for RadicalScalar {
    fn is_zero(&self) -> bool {
        RadicalScalar::is_zero(self)
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn mul_rat(&self, q: &BigRat) -> Self {
        self.scale(q)
    }
}

/// Exponent pair: one list per factor, fixed lengths within a polynomial.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Mono {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
}

impl Mono {
    pub fn unit(nx: usize, ny: usize) -> Self {
        Mono { x: vec![0; nx], y: vec![0; ny] }
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        Mono {
            x: self.x.iter().zip(&o.x).map(|(a, b)| a + b).collect(),
            y: self.y.iter().zip(&o.y).map(|(a, b)| a + b).collect(),
        }
    }

    /// Total degree in the given factor.
    pub fn factor_degree(&self, f: crate::radical::Factor) -> u32 {
        let v = match f {
            crate::radical::Factor::One => &self.x,
            crate::radical::Factor::Two => &self.y,
        };
        v.iter().map(|&e| e as u32).sum()
    }
}

/// Sparse multivariate polynomial with generic coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<C: CoeffRing> {
    pub nx: usize,
    pub ny: usize,
    terms: BTreeMap<Mono, C>,
}

impl<C: CoeffRing> Poly<C> {
    pub fn zero(nx: usize, ny: usize) -> Self {
        Poly { nx, ny, terms: BTreeMap::new() }
    }

    pub fn monomial(nx: usize, ny: usize, m: Mono, c: C) -> Self {
        let mut p = Self::zero(nx, ny);
        p.add_term(m, c);
        p
    }

    pub fn constant(nx: usize, ny: usize, c: C) -> Self {
        Self::monomial(nx, ny, Mono::unit(nx, ny), c)
    }

    pub fn add_term(&mut self, m: Mono, c: C) {
        debug_assert!(m.x.len() == self.nx && m.y.len() == self.ny, "monomial arity mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                let sum = e.add_ref(&c);
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *e = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.neg_ref());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly {
            nx: self.nx,
            ny: self.ny,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg_ref())).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.nx, self.ny);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1.mul_ref(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nx, self.ny);
        }
        Poly {
            nx: self.nx,
            ny: self.ny,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k.mul_ref(c))).collect(),
        }
    }

    pub fn scale_rat(&self, q: &BigRat) -> Self {
        if Zero::is_zero(q) {
            return Self::zero(self.nx, self.ny);
        }
        Poly {
            nx: self.nx,
            ny: self.ny,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k.mul_rat(q))).collect(),
        }
    }

    /// Partial derivative with respect to one ambient variable.
    /// `var` indexes x-variables first, then y-variables.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nx, self.ny);
        for (m, c) in &self.terms {
            let e = if var < self.nx { m.x[var] } else { m.y[var - self.nx] };
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            if var < self.nx {
                m2.x[var] -= 1;
            } else {
                m2.y[var - self.nx] -= 1;
            }
            out.add_term(m2, c.mul_rat(&BigRat::from_integer((e as i64).into())));
        }
        out
    }

    /// Max degree per factor over all terms.
    pub fn factor_degrees(&self) -> (u32, u32) {
        let mut d = (0, 0);
        for m in self.terms.keys() {
            d.0 = d.0.max(m.factor_degree(crate::radical::Factor::One));
            d.1 = d.1.max(m.factor_degree(crate::radical::Factor::Two));
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    fn xi(nx: usize, ny: usize, i: usize) -> Poly<BigRat> {
        let mut m = Mono::unit(nx, ny);
        m.x[i] = 1;
        Poly::monomial(nx, ny, m, int(1))
    }

    #[test]
    fn distributivity() {
        let a = xi(3, 2, 0);
        let b = xi(3, 2, 1);
        let c = xi(3, 2, 2);
        let lhs = a.add(&b).mul(&c);
        let rhs = a.mul(&c).add(&b.mul(&c));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivative_of_product() {
        // d/dx0 (x0^2 x1) = 2 x0 x1
        let p = xi(2, 1, 0).mul(&xi(2, 1, 0)).mul(&xi(2, 1, 1));
        let d = p.derivative(0);
        let expect = xi(2, 1, 0).mul(&xi(2, 1, 1)).scale_rat(&int(2));
        assert_eq!(d, expect);
    }
}
