//! Exact bivariate polynomials in the radii (r1, r2) over Q, and their
//! shifted images with coefficients in Q(√2).
//!
//! Terms are kept sparse in a BTreeMap keyed by exponent pairs, with no
//! stored zeros. The text form `c * r1^a * r2^b + ...` is the interchange
//! format used by the CLI and golden files.

use crate::radical::RadicalScalar;
use crate::rat::{format_rat, parse_rat, sign, BigRat};
use crate::sqrt2::Sqrt2Scalar;
use num::traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Graded-lex key: order by total degree, then by r1-exponent.
fn term_order(a: &(u32, u32), b: &(u32, u32)) -> std::cmp::Ordering {
    (a.0 + a.1, a.0).cmp(&(b.0 + b.1, b.0))
}

/// Sparse polynomial Σ c_{αβ} r1^α r2^β with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), BigRat>,
}

impl BivarPoly {
    pub fn zero() -> Self {
        BivarPoly::default()
    }

    pub fn constant(c: BigRat) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(a: u32, b: u32, c: BigRat) -> Self {
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert((a, b), c);
        }
        BivarPoly { terms: t }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u32, BigRat)>) -> Self {
        let mut p = Self::zero();
        for (a, b, c) in terms {
            p.add_term(a, b, c);
        }
        p
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: BigRat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((a, b)).or_insert_with(BigRat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: u32, b: u32) -> BigRat {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(BigRat::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> (u32, u32) {
        let mut d = (0, 0);
        for (a, b) in self.terms.keys() {
            d.0 = d.0.max(*a);
            d.1 = d.1.max(*b);
        }
        d
    }

    pub fn scale(&self, q: &BigRat) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        BivarPoly { terms: self.terms.iter().map(|(k, c)| (*k, c * q)).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), c) in &o.terms {
            out.add_term(*a, *b, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), c) in &o.terms {
            out.add_term(*a, *b, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRat::one())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &o.terms {
                out.add_term(a1 + a2, b1 + b2, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(BigRat::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Swap the roles of r1 and r2.
    pub fn swap_vars(&self) -> Self {
        BivarPoly { terms: self.terms.iter().map(|(&(a, b), c)| ((b, a), c.clone())).collect() }
    }

    /// Exact evaluation at r_b = √(2 k_b); even exponents fold to rationals.
    pub fn radical_eval(&self, k1: u32, k2: u32) -> RadicalScalar {
        let mut acc = RadicalScalar::zero(k1, k2);
        let r1 = RadicalScalar::radius(k1, k2, crate::radical::Factor::One);
        let r2 = RadicalScalar::radius(k1, k2, crate::radical::Factor::Two);
        for ((a, b), c) in &self.terms {
            acc = &acc + &(&r1.pow(*a) * &r2.pow(*b)).scale(c);
        }
        acc
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rat(&self, x: &BigRat, y: &BigRat) -> BigRat {
        let mut acc = BigRat::zero();
        for ((a, b), c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..*a {
                t *= x;
            }
            for _ in 0..*b {
                t *= y;
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| crate::rat::to_f64(c) * x.powi(a as i32) * y.powi(b as i32))
            .sum()
    }

    /// Expand p(s1 + offset, s2 + offset) exactly over Q(√2).
    pub fn shift(&self, offset: &Sqrt2Scalar) -> Sqrt2Poly {
        let embedded = Sqrt2Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, Sqrt2Scalar::from_rat(c.clone())))
                .collect(),
        };
        embedded.shift(offset)
    }

    /// Expand p(s1 + √2, s2 + √2): the change of variable used by the
    /// lower-bound certificate on the shrinker orthant r_b ≥ √2.
    pub fn shift_sqrt2(&self) -> Sqrt2Poly {
        self.shift(&Sqrt2Scalar::sqrt2())
    }

    /// Leading term in graded-lex order.
    fn leading(&self) -> Option<(&(u32, u32), &BigRat)> {
        self.terms.iter().max_by(|x, y| term_order(x.0, y.0))
    }

    /// Exact polynomial division: Some(q) iff self = q * d with zero remainder.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let (dk, dc) = d.leading()?;
        let (dk, dc) = (*dk, dc.clone());
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some((rk, rc)) = rem.leading() {
            if rk.0 < dk.0 || rk.1 < dk.1 {
                return None;
            }
            let qk = (rk.0 - dk.0, rk.1 - dk.1);
            let qc = rc / &dc;
            quot.add_term(qk.0, qk.1, qc.clone());
            rem = rem.sub(&d.mul(&Self::monomial(qk.0, qk.1, qc)));
        }
        Some(quot)
    }

    /// Monomials with strictly negative coefficients and the minimum
    /// coefficient; an empty list certifies coefficient-wise nonnegativity.
    pub fn sign_report(&self) -> SignReport {
        let mut negatives = Vec::new();
        let mut min: Option<((u32, u32), BigRat)> = None;
        for ((a, b), c) in &self.terms {
            if sign(c) < 0 {
                negatives.push(((*a, *b), c.clone()));
            }
            if min.as_ref().map(|(_, m)| c < m).unwrap_or(true) {
                min = Some(((*a, *b), c.clone()));
            }
        }
        SignReport { negatives, min }
    }
}

/// Outcome of a coefficient-sign scan.
#[derive(Clone, Debug)]
pub struct SignReport {
    /// Monomials with strictly negative coefficients.
    pub negatives: Vec<((u32, u32), BigRat)>,
    /// Minimum coefficient and where it occurs (None for the zero polynomial).
    pub min: Option<((u32, u32), BigRat)>,
}

impl SignReport {
    pub fn all_nonnegative(&self) -> bool {
        self.negatives.is_empty()
    }
}

impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Canonical order: descending graded-lex.
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by(|a, b| term_order(b, a));
        for (i, k) in keys.iter().enumerate() {
            let c = &self.terms[k];
            if i == 0 {
                write!(f, "{}", format_rat(c))?;
            } else if c.is_positive() {
                write!(f, " + {}", format_rat(c))?;
            } else {
                write!(f, " - {}", format_rat(&-c.clone()))?;
            }
            if k.0 > 0 {
                write!(f, " * r1^{}", k.0)?;
            }
            if k.1 > 0 {
                write!(f, " * r2^{}", k.1)?;
            }
        }
        Ok(())
    }
}

impl FromStr for BivarPoly {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BivarPoly::zero();
        let s = s.trim();
        if s == "0" {
            return Ok(out);
        }
        // Split on +/- while respecting the leading sign.
        let normalized = s.replace(" - ", " + -");
        for chunk in normalized.split(" + ") {
            let chunk = chunk.trim();
            if chunk.is_empty() {
                continue;
            }
            let mut coeff = BigRat::one();
            let mut e1 = 0u32;
            let mut e2 = 0u32;
            let mut seen_coeff = false;
            for part in chunk.split('*') {
                let part = part.trim();
                if let Some(rest) = part.strip_prefix("r1^") {
                    e1 += rest.trim().parse::<u32>().map_err(|e| e.to_string())?;
                } else if let Some(rest) = part.strip_prefix("r2^") {
                    e2 += rest.trim().parse::<u32>().map_err(|e| e.to_string())?;
                } else if part == "r1" {
                    e1 += 1;
                } else if part == "r2" {
                    e2 += 1;
                } else {
                    if seen_coeff {
                        return Err(format!("multiple coefficients in term {chunk:?}"));
                    }
                    coeff = parse_rat(part)?;
                    seen_coeff = true;
                }
            }
            out.add_term(e1, e2, coeff);
        }
        Ok(out)
    }
}

/// Sparse polynomial in (s1, s2) with coefficients in Q(√2); the image of a
/// `BivarPoly` under the shift r_i = s_i + √2.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct Sqrt2Poly {
    terms: BTreeMap<(u32, u32), Sqrt2Scalar>,
}

impl Sqrt2Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(a: u32, b: u32, c: Sqrt2Scalar) -> Self {
        let mut p = Self::zero();
        p.add_term(a, b, c);
        p
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: Sqrt2Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((a, b)).or_insert_with(Sqrt2Scalar::zero);
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Sqrt2Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: u32, b: u32) -> Sqrt2Scalar {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(Sqrt2Scalar::zero)
    }

    pub fn constant_term(&self) -> Sqrt2Scalar {
        self.coeff(0, 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), c) in &o.terms {
            out.add_term(*a, *b, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), c) in &o.terms {
            out.add_term(*a, *b, -c);
        }
        out
    }

    /// Shift every variable by `offset`, exactly.
    pub fn shift(&self, offset: &Sqrt2Scalar) -> Sqrt2Poly {
        // Binomial expansion per variable; degrees stay <= 12, so the direct
        // double loop is fine.
        let mut out = Sqrt2Poly::zero();
        for ((a, b), c) in &self.terms {
            let pow_a = binomial_powers(*a, offset);
            let pow_b = binomial_powers(*b, offset);
            for (i, ca) in pow_a.iter().enumerate() {
                for (j, cb) in pow_b.iter().enumerate() {
                    out.add_term(i as u32, j as u32, &(ca * cb) * c);
                }
            }
        }
        out
    }

    /// Evaluate at s1 = s2 = 0: the constant term.
    pub fn eval_at_zero(&self) -> Sqrt2Scalar {
        self.constant_term()
    }

    /// Drop the √2 parts; valid only when they all vanish.
    pub fn try_into_bivar(&self) -> Option<BivarPoly> {
        let mut out = BivarPoly::zero();
        for ((a, b), c) in &self.terms {
            if !c.b.is_zero() {
                return None;
            }
            out.add_term(*a, *b, c.a.clone());
        }
        Some(out)
    }

    /// Negative-coefficient scan with exact sign decisions.
    pub fn sign_report(&self) -> Sqrt2SignReport {
        let mut negatives = Vec::new();
        let mut min: Option<((u32, u32), Sqrt2Scalar)> = None;
        for ((a, b), c) in &self.terms {
            if c.sign() < 0 {
                negatives.push(((*a, *b), c.clone()));
            }
            let smaller = match &min {
                Some((_, m)) => (c - m).sign() < 0,
                None => true,
            };
            if smaller {
                min = Some(((*a, *b), c.clone()));
            }
        }
        Sqrt2SignReport { negatives, min }
    }
}

/// Sign scan over Q(√2) coefficients.
#[derive(Clone, Debug)]
pub struct Sqrt2SignReport {
    pub negatives: Vec<((u32, u32), Sqrt2Scalar)>,
    pub min: Option<((u32, u32), Sqrt2Scalar)>,
}

impl Sqrt2SignReport {
    pub fn all_nonnegative(&self) -> bool {
        self.negatives.is_empty()
    }
}

impl fmt::Display for Sqrt2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by(|a, b| term_order(b, a));
        for (i, k) in keys.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", self.terms[k])?;
            if k.0 > 0 {
                write!(f, " * s1^{}", k.0)?;
            }
            if k.1 > 0 {
                write!(f, " * s2^{}", k.1)?;
            }
        }
        Ok(())
    }
}

/// Coefficients of (s + offset)^n as polynomials in s: entry i is the
/// coefficient of s^i, i.e. C(n, i) offset^(n-i).
fn binomial_powers(n: u32, offset: &Sqrt2Scalar) -> Vec<Sqrt2Scalar> {
    let mut binom = BigRat::one();
    let mut out = vec![Sqrt2Scalar::zero(); n as usize + 1];
    for i in 0..=n {
        // binom = C(n, i)
        let c = Sqrt2Scalar::from_rat(binom.clone());
        out[i as usize] = &c * &offset.pow(n - i);
        if i < n {
            binom = binom * BigRat::new((n - i).into(), (i + 1).into());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn radical_eval_examples() {
        // r1^2 at k1 = 1 is the pure rational 2.
        let p = BivarPoly::monomial(2, 0, int(1));
        let v = p.radical_eval(1, 3);
        assert!(v.is_rational());
        assert_eq!(v.rational_part(), &int(2));
        // r1 r2 at k1 = k2 = 1 folds to the rational 2, and squares to 4.
        let q = BivarPoly::monomial(1, 1, int(1));
        let v = q.radical_eval(1, 1);
        assert_eq!(v.rational_part(), &int(2));
        assert_eq!((&v * &v).rational_part(), &int(4));
        // Generic field keeps the r1 r2 basis element.
        let v = q.radical_eval(1, 3);
        assert!(!v.is_rational());
        assert_eq!((&v * &v).rational_part(), &int(12));
    }

    #[test]
    fn radical_eval_is_ring_homomorphism() {
        let mut state = 0xabcdefu64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 40) % 7) as i64 - 3
        };
        for (k1, k2) in [(1, 1), (1, 2), (2, 3), (3, 5)] {
            for _ in 0..50 {
                let p = BivarPoly::from_terms((0..4).map(|_| {
                    (next().unsigned_abs() as u32 % 4, next().unsigned_abs() as u32 % 4, int(next()))
                }));
                let q = BivarPoly::from_terms((0..4).map(|_| {
                    (next().unsigned_abs() as u32 % 4, next().unsigned_abs() as u32 % 4, int(next()))
                }));
                let lhs = p.mul(&q).radical_eval(k1, k2);
                let rhs = &p.radical_eval(k1, k2) * &q.radical_eval(k1, k2);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn shift_examples() {
        // r1 shifts to s1 + √2.
        let p = BivarPoly::monomial(1, 0, int(1));
        let s = p.shift_sqrt2();
        assert_eq!(s.coeff(1, 0), Sqrt2Scalar::from_rat(int(1)));
        assert_eq!(s.coeff(0, 0), Sqrt2Scalar::sqrt2());
        // r1^2 shifts to s1^2 + 2√2 s1 + 2.
        let p = BivarPoly::monomial(2, 0, int(1));
        let s = p.shift_sqrt2();
        assert_eq!(s.coeff(2, 0), Sqrt2Scalar::from_rat(int(1)));
        assert_eq!(s.coeff(1, 0), Sqrt2Scalar::new(int(0), int(2)));
        assert_eq!(s.coeff(0, 0), Sqrt2Scalar::from_rat(int(2)));
    }

    #[test]
    fn shift_round_trips() {
        let mut state = 99u64;
        let mut next = move || {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            ((state >> 40) % 11) as i64 - 5
        };
        for _ in 0..30 {
            let p = BivarPoly::from_terms((0..5).map(|_| {
                (next().unsigned_abs() as u32 % 5, next().unsigned_abs() as u32 % 5, rat(next(), 1 + next().unsigned_abs() as i64))
            }));
            let shifted = p.shift_sqrt2();
            // Constant term equals the value at r = (√2, √2).
            let at_zero = shifted.eval_at_zero();
            let direct = p.radical_eval(1, 1).as_sqrt2();
            assert_eq!(at_zero, direct);
            // Shifting back by -√2 recovers the original exactly.
            let back = shifted.shift(&-&Sqrt2Scalar::sqrt2());
            assert_eq!(back.try_into_bivar().expect("rational"), p);
        }
    }

    #[test]
    fn shift_is_ring_homomorphism() {
        let p = BivarPoly::from_terms([(2, 1, int(3)), (0, 2, rat(-1, 2))]);
        let q = BivarPoly::from_terms([(1, 1, int(1)), (1, 0, int(-2))]);
        let lhs = p.mul(&q).shift_sqrt2();
        // Multiply the shifted images directly.
        let (sp, sq) = (p.shift_sqrt2(), q.shift_sqrt2());
        let mut rhs = Sqrt2Poly::zero();
        for ((a1, b1), c1) in sp.terms() {
            for ((a2, b2), c2) in sq.terms() {
                rhs.add_term(a1 + a2, b1 + b2, c1 * c2);
            }
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn sign_report_flags_negative_terms() {
        let p = BivarPoly::from_terms([(2, 0, int(1)), (0, 2, int(1))]);
        assert!(p.sign_report().all_nonnegative());
        let q = BivarPoly::from_terms([(7, 5, rat(-1, 3)), (6, 6, int(2))]);
        let rep = q.sign_report();
        assert_eq!(rep.negatives, vec![((7, 5), rat(-1, 3))]);
        assert_eq!(rep.min.unwrap().1, rat(-1, 3));
    }

    #[test]
    fn text_form_round_trips() {
        let p = BivarPoly::from_terms([(9, 3, int(1)), (7, 5, rat(-1, 3)), (0, 0, int(4))]);
        let s = p.to_string();
        assert_eq!(s, "1 * r1^9 * r2^3 - 1/3 * r1^7 * r2^5 + 4");
        let back: BivarPoly = s.parse().unwrap();
        assert_eq!(back, p);
        assert_eq!("0".parse::<BivarPoly>().unwrap(), BivarPoly::zero());
    }

    #[test]
    fn exact_division() {
        let d = BivarPoly::from_terms([(2, 0, int(1)), (0, 0, int(2))]); // r1^2 + 2
        let q = BivarPoly::from_terms([(1, 2, int(3)), (0, 0, rat(1, 2))]);
        let p = d.mul(&q);
        assert_eq!(p.exact_div(&d).unwrap(), q);
        let not_multiple = p.add(&BivarPoly::monomial(0, 1, int(1)));
        assert!(not_multiple.exact_div(&d).is_none());
    }
}
