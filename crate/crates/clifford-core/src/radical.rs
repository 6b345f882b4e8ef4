//! Exact scalars in the radical field Q(r1, r2) with r_b² = 2·k_b.
//!
//! Values are stored on the basis {1, r1, r2, r1·r2} with rational
//! coefficients. Because 2k or 4k1k2 can be perfect squares (r2 = 2 when
//! k2 = 2, or r1·r2 = 2 when k1 = k2 = 1), the raw representation is not
//! unique; constructors canonicalize by folding every rational radical into
//! the rational part, so equality is componentwise and signs are decidable
//! by nested square comparison.

use crate::rat::{format_rat, sign as rsign, to_f64, BigRat};
use crate::sqrt2::Sqrt2Scalar;
use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};
use serde::Serialize;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Which sphere factor a radius index refers to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Factor {
    One,
    Two,
}

impl Factor {
    pub const BOTH: [Factor; 2] = [Factor::One, Factor::Two];

    pub fn other(self) -> Factor {
        match self {
            Factor::One => Factor::Two,
            Factor::Two => Factor::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Factor::One => 0,
            Factor::Two => 1,
        }
    }
}

fn exact_sqrt(n: u64) -> Option<u64> {
    let r = (n as f64).sqrt().round() as u64;
    for c in r.saturating_sub(1)..=r + 1 {
        if c * c == n {
            return Some(c);
        }
    }
    None
}

/// Element of Q(√(2k1), √(2k2)), canonicalized.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RadicalScalar {
    pub k1: u32,
    pub k2: u32,
    /// Coefficients on {1, r1, r2, r1 r2}, canonical (degenerate radicals folded).
    pub c: [BigRat; 4],
}

impl RadicalScalar {
    pub fn new(k1: u32, k2: u32, c: [BigRat; 4]) -> Self {
        let mut v = RadicalScalar { k1, k2, c };
        v.canonicalize();
        v
    }

    pub fn zero(k1: u32, k2: u32) -> Self {
        Self::new(k1, k2, [BigRat::zero(), BigRat::zero(), BigRat::zero(), BigRat::zero()])
    }

    pub fn one(k1: u32, k2: u32) -> Self {
        Self::from_rat(k1, k2, BigRat::one())
    }

    pub fn from_rat(k1: u32, k2: u32, q: BigRat) -> Self {
        Self::new(k1, k2, [q, BigRat::zero(), BigRat::zero(), BigRat::zero()])
    }

    pub fn from_int(k1: u32, k2: u32, n: i64) -> Self {
        Self::from_rat(k1, k2, BigRat::from_integer(n.into()))
    }

    /// The radius r_b = √(2 k_b).
    pub fn radius(k1: u32, k2: u32, f: Factor) -> Self {
        let mut c = [BigRat::zero(), BigRat::zero(), BigRat::zero(), BigRat::zero()];
        c[1 + f.index()] = BigRat::one();
        Self::new(k1, k2, c)
    }

    /// 1/r_b = r_b/(2 k_b), exact.
    pub fn inv_radius(k1: u32, k2: u32, f: Factor) -> Self {
        let kb = match f {
            Factor::One => k1,
            Factor::Two => k2,
        };
        let mut c = [BigRat::zero(), BigRat::zero(), BigRat::zero(), BigRat::zero()];
        c[1 + f.index()] = BigRat::new(BigInt::one(), BigInt::from(2 * kb as i64));
        Self::new(k1, k2, c)
    }

    fn ctx(&self) -> (u32, u32) {
        (self.k1, self.k2)
    }

    fn canonicalize(&mut self) {
        let s1 = exact_sqrt(2 * self.k1 as u64);
        let s2 = exact_sqrt(2 * self.k2 as u64);
        if let Some(m) = s1 {
            // r1 is the integer m: fold r1 -> m and r1 r2 -> m r2.
            let m = BigRat::from_integer(BigInt::from(m));
            let c1 = std::mem::take(&mut self.c[1]);
            let c3 = std::mem::take(&mut self.c[3]);
            self.c[0] += &m * c1;
            self.c[2] += &m * c3;
        }
        if let Some(m) = s2 {
            let m = BigRat::from_integer(BigInt::from(m));
            let c2 = std::mem::take(&mut self.c[2]);
            let c3 = std::mem::take(&mut self.c[3]);
            self.c[0] += &m * c2;
            self.c[1] += &m * c3;
        }
        if s1.is_none() && s2.is_none() {
            if let Some(m) = exact_sqrt(4 * self.k1 as u64 * self.k2 as u64) {
                // r1 r2 = m, and r2 = (m / 2k1) r1: collapse to the basis {1, r1}.
                let m = BigRat::from_integer(BigInt::from(m));
                let ratio = &m / BigRat::from_integer(BigInt::from(2 * self.k1 as i64));
                let c2 = std::mem::take(&mut self.c[2]);
                let c3 = std::mem::take(&mut self.c[3]);
                self.c[0] += &m * c3;
                self.c[1] += ratio * c2;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|q| q.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.c[1..].iter().all(|q| q.is_zero())
    }

    /// The rational part; total value if `is_rational`.
    pub fn rational_part(&self) -> &BigRat {
        &self.c[0]
    }

    pub fn scale(&self, q: &BigRat) -> Self {
        Self::new(
            self.k1,
            self.k2,
            [&self.c[0] * q, &self.c[1] * q, &self.c[2] * q, &self.c[3] * q],
        )
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.k1, self.k2);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact sign via nested square comparisons. Writing the value as
    /// A + B·r2 with A, B ∈ Q(r1), the sign reduces to two-term sign rules
    /// and one comparison of A² against 2k2·B² inside Q(r1).
    pub fn sign(&self) -> i32 {
        // Two-term helper for a + b·√m where √m is known irrational.
        fn sign2(a: &BigRat, b: &BigRat, m: u64) -> i32 {
            match (rsign(a), rsign(b)) {
                (0, 0) => 0,
                (sa, 0) => sa,
                (0, sb) => sb,
                (sa, sb) if sa == sb => sa,
                (sa, _) => {
                    let d = a * a - BigRat::from_integer(BigInt::from(m)) * b * b;
                    if sa > 0 {
                        rsign(&d)
                    } else {
                        -rsign(&d)
                    }
                }
            }
        }
        let alpha = 2 * self.k1 as u64;
        let beta = 2 * self.k2 as u64;
        let a_zero = self.c[0].is_zero() && self.c[1].is_zero();
        let b_zero = self.c[2].is_zero() && self.c[3].is_zero();
        if b_zero {
            return sign2(&self.c[0], &self.c[1], alpha);
        }
        if a_zero {
            return sign2(&self.c[2], &self.c[3], alpha);
        }
        let sa = sign2(&self.c[0], &self.c[1], alpha);
        let sb = sign2(&self.c[2], &self.c[3], alpha);
        if sa == sb {
            return sa;
        }
        // Compare A² with beta·B² in Q(r1). Equality is impossible in the
        // canonical (genuinely biquadratic) case, since √beta ∉ Q(r1).
        let beta_q = BigRat::from_integer(BigInt::from(beta));
        let alpha_q = BigRat::from_integer(BigInt::from(alpha));
        // A² = (c0² + alpha c1²) + 2 c0 c1 r1, B² likewise.
        let a2_rat = &self.c[0] * &self.c[0] + &alpha_q * &self.c[1] * &self.c[1];
        let a2_rad = BigRat::from_integer(2.into()) * &self.c[0] * &self.c[1];
        let b2_rat = &self.c[2] * &self.c[2] + &alpha_q * &self.c[3] * &self.c[3];
        let b2_rad = BigRat::from_integer(2.into()) * &self.c[2] * &self.c[3];
        let d_rat = a2_rat - &beta_q * b2_rat;
        let d_rad = a2_rad - &beta_q * b2_rad;
        let sd = sign2(&d_rat, &d_rad, alpha);
        if sa > 0 {
            sd
        } else {
            -sd
        }
    }

    /// Exact multiplicative inverse. Panics on zero (callers guard).
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero radical scalar");
        // After canonicalization at most one independent radical remains in
        // the degenerate cases, so handle rational, quadratic and biquadratic
        // shapes separately.
        if self.is_rational() {
            return Self::from_rat(self.k1, self.k2, self.c[0].recip());
        }
        let quad_inv = |a: &BigRat, b: &BigRat, m: u64| -> (BigRat, BigRat) {
            let m = BigRat::from_integer(BigInt::from(m));
            let d = a * a - &m * b * b;
            (a / &d, -(b / &d))
        };
        let zero = BigRat::zero();
        if self.c[2].is_zero() && self.c[3].is_zero() {
            let (a, b) = quad_inv(&self.c[0], &self.c[1], 2 * self.k1 as u64);
            return Self::new(self.k1, self.k2, [a, b, zero.clone(), zero]);
        }
        if self.c[1].is_zero() && self.c[3].is_zero() {
            let (a, b) = quad_inv(&self.c[0], &self.c[2], 2 * self.k2 as u64);
            return Self::new(self.k1, self.k2, [a, zero.clone(), b, zero]);
        }
        // Genuine biquadratic field: the four sign-flip conjugates are the
        // Galois orbit, and their product is the (nonzero) field norm.
        let conj1 = Self {
            k1: self.k1,
            k2: self.k2,
            c: [self.c[0].clone(), -self.c[1].clone(), self.c[2].clone(), -self.c[3].clone()],
        };
        let conj2 = Self {
            k1: self.k1,
            k2: self.k2,
            c: [self.c[0].clone(), self.c[1].clone(), -self.c[2].clone(), -self.c[3].clone()],
        };
        let conj12 = Self {
            k1: self.k1,
            k2: self.k2,
            c: [self.c[0].clone(), -self.c[1].clone(), -self.c[2].clone(), self.c[3].clone()],
        };
        let adj = &(&conj1 * &conj2) * &conj12;
        let norm = self * &adj;
        debug_assert!(norm.is_rational(), "field norm must be rational");
        adj.scale(&norm.c[0].recip())
    }

    pub fn to_f64(&self) -> f64 {
        let r1 = (2.0 * self.k1 as f64).sqrt();
        let r2 = (2.0 * self.k2 as f64).sqrt();
        to_f64(&self.c[0]) + to_f64(&self.c[1]) * r1 + to_f64(&self.c[2]) * r2 + to_f64(&self.c[3]) * r1 * r2
    }

    /// View as `a + b·√2`; only valid in contexts where the canonical basis
    /// is {1, √2} (e.g. k1 = k2 = 1). Panics otherwise.
    pub fn as_sqrt2(&self) -> Sqrt2Scalar {
        assert!(
            self.c[2].is_zero() && self.c[3].is_zero(),
            "radical value {self} does not live in a single quadratic extension"
        );
        assert_eq!(2 * self.k1, 2, "as_sqrt2 requires r1 = sqrt(2)");
        Sqrt2Scalar::new(self.c[0].clone(), self.c[1].clone())
    }
}

/// Serialized form used by every CLI report: exact rational strings on the
/// canonical basis.
#[derive(Serialize)]
pub struct RadicalJson {
    pub rational: String,
    pub coeff_r1: String,
    pub coeff_r2: String,
    pub coeff_r1r2: String,
}

impl RadicalScalar {
    pub fn to_json(&self) -> RadicalJson {
        RadicalJson {
            rational: format_rat(&self.c[0]),
            coeff_r1: format_rat(&self.c[1]),
            coeff_r2: format_rat(&self.c[2]),
            coeff_r1r2: format_rat(&self.c[3]),
        }
    }
}

macro_rules! ctx_check {
    ($a:expr, $b:expr) => {
        assert_eq!($a.ctx(), $b.ctx(), "mixed radical field contexts");
    };
}

impl Add for &RadicalScalar {
    type Output = RadicalScalar;
    fn add(self, o: &RadicalScalar) -> RadicalScalar {
        ctx_check!(self, o);
        RadicalScalar::new(
            self.k1,
            self.k2,
            [&self.c[0] + &o.c[0], &self.c[1] + &o.c[1], &self.c[2] + &o.c[2], &self.c[3] + &o.c[3]],
        )
    }
}

impl Sub for &RadicalScalar {
    type Output = RadicalScalar;
    fn sub(self, o: &RadicalScalar) -> RadicalScalar {
        ctx_check!(self, o);
        RadicalScalar::new(
            self.k1,
            self.k2,
            [&self.c[0] - &o.c[0], &self.c[1] - &o.c[1], &self.c[2] - &o.c[2], &self.c[3] - &o.c[3]],
        )
    }
}

impl Mul for &RadicalScalar {
    type Output = RadicalScalar;
    fn mul(self, o: &RadicalScalar) -> RadicalScalar {
        ctx_check!(self, o);
        let a1 = BigRat::from_integer(BigInt::from(2 * self.k1 as i64));
        let a2 = BigRat::from_integer(BigInt::from(2 * self.k2 as i64));
        let x = &self.c;
        let y = &o.c;
        let c0 = &x[0] * &y[0] + &a1 * &x[1] * &y[1] + &a2 * &x[2] * &y[2] + &a1 * &a2 * &x[3] * &y[3];
        let c1 = &x[0] * &y[1] + &x[1] * &y[0] + &a2 * (&x[2] * &y[3] + &x[3] * &y[2]);
        let c2 = &x[0] * &y[2] + &x[2] * &y[0] + &a1 * (&x[1] * &y[3] + &x[3] * &y[1]);
        let c3 = &x[0] * &y[3] + &x[3] * &y[0] + &x[1] * &y[2] + &x[2] * &y[1];
        RadicalScalar::new(self.k1, self.k2, [c0, c1, c2, c3])
    }
}

impl Div for &RadicalScalar {
    type Output = RadicalScalar;
    fn div(self, o: &RadicalScalar) -> RadicalScalar {
        self * &o.inv()
    }
}

impl Neg for &RadicalScalar {
    type Output = RadicalScalar;
    fn neg(self) -> RadicalScalar {
        RadicalScalar {
            k1: self.k1,
            k2: self.k2,
            c: [-self.c[0].clone(), -self.c[1].clone(), -self.c[2].clone(), -self.c[3].clone()],
        }
    }
}

impl fmt::Display for RadicalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "*r1", "*r2", "*r1r2"];
        let mut first = true;
        for (q, n) in self.c.iter().zip(names) {
            if q.is_zero() {
                continue;
            }
            if first {
                write!(f, "{}{}", format_rat(q), n)?;
                first = false;
            } else if q.is_positive() {
                write!(f, " + {}{}", format_rat(q), n)?;
            } else {
                write!(f, " - {}{}", format_rat(&-q.clone()), n)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
