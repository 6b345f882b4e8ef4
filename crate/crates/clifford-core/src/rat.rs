//! Arbitrary-precision rational scalars.
//!
//! All exact computation in this crate bottoms out in `BigRat`, a reduced
//! fraction of `BigInt`s. Arithmetic never rounds.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};
use std::str::FromStr;

/// Exact rational number. Always stored reduced with positive denominator.
pub type BigRat = BigRational;

/// Shorthand for a rational from an integer pair.
pub fn rat(n: i64, d: i64) -> BigRat {
    BigRat::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for an integer rational.
pub fn int(n: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(n))
}

/// Exact double factorial n!! = n (n-2) (n-4) ..., with 0!! = (-1)!! = 1.
pub fn double_factorial(n: u64) -> BigInt {
    let mut acc = BigInt::from(1);
    let mut k = n;
    while k > 1 {
        acc *= BigInt::from(k);
        k -= 2;
    }
    acc
}

/// Sign of a rational as -1, 0, or 1.
pub fn sign(q: &BigRat) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// Lossy conversion for the floating-point oracle.
pub fn to_f64(q: &BigRat) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of lossy parts for extreme magnitudes.
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parse `p/q` or a plain integer; used for CLI coefficient lists.
pub fn parse_rat(s: &str) -> Result<BigRat, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|e| format!("bad numerator {n:?}: {e}"))?;
            let d = BigInt::from_str(d.trim()).map_err(|e| format!("bad denominator {d:?}: {e}"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(BigRat::new(n, d))
        }
        None => {
            let n = BigInt::from_str(s).map_err(|e| format!("bad rational {s:?}: {e}"))?;
            Ok(BigRat::from_integer(n))
        }
    }
}

/// Render as `p/q` (or `p` when integral); inverse of [`parse_rat`].
pub fn format_rat(q: &BigRat) -> String {
    if q.denom() == &BigInt::from(1) {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Best rational approximation of `x` by continued fractions, used to snap
/// singular values back into the exact layer.
pub fn snap_to_rational(x: f64, tol: f64) -> BigRat {
    assert!(x.is_finite(), "cannot snap non-finite value");
    let negative = x < 0.0;
    let x = x.abs();
    let (mut h0, mut h1) = (BigInt::from(1), BigInt::from(x.floor() as i64));
    let (mut k0, mut k1) = (BigInt::from(0), BigInt::from(1));
    let mut frac = x.fract();
    for _ in 0..64 {
        let approx = BigRat::new(h1.clone(), k1.clone());
        if (to_f64(&approx) - x).abs() <= tol {
            break;
        }
        if frac.abs() < 1e-18 {
            break;
        }
        let r = 1.0 / frac;
        let a = BigInt::from(r.floor() as i64);
        frac = r.fract();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
    }
    let q = BigRat::new(h1, k1);
    if negative {
        -q
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7/5", "12", "-3", "0"] {
            let q = parse_rat(s).unwrap();
            assert_eq!(format_rat(&q), s);
        }
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        // Non-canonical input parses to reduced form.
        assert_eq!(format_rat(&parse_rat("2/4").unwrap()), "1/2");
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(0), BigInt::from(1));
        assert_eq!(double_factorial(1), BigInt::from(1));
        assert_eq!(double_factorial(3), BigInt::from(3));
        assert_eq!(double_factorial(5), BigInt::from(15));
        assert_eq!(double_factorial(7), BigInt::from(105));
        assert_eq!(double_factorial(8), BigInt::from(384));
    }

    #[test]
    fn snap_recovers_simple_fractions() {
        assert_eq!(snap_to_rational(0.5, 1e-12), rat(1, 2));
        assert_eq!(snap_to_rational(-2.0 / 3.0, 1e-12), rat(-2, 3));
        assert_eq!(snap_to_rational(3.0, 1e-12), int(3));
    }
}
