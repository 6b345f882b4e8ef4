//! Closed-form integrals of coordinate monomials over round spheres and
//! sphere products, normalized by total measure.
//!
//! For an all-even exponent list b on S^k(r) the normalized moment is
//!
//!   (1/|S^k(r)|) ∫ Π x_i^{b_i}  =  r^{|b|} · Π (b_i - 1)!!  /  Π_{j<|b|/2} (k + 1 + 2j)
//!
//! and it vanishes whenever any b_i is odd. Product moments multiply across
//! factors. Everything is exact; the Monte-Carlo estimator at the bottom is
//! the independent numerical oracle.

use crate::ambient::{Mono, Poly};
use crate::bivar::BivarPoly;
use crate::error::EngineError;
use crate::exec::Pool;
use crate::rat::{double_factorial, int, BigRat};
use num::bigint::BigInt;
use num::traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Per-factor exponent lists of a coordinate monomial on the product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialExp {
    pub b1: Vec<u32>,
    pub b2: Vec<u32>,
}

impl MonomialExp {
    pub fn new(b1: Vec<u32>, b2: Vec<u32>) -> Self {
        MonomialExp { b1, b2 }
    }
}

/// A normalized moment: rational coefficient times r1^α r2^β, stored without
/// the |Σ| factor.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedMoment {
    pub value: BivarPoly,
}

impl NormalizedMoment {
    pub fn zero() -> Self {
        NormalizedMoment { value: BivarPoly::zero() }
    }
}

/// Normalized single-factor moment (1/|S^k(r)|)·∫ Π x_i^{b_i} as an exact
/// rational times r^{|b|}; zero if any exponent is odd.
pub fn factor_moment(k: u32, b: &[u32]) -> Result<NormalizedMoment, EngineError> {
    if b.len() > k as usize + 1 {
        return Err(EngineError::DimensionMismatch(format!(
            "exponent list of length {} on S^{k} (needs <= {})",
            b.len(),
            k + 1
        )));
    }
    if b.iter().any(|e| e % 2 == 1) {
        return Ok(NormalizedMoment::zero());
    }
    let total: u32 = b.iter().sum();
    let m = total / 2;
    let mut numer = BigInt::one();
    for &e in b {
        numer *= double_factorial((e as u64).saturating_sub(1));
    }
    let mut denom = BigInt::one();
    for j in 0..m {
        denom *= BigInt::from(k as u64 + 1 + 2 * j as u64);
    }
    let coeff = BigRat::new(numer, denom);
    Ok(NormalizedMoment { value: BivarPoly::monomial(total, 0, coeff) })
}

/// Normalized product moment: factor moments multiply. The r-power of the
/// second factor is tracked on the r2 axis.
pub fn product_moment(m: &MonomialExp, k1: u32, k2: u32) -> Result<NormalizedMoment, EngineError> {
    let f1 = factor_moment(k1, &m.b1)?;
    let f2 = factor_moment(k2, &m.b2)?;
    // factor_moment reports powers on the r1 axis; move the second factor's.
    let f2_on_r2 = f2.value.swap_vars();
    Ok(NormalizedMoment { value: f1.value.mul(&f2_on_r2) })
}

/// Convenience: normalized moment of a monomial given by u8 exponents.
pub fn mono_moment(m: &Mono, k1: u32, k2: u32) -> Result<NormalizedMoment, EngineError> {
    let exp = MonomialExp::new(
        m.x.iter().map(|&e| e as u32).collect(),
        m.y.iter().map(|&e| e as u32).collect(),
    );
    product_moment(&exp, k1, k2)
}

/// Exact normalized integral of a rational ambient polynomial over the
/// product, as a polynomial in the radii.
pub fn integrate_poly(p: &Poly<BigRat>, k1: u32, k2: u32) -> Result<BivarPoly, EngineError> {
    let mut acc = BivarPoly::zero();
    for (m, c) in p.terms() {
        let mm = mono_moment(m, k1, k2)?;
        acc = acc.add(&mm.value.scale(c));
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Nine-integral verification table
// ---------------------------------------------------------------------------

/// One row of the verification table.
#[derive(Clone, Debug, Serialize)]
pub struct SphintRow {
    pub integral: String,
    pub printed_value: String,
    pub computed_value: String,
    pub pass: bool,
}

/// Report for the nine-integral table at one (k1, k2, a).
#[derive(Clone, Debug, Serialize)]
pub struct SphintReport {
    pub k1: u32,
    pub k2: u32,
    pub a: Vec<String>,
    pub rows: Vec<SphintRow>,
}

impl SphintReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Power sums of the coefficient vector used by the closed forms.
fn power_sums(a: &[BigRat]) -> (BigRat, BigRat, BigRat) {
    let s2: BigRat = a.iter().map(|x| x * x).fold(BigRat::zero(), |acc, v| acc + v);
    let s4: BigRat = a.iter().map(|x| x * x * x * x).fold(BigRat::zero(), |acc, v| acc + v);
    // T = Σ_{i<j} a_i² a_j² = (S2² - S4)/2
    let t = (&s2 * &s2 - &s4) / BigRat::from_integer(2.into());
    (s2, s4, t)
}

/// Build u = Σ a_i x_i y_i as an ambient polynomial.
pub fn u_poly(a: &[BigRat], k1: u32, k2: u32) -> Poly<BigRat> {
    let (nx, ny) = (k1 as usize + 1, k2 as usize + 1);
    let mut p = Poly::zero(nx, ny);
    for (i, ai) in a.iter().enumerate() {
        let mut m = Mono::unit(nx, ny);
        m.x[i] = 1;
        m.y[i] = 1;
        p.add_term(m, ai.clone());
    }
    p
}

/// Build v_b = Σ a_i² (factor coordinate)_i².
pub fn v_poly(a: &[BigRat], k1: u32, k2: u32, factor: crate::radical::Factor) -> Poly<BigRat> {
    let (nx, ny) = (k1 as usize + 1, k2 as usize + 1);
    let mut p = Poly::zero(nx, ny);
    for (i, ai) in a.iter().enumerate() {
        let mut m = Mono::unit(nx, ny);
        match factor {
            crate::radical::Factor::One => m.x[i] = 2,
            crate::radical::Factor::Two => m.y[i] = 2,
        }
        p.add_term(m, ai * ai);
    }
    p
}

/// The closed forms of the nine integrals, normalized by |Σ|.
pub fn closed_form_table(k1: u32, k2: u32, a: &[BigRat]) -> [(String, BivarPoly); 9] {
    let (s2, s4, t) = power_sums(a);
    let kp = |k: u32, j: u32| BigRat::from_integer(BigInt::from(k as u64 + 1 + 2 * j as u64));
    let three = int(3);
    let two = int(2);
    let six = int(6);
    let nine = int(9);

    let v1 = BivarPoly::monomial(2, 0, &s2 / kp(k1, 0));
    let v2 = BivarPoly::monomial(0, 2, &s2 / kp(k2, 0));
    let v1v1 = BivarPoly::monomial(4, 0, (&three * &s4 + &two * &t) / (kp(k1, 0) * kp(k1, 1)));
    let v2v2 = BivarPoly::monomial(0, 4, (&three * &s4 + &two * &t) / (kp(k2, 0) * kp(k2, 1)));
    let v1v2 = BivarPoly::monomial(2, 2, (&s2 * &s2) / (kp(k1, 0) * kp(k2, 0)));
    let u2 = BivarPoly::monomial(2, 2, &s2 / (kp(k1, 0) * kp(k2, 0)));
    let u2v1 =
        BivarPoly::monomial(4, 2, (&three * &s4 + &two * &t) / (kp(k1, 0) * kp(k1, 1) * kp(k2, 0)));
    let u2v2 =
        BivarPoly::monomial(2, 4, (&three * &s4 + &two * &t) / (kp(k1, 0) * kp(k2, 0) * kp(k2, 1)));
    let u4 = BivarPoly::monomial(
        4,
        4,
        (&nine * &s4 + &six * &t) / (kp(k1, 0) * kp(k1, 1) * kp(k2, 0) * kp(k2, 1)),
    );

    [
        ("v1".into(), v1),
        ("v2".into(), v2),
        ("v1^2".into(), v1v1),
        ("v2^2".into(), v2v2),
        ("v1*v2".into(), v1v2),
        ("u^2".into(), u2),
        ("u^2*v1".into(), u2v1),
        ("u^2*v2".into(), u2v2),
        ("u^4".into(), u4),
    ]
}

/// Evaluate all nine integrals by brute-force monomial expansion and assert
/// exact equality with the closed forms.
pub fn verify_sphint_table(k1: u32, k2: u32, a: &[BigRat]) -> Result<SphintReport, EngineError> {
    if a.len() > k1.min(k2) as usize + 1 {
        return Err(EngineError::DimensionMismatch(format!(
            "coefficient list of length {} exceeds min(k1,k2)+1 = {}",
            a.len(),
            k1.min(k2) + 1
        )));
    }
    let u = u_poly(a, k1, k2);
    let v1 = v_poly(a, k1, k2, crate::radical::Factor::One);
    let v2 = v_poly(a, k1, k2, crate::radical::Factor::Two);
    let u2 = u.mul(&u);

    let integrands: [Poly<BigRat>; 9] = [
        v1.clone(),
        v2.clone(),
        v1.mul(&v1),
        v2.mul(&v2),
        v1.mul(&v2),
        u2.clone(),
        u2.mul(&v1),
        u2.mul(&v2),
        u2.mul(&u2),
    ];
    let closed = closed_form_table(k1, k2, a);

    let mut rows = Vec::with_capacity(9);
    for (integrand, (name, printed)) in integrands.iter().zip(closed) {
        let computed = integrate_poly(integrand, k1, k2)?;
        rows.push(SphintRow {
            integral: name,
            printed_value: printed.to_string(),
            computed_value: computed.to_string(),
            pass: computed == printed,
        });
    }
    Ok(SphintReport {
        k1,
        k2,
        a: a.iter().map(crate::rat::format_rat).collect(),
        rows,
    })
}

// ---------------------------------------------------------------------------
// Gamma-function cross-check (exact half-integer expansion)
// ---------------------------------------------------------------------------

/// Rational multiple of an integer power of √π.
#[derive(Clone, Debug, PartialEq)]
struct GammaHalf {
    q: BigRat,
    sqrt_pi_pow: i64,
}

impl GammaHalf {
    fn mul(&self, o: &Self) -> Self {
        GammaHalf { q: &self.q * &o.q, sqrt_pi_pow: self.sqrt_pi_pow + o.sqrt_pi_pow }
    }
    fn div(&self, o: &Self) -> Self {
        GammaHalf { q: &self.q / &o.q, sqrt_pi_pow: self.sqrt_pi_pow - o.sqrt_pi_pow }
    }
}

/// Γ(two_z / 2) for two_z >= 1, exactly.
fn gamma_half(two_z: u64) -> GammaHalf {
    if two_z % 2 == 0 {
        let n = two_z / 2;
        let mut f = BigInt::one();
        for i in 1..n {
            f *= BigInt::from(i);
        }
        GammaHalf { q: BigRat::from_integer(f), sqrt_pi_pow: 0 }
    } else {
        // Γ(n + 1/2) = (2n-1)!! / 2^n · √π
        let n = (two_z - 1) / 2;
        let numer = double_factorial((2 * n).saturating_sub(1));
        let denom = BigInt::from(2u64).pow(n as u32);
        GammaHalf { q: BigRat::new(numer, denom), sqrt_pi_pow: 1 }
    }
}

/// The moment ratio β_k(b)/β_k(0) computed through exact Γ values at half
/// integers; the √π powers must cancel. Independent of the double-factorial
/// recursion in [`factor_moment`].
pub fn beta_ratio_gamma(k: u32, b: &[u32]) -> BigRat {
    assert!(b.iter().all(|e| e % 2 == 0), "gamma route requires even exponents");
    assert!(b.len() <= k as usize + 1);
    let total: u32 = b.iter().sum();
    let mut num = GammaHalf { q: BigRat::one(), sqrt_pi_pow: 0 };
    for &e in b {
        num = num.mul(&gamma_half(e as u64 + 1));
    }
    // Padded entries contribute Γ(1/2) each; β_k(0) has k+1 of them.
    let pad = k as usize + 1 - b.len();
    for _ in 0..pad {
        num = num.mul(&gamma_half(1));
    }
    let denom = gamma_half(k as u64 + 1 + total as u64);
    let beta_b = num.div(&denom);
    // β_k(0) = Γ(1/2)^{k+1} / Γ((k+1)/2)
    let mut b0num = GammaHalf { q: BigRat::one(), sqrt_pi_pow: 0 };
    for _ in 0..=k {
        b0num = b0num.mul(&gamma_half(1));
    }
    let beta_0 = b0num.div(&gamma_half(k as u64 + 1));
    let ratio = beta_b.div(&beta_0);
    assert_eq!(ratio.sqrt_pi_pow, 0, "√π must cancel in moment ratios");
    ratio.q
}

// ---------------------------------------------------------------------------
// Monte-Carlo oracle
// ---------------------------------------------------------------------------

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
}

const MC_BLOCK: u64 = 1 << 14;

/// Uniform-sphere Monte-Carlo moment: normalized standard Gaussian vectors
/// per factor, scaled to radius r_b. Deterministic for a given seed and
/// independent of thread count (fixed blocks, ordered reduction).
pub fn mc_moment(
    m: &MonomialExp,
    k1: u32,
    k2: u32,
    n_samples: u64,
    seed: u64,
    pool: &Pool,
) -> Result<McEstimate, EngineError> {
    if n_samples == 0 {
        return Err(EngineError::Config("mc_moment needs n_samples >= 1".into()));
    }
    if m.b1.len() > k1 as usize + 1 || m.b2.len() > k2 as usize + 1 {
        return Err(EngineError::DimensionMismatch("monomial exceeds sphere dimension".into()));
    }
    let r1 = (2.0 * k1 as f64).sqrt();
    let r2 = (2.0 * k2 as f64).sqrt();
    let blocks = n_samples.div_ceil(MC_BLOCK);
    let partials = pool.map_indexed(blocks as usize, |blk| {
        let lo = blk as u64 * MC_BLOCK;
        let hi = (lo + MC_BLOCK).min(n_samples);
        // Substream derived from (seed, block index).
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (blk as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        let mut w1 = vec![0.0; k1 as usize + 1];
        let mut w2 = vec![0.0; k2 as usize + 1];
        for _ in lo..hi {
            sample_sphere(&mut rng, r1, &mut w1);
            sample_sphere(&mut rng, r2, &mut w2);
            let mut val = 1.0f64;
            for (i, &e) in m.b1.iter().enumerate() {
                val *= w1[i].powi(e as i32);
            }
            for (i, &e) in m.b2.iter().enumerate() {
                val *= w2[i].powi(e as i32);
            }
            sum += val;
            sumsq += val * val;
        }
        (sum, sumsq)
    });
    let total: f64 = crate::exec::pairwise_sum(&partials.iter().map(|p| p.0).collect::<Vec<_>>());
    let total_sq: f64 = crate::exec::pairwise_sum(&partials.iter().map(|p| p.1).collect::<Vec<_>>());
    let n = n_samples as f64;
    let mean = total / n;
    let var = (total_sq / n - mean * mean).max(0.0);
    let stderr = (var / n).sqrt();
    Ok(McEstimate { mean, stderr, n_samples })
}

fn sample_sphere<R: Rng>(rng: &mut R, radius: f64, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for w in out.iter_mut() {
            let g: f64 = rng.sample(rand_distr::StandardNormal);
            *w = g;
            norm2 += g * g;
        }
        if norm2 > 1e-24 {
            let s = radius / norm2.sqrt();
            for w in out.iter_mut() {
                *w *= s;
            }
            return;
        }
    }
}
