//! Corrector solve and third-order obstruction.
//!
//! For a diagonal Jacobi mode U = u (r1 N1 + r2 N2), u = Σ a_i x_i y_i, the
//! corrector W ∈ K^⊥ solves LW = -D²φ(U,U) with components
//! w_b = A_b u² + B_b v1 + C_b v2 + D_b Σa_i². The obstruction pairing
//! ⟨D³φ(U,U,U) + 3 D²φ(U,W), U⟩ reduces to the nine sphere integrals and
//! takes the form Q4 Σa_i⁴ + Q2 (Σa_i²)² (normalized by |Σ|).
//!
//! Everything here is generic over the scalar: the radical field at fixed
//! (k1, k2) gives exact values; rational functions of (r1, r2) give the
//! global Q4, Q2 used to rebuild the certificate polynomials. Each closed
//! form has an independent route (linear solve vs printed coefficients,
//! moment expansion vs direct symbolic pairing) and the pair must agree
//! exactly.

use crate::bivar::BivarPoly;
use crate::error::EngineError;
use crate::fields::{self, NormalField, SpherePoly};
use crate::radical::{Factor, RadicalScalar};
use crate::rat::{int, BigRat};
use crate::ratfunc::RatFunc;
use num::traits::Zero;

// ---------------------------------------------------------------------------
// Scalar abstraction
// ---------------------------------------------------------------------------

/// Field operations needed by the closed-form pipeline.
pub trait Scalar: Clone + PartialEq + std::fmt::Debug {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, q: &BigRat) -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for RadicalScalar {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, q: &BigRat) -> Self {
        RadicalScalar::scale(self, q)
    }
    fn is_zero(&self) -> bool {
        RadicalScalar::is_zero(self)
    }
}

impl Scalar for RatFunc {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, q: &BigRat) -> Self {
        self * &RatFunc::from_rat(q.clone())
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
}

/// Provider of the radius scalars and the moment denominators k_b + 1 + 2j.
pub trait ShrinkerCtx {
    type S: Scalar;
    fn rat(&self, q: BigRat) -> Self::S;
    fn radius(&self, f: Factor) -> Self::S;
    /// k_b + 1 + 2j as a scalar; on shrinker radii this is (r_b² + 2 + 4j)/2.
    fn dim_shift(&self, f: Factor, j: u32) -> Self::S;

    fn int(&self, n: i64) -> Self::S {
        self.rat(int(n))
    }
    fn inv_radius(&self, f: Factor) -> Self::S {
        self.int(1).div(&self.radius(f))
    }
    /// M_d = r1^d + r2^d for small |d|.
    fn msum(&self, d: i32) -> Self::S {
        let pow = |f: Factor| {
            let base = if d >= 0 { self.radius(f) } else { self.inv_radius(f) };
            let mut acc = self.int(1);
            for _ in 0..d.unsigned_abs() {
                acc = acc.mul(&base);
            }
            acc
        };
        pow(Factor::One).add(&pow(Factor::Two))
    }
}

/// Exact evaluation at fixed (k1, k2) over the radical field.
#[derive(Clone, Copy, Debug)]
pub struct RadicalCtx {
    pub k1: u32,
    pub k2: u32,
}

impl ShrinkerCtx for RadicalCtx {
    type S = RadicalScalar;
    fn rat(&self, q: BigRat) -> RadicalScalar {
        RadicalScalar::from_rat(self.k1, self.k2, q)
    }
    fn radius(&self, f: Factor) -> RadicalScalar {
        RadicalScalar::radius(self.k1, self.k2, f)
    }
    fn dim_shift(&self, f: Factor, j: u32) -> RadicalScalar {
        let k = match f {
            Factor::One => self.k1,
            Factor::Two => self.k2,
        };
        self.rat(int((k + 1 + 2 * j) as i64))
    }
}

/// Symbolic evaluation over Q(r1, r2), treating the radii as indeterminates
/// linked to the dimensions by k_b = r_b²/2.
#[derive(Clone, Copy, Debug, Default)]
pub struct SymbolicCtx;

impl ShrinkerCtx for SymbolicCtx {
    type S = RatFunc;
    fn rat(&self, q: BigRat) -> RatFunc {
        RatFunc::from_rat(q)
    }
    fn radius(&self, f: Factor) -> RatFunc {
        RatFunc::radius(f)
    }
    fn dim_shift(&self, f: Factor, j: u32) -> RatFunc {
        let sq = match f {
            Factor::One => BivarPoly::from_terms([(2, 0, int(1)), (0, 0, int(2 + 4 * j as i64))]),
            Factor::Two => BivarPoly::from_terms([(0, 2, int(1)), (0, 0, int(2 + 4 * j as i64))]),
        };
        Scalar::scale(&RatFunc::from_poly(sq), &BigRat::new(1.into(), 2.into()))
    }
}

// ---------------------------------------------------------------------------
// Moment table and closed-form pairing
// ---------------------------------------------------------------------------

/// The nine normalized integrals for diagonal u, as scalars.
#[derive(Clone, Debug)]
pub struct MomentTable<S> {
    pub v1: S,
    pub v2: S,
    pub v1v1: S,
    pub v2v2: S,
    pub v1v2: S,
    pub u2: S,
    pub u2v1: S,
    pub u2v2: S,
    pub u4: S,
}

/// Closed forms of the table in terms of S2 = Σa², S4 = Σa⁴ and the radii.
pub fn moment_table<C: ShrinkerCtx>(ctx: &C, a: &[BigRat]) -> MomentTable<C::S> {
    let s2: BigRat = a.iter().map(|x| x * x).fold(BigRat::zero(), |acc, v| acc + v);
    let s4: BigRat = a.iter().map(|x| x * x * x * x).fold(BigRat::zero(), |acc, v| acc + v);
    let t = (&s2 * &s2 - &s4) / int(2);
    let mix = int(3) * &s4 + int(2) * &t; // 3Σa⁴ + 2Σ_{i<j}a_i²a_j²
    let u4mix = int(9) * &s4 + int(6) * &t;

    let r1 = ctx.radius(Factor::One);
    let r2 = ctx.radius(Factor::Two);
    let r1sq = r1.mul(&r1);
    let r2sq = r2.mul(&r2);
    let d = |f, j| ctx.dim_shift(f, j);

    let v1 = r1sq.scale(&s2).div(&d(Factor::One, 0));
    let v2 = r2sq.scale(&s2).div(&d(Factor::Two, 0));
    let v1v1 = r1sq.mul(&r1sq).scale(&mix).div(&d(Factor::One, 0).mul(&d(Factor::One, 1)));
    let v2v2 = r2sq.mul(&r2sq).scale(&mix).div(&d(Factor::Two, 0).mul(&d(Factor::Two, 1)));
    let r12 = r1sq.mul(&r2sq);
    let v1v2 = r12.scale(&(&s2 * &s2)).div(&d(Factor::One, 0).mul(&d(Factor::Two, 0)));
    let u2 = r12.scale(&s2).div(&d(Factor::One, 0).mul(&d(Factor::Two, 0)));
    let u2v1 = r1sq
        .mul(&r12)
        .scale(&mix)
        .div(&d(Factor::One, 0).mul(&d(Factor::One, 1)).mul(&d(Factor::Two, 0)));
    let u2v2 = r2sq
        .mul(&r12)
        .scale(&mix)
        .div(&d(Factor::One, 0).mul(&d(Factor::Two, 0)).mul(&d(Factor::Two, 1)));
    let u4 = r12.mul(&r12).scale(&u4mix).div(
        &d(Factor::One, 0).mul(&d(Factor::One, 1)).mul(&d(Factor::Two, 0)).mul(&d(Factor::Two, 1)),
    );

    MomentTable { v1, v2, v1v1, v2v2, v1v2, u2, u2v1, u2v2, u4 }
}

/// Corrector coefficients per component, indexed by factor.
#[derive(Clone, Debug)]
pub struct WCoeffs<S> {
    pub a: [S; 2],
    pub b: [S; 2],
    pub c: [S; 2],
    pub d: [S; 2],
}

/// Printed closed forms:
///   A_b = (−2 M2 r_b⁻³ + 2 M1 + (4 M₋2 − 1) r_b) / (1 + 2 M₋2)
///   B_1 = r1²(A_1 − 2 r1),          B_2 = r1²(A_2 + M2/r2 − 2 r2)
///   C_1 = r2²(A_1 + M2/r1 − 2 r1),  C_2 = r2²(A_2 − 2 r2)
///   D_b = −2 B_b − 2 C_b
pub fn w_closed<C: ShrinkerCtx>(ctx: &C) -> WCoeffs<C::S> {
    let m2 = ctx.msum(2);
    let m1 = ctx.msum(1);
    let mm2 = ctx.msum(-2);
    let denom = ctx.int(1).add(&mm2.scale(&int(2)));
    let a_of = |b: Factor| {
        let rb = ctx.radius(b);
        let rb_inv3 = {
            let i = ctx.inv_radius(b);
            i.mul(&i).mul(&i)
        };
        let num = m2
            .scale(&int(-2))
            .mul(&rb_inv3)
            .add(&m1.scale(&int(2)))
            .add(&mm2.scale(&int(4)).sub(&ctx.int(1)).mul(&rb));
        num.div(&denom)
    };
    let a1 = a_of(Factor::One);
    let a2 = a_of(Factor::Two);
    let r1 = ctx.radius(Factor::One);
    let r2 = ctx.radius(Factor::Two);
    let r1sq = r1.mul(&r1);
    let r2sq = r2.mul(&r2);
    let b1 = r1sq.mul(&a1.sub(&r1.scale(&int(2))));
    let b2 = r1sq.mul(&a2.add(&m2.div(&r2)).sub(&r2.scale(&int(2))));
    let c1 = r2sq.mul(&a1.add(&m2.div(&r1)).sub(&r1.scale(&int(2))));
    let c2 = r2sq.mul(&a2.sub(&r2.scale(&int(2))));
    let d1 = b1.add(&c1).scale(&int(-2));
    let d2 = b2.add(&c2).scale(&int(-2));
    WCoeffs { a: [a1, a2], b: [b1, b2], c: [c1, c2], d: [d1, d2] }
}

/// Coefficients of ⟨D²φ(U,U), N_b⟩ on the basis (u², v1, v2):
///   u²: −r_b − 2 M2 r_b⁻³ + 2 M1 + 4 M₋2 r_b
///   v1: −4 r_b (+ 2 M2 / r2 when b = 2)
///   v2: −4 r_b (+ 2 M2 / r1 when b = 1)
fn d2phi_diag_coeffs<C: ShrinkerCtx>(ctx: &C, b: Factor) -> (C::S, C::S, C::S) {
    let rb = ctx.radius(b);
    let rb_inv = ctx.inv_radius(b);
    let rb_inv3 = rb_inv.mul(&rb_inv).mul(&rb_inv);
    let m2 = ctx.msum(2);
    let u2 = rb
        .neg()
        .sub(&m2.scale(&int(2)).mul(&rb_inv3))
        .add(&ctx.msum(1).scale(&int(2)))
        .add(&ctx.msum(-2).scale(&int(4)).mul(&rb));
    let mut v1 = rb.scale(&int(-4));
    let mut v2 = rb.scale(&int(-4));
    match b {
        Factor::One => {
            v2 = v2.add(&m2.scale(&int(2)).mul(&ctx.inv_radius(Factor::One)));
        }
        Factor::Two => {
            v1 = v1.add(&m2.scale(&int(2)).mul(&ctx.inv_radius(Factor::Two)));
        }
    }
    (u2, v1, v2)
}

/// Independent corrector solve: assemble the 4×4 linear system from
/// (Δ+1)(A u² + B v1 + C v2 + D) matched against −⟨D²φ(U,U), N_b⟩ over the
/// basis (u², v1, v2, 1), and eliminate exactly.
pub fn w_linear<C: ShrinkerCtx>(ctx: &C) -> Result<WCoeffs<C::S>, EngineError> {
    let one = ctx.int(1);
    let zero = ctx.int(0);
    let inv_r1sq = {
        let i = ctx.inv_radius(Factor::One);
        i.mul(&i)
    };
    let inv_r2sq = {
        let i = ctx.inv_radius(Factor::Two);
        i.mul(&i)
    };
    // (Δ+1)(A u² + B v1 + C v2 + D) =
    //   −A(1 + 2r1⁻² + 2r2⁻²) u² + 2(A − B r1⁻²) v1 + 2(A − C r2⁻²) v2
    //   + (2B + 2C + D) Σa².
    let lap_coef = one.add(&inv_r1sq.scale(&int(2))).add(&inv_r2sq.scale(&int(2))).neg();
    let rows = [
        [lap_coef, zero.clone(), zero.clone(), zero.clone()],
        [ctx.int(2), inv_r1sq.scale(&int(-2)), zero.clone(), zero.clone()],
        [ctx.int(2), zero.clone(), inv_r2sq.scale(&int(-2)), zero.clone()],
        [zero.clone(), ctx.int(2), ctx.int(2), one.clone()],
    ];

    let mut out: Vec<[C::S; 4]> = Vec::with_capacity(2);
    for b in Factor::BOTH {
        let (c_u2, c_v1, c_v2) = d2phi_diag_coeffs(ctx, b);
        let rhs = [c_u2.neg(), c_v1.neg(), c_v2.neg(), zero.clone()];
        let sol = solve4(&rows, &rhs)?;
        out.push(sol);
    }
    let [a2, b2, c2, d2] = out.pop().unwrap();
    let [a1, b1, c1, d1] = out.pop().unwrap();
    Ok(WCoeffs { a: [a1, a2], b: [b1, b2], c: [c1, c2], d: [d1, d2] })
}

fn solve4<S: Scalar>(a: &[[S; 4]; 4], rhs: &[S; 4]) -> Result<[S; 4], EngineError> {
    let mut m: Vec<Vec<S>> = a.iter().map(|r| r.to_vec()).collect();
    let mut b: Vec<S> = rhs.to_vec();
    let n = 4;
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(EngineError::SingularSystem)?;
        m.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].div(&m[col][col]);
            for c in col..n {
                let delta = f.mul(&m[col][c]);
                m[r][c] = m[r][c].sub(&delta);
            }
            let delta = f.mul(&b[col]);
            b[r] = b[r].sub(&delta);
        }
    }
    let sol: Vec<S> = (0..n).map(|i| b[i].div(&m[i][i])).collect();
    Ok([sol[0].clone(), sol[1].clone(), sol[2].clone(), sol[3].clone()])
}

#[derive(Clone, Copy)]
enum WIntegrand {
    U2,
    V1,
    V2,
}

/// ∫ w_b · f over Σ (normalized) for f ∈ {u², v1, v2}, expanded through the
/// moment table; S2 multiplies the constant part of w_b.
fn integral_against_w<S: Scalar>(
    w: &WCoeffs<S>,
    table: &MomentTable<S>,
    s2: &BigRat,
    b: usize,
    f: WIntegrand,
) -> S {
    let (iu2, iv1, iv2, iconst) = match f {
        WIntegrand::U2 => (&table.u4, &table.u2v1, &table.u2v2, &table.u2),
        WIntegrand::V1 => (&table.u2v1, &table.v1v1, &table.v1v2, &table.v1),
        WIntegrand::V2 => (&table.u2v2, &table.v1v2, &table.v2v2, &table.v2),
    };
    w.a[b]
        .mul(iu2)
        .add(&w.b[b].mul(iv1))
        .add(&w.c[b].mul(iv2))
        .add(&w.d[b].scale(s2).mul(iconst))
}

/// Closed-form cross term
///   ⟨D²φ(U,W), U⟩ = Σ_b (3M1 + 4M₋1 − M2 r_b⁻¹ − 2M2 r_b⁻³ − r_b) ∫ w_b u²
///                  + Σ_b 2 M2 r_b⁻¹ ∫ w_b v_b̄ − Σ_{a,b} 4 r_a ∫ w_b v_ā.
pub fn cross_closed<C: ShrinkerCtx>(ctx: &C, w: &WCoeffs<C::S>, a: &[BigRat]) -> C::S {
    let table = moment_table(ctx, a);
    let s2: BigRat = a.iter().map(|x| x * x).fold(BigRat::zero(), |acc, v| acc + v);
    let m1 = ctx.msum(1);
    let mm1 = ctx.msum(-1);
    let m2 = ctx.msum(2);
    let r1 = ctx.radius(Factor::One);
    let r2 = ctx.radius(Factor::Two);

    let mut acc = ctx.int(0);
    for (bi, b) in Factor::BOTH.into_iter().enumerate() {
        let rb = ctx.radius(b);
        let rb_inv = ctx.inv_radius(b);
        let rb_inv3 = rb_inv.mul(&rb_inv).mul(&rb_inv);
        let coef_u2 = m1
            .scale(&int(3))
            .add(&mm1.scale(&int(4)))
            .sub(&m2.mul(&rb_inv))
            .sub(&m2.scale(&int(2)).mul(&rb_inv3))
            .sub(&rb);
        acc = acc.add(&coef_u2.mul(&integral_against_w(w, &table, &s2, bi, WIntegrand::U2)));
        // + 2 M2 r_b⁻¹ ∫ w_b v_b̄
        let vbar = if bi == 0 { WIntegrand::V2 } else { WIntegrand::V1 };
        acc = acc
            .add(&m2.scale(&int(2)).mul(&rb_inv).mul(&integral_against_w(w, &table, &s2, bi, vbar)));
        // − Σ_a 4 r_a ∫ w_b v_ā = −4 r1 ∫ w_b v2 − 4 r2 ∫ w_b v1
        acc =
            acc.sub(&r1.scale(&int(4)).mul(&integral_against_w(w, &table, &s2, bi, WIntegrand::V2)));
        acc =
            acc.sub(&r2.scale(&int(4)).mul(&integral_against_w(w, &table, &s2, bi, WIntegrand::V1)));
    }
    acc
}

/// Closed-form cubic term
///   ⟨D³φ(U,U,U), U⟩ = (−9M2 − M2²) ∫u⁴ + 3M2² ∫|∇u|⁴,
/// with |∇u|⁴ = (v1 + v2 − M₋2 u²)² expanded through the table.
pub fn cubic_closed<C: ShrinkerCtx>(ctx: &C, a: &[BigRat]) -> C::S {
    let table = moment_table(ctx, a);
    let m2 = ctx.msum(2);
    let mm2 = ctx.msum(-2);
    let grad4 = table
        .v1v1
        .add(&table.v2v2)
        .add(&table.v1v2.scale(&int(2)))
        .sub(&mm2.mul(&table.u2v1.add(&table.u2v2)).scale(&int(2)))
        .add(&mm2.mul(&mm2).mul(&table.u4));
    let m2sq = m2.mul(&m2);
    m2.scale(&int(-9)).sub(&m2sq).mul(&table.u4).add(&m2sq.scale(&int(3)).mul(&grad4))
}

/// Obstruction pairing ⟨D³φ(U,U,U) + 3 D²φ(U,W), U⟩ via closed forms.
pub fn pairing_closed<C: ShrinkerCtx>(ctx: &C, a: &[BigRat]) -> C::S {
    let w = w_closed(ctx);
    cubic_closed(ctx, a).add(&cross_closed(ctx, &w, a).scale(&int(3)))
}

// ---------------------------------------------------------------------------
// Exact fields at fixed (k1, k2): assembled U, W and the dual routes
// ---------------------------------------------------------------------------

/// u = Σ a_i x_i y_i over the radical field.
pub fn u_sphere_poly(k1: u32, k2: u32, a: &[BigRat]) -> SpherePoly {
    let mut p = SpherePoly::zero(k1, k2);
    for (i, ai) in a.iter().enumerate() {
        let t = SpherePoly::coordinate(k1, k2, Factor::One, i)
            .mul(&SpherePoly::coordinate(k1, k2, Factor::Two, i));
        p = p.add(&t.scale_rat(ai));
    }
    p
}

/// The diagonal Jacobi mode U = u (r1 N1 + r2 N2).
pub fn u_field(k1: u32, k2: u32, a: &[BigRat]) -> NormalField {
    let u = u_sphere_poly(k1, k2, a);
    NormalField::from_sphere_components(
        u.scale(&RadicalScalar::radius(k1, k2, Factor::One)),
        u.scale(&RadicalScalar::radius(k1, k2, Factor::Two)),
    )
}

/// Assemble W = Σ_b (A_b u² + B_b v1 + C_b v2 + D_b Σa²) N_b as a field.
pub fn assemble_w(k1: u32, k2: u32, a: &[BigRat], w: &WCoeffs<RadicalScalar>) -> NormalField {
    let u = u_sphere_poly(k1, k2, a);
    let u2 = u.mul(&u);
    let mut v1 = SpherePoly::zero(k1, k2);
    let mut v2 = SpherePoly::zero(k1, k2);
    for (i, ai) in a.iter().enumerate() {
        let xi = SpherePoly::coordinate(k1, k2, Factor::One, i);
        let yi = SpherePoly::coordinate(k1, k2, Factor::Two, i);
        v1 = v1.add(&xi.mul(&xi).scale_rat(&(ai * ai)));
        v2 = v2.add(&yi.mul(&yi).scale_rat(&(ai * ai)));
    }
    let s2: BigRat = a.iter().map(|x| x * x).fold(BigRat::zero(), |acc, v| acc + v);
    let comp = |b: usize| {
        u2.scale(&w.a[b])
            .add(&v1.scale(&w.b[b]))
            .add(&v2.scale(&w.c[b]))
            .add(&SpherePoly::constant(k1, k2, RadicalScalar::scale(&w.d[b], &s2)))
    };
    NormalField::from_sphere_components(comp(0), comp(1))
}

/// Corrector solution with its assembled field.
#[derive(Clone, Debug)]
pub struct WSolution {
    pub coeffs: WCoeffs<RadicalScalar>,
    pub field: NormalField,
}

/// Solve the corrector equation from the printed closed forms.
pub fn solve_w_closed(k1: u32, k2: u32, a: &[BigRat]) -> WSolution {
    let ctx = RadicalCtx { k1, k2 };
    let coeffs = w_closed(&ctx);
    let field = assemble_w(k1, k2, a, &coeffs);
    WSolution { coeffs, field }
}

/// Solve the corrector equation by exact 4×4 elimination.
pub fn solve_w_linear(k1: u32, k2: u32, a: &[BigRat]) -> Result<WSolution, EngineError> {
    let ctx = RadicalCtx { k1, k2 };
    let coeffs = w_linear(&ctx)?;
    let field = assemble_w(k1, k2, a, &coeffs);
    Ok(WSolution { coeffs, field })
}

/// Both routes to the cross term at fixed (k1, k2); they must agree exactly.
pub struct CrossTerm {
    pub closed: RadicalScalar,
    pub direct: RadicalScalar,
}

pub fn cross_term(k1: u32, k2: u32, a: &[BigRat], w: &WSolution) -> Result<CrossTerm, EngineError> {
    let ctx = RadicalCtx { k1, k2 };
    let closed = cross_closed(&ctx, &w.coeffs, a);
    let u = u_field(k1, k2, a);
    let d2 = fields::d2phi_normal(&u, &w.field)?;
    let direct = fields::l2_inner(&d2, &u);
    Ok(CrossTerm { closed, direct })
}

/// Both routes to the cubic term at fixed (k1, k2).
pub struct CubicTerm {
    pub closed: RadicalScalar,
    pub direct: RadicalScalar,
}

pub fn cubic_term(k1: u32, k2: u32, a: &[BigRat]) -> Result<CubicTerm, EngineError> {
    let ctx = RadicalCtx { k1, k2 };
    let closed = cubic_closed(&ctx, a);
    let u = u_field(k1, k2, a);
    let d3 = fields::d3phi_normal(&u)?;
    let direct = fields::l2_inner(&d3, &u);
    Ok(CubicTerm { closed, direct })
}

// ---------------------------------------------------------------------------
// Q extraction and the obstruction lower bound
// ---------------------------------------------------------------------------

/// The quadratic-form coefficients of the obstruction pairing, symbolic and
/// evaluated: pairing = Q4 Σa⁴ + Q2 (Σa²)² (normalized by |Σ|).
#[derive(Clone, Debug)]
pub struct QTriple {
    pub q4_sym: RatFunc,
    pub q2_sym: RatFunc,
    /// Q4/(1 + k_min) + Q2: the sharp constant of the power-means step.
    pub q0_proof_sym: RatFunc,
    /// Q4/(1 + 2 r1²) + Q2: the alternative published combination.
    pub q0_printed_sym: RatFunc,
    pub q4: RadicalScalar,
    pub q2: RadicalScalar,
    pub q0_proof: RadicalScalar,
    pub q0_printed: RadicalScalar,
}

/// Probe the pairing at a = e1 (giving Q4 + Q2) and a = e1 + e2 (giving
/// 2Q4 + 4Q2) and solve for the coefficients.
pub fn probe_q<C: ShrinkerCtx>(ctx: &C) -> (C::S, C::S) {
    let p1 = pairing_closed(ctx, &[int(1)]);
    let p2 = pairing_closed(ctx, &[int(1), int(1)]);
    // q4 = 2 p1 − p2/2 ; q2 = p2/2 − p1
    let half = BigRat::new(1.into(), 2.into());
    let q4 = p1.scale(&int(2)).sub(&p2.scale(&half));
    let q2 = p2.scale(&half).sub(&p1);
    (q4, q2)
}

/// Symbolic Q functions are global in (r1, r2); computed once and cached.
pub fn q_symbolic() -> &'static (RatFunc, RatFunc) {
    static CACHE: std::sync::OnceLock<(RatFunc, RatFunc)> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| probe_q(&SymbolicCtx))
}

/// Q functions at fixed (k1, k2): symbolic forms plus exact evaluations,
/// with both lower-bound combinations. The proof combination puts min(k)
/// on the first factor, as the power-means step requires.
pub fn q_functions(k1: u32, k2: u32) -> QTriple {
    let (kmin, kmax) = (k1.min(k2), k1.max(k2));
    let (q4_sym, q2_sym) = q_symbolic().clone();
    let inv_kmin1 = RatFunc::from_rat(BigRat::new(1.into(), (kmin as i64 + 1).into()));
    let q0_proof_sym = &(&q4_sym * &inv_kmin1) + &q2_sym;
    let one_plus_2r1sq =
        RatFunc::from_poly(BivarPoly::from_terms([(2, 0, int(2)), (0, 0, int(1))]));
    let q0_printed_sym = &(&q4_sym / &one_plus_2r1sq) + &q2_sym;
    // Q4, Q2 are symmetric under swapping the factors, so evaluating with
    // kmin on the first slot is consistent for any input order.
    let q4 = q4_sym.radical_eval(kmin, kmax);
    let q2 = q2_sym.radical_eval(kmin, kmax);
    let q0_proof = q0_proof_sym.radical_eval(kmin, kmax);
    let q0_printed = q0_printed_sym.radical_eval(kmin, kmax);
    QTriple { q4_sym, q2_sym, q0_proof_sym, q0_printed_sym, q4, q2, q0_proof, q0_printed }
}

/// The sharp obstruction constant δ = Q4/(1 + min(k1,k2)) + Q2, exact.
pub fn delta_bound(k1: u32, k2: u32) -> RadicalScalar {
    q_functions(k1, k2).q0_proof
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{apply_l, d2phi_normal, jacobi_basis, l2_inner, project, JacobiSubspace};
    use crate::rat::rat;

    #[test]
    fn w_coefficients_clifford_example() {
        // At k1 = k2 = 1: A¹ = A² = 5√2/3.
        let ctx = RadicalCtx { k1: 1, k2: 1 };
        let w = w_closed(&ctx);
        let expect = RadicalScalar::new(1, 1, [int(0), rat(5, 3), int(0), int(0)]);
        assert_eq!(w.a[0], expect);
        assert_eq!(w.a[1], expect);
        // D_b = −2 B_b − 2 C_b holds by construction.
        for b in 0..2 {
            let d = Scalar::scale(&w.b[b].add(&w.c[b]), &int(-2));
            assert_eq!(w.d[b], d);
        }
    }

    #[test]
    fn w_closed_equals_w_linear() {
        for (k1, k2) in [(1u32, 1u32), (1, 2), (2, 5), (3, 3), (4, 1), (5, 5)] {
            let ctx = RadicalCtx { k1, k2 };
            let closed = w_closed(&ctx);
            let linear = w_linear(&ctx).unwrap();
            for b in 0..2 {
                assert_eq!(closed.a[b], linear.a[b], "A at k=({k1},{k2})");
                assert_eq!(closed.b[b], linear.b[b], "B at k=({k1},{k2})");
                assert_eq!(closed.c[b], linear.c[b], "C at k=({k1},{k2})");
                assert_eq!(closed.d[b], linear.d[b], "D at k=({k1},{k2})");
            }
        }
        // Symbolic agreement too.
        let closed = w_closed(&SymbolicCtx);
        let linear = w_linear(&SymbolicCtx).unwrap();
        for b in 0..2 {
            assert!(closed.a[b].eq_exact(&linear.a[b]));
            assert!(closed.b[b].eq_exact(&linear.b[b]));
        }
    }

    #[test]
    fn corrector_identity_exact() {
        // LW + D²φ(U,U) = 0 exactly, and W ⊥ K.
        for (k1, k2) in [(1u32, 1u32), (1, 2), (2, 3)] {
            let full = [int(1), rat(-2, 3), int(2)];
            let a = &full[..(k1.min(k2) as usize + 1).min(3)];
            let w = solve_w_closed(k1, k2, a);
            let u = u_field(k1, k2, a);
            let lw = apply_l(&w.field);
            let d2 = d2phi_normal(&u, &u).unwrap();
            assert!(lw.add(&d2).is_zero_fn(), "k=({k1},{k2})");
            let basis = jacobi_basis(k1, k2, k1 + k2 + 3).unwrap();
            let pk = project(&w.field, &basis, JacobiSubspace::K).unwrap();
            assert!(pk.is_zero_fn(), "W not orthogonal to kernel at k=({k1},{k2})");
        }
    }

    #[test]
    fn rhs_zero_gives_zero_w() {
        let w = solve_w_closed(1, 1, &[int(0)]);
        assert!(w.field.is_zero_fn());
    }

    #[test]
    fn cross_term_dual_route() {
        for (k1, k2) in [(1u32, 1u32), (1, 2), (2, 2)] {
            let full = [int(1), int(0)];
            let a = &full[..(k1.min(k2) as usize + 1).min(2)];
            let w = solve_w_closed(k1, k2, a);
            let ct = cross_term(k1, k2, a, &w).unwrap();
            assert_eq!(ct.closed, ct.direct, "k=({k1},{k2})");
        }
        // U = 0 gives 0.
        let w = solve_w_closed(1, 1, &[int(0)]);
        let ct = cross_term(1, 1, &[int(0)], &w).unwrap();
        assert!(ct.closed.is_zero() && ct.direct.is_zero());
    }

    #[test]
    fn cross_term_scaling() {
        // cross(tU, t²W) = t⁴ cross(U, W): w's field scales as a² does.
        let (k1, k2) = (1u32, 2u32);
        let a1 = [int(1), int(2)];
        let a2 = [int(2), int(4)];
        let w1 = solve_w_closed(k1, k2, &a1);
        let ct1 = cross_term(k1, k2, &a1, &w1).unwrap();
        let w2 = solve_w_closed(k1, k2, &a2);
        let ct2 = cross_term(k1, k2, &a2, &w2).unwrap();
        assert_eq!(ct2.closed, RadicalScalar::scale(&ct1.closed, &int(16)));
        assert_eq!(ct2.direct, RadicalScalar::scale(&ct1.direct, &int(16)));
    }

    #[test]
    fn cubic_term_dual_route_and_scaling() {
        for (k1, k2) in [(1u32, 1u32), (1, 2), (2, 2)] {
            let full = [int(1), int(0)];
            let a = &full[..(k1.min(k2) as usize + 1).min(2)];
            let ct = cubic_term(k1, k2, a).unwrap();
            assert_eq!(ct.closed, ct.direct, "k=({k1},{k2})");
        }
        let c1 = cubic_term(1, 2, &[int(1), int(1)]).unwrap();
        let c2 = cubic_term(1, 2, &[int(2), int(2)]).unwrap();
        assert_eq!(c2.closed, RadicalScalar::scale(&c1.closed, &int(16)));
        let c0 = cubic_term(1, 1, &[int(0)]).unwrap();
        assert!(c0.closed.is_zero());
    }

    #[test]
    fn q_values_at_clifford_torus() {
        let q = q_functions(1, 1);
        assert_eq!(q.q4, RadicalScalar::from_int(1, 1, 160));
        assert_eq!(q.q2, RadicalScalar::from_int(1, 1, -48));
        assert_eq!(q.q0_proof, RadicalScalar::from_int(1, 1, 32));
        assert!(delta_bound(1, 1).sign() > 0);
    }

    #[test]
    fn pairing_matches_q_form() {
        // pairing(a) = Q4 Σa⁴ + Q2 (Σa²)² for several a and (k1,k2).
        for (k1, k2) in [(1u32, 1u32), (1, 2), (2, 2), (2, 3)] {
            let ctx = RadicalCtx { k1, k2 };
            let q = q_functions(k1, k2);
            let cases: Vec<Vec<BigRat>> =
                vec![vec![int(1)], vec![int(1), int(-1)], vec![rat(1, 2), int(2)]];
            for a in cases {
                if a.len() > k1.min(k2) as usize + 1 {
                    continue;
                }
                let p = pairing_closed(&ctx, &a);
                let s2: BigRat = a.iter().map(|x| x * x).fold(BigRat::zero(), |acc, v| acc + v);
                let s4: BigRat =
                    a.iter().map(|x| x * x * x * x).fold(BigRat::zero(), |acc, v| acc + v);
                // Rebuild the expected value in the (k1,k2) field from the
                // symbolic Q's to avoid any ordering mismatch.
                let q4 = q.q4_sym.radical_eval(k1, k2);
                let q2 = q.q2_sym.radical_eval(k1, k2);
                let expect =
                    &RadicalScalar::scale(&q4, &s4) + &RadicalScalar::scale(&q2, &(&s2 * &s2));
                assert_eq!(p, expect, "k=({k1},{k2}), a={a:?}");
            }
        }
    }

    #[test]
    fn pairing_dominates_delta_bound() {
        // pairing ≥ δ (Σa²)² with δ = Q4/(1+kmin) + Q2, for admissible a.
        let mut state = 77u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 34) % 9) as i64 - 4
        };
        for (k1, k2) in [(1u32, 1u32), (1, 3), (2, 2)] {
            let ctx = RadicalCtx { k1, k2 };
            let q = q_functions(k1, k2);
            assert!(q.q0_proof.sign() > 0);
            let delta = q.q0_proof_sym.radical_eval(k1, k2);
            for _ in 0..20 {
                let len = k1.min(k2) as usize + 1;
                let a: Vec<BigRat> = (0..len).map(|_| int(next())).collect();
                let p = pairing_closed(&ctx, &a);
                let s2: BigRat = a.iter().map(|x| x * x).fold(BigRat::zero(), |acc, v| acc + v);
                let gap = &p - &RadicalScalar::scale(&delta, &(&s2 * &s2));
                assert!(gap.sign() >= 0, "k=({k1},{k2}) a={a:?}");
            }
        }
    }

    #[test]
    fn u_norm_via_gram() {
        // ‖U‖² = M2 r1² r2² Σa² / ((k1+1)(k2+1)), normalized by |Σ|.
        let (k1, k2) = (1u32, 2u32);
        let a = [int(1), int(2)];
        let u = u_field(k1, k2, &a);
        let norm2 = l2_inner(&u, &u);
        let expect = int(2 * (k1 + k2) as i64) * int((2 * k1) as i64) * int((2 * k2) as i64)
            * int(5)
            / int(((k1 + 1) * (k2 + 1)) as i64);
        assert_eq!(norm2, RadicalScalar::from_rat(k1, k2, expect));
    }
}
