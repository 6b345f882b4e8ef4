//! Polynomial function and normal-field calculus on the sphere product
//! Σ = S^{k1}(√2k1) × S^{k2}(√2k2).
//!
//! Functions are ambient polynomials restricted to Σ. Two polynomials are
//! the same function iff ∫(p-q)² = 0, which the exact moment layer decides;
//! no ideal-membership machinery is needed. Tangential derivatives come from
//! ambient ones:
//!
//!   ⟨∇ᵇp, ∇ᵇq⟩ = Σ_i ∂_i p ∂_i q − r_b⁻² (E_b p)(E_b q)
//!   Δᵇ(p_d)     = Δ_amb p_d − r_b⁻² d (d + k_b − 1) p_d   (p_d homogeneous)
//!   Hess_Σ p(X,Y) = Hess_amb p(X,Y) − Σ_b r_b⁻² (E_b p) ⟨X_b, Y_b⟩
//!
//! with E_b the factor Euler operator; r_b⁻² = 1/(2 k_b) is rational, so all
//! coefficients stay in the radical field.

use crate::ambient::{Mono, Poly};
use crate::error::EngineError;
use crate::moments::mono_moment;
use crate::radical::{Factor, RadicalScalar};
use crate::rat::BigRat;

/// Polynomial function on the sphere product, coefficients in Q(r1, r2).
#[derive(Clone, PartialEq, Debug)]
pub struct SpherePoly {
    pub k1: u32,
    pub k2: u32,
    pub poly: Poly<RadicalScalar>,
}

impl SpherePoly {
    pub fn zero(k1: u32, k2: u32) -> Self {
        SpherePoly { k1, k2, poly: Poly::zero(k1 as usize + 1, k2 as usize + 1) }
    }

    pub fn constant(k1: u32, k2: u32, c: RadicalScalar) -> Self {
        let mut p = Self::zero(k1, k2);
        p.poly.add_term(Mono::unit(k1 as usize + 1, k2 as usize + 1), c);
        p
    }

    pub fn constant_rat(k1: u32, k2: u32, q: BigRat) -> Self {
        Self::constant(k1, k2, RadicalScalar::from_rat(k1, k2, q))
    }

    /// The restricted coordinate θ (x_i on factor one, y_i on factor two).
    pub fn coordinate(k1: u32, k2: u32, f: Factor, idx: usize) -> Self {
        let (nx, ny) = (k1 as usize + 1, k2 as usize + 1);
        let mut m = Mono::unit(nx, ny);
        match f {
            Factor::One => {
                assert!(idx < nx);
                m.x[idx] = 1;
            }
            Factor::Two => {
                assert!(idx < ny);
                m.y[idx] = 1;
            }
        }
        let mut p = Self::zero(k1, k2);
        p.poly.add_term(m, RadicalScalar::one(k1, k2));
        p
    }

    fn kb(&self, f: Factor) -> u32 {
        match f {
            Factor::One => self.k1,
            Factor::Two => self.k2,
        }
    }

    /// 1/r_b² as an exact rational.
    fn inv_r2(&self, f: Factor) -> BigRat {
        BigRat::new(1.into(), (2 * self.kb(f) as i64).into())
    }

    pub fn add(&self, o: &Self) -> Self {
        SpherePoly { k1: self.k1, k2: self.k2, poly: self.poly.add(&o.poly) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        SpherePoly { k1: self.k1, k2: self.k2, poly: self.poly.sub(&o.poly) }
    }

    pub fn neg(&self) -> Self {
        SpherePoly { k1: self.k1, k2: self.k2, poly: self.poly.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        SpherePoly { k1: self.k1, k2: self.k2, poly: self.poly.mul(&o.poly) }
    }

    pub fn scale(&self, c: &RadicalScalar) -> Self {
        SpherePoly { k1: self.k1, k2: self.k2, poly: self.poly.scale(c) }
    }

    pub fn scale_rat(&self, q: &BigRat) -> Self {
        SpherePoly { k1: self.k1, k2: self.k2, poly: self.poly.scale_rat(q) }
    }

    /// Factor Euler operator E_b: termwise multiplication by factor degree.
    pub fn euler(&self, f: Factor) -> Self {
        let mut out = Self::zero(self.k1, self.k2);
        for (m, c) in self.poly.terms() {
            let d = m.factor_degree(f) as i64;
            if d != 0 {
                out.poly.add_term(m.clone(), c.scale(&BigRat::from_integer(d.into())));
            }
        }
        out
    }

    fn var_range(&self, f: Factor) -> std::ops::Range<usize> {
        let nx = self.k1 as usize + 1;
        let ny = self.k2 as usize + 1;
        match f {
            Factor::One => 0..nx,
            Factor::Two => nx..nx + ny,
        }
    }

    /// ⟨∇ᵇ p, ∇ᵇ q⟩ on Σ, exactly.
    pub fn gradient_pair(&self, q: &Self, f: Factor) -> Self {
        let mut out = Self::zero(self.k1, self.k2);
        for v in self.var_range(f) {
            let dp = SpherePoly { k1: self.k1, k2: self.k2, poly: self.poly.derivative(v) };
            let dq = SpherePoly { k1: self.k1, k2: self.k2, poly: q.poly.derivative(v) };
            out = out.add(&dp.mul(&dq));
        }
        let correction = self.euler(f).mul(&q.euler(f)).scale_rat(&-self.inv_r2(f));
        out.add(&correction)
    }

    /// Full tangential ⟨∇p, ∇q⟩ = sum over both factors.
    pub fn gradient_pair_full(&self, q: &Self) -> Self {
        self.gradient_pair(q, Factor::One).add(&self.gradient_pair(q, Factor::Two))
    }

    /// Factor Laplace–Beltrami operator via homogeneous decomposition.
    pub fn laplacian_factor(&self, f: Factor) -> Self {
        let k = self.kb(f);
        let mut out = Self::zero(self.k1, self.k2);
        // Ambient factor Laplacian.
        for v in self.var_range(f) {
            let d2 = self.poly.derivative(v).derivative(v);
            out.poly = out.poly.add(&d2);
        }
        // Radial correction per homogeneous degree: -d(d+k-1)/r².
        let inv_r2 = self.inv_r2(f);
        for (m, c) in self.poly.terms() {
            let d = m.factor_degree(f) as i64;
            if d != 0 {
                let coef = -&inv_r2 * BigRat::from_integer((d * (d + k as i64 - 1)).into());
                out.poly.add_term(m.clone(), c.scale(&coef));
            }
        }
        out
    }

    /// Laplace–Beltrami on the product: sum of factor Laplacians.
    pub fn laplacian(&self) -> Self {
        self.laplacian_factor(Factor::One).add(&self.laplacian_factor(Factor::Two))
    }

    /// Ambient components of the tangential gradient: for a variable in
    /// factor b, (∇^Σ q)_i = ∂_i q − r_b⁻² (E_b q) x_i.
    fn tangential_gradient_components(&self) -> Vec<Self> {
        let (nx, ny) = (self.k1 as usize + 1, self.k2 as usize + 1);
        let mut comps = Vec::with_capacity(nx + ny);
        let e1 = self.euler(Factor::One).scale_rat(&-self.inv_r2(Factor::One));
        let e2 = self.euler(Factor::Two).scale_rat(&-self.inv_r2(Factor::Two));
        for v in 0..nx + ny {
            let di = SpherePoly { k1: self.k1, k2: self.k2, poly: self.poly.derivative(v) };
            let (f, idx, radial) =
                if v < nx { (Factor::One, v, &e1) } else { (Factor::Two, v - nx, &e2) };
            let xi = Self::coordinate(self.k1, self.k2, f, idx);
            comps.push(di.add(&radial.mul(&xi)));
        }
        comps
    }

    /// (∇²_Σ p)(∇^Σ q1, ∇^Σ q2): ambient Hessian contraction with tangential
    /// gradients plus the second-fundamental-form correction.
    pub fn hessian_contract(&self, q1: &Self, q2: &Self) -> Self {
        let t1 = q1.tangential_gradient_components();
        let t2 = q2.tangential_gradient_components();
        let nvars = t1.len();
        let mut out = Self::zero(self.k1, self.k2);
        for i in 0..nvars {
            if t1[i].poly.is_structurally_zero() {
                continue;
            }
            let di = self.poly.derivative(i);
            for (j, t2j) in t2.iter().enumerate() {
                if t2j.poly.is_structurally_zero() {
                    continue;
                }
                let dij = SpherePoly { k1: self.k1, k2: self.k2, poly: di.derivative(j) };
                if dij.poly.is_structurally_zero() {
                    continue;
                }
                out = out.add(&dij.mul(&t1[i]).mul(t2j));
            }
        }
        for f in Factor::BOTH {
            let corr = self.euler(f).mul(&q1.gradient_pair(q2, f)).scale_rat(&-self.inv_r2(f));
            out = out.add(&corr);
        }
        out
    }

    /// Exact normalized integral over Σ.
    pub fn integrate(&self) -> RadicalScalar {
        let mut acc = RadicalScalar::zero(self.k1, self.k2);
        for (m, c) in self.poly.terms() {
            let moment = mono_moment(m, self.k1, self.k2).expect("arity enforced by type");
            if moment.value.is_zero() {
                continue;
            }
            acc = &acc + &(c * &moment.value.radical_eval(self.k1, self.k2));
        }
        acc
    }

    /// True iff this polynomial restricts to the zero function on Σ,
    /// decided exactly through ∫ p² = 0.
    pub fn is_zero_fn(&self) -> bool {
        if self.poly.is_structurally_zero() {
            return true;
        }
        self.mul(self).integrate().is_zero()
    }

    pub fn eval_f64(&self, xy: &[f64]) -> f64 {
        let nx = self.k1 as usize + 1;
        let mut acc = 0.0;
        for (m, c) in self.poly.terms() {
            let mut t = c.to_f64();
            for (i, &e) in m.x.iter().enumerate() {
                for _ in 0..e {
                    t *= xy[i];
                }
            }
            for (j, &e) in m.y.iter().enumerate() {
                for _ in 0..e {
                    t *= xy[nx + j];
                }
            }
            acc += t;
        }
        acc
    }

    /// Canonical text form, used in JSON reports.
    pub fn text_form(&self) -> String {
        if self.poly.is_structurally_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in self.poly.terms() {
            let mut s = format!("({c})");
            for (i, &e) in m.x.iter().enumerate() {
                if e == 1 {
                    s.push_str(&format!(" * x{}", i + 1));
                } else if e > 1 {
                    s.push_str(&format!(" * x{}^{}", i + 1, e));
                }
            }
            for (j, &e) in m.y.iter().enumerate() {
                if e == 1 {
                    s.push_str(&format!(" * y{}", j + 1));
                } else if e > 1 {
                    s.push_str(&format!(" * y{}^{}", j + 1, e));
                }
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

// ---------------------------------------------------------------------------
// Normal fields
// ---------------------------------------------------------------------------

/// Normal vector field on Σ: components along the factor normals N1, N2 and
/// the flat normals ∂_{z_α}.
#[derive(Clone, PartialEq, Debug)]
pub struct NormalField {
    pub u1: SpherePoly,
    pub u2: SpherePoly,
    pub z: Vec<SpherePoly>,
}

impl NormalField {
    pub fn zero(k1: u32, k2: u32, z_count: usize) -> Self {
        NormalField {
            u1: SpherePoly::zero(k1, k2),
            u2: SpherePoly::zero(k1, k2),
            z: vec![SpherePoly::zero(k1, k2); z_count],
        }
    }

    pub fn from_sphere_components(u1: SpherePoly, u2: SpherePoly) -> Self {
        NormalField { u1, u2, z: Vec::new() }
    }

    pub fn k1(&self) -> u32 {
        self.u1.k1
    }

    pub fn k2(&self) -> u32 {
        self.u1.k2
    }

    pub fn has_z(&self) -> bool {
        self.z.iter().any(|p| !p.poly.is_structurally_zero())
    }

    pub fn component(&self, f: Factor) -> &SpherePoly {
        match f {
            Factor::One => &self.u1,
            Factor::Two => &self.u2,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.z.len(), o.z.len(), "normal fields over different ambients");
        NormalField {
            u1: self.u1.add(&o.u1),
            u2: self.u2.add(&o.u2),
            z: self.z.iter().zip(&o.z).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        NormalField {
            u1: self.u1.neg(),
            u2: self.u2.neg(),
            z: self.z.iter().map(|p| p.neg()).collect(),
        }
    }

    pub fn scale(&self, c: &RadicalScalar) -> Self {
        NormalField {
            u1: self.u1.scale(c),
            u2: self.u2.scale(c),
            z: self.z.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn scale_rat(&self, q: &BigRat) -> Self {
        NormalField {
            u1: self.u1.scale_rat(q),
            u2: self.u2.scale_rat(q),
            z: self.z.iter().map(|p| p.scale_rat(q)).collect(),
        }
    }

    /// Exact zero test as a function on Σ.
    pub fn is_zero_fn(&self) -> bool {
        self.u1.is_zero_fn() && self.u2.is_zero_fn() && self.z.iter().all(|p| p.is_zero_fn())
    }
}

/// The stability operator on normal fields: (Δ+1) on the N_b components and
/// (Δ+1/2) on the flat-normal components.
pub fn apply_l(v: &NormalField) -> NormalField {
    let half = BigRat::new(1.into(), 2.into());
    NormalField {
        u1: v.u1.laplacian().add(&v.u1),
        u2: v.u2.laplacian().add(&v.u2),
        z: v.z.iter().map(|p| p.laplacian().add(&p.scale_rat(&half))).collect(),
    }
}

/// Normalized L² inner product of two normal fields, exact.
pub fn l2_inner(v: &NormalField, w: &NormalField) -> RadicalScalar {
    assert_eq!(v.z.len(), w.z.len(), "normal fields over different ambients");
    let mut acc = v.u1.mul(&w.u1).integrate();
    acc = &acc + &v.u2.mul(&w.u2).integrate();
    for (a, b) in v.z.iter().zip(&w.z) {
        acc = &acc + &a.mul(b).integrate();
    }
    acc
}

/// Normal projection of the polarized second variation of the shrinker
/// quantity, for fields with vanishing flat-normal components:
///
///   Π(D²φ(V,W))·N_b = −u_b w_b / r_b
///                    + Σ_a (2/r_b) ⟨∇ᵇu_a, ∇ᵇw_a⟩
///                    − Σ_a (2/r_b) (w_a Δᵃu_b + u_a Δᵃw_b)
///                    − Σ_a (2/r_a) (⟨∇ᵃu_b, ∇ᵃw_a⟩ + ⟨∇ᵃw_b, ∇ᵃu_a⟩)
pub fn d2phi_normal(v: &NormalField, w: &NormalField) -> Result<NormalField, EngineError> {
    if v.has_z() || w.has_z() {
        return Err(EngineError::NonzeroZComponent);
    }
    let (k1, k2) = (v.k1(), v.k2());
    let mut out = NormalField::zero(k1, k2, 0);
    for b in Factor::BOTH {
        let inv_rb = RadicalScalar::inv_radius(k1, k2, b);
        let two_inv_rb = inv_rb.scale(&BigRat::from_integer(2.into()));
        let ub = v.component(b);
        let wb = w.component(b);
        let mut comp = ub.mul(wb).scale(&inv_rb).neg();
        for a in Factor::BOTH {
            let two_inv_ra =
                RadicalScalar::inv_radius(k1, k2, a).scale(&BigRat::from_integer(2.into()));
            let ua = v.component(a);
            let wa = w.component(a);
            comp = comp.add(&ua.gradient_pair(wa, b).scale(&two_inv_rb));
            let lap_mix = wa.mul(&ub.laplacian_factor(a)).add(&ua.mul(&wb.laplacian_factor(a)));
            comp = comp.sub(&lap_mix.scale(&two_inv_rb));
            let grad_mix = ub.gradient_pair(wa, a).add(&wb.gradient_pair(ua, a));
            comp = comp.sub(&grad_mix.scale(&two_inv_ra));
        }
        match b {
            Factor::One => out.u1 = comp,
            Factor::Two => out.u2 = comp,
        }
    }
    Ok(out)
}

/// Normal projection of the third variation D³φ(V,V,V) for zero-z fields.
pub fn d3phi_normal(v: &NormalField) -> Result<NormalField, EngineError> {
    if v.has_z() {
        return Err(EngineError::NonzeroZComponent);
    }
    let (k1, k2) = (v.k1(), v.k2());
    let rat = |n: i64, d: i64| BigRat::new(n.into(), d.into());
    let mut comps = [SpherePoly::zero(k1, k2), SpherePoly::zero(k1, k2)];
    let kb = |f: Factor| match f {
        Factor::One => k1 as i64,
        Factor::Two => k2 as i64,
    };
    for b in Factor::BOTH {
        let ub = v.component(b);
        // 3 (u_b)³ / (2 k_b) on N_b.
        comps[b.index()] = comps[b.index()].add(&ub.mul(ub).mul(ub).scale_rat(&rat(3, 2 * kb(b))));
        for a in Factor::BOTH {
            let ua = v.component(a);
            // -6 u_a ⟨∇u_a, ∇u_b⟩ on N_b.
            comps[b.index()] =
                comps[b.index()].add(&ua.mul(&ua.gradient_pair_full(ub)).scale_rat(&rat(-6, 1)));
            // -18 ⟨∇ᵇu_a, ∇ᵇu_a⟩ u_b / (2 k_b) on N_b.
            comps[b.index()] = comps[b.index()]
                .add(&ua.gradient_pair(ua, b).mul(ub).scale_rat(&rat(-18, 2 * kb(b))));
            // +18 (u_b)² Δᵇ u_a / (2 k_b) on N_a.
            comps[a.index()] = comps[a.index()]
                .add(&ub.mul(ub).mul(&ua.laplacian_factor(b)).scale_rat(&rat(18, 2 * kb(b))));
            // -6 (∇²u_a)(∇u_b, ∇u_b) on N_a.
            comps[a.index()] =
                comps[a.index()].add(&ua.hessian_contract(ub, ub).scale_rat(&rat(-6, 1)));
            // +36 u_b ⟨∇ᵇu_b, ∇ᵇu_a⟩ / (2 k_b) on N_a.
            comps[a.index()] = comps[a.index()]
                .add(&ub.mul(&ub.gradient_pair(ua, b)).scale_rat(&rat(36, 2 * kb(b))));
            // -6 ⟨∇u_b, ∇u_a⟩ Δu_b on N_a.
            comps[a.index()] = comps[a.index()]
                .add(&ub.gradient_pair_full(ua).mul(&ub.laplacian()).scale_rat(&rat(-6, 1)));
        }
    }
    let [u1, u2] = comps;
    Ok(NormalField { u1, u2, z: Vec::new() })
}

// ---------------------------------------------------------------------------
// Jacobi bases and projection
// ---------------------------------------------------------------------------

/// Which Jacobi subspace a projection targets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum JacobiSubspace {
    /// All Jacobi fields.
    K,
    /// Rotation-generated Jacobi fields.
    K0,
    /// Orthogonal complement of the rotations inside the kernel.
    K1,
}

/// Explicit bases of the Jacobi spaces on Σ ⊂ R^N.
#[derive(Clone, Debug)]
pub struct JacobiBasis {
    pub k1: u32,
    pub k2: u32,
    pub big_n: u32,
    pub k0: Vec<NormalField>,
    pub k1_basis: Vec<NormalField>,
}

impl JacobiBasis {
    pub fn all(&self) -> Vec<NormalField> {
        self.k0.iter().chain(&self.k1_basis).cloned().collect()
    }

    pub fn dim_k0(&self) -> usize {
        self.k0.len()
    }

    pub fn dim_k1(&self) -> usize {
        self.k1_basis.len()
    }

    pub fn dim_k(&self) -> usize {
        self.k0.len() + self.k1_basis.len()
    }

    pub fn basis_for(&self, s: JacobiSubspace) -> Vec<NormalField> {
        match s {
            JacobiSubspace::K => self.all(),
            JacobiSubspace::K0 => self.k0.clone(),
            JacobiSubspace::K1 => self.k1_basis.clone(),
        }
    }
}

/// Construct the Jacobi bases on Σ ⊂ R^N.
///
/// K1 is spanned by x_i y_j (r1 N1 + r2 N2). The rotations K0 contribute
/// x_i y_j (N2/r2 − N1/r1) from mixed-factor coordinate rotations and
/// θ_i ∂_z from rotations into the flat directions.
pub fn jacobi_basis(k1: u32, k2: u32, big_n: u32) -> Result<JacobiBasis, EngineError> {
    let n = k1 + k2;
    if big_n < n + 2 {
        return Err(EngineError::AmbientTooSmall { needed: n + 2, got: big_n });
    }
    let z_count = (big_n - n - 2) as usize;
    let r1 = RadicalScalar::radius(k1, k2, Factor::One);
    let r2 = RadicalScalar::radius(k1, k2, Factor::Two);
    let inv_r1 = RadicalScalar::inv_radius(k1, k2, Factor::One);
    let inv_r2 = RadicalScalar::inv_radius(k1, k2, Factor::Two);

    let mut k1_basis = Vec::new();
    let mut k0 = Vec::new();
    for i in 0..=k1 as usize {
        for j in 0..=k2 as usize {
            let xi = SpherePoly::coordinate(k1, k2, Factor::One, i);
            let yj = SpherePoly::coordinate(k1, k2, Factor::Two, j);
            let xy = xi.mul(&yj);
            let mut f = NormalField::zero(k1, k2, z_count);
            f.u1 = xy.scale(&r1);
            f.u2 = xy.scale(&r2);
            k1_basis.push(f);

            let mut rot = NormalField::zero(k1, k2, z_count);
            rot.u1 = xy.scale(&inv_r1).neg();
            rot.u2 = xy.scale(&inv_r2);
            k0.push(rot);
        }
    }
    // Rotations mixing a sphere coordinate with a flat direction.
    for alpha in 0..z_count {
        for i in 0..=k1 as usize {
            let mut f = NormalField::zero(k1, k2, z_count);
            f.z[alpha] = SpherePoly::coordinate(k1, k2, Factor::One, i);
            k0.push(f);
        }
        for j in 0..=k2 as usize {
            let mut f = NormalField::zero(k1, k2, z_count);
            f.z[alpha] = SpherePoly::coordinate(k1, k2, Factor::Two, j);
            k0.push(f);
        }
    }
    Ok(JacobiBasis { k1, k2, big_n, k0, k1_basis })
}

/// Solve a square linear system over the radical field by Gaussian
/// elimination with exact pivoting.
pub fn solve_radical_system(
    mut a: Vec<Vec<RadicalScalar>>,
    mut b: Vec<RadicalScalar>,
) -> Result<Vec<RadicalScalar>, EngineError> {
    let n = a.len();
    for row in &a {
        assert_eq!(row.len(), n, "system matrix must be square");
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(EngineError::SingularGram)?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].inv();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            for c in col..n {
                let delta = &factor * &a[col][c];
                a[r][c] = &a[r][c] - &delta;
            }
            let delta = &factor * &b[col];
            b[r] = &b[r] - &delta;
        }
    }
    Ok((0..n).map(|i| &b[i] * &a[i][i].inv()).collect())
}

/// Exact L² projection of a normal field onto a Jacobi subspace.
pub fn project(
    v: &NormalField,
    basis: &JacobiBasis,
    subspace: JacobiSubspace,
) -> Result<NormalField, EngineError> {
    let fields = basis.basis_for(subspace);
    if fields.is_empty() {
        return Ok(NormalField::zero(v.k1(), v.k2(), v.z.len()));
    }
    // Align z arity: a field without flat components pairs as zero there.
    let target = fields.iter().map(|f| f.z.len()).max().unwrap_or(0).max(v.z.len());
    let align = |f: &NormalField| {
        let mut g = f.clone();
        g.z.resize(target, SpherePoly::zero(v.k1(), v.k2()));
        g
    };
    let v_aligned = align(v);
    let fields: Vec<NormalField> = fields.iter().map(&align).collect();
    let gram: Vec<Vec<RadicalScalar>> =
        fields.iter().map(|fi| fields.iter().map(|fj| l2_inner(fi, fj)).collect()).collect();
    let rhs: Vec<RadicalScalar> = fields.iter().map(|fi| l2_inner(&v_aligned, fi)).collect();
    let coeffs = solve_radical_system(gram, rhs)?;
    let mut out = NormalField::zero(v.k1(), v.k2(), v_aligned.z.len());
    for (c, f) in coeffs.iter().zip(&fields) {
        out = out.add(&f.scale(c));
    }
    out.z.truncate(v.z.len());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn coord(k1: u32, k2: u32, f: Factor, i: usize) -> SpherePoly {
        SpherePoly::coordinate(k1, k2, f, i)
    }

    /// u = Σ a_i x_i y_i with rational a, embedded over the radical field.
    fn u_sphere(k1: u32, k2: u32, a: &[BigRat]) -> SpherePoly {
        let mut p = SpherePoly::zero(k1, k2);
        for (i, ai) in a.iter().enumerate() {
            let t = coord(k1, k2, Factor::One, i).mul(&coord(k1, k2, Factor::Two, i));
            p = p.add(&t.scale_rat(ai));
        }
        p
    }

    /// The K1 field U = u (r1 N1 + r2 N2).
    fn u_field(k1: u32, k2: u32, a: &[BigRat]) -> NormalField {
        let u = u_sphere(k1, k2, a);
        NormalField::from_sphere_components(
            u.scale(&RadicalScalar::radius(k1, k2, Factor::One)),
            u.scale(&RadicalScalar::radius(k1, k2, Factor::Two)),
        )
    }

    #[test]
    fn laplacian_eigenvalues() {
        // Δθ_i = -θ_i/2 and Δ(θ_i θ_j) = -(θ_i θ_j) across factor pairs.
        for (k1, k2) in [(1u32, 1u32), (2, 3), (4, 6), (6, 5)] {
            let x = coord(k1, k2, Factor::One, 0);
            let y = coord(k1, k2, Factor::Two, k2 as usize);
            assert_eq!(x.laplacian(), x.scale_rat(&rat(-1, 2)));
            assert_eq!(y.laplacian(), y.scale_rat(&rat(-1, 2)));
            let xy = x.mul(&y);
            assert_eq!(xy.laplacian(), xy.neg());
        }
    }

    #[test]
    fn laplacian_of_u_squared_identity() {
        // Δu² = -2(1 + r1⁻² + r2⁻²)u² + 2v1 + 2v2 with v_b = Σ a_i² θ_b,i².
        for (k1, k2) in [(1u32, 1u32), (2, 3)] {
            let full = [int(1), int(-2)];
            let a = &full[..(k1.min(k2) as usize + 1).min(2)];
            let u = u_sphere(k1, k2, a);
            let u2 = u.mul(&u);
            let lhs = u2.laplacian();
            let mut v1 = SpherePoly::zero(k1, k2);
            let mut v2 = SpherePoly::zero(k1, k2);
            for (i, ai) in a.iter().enumerate() {
                let xi = coord(k1, k2, Factor::One, i);
                let yi = coord(k1, k2, Factor::Two, i);
                v1 = v1.add(&xi.mul(&xi).scale_rat(&(ai * ai)));
                v2 = v2.add(&yi.mul(&yi).scale_rat(&(ai * ai)));
            }
            let coef = rat(-2, 1) * (int(1) + rat(1, 2 * k1 as i64) + rat(1, 2 * k2 as i64));
            let rhs = u2.scale_rat(&coef).add(&v1.scale_rat(&int(2))).add(&v2.scale_rat(&int(2)));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn gradient_pair_examples() {
        let (k1, k2) = (2u32, 2u32);
        // Constant has zero gradient.
        let c = SpherePoly::constant_rat(k1, k2, int(5));
        let x1 = coord(k1, k2, Factor::One, 0);
        assert!(c.gradient_pair(&x1, Factor::One).is_zero_fn());
        // ⟨∇¹x1, ∇¹x2⟩ = -r1⁻² x1 x2.
        let x2 = coord(k1, k2, Factor::One, 1);
        let got = x1.gradient_pair(&x2, Factor::One);
        let expect = x1.mul(&x2).scale_rat(&rat(-1, 2 * k1 as i64));
        assert_eq!(got, expect);
        // |∇¹u|² = v2 - r1⁻² u² termwise for diagonal u.
        let a = [int(1), int(3), rat(-1, 2)];
        let u = u_sphere(k1, k2, &a);
        let got = u.gradient_pair(&u, Factor::One);
        let mut v2 = SpherePoly::zero(k1, k2);
        for (i, ai) in a.iter().enumerate() {
            let yi = coord(k1, k2, Factor::Two, i);
            v2 = v2.add(&yi.mul(&yi).scale_rat(&(ai * ai)));
        }
        let expect = v2.add(&u.mul(&u).scale_rat(&rat(-1, 2 * k1 as i64)));
        assert_eq!(got, expect);
    }

    #[test]
    fn integration_by_parts_gradient_vs_laplacian() {
        // ∫⟨∇p, ∇q⟩ = -∫ q Δp exactly for random low-degree polynomials.
        let (k1, k2) = (2u32, 3u32);
        let mut state = 11u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 35) % 7) as i64 - 3
        };
        for _ in 0..3 {
            let mut p = SpherePoly::zero(k1, k2);
            let mut q = SpherePoly::zero(k1, k2);
            for i in 0..=k1 as usize {
                for j in 0..=k2 as usize {
                    let m = coord(k1, k2, Factor::One, i).mul(&coord(k1, k2, Factor::Two, j));
                    p = p.add(&m.scale_rat(&int(next())));
                    let m2 = coord(k1, k2, Factor::One, i)
                        .mul(&coord(k1, k2, Factor::One, (i + 1) % (k1 as usize + 1)));
                    q = q.add(&m2.scale_rat(&int(next())));
                }
            }
            let q = q.add(&p.mul(&p)); // mix degrees up to 4
            let lhs = p.gradient_pair_full(&q).integrate();
            let rhs = -&q.mul(&p.laplacian()).integrate();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn hessian_contract_integral_identity() {
        let (k1, k2) = (1u32, 1u32);
        let c = SpherePoly::constant_rat(k1, k2, int(3));
        let u0 = u_sphere(k1, k2, &[int(1)]);
        assert!(c.hessian_contract(&u0, &u0).is_zero_fn());
        // ∫ u (∇²u)(∇u,∇u) = -1/2 ∫|∇u|⁴ + 1/6 ∫u⁴ for diagonal Jacobi u
        // (from ∫u²|∇u|² = ∫u⁴/3 and Δu = -u on the product).
        for (k1, k2, a) in [
            (1u32, 1u32, vec![int(1)]),
            (2, 2, vec![int(1), int(-1), int(2)]),
            (1, 3, vec![rat(1, 2), int(1)]),
        ] {
            let u = u_sphere(k1, k2, &a);
            let lhs = u.mul(&u.hessian_contract(&u, &u)).integrate();
            let grad2 = u.gradient_pair_full(&u);
            let i_grad4 = grad2.mul(&grad2).integrate();
            let u2 = u.mul(&u);
            let i_u4 = u2.mul(&u2).integrate();
            let expect = &i_grad4.scale(&rat(-1, 2)) + &i_u4.scale(&rat(1, 6));
            assert_eq!(lhs, expect, "k=({k1},{k2})");
        }
    }

    #[test]
    fn hessian_contract_matches_finite_differences() {
        // Spot-check (∇²p)(∇p,∇p) against an angle-chart finite-difference
        // oracle on the torus S¹(r)×S¹(r).
        let (k1, k2) = (1u32, 1u32);
        let p = u_sphere(k1, k2, &[int(1)]);
        let r = 2.0f64.sqrt();
        let hessian_fd = |theta: f64, psi: f64| -> f64 {
            let eval = |t: f64, s: f64| -> f64 {
                let xy = [r * t.cos(), r * t.sin(), r * s.cos(), r * s.sin()];
                p.eval_f64(&xy)
            };
            let h = 1e-4;
            // Flat metric diag(r², r²): normalize angle derivatives by r.
            let d1 = (eval(theta + h, psi) - eval(theta - h, psi)) / (2.0 * h) / r;
            let d2 = (eval(theta, psi + h) - eval(theta, psi - h)) / (2.0 * h) / r;
            let d11 = (eval(theta + h, psi) - 2.0 * eval(theta, psi) + eval(theta - h, psi))
                / (h * h)
                / (r * r);
            let d22 = (eval(theta, psi + h) - 2.0 * eval(theta, psi) + eval(theta, psi - h))
                / (h * h)
                / (r * r);
            let d12 = (eval(theta + h, psi + h) - eval(theta + h, psi - h)
                - eval(theta - h, psi + h)
                + eval(theta - h, psi - h))
                / (4.0 * h * h)
                / (r * r);
            d11 * d1 * d1 + 2.0 * d12 * d1 * d2 + d22 * d2 * d2
        };
        let sym = p.hessian_contract(&p, &p);
        for (theta, psi) in [(0.3f64, 1.2f64), (2.0, -0.7), (4.4, 2.9), (1.0, 1.0)] {
            let xy = [r * theta.cos(), r * theta.sin(), r * psi.cos(), r * psi.sin()];
            let got = sym.eval_f64(&xy);
            let fd = hessian_fd(theta, psi);
            assert!((got - fd).abs() < 1e-5, "theta={theta} psi={psi}: {got} vs {fd}");
        }
    }

    #[test]
    fn stability_operator_kernel_and_nonkernel() {
        let (k1, k2) = (2u32, 3u32);
        let basis = jacobi_basis(k1, k2, k1 + k2 + 4).unwrap();
        for f in basis.all() {
            assert!(apply_l(&f).is_zero_fn());
        }
        // Constant N1 component reproduces itself; θ N1 is not in the kernel.
        let mut c = NormalField::zero(k1, k2, 0);
        c.u1 = SpherePoly::constant_rat(k1, k2, int(7));
        assert_eq!(apply_l(&c), c);
        let mut e = NormalField::zero(k1, k2, 0);
        e.u1 = coord(k1, k2, Factor::One, 0);
        let le = apply_l(&e);
        assert_eq!(le.u1, e.u1.scale_rat(&rat(1, 2)));
    }

    #[test]
    fn jacobi_dimensions() {
        let b = jacobi_basis(1, 1, 4).unwrap();
        assert_eq!(b.dim_k1(), 4);
        assert_eq!(b.dim_k0(), 4); // no flat directions at N = 4
        let b = jacobi_basis(2, 3, 9).unwrap();
        assert_eq!(b.dim_k1(), 12);
        assert_eq!(b.dim_k0(), 12 + 2 * 7);
        assert!(jacobi_basis(2, 3, 6).is_err());
    }

    #[test]
    fn k0_k1_gram_vanishes_and_projection_decomposes() {
        for (k1, k2) in [(1u32, 1u32), (1, 2), (2, 3)] {
            let basis = jacobi_basis(k1, k2, k1 + k2 + 3).unwrap();
            for f0 in &basis.k0 {
                for f1 in &basis.k1_basis {
                    assert!(l2_inner(f0, f1).is_zero(), "k=({k1},{k2})");
                }
            }
            // Idempotence on K1 elements.
            let v = &basis.k1_basis[0];
            let pv = project(v, &basis, JacobiSubspace::K1).unwrap();
            assert!(pv.sub(v).is_zero_fn());
            // Orthogonal decomposition on a mixed field.
            let mixed =
                basis.k0[0].add(&basis.k1_basis[1]).add(&basis.k1_basis[0].scale_rat(&rat(2, 3)));
            let p0 = project(&mixed, &basis, JacobiSubspace::K0).unwrap();
            let p1 = project(&mixed, &basis, JacobiSubspace::K1).unwrap();
            let pk = project(&mixed, &basis, JacobiSubspace::K).unwrap();
            assert!(p0.add(&p1).sub(&pk).is_zero_fn());
            assert!(pk.sub(&mixed).is_zero_fn());
        }
    }

    #[test]
    fn green_identity_for_l() {
        // ⟨LV, W⟩ = ⟨V, LW⟩ exactly on random normal fields with z parts.
        let (k1, k2) = (1u32, 2u32);
        let mut state = 5u64;
        let mut next = move || {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            ((state >> 40) % 9) as i64 - 4
        };
        for _ in 0..3 {
            let mut v = NormalField::zero(k1, k2, 2);
            let mut w = NormalField::zero(k1, k2, 2);
            for i in 0..=k1 as usize {
                for j in 0..=k2 as usize {
                    let m = coord(k1, k2, Factor::One, i).mul(&coord(k1, k2, Factor::Two, j));
                    v.u1 = v.u1.add(&m.scale_rat(&int(next())));
                    v.u2 = v.u2.add(&m.mul(&m).scale_rat(&int(next())));
                    w.u1 = w.u1.add(&m.scale_rat(&int(next())));
                    w.u2 = w.u2.add(&m.scale_rat(&int(next())));
                    v.z[0] = v.z[0].add(&m.scale_rat(&int(next())));
                    w.z[1] = w.z[1].add(&m.scale_rat(&int(next())));
                }
            }
            let lhs = l2_inner(&apply_l(&v), &w);
            let rhs = l2_inner(&v, &apply_l(&w));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn d2phi_requires_zero_z_and_is_symmetric_bilinear() {
        let (k1, k2) = (1u32, 2u32);
        let u = u_field(k1, k2, &[int(1), int(2)]);
        let mut with_z = NormalField::zero(k1, k2, 1);
        with_z.z[0] = coord(k1, k2, Factor::One, 0);
        assert!(matches!(d2phi_normal(&u, &with_z), Err(EngineError::NonzeroZComponent)));

        // Symmetry and vanishing on the zero field.
        let w = u_field(k1, k2, &[int(2), int(-1)]);
        let ab = d2phi_normal(&u, &w).unwrap();
        let ba = d2phi_normal(&w, &u).unwrap();
        assert!(ab.sub(&ba).is_zero_fn());
        let zero = NormalField::zero(k1, k2, 0);
        assert!(d2phi_normal(&zero, &u).unwrap().is_zero_fn());
    }

    #[test]
    fn d2phi_of_jacobi_mode_is_orthogonal_to_kernel() {
        for (k1, k2) in [(1u32, 1u32), (1, 2), (2, 2)] {
            let full = [int(1), rat(-3, 2)];
            let a = &full[..(k1.min(k2) as usize + 1).min(2)];
            let u = u_field(k1, k2, a);
            let d2 = d2phi_normal(&u, &u).unwrap();
            let basis = jacobi_basis(k1, k2, k1 + k2 + 3).unwrap();
            let proj = project(&d2, &basis, JacobiSubspace::K).unwrap();
            assert!(proj.is_zero_fn(), "k=({k1},{k2})");
        }
    }

    #[test]
    fn d3phi_cubic_homogeneity() {
        let (k1, k2) = (1u32, 2u32);
        let u = u_field(k1, k2, &[int(1), int(1)]);
        let t = rat(3, 2);
        let lhs = d3phi_normal(&u.scale_rat(&t)).unwrap();
        let rhs = d3phi_normal(&u).unwrap().scale_rat(&(&t * &t * &t));
        assert!(lhs.sub(&rhs).is_zero_fn());
        assert!(d3phi_normal(&NormalField::zero(k1, k2, 0)).unwrap().is_zero_fn());
    }

    #[test]
    fn cubic_pairing_matches_moment_closed_form() {
        // ⟨D³φ(U,U,U), U⟩ = (-9M₂ - M₂²)∫u⁴ + 3M₂²∫|∇u|⁴ for diagonal U.
        for (k1, k2, a) in [
            (1u32, 1u32, vec![int(1)]),
            (1, 2, vec![int(1), int(-2)]),
            (2, 2, vec![int(2), int(1), rat(1, 2)]),
        ] {
            let u_s = u_sphere(k1, k2, &a);
            let u = u_field(k1, k2, &a);
            let d3 = d3phi_normal(&u).unwrap();
            let lhs = l2_inner(&d3, &u);
            let m2 = RadicalScalar::from_rat(k1, k2, int(2 * (k1 as i64 + k2 as i64)));
            let u2 = u_s.mul(&u_s);
            let i_u4 = u2.mul(&u2).integrate();
            let grad2 = u_s.gradient_pair_full(&u_s);
            let i_grad4 = grad2.mul(&grad2).integrate();
            let c_u4 = &(&m2.scale(&int(-9)) - &(&m2 * &m2)) * &i_u4;
            let c_g4 = &(&m2 * &m2).scale(&int(3)) * &i_grad4;
            let rhs = &c_u4 + &c_g4;
            assert_eq!(lhs, rhs, "k=({k1},{k2})");
        }
    }

    #[test]
    fn l2_inner_norm_of_k1_mode() {
        // ⟨U, U⟩ = (r1² + r2²) r1² r2² Σa_i² / ((k1+1)(k2+1)), normalized.
        let (k1, k2) = (2u32, 3u32);
        let a = [int(1), int(2)];
        let u = u_field(k1, k2, &a);
        let norm = l2_inner(&u, &u);
        let s2 = int(5);
        let expect = int(2 * (k1 + k2) as i64) * int(2 * k1 as i64) * int(2 * k2 as i64) * s2
            / int(((k1 + 1) * (k2 + 1)) as i64);
        assert_eq!(norm, RadicalScalar::from_rat(k1, k2, expect));
    }
}
