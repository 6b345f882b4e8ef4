//! Singular value decomposition for small dense matrices.
//!
//! One-sided Jacobi on the columns: accurate and tiny, which is all the
//! Jacobi-coefficient normal form needs (matrices are (k1+1)×(k2+1) with
//! k ≤ 8). This is the single floating-point step of the exact pipeline;
//! callers snap the resulting diagonal back to rationals.

use crate::rat::{snap_to_rational, BigRat};

/// Result of `svd_small`: a = u · diag(sigma) · vᵀ with orthonormal u, v.
#[derive(Clone, Debug)]
pub struct Svd {
    /// m×r with orthonormal columns (r = min(m, n)).
    pub u: Vec<Vec<f64>>,
    /// Singular values, descending, nonnegative.
    pub sigma: Vec<f64>,
    /// n×r with orthonormal columns.
    pub v: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One-sided Jacobi SVD of an m×n matrix given in row-major rows.
pub fn svd_small(a: &[Vec<f64>]) -> Svd {
    let m = a.len();
    let n = if m > 0 { a[0].len() } else { 0 };
    // Work on columns of a (as vectors of length m); accumulate v.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let tol = 1e-15;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = dot(&cols[p], &cols[q]);
                let app = dot(&cols[p], &cols[p]);
                let aqq = dot(&cols[q], &cols[q]);
                off = off.max(apq.abs() / (app * aqq).sqrt().max(1e-300));
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                // Jacobi rotation zeroing the (p,q) inner product.
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (xp, xq) = (cols[p][i], cols[q][i]);
                    cols[p][i] = c * xp - s * xq;
                    cols[q][i] = s * xp + c * xq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[p][i], v[q][i]);
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if off < tol {
            break;
        }
    }

    // Column norms are the singular values.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let r = m.min(n);
    let mut sigma = Vec::with_capacity(r);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut v_cols: Vec<Vec<f64>> = Vec::with_capacity(r);
    for &j in order.iter().take(r) {
        let s = norms[j];
        sigma.push(s);
        if s > 1e-300 {
            u_cols.push(cols[j].iter().map(|x| x / s).collect());
        } else {
            // Null direction: pick any unit vector orthogonal to current u's.
            let mut e = vec![0.0; m];
            'fill: for d in 0..m {
                e.iter_mut().for_each(|x| *x = 0.0);
                e[d] = 1.0;
                for uc in &u_cols {
                    let proj = dot(&e, uc);
                    for i in 0..m {
                        e[i] -= proj * uc[i];
                    }
                }
                let nrm = dot(&e, &e).sqrt();
                if nrm > 1e-8 {
                    e.iter_mut().for_each(|x| *x /= nrm);
                    break 'fill;
                }
            }
            u_cols.push(e);
        }
        v_cols.push(v[j].clone());
    }
    // Return u as m×r rows, v as n×r rows.
    let u = (0..m).map(|i| u_cols.iter().map(|c| c[i]).collect()).collect();
    let v = (0..n).map(|i| v_cols.iter().map(|c| c[i]).collect()).collect();
    Svd { u, sigma, v }
}

impl Svd {
    /// Residual ‖a − u diag(sigma) vᵀ‖_max against the original matrix.
    pub fn reconstruction_error(&self, a: &[Vec<f64>]) -> f64 {
        let m = a.len();
        let n = if m > 0 { a[0].len() } else { 0 };
        let r = self.sigma.len();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..r {
                    s += self.u[i][l] * self.sigma[l] * self.v[j][l];
                }
                worst = worst.max((a[i][j] - s).abs());
            }
        }
        worst
    }

    /// Snap the singular values to exact rationals for the exact pipeline.
    pub fn sigma_as_rationals(&self, tol: f64) -> Vec<BigRat> {
        self.sigma.iter().map(|&s| snap_to_rational(s, tol)).collect()
    }
}

/// Diagonalize a rational Jacobi-coefficient matrix: returns the snapped
/// diagonal (descending) together with the floating factors.
pub fn svd_diagonalize(c: &[Vec<BigRat>]) -> (Vec<BigRat>, Svd) {
    let a: Vec<Vec<f64>> =
        c.iter().map(|row| row.iter().map(crate::rat::to_f64).collect()).collect();
    let svd = svd_small(&a);
    let diag = svd.sigma_as_rationals(1e-9);
    (diag, svd)
}
