//! Singular value decomposition by one-sided Jacobi, and the orthogonal
//! Procrustes projection built on it.
//!
//! One-sided Jacobi is accurate and simple at the dimensions used here
//! (n <= 1024): columns of a working copy are pairwise orthogonalized by
//! plane rotations until every inner product falls below `JACOBI_TOL`
//! relative to the column norms.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Relative off-diagonal threshold for Jacobi convergence.
pub const JACOBI_TOL: f64 = 1e-14;
/// Sweep cap; exceeded only for pathological inputs.
pub const MAX_SWEEPS: usize = 100;

/// Result of [`svd`]: `m = u * diag(s) * v^T`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

/// One-sided Jacobi SVD for square matrices.
pub fn svd(m: &Matrix) -> Result<Svd> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Svd { u: Matrix::zeros(0, 0), s: Vec::new(), v: Matrix::zeros(0, 0) });
    }

    // Work on columns; store both B and V column-major for contiguous access.
    let mut b = to_columns(m);
    let mut v = to_columns(&Matrix::identity(n));

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = column_moments(&b, n, p, q);
                let scale = (alpha * beta).sqrt();
                if scale == 0.0 || gamma.abs() <= JACOBI_TOL * scale {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut b, n, p, q, c, s);
                rotate_columns(&mut v, n, p, q, c, s);
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence { sweeps: MAX_SWEEPS });
    }

    // Column norms are the singular values; sort descending.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|k| b[k * n..(k + 1) * n].iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let mut s = Vec::with_capacity(n);
    let mut u = Matrix::zeros(n, n);
    let mut v_sorted = Matrix::zeros(n, n);
    let cutoff = norms[order[0]] * (n as f64) * f64::EPSILON;
    let mut tiny_cols: Vec<usize> = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let norm = norms[src];
        s.push(norm);
        for r in 0..n {
            v_sorted[(r, dst)] = v[src * n + r];
        }
        if norm > cutoff && norm > 0.0 {
            for r in 0..n {
                u[(r, dst)] = b[src * n + r] / norm;
            }
        } else {
            tiny_cols.push(dst);
        }
    }
    // Rank-deficient input: complete U to an orthonormal basis so that
    // downstream products such as U V^T stay orthogonal.
    for dst in tiny_cols {
        fill_orthonormal_column(&mut u, dst);
    }

    Ok(Svd { u, s, v: v_sorted })
}

fn to_columns(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let mut cols = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            cols[c * n + r] = m[(r, c)];
        }
    }
    cols
}

fn column_moments(cols: &[f64], n: usize, p: usize, q: usize) -> (f64, f64, f64) {
    let cp = &cols[p * n..(p + 1) * n];
    let cq = &cols[q * n..(q + 1) * n];
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut gamma = 0.0;
    for (a, b) in cp.iter().zip(cq) {
        alpha += a * a;
        beta += b * b;
        gamma += a * b;
    }
    (alpha, beta, gamma)
}

fn rotate_columns(cols: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let (head, tail) = cols.split_at_mut(hi * n);
    let cp = &mut head[lo * n..(lo + 1) * n];
    let cq = &mut tail[..n];
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

fn fill_orthonormal_column(u: &mut Matrix, dst: usize) {
    let n = u.rows();
    for candidate in 0..n {
        // Try a unit vector, project out existing columns, keep it if
        // anything of substance remains.
        let mut col = vec![0.0; n];
        col[candidate] = 1.0;
        for k in 0..n {
            if k == dst {
                continue;
            }
            let dot: f64 = (0..n).map(|r| u[(r, k)] * col[r]).sum();
            if dot != 0.0 {
                for (r, c) in col.iter_mut().enumerate() {
                    *c -= dot * u[(r, k)];
                }
            }
        }
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for (r, c) in col.iter().enumerate() {
                u[(r, dst)] = c / norm;
            }
            return;
        }
    }
}

/// `argmax_{R in O(n)} <C, R>`, the classic orthogonal Procrustes
/// solution `U V^T` from the SVD of `C`.
pub fn procrustes(c: &Matrix) -> Result<Matrix> {
    let Svd { u, v, .. } = svd(c)?;
    u.matmul(&v.transpose())
}

/// Procrustes constrained to SO(n): when `det(U V^T) = -1` the sign of
/// the last column of `U` (smallest singular value) is flipped before
/// forming the product, which costs the least objective value among all
/// single-column flips.
pub fn procrustes_rotation(c: &Matrix) -> Result<Matrix> {
    let Svd { u, v, .. } = svd(c)?;
    let mut product = u.matmul(&v.transpose())?;
    if product.determinant()? < 0.0 {
        let n = u.rows();
        let last = n - 1;
        // U V^T with the last column of U negated equals the product
        // minus twice the rank-one piece u_last v_last^T.
        for r in 0..n {
            for col in 0..n {
                product[(r, col)] -= 2.0 * u[(r, last)] * v[(col, last)];
            }
        }
    }
    Ok(product)
}

/// `||R^T R - I||_F`, the distance of `R` from the orthogonal manifold.
pub fn orthonormality_defect(r: &Matrix) -> Result<f64> {
    if !r.is_square() {
        return Err(Error::NotSquare { rows: r.rows(), cols: r.cols() });
    }
    let mut gram = r.transpose_matmul(r)?;
    for k in 0..gram.rows() {
        gram[(k, k)] -= 1.0;
    }
    Ok(gram.frobenius_norm())
}

/// Projects a near-rotation back onto SO(n).
pub fn reorthonormalize(r: &Matrix) -> Result<Matrix> {
    procrustes_rotation(r)
}
