//! Cayley-transform rotation learner, the gradient-based baseline.
//!
//! A rotation is parameterized by an antisymmetric matrix `A` through
//! `R = (I - A)(I + A)^{-1}`, which covers every rotation without a -1
//! eigenvalue. Parameters live in the strict upper triangle, so
//! antisymmetry is structural rather than maintained numerically. Each
//! step needs a linear solve; rotations close to -1 eigenvalues push
//! `||A||` toward infinity and the solver tracks a condition estimate so
//! that callers can see the blowup instead of silently losing accuracy.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Condition-number estimate above which a state reports itself
/// ill-conditioned.
pub const CONDITION_WARN: f64 = 1e8;

/// Default learning rate for convex test objectives (unit-scale data).
pub const DEFAULT_CONVEX_LR: f64 = 0.05;
/// Default learning rate when used as the OPQ inner update, matching the
/// Givens descent budget per step.
pub const DEFAULT_OPQ_LR: f64 = 1e-4;

// ---------------------------------------------------------------------
// LU with partial pivoting. Lives here because the Cayley map is the
// only consumer of a general linear solver in this crate.

struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

fn lu_factor(m: &Matrix) -> Result<LuFactors> {
    let n = m.rows();
    let mut lu = m.data().to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[k * n + k].abs();
        for r in (k + 1)..n {
            let v = lu[r * n + k].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Err(Error::Singular);
        }
        if piv != k {
            for c in 0..n {
                lu.swap(k * n + c, piv * n + c);
            }
            perm.swap(k, piv);
        }
        let pivot = lu[k * n + k];
        for r in (k + 1)..n {
            let factor = lu[r * n + k] / pivot;
            lu[r * n + k] = factor;
            if factor == 0.0 {
                continue;
            }
            for c in (k + 1)..n {
                lu[r * n + c] -= factor * lu[k * n + c];
            }
        }
    }
    Ok(LuFactors { n, lu, perm })
}

impl LuFactors {
    /// Solves `A X = B` column by column.
    fn solve(&self, b: &Matrix) -> Matrix {
        let n = self.n;
        let cols = b.cols();
        let mut x = Matrix::zeros(n, cols);
        let mut col = vec![0.0f64; n];
        for c in 0..cols {
            for r in 0..n {
                col[r] = b[(self.perm[r], c)];
            }
            for r in 1..n {
                let mut acc = col[r];
                for k in 0..r {
                    acc -= self.lu[r * n + k] * col[k];
                }
                col[r] = acc;
            }
            for r in (0..n).rev() {
                let mut acc = col[r];
                for k in (r + 1)..n {
                    acc -= self.lu[r * n + k] * col[k];
                }
                col[r] = acc / self.lu[r * n + r];
            }
            for r in 0..n {
                x[(r, c)] = col[r];
            }
        }
        x
    }
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.rows() != b.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} rows", a.rows()),
            got: format!("{} rows", b.rows()),
        });
    }
    Ok(lu_factor(a)?.solve(b))
}

/// Explicit inverse; used where the inverse itself feeds later products.
pub fn invert(a: &Matrix) -> Result<Matrix> {
    solve(a, &Matrix::identity(a.rows()))
}

fn check_antisymmetric(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let asym = a.add(&a.transpose())?.frobenius_norm();
    if asym > 1e-12 * (1.0 + a.frobenius_norm()) {
        return Err(Error::NotAntisymmetric { asym });
    }
    Ok(())
}

/// `R = (I - A)(I + A)^{-1}` together with the 1-norm condition estimate
/// `||I + A||_1 ||(I + A)^{-1}||_1` of the solve.
pub fn cayley_rotation_with_condition(a: &Matrix) -> Result<(Matrix, f64)> {
    check_antisymmetric(a)?;
    let n = a.rows();
    let i_plus = Matrix::identity(n).add(a)?;
    let inv = invert(&i_plus)?;
    let cond = i_plus.norm_one() * inv.norm_one();
    let i_minus = Matrix::identity(n).sub(a)?;
    let r = i_minus.matmul(&inv)?;
    Ok((r, cond))
}

/// `R = (I - A)(I + A)^{-1}` for antisymmetric `A`.
pub fn cayley_rotation(a: &Matrix) -> Result<Matrix> {
    cayley_rotation_with_condition(a).map(|(r, _)| r)
}

/// Gradient of a loss with respect to the Cayley parameters.
///
/// With `G` the gradient of the loss at `R = cayley(A)`, the chain rule
/// through `dR = -(I + R) dA (I + A)^{-1}` gives
/// `grad = skew(-(I + R)^T G (I + A)^{-T})`, `skew(M) = (M - M^T)/2`.
/// The derivative of the loss along the antisymmetric direction
/// `E_ij - E_ji` equals twice the `(i, j)` entry.
pub fn cayley_parameter_gradient(a: &Matrix, g: &Matrix) -> Result<Matrix> {
    check_antisymmetric(a)?;
    if g.rows() != a.rows() || g.cols() != a.cols() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", a.rows(), a.cols()),
            got: format!("{}x{}", g.rows(), g.cols()),
        });
    }
    let n = a.rows();
    let i_plus = Matrix::identity(n).add(a)?;
    let inv = invert(&i_plus)?;
    let r = Matrix::identity(n).sub(a)?.matmul(&inv)?;
    let i_plus_r = Matrix::identity(n).add(&r)?;
    // M = -(I + R)^T G (I + A)^{-T}
    let m = i_plus_r.transpose_matmul(g)?.matmul(&inv.transpose())?.scale(-1.0);
    let skew = m.sub(&m.transpose())?.scale(0.5);
    Ok(skew)
}

/// Antisymmetric parameters (strict upper triangle) plus the cached
/// rotation they map to.
#[derive(Debug, Clone)]
pub struct CayleyState {
    n: usize,
    upper: Vec<f64>,
    r: Matrix,
    steps: u64,
    last_condition: f64,
}

impl CayleyState {
    /// Identity rotation: `A = 0`.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            upper: vec![0.0; n * (n - 1) / 2],
            r: Matrix::identity(n),
            steps: 0,
            last_condition: 1.0,
        }
    }

    /// State whose parameters reproduce the given antisymmetric matrix.
    pub fn from_parameters(a: &Matrix) -> Result<Self> {
        check_antisymmetric(a)?;
        let n = a.rows();
        let (r, cond) = cayley_rotation_with_condition(a)?;
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                upper.push(a[(i, j)]);
            }
        }
        Ok(Self { n, upper, r, steps: 0, last_condition: cond })
    }

    /// Inverts the Cayley map: `A = (I - R)(I + R)^{-1}`. Fails when `R`
    /// has an eigenvalue at -1 (the map does not cover such rotations).
    pub fn from_rotation(r: &Matrix) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::NotSquare { rows: r.rows(), cols: r.cols() });
        }
        let n = r.rows();
        let i_plus = Matrix::identity(n).add(r)?;
        let inv = invert(&i_plus)?;
        let a = Matrix::identity(n).sub(r)?.matmul(&inv)?;
        // Symmetrize away roundoff before storing the triangle.
        let a = a.sub(&a.transpose())?.scale(0.5);
        Self::from_parameters(&a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rotation(&self) -> &Matrix {
        &self.r
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// 1-norm condition estimate of the most recent `(I + A)` solve.
    pub fn condition_estimate(&self) -> f64 {
        self.last_condition
    }

    /// True once the parameterization is close enough to a -1 eigenvalue
    /// that solve accuracy degrades; callers should surface this.
    pub fn is_ill_conditioned(&self) -> bool {
        self.last_condition > CONDITION_WARN
    }

    /// Materializes `A` from the stored triangle (exactly antisymmetric).
    pub fn parameters(&self) -> Matrix {
        let mut a = Matrix::zeros(self.n, self.n);
        let mut idx = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                a[(i, j)] = self.upper[idx];
                a[(j, i)] = -self.upper[idx];
                idx += 1;
            }
        }
        a
    }

    /// One gradient step on the parameters: `A <- A - lr * grad`, then
    /// the cached rotation is rebuilt.
    pub fn step(&mut self, g: &Matrix, lr: f64) -> Result<()> {
        if lr <= 0.0 {
            return Err(Error::Config(format!("learning rate must be positive, got {lr}")));
        }
        let a = self.parameters();
        let grad = cayley_parameter_gradient(&a, g)?;
        let mut idx = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                self.upper[idx] -= lr * grad[(i, j)];
                idx += 1;
            }
        }
        let (r, cond) = cayley_rotation_with_condition(&self.parameters())?;
        self.r = r;
        self.last_condition = cond;
        self.steps += 1;
        Ok(())
    }
}
