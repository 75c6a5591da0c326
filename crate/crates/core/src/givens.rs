//! Givens plane rotations and block plans of mutually disjoint rotations.
//!
//! A plan holds axis pairs `(i, j, theta)` with 1-based `i < j`. The
//! rotation `R_ij(theta)` is the identity with entries `(i,i) = (j,j) =
//! cos(theta)`, `(i,j) = -sin(theta)`, `(j,i) = sin(theta)`. Plans are
//! applied from the right as column-pair updates in `O(pairs * rows)`
//! work; the rotation matrices are never materialized on the hot path.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// One plane rotation: axes `i < j` (1-based) by `theta` radians.
///
/// Angles are kept as unbounded reals; `cos`/`sin` are periodic so there
/// is no need to wrap them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensPair {
    pub i: usize,
    pub j: usize,
    pub theta: f64,
}

impl GivensPair {
    pub fn new(i: usize, j: usize, theta: f64) -> Self {
        Self { i, j, theta }
    }
}

/// A block of plane rotations applied in list order.
///
/// In disjoint mode every axis appears at most once, so the factors
/// commute and the application order is irrelevant (they span a maximal
/// torus). Overlapping mode skips the disjointness check and the order
/// becomes significant.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensPlan {
    pairs: Vec<GivensPair>,
    overlapping: bool,
}

impl GivensPlan {
    /// Disjoint plan; rejects unordered pairs, zero indices, and repeated
    /// axes. Upper-bound checks happen at application time when the
    /// operand dimension is known.
    pub fn disjoint(pairs: Vec<GivensPair>) -> Result<Self> {
        let mut seen: Vec<usize> = Vec::with_capacity(pairs.len() * 2);
        for p in &pairs {
            if p.i >= p.j {
                return Err(Error::UnorderedPair { i: p.i, j: p.j });
            }
            if p.i == 0 {
                return Err(Error::AxisOutOfRange { index: 0, n: 0 });
            }
            for axis in [p.i, p.j] {
                if seen.contains(&axis) {
                    return Err(Error::DuplicateAxis { axis });
                }
                seen.push(axis);
            }
        }
        Ok(Self { pairs, overlapping: false })
    }

    /// Overlapping plan: axes may repeat; pairs are applied in list order.
    pub fn overlapping(pairs: Vec<GivensPair>) -> Result<Self> {
        for p in &pairs {
            if p.i >= p.j {
                return Err(Error::UnorderedPair { i: p.i, j: p.j });
            }
            if p.i == 0 {
                return Err(Error::AxisOutOfRange { index: 0, n: 0 });
            }
        }
        Ok(Self { pairs, overlapping: true })
    }

    pub fn pairs(&self) -> &[GivensPair] {
        &self.pairs
    }

    pub fn is_overlapping(&self) -> bool {
        self.overlapping
    }

    /// The same plan with all angles negated; applying it after the
    /// original recovers the input (inverse rotation).
    pub fn negated(&self) -> Self {
        Self {
            pairs: self
                .pairs
                .iter()
                .map(|p| GivensPair::new(p.i, p.j, -p.theta))
                .collect(),
            overlapping: self.overlapping,
        }
    }

    fn check_bounds(&self, n: usize) -> Result<()> {
        for p in &self.pairs {
            if p.j > n {
                return Err(Error::AxisOutOfRange { index: p.j, n });
            }
        }
        Ok(())
    }

    /// Materializes the product of the plan's rotations as a dense `n x n`
    /// matrix. Test oracle and debugging aid, not a hot path.
    pub fn to_matrix(&self, n: usize) -> Result<Matrix> {
        let mut m = Matrix::identity(n);
        apply_right(&mut m, self)?;
        Ok(m)
    }
}

/// Applies the plan from the right: `M <- M * prod R_ij(theta)`.
///
/// Column pairs are updated in place, one pass over the rows:
/// `c_i <- c_i cos + c_j sin`, `c_j <- -c_i sin + c_j cos`. Within a row
/// the pairs are processed in list order, which matches the matrix
/// product order for overlapping plans and is immaterial for disjoint
/// ones.
pub fn apply_right(m: &mut Matrix, plan: &GivensPlan) -> Result<()> {
    plan.check_bounds(m.cols())?;
    let trig: Vec<(usize, usize, f64, f64)> = plan
        .pairs
        .iter()
        .map(|p| (p.i - 1, p.j - 1, p.theta.cos(), p.theta.sin()))
        .collect();
    for r in 0..m.rows() {
        let row = m.row_mut(r);
        for &(i, j, cos, sin) in &trig {
            let a = row[i];
            let b = row[j];
            row[i] = a * cos + b * sin;
            row[j] = -a * sin + b * cos;
        }
    }
    Ok(())
}

/// Non-mutating variant of [`apply_right`].
pub fn applied_right(m: &Matrix, plan: &GivensPlan) -> Result<Matrix> {
    let mut out = m.clone();
    apply_right(&mut out, plan)?;
    Ok(out)
}
