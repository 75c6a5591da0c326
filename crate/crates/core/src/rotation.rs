//! A rotation matrix together with the bookkeeping that keeps it on SO(n)
//! across long optimization runs.

use crate::error::{Error, Result};
use crate::givens::{apply_right, GivensPlan};
use crate::matrix::Matrix;
use crate::svd::{orthonormality_defect, reorthonormalize};

/// Defect above which the matrix is projected back onto SO(n).
pub const DEFECT_LIMIT: f64 = 1e-6;
/// Defect is re-measured every this many plan applications. Givens
/// products preserve orthogonality analytically, so drift accumulates at
/// roundoff speed and a full `R^T R` per step would dominate the cheap
/// O(n^2) updates.
pub const DEFECT_CHECK_INTERVAL: u64 = 100;
/// Unconditional re-projection interval.
pub const FORCED_REORTH_INTERVAL: u64 = 100_000;
/// Tolerance on `det(R) = +1` at construction.
pub const DET_TOL: f64 = 1e-6;

/// An element of SO(n) plus step counters and the last measured
/// orthonormality defect.
#[derive(Debug, Clone)]
pub struct RotationState {
    n: usize,
    r: Matrix,
    steps_applied: u64,
    defect: f64,
    steps_since_check: u64,
    steps_since_reorth: u64,
    reorth_count: u64,
}

impl RotationState {
    /// The identity rotation.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            r: Matrix::identity(n),
            steps_applied: 0,
            defect: 0.0,
            steps_since_check: 0,
            steps_since_reorth: 0,
            reorth_count: 0,
        }
    }

    /// Wraps an existing matrix, verifying membership in SO(n).
    pub fn from_matrix(r: Matrix) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::NotSquare { rows: r.rows(), cols: r.cols() });
        }
        let defect = orthonormality_defect(&r)?;
        if defect > DEFECT_LIMIT {
            return Err(Error::NotRotation { defect, limit: DEFECT_LIMIT });
        }
        let det = r.determinant()?;
        if (det - 1.0).abs() > DET_TOL {
            return Err(Error::NotSpecialOrthogonal { det });
        }
        Ok(Self {
            n: r.rows(),
            r,
            steps_applied: 0,
            defect,
            steps_since_check: 0,
            steps_since_reorth: 0,
            reorth_count: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.r
    }

    pub fn into_matrix(self) -> Matrix {
        self.r
    }

    pub fn steps_applied(&self) -> u64 {
        self.steps_applied
    }

    /// Defect as of the most recent measurement.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    /// How many times re-orthonormalization has fired.
    pub fn reorth_count(&self) -> u64 {
        self.reorth_count
    }

    /// Re-measures the defect right now and updates the cached value.
    pub fn measure_defect(&mut self) -> Result<f64> {
        self.defect = orthonormality_defect(&self.r)?;
        self.steps_since_check = 0;
        Ok(self.defect)
    }

    /// Applies one block of Givens rotations from the right and runs the
    /// periodic drift maintenance.
    pub fn apply_plan(&mut self, plan: &GivensPlan) -> Result<()> {
        apply_right(&mut self.r, plan)?;
        self.steps_applied += 1;
        self.steps_since_check += 1;
        self.steps_since_reorth += 1;
        if self.steps_since_check >= DEFECT_CHECK_INTERVAL {
            self.measure_defect()?;
        }
        if self.defect > DEFECT_LIMIT || self.steps_since_reorth >= FORCED_REORTH_INTERVAL {
            self.reorthonormalize_now()?;
        }
        Ok(())
    }

    /// Projects back onto SO(n) unconditionally.
    pub fn reorthonormalize_now(&mut self) -> Result<()> {
        self.r = reorthonormalize(&self.r)?;
        self.defect = orthonormality_defect(&self.r)?;
        self.steps_since_check = 0;
        self.steps_since_reorth = 0;
        self.reorth_count += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::givens::GivensPair;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_disjoint_plan(n: usize, rng: &mut impl Rng) -> GivensPlan {
        let mut axes: Vec<usize> = (1..=n).collect();
        for k in (1..axes.len()).rev() {
            let swap = rng.random_range(0..=k);
            axes.swap(k, swap);
        }
        let pairs = axes
            .chunks_exact(2)
            .map(|c| {
                let (i, j) = (c[0].min(c[1]), c[0].max(c[1]));
                GivensPair::new(i, j, rng.random_range(-1.0..1.0))
            })
            .collect();
        GivensPlan::disjoint(pairs).unwrap()
    }

    #[test]
    fn rejects_non_rotation() {
        let m = Matrix::identity(3).scale(2.0);
        assert!(matches!(RotationState::from_matrix(m), Err(Error::NotRotation { .. })));
    }

    #[test]
    fn rejects_reflection() {
        let mut m = Matrix::identity(3);
        m[(0, 0)] = -1.0;
        assert!(matches!(
            RotationState::from_matrix(m),
            Err(Error::NotSpecialOrthogonal { .. })
        ));
    }

    #[test]
    fn defect_stays_tiny_over_many_plans() {
        // 10^4 random disjoint plans on I_64: drift is pure roundoff.
        let mut rng = ChaCha8Rng::seed_from_u64(8080);
        let mut state = RotationState::identity(64);
        for _ in 0..10_000 {
            let plan = random_disjoint_plan(64, &mut rng);
            state.apply_plan(&plan).unwrap();
        }
        let defect = state.measure_defect().unwrap();
        assert!(defect < 1e-8, "defect after 1e4 plans: {defect}");
        assert_eq!(state.reorth_count(), 0);
        assert_eq!(state.steps_applied(), 10_000);
    }

    #[test]
    fn isometry_and_inverse_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let m = crate::sample::gaussian_matrix(5, 8, &mut rng);
        let plan = random_disjoint_plan(8, &mut rng);
        let rotated = crate::givens::applied_right(&m, &plan).unwrap();
        // Row norms preserved.
        for r in 0..m.rows() {
            let before: f64 = m.row(r).iter().map(|x| x * x).sum::<f64>().sqrt();
            let after: f64 = rotated.row(r).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((before - after).abs() <= 1e-12 * before.max(1.0));
        }
        // Negated plan inverts.
        let back = crate::givens::applied_right(&rotated, &plan.negated()).unwrap();
        let err = back.sub(&m).unwrap().frobenius_norm() / m.frobenius_norm();
        assert!(err < 1e-12);
    }
}
