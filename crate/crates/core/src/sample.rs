//! Seeded random matrices: Gaussian fills, Haar-like rotations, and
//! antisymmetric parameter matrices. Everything here is deterministic
//! given the caller's RNG state.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::Matrix;
use crate::svd::procrustes_rotation;

/// splitmix64 mix of a base seed and a stream index; used wherever one
/// user-facing seed has to fan out into independent deterministic
/// sub-streams (per descent step, per PQ subspace, per trainer seed).
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Matrix with iid standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for r in 0..rows {
        for v in m.row_mut(r) {
            *v = rng.sample(StandardNormal);
        }
    }
    m
}

/// Rotation drawn by projecting a Gaussian matrix onto SO(n); the
/// orthogonal factor of a Gaussian is Haar distributed, and the
/// determinant flip restricts it to rotations.
pub fn random_rotation(n: usize, rng: &mut impl Rng) -> Matrix {
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    let g = gaussian_matrix(n, n, rng);
    procrustes_rotation(&g).expect("gaussian matrix is almost surely full rank")
}

/// Antisymmetric matrix with iid Gaussian strict upper triangle scaled
/// by `scale`.
pub fn random_antisymmetric(n: usize, scale: f64, rng: &mut impl Rng) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.sample(StandardNormal);
            m[(i, j)] = v * scale;
            m[(j, i)] = -v * scale;
        }
    }
    m
}
