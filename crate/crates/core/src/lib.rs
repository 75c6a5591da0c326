//! Rotation-aware product quantization.
//!
//! Learns rotation matrices on SO(n) for product-quantized embedding
//! compression by Givens coordinate descent — blocks of up to n/2
//! mutually commuting plane rotations per step, selected at random,
//! greedily, or by exact maximum-weight matching — alongside the classic
//! SVD (Procrustes) alternation and a Cayley-transform learner as
//! baselines. Ships with k-means product quantization, distortion and
//! recall evaluation, fvecs/ivecs dataset IO, convergence diagnostics on
//! convex objectives, and a runtime scaling benchmark.

pub mod error;
pub mod matrix;
pub mod givens;
pub mod svd;
pub mod sample;
pub mod rotation;
pub mod descent;
pub mod oracle;
pub mod pq;
pub mod cayley;
pub mod objective;
pub mod opq;
pub mod io;
pub mod bench;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use rotation::RotationState;
