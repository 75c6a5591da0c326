//! Alternating rotation/codebook trainers for fixed embeddings.
//!
//! Each outer iteration refreshes the product codebook on the rotated
//! data (warm-started Lloyd iterations) and then updates the rotation:
//! by the closed-form Procrustes solve (classic OPQ), by a few Givens
//! coordinate descent steps on the fixed-assignment distortion, by
//! Cayley parameter steps, or not at all (frozen baseline).

use std::time::Instant;

use crate::cayley::CayleyState;
use crate::descent::{gcd_step, SelectionStrategy};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pq::{distortion, kmeans_warm, pq_train, quantize, PQCodebook};
use crate::rotation::RotationState;
use crate::svd::procrustes_rotation;

/// Inner rotation steps per outer iteration.
pub const DEFAULT_INNER_STEPS: usize = 5;
/// Learning rate for the inner rotation steps.
pub const DEFAULT_LEARNING_RATE: f64 = 1e-4;
/// Warm-started Lloyd iterations per codebook refresh.
pub const DEFAULT_WARM_KMEANS_ITERS: usize = 10;

/// How the rotation is updated each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationMode {
    /// Keep the initial rotation; plain PQ retraining.
    Frozen,
    /// Closed-form Procrustes solve on `X^T phi(XR)`.
    Svd,
    /// Givens coordinate descent on the fixed-assignment distortion.
    Gcd(SelectionStrategy),
    /// Cayley parameter descent on the same gradient.
    Cayley,
}

#[derive(Debug, Clone)]
pub struct TrainerConfig {
    /// Number of PQ subspaces (D).
    pub subspaces: usize,
    /// Centroids per subspace (K).
    pub centroids: usize,
    pub outer_iters: usize,
    pub inner_steps: usize,
    pub lr: f64,
    pub rotation_mode: RotationMode,
    pub seed: u64,
    /// Lloyd budget for each warm codebook refresh.
    pub warm_kmeans_iters: usize,
    /// Ablation: refresh assignments before every inner step instead of
    /// holding them fixed across the block.
    pub reassign_each_inner: bool,
    /// Re-anchor the Cayley chart at the current rotation each outer
    /// iteration instead of keeping one global parameterization.
    pub reset_cayley_each_outer: bool,
}

impl TrainerConfig {
    pub fn new(
        subspaces: usize,
        centroids: usize,
        outer_iters: usize,
        rotation_mode: RotationMode,
        seed: u64,
    ) -> Self {
        Self {
            subspaces,
            centroids,
            outer_iters,
            inner_steps: DEFAULT_INNER_STEPS,
            lr: DEFAULT_LEARNING_RATE,
            rotation_mode,
            seed,
            warm_kmeans_iters: DEFAULT_WARM_KMEANS_ITERS,
            reassign_each_inner: false,
            reset_cayley_each_outer: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.subspaces == 0 || self.centroids == 0 {
            return Err(Error::Config("subspaces and centroids must be positive".into()));
        }
        if self.inner_steps == 0 {
            return Err(Error::Config("inner_steps must be positive".into()));
        }
        if self.lr <= 0.0 {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        Ok(())
    }
}

/// One row of a training trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub distortion: f64,
    /// Wall-clock seconds since the trainer started.
    pub seconds: f64,
}

/// Per-outer-iteration distortion log. Row 0 is the warm-start state.
#[derive(Debug, Clone, Default)]
pub struct DistortionTrace {
    rows: Vec<TraceRow>,
}

impl DistortionTrace {
    pub fn push(&mut self, row: TraceRow) {
        if let Some(last) = self.rows.last() {
            assert!(row.iter > last.iter, "trace iterations must increase");
        }
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn final_distortion(&self) -> Option<f64> {
        self.rows.last().map(|r| r.distortion)
    }

    pub fn distortion_at(&self, iter: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.iter == iter).map(|r| r.distortion)
    }
}

/// Gradient of the distortion with the quantized targets held fixed:
/// `(2/m) X^T (X R - C)`.
pub fn distortion_gradient_fixed(x: &Matrix, r: &Matrix, codes: &Matrix) -> Result<Matrix> {
    if x.rows() != codes.rows() || r.cols() != codes.cols() || x.cols() != r.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("X {}x{}, R {0}x{0}-compatible, C {}x{}", x.rows(), x.cols(), x.rows(), r.cols()),
            got: format!("C {}x{}", codes.rows(), codes.cols()),
        });
    }
    let m = x.rows() as f64;
    let residual = x.matmul(r)?.sub(codes)?;
    Ok(x.transpose_matmul(&residual)?.scale(2.0 / m))
}

/// Same gradient with the assignments taken from the current rotation.
pub fn distortion_gradient(x: &Matrix, r: &Matrix, cb: &PQCodebook) -> Result<Matrix> {
    let xr = x.matmul(r)?;
    let codes = quantize(&xr, cb)?;
    distortion_gradient_fixed(x, r, &codes)
}

fn retrain_warm(xr: &Matrix, cb: &PQCodebook, iters: usize) -> Result<PQCodebook> {
    let subdim = cb.subdim();
    let mut codebooks = Vec::with_capacity(cb.subspaces());
    for s in 0..cb.subspaces() {
        let block = xr.col_range(s * subdim, (s + 1) * subdim);
        let outcome = kmeans_warm(&block, cb.codebook(s).clone(), iters)?;
        codebooks.push(outcome.centroids);
    }
    PQCodebook::from_parts(codebooks)
}

/// Alternating trainer state over a borrowed embedding matrix.
pub struct Trainer<'a> {
    x: &'a Matrix,
    cfg: TrainerConfig,
    rotation: RotationState,
    cayley: Option<CayleyState>,
    /// Base rotation of the local Cayley chart when re-anchoring.
    cayley_base: Option<Matrix>,
    codebook: PQCodebook,
    outer_done: usize,
    started: Instant,
}

impl<'a> Trainer<'a> {
    /// Warm start: identity rotation, one full k-means training pass.
    pub fn new(x: &'a Matrix, cfg: TrainerConfig) -> Result<Self> {
        cfg.validate()?;
        let n = x.cols();
        if n == 0 || x.rows() == 0 {
            return Err(Error::Config("empty input matrix".into()));
        }
        let codebook = pq_train(x, cfg.subspaces, cfg.centroids, cfg.seed)?;
        let cayley = matches!(cfg.rotation_mode, RotationMode::Cayley)
            .then(|| CayleyState::new(n));
        Ok(Self {
            x,
            cfg,
            rotation: RotationState::identity(n),
            cayley,
            cayley_base: None,
            codebook,
            outer_done: 0,
            started: Instant::now(),
        })
    }

    pub fn rotation(&self) -> &Matrix {
        self.rotation.matrix()
    }

    pub fn codebook(&self) -> &PQCodebook {
        &self.codebook
    }

    pub fn outer_done(&self) -> usize {
        self.outer_done
    }

    /// True when the Cayley learner has drifted into the ill-conditioned
    /// region of its chart.
    pub fn cayley_ill_conditioned(&self) -> bool {
        self.cayley.as_ref().is_some_and(|c| c.is_ill_conditioned())
    }

    /// Distortion of the current (rotation, codebook) pair.
    pub fn current_distortion(&self) -> Result<f64> {
        let xr = self.x.matmul(self.rotation.matrix())?;
        let q = quantize(&xr, &self.codebook)?;
        distortion(&xr, &q)
    }

    /// One outer iteration: codebook refresh, then rotation update.
    /// Returns the post-update distortion.
    pub fn step(&mut self) -> Result<f64> {
        let xr = self.x.matmul(self.rotation.matrix())?;
        self.codebook = retrain_warm(&xr, &self.codebook, self.cfg.warm_kmeans_iters)?;

        match self.cfg.rotation_mode {
            RotationMode::Frozen => {}
            RotationMode::Svd => {
                let codes = quantize(&xr, &self.codebook)?;
                // Distortion = const - 2 <X R, C> over SO(n), so the
                // minimizer is the Procrustes solution for X^T C.
                let target = self.x.transpose_matmul(&codes)?;
                let r = procrustes_rotation(&target)?;
                self.rotation = RotationState::from_matrix(r)?;
            }
            RotationMode::Gcd(strategy) => {
                let codes = quantize(&xr, &self.codebook)?;
                for _ in 0..self.cfg.inner_steps {
                    let grad = if self.cfg.reassign_each_inner {
                        distortion_gradient(self.x, self.rotation.matrix(), &self.codebook)?
                    } else {
                        distortion_gradient_fixed(self.x, self.rotation.matrix(), &codes)?
                    };
                    gcd_step(&mut self.rotation, &grad, &strategy, self.cfg.lr)?;
                }
            }
            RotationMode::Cayley => {
                let state = self.cayley.as_mut().expect("cayley state exists in cayley mode");
                if self.cfg.reset_cayley_each_outer {
                    self.cayley_base = Some(self.rotation.matrix().clone());
                    *state = CayleyState::new(self.x.cols());
                }
                let codes = quantize(&xr, &self.codebook)?;
                for _ in 0..self.cfg.inner_steps {
                    let full_rotation = match &self.cayley_base {
                        Some(base) => state.rotation().matmul(base)?,
                        None => state.rotation().clone(),
                    };
                    let grad_r = if self.cfg.reassign_each_inner {
                        distortion_gradient(self.x, &full_rotation, &self.codebook)?
                    } else {
                        distortion_gradient_fixed(self.x, &full_rotation, &codes)?
                    };
                    // Chain through R_full = R_cayley * base.
                    let grad = match &self.cayley_base {
                        Some(base) => grad_r.matmul(&base.transpose())?,
                        None => grad_r,
                    };
                    state.step(&grad, self.cfg.lr)?;
                }
                let full = match &self.cayley_base {
                    Some(base) => state.rotation().matmul(base)?,
                    None => state.rotation().clone(),
                };
                self.rotation = RotationState::from_matrix(full)?;
            }
        }

        self.outer_done += 1;
        self.current_distortion()
    }

    /// Runs the configured number of outer iterations, logging one trace
    /// row per iteration plus the warm-start row.
    pub fn run(&mut self) -> Result<DistortionTrace> {
        let mut trace = DistortionTrace::default();
        trace.push(TraceRow {
            iter: 0,
            distortion: self.current_distortion()?,
            seconds: self.started.elapsed().as_secs_f64(),
        });
        for iter in 1..=self.cfg.outer_iters {
            let d = self.step()?;
            trace.push(TraceRow { iter, distortion: d, seconds: self.started.elapsed().as_secs_f64() });
        }
        Ok(trace)
    }
}

/// Builds a trainer and runs it to completion.
pub fn run_trainer(x: &Matrix, cfg: TrainerConfig) -> Result<DistortionTrace> {
    Trainer::new(x, cfg)?.run()
}
