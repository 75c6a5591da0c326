//! Convex test objectives with known minima, an empirical Lipschitz
//! estimator over torus directions, and instrumented convergence runs
//! that track the sub-linear bound
//! `gap(k) <= 1 / (k (D_n^2 (n-1) eta)^-1 + gap(0)^-1)`, `D_n = n pi`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cayley::CayleyState;
use crate::descent::{gcd_step, pair_derivatives, select_pairs_random, SelectionStrategy};
use crate::error::{Error, Result};
use crate::givens::{applied_right, GivensPair, GivensPlan};
use crate::matrix::Matrix;
use crate::rotation::RotationState;
use crate::sample::mix_seed;

/// Samples drawn by the Lipschitz estimator by default.
pub const LIPSCHITZ_DEFAULT_SAMPLES: usize = 64;
/// The torus-direction estimator lower-bounds the true constant, so the
/// step-size prescription `lr = 1/eta` inflates it by this factor.
pub const ETA_INFLATION: f64 = 1.5;
/// Default relative gap tolerance for convergence runs.
pub const DEFAULT_REL_TOL: f64 = 1e-3;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// A convex objective on SO(n) with an evaluable gradient.
#[derive(Debug, Clone)]
pub enum ConvexObjective {
    /// `L(R) = <w, R x>`.
    Dot { w: Vec<f64>, x: Vec<f64> },
    /// `L(R) = <w, R x> / (||w|| ||x||)`; the denominator is constant on
    /// the manifold because rotations preserve `||x||`.
    Cosine { w: Vec<f64>, x: Vec<f64> },
    /// `L(R) = (1/m) ||X R - C||^2` with the code matrix `C` held fixed.
    FixedCodeDistortion { x: Matrix, codes: Matrix },
}

impl ConvexObjective {
    pub fn dot(w: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        check_vectors(&w, &x)?;
        Ok(Self::Dot { w, x })
    }

    pub fn cosine(w: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        check_vectors(&w, &x)?;
        Ok(Self::Cosine { w, x })
    }

    pub fn fixed_code_distortion(x: Matrix, codes: Matrix) -> Result<Self> {
        if x.rows() != codes.rows() || x.cols() != codes.cols() || x.rows() == 0 {
            return Err(Error::ShapeMismatch {
                expected: format!("codes shaped {}x{}, nonempty", x.rows(), x.cols()),
                got: format!("{}x{}", codes.rows(), codes.cols()),
            });
        }
        Ok(Self::FixedCodeDistortion { x, codes })
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Dot { w, .. } | Self::Cosine { w, .. } => w.len(),
            Self::FixedCodeDistortion { x, .. } => x.cols(),
        }
    }

    /// Loss value and its gradient with respect to `R`.
    pub fn eval(&self, r: &Matrix) -> Result<(f64, Matrix)> {
        let n = self.n();
        if r.rows() != n || r.cols() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", r.rows(), r.cols()),
            });
        }
        match self {
            Self::Dot { w, x } => Ok(dot_eval(w, x, r, 1.0)),
            Self::Cosine { w, x } => {
                let scale = 1.0 / (norm(w) * norm(x));
                Ok(dot_eval(w, x, r, scale))
            }
            Self::FixedCodeDistortion { x, codes } => {
                let m = x.rows() as f64;
                let residual = x.matmul(r)?.sub(codes)?;
                let value = residual.frobenius_norm().powi(2) / m;
                let grad = x.transpose_matmul(&residual)?.scale(2.0 / m);
                Ok((value, grad))
            }
        }
    }

    /// Closed-form minimum over SO(n); only the dot and cosine kinds
    /// have one.
    pub fn analytic_minimum(&self) -> Result<f64> {
        match self {
            Self::Dot { w, x } => {
                if w.len() < 2 {
                    return Err(Error::Config(
                        "dot objective needs n >= 2 for the closed-form minimum".into(),
                    ));
                }
                Ok(-(norm(w) * norm(x)))
            }
            Self::Cosine { w, .. } => {
                if w.len() < 2 {
                    return Err(Error::Config(
                        "cosine objective needs n >= 2 for the closed-form minimum".into(),
                    ));
                }
                Ok(-1.0)
            }
            Self::FixedCodeDistortion { .. } => Err(Error::Config(
                "fixed-code distortion has no closed-form minimum".into(),
            )),
        }
    }
}

fn check_vectors(w: &[f64], x: &[f64]) -> Result<()> {
    if w.len() != x.len() || w.is_empty() {
        return Err(Error::ShapeMismatch {
            expected: format!("two nonempty vectors of equal length"),
            got: format!("{} and {}", w.len(), x.len()),
        });
    }
    if norm(w) == 0.0 || norm(x) == 0.0 {
        return Err(Error::Config("w and x must be nonzero".into()));
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot_eval(w: &[f64], x: &[f64], r: &Matrix, scale: f64) -> (f64, Matrix) {
    let n = w.len();
    // value = w^T (R x)
    let mut value = 0.0;
    for a in 0..n {
        let row = r.row(a);
        let rx: f64 = row.iter().zip(x).map(|(rv, xv)| rv * xv).sum();
        value += w[a] * rx;
    }
    // gradient = w x^T
    let mut grad = Matrix::zeros(n, n);
    for a in 0..n {
        let row = grad.row_mut(a);
        for (g, &xv) in row.iter_mut().zip(x) {
            *g = scale * w[a] * xv;
        }
    }
    (value * scale, grad)
}

/// Random disjoint plan with angles uniform in `(-magnitude, magnitude)`.
fn random_plan(n: usize, magnitude: f64, rng: &mut impl Rng) -> Result<GivensPlan> {
    let matching = select_pairs_random(n, rng.random())?;
    let pairs = matching
        .pairs()
        .iter()
        .map(|&(i, j)| GivensPair::new(i, j, rng.random_range(-magnitude..magnitude)))
        .collect();
    GivensPlan::disjoint(pairs)
}

/// Empirical curvature constant: the max over sampled points and torus
/// directions of `2 (L(G exp(g)) - L(G) - <grad, g>) / ||g||^2`.
///
/// Directions are disjoint Givens blocks, so `exp(g)` is exact plane
/// rotation and no matrix exponential is needed. Because the directions
/// are restricted to the maximal torus this estimates a lower bound of
/// the true constant; step-size prescriptions should inflate it (see
/// [`ETA_INFLATION`]).
pub fn estimate_lipschitz(
    obj: &ConvexObjective,
    start: &Matrix,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Config("need at least one sample".into()));
    }
    let n = obj.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = start.clone();
    let mut eta: f64 = 0.0;
    let magnitudes = [1.0, 0.3, 0.1];
    for s in 0..samples {
        let (value, grad) = obj.eval(&point)?;
        let magnitude = magnitudes[s % magnitudes.len()];
        // Alternate between full matchings and single planes; a lone
        // plane measures its curvature undiluted by the other blocks.
        let plan = if s % 2 == 0 {
            random_plan(n, magnitude, &mut rng)?
        } else {
            let full = random_plan(n, magnitude, &mut rng)?;
            GivensPlan::disjoint(vec![full.pairs()[0]])?
        };
        let pairs: Vec<(usize, usize)> = plan.pairs().iter().map(|p| (p.i, p.j)).collect();
        let derivs = pair_derivatives(&point, &grad, &pairs)?;
        // <grad, g> in torus coordinates: sum of theta * unnormalized
        // derivative; ||g||^2 = 2 sum theta^2.
        let mut directional = 0.0;
        let mut theta_sq = 0.0;
        for (pair, d) in plan.pairs().iter().zip(&derivs) {
            directional += pair.theta * (SQRT_2 * d);
            theta_sq += pair.theta * pair.theta;
        }
        if theta_sq > 0.0 {
            let moved = applied_right(&point, &plan)?;
            let (value_moved, _) = obj.eval(&moved)?;
            let ratio = (value_moved - value - directional) / theta_sq;
            eta = eta.max(ratio);
        }
        // Random-walk the base point to cover a neighborhood of the
        // start while staying on the manifold.
        let walk = random_plan(n, 0.4, &mut rng)?;
        point = applied_right(&point, &walk)?;
    }
    Ok(eta.max(1e-9))
}

/// Which learner drives a convergence run.
#[derive(Debug, Clone)]
pub enum DescentMethod {
    Givens(SelectionStrategy),
    Cayley,
}

/// Knobs for [`convergence_run`].
#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    /// Step size.
    pub lr: f64,
    pub max_iters: u64,
    /// Absolute gap tolerance; the run stops once `gap < tol`.
    pub tol: f64,
    /// Seed for the internal Lipschitz estimate.
    pub seed: u64,
    /// Pre-computed (already inflated) curvature estimate; when absent
    /// one is estimated from the start point and inflated.
    pub eta: Option<f64>,
    /// Log cadence; 0 picks roughly 1000 points across the run.
    pub log_every: u64,
}

/// One logged point of a convergence run.
#[derive(Debug, Clone, Copy)]
pub struct LogPoint {
    pub step: u64,
    pub gap: f64,
    /// Sub-linear bound evaluated at this step.
    pub bound: f64,
}

/// Outcome of [`convergence_run`].
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub iterations: u64,
    pub final_gap: f64,
    /// Curvature estimate used for the bound (inflated).
    pub eta: f64,
    /// Manifold diameter `D_n = n pi` used in the bound.
    pub diameter: f64,
    pub log: Vec<LogPoint>,
    /// True when the gap stayed at or below the bound at every logged
    /// step.
    pub bound_satisfied: bool,
    pub converged: bool,
}

/// Runs a descent method on a convex objective with a known analytic
/// minimum, logging the gap and the sub-linear bound. Non-convergence is
/// reported in the result, never as an error.
pub fn convergence_run(
    obj: &ConvexObjective,
    start: &Matrix,
    method: &DescentMethod,
    cfg: &ConvergenceConfig,
) -> Result<ConvergenceReport> {
    let n = obj.n();
    let minimum = obj.analytic_minimum()?;
    let diameter = n as f64 * std::f64::consts::PI;
    let eta = match cfg.eta {
        Some(e) => e,
        None => ETA_INFLATION * estimate_lipschitz(obj, start, LIPSCHITZ_DEFAULT_SAMPLES, cfg.seed)?,
    };
    let (value0, _) = obj.eval(start)?;
    let gap0 = value0 - minimum;
    let bound_at = |k: u64| -> f64 {
        if gap0 <= 0.0 {
            return 0.0;
        }
        1.0 / (k as f64 / (diameter * diameter * (n as f64 - 1.0) * eta) + 1.0 / gap0)
    };

    let log_every = if cfg.log_every > 0 {
        cfg.log_every
    } else {
        (cfg.max_iters / 1000).max(1)
    };

    let mut log = vec![LogPoint { step: 0, gap: gap0, bound: gap0 }];
    let mut bound_satisfied = true;
    if gap0 <= cfg.tol {
        return Ok(ConvergenceReport {
            iterations: 0,
            final_gap: gap0,
            eta,
            diameter,
            log,
            bound_satisfied,
            converged: true,
        });
    }

    enum Learner {
        Givens(RotationState, SelectionStrategy),
        Cayley(CayleyState),
    }
    let mut learner = match method {
        DescentMethod::Givens(strategy) => {
            Learner::Givens(RotationState::from_matrix(start.clone())?, *strategy)
        }
        DescentMethod::Cayley => Learner::Cayley(CayleyState::from_rotation(start)?),
    };

    let mut gap = gap0;
    let mut iterations = cfg.max_iters;
    let mut converged = false;
    for k in 1..=cfg.max_iters {
        let value = match &mut learner {
            Learner::Givens(state, strategy) => {
                let (_, grad) = obj.eval(state.matrix())?;
                gcd_step(state, &grad, strategy, cfg.lr)?;
                obj.eval(state.matrix())?.0
            }
            Learner::Cayley(state) => {
                let (_, grad) = obj.eval(state.rotation())?;
                state.step(&grad, cfg.lr)?;
                obj.eval(state.rotation())?.0
            }
        };
        gap = value - minimum;
        if k % log_every == 0 || gap < cfg.tol || k == cfg.max_iters {
            let bound = bound_at(k);
            // The bound is on the expected gap; the tiny slack keeps pure
            // roundoff from flagging a violation.
            if gap > bound + 1e-12 * bound.abs().max(1.0) {
                bound_satisfied = false;
            }
            log.push(LogPoint { step: k, gap, bound });
        }
        if gap < cfg.tol {
            iterations = k;
            converged = true;
            break;
        }
    }

    Ok(ConvergenceReport {
        iterations,
        final_gap: gap,
        eta,
        diameter,
        log,
        bound_satisfied,
        converged,
    })
}

/// The SO(n) minimizer of the dot objective, built by Procrustes: useful
/// as a start point for "begin at the optimum" checks.
pub fn dot_minimizer(w: &[f64], x: &[f64]) -> Result<Matrix> {
    let n = w.len();
    let mut c = Matrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            c[(a, b)] = -w[a] * x[b];
        }
    }
    crate::svd::procrustes_rotation(&c)
}

/// Convenience: seeded unit vectors for test instances; returns (w, x)
/// with independent Gaussian directions normalized to unit length.
pub fn seeded_unit_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xD07));
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let nv = norm(&v);
        v.into_iter().map(|a| a / nv).collect()
    };
    (draw(&mut rng), draw(&mut rng))
}
