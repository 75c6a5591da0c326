//! Givens coordinate descent: normalized directional derivatives over all
//! coordinate planes, pair selection (random / greedy / steepest exact
//! matching, plus the overlapping ablation), and the descent step that
//! rotates along the chosen planes.

pub mod blossom;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::givens::{GivensPair, GivensPlan};
use crate::matrix::Matrix;
use crate::rotation::RotationState;

/// Dimension cap for the exact maximum-weight matching selector. The
/// blossom solver is O(n^3) per step, which defeats the purpose of a
/// first-order method; past the cap callers are told to fall back to
/// greedy selection.
pub const STEEPEST_DIM_CAP: usize = 64;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Antisymmetric matrix of normalized directional derivatives. Entry
/// `(i, j)` with `i < j` (1-based) is `g_ij`, the rate of change of the
/// loss along the plane rotation `R -> R * R_ij(theta)` divided by the
/// generator norm `sqrt(2)`.
#[derive(Debug, Clone)]
pub struct DerivativeMatrix {
    a: Matrix,
}

impl DerivativeMatrix {
    /// `A = (G^T R - R^T G) / sqrt(2)` for gradient `G` at rotation `R`.
    ///
    /// `R` is expected to be orthonormal (defect within 1e-6); callers
    /// that track a [`RotationState`] maintain this automatically.
    pub fn new(r: &Matrix, g: &Matrix) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::NotSquare { rows: r.rows(), cols: r.cols() });
        }
        if r.rows() != g.rows() || r.cols() != g.cols() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", r.rows(), r.cols()),
                got: format!("{}x{}", g.rows(), g.cols()),
            });
        }
        // R^T G is the transpose of G^T R, so a single product suffices
        // and the difference is antisymmetric to the last bit.
        let m = g.transpose_matmul(r)?;
        let n = m.rows();
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (m[(i, j)] - m[(j, i)]) / SQRT_2;
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        Ok(Self { a })
    }

    /// Wraps an existing antisymmetric matrix (zero diagonal required).
    pub fn from_antisymmetric(a: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let norm = a.frobenius_norm();
        let asym = a.add(&a.transpose())?.frobenius_norm();
        if asym > 1e-10 * norm.max(1e-4) {
            return Err(Error::NotAntisymmetric { asym });
        }
        Ok(Self { a })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Normalized derivative for the plane `(i, j)`, 1-based, `i < j`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.a[(i - 1, j - 1)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    /// Squared Euclidean norm of the derivative vector over all planes
    /// `i < j`; this is the squared gradient norm in torus coordinates.
    pub fn gradient_norm_squared(&self) -> f64 {
        let n = self.n();
        let mut total = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                total += self.a[(i, j)] * self.a[(i, j)];
            }
        }
        total
    }
}

/// How gcd_step picks its coordinate planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionStrategy {
    /// Uniformly random matching from a shuffle (GCD-R).
    Random { seed: u64 },
    /// Greedy pairing by descending squared derivative (GCD-G).
    Greedy,
    /// Exact maximum-weight perfect matching (GCD-S).
    Steepest,
    /// Ablation: greedy without the disjointness filter.
    OverlappingGreedy,
    /// Ablation: random pairs, axes may repeat.
    OverlappingRandom { seed: u64 },
}

/// Which base selector an overlapping matching mimics.
#[derive(Debug, Clone, Copy)]
pub enum OverlapBase {
    Greedy,
    Random { seed: u64 },
}

/// A set of coordinate pairs, 1-based with `i < j` in every pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
    overlapping: bool,
}

impl Matching {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn is_overlapping(&self) -> bool {
        self.overlapping
    }

    /// Sum of squared derivatives over the selected pairs.
    pub fn weight(&self, d: &DerivativeMatrix) -> f64 {
        self.pairs.iter().map(|&(i, j)| d.value(i, j).powi(2)).sum()
    }

    /// Builds the descent plan `theta_ij = -lr * g_ij` for this matching.
    pub fn to_plan(&self, d: &DerivativeMatrix, lr: f64) -> Result<GivensPlan> {
        let pairs: Vec<GivensPair> = self
            .pairs
            .iter()
            .map(|&(i, j)| GivensPair::new(i, j, -lr * d.value(i, j)))
            .collect();
        if self.overlapping {
            GivensPlan::overlapping(pairs)
        } else {
            GivensPlan::disjoint(pairs)
        }
    }
}

/// GCD-R selection: Fisher-Yates shuffle of the axes, paired off in
/// shuffle order. Odd `n` leaves the last axis unused. Deterministic for
/// a given seed.
pub fn select_pairs_random(n: usize, seed: u64) -> Result<Matching> {
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 axes, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut axes: Vec<usize> = (1..=n).collect();
    axes.shuffle(&mut rng);
    let pairs = axes
        .chunks_exact(2)
        .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
        .collect();
    Ok(Matching { pairs, overlapping: false })
}

/// All (i, j) pairs sorted by descending squared derivative, ties broken
/// lexicographically.
fn ranked_pairs(d: &DerivativeMatrix) -> Vec<(f64, usize, usize)> {
    let n = d.n();
    let mut ranked = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..=n {
        for j in (i + 1)..=n {
            ranked.push((d.value(i, j).powi(2), i, j));
        }
    }
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0).unwrap().then_with(|| (a.1, a.2).cmp(&(b.1, b.2)))
    });
    ranked
}

/// GCD-G selection: repeatedly takes the feasible pair with the largest
/// squared derivative until floor(n/2) disjoint pairs are chosen.
pub fn select_pairs_greedy(d: &DerivativeMatrix) -> Result<Matching> {
    let n = d.n();
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 axes, got {n}")));
    }
    let target = n / 2;
    let mut used = vec![false; n + 1];
    let mut pairs = Vec::with_capacity(target);
    for (_, i, j) in ranked_pairs(d) {
        if pairs.len() == target {
            break;
        }
        if used[i] || used[j] {
            continue;
        }
        used[i] = true;
        used[j] = true;
        pairs.push((i, j));
    }
    Ok(Matching { pairs, overlapping: false })
}

/// GCD-S selection: exact maximum-weight matching over squared
/// derivatives via the blossom algorithm. Dimensions above
/// [`STEEPEST_DIM_CAP`] are refused; callers should fall back to greedy.
pub fn select_pairs_steepest(d: &DerivativeMatrix) -> Result<Matching> {
    let n = d.n();
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 axes, got {n}")));
    }
    if n > STEEPEST_DIM_CAP {
        return Err(Error::MatchingDimensionCap { n, cap: STEEPEST_DIM_CAP });
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, d.value(i + 1, j + 1).powi(2)));
        }
    }
    let mate = blossom::max_weight_matching(n, &edges, true);
    let mut pairs: Vec<(usize, usize)> = mate
        .iter()
        .enumerate()
        .filter_map(|(v, &m)| m.filter(|&w| v < w).map(|w| (v + 1, w + 1)))
        .collect();
    pairs.sort_unstable();
    Ok(Matching { pairs, overlapping: false })
}

/// Overlapping ablation: floor(n/2) pairs with no disjointness filter.
/// Greedy base takes the globally largest squared derivatives (descending
/// order, so the steepest planes are applied first); random base samples
/// pairs uniformly without replacement, applied in draw order.
pub fn select_pairs_overlapping(d: &DerivativeMatrix, base: OverlapBase) -> Result<Matching> {
    let n = d.n();
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 axes, got {n}")));
    }
    let target = n / 2;
    let pairs = match base {
        OverlapBase::Greedy => ranked_pairs(d)
            .into_iter()
            .take(target)
            .map(|(_, i, j)| (i, j))
            .collect(),
        OverlapBase::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let all: Vec<(usize, usize)> = (1..=n)
                .flat_map(|i| ((i + 1)..=n).map(move |j| (i, j)))
                .collect();
            rand::seq::index::sample(&mut rng, all.len(), target)
                .into_iter()
                .map(|k| all[k])
                .collect()
        }
    };
    Ok(Matching { pairs, overlapping: true })
}

/// Derives the per-step seed for random strategies so that consecutive
/// steps explore fresh matchings while the whole run stays reproducible.
pub fn step_seed(seed: u64, step: u64) -> u64 {
    crate::sample::mix_seed(seed, step)
}

fn select_for_step(
    d: &DerivativeMatrix,
    strategy: &SelectionStrategy,
    step: u64,
) -> Result<Matching> {
    match *strategy {
        SelectionStrategy::Random { seed } => select_pairs_random(d.n(), step_seed(seed, step)),
        SelectionStrategy::Greedy => select_pairs_greedy(d),
        SelectionStrategy::Steepest => select_pairs_steepest(d),
        SelectionStrategy::OverlappingGreedy => {
            select_pairs_overlapping(d, OverlapBase::Greedy)
        }
        SelectionStrategy::OverlappingRandom { seed } => {
            select_pairs_overlapping(d, OverlapBase::Random { seed: step_seed(seed, step) })
        }
    }
}

/// One Givens coordinate descent iteration: computes the derivative
/// matrix at the current rotation, selects planes per the strategy, and
/// rotates by `theta = -lr * g` along each selected plane.
pub fn gcd_step(
    state: &mut RotationState,
    gradient: &Matrix,
    strategy: &SelectionStrategy,
    lr: f64,
) -> Result<()> {
    if lr <= 0.0 {
        return Err(Error::Config(format!("learning rate must be positive, got {lr}")));
    }
    let d = DerivativeMatrix::new(state.matrix(), gradient)?;
    let matching = select_for_step(&d, strategy, state.steps_applied())?;
    let plan = matching.to_plan(&d, lr)?;
    state.apply_plan(&plan)
}

/// Normalized derivatives for a short list of planes in O(n * pairs)
/// instead of forming the whole matrix: this is what makes a random-
/// selection step quadratic in `n` once the loss gradient is in hand.
pub fn pair_derivatives(r: &Matrix, g: &Matrix, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    if r.rows() != g.rows() || r.cols() != g.cols() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", r.rows(), r.cols()),
            got: format!("{}x{}", g.rows(), g.cols()),
        });
    }
    let n = r.cols();
    for &(i, j) in pairs {
        if i == 0 || i >= j {
            return Err(Error::UnorderedPair { i, j });
        }
        if j > n {
            return Err(Error::AxisOutOfRange { index: j, n });
        }
    }
    // (G^T R)_ij - (G^T R)_ji accumulated in one pass over the rows.
    let mut fwd = vec![0.0f64; pairs.len()];
    let mut bwd = vec![0.0f64; pairs.len()];
    for k in 0..r.rows() {
        let gr = g.row(k);
        let rr = r.row(k);
        for (idx, &(i, j)) in pairs.iter().enumerate() {
            fwd[idx] += gr[i - 1] * rr[j - 1];
            bwd[idx] += gr[j - 1] * rr[i - 1];
        }
    }
    Ok(fwd.iter().zip(&bwd).map(|(f, b)| (f - b) / SQRT_2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::givens::applied_right;
    use crate::oracle::best_matching_by_enumeration;
    use crate::sample::{gaussian_matrix, random_rotation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Antisymmetric matrix with chosen upper-triangle values, 1-based.
    fn deriv_from_entries(n: usize, entries: &[(usize, usize, f64)]) -> DerivativeMatrix {
        let mut a = Matrix::zeros(n, n);
        for &(i, j, v) in entries {
            a[(i - 1, j - 1)] = v;
            a[(j - 1, i - 1)] = -v;
        }
        DerivativeMatrix::from_antisymmetric(a).unwrap()
    }

    /// The n=4 instance with squared weights (1,2)=9, (1,3)=8, (2,4)=8,
    /// (1,4)=2, (2,3)=2, (3,4)=1.
    fn textbook_instance() -> DerivativeMatrix {
        deriv_from_entries(
            4,
            &[
                (1, 2, 3.0),
                (1, 3, 8.0f64.sqrt()),
                (2, 4, -(8.0f64.sqrt())),
                (1, 4, 2.0f64.sqrt()),
                (2, 3, -(2.0f64.sqrt())),
                (3, 4, 1.0),
            ],
        )
    }

    #[test]
    fn linear_loss_hand_derivative() {
        // L(Y) = <W, Y>, W = [[0,1],[0,0]]: d/dtheta L(R_12(theta)) at 0
        // equals -1, so the normalized derivative is -1/sqrt(2).
        let r = Matrix::identity(2);
        let w = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let d = DerivativeMatrix::new(&r, &w).unwrap();
        assert!((d.value(1, 2) + 1.0 / SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn gradient_aligned_with_rotation_gives_exact_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_rotation(5, &mut rng);
        let d = DerivativeMatrix::new(&r, &r).unwrap();
        assert_eq!(d.matrix().frobenius_norm(), 0.0);
    }

    #[test]
    fn antisymmetry_is_exact_by_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = random_rotation(6, &mut rng);
        let g = gaussian_matrix(6, 6, &mut rng);
        let d = DerivativeMatrix::new(&r, &g).unwrap();
        let asym = d.matrix().add(&d.matrix().transpose()).unwrap().frobenius_norm();
        assert_eq!(asym, 0.0);
        for k in 0..6 {
            assert_eq!(d.matrix()[(k, k)], 0.0);
        }
    }

    #[test]
    fn matches_central_finite_differences() {
        // Quadratic loss L(Y) = ||X Y - T||^2 with exact gradient
        // G = 2 X^T (X R - T); sqrt(2) * A_ij must match the central
        // difference of theta -> L(R * R_ij(theta)).
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 6;
        let x = gaussian_matrix(9, n, &mut rng);
        let t = gaussian_matrix(9, n, &mut rng);
        let r = random_rotation(n, &mut rng);
        let loss = |rot: &Matrix| -> f64 {
            x.matmul(rot).unwrap().sub(&t).unwrap().frobenius_norm().powi(2)
        };
        let g = x
            .transpose_matmul(&x.matmul(&r).unwrap().sub(&t).unwrap())
            .unwrap()
            .scale(2.0);
        let d = DerivativeMatrix::new(&r, &g).unwrap();
        let h = 1e-5;
        for i in 1..=n {
            for j in (i + 1)..=n {
                let plus = GivensPlan::disjoint(vec![GivensPair::new(i, j, h)]).unwrap();
                let minus = GivensPlan::disjoint(vec![GivensPair::new(i, j, -h)]).unwrap();
                let fd = (loss(&applied_right(&r, &plus).unwrap())
                    - loss(&applied_right(&r, &minus).unwrap()))
                    / (2.0 * h);
                let analytic = SQRT_2 * d.value(i, j);
                let scale = fd.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    (fd - analytic).abs() / scale < 1e-5,
                    "pair ({i},{j}): fd {fd} vs analytic {analytic}"
                );
            }
        }
    }

    #[test]
    fn random_selection_basics() {
        assert_eq!(select_pairs_random(2, 123).unwrap().pairs(), &[(1, 2)]);
        let m = select_pairs_random(5, 9).unwrap();
        assert_eq!(m.pairs().len(), 2);
        let mut axes: Vec<usize> = m.pairs().iter().flat_map(|&(i, j)| [i, j]).collect();
        axes.sort_unstable();
        axes.dedup();
        assert_eq!(axes.len(), 4);
        assert!(select_pairs_random(1, 0).is_err());
    }

    #[test]
    fn random_selection_pair_frequencies() {
        // Each of the 15 unordered pairs of n=6 lies in a uniformly random
        // matching with probability 1/(n-1) = 1/5.
        let n = 6;
        let draws = 100_000u32;
        let mut counts = std::collections::HashMap::new();
        for s in 0..draws {
            for &p in select_pairs_random(n, s as u64).unwrap().pairs() {
                *counts.entry(p).or_insert(0u32) += 1;
            }
        }
        assert_eq!(counts.len(), 15);
        for (&pair, &count) in &counts {
            let freq = count as f64 / draws as f64;
            assert!((freq - 0.2).abs() < 0.01, "pair {pair:?} frequency {freq}");
        }
    }

    #[test]
    fn determinism_per_seed() {
        let a = select_pairs_random(12, 55).unwrap();
        let b = select_pairs_random(12, 55).unwrap();
        assert_eq!(a, b);
        let c = select_pairs_random(12, 56).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn disjointness_over_many_draws() {
        for s in 0..10_000u64 {
            let m = select_pairs_random(9, s).unwrap();
            let mut seen = [false; 10];
            for &(i, j) in m.pairs() {
                assert!(i < j);
                assert!(!seen[i] && !seen[j], "axis reused at seed {s}");
                seen[i] = true;
                seen[j] = true;
            }
        }
    }

    #[test]
    fn greedy_takes_locally_best_pairs() {
        let d = textbook_instance();
        let m = select_pairs_greedy(&d).unwrap();
        assert_eq!(m.pairs(), &[(1, 2), (3, 4)]);
        assert!((m.weight(&d) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_two_axes() {
        let d = deriv_from_entries(2, &[(1, 2, 0.0)]);
        assert_eq!(select_pairs_greedy(&d).unwrap().pairs(), &[(1, 2)]);
    }

    #[test]
    fn greedy_tie_break_is_lexicographic() {
        let d = deriv_from_entries(
            4,
            &[(1, 2, 1.0), (1, 3, 1.0), (1, 4, 1.0), (2, 3, 1.0), (2, 4, 1.0), (3, 4, 1.0)],
        );
        let m = select_pairs_greedy(&d).unwrap();
        assert_eq!(m.pairs(), &[(1, 2), (3, 4)]);
    }

    #[test]
    fn steepest_beats_greedy_on_textbook_instance() {
        let d = textbook_instance();
        let m = select_pairs_steepest(&d).unwrap();
        assert_eq!(m.pairs(), &[(1, 3), (2, 4)]);
        assert!((m.weight(&d) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn steepest_matches_enumeration_and_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(400);
        for trial in 0..20 {
            let n = 8;
            let a = gaussian_matrix(n, n, &mut rng);
            let d = DerivativeMatrix::new(&Matrix::identity(n), &a).unwrap();
            let steepest = select_pairs_steepest(&d).unwrap();
            let greedy = select_pairs_greedy(&d).unwrap();
            let (_, best) =
                best_matching_by_enumeration(n, |i, j| d.value(i + 1, j + 1).powi(2));
            let got = steepest.weight(&d);
            assert!((got - best).abs() < 1e-9, "trial {trial}: {got} vs {best}");
            assert!(got >= greedy.weight(&d) - 1e-12);
        }
    }

    #[test]
    fn steepest_respects_dimension_cap() {
        let d = DerivativeMatrix::from_antisymmetric(Matrix::zeros(65, 65)).unwrap();
        assert!(matches!(
            select_pairs_steepest(&d),
            Err(Error::MatchingDimensionCap { n: 65, cap: 64 })
        ));
    }

    #[test]
    fn overlapping_greedy_repeats_axes() {
        let d = textbook_instance();
        let m = select_pairs_overlapping(&d, OverlapBase::Greedy).unwrap();
        assert_eq!(m.pairs(), &[(1, 2), (1, 3)]);
        assert!(m.is_overlapping());
    }

    #[test]
    fn overlapping_random_draws_without_replacement() {
        let d = deriv_from_entries(8, &[(1, 2, 1.0)]);
        for seed in 0..200 {
            let m = select_pairs_overlapping(&d, OverlapBase::Random { seed }).unwrap();
            assert_eq!(m.pairs().len(), 4);
            let mut sorted = m.pairs().to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 4, "duplicate pair at seed {seed}");
        }
    }

    #[test]
    fn gcd_step_zero_gradient_is_identity_update() {
        let mut state = RotationState::identity(4);
        let before = state.matrix().clone();
        gcd_step(&mut state, &Matrix::zeros(4, 4), &SelectionStrategy::Greedy, 0.1).unwrap();
        assert_eq!(state.matrix(), &before);
        assert_eq!(state.steps_applied(), 1);
    }

    #[test]
    fn gcd_step_linear_loss_single_plane() {
        // g_12 = -1/sqrt(2), so the applied angle is +lr/sqrt(2).
        let w = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let mut state = RotationState::identity(2);
        gcd_step(&mut state, &w, &SelectionStrategy::Greedy, 0.1).unwrap();
        let theta = 0.1 / SQRT_2;
        let expected = GivensPlan::disjoint(vec![GivensPair::new(1, 2, theta)])
            .unwrap()
            .to_matrix(2)
            .unwrap();
        assert!(state.matrix().sub(&expected).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn gcd_step_descends_quadratic_loss() {
        let n = 8;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = gaussian_matrix(10, n, &mut rng);
            let t = gaussian_matrix(10, n, &mut rng);
            let loss = |rot: &Matrix| -> f64 {
                x.matmul(rot).unwrap().sub(&t).unwrap().frobenius_norm().powi(2)
            };
            let mut state = RotationState::identity(n);
            let before = loss(state.matrix());
            let g = x
                .transpose_matmul(&x.matmul(state.matrix()).unwrap().sub(&t).unwrap())
                .unwrap()
                .scale(2.0);
            gcd_step(&mut state, &g, &SelectionStrategy::Greedy, 1e-3).unwrap();
            let after = loss(state.matrix());
            assert!(after < before, "seed {seed}: {after} !< {before}");
        }
    }

    #[test]
    fn gcd_step_rejects_bad_learning_rate() {
        let mut state = RotationState::identity(4);
        let g = Matrix::zeros(4, 4);
        assert!(gcd_step(&mut state, &g, &SelectionStrategy::Greedy, 0.0).is_err());
    }

    #[test]
    fn pair_derivatives_agree_with_full_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 10;
        let r = random_rotation(n, &mut rng);
        let g = gaussian_matrix(n, n, &mut rng);
        let d = DerivativeMatrix::new(&r, &g).unwrap();
        let pairs = vec![(1, 4), (2, 9), (3, 7), (5, 10)];
        let sparse = pair_derivatives(&r, &g, &pairs).unwrap();
        for (&(i, j), &v) in pairs.iter().zip(&sparse) {
            assert!((v - d.value(i, j)).abs() < 1e-12);
        }
    }
}
