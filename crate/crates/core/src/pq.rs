//! Product quantization: k-means codebook training, nearest-centroid
//! encoding, quantization distortion, and asymmetric-distance recall
//! evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sample::mix_seed;

/// Default Lloyd iteration budget for cold-start training.
pub const KMEANS_DEFAULT_ITERS: usize = 25;
/// Centroids closer than this within one subspace mark the codebook
/// degenerate.
pub const DUPLICATE_CENTROID_TOL: f64 = 1e-12;

/// Result of a k-means run.
#[derive(Debug, Clone)]
pub struct KmeansOutcome {
    /// K x d centroid matrix.
    pub centroids: Matrix,
    /// Index of the nearest centroid per input point.
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares at the final assignment.
    pub objective: f64,
    /// Lloyd iterations actually executed.
    pub iterations: usize,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest row of `centroids` to `point`; ties go to the
/// lowest index.
fn nearest_centroid(centroids: &Matrix, point: &[f64]) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for c in 0..centroids.rows() {
        let d = squared_distance(centroids.row(c), point);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Terminates at an assignment fixpoint or after `max_iters` iterations.
/// Empty clusters are repaired by moving their centroid to the point
/// farthest from its current centroid, which never increases the
/// objective. Deterministic for a fixed seed.
pub fn kmeans(points: &Matrix, k: usize, max_iters: usize, seed: u64) -> Result<KmeansOutcome> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if points.rows() < k {
        return Err(Error::Config(format!(
            "need at least k={k} points, got {}",
            points.rows()
        )));
    }
    let centroids = plus_plus_init(points, k, seed);
    lloyd(points, centroids, max_iters)
}

/// Lloyd iterations warm-started from existing centroids; used by the
/// alternating trainers to refresh a codebook without re-seeding.
pub fn kmeans_warm(points: &Matrix, centroids: Matrix, max_iters: usize) -> Result<KmeansOutcome> {
    if points.rows() < centroids.rows() {
        return Err(Error::Config(format!(
            "need at least k={} points, got {}",
            centroids.rows(),
            points.rows()
        )));
    }
    if points.cols() != centroids.cols() {
        return Err(Error::ShapeMismatch {
            expected: format!("points with {} columns", centroids.cols()),
            got: format!("{} columns", points.cols()),
        });
    }
    lloyd(points, centroids, max_iters)
}

fn plus_plus_init(points: &Matrix, k: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = points.rows();
    let d = points.cols();
    let mut centroids = Matrix::zeros(k, d);
    let first = rng.random_range(0..m);
    centroids.row_mut(0).copy_from_slice(points.row(first));

    let mut dist2: Vec<f64> = (0..m)
        .map(|r| squared_distance(points.row(r), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = dist2.iter().sum();
        let pick = if total > 0.0 {
            // Sample proportionally to squared distance from the chosen set.
            let mut target = rng.random_range(0.0..total);
            let mut chosen = m - 1;
            for (r, &d2) in dist2.iter().enumerate() {
                if target < d2 {
                    chosen = r;
                    break;
                }
                target -= d2;
            }
            chosen
        } else {
            // All points coincide with chosen centroids.
            rng.random_range(0..m)
        };
        centroids.row_mut(c).copy_from_slice(points.row(pick));
        for (r, d2) in dist2.iter_mut().enumerate() {
            let d = squared_distance(points.row(r), centroids.row(c));
            if d < *d2 {
                *d2 = d;
            }
        }
    }
    centroids
}

fn lloyd(points: &Matrix, mut centroids: Matrix, max_iters: usize) -> Result<KmeansOutcome> {
    let m = points.rows();
    let d = points.cols();
    let k = centroids.rows();
    let mut assignments = vec![usize::MAX; m];
    let mut objective;
    let mut iterations = 0;

    loop {
        // Assignment step. The loop always exits right after one of
        // these, so the reported objective and assignments match the
        // returned centroids.
        let mut changed = false;
        let mut obj = 0.0;
        let mut dist2 = vec![0.0f64; m];
        for r in 0..m {
            let (best, dist) = nearest_centroid(&centroids, points.row(r));
            obj += dist;
            dist2[r] = dist;
            if assignments[r] != best {
                assignments[r] = best;
                changed = true;
            }
        }
        objective = obj;
        if !changed || iterations >= max_iters {
            break;
        }
        iterations += 1;

        // Update step: means per cluster.
        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; m.min(k).max(k)];
        for r in 0..m {
            let c = assignments[r];
            counts[c] += 1;
            for (s, &v) in sums.row_mut(c).iter_mut().zip(points.row(r)) {
                *s += v;
            }
        }
        let mut taken = vec![false; m];
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (dst, &s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            } else {
                // Re-seed an empty cluster to the farthest unused point.
                let far = dist2
                    .iter()
                    .enumerate()
                    .filter(|&(r, _)| !taken[r])
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                    .map(|(r, _)| r)
                    .unwrap_or(0);
                taken[far] = true;
                centroids.row_mut(c).copy_from_slice(points.row(far));
            }
        }
    }

    Ok(KmeansOutcome { centroids, assignments, objective, iterations })
}

/// Per-subspace codebooks: `subspaces` independent k-means codebooks of
/// `centroids_per` centroids over contiguous column blocks of width
/// `subdim`.
#[derive(Debug, Clone)]
pub struct PQCodebook {
    subspaces: usize,
    centroids_per: usize,
    subdim: usize,
    codebooks: Vec<Matrix>,
    degenerate: bool,
}

impl PQCodebook {
    pub fn from_parts(codebooks: Vec<Matrix>) -> Result<Self> {
        let subspaces = codebooks.len();
        if subspaces == 0 {
            return Err(Error::Config("need at least one subspace".into()));
        }
        let centroids_per = codebooks[0].rows();
        let subdim = codebooks[0].cols();
        for cb in &codebooks {
            if cb.rows() != centroids_per || cb.cols() != subdim {
                return Err(Error::ShapeMismatch {
                    expected: format!("{centroids_per}x{subdim} codebooks"),
                    got: format!("{}x{}", cb.rows(), cb.cols()),
                });
            }
        }
        let degenerate = codebooks.iter().any(has_duplicate_centroids);
        Ok(Self { subspaces, centroids_per, subdim, codebooks, degenerate })
    }

    pub fn subspaces(&self) -> usize {
        self.subspaces
    }

    pub fn centroids_per_subspace(&self) -> usize {
        self.centroids_per
    }

    pub fn subdim(&self) -> usize {
        self.subdim
    }

    pub fn dim(&self) -> usize {
        self.subspaces * self.subdim
    }

    /// K x subdim codebook of one subspace.
    pub fn codebook(&self, s: usize) -> &Matrix {
        &self.codebooks[s]
    }

    /// True when some subspace trained two coincident centroids.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

fn has_duplicate_centroids(cb: &Matrix) -> bool {
    for a in 0..cb.rows() {
        for b in (a + 1)..cb.rows() {
            if squared_distance(cb.row(a), cb.row(b)) < DUPLICATE_CENTROID_TOL.powi(2) {
                return true;
            }
        }
    }
    false
}

/// Codes for a batch of vectors: `subspaces` centroid indices per vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PQCodes {
    vectors: usize,
    subspaces: usize,
    codes: Vec<u32>,
}

impl PQCodes {
    pub fn vectors(&self) -> usize {
        self.vectors
    }

    pub fn code(&self, v: usize, s: usize) -> u32 {
        self.codes[v * self.subspaces + s]
    }

    pub fn row(&self, v: usize) -> &[u32] {
        &self.codes[v * self.subspaces..(v + 1) * self.subspaces]
    }
}

/// Trains one codebook per contiguous column block. Subspace `s` uses
/// the seed stream `mix_seed(seed, s)`.
pub fn pq_train(x: &Matrix, subspaces: usize, k: usize, seed: u64) -> Result<PQCodebook> {
    pq_train_with_iters(x, subspaces, k, seed, KMEANS_DEFAULT_ITERS)
}

pub fn pq_train_with_iters(
    x: &Matrix,
    subspaces: usize,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<PQCodebook> {
    if subspaces == 0 || x.cols() % subspaces != 0 {
        return Err(Error::Config(format!(
            "dimension {} not divisible into {subspaces} subspaces",
            x.cols()
        )));
    }
    let subdim = x.cols() / subspaces;
    let mut codebooks = Vec::with_capacity(subspaces);
    for s in 0..subspaces {
        let block = x.col_range(s * subdim, (s + 1) * subdim);
        let outcome = kmeans(&block, k, max_iters, mix_seed(seed, s as u64))?;
        codebooks.push(outcome.centroids);
    }
    PQCodebook::from_parts(codebooks)
}

/// Nearest-centroid code per subspace, squared Euclidean, ties to the
/// lowest index.
pub fn pq_encode(x: &Matrix, cb: &PQCodebook) -> Result<PQCodes> {
    if x.cols() != cb.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} columns", cb.dim()),
            got: format!("{} columns", x.cols()),
        });
    }
    let subdim = cb.subdim();
    let mut codes = Vec::with_capacity(x.rows() * cb.subspaces());
    for r in 0..x.rows() {
        let row = x.row(r);
        for s in 0..cb.subspaces() {
            let sub = &row[s * subdim..(s + 1) * subdim];
            let (best, _) = nearest_centroid(cb.codebook(s), sub);
            codes.push(best as u32);
        }
    }
    Ok(PQCodes { vectors: x.rows(), subspaces: cb.subspaces(), codes })
}

/// Concatenates the centroids selected by `codes`.
pub fn pq_decode(codes: &PQCodes, cb: &PQCodebook) -> Result<Matrix> {
    if codes.subspaces != cb.subspaces() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} subspaces", cb.subspaces()),
            got: format!("{} subspaces", codes.subspaces),
        });
    }
    let subdim = cb.subdim();
    let mut out = Matrix::zeros(codes.vectors, cb.dim());
    for v in 0..codes.vectors {
        let row = out.row_mut(v);
        for s in 0..codes.subspaces {
            let c = codes.code(v, s) as usize;
            row[s * subdim..(s + 1) * subdim].copy_from_slice(cb.codebook(s).row(c));
        }
    }
    Ok(out)
}

/// Encode-decode round trip: the quantization function applied to `x`.
pub fn quantize(x: &Matrix, cb: &PQCodebook) -> Result<Matrix> {
    pq_decode(&pq_encode(x, cb)?, cb)
}

/// Mean squared reconstruction error `(1/m) sum ||x_r - xq_r||^2`.
pub fn distortion(x: &Matrix, xq: &Matrix) -> Result<f64> {
    if x.rows() != xq.rows() || x.cols() != xq.cols() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", x.rows(), x.cols()),
            got: format!("{}x{}", xq.rows(), xq.cols()),
        });
    }
    if x.rows() == 0 {
        return Ok(0.0);
    }
    let total: f64 = (0..x.rows())
        .map(|r| squared_distance(x.row(r), xq.row(r)))
        .sum();
    Ok(total / x.rows() as f64)
}

/// Recall@k of asymmetric distance computation: queries stay exact, base
/// vectors are quantized after rotation, and distances come from
/// per-subspace lookup tables. The true neighbor is the exact squared-
/// Euclidean top-1 (equivalently computed in the rotated frame, since
/// rotations preserve distances).
pub fn adc_eval(
    queries: &Matrix,
    base: &Matrix,
    r: &Matrix,
    cb: &PQCodebook,
    k: usize,
) -> Result<f64> {
    adc_recall(queries, base, r, cb, k, None)
}

/// [`adc_eval`] against externally supplied true top-1 neighbor ids (for
/// example from a ground-truth ivecs file).
pub fn adc_eval_with_truth(
    queries: &Matrix,
    base: &Matrix,
    r: &Matrix,
    cb: &PQCodebook,
    k: usize,
    truth: &[usize],
) -> Result<f64> {
    if truth.len() != queries.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} truth ids", queries.rows()),
            got: format!("{}", truth.len()),
        });
    }
    if let Some(&bad) = truth.iter().find(|&&t| t >= base.rows()) {
        return Err(Error::Config(format!(
            "ground-truth id {bad} out of range for base of {} vectors",
            base.rows()
        )));
    }
    adc_recall(queries, base, r, cb, k, Some(truth))
}

fn adc_recall(
    queries: &Matrix,
    base: &Matrix,
    r: &Matrix,
    cb: &PQCodebook,
    k: usize,
    truth: Option<&[usize]>,
) -> Result<f64> {
    if queries.cols() != base.cols() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} columns", base.cols()),
            got: format!("{} columns", queries.cols()),
        });
    }
    if k == 0 || k > base.rows() {
        return Err(Error::Config(format!(
            "k={k} out of range for base of {} vectors",
            base.rows()
        )));
    }
    let qr = queries.matmul(r)?;
    let br = base.matmul(r)?;
    let codes = pq_encode(&br, cb)?;
    let subdim = cb.subdim();

    let mut hits = 0usize;
    for q in 0..qr.rows() {
        let qrow = qr.row(q);
        let target = match truth {
            Some(ids) => ids[q],
            None => {
                // Exact top-1 in the rotated frame.
                let mut best = (0usize, f64::INFINITY);
                for b in 0..br.rows() {
                    let d = squared_distance(qrow, br.row(b));
                    if d < best.1 {
                        best = (b, d);
                    }
                }
                best.0
            }
        };
        // Per-subspace lookup tables for this query.
        let mut tables = Vec::with_capacity(cb.subspaces());
        for s in 0..cb.subspaces() {
            let sub = &qrow[s * subdim..(s + 1) * subdim];
            let table: Vec<f64> = (0..cb.centroids_per_subspace())
                .map(|c| squared_distance(sub, cb.codebook(s).row(c)))
                .collect();
            tables.push(table);
        }
        let mut scored: Vec<(f64, usize)> = (0..br.rows())
            .map(|b| {
                let dist: f64 = codes
                    .row(b)
                    .iter()
                    .enumerate()
                    .map(|(s, &c)| tables[s][c as usize])
                    .sum();
                (dist, b)
            })
            .collect();
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        if scored[..k].iter().any(|&(_, b)| b == target) {
            hits += 1;
        }
    }
    Ok(hits as f64 / qr.rows().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{gaussian_matrix, random_rotation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kmeans_single_cluster_is_mean() {
        let pts = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 4.0]]).unwrap();
        let out = kmeans(&pts, 1, 25, 0).unwrap();
        assert_eq!(out.centroids.row(0), &[3.0, 4.0]);
    }

    #[test]
    fn kmeans_separated_clusters() {
        let pts = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![10.0, 0.0],
            vec![10.0, 1.0],
        ])
        .unwrap();
        let out = kmeans(&pts, 2, 25, 42).unwrap();
        let mut rows: Vec<Vec<f64>> =
            (0..2).map(|c| out.centroids.row(c).to_vec()).collect();
        rows.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert_eq!(rows[0], vec![0.0, 0.5]);
        assert_eq!(rows[1], vec![10.0, 0.5]);
    }

    #[test]
    fn kmeans_exact_points_zero_distortion() {
        let pts = Matrix::from_rows(&[vec![1.0], vec![5.0], vec![9.0]]).unwrap();
        let out = kmeans(&pts, 3, 25, 7).unwrap();
        assert_eq!(out.objective, 0.0);
        assert!(out.iterations <= 1);
    }

    #[test]
    fn kmeans_rejects_too_few_points() {
        let pts = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(kmeans(&pts, 2, 25, 0).is_err());
    }

    #[test]
    fn kmeans_objective_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = gaussian_matrix(200, 4, &mut rng);
        // Track the objective across warm restarts of single iterations.
        let mut centroids = kmeans(&pts, 8, 1, 3).unwrap().centroids;
        let mut last = f64::INFINITY;
        for _ in 0..10 {
            let out = kmeans_warm(&pts, centroids, 1).unwrap();
            assert!(out.objective <= last + 1e-9, "{} > {last}", out.objective);
            last = out.objective;
            centroids = out.centroids;
        }
    }

    #[test]
    fn kmeans_repairs_empty_clusters() {
        // Two far groups and k=3: one centroid would go empty without the
        // farthest-point repair.
        let mut rows = Vec::new();
        for i in 0..10 {
            rows.push(vec![i as f64 * 0.01, 0.0]);
        }
        rows.push(vec![100.0, 0.0]);
        let pts = Matrix::from_rows(&rows).unwrap();
        let out = kmeans(&pts, 3, 25, 11).unwrap();
        let mut counts = [0usize; 3];
        for &a in &out.assignments {
            counts[a] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0), "empty cluster survived: {counts:?}");
    }

    #[test]
    fn pq_train_single_subspace_is_plain_kmeans() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let x = gaussian_matrix(60, 6, &mut rng);
        let cb = pq_train(&x, 1, 4, 9).unwrap();
        let direct = kmeans(&x, 4, KMEANS_DEFAULT_ITERS, mix_seed(9, 0)).unwrap();
        assert_eq!(cb.codebook(0), &direct.centroids);
    }

    #[test]
    fn pq_train_full_split_k1_gives_coordinate_means() {
        let x = Matrix::from_rows(&[vec![1.0, 10.0], vec![3.0, 30.0]]).unwrap();
        let cb = pq_train(&x, 2, 1, 0).unwrap();
        assert_eq!(cb.codebook(0).row(0), &[2.0]);
        assert_eq!(cb.codebook(1).row(0), &[20.0]);
        // Distortion equals total per-coordinate variance.
        let q = quantize(&x, &cb).unwrap();
        let d = distortion(&x, &q).unwrap();
        assert!((d - (1.0 + 100.0)).abs() < 1e-12);
    }

    #[test]
    fn pq_train_decomposes_over_subspaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000);
        let x = gaussian_matrix(1000, 8, &mut rng);
        let cb = pq_train(&x, 2, 4, 77).unwrap();
        let q = quantize(&x, &cb).unwrap();
        let total = distortion(&x, &q).unwrap();
        let mut sum_halves = 0.0;
        for s in 0..2 {
            let half = x.col_range(s * 4, (s + 1) * 4);
            let out = kmeans(&half, 4, KMEANS_DEFAULT_ITERS, mix_seed(77, s as u64)).unwrap();
            sum_halves += out.objective / x.rows() as f64;
        }
        assert!((total - sum_halves).abs() < 1e-9, "{total} vs {sum_halves}");
    }

    #[test]
    fn pq_train_requires_divisible_dimension() {
        let x = Matrix::zeros(10, 7);
        assert!(pq_train(&x, 2, 2, 0).is_err());
    }

    #[test]
    fn encode_nearest_of_three_scalars() {
        let cb = PQCodebook::from_parts(vec![Matrix::from_rows(&[
            vec![-1.0],
            vec![0.0],
            vec![1.0],
        ])
        .unwrap()])
        .unwrap();
        let x = Matrix::from_rows(&[vec![0.4]]).unwrap();
        let codes = pq_encode(&x, &cb).unwrap();
        assert_eq!(codes.code(0, 0), 1);
        let decoded = pq_decode(&codes, &cb).unwrap();
        assert_eq!(decoded.row(0), &[0.0]);
    }

    #[test]
    fn codebook_rows_roundtrip_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = gaussian_matrix(40, 8, &mut rng);
        let cb = pq_train(&x, 4, 5, 3).unwrap();
        // Vectors assembled from centroids quantize to themselves.
        let mut rows = Vec::new();
        for v in 0..10 {
            let mut row = Vec::new();
            for s in 0..4 {
                row.extend_from_slice(cb.codebook(s).row((v + s) % 5));
            }
            rows.push(row);
        }
        let exact = Matrix::from_rows(&rows).unwrap();
        let q = quantize(&exact, &cb).unwrap();
        assert_eq!(q, exact);
        assert_eq!(distortion(&exact, &q).unwrap(), 0.0);
    }

    #[test]
    fn encode_matches_bruteforce_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(321);
        let x = gaussian_matrix(200, 8, &mut rng);
        let cb = pq_train(&x, 4, 8, 55).unwrap();
        let codes = pq_encode(&x, &cb).unwrap();
        for v in 0..x.rows() {
            for s in 0..4 {
                let sub = &x.row(v)[s * 2..(s + 1) * 2];
                let mut best = (0usize, f64::INFINITY);
                for c in 0..8 {
                    let cen = cb.codebook(s).row(c);
                    let d = (sub[0] - cen[0]).powi(2) + (sub[1] - cen[1]).powi(2);
                    if d < best.1 {
                        best = (c, d);
                    }
                }
                assert_eq!(codes.code(v, s) as usize, best.0);
            }
        }
    }

    #[test]
    fn quantization_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = gaussian_matrix(64, 8, &mut rng);
        let cb = pq_train(&x, 2, 4, 19).unwrap();
        let q1 = quantize(&x, &cb).unwrap();
        let q2 = quantize(&q1, &cb).unwrap();
        assert_eq!(q1, q2);
    }

    #[test]
    fn trained_assignment_beats_random_codes() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let x = gaussian_matrix(50, 4, &mut rng);
        let cb = pq_train(&x, 2, 4, 1).unwrap();
        let best = distortion(&x, &quantize(&x, &cb).unwrap()).unwrap();
        for _ in 0..20 {
            let codes = PQCodes {
                vectors: 50,
                subspaces: 2,
                codes: (0..100).map(|_| rng.random_range(0..4u32)).collect(),
            };
            let other = pq_decode(&codes, &cb).unwrap();
            let d = distortion(&x, &other).unwrap();
            assert!(best <= d + 1e-12);
        }
    }

    #[test]
    fn distortion_hand_values_and_oracle() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let mut xq = x.clone();
        xq[(0, 0)] = 0.0; // differs by (1,0,0)
        xq[(1, 1)] = 0.0; // differs by (0,1,0)
        assert_eq!(distortion(&x, &xq).unwrap(), 1.0);
        assert_eq!(distortion(&x, &x).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = gaussian_matrix(30, 5, &mut rng);
        let b = gaussian_matrix(30, 5, &mut rng);
        let fast = distortion(&a, &b).unwrap();
        let mut naive = 0.0;
        for r in 0..30 {
            for c in 0..5 {
                let d = a[(r, c)] - b[(r, c)];
                naive += d * d;
            }
        }
        naive /= 30.0;
        assert!((fast - naive).abs() <= 1e-12 * naive.max(1.0));
    }

    #[test]
    fn rotation_isometry_of_distortion() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = gaussian_matrix(40, 8, &mut rng);
        let r = random_rotation(8, &mut rng);
        let xr = x.matmul(&r).unwrap();
        let cb = pq_train(&xr, 4, 4, 5).unwrap();
        let q = quantize(&xr, &cb).unwrap();
        let rotated_frame = distortion(&xr, &q).unwrap();
        // Rotate back: || X - phi(XR) R^T ||.
        let back = q.matmul(&r.transpose()).unwrap();
        let original_frame = distortion(&x, &back).unwrap();
        assert!((rotated_frame - original_frame).abs() < 1e-10 * rotated_frame.max(1.0));
    }

    #[test]
    fn adc_lossless_codebook_gets_full_recall() {
        // 8 distinct base vectors, K=8 per 1-wide subspace: quantization
        // is exact, so ADC recall@1 is 1.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let base = gaussian_matrix(8, 4, &mut rng);
        let cb = pq_train(&base, 4, 8, 2).unwrap();
        let queries = gaussian_matrix(20, 4, &mut rng);
        let r = Matrix::identity(4);
        let recall = adc_eval(&queries, &base, &r, &cb, 1).unwrap();
        assert_eq!(recall, 1.0);
    }

    #[test]
    fn adc_k_equals_m_recalls_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let base = gaussian_matrix(30, 8, &mut rng);
        let queries = gaussian_matrix(10, 8, &mut rng);
        let cb = pq_train(&base, 4, 2, 1).unwrap();
        let r = random_rotation(8, &mut rng);
        let recall = adc_eval(&queries, &base, &r, &cb, 30).unwrap();
        assert_eq!(recall, 1.0);
        assert!(adc_eval(&queries, &base, &r, &cb, 31).is_err());
    }

    #[test]
    fn adc_tables_match_direct_reconstruction_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let base = gaussian_matrix(500, 16, &mut rng);
        let queries = gaussian_matrix(50, 16, &mut rng);
        let r = random_rotation(16, &mut rng);
        let br = base.matmul(&r).unwrap();
        let cb = pq_train(&br, 4, 16, 3).unwrap();
        let qr = queries.matmul(&r).unwrap();
        let codes = pq_encode(&br, &cb).unwrap();
        let decoded = pq_decode(&codes, &cb).unwrap();
        // Spot-check the table-based distance against the decoded vectors.
        for q in 0..5 {
            let qrow = qr.row(q);
            for b in (0..500).step_by(37) {
                let direct = squared_distance(qrow, decoded.row(b));
                let mut table = 0.0;
                for s in 0..4 {
                    let sub = &qrow[s * 4..(s + 1) * 4];
                    let cen = cb.codebook(s).row(codes.code(b, s) as usize);
                    table += squared_distance(sub, cen);
                }
                assert!((direct - table).abs() < 1e-10);
            }
        }
    }
}
