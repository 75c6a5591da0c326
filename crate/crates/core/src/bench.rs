//! Per-step runtime scaling of the rotation-update methods.
//!
//! Times exactly the work one rotation update adds on top of a loss
//! gradient that is assumed already computed:
//!
//! * `gcd-r` — random matching, derivatives for the selected n/2 planes
//!   only, plan application. O(n^2) total, which is the point: random
//!   selection never touches the full derivative matrix.
//! * `gcd-g` — full derivative matrix, greedy matching, application.
//! * `cayley` — parameter-gradient map (one linear solve), parameter
//!   update, rotation reconstruction (another solve). O(n^3).
//!
//! Single-threaded by construction so the fitted exponents stay clean.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cayley::CayleyState;
use crate::descent::{pair_derivatives, select_pairs_greedy, select_pairs_random, DerivativeMatrix};
use crate::error::{Error, Result};
use crate::givens::{apply_right, GivensPair, GivensPlan};
use crate::matrix::Matrix;
use crate::sample::{gaussian_matrix, mix_seed, random_antisymmetric};

/// Untimed steps run before measurement starts.
pub const BENCH_WARMUP: usize = 3;
/// Minimum trial count.
pub const BENCH_DEFAULT_TRIALS: usize = 20;
/// Default dimension sweep.
pub const BENCH_DEFAULT_SIZES: [usize; 5] = [64, 128, 256, 512, 1024];

/// One (method, dimension) measurement.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub method: BenchMethod,
    pub n: usize,
    /// Mean wall-clock seconds per step.
    pub seconds_per_step: f64,
    /// Sample standard deviation across trials.
    pub std_dev: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    GcdRandom,
    GcdGreedy,
    Cayley,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::GcdRandom => "gcd-r",
            Self::GcdGreedy => "gcd-g",
            Self::Cayley => "cayley",
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gcd-r" => Ok(Self::GcdRandom),
            "gcd-g" => Ok(Self::GcdGreedy),
            "cayley" => Ok(Self::Cayley),
            other => Err(Error::Config(format!("unknown bench method: {other}"))),
        }
    }
}

/// Rotation assembled from a handful of random disjoint plans; cheap at
/// any dimension, unlike a full Haar draw.
fn plan_built_rotation(n: usize, rng: &mut impl Rng) -> Matrix {
    let mut r = Matrix::identity(n);
    for _ in 0..8 {
        let matching = select_pairs_random(n, rng.random()).expect("n >= 2");
        let pairs = matching
            .pairs()
            .iter()
            .map(|&(i, j)| GivensPair::new(i, j, rng.random_range(-1.0..1.0)))
            .collect();
        let plan = GivensPlan::disjoint(pairs).expect("random matching is disjoint");
        apply_right(&mut r, &plan).expect("indices in range");
    }
    r
}

fn summarize(
    method: BenchMethod,
    n: usize,
    seed: u64,
    samples: &[f64],
) -> BenchRecord {
    let trials = samples.len();
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
        / (trials.max(2) - 1) as f64;
    BenchRecord { method, n, seconds_per_step: mean, std_dev: var.sqrt(), trials, seed }
}

/// Times `trials` steps of one method at dimension `n`.
pub fn bench_step(method: BenchMethod, n: usize, trials: usize, seed: u64) -> Result<BenchRecord> {
    if n < 2 {
        return Err(Error::Config(format!("bench needs n >= 2, got {n}")));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, n as u64));
    let gradient = gaussian_matrix(n, n, &mut rng);
    let lr = 1e-3;
    let mut samples = Vec::with_capacity(trials);

    match method {
        BenchMethod::GcdRandom => {
            let mut r = plan_built_rotation(n, &mut rng);
            for t in 0..BENCH_WARMUP + trials {
                let step_seed: u64 = rng.random();
                let start = Instant::now();
                let matching = select_pairs_random(n, step_seed)?;
                let derivs = pair_derivatives(&r, &gradient, matching.pairs())?;
                let pairs = matching
                    .pairs()
                    .iter()
                    .zip(&derivs)
                    .map(|(&(i, j), &g)| GivensPair::new(i, j, -lr * g))
                    .collect();
                let plan = GivensPlan::disjoint(pairs)?;
                apply_right(&mut r, &plan)?;
                let elapsed = start.elapsed().as_secs_f64();
                if t >= BENCH_WARMUP {
                    samples.push(elapsed);
                }
            }
        }
        BenchMethod::GcdGreedy => {
            let mut r = plan_built_rotation(n, &mut rng);
            for t in 0..BENCH_WARMUP + trials {
                let start = Instant::now();
                let derivs = DerivativeMatrix::new(&r, &gradient)?;
                let matching = select_pairs_greedy(&derivs)?;
                let plan = matching.to_plan(&derivs, lr)?;
                apply_right(&mut r, &plan)?;
                let elapsed = start.elapsed().as_secs_f64();
                if t >= BENCH_WARMUP {
                    samples.push(elapsed);
                }
            }
        }
        BenchMethod::Cayley => {
            let mut state = CayleyState::from_parameters(&random_antisymmetric(
                n,
                1e-3,
                &mut rng,
            ))?;
            for t in 0..BENCH_WARMUP + trials {
                let start = Instant::now();
                state.step(&gradient, 1e-4)?;
                let elapsed = start.elapsed().as_secs_f64();
                if t >= BENCH_WARMUP {
                    samples.push(elapsed);
                }
            }
        }
    }
    Ok(summarize(method, n, seed, &samples))
}

/// Full sweep over methods and dimensions.
pub fn run_scaling_bench(
    methods: &[BenchMethod],
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<BenchRecord>> {
    let mut records = Vec::with_capacity(methods.len() * sizes.len());
    for &method in methods {
        for &n in sizes {
            records.push(bench_step(method, n, trials, seed)?);
        }
    }
    Ok(records)
}

/// Least-squares slope of `log(seconds)` against `log(n)`.
pub fn log_log_slope(points: &[(usize, f64)]) -> f64 {
    let k = points.len() as f64;
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, s)| ((n as f64).ln(), s.ln()))
        .collect();
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let cov: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    cov / var
}

/// Slope of one method's records.
pub fn method_slope(records: &[BenchRecord], method: BenchMethod) -> f64 {
    let points: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.method == method)
        .map(|r| (r.n, r.seconds_per_step))
        .collect();
    log_log_slope(&points)
}

/// CSV schema: `method,n,seconds_per_step,trials`.
pub fn write_bench_csv(path: impl AsRef<Path>, records: &[BenchRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "method,n,seconds_per_step,trials")?;
    for r in records {
        writeln!(w, "{},{},{},{}", r.method, r.n, r.seconds_per_step, r.trials)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let points: Vec<(usize, f64)> =
            [8usize, 16, 32, 64].iter().map(|&n| (n, (n * n) as f64 * 1e-9)).collect();
        let slope = log_log_slope(&points);
        assert!((slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bench_records_have_positive_timings() {
        for method in [BenchMethod::GcdRandom, BenchMethod::GcdGreedy, BenchMethod::Cayley] {
            let rec = bench_step(method, 16, 5, 1).unwrap();
            assert!(rec.seconds_per_step > 0.0);
            assert_eq!(rec.trials, 5);
        }
    }

    #[test]
    fn method_names_roundtrip() {
        for m in [BenchMethod::GcdRandom, BenchMethod::GcdGreedy, BenchMethod::Cayley] {
            assert_eq!(m.name().parse::<BenchMethod>().unwrap(), m);
        }
        assert!("qr".parse::<BenchMethod>().is_err());
    }

    #[test]
    fn bench_csv_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bench.csv");
        let records = vec![bench_step(BenchMethod::GcdRandom, 8, 3, 0).unwrap()];
        write_bench_csv(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "method,n,seconds_per_step,trials");
        let row = lines.next().unwrap();
        assert!(row.starts_with("gcd-r,8,"));
        assert!(row.ends_with(",3"));
    }
}
