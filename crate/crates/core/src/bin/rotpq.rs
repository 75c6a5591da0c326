//! Experiment CLI: trains rotation-aware product quantizers, benchmarks
//! per-step rotation-update cost, and evaluates ADC recall.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rotpq::bench::{method_slope, run_scaling_bench, write_bench_csv, BenchMethod};
use rotpq::descent::SelectionStrategy;
use rotpq::error::Error;
use rotpq::io::{
    gen_synthetic, gen_synthetic_split, read_fvecs, read_ivecs, write_fvecs, write_train_csv,
};
use rotpq::matrix::Matrix;
use rotpq::opq::{RotationMode, Trainer, TrainerConfig};
use rotpq::pq::{adc_eval, adc_eval_with_truth, distortion, quantize};
use rotpq::sample::mix_seed;

#[derive(Parser)]
#[command(
    name = "rotpq",
    version,
    about = "Rotation-aware product quantization: train, bench, eval"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a product quantizer with a learned (or frozen) rotation and
    /// write the distortion trace as CSV.
    Train(TrainArgs),
    /// Time one rotation-update step across embedding dimensions.
    Bench(BenchArgs),
    /// Train on a base set and report ADC recall@k plus distortion.
    Eval(EvalArgs),
    /// Write a synthetic dataset to fvecs files.
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RotationFlag {
    Frozen,
    Svd,
    GcdR,
    GcdG,
    GcdS,
    GcdGOverlap,
    GcdROverlap,
    Cayley,
}

impl RotationFlag {
    fn to_mode(self, seed: u64) -> RotationMode {
        // Random strategies get their own seed stream derived from the
        // run seed.
        let stream = mix_seed(seed, 0x5e1ec7);
        match self {
            Self::Frozen => RotationMode::Frozen,
            Self::Svd => RotationMode::Svd,
            Self::GcdR => RotationMode::Gcd(SelectionStrategy::Random { seed: stream }),
            Self::GcdG => RotationMode::Gcd(SelectionStrategy::Greedy),
            Self::GcdS => RotationMode::Gcd(SelectionStrategy::Steepest),
            Self::GcdGOverlap => RotationMode::Gcd(SelectionStrategy::OverlappingGreedy),
            Self::GcdROverlap => {
                RotationMode::Gcd(SelectionStrategy::OverlappingRandom { seed: stream })
            }
            Self::Cayley => RotationMode::Cayley,
        }
    }
}

#[derive(Args, Clone)]
struct SynthArgs {
    /// Rows when the dataset is `synthetic`.
    #[arg(long = "synth-m", default_value_t = 10_000)]
    synth_m: usize,
    /// Dimension when the dataset is `synthetic`.
    #[arg(long = "synth-n", default_value_t = 32)]
    synth_n: usize,
    /// Geometric covariance decay in (0, 1]; 1 = isotropic.
    #[arg(long, default_value_t = 0.8)]
    anisotropy: f64,
}

#[derive(Args)]
struct TrainArgs {
    /// fvecs path, or the literal `synthetic`.
    #[arg(long)]
    data: String,
    /// Rotation update rule.
    #[arg(long, value_enum)]
    rotation: RotationFlag,
    /// PQ subspaces (D).
    #[arg(long, default_value_t = 8)]
    d: usize,
    /// Centroids per subspace (K).
    #[arg(long, default_value_t = 256)]
    k: usize,
    /// Outer alternation iterations.
    #[arg(long, default_value_t = 50)]
    outer: usize,
    /// Inner rotation steps per outer iteration.
    #[arg(long, default_value_t = 5)]
    inner: usize,
    /// Learning rate for gcd-*/cayley inner steps.
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (columns: iter,distortion,seconds).
    #[arg(long)]
    out: PathBuf,
    /// Lloyd iterations per codebook refresh.
    #[arg(long, default_value_t = 10)]
    warm_kmeans: usize,
    /// Ablation: refresh assignments before every inner step.
    #[arg(long)]
    reassign_inner: bool,
    /// Re-anchor the Cayley chart at each outer iteration.
    #[arg(long)]
    cayley_reset: bool,
    #[command(flatten)]
    synth: SynthArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Output CSV path (columns: method,n,seconds_per_step,trials).
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated embedding dimensions.
    #[arg(long, value_delimiter = ',', default_values_t = vec![64usize, 128, 256, 512, 1024])]
    sizes: Vec<usize>,
    /// Timed steps per (method, n); 3 warm-up steps are not counted.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Comma-separated methods: gcd-r, gcd-g, cayley.
    #[arg(long, value_delimiter = ',', default_values_t = vec!["gcd-r".to_string(), "cayley".to_string()])]
    methods: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    /// fvecs path of base vectors, or the literal `synthetic`.
    #[arg(long)]
    base: String,
    /// fvecs path of query vectors (defaults to a synthetic split when
    /// the base is synthetic).
    #[arg(long)]
    queries: Option<PathBuf>,
    /// ivecs path of true-neighbor ids (column 0 used as top-1).
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Recall depth.
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// PQ subspaces (D).
    #[arg(long, default_value_t = 8)]
    d: usize,
    /// Centroids per subspace (K).
    #[arg(long, default_value_t = 256)]
    centroids: usize,
    #[arg(long, value_enum, default_value_t = RotationFlag::Svd)]
    rotation: RotationFlag,
    #[arg(long, default_value_t = 20)]
    outer: usize,
    #[arg(long, default_value_t = 5)]
    inner: usize,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Queries drawn from the synthetic split when base is synthetic.
    #[arg(long = "synth-q", default_value_t = 100)]
    synth_q: usize,
    #[command(flatten)]
    synth: SynthArgs,
}

#[derive(Args)]
struct GenArgs {
    /// Output fvecs path for base vectors.
    #[arg(long)]
    out: PathBuf,
    /// Optional output fvecs path for a query split.
    #[arg(long)]
    queries_out: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    m: usize,
    /// Query rows when --queries-out is set.
    #[arg(long, default_value_t = 100)]
    q: usize,
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 0.8)]
    anisotropy: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Exact-neighbor computation is refused beyond this base size; supply a
/// ground-truth file instead.
const EXACT_NEIGHBOR_CAP: usize = 100_000;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Io(_) | Error::DataFormat { .. } => 3,
        _ => 1,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Train(args) => train(args),
        Command::Bench(args) => bench(args),
        Command::Eval(args) => eval(args),
        Command::Gen(args) => gen(args),
    }
}

fn load_data(spec: &str, synth: &SynthArgs, seed: u64) -> Result<Matrix, Error> {
    if spec == "synthetic" {
        gen_synthetic(synth.synth_m, synth.synth_n, synth.anisotropy, seed)
    } else {
        read_fvecs(spec)
    }
}

fn train(args: TrainArgs) -> Result<(), Error> {
    let x = load_data(&args.data, &args.synth, args.seed)?;
    let mut cfg = TrainerConfig::new(
        args.d,
        args.k,
        args.outer,
        args.rotation.to_mode(args.seed),
        args.seed,
    );
    cfg.inner_steps = args.inner;
    cfg.lr = args.lr;
    cfg.warm_kmeans_iters = args.warm_kmeans;
    cfg.reassign_each_inner = args.reassign_inner;
    cfg.reset_cayley_each_outer = args.cayley_reset;

    let mut trainer = Trainer::new(&x, cfg)?;
    let trace = trainer.run()?;
    if trainer.cayley_ill_conditioned() {
        eprintln!(
            "warning: cayley parameterization is ill-conditioned (estimate > 1e8); \
             results may be inaccurate"
        );
    }
    write_train_csv(&args.out, &trace)?;
    println!(
        "rows={} final_distortion={}",
        trace.rows().len(),
        trace.final_distortion().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Error> {
    if args.trials < 1 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let methods: Vec<BenchMethod> = args
        .methods
        .iter()
        .map(|m| m.parse())
        .collect::<Result<_, _>>()?;
    let records = run_scaling_bench(&methods, &args.sizes, args.trials, args.seed)?;
    write_bench_csv(&args.out, &records)?;
    for &method in &methods {
        if args.sizes.len() >= 2 {
            println!("slope_{}={:.3}", method, method_slope(&records, method));
        }
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Error> {
    let (base, queries) = if args.base == "synthetic" {
        let (b, q) = gen_synthetic_split(
            args.synth.synth_m,
            args.synth_q,
            args.synth.synth_n,
            args.synth.anisotropy,
            args.seed,
        )?;
        let queries = match &args.queries {
            Some(path) => read_fvecs(path)?,
            None => q,
        };
        (b, queries)
    } else {
        let base = read_fvecs(&args.base)?;
        let path = args.queries.as_ref().ok_or_else(|| {
            Error::Config("--queries is required when --base is a file".into())
        })?;
        (base, read_fvecs(path)?)
    };

    let truth: Option<Vec<usize>> = match &args.gt {
        Some(path) => {
            let gt = read_ivecs(path)?;
            if gt.cols() == 0 || gt.rows() != queries.rows() {
                return Err(Error::Config(format!(
                    "ground truth must have one row per query ({} x >=1, got {} x {})",
                    queries.rows(),
                    gt.rows(),
                    gt.cols()
                )));
            }
            Some((0..gt.rows()).map(|r| gt.row(r)[0] as usize).collect())
        }
        None => {
            if base.rows() > EXACT_NEIGHBOR_CAP {
                return Err(Error::Config(format!(
                    "base has {} vectors; exact neighbors are computed internally only up \
                     to {EXACT_NEIGHBOR_CAP}. Supply --gt.",
                    base.rows()
                )));
            }
            None
        }
    };

    let mut cfg = TrainerConfig::new(
        args.d,
        args.centroids,
        args.outer,
        args.rotation.to_mode(args.seed),
        args.seed,
    );
    cfg.inner_steps = args.inner;
    cfg.lr = args.lr;
    let mut trainer = Trainer::new(&base, cfg)?;
    trainer.run()?;
    let rotation = trainer.rotation().clone();
    let cb = trainer.codebook();

    let recall = match &truth {
        Some(ids) => adc_eval_with_truth(&queries, &base, &rotation, cb, args.k, ids)?,
        None => adc_eval(&queries, &base, &rotation, cb, args.k)?,
    };
    let br = base.matmul(&rotation)?;
    let mean_distortion = distortion(&br, &quantize(&br, cb)?)?;
    println!("recall@{}={}", args.k, recall);
    println!("distortion={mean_distortion}");
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Error> {
    if let Some(qpath) = &args.queries_out {
        let (base, queries) =
            gen_synthetic_split(args.m, args.q, args.n, args.anisotropy, args.seed)?;
        write_fvecs(&args.out, &base)?;
        write_fvecs(qpath, &queries)?;
        println!("wrote {} base and {} query vectors", base.rows(), queries.rows());
    } else {
        let base = gen_synthetic(args.m, args.n, args.anisotropy, args.seed)?;
        write_fvecs(&args.out, &base)?;
        println!("wrote {} base vectors", base.rows());
    }
    Ok(())
}
