use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use handcraft_bench::config::{DatasetSpec, RunConfig};
use handcraft_bench::datasets::{load_csv, Schema};
use handcraft_bench::grid::{features_for, prepare};
use handcraft_bench::report::{emit_report, ALL_FORMATS};
use handcraft_bench::{model_io, run_grid, synth, visualize};
use handcraft_core::features::{FeatureMethod, FeatureParams};

#[derive(Parser)]
#[command(name = "handcraft", version, about = "Handcrafted-feature digit recognition benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV; replaces the datasets named in the config.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Row layout of --dataset.
    #[arg(long, value_parser = parse_schema)]
    schema: Option<Schema>,
    /// Split seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add a raw-pixel baseline column.
    #[arg(long)]
    raw_baseline: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Digits,
    Squares,
}

#[derive(Subcommand)]
enum Command {
    /// Run the feature x classifier grid and write reports.
    Bench(RunFlags),
    /// Extract and cache feature matrices without training.
    Extract {
        #[command(flatten)]
        run: RunFlags,
        /// Cache directory (default: <out>/cache or run.cache_dir).
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Dump original, preprocessed and feature-space images as PGM.
    Visualize {
        /// Image file (PNG, JPEG, BMP, PGM).
        #[arg(long, conflicts_with = "dataset")]
        image: Option<PathBuf>,
        /// Dataset CSV to take the image from.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Row of --dataset (0-based sample index).
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_parser = parse_schema, default_value = "label_first")]
        schema: Schema,
        /// Image side length in --dataset.
        #[arg(long, default_value_t = 28)]
        side: usize,
        /// hog, lbp, gabor or raw.
        #[arg(long, default_value = "hog")]
        method: String,
        /// Config file supplying preprocessing and extractor parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "visualize")]
        out: PathBuf,
    },
    /// Print a summary of a saved model file.
    InspectModel { path: PathBuf },
    /// Write a synthetic dataset CSV.
    Synth {
        #[arg(long, value_enum, default_value = "digits")]
        kind: SynthKind,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_schema(s: &str) -> Result<Schema, String> {
    s.parse()
}

fn run_config(flags: &RunFlags) -> anyhow::Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &flags.dataset {
        let name = path.file_stem().map_or("dataset".into(), |s| s.to_string_lossy().into_owned());
        let mut spec = DatasetSpec::new(name, path.clone());
        if let Some(schema) = flags.schema {
            spec.schema = schema;
        }
        cfg.datasets = vec![spec];
    } else if let Some(schema) = flags.schema {
        cfg.datasets.iter_mut().for_each(|d| d.schema = schema);
    }
    if let Some(seed) = flags.seed {
        cfg.split.seed = seed;
    }
    if let Some(jobs) = flags.jobs {
        cfg.jobs = jobs;
    }
    if let Some(out) = &flags.out {
        cfg.out = out.clone();
    }
    cfg.include_raw_baseline |= flags.raw_baseline;
    cfg.validate()?;
    Ok(cfg)
}

fn bench(flags: &RunFlags) -> anyhow::Result<bool> {
    let cfg = run_config(flags)?;
    let res = run_grid(&cfg)?;
    for c in &res.cells {
        match &c.outcome {
            Ok(m) => eprintln!("{} {}+{}: {:.2}%", c.dataset, c.feature, c.classifier, 100.0 * m.report.accuracy),
            Err(e) => eprintln!("{} {}+{}: FAILED: {e}", c.dataset, c.feature, c.classifier),
        }
    }
    let written = emit_report(&res, &cfg.out, ALL_FORMATS)?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(res.all_succeeded())
}

fn extract(flags: &RunFlags, cache_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let mut cfg = run_config(flags)?;
    cfg.cache_dir = cache_dir.or(cfg.cache_dir.take()).or_else(|| Some(cfg.out.join("cache")));
    let dir = cfg.cache_dir.clone().expect("set above");
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.effective_jobs()).build()?;
    pool.install(|| -> anyhow::Result<()> {
        for spec in &cfg.datasets {
            let data = prepare(spec, &cfg, &mut Vec::new()).with_context(|| format!("dataset {}", spec.name))?;
            for params in cfg.grid_features() {
                let ds = features_for(&data, &params, &cfg)?;
                println!("{} {}: {} x {} cached in {}", spec.name, params.method(), ds.len(), ds.dim(), dir.display());
            }
        }
        Ok(())
    })
}

fn feature_params(method: &str, cfg: &RunConfig) -> anyhow::Result<FeatureParams> {
    let method: FeatureMethod = method.parse()?;
    Ok(cfg
        .features
        .iter()
        .copied()
        .find(|f| f.method() == method)
        .unwrap_or_else(|| FeatureParams::defaults(method)))
}

#[allow(clippy::too_many_arguments)]
fn visualize_cmd(
    image: Option<&Path>,
    dataset: Option<&Path>,
    index: usize,
    schema: Schema,
    side: usize,
    method: &str,
    config: Option<&Path>,
    out: &Path,
) -> anyhow::Result<()> {
    let cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let img = match (image, dataset) {
        (Some(path), _) => visualize::load_image(path)?,
        (None, Some(path)) => {
            let set = load_csv(path, schema, side)?;
            match set.images.into_iter().nth(index) {
                Some(img) => img,
                None => bail!("{} has no sample {index}", path.display()),
            }
        }
        (None, None) => bail!("pass --image or --dataset"),
    };
    for p in visualize::visualize(&img, &cfg.preprocess, &feature_params(method, &cfg)?, out)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(flags) => bench(&flags),
        Command::Extract { run, cache_dir } => extract(&run, cache_dir).map(|_| true),
        Command::Visualize { image, dataset, index, schema, side, method, config, out } => visualize_cmd(
            image.as_deref(),
            dataset.as_deref(),
            index,
            schema,
            side,
            &method,
            config.as_deref(),
            &out,
        )
        .map(|_| true),
        Command::InspectModel { path } => model_io::load(&path).map(|m| {
            print!("{}", model_io::summary(&m));
            true
        }).map_err(Into::into),
        Command::Synth { kind, n, seed, out } => {
            let set = match kind {
                SynthKind::Digits => synth::digits(n, seed),
                SynthKind::Squares => synth::squares(n, seed),
            };
            synth::write_csv(&out, &set).map(|_| {
                println!("{} ({} samples, sha256 {})", out.display(), set.len(), set.source.digest);
                true
            }).map_err(Into::into)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            // Library errors already embed their source text; skip repeats.
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let text = cause.to_string();
                if !msg.contains(&text) {
                    msg = format!("{msg}: {text}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
