use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use imbalab::eval::{evaluate_grid, DEFAULT_FOLDS};
use imbalab::experiments::{self, ExperimentConfig, ExperimentId};
use imbalab::learners::LearnerKind;
use imbalab::output::{write_atomic, write_json};
use imbalab::profile::profile_dataset;
use imbalab::resample::{apply_method, MethodId};
use imbalab::selector::select;
use imbalab::synth::{generate, GenMeta, GenSpec, DEFAULT_DIM, DEFAULT_N_TOTAL};
use imbalab::{Dataset, Error, RngSeed};

#[derive(Parser)]
#[command(name = "imbalab", version, about = "Controlled experiments on resampling for imbalanced classification")]
struct Cli {
    /// Worker threads; affects speed only.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and its metadata sidecar.
    Generate {
        #[arg(long)]
        ir: f64,
        #[arg(long)]
        sep: f64,
        #[arg(long, default_value_t = 1)]
        clusters: usize,
        #[arg(long, default_value_t = DEFAULT_N_TOTAL)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_DIM)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Imbalance ratio, separability and minority cluster estimate.
    Profile(DataArgs),
    /// Apply one resampling method to a dataset.
    Resample {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        method: MethodId,
    },
    /// Cross-validated comparison of methods against the baseline.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',', default_value = "SMOTE")]
        methods: Vec<MethodId>,
        #[arg(long, value_delimiter = ',', default_value = "LOGISTIC,TREE")]
        learners: Vec<LearnerKind>,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
    },
    /// Recommend a resampling strategy from the data profile.
    Select(DataArgs),
    /// Run a controlled experiment.
    Experiment {
        #[arg(long)]
        name: Option<ExperimentId>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replaces the configured seed list with this single root seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Results directory; without it the headline JSON goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DataArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => write_atomic(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, text.as_bytes())
}

fn load(path: &Path) -> anyhow::Result<Dataset> {
    Dataset::load(path).with_context(|| format!("reading {}", path.display()))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    out.with_file_name(format!("{stem}.meta.json"))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Generate { ir, sep, clusters, n, dim, seed, out } => {
            let spec = GenSpec { n_total: n, dim, ..GenSpec::new(ir, sep, clusters, RngSeed::new(seed)) };
            let outcome = generate(&spec)?;
            emit(Some(&out), outcome.dataset.to_csv_string().as_bytes())?;
            write_json(&sidecar_path(&out), &GenMeta::new(&spec, &outcome))?;
        }
        Command::Profile(a) => {
            let data = load(&a.input)?;
            emit_json(a.out.as_deref(), &profile_dataset(&data, RngSeed::new(a.seed))?)?;
        }
        Command::Resample { data: a, method } => {
            let data = load(&a.input)?;
            let out = apply_method(method, &data, RngSeed::new(a.seed))?;
            emit(a.out.as_deref(), out.to_csv_string().as_bytes())?;
        }
        Command::Evaluate { data: a, methods, learners, folds } => {
            let data = load(&a.input)?;
            let report = evaluate_grid(&data, &methods, &learners, folds, RngSeed::new(a.seed))?;
            emit_json(a.out.as_deref(), &report)?;
        }
        Command::Select(a) => {
            let data = load(&a.input)?;
            let profile = profile_dataset(&data, RngSeed::new(a.seed))?;
            emit_json(a.out.as_deref(), &select(&profile))?;
        }
        Command::Experiment { name, config, seed, out } => {
            let mut cfg = match &config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    serde_json::from_str::<ExperimentConfig>(&text)
                        .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?
                }
                None => ExperimentConfig::default(),
            };
            match (name, &config) {
                (Some(n), _) => cfg.experiment = n,
                (None, None) => return Err(Error::InvalidArgument("--name or --config is required".into()).into()),
                (None, Some(_)) => {}
            }
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            let real = cfg
                .datasets
                .iter()
                .map(|p| {
                    let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset").to_string();
                    Ok((name, load(p)?))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let result = experiments::run(&cfg, &real)?;
            match out {
                Some(dir) => experiments::write_outputs(&dir, &cfg, &result)?,
                None => emit_json(None, &result)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(2, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
