use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use margot::dataset::gen_partitions;
use margot::margot::{dimensions, Variant};
use margot::runner::{
    cv_feature_driven, cv_standard, evaluate, plot_2d, preset_spec, train, write_csv,
    write_outputs, RunConfig, RunnerError, TrainOutcome,
};
use margot::tree::TreeClassifier;

const EXIT_FAILURE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_NO_INCUMBENT: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(name = "margot", version, about = "Margin optimal classification trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured time limit (seconds).
    #[arg(long)]
    time_limit: Option<f64>,
    /// Output directory; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one hyperparameter point.
    Train(RunArgs),
    /// Grid search by mean validation accuracy, then train.
    Cv(RunArgs),
    /// Grid search with the feature-driven rule, then train.
    CvFs(RunArgs),
    /// Evaluate a saved model on the configured dataset.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Report file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset as CSV.
    Synth {
        /// `4-partitions` or `6-partitions`; alternatively use --config.
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot a two-feature model over the configured dataset as SVG.
    Plot {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print model sizes for depth D, n features and |I| samples.
    Dims {
        depth: usize,
        features: usize,
        samples: usize,
        #[arg(long, value_enum, default_value = "margot")]
        variant: VariantArg,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    Margot,
    Hfs,
    Sfs,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Margot => Variant::Margot,
            VariantArg::Hfs => Variant::Hfs,
            VariantArg::Sfs => Variant::Sfs,
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>, time_limit: Option<f64>) -> Result<RunConfig, RunnerError> {
    let mut config = RunConfig::load(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(t) = time_limit {
        config.time_limit = t;
    }
    config.validate()?;
    Ok(config)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), RunnerError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_training(
    args: RunArgs,
    run: fn(&RunConfig) -> Result<TrainOutcome, RunnerError>,
) -> Result<u8, RunnerError> {
    let config = load_config(&args.config, args.seed, args.time_limit)?;
    let outcome = run(&config)?;
    match args.out.or_else(|| config.output_dir.clone()) {
        Some(dir) => {
            let data = config.load_dataset()?;
            for path in write_outputs(&outcome, Some(&data), &dir)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            for line in &outcome.search_log {
                eprintln!("{line}");
            }
            print!("{}", outcome.report.to_json()?);
        }
    }
    let r = &outcome.report;
    eprintln!(
        "{} {:?}: objective {} gap {} nodes {} time {:.1}s",
        r.variant,
        r.status,
        r.objective.map_or("-".into(), |v| format!("{v:.6}")),
        r.gap.map_or("-".into(), |v| format!("{v:.2e}")),
        r.nodes,
        r.wall_time
    );
    Ok(if outcome.is_infeasible() {
        EXIT_INFEASIBLE
    } else if outcome.is_limit_without_incumbent() {
        EXIT_NO_INCUMBENT
    } else {
        0
    })
}

fn run(cli: Cli) -> Result<u8, RunnerError> {
    match cli.command {
        Command::Train(args) => run_training(args, train),
        Command::Cv(args) => run_training(args, cv_standard),
        Command::CvFs(args) => run_training(args, cv_feature_driven),
        Command::Evaluate {
            config,
            model,
            seed,
            out,
        } => {
            let config = load_config(&config, seed, None)?;
            let clf = TreeClassifier::load(&model)?;
            emit(&evaluate(&config, &clf)?.to_json()?, out.as_deref())?;
            Ok(0)
        }
        Command::Synth {
            preset,
            config,
            seed,
            out,
        } => {
            let data = match (preset, config) {
                (Some(name), None) => gen_partitions(&preset_spec(&name)?, seed.unwrap_or(0))?,
                (None, Some(path)) => load_config(&path, seed, None)?.load_dataset()?,
                _ => {
                    return Err(RunnerError::Config(
                        "synth needs either a preset name or --config".into(),
                    ))
                }
            };
            match out {
                Some(path) => write_csv(&data, std::fs::File::create(path)?)?,
                None => write_csv(&data, std::io::stdout().lock())?,
            }
            Ok(0)
        }
        Command::Plot {
            config,
            model,
            seed,
            out,
        } => {
            let config = load_config(&config, seed, None)?;
            let clf = TreeClassifier::load(&model)?;
            let data = config.load_dataset()?;
            emit(&plot_2d(&clf, &data)?, out.as_deref())?;
            Ok(0)
        }
        Command::Dims {
            depth,
            features,
            samples,
            variant,
        } => {
            if !(1..=20).contains(&depth) || features == 0 || samples == 0 {
                return Err(RunnerError::Config(
                    "depth must lie in 1..=20 and counts must be positive".into(),
                ));
            }
            let d = dimensions(variant.into(), depth, features, samples);
            println!("continuous variables (w, b, xi, u)  {}", d.continuous_vars);
            println!("binary variables (z, s)             {}", d.binary_vars);
            println!("routing constraints                 {}", d.routing_rows);
            println!("margin constraints                  {}", d.margin_rows);
            println!("assignment constraints              {}", d.assignment_rows);
            if d.linking_rows > 0 {
                println!("linking constraints                 {}", d.linking_rows);
            }
            if d.budget_rows > 0 {
                println!("budget constraints                  {}", d.budget_rows);
            }
            if d.excess_rows > 0 {
                println!("excess constraints                  {}", d.excess_rows);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_FAILURE })
        }
    }
}
