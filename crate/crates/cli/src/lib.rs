//! The `sel` command-line tool.
//!
//! Exit status is 0 on success, 1 for domain errors and 2 for usage errors.
//! Every failure prints a single diagnostic line on stderr.

pub mod config;
pub mod pnm;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use sel_core::estimate::{fit_strengths, mean_goals_table, read_matches, DEFAULT_HALF_LIFE_DAYS};
use sel_core::explain::{partial_dependence, permutation_importance};
use sel_core::extract::{
    color_histogram, ewma, histogram_moments, moments, quantiles, tfidf, tokenize, window_to_alpha,
    MomentSummary,
};
use sel_core::learn::{
    fit_forest_with, fit_gbt_traced, fit_lasso, fit_tree, ForestParams, GbtParams, Model,
};
use sel_core::simbench::{run_benchmark_parallel, SimConfig};
use sel_core::{read_csv, read_frame, write_csv, write_table, Column, Predictor, SelLevel};
use thiserror::Error;

pub use pnm::{decode_pnm, encode_pnm, read_pnm, write_pnm, PnmError};

pub const LONG_REPORT: &str = "relative_rmse.csv";
pub const WIDE_REPORT: &str = "relative_rmse_wide.csv";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sel_core::Error),
    #[error(transparent)]
    Pnm(#[from] PnmError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "sel",
    version,
    about = "Statistically enhanced features, estimators and benchmarks",
    args_override_self = true,
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo comparison of baseline and SEL-augmented boosted models.
    Simulate(SimulateArgs),
    /// Append descriptive (level-2) feature columns.
    #[command(subcommand)]
    Extract(ExtractCommand),
    /// Team strengths from a match history.
    Strength(StrengthArgs),
    /// Fit a model and write it as JSON.
    Train(TrainArgs),
    /// Apply a saved model.
    Predict(PredictArgs),
    /// Permutation importance or partial dependence of a saved model.
    Explain(ExplainArgs),
}

#[derive(Debug, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1500)]
    pub n: usize,
    #[arg(long, default_value_t = 400)]
    pub m: usize,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,5,10,20,30")]
    pub p_values: Vec<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = -2.0)]
    pub beta_low: f64,
    #[arg(long, default_value_t = 5.0)]
    pub beta_high: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta_mu_low: f64,
    #[arg(long, default_value_t = 5.0)]
    pub beta_mu_high: f64,
    #[arg(long, default_value_t = 1.0)]
    pub cauchy_scale: f64,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 200)]
    pub n_trees: usize,
    #[arg(long, default_value_t = 3)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory receiving `relative_rmse.csv` and `relative_rmse_wide.csv`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct AppendArgs {
    /// Dataset to append the new columns to; without it only the new columns are written.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Target column of `--input`.
    #[arg(long, default_value = "y")]
    pub target: String,
    #[arg(long)]
    pub output: PathBuf,
    /// Prefix for the new column names.
    #[arg(long, default_value = "z")]
    pub prefix: String,
}

#[derive(Debug, Subcommand)]
pub enum ExtractCommand {
    /// Mean, variance, skewness and excess kurtosis of each process.
    Moments {
        /// Headerless CSV, one process per row.
        #[arg(long)]
        processes: PathBuf,
        #[command(flatten)]
        out: AppendArgs,
    },
    /// Linearly interpolated quantiles of each process.
    Quantiles {
        #[arg(long)]
        processes: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
        probs: Vec<f64>,
        #[command(flatten)]
        out: AppendArgs,
    },
    /// Final EWMA value of each process.
    Ewma {
        #[arg(long)]
        processes: PathBuf,
        /// Span in observations, mapped to alpha = 2 / (window + 1).
        #[arg(long, default_value_t = 7)]
        window: usize,
        #[command(flatten)]
        out: AppendArgs,
    },
    /// Moments of the colour histograms of PGM/PPM images.
    ImageMoments {
        #[arg(long, value_delimiter = ',', required = true)]
        images: Vec<PathBuf>,
        #[command(flatten)]
        out: AppendArgs,
    },
    /// TF-IDF weights of a text file holding one document per line.
    Tfidf {
        #[arg(long)]
        docs: PathBuf,
        #[command(flatten)]
        out: AppendArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrengthMethod {
    Mle,
    Mean,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct StrengthArgs {
    /// CSV with `date,home_team,away_team,home_goals,away_goals`.
    #[arg(long)]
    pub matches: PathBuf,
    #[arg(long, value_enum, default_value_t = StrengthMethod::Mle)]
    pub method: StrengthMethod,
    #[arg(long, default_value_t = DEFAULT_HALF_LIFE_DAYS)]
    pub half_life: f64,
    /// Defaults to the latest match date.
    #[arg(long)]
    pub reference_date: Option<NaiveDate>,
    /// Defaults to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Lasso,
    Tree,
    Forest,
    Gbt,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: ModelChoice,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "y")]
    pub target: String,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// Defaults: 3 for tree and gbt, 12 for forest.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Defaults: 1 for tree and gbt, 5 for forest.
    #[arg(long)]
    pub min_leaf: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub n_trees: usize,
    /// Defaults to ceil(p / 3).
    #[arg(long)]
    pub mtry: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExplainMethod {
    Permutation,
    Pdp,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ExplainArgs {
    #[arg(long, value_enum)]
    pub method: ExplainMethod,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "y")]
    pub target: String,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = sel_core::explain::DEFAULT_SHUFFLES)]
    pub shuffles: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Feature swept by `pdp`.
    #[arg(long)]
    pub feature: Option<String>,
    #[arg(long, default_value_t = sel_core::explain::DEFAULT_GRID_SIZE)]
    pub grid_size: usize,
}

/// Parses `argv` (including the program name) and runs it, returning the
/// process exit status.
pub fn run(argv: Vec<String>) -> i32 {
    let argv = match config::expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = e.print();
            } else {
                let rendered = e.to_string();
                eprintln!("{}", rendered.lines().next().unwrap_or("usage error"));
            }
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> CliResult {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Extract(cmd) => extract(cmd),
        Command::Strength(args) => strength(args),
        Command::Train(args) => train(args),
        Command::Predict(args) => predict(args),
        Command::Explain(args) => explain(args),
    }
}

fn simulate(args: SimulateArgs) -> CliResult {
    let cfg = SimConfig {
        n: args.n,
        m: args.m,
        p_values: args.p_values,
        reps: args.reps,
        master_seed: args.seed,
        beta_range: (args.beta_low, args.beta_high),
        beta_mu_range: (args.beta_mu_low, args.beta_mu_high),
        cauchy_scale: args.cauchy_scale,
        train_fraction: args.train_fraction,
        learner: GbtParams {
            n_trees: args.n_trees,
            max_depth: args.max_depth,
            learning_rate: args.learning_rate,
            seed: args.seed,
            ..GbtParams::default()
        },
        ..SimConfig::default()
    };
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let report = run_benchmark_parallel(&cfg, threads)?;
    std::fs::create_dir_all(&args.out_dir)?;
    report.write_csv(args.out_dir.join(LONG_REPORT))?;
    report.write_wide_csv(args.out_dir.join(WIDE_REPORT))?;
    Ok(())
}

fn read_processes(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    if !path.is_file() {
        return Err(sel_core::Error::MissingFile(path.to_path_buf()).into());
    }
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(j, cell)| {
                cell.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| sel_core::Error::ParseError {
                        row: i + 1,
                        col: j + 1,
                        message: format!("`{}` is not a finite number", cell.trim()),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        out.push(row);
    }
    Ok(out)
}

fn write_columns(columns: Vec<Column>, out: &AppendArgs) -> CliResult {
    match &out.input {
        Some(input) => {
            let mut ds = read_csv(input, &out.target)?;
            for column in columns {
                if column.values.len() != ds.n_rows() {
                    return Err(
                        sel_core::Error::LengthMismatch(column.values.len(), ds.n_rows()).into(),
                    );
                }
                ds = ds.with_column(column)?;
            }
            write_csv(&ds, &out.output)?;
        }
        None => {
            let names: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
            let values: Vec<&[f64]> = columns.iter().map(|c| c.values.as_slice()).collect();
            write_table(&names, &values, &out.output)?;
        }
    }
    Ok(())
}

fn moment_columns(prefix: &str, summaries: &[MomentSummary]) -> CliResult<Vec<Column>> {
    let mut mean = Vec::new();
    let mut variance = Vec::new();
    let mut skew = Vec::new();
    let mut kurt = Vec::new();
    for s in summaries {
        mean.push(s.mean);
        variance.push(s.variance);
        skew.push(s.skewness()?);
        kurt.push(s.excess_kurtosis()?);
    }
    Ok(vec![
        Column::new(format!("{prefix}_mean"), mean, SelLevel::Descriptive),
        Column::new(
            format!("{prefix}_variance"),
            variance,
            SelLevel::Descriptive,
        ),
        Column::new(format!("{prefix}_skewness"), skew, SelLevel::Descriptive),
        Column::new(format!("{prefix}_kurtosis"), kurt, SelLevel::Descriptive),
    ])
}

fn extract(cmd: ExtractCommand) -> CliResult {
    match cmd {
        ExtractCommand::Moments { processes, out } => {
            let summaries = read_processes(&processes)?
                .iter()
                .map(|z| moments(z))
                .collect::<Result<Vec<_>, _>>()?;
            write_columns(moment_columns(&out.prefix, &summaries)?, &out)
        }
        ExtractCommand::Quantiles {
            processes,
            probs,
            out,
        } => {
            let rows = read_processes(&processes)?
                .iter()
                .map(|z| quantiles(z, &probs))
                .collect::<Result<Vec<_>, _>>()?;
            let columns = probs
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    Column::new(
                        format!("{}_q{}", out.prefix, (p * 100.0).round()),
                        rows.iter().map(|r| r[k]).collect(),
                        SelLevel::Descriptive,
                    )
                })
                .collect();
            write_columns(columns, &out)
        }
        ExtractCommand::Ewma {
            processes,
            window,
            out,
        } => {
            let alpha = window_to_alpha(window)?;
            let values = read_processes(&processes)?
                .iter()
                .map(|z| ewma(z, alpha).map(|path| *path.last().expect("non-empty")))
                .collect::<Result<Vec<_>, _>>()?;
            write_columns(
                vec![Column::new(
                    format!("{}_ewma{window}", out.prefix),
                    values,
                    SelLevel::Estimated,
                )],
                &out,
            )
        }
        ExtractCommand::ImageMoments { images, out } => {
            let mut per_channel: BTreeMap<usize, (String, Vec<MomentSummary>)> = BTreeMap::new();
            let mut channels = None;
            for path in &images {
                let img = read_pnm(path)?;
                if *channels.get_or_insert(img.channels()) != img.channels() {
                    return Err(CliError::Usage(
                        "all images must share the same channel count".into(),
                    ));
                }
                for (c, hist) in color_histogram(&img)?.iter().enumerate() {
                    per_channel
                        .entry(c)
                        .or_insert_with(|| (hist.channel.name().to_string(), Vec::new()))
                        .1
                        .push(histogram_moments(hist)?);
                }
            }
            let mut columns = Vec::new();
            for (name, summaries) in per_channel.values() {
                columns.extend(moment_columns(
                    &format!("{}_{name}", out.prefix),
                    summaries,
                )?);
            }
            write_columns(columns, &out)
        }
        ExtractCommand::Tfidf { docs, out } => {
            if !docs.is_file() {
                return Err(sel_core::Error::MissingFile(docs).into());
            }
            let corpus: Vec<Vec<String>> = std::fs::read_to_string(&docs)?
                .lines()
                .map(tokenize)
                .collect();
            let m = tfidf(&corpus)?;
            let columns = m
                .vocabulary
                .iter()
                .enumerate()
                .map(|(j, term)| {
                    Column::new(
                        format!("{}_{term}", out.prefix),
                        m.rows.iter().map(|r| r[j]).collect(),
                        SelLevel::Descriptive,
                    )
                })
                .collect();
            write_columns(columns, &out)
        }
    }
}

fn strength(args: StrengthArgs) -> CliResult {
    let matches = read_matches(&args.matches)?;
    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "team,strength")?;
    match args.method {
        StrengthMethod::Mean => {
            for (team, value) in mean_goals_table(&matches)? {
                writeln!(out, "{team},{value}")?;
            }
        }
        StrengthMethod::Mle => {
            let reference = match args.reference_date {
                Some(d) => d,
                None => matches
                    .iter()
                    .map(|m| m.date)
                    .max()
                    .ok_or(sel_core::Error::EmptyInput)?,
            };
            let table = fit_strengths(&matches, reference, args.half_life)?;
            writeln!(out, "(intercept),{}", table.intercept)?;
            writeln!(out, "(home),{}", table.home_effect)?;
            for (team, value) in &table.strengths {
                writeln!(out, "{team},{value}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn train(args: TrainArgs) -> CliResult {
    let ds = read_csv(&args.input, &args.target)?;
    let p = ds.feature_names().len();
    let model = match args.model {
        ModelChoice::Lasso => Model::Lasso(fit_lasso(&ds, args.lambda)?),
        ModelChoice::Tree => Model::Tree(fit_tree(
            &ds,
            args.max_depth.unwrap_or(3),
            args.min_leaf.unwrap_or(1),
        )?),
        ModelChoice::Forest => {
            let defaults = ForestParams::defaults_for(p);
            Model::Forest(fit_forest_with(
                &ds,
                &ForestParams {
                    n_trees: args.n_trees,
                    mtry: args.mtry.unwrap_or(defaults.mtry),
                    max_depth: args.max_depth.unwrap_or(defaults.max_depth),
                    min_leaf: args.min_leaf.unwrap_or(defaults.min_leaf),
                    seed: args.seed,
                    bootstrap: true,
                },
            )?)
        }
        ModelChoice::Gbt => Model::Gbt(
            fit_gbt_traced(
                &ds,
                &GbtParams {
                    n_trees: args.n_trees,
                    max_depth: args.max_depth.unwrap_or(3),
                    learning_rate: args.learning_rate,
                    min_leaf: args.min_leaf.unwrap_or(1),
                    seed: args.seed,
                    ..GbtParams::default()
                },
            )?
            .0,
        ),
    };
    model.save(&args.output)?;
    Ok(())
}

fn predict(args: PredictArgs) -> CliResult {
    let model = Model::load(&args.model)?;
    let frame = read_frame(&args.input)?;
    let predictions = model.predict_frame(&frame)?;
    write_table(&["prediction"], &[&predictions], &args.output)?;
    Ok(())
}

fn explain(args: ExplainArgs) -> CliResult {
    let model = Model::load(&args.model)?;
    let ds = read_csv(&args.input, &args.target)?;
    match args.method {
        ExplainMethod::Permutation => {
            permutation_importance(&model, &ds, args.shuffles, args.seed)?
                .write_csv(&args.output)?
        }
        ExplainMethod::Pdp => {
            let feature = args
                .feature
                .ok_or_else(|| CliError::Usage("--feature is required for pdp".into()))?;
            partial_dependence(&model, &ds, &feature, args.grid_size)?.write_csv(&args.output)?
        }
    }
    Ok(())
}
