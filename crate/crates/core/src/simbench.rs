//! Monte Carlo comparison of a baseline learner against learners given a
//! statistically estimated covariate.
//!
//! Each individual `i` has observed covariates `Xᵢ ~ N(0, I_p)` and a latent
//! location `μᵢ ~ N(0, 1)` that is only seen through a Cauchy process
//! `Zᵢ = (Z_{i,1}, …, Z_{i,m})` with location `μᵢ`. The response is
//! `yᵢ = β′Xᵢ + β_μ μᵢ² + εᵢ` with standard normal noise. Three boosted
//! models are compared on held-out RMSE: `X` alone, `X` plus the process
//! mean, and `X` plus the maximum-likelihood location.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::data::{Column, Dataset, Process, SelLevel, SplitSpec};
use crate::error::{Error, Result};
use crate::estimate::{cauchy_mle, empirical_mean_feature};
use crate::extract::moments::sorted_quantile;
use crate::learn::{fit_gbt_traced, rmse, GbtModel, GbtParams, Predictor};
use crate::rng::{sample_cauchy, RngStream};

pub const SEL_COLUMN: &str = "SEL";
pub const TARGET_COLUMN: &str = "y";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuDistribution {
    StandardNormal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    pub p_values: Vec<usize>,
    pub reps: usize,
    pub master_seed: u64,
    pub beta_range: (f64, f64),
    pub beta_mu_range: (f64, f64),
    pub mu_dist: MuDistribution,
    pub cauchy_scale: f64,
    pub train_fraction: f64,
    pub learner: GbtParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 1500,
            m: 400,
            p_values: vec![2, 5, 10, 20, 30],
            reps: 200,
            master_seed: 42,
            beta_range: (-2.0, 5.0),
            beta_mu_range: (1.0, 5.0),
            mu_dist: MuDistribution::StandardNormal,
            cauchy_scale: 1.0,
            train_fraction: 0.7,
            learner: GbtParams::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n < 10 {
            return bad(format!("n = {} < 10", self.n));
        }
        if self.m < 10 {
            return bad(format!("m = {} < 10", self.m));
        }
        if self.reps < 1 {
            return bad("reps must be at least 1".into());
        }
        if self.p_values.is_empty() || self.p_values.contains(&0) {
            return bad("p values must be non-empty and positive".into());
        }
        if self.beta_range.0 > self.beta_range.1 || self.beta_mu_range.0 > self.beta_mu_range.1 {
            return bad("coefficient ranges must be ordered".into());
        }
        if !(self.cauchy_scale > 0.0) {
            return Err(Error::NonPositiveScale(self.cauchy_scale));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train fraction {} outside (0, 1)",
                self.train_fraction
            ));
        }
        Ok(())
    }
}

/// Coefficients of the ten-covariate example with a strong squared-location
/// effect.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedCoefficients {
    pub beta: Vec<f64>,
    pub beta_mu: f64,
}

pub fn fixture_eq2() -> FixedCoefficients {
    FixedCoefficients {
        beta: vec![
            -1.04, -1.32, 4.50, -1.69, 0.53, 1.34, 3.35, 4.10, -0.99, 0.98,
        ],
        beta_mu: 4.50,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimInstance {
    /// Feature-major: `x[j][i]` is covariate `j` of individual `i`.
    pub x: Vec<Vec<f64>>,
    pub processes: Vec<Process>,
    pub mu_true: Vec<f64>,
    pub beta: Vec<f64>,
    pub beta_mu: f64,
    pub epsilon: Vec<f64>,
    pub y: Vec<f64>,
}

impl SimInstance {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    /// `y − Xβ − β_μ μ²`, which reproduces the stored noise.
    pub fn recovered_noise(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                let linear: f64 = self
                    .beta
                    .iter()
                    .zip(&self.x)
                    .map(|(b, col)| b * col[i])
                    .sum();
                self.y[i] - linear - self.beta_mu * self.mu_true[i] * self.mu_true[i]
            })
            .collect()
    }
}

/// Draws an instance with per-rep coefficients from the configured ranges.
pub fn generate_instance(cfg: &SimConfig, p: usize, rng: &mut RngStream) -> Result<SimInstance> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    let beta: Vec<f64> = (0..p)
        .map(|_| rng.uniform_range(cfg.beta_range.0, cfg.beta_range.1))
        .collect();
    let beta_mu = rng.uniform_range(cfg.beta_mu_range.0, cfg.beta_mu_range.1);
    generate_with_coefficients(cfg, &FixedCoefficients { beta, beta_mu }, rng)
}

/// Draws covariates, latent locations, processes and noise for fixed
/// coefficients, in that order.
pub fn generate_with_coefficients(
    cfg: &SimConfig,
    coefficients: &FixedCoefficients,
    rng: &mut RngStream,
) -> Result<SimInstance> {
    cfg.validate()?;
    let (n, p) = (cfg.n, coefficients.beta.len());
    let mut x = vec![vec![0.0; n]; p];
    for i in 0..n {
        for column in x.iter_mut() {
            column[i] = rng.standard_normal();
        }
    }
    let mu_true: Vec<f64> = match cfg.mu_dist {
        MuDistribution::StandardNormal => (0..n).map(|_| rng.standard_normal()).collect(),
    };
    let processes = mu_true
        .iter()
        .enumerate()
        .map(|(i, &mu)| Process::new(i, sample_cauchy(rng, cfg.m, mu, cfg.cauchy_scale)?))
        .collect::<Result<Vec<_>>>()?;
    let epsilon: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let y = (0..n)
        .map(|i| {
            let linear: f64 = coefficients
                .beta
                .iter()
                .zip(&x)
                .map(|(b, col)| b * col[i])
                .sum();
            linear + coefficients.beta_mu * mu_true[i] * mu_true[i] + epsilon[i]
        })
        .collect();
    Ok(SimInstance {
        x,
        processes,
        mu_true,
        beta: coefficients.beta.clone(),
        beta_mu: coefficients.beta_mu,
        epsilon,
        y,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Baseline,
    SelMoments,
    SelMle,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::Baseline,
        ModelKind::SelMoments,
        ModelKind::SelMle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Baseline => "Baseline",
            ModelKind::SelMoments => "SelMoments",
            ModelKind::SelMle => "SelMle",
        }
    }
}

/// Per-individual SEL covariate for `kind`; `None` for the baseline.
pub fn sel_feature(inst: &SimInstance, kind: ModelKind) -> Result<Option<Column>> {
    let values = match kind {
        ModelKind::Baseline => return Ok(None),
        ModelKind::SelMoments => inst
            .processes
            .iter()
            .map(|z| empirical_mean_feature(z.values()))
            .collect::<Result<Vec<_>>>()?,
        ModelKind::SelMle => inst
            .processes
            .iter()
            .map(|z| cauchy_mle(z.values()).map(|fit| fit.location))
            .collect::<Result<Vec<_>>>()?,
    };
    let level = if kind == ModelKind::SelMle {
        SelLevel::Estimated
    } else {
        SelLevel::Descriptive
    };
    Ok(Some(Column::new(SEL_COLUMN, values, level)))
}

/// `X0 … X{p−1}`, the optional SEL column, then the target `y`.
pub fn instance_dataset(inst: &SimInstance, sel: Option<Column>) -> Result<Dataset> {
    let mut columns: Vec<Column> = inst
        .x
        .iter()
        .enumerate()
        .map(|(j, col)| Column::raw(format!("X{j}"), col.clone()))
        .collect();
    columns.extend(sel);
    columns.push(Column::raw(TARGET_COLUMN, inst.y.clone()));
    Dataset::new(columns, TARGET_COLUMN)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepResult {
    pub rmse_baseline: f64,
    pub rmse_moments: f64,
    pub rmse_mle: f64,
}

impl RepResult {
    pub fn rmse(&self, kind: ModelKind) -> f64 {
        match kind {
            ModelKind::Baseline => self.rmse_baseline,
            ModelKind::SelMoments => self.rmse_moments,
            ModelKind::SelMle => self.rmse_mle,
        }
    }

    /// `100 · RMSE(kind) / RMSE(baseline)`; exactly 100 for the baseline.
    pub fn ratio(&self, kind: ModelKind) -> f64 {
        if kind == ModelKind::Baseline {
            100.0
        } else {
            100.0 * self.rmse(kind) / self.rmse_baseline
        }
    }
}

/// Trains a boosted model on the training rows and returns it with its test RMSE.
pub fn fit_and_score(
    ds: &Dataset,
    split: &SplitSpec,
    learner: &GbtParams,
) -> Result<(GbtModel, Dataset, f64)> {
    let (train_rows, test_rows) = split.partition(ds.n_rows())?;
    let train = ds.select_rows(&train_rows)?;
    let test = ds.select_rows(&test_rows)?;
    let (model, _) = fit_gbt_traced(&train, learner)?;
    let score = rmse(test.target_values(), &model.predict(&test)?)?;
    Ok((model, test, score))
}

/// Fits the three competing models on identical train rows.
pub fn run_rep(inst: &SimInstance, split: &SplitSpec, learner: &GbtParams) -> Result<RepResult> {
    let mut scores = [0.0; 3];
    for (slot, kind) in scores.iter_mut().zip(ModelKind::ALL) {
        let ds = instance_dataset(inst, sel_feature(inst, kind)?)?;
        *slot = fit_and_score(&ds, split, learner)?.2;
    }
    Ok(RepResult {
        rmse_baseline: scores[0],
        rmse_moments: scores[1],
        rmse_mle: scores[2],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub p: usize,
    pub model: ModelKind,
    pub mean_ratio: f64,
    pub p5: f64,
    pub p95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<ReportRow>,
    /// Per-rep RMSEs for each `p`, in rep order.
    pub reps: Vec<(usize, Vec<RepResult>)>,
}

impl BenchmarkReport {
    pub fn row(&self, p: usize, model: ModelKind) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.p == p && r.model == model)
    }

    /// `n_cols,model,mean_ratio,p5,p95`
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "n_cols,model,mean_ratio,p5,p95")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.p,
                r.model.name(),
                r.mean_ratio,
                r.p5,
                r.p95
            )?;
        }
        out.flush()?;
        Ok(())
    }

    /// One row per `p` in the plot-data layout
    /// `n_cols,sel_mean,sel_p5,sel_p95,moments_mean,moments_p5,moments_p95,vanilla`.
    pub fn write_wide_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(
            out,
            "n_cols,sel_mean,sel_p5,sel_p95,moments_mean,moments_p5,moments_p95,vanilla"
        )?;
        for (p, _) in &self.reps {
            let sel = self.row(*p, ModelKind::SelMle).expect("row per p");
            let mom = self.row(*p, ModelKind::SelMoments).expect("row per p");
            let base = self.row(*p, ModelKind::Baseline).expect("row per p");
            writeln!(
                out,
                "{p},{},{},{},{},{},{},{}",
                sel.mean_ratio, sel.p5, sel.p95, mom.mean_ratio, mom.p5, mom.p95, base.mean_ratio
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs one rep: instance from stream `(master_seed, rep)`, then a split
/// seeded from the same stream.
pub fn run_single(cfg: &SimConfig, p: usize, rep: usize) -> Result<RepResult> {
    let mut rng = RngStream::new(cfg.master_seed, rep as u64);
    let inst = generate_instance(cfg, p, &mut rng)?;
    let split = SplitSpec {
        train_fraction: cfg.train_fraction,
        shuffle_seed: rng.next_u64(),
    };
    run_rep(&inst, &split, &cfg.learner)
}

fn summarize(p: usize, results: &[RepResult]) -> Vec<ReportRow> {
    ModelKind::ALL
        .iter()
        .map(|&model| {
            let mut ratios: Vec<f64> = results.iter().map(|r| r.ratio(model)).collect();
            ratios.sort_by(f64::total_cmp);
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            ReportRow {
                p,
                model,
                mean_ratio: mean,
                p5: sorted_quantile(&ratios, 0.05),
                p95: sorted_quantile(&ratios, 0.95),
            }
        })
        .collect()
}

/// Relative-RMSE summaries for every configured `p`, single-threaded.
pub fn run_benchmark(cfg: &SimConfig) -> Result<BenchmarkReport> {
    run_benchmark_parallel(cfg, 1)
}

/// As [`run_benchmark`], spreading reps over `threads` workers. Output does
/// not depend on `threads`.
pub fn run_benchmark_parallel(cfg: &SimConfig, threads: usize) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rows = Vec::new();
    let mut reps = Vec::new();
    for &p in &cfg.p_values {
        let results: Vec<RepResult> = pool.install(|| {
            (0..cfg.reps)
                .into_par_iter()
                .map(|rep| run_single(cfg, p, rep))
                .collect::<Result<Vec<_>>>()
        })?;
        rows.extend(summarize(p, &results));
        reps.push((p, results));
    }
    Ok(BenchmarkReport { rows, reps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            n: 120,
            m: 40,
            p_values: vec![2],
            reps: 2,
            learner: GbtParams {
                n_trees: 20,
                ..GbtParams::default()
            },
            ..SimConfig::default()
        }
    }

    #[test]
    fn defaults() {
        let cfg = SimConfig::default();
        assert_eq!((cfg.n, cfg.m), (1500, 400));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn fixture_coefficients() {
        let f = fixture_eq2();
        assert_eq!(f.beta.len(), 10);
        assert_eq!(
            f.beta,
            vec![-1.04, -1.32, 4.50, -1.69, 0.53, 1.34, 3.35, 4.10, -0.99, 0.98]
        );
        assert_eq!(f.beta_mu, 4.50);
    }

    #[test]
    fn instance_is_deterministic_and_consistent() {
        let cfg = small();
        let a = generate_instance(&cfg, 3, &mut RngStream::new(1, 2)).unwrap();
        let b = generate_instance(&cfg, 3, &mut RngStream::new(1, 2)).unwrap();
        assert_eq!(a, b);
        for (e, r) in a.epsilon.iter().zip(a.recovered_noise()) {
            assert!((e - r).abs() < 1e-10);
        }
        assert_eq!(a.processes.len(), cfg.n);
        assert!(a.processes.iter().all(|z| z.len() == cfg.m));
    }

    #[test]
    fn zero_beta_mu_removes_location_effect() {
        let cfg = SimConfig {
            beta_mu_range: (0.0, 0.0),
            ..small()
        };
        let inst = generate_instance(&cfg, 2, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(inst.beta_mu, 0.0);
        let linear: Vec<f64> = (0..inst.n())
            .map(|i| inst.beta[0] * inst.x[0][i] + inst.beta[1] * inst.x[1][i] + inst.epsilon[i])
            .collect();
        assert_eq!(linear, inst.y);
    }

    #[test]
    fn single_rep_band_collapses() {
        let cfg = SimConfig { reps: 1, ..small() };
        let report = run_benchmark(&cfg).unwrap();
        for row in &report.rows {
            assert_eq!(row.p5, row.mean_ratio);
            assert_eq!(row.p95, row.mean_ratio);
        }
        let base = report.row(2, ModelKind::Baseline).unwrap();
        assert_eq!((base.mean_ratio, base.p5, base.p95), (100.0, 100.0, 100.0));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let cfg = small();
        assert_eq!(
            run_benchmark_parallel(&cfg, 1).unwrap(),
            run_benchmark_parallel(&cfg, 3).unwrap()
        );
    }
}
