//! Brute-force oracles and data generators shared by the integration suites.
#![allow(dead_code)]

use chrono::{Duration, NaiveDate};
use sel_core::estimate::{fit_strengths, MatchRecord, StrengthTable};
use sel_core::explain::{partial_dependence, permutation_importance, ImportanceReport, PdpCurve};
use sel_core::extract::quantiles;
use sel_core::learn::{fit_gbt_traced, GbtParams, TreeNode};
use sel_core::nalgebra::DMatrix;
use sel_core::simbench::{
    fixture_eq2, generate_with_coefficients, instance_dataset, sel_feature, ModelKind, SimConfig,
    SEL_COLUMN,
};
use sel_core::{Column, Dataset, RngStream, SplitSpec};

/// Exhaustive CART reference: every (feature, midpoint) pair is scored by
/// recomputing both child sums of squares from scratch.
pub fn exhaustive_tree(
    columns: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    depth: usize,
    min_leaf: usize,
) -> TreeNode {
    let mean = |idx: &[usize]| idx.iter().map(|&r| y[r]).sum::<f64>() / idx.len() as f64;
    let sse = |idx: &[usize]| {
        let m = mean(idx);
        idx.iter().map(|&r| (y[r] - m).powi(2)).sum::<f64>()
    };
    let leaf = TreeNode::Leaf { value: mean(rows) };
    if depth == 0 || rows.len() < 2 * min_leaf {
        return leaf;
    }
    let parent = sse(rows);
    let floor = 1e-12 * rows.iter().map(|&r| y[r] * y[r]).sum::<f64>();
    let mut best: Option<(f64, usize, f64)> = None;
    for (f, column) in columns.iter().enumerate() {
        let mut values: Vec<f64> = rows.iter().map(|&r| column[r]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let t = pair[0] + 0.5 * (pair[1] - pair[0]);
            let (left, right): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| column[r] <= t);
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let gain = parent - sse(&left) - sse(&right);
            if gain > floor && best.is_none_or(|(g, _, _)| gain > g * (1.0 + 1e-12)) {
                best = Some((gain, f, t));
            }
        }
    }
    match best {
        None => leaf,
        Some((_, feature, threshold)) => {
            let (left, right): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&r| columns[feature][r] <= threshold);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(exhaustive_tree(columns, y, &left, depth - 1, min_leaf)),
                right: Box::new(exhaustive_tree(columns, y, &right, depth - 1, min_leaf)),
            }
        }
    }
}

/// Structural equality with numeric slack on thresholds and leaf values.
pub fn trees_match(a: &TreeNode, b: &TreeNode, tol: f64) -> bool {
    match (a, b) {
        (TreeNode::Leaf { value: x }, TreeNode::Leaf { value: y }) => (x - y).abs() <= tol,
        (
            TreeNode::Split {
                feature: fa,
                threshold: ta,
                left: la,
                right: ra,
            },
            TreeNode::Split {
                feature: fb,
                threshold: tb,
                left: lb,
                right: rb,
            },
        ) => {
            fa == fb
                && (ta - tb).abs() <= tol
                && trees_match(la, lb, tol)
                && trees_match(ra, rb, tol)
        }
        _ => false,
    }
}

/// Random instance with `n ≤ 50`, `p ≤ 4`, continuous features.
pub fn random_tree_instance(seed: u64) -> (Dataset, Vec<Vec<f64>>, Vec<f64>, usize, usize) {
    let mut rng = RngStream::new(seed, 0);
    let n = 6 + rng.below(45);
    let p = 1 + rng.below(4);
    let depth = 1 + rng.below(2);
    let min_leaf = 1 + rng.below(3);
    let columns: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.uniform_range(-3.0, 3.0)).collect())
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| columns[0][i].signum() * 2.0 + rng.standard_normal())
        .collect();
    let mut cols: Vec<Column> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| Column::raw(format!("x{j}"), c.clone()))
        .collect();
    cols.push(Column::raw("y", y.clone()));
    (
        Dataset::new(cols, "y").unwrap(),
        columns,
        y,
        depth,
        min_leaf,
    )
}

/// Cauchy log-likelihood up to the constant `−m·ln π`.
fn cauchy_ll(zs: &[f64], mu: f64, gamma: f64) -> f64 {
    zs.iter()
        .map(|z| gamma.ln() - (gamma * gamma + (z - mu).powi(2)).ln())
        .sum()
}

/// Coordinate-wise grid search at resolution `1e-4`: alternately scan
/// `μ` and `γ` over windows of ±1 and ±0.5 around the current point until
/// neither moves.
pub fn cauchy_grid_oracle(zs: &[f64]) -> (f64, f64) {
    let q = quantiles(zs, &[0.25, 0.5, 0.75]).unwrap();
    let step = 1e-4;
    let mut mu = (q[1] / step).round() * step;
    let mut gamma = (((q[2] - q[0]) / 2.0) / step).round().max(1.0) * step;
    for _ in 0..50 {
        let (old_mu, old_gamma) = (mu, gamma);
        let centre = mu;
        mu = (-10_000..=10_000)
            .map(|k| centre + k as f64 * step)
            .max_by(|a, b| cauchy_ll(zs, *a, gamma).total_cmp(&cauchy_ll(zs, *b, gamma)))
            .unwrap();
        let centre = gamma;
        gamma = (-5_000..=5_000)
            .map(|k| centre + k as f64 * step)
            .filter(|g| *g > 0.0)
            .max_by(|a, b| cauchy_ll(zs, mu, *a).total_cmp(&cauchy_ll(zs, mu, *b)))
            .unwrap();
        if mu == old_mu && gamma == old_gamma {
            break;
        }
    }
    (mu, gamma)
}

/// Knuth's multiplication method; fine for the small rates used here.
pub fn sample_poisson(rng: &mut RngStream, lambda: f64) -> u32 {
    let limit = (-lambda).exp();
    let mut k = 0;
    let mut prod = rng.uniform();
    while prod > limit {
        k += 1;
        prod *= rng.uniform();
    }
    k
}

pub struct StrengthTruth {
    pub teams: Vec<String>,
    pub strengths: Vec<f64>,
    pub intercept: f64,
    pub home: f64,
}

/// `n_matches` fixtures between random pairs of `n_teams` teams, one per day,
/// with goals drawn from the independent Poisson model.
pub fn synthetic_league(
    n_teams: usize,
    n_matches: usize,
    intercept: f64,
    home: f64,
    seed: u64,
) -> (Vec<MatchRecord>, StrengthTruth) {
    let mut rng = RngStream::new(seed, 0);
    let teams: Vec<String> = (0..n_teams).map(|i| format!("team{i:02}")).collect();
    let mut strengths: Vec<f64> = (0..n_teams).map(|_| 0.4 * rng.standard_normal()).collect();
    let centre = strengths.iter().sum::<f64>() / n_teams as f64;
    strengths.iter_mut().for_each(|r| *r -= centre);
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let matches = (0..n_matches)
        .map(|k| {
            let i = rng.below(n_teams);
            let j = (i + 1 + rng.below(n_teams - 1)) % n_teams;
            let lh = (intercept + strengths[i] - strengths[j] + home).exp();
            let la = (intercept + strengths[j] - strengths[i]).exp();
            MatchRecord::new(
                start + Duration::days(k as i64),
                &teams[i],
                &teams[j],
                sample_poisson(&mut rng, lh),
                sample_poisson(&mut rng, la),
            )
            .unwrap()
        })
        .collect();
    (
        matches,
        StrengthTruth {
            teams,
            strengths,
            intercept,
            home,
        },
    )
}

pub fn fit_league(matches: &[MatchRecord]) -> StrengthTable {
    let reference = matches.iter().map(|m| m.date).max().unwrap();
    fit_strengths(matches, reference, 500.0).unwrap()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub struct Endogenous {
    pub y: Vec<f64>,
    pub x: DMatrix<f64>,
    pub z: Vec<f64>,
    pub w: DMatrix<f64>,
    pub beta_z: f64,
}

/// `y = 1 + 2x + β_z·z + ε` where `z = w + u` and `ε = u + e`, so `z` is
/// correlated with the error while `w` is not.
pub fn endogenous_sample(n: usize, seed: u64) -> Endogenous {
    let mut rng = RngStream::new(seed, 0);
    let beta_z = 3.0;
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi = rng.standard_normal();
        let wi = rng.standard_normal();
        let u = rng.standard_normal();
        let e = rng.standard_normal();
        let zi = wi + u;
        x.push(xi);
        w.push(wi);
        z.push(zi);
        y.push(1.0 + 2.0 * xi + beta_z * zi + u + e);
    }
    Endogenous {
        y,
        x: DMatrix::from_column_slice(n, 1, &x),
        z,
        w: DMatrix::from_column_slice(n, 1, &w),
        beta_z,
    }
}

/// Boosted model on the fixed-coefficient design with the MLE location as
/// the SEL column, explained on its held-out rows.
pub struct FixtureRun {
    pub importance: ImportanceReport,
    pub pdp: PdpCurve,
}

pub fn fixture_run(seed: u64) -> FixtureRun {
    let cfg = SimConfig::default();
    let mut rng = RngStream::new(seed, 0);
    let inst = generate_with_coefficients(&cfg, &fixture_eq2(), &mut rng).unwrap();
    let ds = instance_dataset(&inst, sel_feature(&inst, ModelKind::SelMle).unwrap()).unwrap();
    let split = SplitSpec {
        train_fraction: cfg.train_fraction,
        shuffle_seed: rng.next_u64(),
    };
    let (train_rows, test_rows) = split.partition(ds.n_rows()).unwrap();
    let train = ds.select_rows(&train_rows).unwrap();
    let test = ds.select_rows(&test_rows).unwrap();
    let (model, _) = fit_gbt_traced(
        &train,
        &GbtParams {
            seed,
            ..GbtParams::default()
        },
    )
    .unwrap();
    FixtureRun {
        importance: permutation_importance(&model, &test, 10, seed).unwrap(),
        pdp: partial_dependence(&model, &test, SEL_COLUMN, 50).unwrap(),
    }
}

/// Both ends of the curve sit above the value nearest `x = 0`.
pub fn is_u_shaped(curve: &PdpCurve) -> bool {
    let mid = curve.values[curve.nearest(0.0)];
    curve.values[0] > mid && curve.values[curve.values.len() - 1] > mid
}

/// Columns `1..=k` of the 8×8 Sylvester–Hadamard matrix, each scaled by
/// `scales[j]`: centred and mutually orthogonal.
pub fn orthogonal_design(scales: &[f64]) -> Vec<Vec<f64>> {
    assert!(scales.len() <= 7);
    scales
        .iter()
        .enumerate()
        .map(|(j, s)| {
            (0..8u32)
                .map(|i| {
                    if (i & (j as u32 + 1)).count_ones().is_multiple_of(2) {
                        *s
                    } else {
                        -s
                    }
                })
                .collect()
        })
        .collect()
}
