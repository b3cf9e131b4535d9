//! Exact greedy CART regression trees.
//!
//! Trees are grown level by level. Each feature is sorted once up front; at
//! every level a single pass over each sorted column evaluates every
//! candidate split of every open node, so a level costs `O(n·p)`. Rows carry
//! integer multiplicities, which is how bootstrap resamples are represented.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
    },
}

impl TreeNode {
    /// Rows with `x[feature] <= threshold` go left.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Same as [`predict_row`](Self::predict_row) for feature-major storage.
    pub(crate) fn predict_column_major(&self, columns: &[Vec<f64>], row: usize) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if columns[*feature][row] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn uses_feature(&self, f: usize) -> bool {
        match self {
            TreeNode::Leaf { .. } => false,
            TreeNode::Split {
                feature,
                left,
                right,
                ..
            } => *feature == f || left.uses_feature(f) || right.uses_feature(f),
        }
    }
}

/// Feature-major copy of the predictors with per-feature sort orders.
#[derive(Debug, Clone)]
pub(crate) struct FeatureMatrix {
    pub columns: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl FeatureMatrix {
    pub fn new(columns: Vec<Vec<f64>>) -> Self {
        let order = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Self { columns, order }
    }

    pub fn from_dataset(ds: &Dataset, features: &[String]) -> Result<Self> {
        Ok(Self::new(
            features
                .iter()
                .map(|f| ds.frame().values(f).map(<[f64]>::to_vec))
                .collect::<Result<_>>()?,
        ))
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features examined per split; `None` means all.
    pub mtry: Option<usize>,
}

/// Gains at or below this fraction of the node's `Σ w·y²` are treated as noise.
pub(crate) const MIN_RELATIVE_GAIN: f64 = 1e-12;

/// Gains within this relative distance of the incumbent count as ties, so
/// equivalent partitions reached through different summation orders keep the
/// lowest feature index.
pub(crate) const TIE_TOLERANCE: f64 = 1e-12;

const NO_NODE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

enum ArenaNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

struct NodeStats {
    count: f64,
    sum: f64,
    sum_sq: f64,
}

pub(crate) fn split_threshold(lo: f64, hi: f64) -> f64 {
    let mid = lo + 0.5 * (hi - lo);
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Grows one tree on `targets` with row multiplicities `weights`.
pub(crate) fn grow(
    matrix: &FeatureMatrix,
    targets: &[f64],
    weights: &[f64],
    params: GrowParams,
    mut rng: Option<&mut RngStream>,
) -> TreeNode {
    let n = matrix.n_rows();
    let p = matrix.n_features();
    let min_leaf = params.min_leaf.max(1) as f64;

    let mut node_of: Vec<u32> = weights
        .iter()
        .map(|&w| if w > 0.0 { 0 } else { NO_NODE })
        .collect();
    let mut arena: Vec<ArenaNode> = vec![ArenaNode::Leaf(0.0)];
    let mut frontier: Vec<usize> = vec![0];

    for depth in 0..=params.max_depth {
        // Sufficient statistics of each frontier node.
        let mut stats: Vec<NodeStats> = Vec::with_capacity(frontier.len());
        let mut slot = vec![NO_NODE; arena.len()];
        for (s, &node) in frontier.iter().enumerate() {
            slot[node] = s as u32;
            stats.push(NodeStats {
                count: 0.0,
                sum: 0.0,
                sum_sq: 0.0,
            });
        }
        for r in 0..n {
            let node = node_of[r];
            if node == NO_NODE {
                continue;
            }
            let s = &mut stats[slot[node as usize] as usize];
            let w = weights[r];
            s.count += w;
            s.sum += w * targets[r];
            s.sum_sq += w * targets[r] * targets[r];
        }
        for (s, &node) in frontier.iter().enumerate() {
            arena[node] = ArenaNode::Leaf(stats[s].sum / stats[s].count);
        }
        if depth == params.max_depth {
            break;
        }

        let splittable: Vec<bool> = stats.iter().map(|s| s.count >= 2.0 * min_leaf).collect();
        if !splittable.iter().any(|&b| b) {
            break;
        }
        let allowed: Vec<Option<Vec<bool>>> = match (params.mtry, rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < p => splittable
                .iter()
                .map(|&ok| {
                    ok.then(|| {
                        let mut pool: Vec<usize> = (0..p).collect();
                        for i in 0..m {
                            let j = i + rng.below(p - i);
                            pool.swap(i, j);
                        }
                        let mut mask = vec![false; p];
                        for &f in &pool[..m] {
                            mask[f] = true;
                        }
                        mask
                    })
                })
                .collect(),
            _ => vec![None; frontier.len()],
        };

        let mut best: Vec<Option<Best>> = vec![None; frontier.len()];
        let mut left_count = vec![0.0; frontier.len()];
        let mut left_sum = vec![0.0; frontier.len()];
        let mut last_value = vec![f64::NAN; frontier.len()];
        for f in 0..p {
            left_count.fill(0.0);
            left_sum.fill(0.0);
            let column = &matrix.columns[f];
            for &r in &matrix.order[f] {
                let r = r as usize;
                let node = node_of[r];
                if node == NO_NODE {
                    continue;
                }
                let s = slot[node as usize] as usize;
                if !splittable[s] || allowed[s].as_ref().is_some_and(|mask| !mask[f]) {
                    continue;
                }
                let v = column[r];
                let lc = left_count[s];
                if lc > 0.0 && v > last_value[s] {
                    let st = &stats[s];
                    let rc = st.count - lc;
                    if lc >= min_leaf && rc >= min_leaf {
                        let ls = left_sum[s];
                        let rs = st.sum - ls;
                        let gain = ls * ls / lc + rs * rs / rc - st.sum * st.sum / st.count;
                        let floor = MIN_RELATIVE_GAIN * st.sum_sq;
                        if gain > floor
                            && best[s].is_none_or(|b| gain > b.gain * (1.0 + TIE_TOLERANCE))
                        {
                            best[s] = Some(Best {
                                gain,
                                feature: f,
                                threshold: split_threshold(last_value[s], v),
                            });
                        }
                    }
                }
                left_count[s] += weights[r];
                left_sum[s] += weights[r] * targets[r];
                last_value[s] = v;
            }
        }

        let mut next_frontier = Vec::new();
        let mut children = vec![(NO_NODE, NO_NODE); frontier.len()];
        for (s, &node) in frontier.iter().enumerate() {
            if let Some(b) = best[s] {
                let left = arena.len();
                arena.push(ArenaNode::Leaf(0.0));
                arena.push(ArenaNode::Leaf(0.0));
                arena[node] = ArenaNode::Split {
                    feature: b.feature,
                    threshold: b.threshold,
                    left,
                    right: left + 1,
                };
                children[s] = (left as u32, left as u32 + 1);
                next_frontier.extend([left, left + 1]);
            }
        }
        if next_frontier.is_empty() {
            break;
        }
        for (r, node) in node_of.iter_mut().enumerate() {
            if *node == NO_NODE {
                continue;
            }
            let s = slot[*node as usize] as usize;
            match (best[s], children[s]) {
                (Some(b), (l, rgt)) => {
                    *node = if matrix.columns[b.feature][r] <= b.threshold {
                        l
                    } else {
                        rgt
                    };
                }
                _ => *node = NO_NODE,
            }
        }
        frontier = next_frontier;
    }

    fn build(arena: &[ArenaNode], i: usize) -> TreeNode {
        match arena[i] {
            ArenaNode::Leaf(value) => TreeNode::Leaf { value },
            ArenaNode::Split {
                feature,
                threshold,
                left,
                right,
            } => TreeNode::Split {
                feature,
                threshold,
                left: Box::new(build(arena, left)),
                right: Box::new(build(arena, right)),
            },
        }
    }
    build(&arena, 0)
}

/// A single tree together with the names of the columns it indexes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub feature_names: Vec<String>,
    pub root: TreeNode,
}

/// Squared-error CART on every non-target column of `ds`.
///
/// Ties in gain (to a relative `1e-12`) keep the lowest feature index, then
/// the lowest threshold.
pub fn fit_tree(ds: &Dataset, max_depth: usize, min_leaf: usize) -> Result<RegressionTree> {
    let min_leaf = min_leaf.max(1);
    if ds.n_rows() < 2 * min_leaf {
        return Err(Error::TooFewRows {
            required: 2 * min_leaf,
            actual: ds.n_rows(),
        });
    }
    let feature_names = ds.feature_names();
    let matrix = FeatureMatrix::from_dataset(ds, &feature_names)?;
    let weights = vec![1.0; ds.n_rows()];
    let root = grow(
        &matrix,
        ds.target_values(),
        &weights,
        GrowParams {
            max_depth,
            min_leaf,
            mtry: None,
        },
        None,
    );
    Ok(RegressionTree {
        feature_names,
        root,
    })
}
