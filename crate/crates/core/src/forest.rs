//! CART classification trees (gini) and a bagged random forest.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data_model::{FeatureMatrix, NUM_CLASSES};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, seeded};

const GAIN_EPS: f64 = 1e-12;

/// `1 − Σ p²` over the class frequencies of `labels`.
pub fn gini(labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(invalid("gini of an empty node"));
    }
    let mut counts = [0usize; NUM_CLASSES];
    for &l in labels {
        if l >= NUM_CLASSES {
            return Err(invalid(format!("class label {l} outside 0..{NUM_CLASSES}")));
        }
        counts[l] += 1;
    }
    Ok(gini_counts(&counts, labels.len()))
}

fn gini_counts(counts: &[usize; NUM_CLASSES], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Flat node record; children are indices into [`DecisionTree::nodes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize, gain: f64, depth: usize },
    Leaf { counts: [usize; NUM_CLASSES], depth: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Root is node 0.
    pub nodes: Vec<TreeNode>,
    pub n_features: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` is unlimited.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
    pub seed: u64,
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [usize],
    params: TreeParams,
    rng: rand_chacha::ChaCha8Rng,
    nodes: Vec<TreeNode>,
}

#[derive(Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> [usize; NUM_CLASSES] {
        let mut counts = [0usize; NUM_CLASSES];
        for &r in rows {
            counts[self.y[r]] += 1;
        }
        counts
    }

    fn best_on(&self, rows: &[usize], features: &[usize], parent: f64, best: &mut Option<Candidate>) {
        let n = rows.len();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut sorted = rows.to_vec();
        for &f in features {
            let col = self.x.values.column(f);
            sorted.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            let mut left = [0usize; NUM_CLASSES];
            let mut right = self.counts(rows);
            for k in 0..n - 1 {
                let label = self.y[sorted[k]];
                left[label] += 1;
                right[label] -= 1;
                let (nl, nr) = (k + 1, n - k - 1);
                let (a, b) = (col[sorted[k]], col[sorted[k + 1]]);
                if a == b || nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let weighted = (nl as f64 * gini_counts(&left, nl) + nr as f64 * gini_counts(&right, nr)) / n as f64;
                let gain = parent - weighted;
                if gain <= GAIN_EPS {
                    continue;
                }
                let threshold = a + (b - a) / 2.0;
                let better = match best {
                    None => true,
                    Some(cur) => {
                        gain > cur.gain + GAIN_EPS
                            || ((gain - cur.gain).abs() <= GAIN_EPS
                                && (f < cur.feature || (f == cur.feature && threshold < cur.threshold)))
                    }
                };
                if better {
                    *best = Some(Candidate { feature: f, threshold, gain });
                }
            }
        }
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        let n = rows.len();
        let impurity = gini_counts(&counts, n);
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { counts, depth });
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if !depth_ok || impurity <= 0.0 || n < 2 * self.params.min_samples_leaf.max(1) {
            return id;
        }
        let d = self.x.n_cols();
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(&mut self.rng);
        let mtry = self.params.max_features.unwrap_or(d).clamp(1, d);
        let (head, tail) = order.split_at(mtry);
        let mut head = head.to_vec();
        head.sort_unstable();
        let mut best = None;
        self.best_on(&rows, &head, impurity, &mut best);
        if best.is_none() && !tail.is_empty() {
            // no usable split among the sampled features: widen the search
            let mut tail = tail.to_vec();
            tail.sort_unstable();
            self.best_on(&rows, &tail, impurity, &mut best);
        }
        let Some(split) = best else { return id };
        debug_assert!(split.gain > 0.0);
        let col = self.x.values.column(split.feature);
        let (l_rows, r_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| col[r] <= split.threshold);
        let left = self.build(l_rows, depth + 1);
        let right = self.build(r_rows, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            gain: split.gain,
            depth,
        };
        id
    }
}

/// Greedy best-gini-decrease tree over the rows `rows` of `x`.
pub fn tree_fit_rows(x: &FeatureMatrix, y: &[usize], rows: Vec<usize>, params: TreeParams) -> Result<DecisionTree> {
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.n_rows(), found: y.len() });
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= NUM_CLASSES) {
        return Err(invalid(format!("class label {bad} outside 0..{NUM_CLASSES}")));
    }
    if rows.is_empty() || rows.len() < params.min_samples_leaf {
        return Err(invalid(format!(
            "need at least min_samples_leaf = {} rows, got {}",
            params.min_samples_leaf,
            rows.len()
        )));
    }
    let mut builder = Builder { x, y, params, rng: seeded(params.seed), nodes: Vec::new() };
    builder.build(rows, 0);
    Ok(DecisionTree { nodes: builder.nodes, n_features: x.n_cols() })
}

pub fn tree_fit(x: &FeatureMatrix, y: &[usize], params: TreeParams) -> Result<DecisionTree> {
    tree_fit_rows(x, y, (0..y.len()).collect(), params)
}

impl DecisionTree {
    fn leaf_counts(&self, row: ndarray::ArrayView1<f64>) -> &[usize; NUM_CLASSES] {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                TreeNode::Split { feature, threshold, left, right, .. } => {
                    node = if row[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { counts, .. } => return counts,
            }
        }
    }

    pub fn predict_row(&self, row: ndarray::ArrayView1<f64>) -> usize {
        argmax_counts(self.leaf_counts(row))
    }

    pub fn proba_row(&self, row: ndarray::ArrayView1<f64>) -> [f64; NUM_CLASSES] {
        let counts = self.leaf_counts(row);
        let total: usize = counts.iter().sum();
        let mut p = [0.0; NUM_CLASSES];
        for (slot, &c) in p.iter_mut().zip(counts) {
            *slot = c as f64 / total as f64;
        }
        p
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<usize> {
        x.values.rows().into_iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn depth(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                TreeNode::Split { depth, .. } | TreeNode::Leaf { depth, .. } => *depth,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &[usize; NUM_CLASSES]> {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Leaf { counts, .. } => Some(counts),
            TreeNode::Split { .. } => None,
        })
    }
}

fn argmax_counts<T: PartialOrd + Copy>(counts: &[T]) -> usize {
    let mut best = 0;
    for (j, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = j;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// `None` means `⌈√d⌉`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 105, max_depth: Some(47), min_samples_leaf: 10, max_features: None, bootstrap: true, seed: 0 }
    }
}

impl ForestParams {
    /// Single unbounded tree on all rows and features: fits any data set of
    /// distinct rows exactly.
    pub fn memorize(seed: u64) -> Self {
        ForestParams { n_trees: 1, max_depth: None, min_samples_leaf: 1, max_features: Some(usize::MAX), bootstrap: false, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub params: ForestParams,
    pub trees: Vec<DecisionTree>,
}

pub fn forest_fit(x: &FeatureMatrix, y: &[usize], params: &ForestParams) -> Result<RandomForest> {
    if params.n_trees == 0 {
        return Err(invalid("a forest needs at least one tree"));
    }
    let m = y.len();
    if m == 0 {
        return Err(invalid("cannot fit a forest on zero rows"));
    }
    let d = x.n_cols();
    let max_features = params.max_features.unwrap_or_else(|| (d as f64).sqrt().ceil() as usize).clamp(1, d.max(1));
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let tree_seed = derive_seed(params.seed, t as u64);
            let rows: Vec<usize> = if params.bootstrap {
                let mut rng = seeded(derive_seed(tree_seed, u64::MAX));
                (0..m).map(|_| rng.random_range(0..m)).collect()
            } else {
                (0..m).collect()
            };
            let tree_params = TreeParams {
                max_depth: params.max_depth,
                min_samples_leaf: params.min_samples_leaf,
                max_features: Some(max_features),
                seed: tree_seed,
            };
            tree_fit_rows(x, y, rows, tree_params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomForest { params: *params, trees })
}

impl RandomForest {
    fn check(&self, x: &FeatureMatrix) -> Result<()> {
        let d = self.trees[0].n_features;
        if x.n_cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: x.n_cols() });
        }
        Ok(())
    }

    /// Mean of per-tree leaf class frequencies.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<ndarray::Array2<f64>> {
        self.check(x)?;
        let mut out = ndarray::Array2::zeros((x.n_rows(), NUM_CLASSES));
        for (i, row) in x.values.rows().into_iter().enumerate() {
            for tree in &self.trees {
                for (k, p) in tree.proba_row(row).into_iter().enumerate() {
                    out[[i, k]] += p;
                }
            }
        }
        out /= self.trees.len() as f64;
        Ok(out)
    }

    /// Majority vote of the trees; ties go to the lowest class.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        self.check(x)?;
        Ok(x.values
            .rows()
            .into_iter()
            .map(|row| {
                let mut votes = [0usize; NUM_CLASSES];
                for tree in &self.trees {
                    votes[tree.predict_row(row)] += 1;
                }
                argmax_counts(&votes)
            })
            .collect())
    }
}

pub fn forest_predict(model: &RandomForest, x: &FeatureMatrix) -> Result<Vec<usize>> {
    model.predict(x)
}

pub fn forest_predict_proba(model: &RandomForest, x: &FeatureMatrix) -> Result<ndarray::Array2<f64>> {
    model.predict_proba(x)
}
