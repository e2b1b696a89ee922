//! Gradient-boosted regression trees, grown level-wise on pre-sorted features.
//!
//! Stagewise additive fit to negative gradients with Newton leaf values:
//! squared loss for regression, logistic loss for binary targets. No row or
//! feature subsampling, so a fit is fully deterministic.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::sigmoid;

const PROB_CLAMP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Squared,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig { n_trees: 100, max_depth: 6, learning_rate: 0.3, min_leaf: 5 }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::BadConfig("n_trees must be >= 1".into()));
        }
        if self.max_depth < 1 {
            return Err(Error::BadConfig("max_depth must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::BadConfig("learning_rate must be in (0,1]".into()));
        }
        if self.min_leaf < 1 {
            return Err(Error::BadConfig("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Node {
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
    Leaf { value: f64 },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict_row(&self, row: &[f64]) -> f64 {
        let mut id = 0usize;
        loop {
            match &self.nodes[id] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    id = if row[*feature] <= *threshold { *left as usize } else { *right as usize };
                }
            }
        }
    }
}

/// Fitted boosted ensemble.
#[derive(Debug, Clone)]
pub struct GbtModel {
    base_score: f64,
    trees: Vec<Tree>,
    loss: Loss,
    n_features: usize,
}

impl GbtModel {
    /// Raw additive score (log-odds under logistic loss).
    pub fn score_row(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let s = self.score_row(row);
        match self.loss {
            Loss::Squared => s,
            Loss::Logistic => sigmoid(s).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP),
        }
    }

    pub fn predict(&self, features: &Array2<f64>) -> Vec<f64> {
        assert_eq!(features.ncols(), self.n_features, "feature width mismatch");
        (0..features.nrows())
            .map(|i| self.predict_row(features.row(i).as_slice().unwrap()))
            .collect()
    }
}

struct NodeRun {
    g: f64,
    h: f64,
    count: usize,
    last_value: f64,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Fit a boosted ensemble. `targets` are real for squared loss and 0/1 for
/// logistic loss. Requires at least `2 * min_leaf` rows.
pub fn fit_gbt(
    features: &Array2<f64>,
    targets: &[f64],
    loss: Loss,
    config: &GbtConfig,
) -> Result<GbtModel> {
    config.validate()?;
    let n = features.nrows();
    let p = features.ncols();
    if targets.len() != n {
        return Err(Error::BadConfig(format!("{} targets for {} rows", targets.len(), n)));
    }
    if n < 2 * config.min_leaf {
        return Err(Error::BadConfig(format!(
            "need at least {} rows for min_leaf {}",
            2 * config.min_leaf,
            config.min_leaf
        )));
    }
    if loss == Loss::Logistic && targets.iter().any(|&y| y != 0.0 && y != 1.0) {
        return Err(Error::Degenerate("logistic loss needs 0/1 targets".into()));
    }

    // column storage and one global sort per feature
    let cols: Vec<Vec<f64>> =
        (0..p).map(|j| (0..n).map(|i| features[[i, j]]).collect()).collect();
    let sorted_idx: Vec<Vec<u32>> = cols
        .iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].partial_cmp(&col[b as usize]).unwrap());
            idx
        })
        .collect();

    let base_score = match loss {
        Loss::Squared => targets.iter().sum::<f64>() / n as f64,
        Loss::Logistic => {
            let pbar = (targets.iter().sum::<f64>() / n as f64)
                .clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            (pbar / (1.0 - pbar)).ln()
        }
    };

    let mut score = vec![base_score; n];
    let mut grad = vec![0.0; n]; // negative gradient (residual)
    let mut hess = vec![1.0; n];
    let mut trees = Vec::with_capacity(config.n_trees);

    for _ in 0..config.n_trees {
        match loss {
            Loss::Squared => {
                for i in 0..n {
                    grad[i] = targets[i] - score[i];
                }
            }
            Loss::Logistic => {
                for i in 0..n {
                    let pr = sigmoid(score[i]);
                    grad[i] = targets[i] - pr;
                    hess[i] = (pr * (1.0 - pr)).max(1e-12);
                }
            }
        }
        let tree = grow_tree(&cols, &sorted_idx, &grad, &hess, config);
        // update scores in place from the final node assignment
        for i in 0..n {
            score[i] += tree.0.predict_row_cached(tree.1[i]);
        }
        trees.push(tree.0.into_tree());
    }

    Ok(GbtModel { base_score, trees, loss, n_features: p })
}

/// Growth-time tree: keeps per-node leaf values addressable by node id.
struct GrowTree {
    nodes: Vec<Node>,
}

impl GrowTree {
    fn predict_row_cached(&self, node_id: u32) -> f64 {
        match &self.nodes[node_id as usize] {
            Node::Leaf { value } => *value,
            Node::Split { .. } => unreachable!("rows always end at leaves"),
        }
    }

    fn into_tree(self) -> Tree {
        Tree { nodes: self.nodes }
    }
}

fn grow_tree(
    cols: &[Vec<f64>],
    sorted_idx: &[Vec<u32>],
    grad: &[f64],
    hess: &[f64],
    config: &GbtConfig,
) -> (GrowTree, Vec<u32>) {
    let n = grad.len();
    let p = cols.len();
    let mut nodes: Vec<Node> = vec![Node::Leaf { value: 0.0 }];
    let mut node_of: Vec<u32> = vec![0; n];
    let mut active: Vec<u32> = vec![0];

    for _depth in 0..config.max_depth {
        if active.is_empty() {
            break;
        }
        // slot lookup for the active level
        let mut slot_of = vec![u32::MAX; nodes.len()];
        for (s, &nd) in active.iter().enumerate() {
            slot_of[nd as usize] = s as u32;
        }
        // parent totals per slot
        let mut tot = vec![(0.0f64, 0.0f64, 0usize); active.len()];
        for i in 0..n {
            let s = slot_of[node_of[i] as usize];
            if s != u32::MAX {
                let t = &mut tot[s as usize];
                t.0 += grad[i];
                t.1 += hess[i];
                t.2 += 1;
            }
        }
        let mut best: Vec<Option<BestSplit>> = (0..active.len()).map(|_| None).collect();

        for j in 0..p {
            let col = &cols[j];
            let mut run: Vec<NodeRun> = (0..active.len())
                .map(|_| NodeRun { g: 0.0, h: 0.0, count: 0, last_value: f64::NAN })
                .collect();
            for &iu in &sorted_idx[j] {
                let i = iu as usize;
                let s = slot_of[node_of[i] as usize];
                if s == u32::MAX {
                    continue;
                }
                let s = s as usize;
                let v = col[i];
                let r = &mut run[s];
                if r.count > 0 && v != r.last_value {
                    let (tg, th, tc) = tot[s];
                    let right_c = tc - r.count;
                    if r.count >= config.min_leaf && right_c >= config.min_leaf {
                        let right_g = tg - r.g;
                        let right_h = th - r.h;
                        let gain = r.g * r.g / (r.h + 1e-12)
                            + right_g * right_g / (right_h + 1e-12)
                            - tg * tg / (th + 1e-12);
                        let better = match &best[s] {
                            Some(b) => gain > b.gain,
                            None => gain > 1e-12,
                        };
                        if better {
                            best[s] =
                                Some(BestSplit { gain, feature: j, threshold: r.last_value });
                        }
                    }
                }
                r.g += grad[i];
                r.h += hess[i];
                r.count += 1;
                r.last_value = v;
            }
        }

        // materialize the chosen splits
        let mut next_active = Vec::new();
        let mut split_of: Vec<Option<(usize, f64, u32, u32)>> = vec![None; active.len()];
        for (s, &nd) in active.iter().enumerate() {
            if let Some(b) = &best[s] {
                let left = nodes.len() as u32;
                let right = left + 1;
                nodes.push(Node::Leaf { value: 0.0 });
                nodes.push(Node::Leaf { value: 0.0 });
                nodes[nd as usize] = Node::Split {
                    feature: b.feature,
                    threshold: b.threshold,
                    left,
                    right,
                };
                split_of[s] = Some((b.feature, b.threshold, left, right));
                next_active.push(left);
                next_active.push(right);
            }
        }
        if next_active.is_empty() {
            break;
        }
        for i in 0..n {
            let s = slot_of[node_of[i] as usize];
            if s == u32::MAX {
                continue;
            }
            if let Some((feat, thr, left, right)) = split_of[s as usize] {
                node_of[i] = if cols[feat][i] <= thr { left } else { right };
            }
        }
        active = next_active;
    }

    // Newton leaf values, scaled by the learning rate
    let mut leaf_g = vec![0.0f64; nodes.len()];
    let mut leaf_h = vec![0.0f64; nodes.len()];
    for i in 0..n {
        leaf_g[node_of[i] as usize] += grad[i];
        leaf_h[node_of[i] as usize] += hess[i];
    }
    for (id, node) in nodes.iter_mut().enumerate() {
        if let Node::Leaf { value } = node {
            *value = config.learning_rate * leaf_g[id] / (leaf_h[id] + 1e-12);
        }
    }

    (GrowTree { nodes }, node_of)
}
