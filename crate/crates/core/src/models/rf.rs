//! Random forest of CART trees grown to purity on bootstrap samples.
//!
//! Each node evaluates floor(sqrt(d)) randomly drawn candidate features and
//! splits on the Gini-optimal midpoint. Per-tree seeds are derived from the
//! forest seed up front, so growing trees in parallel gives exactly the
//! sequential result.

use super::{closed_majority, ModelError};
use crate::domain::ZoneStatus;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomForestParams {
    pub n_trees: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: ZoneStatus,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> ZoneStatus {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return *label,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<Tree>,
    n_features: usize,
    /// Per-feature impurity decrease summed over each tree's nodes
    /// (weighted by node sample fraction), averaged over trees.
    importances: Vec<f64>,
}

impl RandomForest {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[ZoneStatus],
        params: &RandomForestParams,
        seed: u64,
    ) -> Result<Self, ModelError> {
        if x.is_empty() {
            return Err(ModelError::EmptyTrainSet);
        }
        let d = x[0].len();
        let max_features = ((d as f64).sqrt().floor() as usize).max(1);

        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let tree_seeds: Vec<u64> = (0..params.n_trees).map(|_| master.next_u64()).collect();

        let grown: Vec<(Tree, Vec<f64>)> = tree_seeds
            .par_iter()
            .map(|&tree_seed| grow_tree(x, y, d, max_features, tree_seed))
            .collect();

        let mut importances = vec![0.0; d];
        for (_, imp) in &grown {
            for (j, v) in imp.iter().enumerate() {
                importances[j] += v;
            }
        }
        for v in &mut importances {
            *v /= params.n_trees as f64;
        }

        Ok(RandomForest {
            trees: grown.into_iter().map(|(t, _)| t).collect(),
            n_features: d,
            importances,
        })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Mean impurity decrease per feature across the forest.
    pub fn feature_importances(&self) -> &[f64] {
        &self.importances
    }

    pub fn predict(&self, row: &[f64]) -> Result<ZoneStatus, ModelError> {
        Ok(self.predict_with_votes(row)?.0)
    }

    /// Majority vote over trees; returns the Closed vote count.
    pub fn predict_with_votes(&self, row: &[f64]) -> Result<(ZoneStatus, usize), ModelError> {
        if row.len() != self.n_features {
            return Err(ModelError::ArityMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        let closed = self.trees.iter().filter(|t| t.predict(row).is_closed()).count();
        Ok((closed_majority(closed, self.trees.len() - closed), closed))
    }
}

/// Grow one CART tree on a bootstrap sample; returns the tree and its
/// per-feature weighted impurity decreases.
fn grow_tree(
    x: &[Vec<f64>],
    y: &[ZoneStatus],
    d: usize,
    max_features: usize,
    seed: u64,
) -> (Tree, Vec<f64>) {
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();

    let mut tree = Tree { nodes: Vec::new() };
    let mut importances = vec![0.0; d];
    build_node(x, y, &sample, n, d, max_features, &mut rng, &mut tree, &mut importances);
    (tree, importances)
}

/// Recursively build the subtree over `indices`; returns its node id.
#[allow(clippy::too_many_arguments)]
fn build_node(
    x: &[Vec<f64>],
    y: &[ZoneStatus],
    indices: &[usize],
    n_root: usize,
    d: usize,
    max_features: usize,
    rng: &mut ChaCha8Rng,
    tree: &mut Tree,
    importances: &mut [f64],
) -> usize {
    let closed = indices.iter().filter(|&&i| y[i].is_closed()).count();
    let open = indices.len() - closed;

    if closed == 0 || open == 0 {
        let id = tree.nodes.len();
        tree.nodes.push(Node::Leaf { label: closed_majority(closed, open) });
        return id;
    }

    // Candidate features: max_features random draws first, then the rest in
    // random order as fallback so an impure node only becomes a leaf when no
    // feature can split it (identical rows with conflicting labels).
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);

    let parent_gini = gini(closed, open);
    let mut best: Option<(f64, usize, f64)> = None; // (weighted child impurity, feature, threshold)
    let mut evaluated = 0usize;
    for &feature in &order {
        if evaluated >= max_features && best.is_some() {
            break;
        }
        if let Some((impurity, threshold)) = best_split_on(x, y, indices, feature) {
            evaluated += 1;
            let better = match best {
                None => true,
                Some((b, _, _)) => impurity < b - 1e-15,
            };
            if better {
                best = Some((impurity, feature, threshold));
            }
        }
    }

    let Some((child_impurity, feature, threshold)) = best else {
        // No feature separates the rows; majority leaf with the Closed tie-break.
        let id = tree.nodes.len();
        tree.nodes.push(Node::Leaf { label: closed_majority(closed, open) });
        return id;
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
        indices.iter().partition(|&&i| x[i][feature] <= threshold);

    importances[feature] +=
        indices.len() as f64 / n_root as f64 * (parent_gini - child_impurity);

    let id = tree.nodes.len();
    tree.nodes.push(Node::Leaf { label: ZoneStatus::Open }); // placeholder
    let left = build_node(x, y, &left_idx, n_root, d, max_features, rng, tree, importances);
    let right = build_node(x, y, &right_idx, n_root, d, max_features, rng, tree, importances);
    tree.nodes[id] = Node::Split { feature, threshold, left, right };
    id
}

/// Best midpoint split of `indices` on one feature, by weighted child Gini.
/// Returns None when the feature is constant over the node.
fn best_split_on(
    x: &[Vec<f64>],
    y: &[ZoneStatus],
    indices: &[usize],
    feature: usize,
) -> Option<(f64, f64)> {
    let mut vals: Vec<(f64, bool)> =
        indices.iter().map(|&i| (x[i][feature], y[i].is_closed())).collect();
    vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

    let n = vals.len();
    let total_closed = vals.iter().filter(|(_, c)| *c).count();
    let mut left_closed = 0usize;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n - 1 {
        if vals[i].1 {
            left_closed += 1;
        }
        if vals[i].0 == vals[i + 1].0 {
            continue;
        }
        let n_left = i + 1;
        let n_right = n - n_left;
        let right_closed = total_closed - left_closed;
        let weighted = (n_left as f64 * gini(left_closed, n_left - left_closed)
            + n_right as f64 * gini(right_closed, n_right - right_closed))
            / n as f64;
        let threshold = (vals[i].0 + vals[i + 1].0) / 2.0;
        let better = match best {
            None => true,
            Some((b, _)) => weighted < b - 1e-15,
        };
        if better {
            best = Some((weighted, threshold));
        }
    }
    best
}

fn gini(closed: usize, open: usize) -> f64 {
    let n = (closed + open) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let pc = closed as f64 / n;
    let po = open as f64 / n;
    1.0 - pc * pc - po * po
}
