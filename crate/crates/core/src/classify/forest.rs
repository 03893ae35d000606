//! Random forest of CART trees with Gini impurity, trained one-vs-rest.
//!
//! Each head is a binary forest separating one class from the other two. A
//! head's score is the mean over trees of the positive-class fraction in the
//! leaf an input lands in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features examined per split; `None` means `ceil(sqrt(n_features))`.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    /// Worker threads for tree construction; results do not depend on it.
    pub threads: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: None,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: true,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// Weighted sample counts `[rest, class]`.
        counts: [f64; 2],
    },
    Split {
        feature: usize,
        /// Inputs with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
        weight: f64,
        /// Weighted Gini decrease `w_t g_t - w_l g_l - w_r g_r`.
        impurity_decrease: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(counts: [f64; 2]) -> Self {
        Tree {
            nodes: vec![Node::Leaf { counts }],
        }
    }

    fn leaf_for(&self, x: &FeatureVector) -> &[f64; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x.get(*feature) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Fraction of positive-class weight in the leaf reached by `x`.
    pub fn positive_fraction(&self, x: &FeatureVector) -> f64 {
        let c = self.leaf_for(x);
        let total = c[0] + c[1];
        if total > 0.0 {
            c[1] / total
        } else {
            0.0
        }
    }

    /// Total weight held by the leaves.
    pub fn leaf_weight(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Leaf { counts } => counts[0] + counts[1],
                _ => 0.0,
            })
            .sum()
    }

    pub fn root_weight(&self) -> f64 {
        match &self.nodes[0] {
            Node::Leaf { counts } => counts[0] + counts[1],
            Node::Split { weight, .. } => *weight,
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Per-feature impurity decrease normalized to sum to 1 (all zeros for a
    /// tree without splits).
    pub fn importances(&self, n_features: usize) -> Vec<f64> {
        let mut imp = vec![0.0; n_features];
        for node in &self.nodes {
            if let Node::Split {
                feature,
                impurity_decrease,
                ..
            } = node
            {
                if *feature < n_features {
                    imp[*feature] += impurity_decrease.max(0.0);
                }
            }
        }
        normalize(&mut imp);
        imp
    }
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryForest {
    pub trees: Vec<Tree>,
}

impl BinaryForest {
    pub fn score(&self, x: &FeatureVector) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.trees.iter().map(|t| t.positive_fraction(x)).sum::<f64>() / self.trees.len() as f64
    }

    /// Mean decrease in impurity, averaged over trees and normalized to 1.
    pub fn importances(&self, n_features: usize) -> Vec<f64> {
        let mut total = vec![0.0; n_features];
        for tree in &self.trees {
            for (t, v) in total.iter_mut().zip(tree.importances(n_features)) {
                *t += v;
            }
        }
        normalize(&mut total);
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    /// One binary forest per class, in label index order.
    pub heads: Vec<BinaryForest>,
}

impl RandomForest {
    pub fn scores(&self, x: &FeatureVector) -> [f64; 3] {
        [self.heads[0].score(x), self.heads[1].score(x), self.heads[2].score(x)]
    }

    pub fn fit(data: &Dataset, params: &ForestParams, seed: u64) -> Result<Self> {
        if params.n_trees == 0 {
            return Err(Error::Config("random forest needs at least one tree".into()));
        }
        let columns = Columns::build(data);
        let mtry = params
            .max_features
            .unwrap_or_else(|| (data.n_features as f64).sqrt().ceil() as usize)
            .clamp(1, data.n_features.max(1));
        let jobs: Vec<(usize, usize)> = (0..3)
            .flat_map(|h| (0..params.n_trees).map(move |t| (h, t)))
            .collect();
        let grow = |&(head, tree): &(usize, usize)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((head as u64) << 32) | tree as u64);
            let y: Vec<bool> = data.labels.iter().map(|l| l.index() == head).collect();
            TreeBuilder {
                data,
                columns: &columns,
                y: &y,
                mtry,
                params,
            }
            .grow(&mut rng)
        };
        let trees: Vec<Tree> = match params.threads {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::Training(format!("thread pool: {e}")))?;
                pool.install(|| jobs.par_iter().map(grow).collect())
            }
            None => jobs.par_iter().map(grow).collect(),
        };
        let mut heads = vec![BinaryForest { trees: Vec::new() }; 3];
        for ((head, _), tree) in jobs.iter().zip(trees) {
            heads[*head].trees.push(tree);
        }
        Ok(RandomForest { heads })
    }
}

/// Column-major view: for each feature, the rows where it is non-zero.
struct Columns {
    cols: Vec<Vec<(u32, f64)>>,
}

impl Columns {
    fn build(data: &Dataset) -> Self {
        let mut cols = vec![Vec::new(); data.n_features];
        for (r, row) in data.rows.iter().enumerate() {
            for (j, v) in row.iter() {
                if j < data.n_features {
                    cols[j].push((r as u32, v));
                }
            }
        }
        Columns { cols }
    }
}

struct TreeBuilder<'a> {
    data: &'a Dataset,
    columns: &'a Columns,
    y: &'a [bool],
    mtry: usize,
    params: &'a ForestParams,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn gini(c: [f64; 2]) -> f64 {
    let t = c[0] + c[1];
    if t <= 0.0 {
        return 0.0;
    }
    let p = c[1] / t;
    2.0 * p * (1.0 - p)
}

impl TreeBuilder<'_> {
    fn grow(&self, rng: &mut ChaCha8Rng) -> Tree {
        let n = self.data.rows.len();
        let mut weight = vec![0.0f64; n];
        if self.params.bootstrap {
            for _ in 0..n {
                weight[rng.gen_range(0..n)] += 1.0;
            }
        } else {
            weight.iter_mut().for_each(|w| *w = 1.0);
        }
        let root_rows: Vec<u32> = (0..n as u32).filter(|&r| weight[r as usize] > 0.0).collect();
        // node_of[r] marks which pending node a row currently belongs to
        let mut node_of = vec![u32::MAX; n];
        let mut nodes: Vec<Node> = Vec::new();
        let mut features: Vec<usize> = (0..self.data.n_features).collect();
        // (node slot, rows, depth)
        let mut stack: Vec<(usize, Vec<u32>, usize)> = vec![(0, root_rows, 0)];
        nodes.push(Node::Leaf { counts: [0.0; 2] });
        while let Some((slot, rows, depth)) = stack.pop() {
            let counts = self.class_counts(&rows, &weight);
            let node_weight = counts[0] + counts[1];
            let stop = gini(counts) == 0.0
                || self.params.max_depth.is_some_and(|m| depth >= m)
                || node_weight < 2.0 * self.params.min_samples_leaf as f64;
            let split = if stop {
                None
            } else {
                for &r in &rows {
                    node_of[r as usize] = slot as u32;
                }
                self.best_split(slot as u32, counts, &weight, &node_of, &mut features, rng)
            };
            let Some(cand) = split else {
                nodes[slot] = Node::Leaf { counts };
                continue;
            };
            let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows
                .iter()
                .partition(|&&r| self.data.rows[r as usize].get(cand.feature) <= cand.threshold);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { counts: [0.0; 2] });
            nodes.push(Node::Leaf { counts: [0.0; 2] });
            nodes[slot] = Node::Split {
                feature: cand.feature,
                threshold: cand.threshold,
                left,
                right,
                weight: node_weight,
                impurity_decrease: node_weight * gini(counts) - cand.score,
            };
            stack.push((right, right_rows, depth + 1));
            stack.push((left, left_rows, depth + 1));
        }
        Tree { nodes }
    }

    fn class_counts(&self, rows: &[u32], weight: &[f64]) -> [f64; 2] {
        let mut c = [0.0; 2];
        for &r in rows {
            c[self.y[r as usize] as usize] += weight[r as usize];
        }
        c
    }

    /// Samples features without replacement until `mtry` of them are
    /// non-constant on this node (or all features were tried), and returns the
    /// split minimizing the weighted child impurity.
    #[allow(clippy::too_many_arguments)]
    fn best_split(
        &self,
        slot: u32,
        counts: [f64; 2],
        weight: &[f64],
        node_of: &[u32],
        features: &mut [usize],
        rng: &mut ChaCha8Rng,
    ) -> Option<Candidate> {
        let min_leaf = self.params.min_samples_leaf as f64;
        let total = counts[0] + counts[1];
        let mut best: Option<Candidate> = None;
        let mut informative = 0usize;
        let mut values: Vec<(f64, f64, bool)> = Vec::new();
        let d = features.len();
        for k in 0..d {
            if informative >= self.mtry {
                break;
            }
            let pick = rng.gen_range(k..d);
            features.swap(k, pick);
            let f = features[k];

            values.clear();
            let mut nz = [0.0; 2];
            for &(r, v) in &self.columns.cols[f] {
                if node_of[r as usize] == slot && weight[r as usize] > 0.0 {
                    let yy = self.y[r as usize];
                    values.push((v, weight[r as usize], yy));
                    nz[yy as usize] += weight[r as usize];
                }
            }
            let zeros = [counts[0] - nz[0], counts[1] - nz[1]];
            if zeros[0] + zeros[1] > 1e-9 {
                values.push((0.0, zeros[0], false));
                values.push((0.0, zeros[1], true));
            }
            values.sort_by(|a, b| a.0.total_cmp(&b.0));
            if values.first().map(|v| v.0) == values.last().map(|v| v.0) {
                continue;
            }
            informative += 1;
            let mut left = [0.0; 2];
            let mut i = 0;
            while i < values.len() {
                let v = values[i].0;
                while i < values.len() && values[i].0 == v {
                    left[values[i].2 as usize] += values[i].1;
                    i += 1;
                }
                if i == values.len() {
                    break;
                }
                let right = [counts[0] - left[0], counts[1] - left[1]];
                let wl = left[0] + left[1];
                let wr = total - wl;
                if wl < min_leaf || wr < min_leaf {
                    continue;
                }
                let score = wl * gini(left) + wr * gini(right);
                if best.as_ref().map_or(true, |b| score < b.score - 1e-12) {
                    best = Some(Candidate {
                        feature: f,
                        threshold: 0.5 * (v + values[i].0),
                        score,
                    });
                }
            }
        }
        best
    }
}
