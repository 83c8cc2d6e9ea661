use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::split::scan_sorted;
use super::{ColumnData, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        default_left: bool,
    },
    Leaf {
        weight: f64,
    },
}

/// A regression tree stored as a node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(weight: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { weight }],
        }
    }

    /// Output for a row given a feature accessor.
    pub fn predict_with(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { weight } => return weight,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if value(feature) < threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.predict_with(|f| row[f])
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// The root split, if the tree has one.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split {
                feature, threshold, ..
            } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    /// Checks child indices, feature range, finiteness and acyclicity.
    pub fn check(&self, n_features: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if i >= self.nodes.len() {
                return Err(format!("child index {i} out of range"));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(format!("node {i} reachable twice"));
            }
            match self.nodes[i] {
                Node::Leaf { weight } if !weight.is_finite() => {
                    return Err(format!("leaf {i} has a non-finite weight"))
                }
                Node::Leaf { .. } => {}
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    if feature >= n_features {
                        return Err(format!("node {i} splits on feature {feature}"));
                    }
                    if !threshold.is_finite() {
                        return Err(format!("node {i} has a non-finite threshold"));
                    }
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("tree has unreachable nodes".into());
        }
        Ok(())
    }
}

/// Row indices of every column sorted by (value, row).
pub(crate) fn presort(data: &ColumnData) -> Vec<Vec<u32>> {
    data.columns
        .iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..data.n_rows as u32).collect();
            idx.sort_by(|&a, &b| {
                col[a as usize]
                    .total_cmp(&col[b as usize])
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect()
}

struct Grower<'a> {
    data: &'a ColumnData,
    grad: &'a [f64],
    hess: &'a [f64],
    features: &'a [usize],
    config: &'a TrainConfig,
    go_left: Vec<bool>,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn leaf_weight(&self, g: f64, h: f64) -> f64 {
        let denom = h + self.config.lambda;
        if denom > 0.0 {
            -self.config.learning_rate * g / denom
        } else {
            0.0
        }
    }

    /// `sorted[j]` holds this node's rows sorted by `features[j]`.
    fn grow(&mut self, sorted: Vec<Vec<u32>>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { weight: 0.0 });

        // totals in ascending row order so they do not depend on the feature sample
        let mut rows: Vec<u32> = sorted.first().cloned().unwrap_or_default();
        rows.sort_unstable();
        let g_total: f64 = rows.iter().map(|&r| self.grad[r as usize]).sum();
        let h_total: f64 = rows.iter().map(|&r| self.hess[r as usize]).sum();

        let mut best: Option<(usize, f64, f64)> = None;
        if depth < self.config.max_depth && rows.len() >= 2 {
            for (j, &f) in self.features.iter().enumerate() {
                let col = &self.data.columns[f];
                let it = sorted[j].iter().map(|&r| {
                    let r = r as usize;
                    (col[r], self.grad[r], self.hess[r])
                });
                let prior = best.map(|(_, t, gain)| (t, gain));
                let found = scan_sorted(
                    it,
                    g_total,
                    h_total,
                    self.config.lambda,
                    self.config.gamma,
                    prior,
                );
                if let Some((t, gain)) = found {
                    if best.map_or(true, |(_, _, b)| gain > b) {
                        best = Some((j, t, gain));
                    }
                }
            }
        }

        match best {
            Some((j, threshold, gain)) if gain > 0.0 => {
                let feature = self.features[j];
                let col = &self.data.columns[feature];
                for &r in &rows {
                    self.go_left[r as usize] = col[r as usize] < threshold;
                }
                let mut left_lists = Vec::with_capacity(sorted.len());
                let mut right_lists = Vec::with_capacity(sorted.len());
                for list in sorted {
                    let (l, r): (Vec<u32>, Vec<u32>) =
                        list.into_iter().partition(|&r| self.go_left[r as usize]);
                    left_lists.push(l);
                    right_lists.push(r);
                }
                let left = self.grow(left_lists, depth + 1);
                let right = self.grow(right_lists, depth + 1);
                self.nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    default_left: true,
                };
            }
            _ => {
                self.nodes[id] = Node::Leaf {
                    weight: self.leaf_weight(g_total, h_total),
                };
            }
        }
        id
    }
}

/// Grows one tree over the rows flagged in `in_sample`, considering only
/// `features` (ascending).
pub(crate) fn grow_presorted(
    data: &ColumnData,
    order: &[Vec<u32>],
    grad: &[f64],
    hess: &[f64],
    in_sample: &[bool],
    features: &[usize],
    config: &TrainConfig,
) -> Tree {
    let sorted: Vec<Vec<u32>> = if features.is_empty() {
        vec![(0..data.n_rows as u32)
            .filter(|&r| in_sample[r as usize])
            .collect()]
    } else {
        features
            .iter()
            .map(|&f| {
                order[f]
                    .iter()
                    .copied()
                    .filter(|&r| in_sample[r as usize])
                    .collect()
            })
            .collect()
    };
    let mut grower = Grower {
        data,
        grad,
        hess,
        features,
        config,
        go_left: vec![false; data.n_rows],
        nodes: Vec::new(),
    };
    grower.grow(sorted, 0);
    Tree {
        nodes: grower.nodes,
    }
}

/// Grows a single tree on row-major `data` with the given gradients,
/// drawing the row and column samples from `rng`.
pub fn grow_tree<R: Rng>(
    data: &[Vec<f64>],
    g: &[f64],
    h: &[f64],
    config: &TrainConfig,
    rng: &mut R,
) -> Tree {
    let cols = match ColumnData::from_rows(data) {
        Ok(c) => c,
        Err(_) => return Tree::leaf(0.0),
    };
    let n = cols.n_rows;
    if n == 0 {
        return Tree::leaf(0.0);
    }
    let mut in_sample = vec![config.rowsample_per_tree >= 1.0; n];
    if config.rowsample_per_tree < 1.0 {
        let m = ((config.rowsample_per_tree * n as f64).round() as usize).clamp(1, n);
        for i in sample(rng, n, m) {
            in_sample[i] = true;
        }
    }
    let n_cols = cols.n_cols();
    let mut features: Vec<usize> = if config.colsample_per_tree < 1.0 && n_cols > 0 {
        let m = ((config.colsample_per_tree * n_cols as f64).round() as usize).clamp(1, n_cols);
        sample(rng, n_cols, m).into_vec()
    } else {
        (0..n_cols).collect()
    };
    features.sort_unstable();
    let order = presort(&cols);
    grow_presorted(&cols, &order, g, h, &in_sample, &features, config)
}
