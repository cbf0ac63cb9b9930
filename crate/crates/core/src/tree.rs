//! CART regression tree grown to purity and pruned by weakest-link
//! cost-complexity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evalstat::metrics::{r_square, MetricError};

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("cannot grow a tree on an empty training set")]
    Empty,
    #[error("{features} feature rows but {targets} targets")]
    Shape { features: usize, targets: usize },
    #[error("input has {found} features, tree expects {expected}")]
    Arity { expected: usize, found: usize },
    #[error("min_leaf must be at least 1")]
    InvalidMinLeaf,
    #[error("prune step {0} out of range")]
    StepOutOfRange(usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            min_leaf: 1,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub feature: usize,
    /// Samples with `x[feature] <= threshold` go left.
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

/// A node in preorder storage. Every node keeps the statistics of the
/// training samples routed to it, so any internal node can act as a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Mean of the routed training targets.
    pub value: f64,
    pub count: usize,
    /// Sum of squared deviations of the routed targets from `value`.
    pub sse: f64,
    pub split: Option<SplitRule>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub n_features: usize,
    /// Preorder; the root is `nodes[0]` and children follow their parent.
    pub nodes: Vec<TreeNode>,
}

fn mean_and_sse(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let (sum, n) = values.clone().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    let mean = sum / n as f64;
    let sse = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, sse, n)
}

struct Grower<'a, R> {
    x: &'a [R],
    y: &'a [f64],
    params: TreeParams,
    nodes: Vec<TreeNode>,
}

impl<R: AsRef<[f64]>> Grower<'_, R> {
    fn best_split(&self, idx: &[usize], mean: f64) -> Option<(usize, f64, f64)> {
        let n = idx.len();
        let n_features = self.x[idx[0]].as_ref().len();
        let total: f64 = idx.iter().map(|&i| self.y[i] - mean).sum();
        let base = total * total / n as f64;
        let min_leaf = self.params.min_leaf;
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..n_features {
            let feat = |i: usize| self.x[i].as_ref()[f];
            order.sort_by(|&a, &b| feat(a).total_cmp(&feat(b)).then(a.cmp(&b)));
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += self.y[order[k]] - mean;
                let (lo, hi) = (feat(order[k]), feat(order[k + 1]));
                let n_left = k + 1;
                if lo == hi || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / (n - n_left) as f64
                    - base;
                if best.map_or(true, |(_, _, g)| gain > g) {
                    let mid = 0.5 * (lo + hi);
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((f, threshold, gain));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let (value, sse, count) = mean_and_sse(idx.iter().map(|&i| self.y[i]));
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            value,
            count,
            sse,
            split: None,
        });
        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        let depth_ok = self.params.max_depth.map_or(true, |d| depth < d);
        if pure || count <= self.params.min_leaf || !depth_ok {
            return id;
        }
        let Some((feature, threshold, gain)) = self.best_split(&idx, value) else {
            return id;
        };
        if !(gain > 1e-12 * sse) {
            return id;
        }
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.x[i].as_ref()[feature] <= threshold);
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[id].split = Some(SplitRule {
            feature,
            threshold,
            left,
            right,
        });
        id
    }
}

/// Greedy CART growth: at every node the split with the largest SSE
/// reduction over all features and midpoint thresholds is taken, until a
/// node is pure, has at most `min_leaf` samples, or no split helps.
pub fn grow<R: AsRef<[f64]>>(x: &[R], y: &[f64], params: TreeParams) -> Result<RegressionTree, TreeError> {
    if x.len() != y.len() {
        return Err(TreeError::Shape {
            features: x.len(),
            targets: y.len(),
        });
    }
    if x.is_empty() {
        return Err(TreeError::Empty);
    }
    if params.min_leaf == 0 {
        return Err(TreeError::InvalidMinLeaf);
    }
    let n_features = x[0].as_ref().len();
    if let Some(bad) = x.iter().find(|r| r.as_ref().len() != n_features) {
        return Err(TreeError::Arity {
            expected: n_features,
            found: bad.as_ref().len(),
        });
    }
    let mut grower = Grower {
        x,
        y,
        params,
        nodes: Vec::new(),
    };
    grower.grow((0..x.len()).collect(), 0);
    Ok(RegressionTree {
        n_features,
        nodes: grower.nodes,
    })
}

impl RegressionTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Index of the leaf `x` is routed to.
    pub fn leaf_index(&self, x: &[f64]) -> Result<usize, TreeError> {
        if x.len() != self.n_features {
            return Err(TreeError::Arity {
                expected: self.n_features,
                found: x.len(),
            });
        }
        let mut i = 0;
        while let Some(s) = self.nodes[i].split {
            i = if x[s.feature] <= s.threshold { s.left } else { s.right };
        }
        Ok(i)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, TreeError> {
        Ok(self.nodes[self.leaf_index(x)?].value)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &RegressionTree, i: usize) -> usize {
            match t.nodes[i].split {
                None => 0,
                Some(s) => 1 + walk(t, s.left).max(walk(t, s.right)),
            }
        }
        walk(self, 0)
    }

    /// Training SSE of the tree: sum of leaf SSEs.
    pub fn train_sse(&self) -> f64 {
        self.nodes.iter().filter(|n| n.is_leaf()).map(|n| n.sse).sum()
    }

    /// Copy of the tree in which `is_leaf(i)` nodes are turned into leaves.
    fn collapse(&self, is_leaf: impl Fn(usize) -> bool) -> RegressionTree {
        fn copy(t: &RegressionTree, i: usize, is_leaf: &dyn Fn(usize) -> bool, out: &mut Vec<TreeNode>) -> usize {
            let id = out.len();
            let mut node = t.nodes[i];
            node.split = None;
            out.push(node);
            if let Some(s) = t.nodes[i].split {
                if !is_leaf(i) {
                    let left = copy(t, s.left, is_leaf, out);
                    let right = copy(t, s.right, is_leaf, out);
                    out[id].split = Some(SplitRule { left, right, ..s });
                }
            }
            id
        }
        let mut nodes = Vec::new();
        copy(self, 0, &is_leaf, &mut nodes);
        RegressionTree {
            n_features: self.n_features,
            nodes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneStep {
    pub alpha: f64,
    pub n_leaves: usize,
    pub train_sse: f64,
}

/// Nested cost-complexity subtrees of a grown tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneSequence {
    pub tree: RegressionTree,
    /// Step 0 is the full tree; the last step is the root-only stump.
    pub steps: Vec<PruneStep>,
    /// For each node of `tree`, the step at which it becomes a leaf.
    collapsed_at: Vec<Option<usize>>,
}

impl PruneSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn subtree(&self, step: usize) -> Result<RegressionTree, TreeError> {
        if step >= self.steps.len() {
            return Err(TreeError::StepOutOfRange(step));
        }
        Ok(self
            .tree
            .collapse(|i| self.collapsed_at[i].is_some_and(|s| s <= step)))
    }
}

/// Weakest-link pruning: repeatedly collapses every internal node minimizing
/// `(SSE_node − SSE_branch) / (leaves_branch − 1)` until only the root is
/// left. Alphas that tie up to rounding are merged into one step, so the
/// alphas are strictly increasing.
pub fn prune_sequence(tree: &RegressionTree) -> PruneSequence {
    let n = tree.nodes.len();
    let mut parent = vec![usize::MAX; n];
    for (i, node) in tree.nodes.iter().enumerate() {
        if let Some(s) = node.split {
            parent[s.left] = i;
            parent[s.right] = i;
        }
    }
    let mut collapsed_at: Vec<Option<usize>> = vec![None; n];
    let mut steps = vec![PruneStep {
        alpha: 0.0,
        n_leaves: tree.n_leaves(),
        train_sse: tree.train_sse(),
    }];
    let mut active = vec![false; n];
    let mut branch_sse = vec![0.0; n];
    let mut branch_leaves = vec![0usize; n];

    loop {
        // active: reachable from the root through non-collapsed internal nodes
        for i in 0..n {
            active[i] = i == 0 || (active[parent[i]] && collapsed_at[parent[i]].is_none());
        }
        if tree.nodes[0].is_leaf() || collapsed_at[0].is_some() {
            break;
        }
        for i in (0..n).rev() {
            if !active[i] {
                continue;
            }
            match tree.nodes[i].split {
                Some(s) if collapsed_at[i].is_none() => {
                    branch_sse[i] = branch_sse[s.left] + branch_sse[s.right];
                    branch_leaves[i] = branch_leaves[s.left] + branch_leaves[s.right];
                }
                _ => {
                    branch_sse[i] = tree.nodes[i].sse;
                    branch_leaves[i] = 1;
                }
            }
        }
        let link = |i: usize| (tree.nodes[i].sse - branch_sse[i]) / (branch_leaves[i] - 1) as f64;
        let internal = || (0..n).filter(|&i| active[i] && collapsed_at[i].is_none() && !tree.nodes[i].is_leaf());
        let alpha = internal().map(link).fold(f64::INFINITY, f64::min);
        let cutoff = alpha + 1e-10 * alpha.abs().max(f64::MIN_POSITIVE);
        let last = steps.len() - 1;
        let step = if alpha <= steps[last].alpha && last > 0 { last } else { last + 1 };
        let chosen: Vec<usize> = internal().filter(|&i| link(i) <= cutoff).collect();
        for i in chosen {
            collapsed_at[i] = Some(step);
        }
        // leaves and SSE of the new subtree
        let mut leaves = 0;
        let mut sse = 0.0;
        for i in 0..n {
            let reachable = i == 0 || (active[parent[i]] && collapsed_at[parent[i]].is_none());
            active[i] = reachable;
            if reachable && (tree.nodes[i].is_leaf() || collapsed_at[i].is_some()) {
                leaves += 1;
                sse += tree.nodes[i].sse;
            }
        }
        let entry = PruneStep {
            alpha: if step == last { steps[last].alpha } else { alpha },
            n_leaves: leaves,
            train_sse: sse,
        };
        if step == last {
            steps[last] = entry;
        } else {
            steps.push(entry);
        }
    }
    PruneSequence {
        tree: tree.clone(),
        steps,
        collapsed_at,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrunePolicy {
    /// Largest accepted |train R² − validation R²|.
    pub gap_tol: f64,
}

impl Default for PrunePolicy {
    fn default() -> Self {
        Self { gap_tol: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneSelection {
    pub tree: RegressionTree,
    pub step: usize,
    pub train_r2: f64,
    pub val_r2: f64,
    /// Whether the train/validation gap criterion was met.
    pub within_tolerance: bool,
}

/// Picks the largest subtree whose train/validation R² gap is within
/// `policy.gap_tol`, falling back to the subtree with the best validation R².
pub fn select_pruned<R: AsRef<[f64]>>(
    seq: &PruneSequence,
    val_x: &[R],
    val_y: &[f64],
    policy: PrunePolicy,
) -> Result<PruneSelection, TreeError> {
    let sst = seq.tree.root().sse;
    let mut best: Option<PruneSelection> = None;
    for (k, step) in seq.steps.iter().enumerate() {
        let tree = seq.subtree(k)?;
        let preds = val_x
            .iter()
            .map(|x| tree.predict(x.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        let val_r2 = r_square(val_y, &preds)?;
        let train_r2 = if sst > 0.0 { 1.0 - step.train_sse / sst } else { 1.0 };
        let within = (train_r2 - val_r2).abs() <= policy.gap_tol;
        let candidate = PruneSelection {
            tree,
            step: k,
            train_r2,
            val_r2,
            within_tolerance: within,
        };
        if within {
            return Ok(candidate);
        }
        if best.as_ref().map_or(true, |b| val_r2 > b.val_r2) {
            best = Some(candidate);
        }
    }
    best.ok_or(TreeError::StepOutOfRange(0))
}
