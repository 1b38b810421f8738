//! CART with weighted Gini impurity, and bagged forests of such trees.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ClassifierSpec;
use crate::features::{DocMatrix, RowView};
use crate::rng::derive_seed;
use crate::seeded_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    /// Weighted fraction of design among the training rows that reached the leaf.
    Leaf { score: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn score(&self, r: &RowView<'_>) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { score } => return score,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if r.get(feature) <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, d)) = stack.pop() {
            best = best.max(d);
            if let TreeNode::Split { left, right, .. } = self.nodes[at] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

struct Candidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

fn gini_mass(w: f64, pos: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        2.0 * pos * (w - pos) / w
    }
}

/// Best threshold on one feature. `entries` are the node's stored values of
/// the feature as (value, weight, positive weight); unstored rows are zeros.
fn best_threshold(entries: &mut [(f64, f64, f64)], total: (f64, f64), min_leaf: f64) -> Option<(f64, f64)> {
    let (w_nz, p_nz) = entries.iter().fold((0.0, 0.0), |a, e| (a.0 + e.1, a.1 + e.2));
    let (w_zero, p_zero) = (total.0 - w_nz, total.1 - p_nz);
    entries.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    // walk distinct values in increasing order, inserting the zero group in place
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    let mut zero_done = w_zero <= 1e-12;
    for &(v, w, p) in entries.iter() {
        if !zero_done && v > 0.0 {
            groups.push((0.0, w_zero, p_zero));
            zero_done = true;
        }
        match groups.last_mut() {
            Some(g) if g.0 == v => {
                g.1 += w;
                g.2 += p;
            }
            _ => groups.push((v, w, p)),
        }
    }
    if !zero_done {
        groups.push((0.0, w_zero, p_zero));
    }
    if groups.len() < 2 {
        return None;
    }
    let mut best: Option<(f64, f64)> = None;
    let (mut wl, mut pl) = (0.0, 0.0);
    for k in 0..groups.len() - 1 {
        wl += groups[k].1;
        pl += groups[k].2;
        let wr = total.0 - wl;
        if wl + 1e-12 < min_leaf || wr + 1e-12 < min_leaf {
            continue;
        }
        let imp = gini_mass(wl, pl) + gini_mass(wr, total.1 - pl);
        if best.is_none_or(|(b, _)| imp < b - 1e-12) {
            best = Some((imp, 0.5 * (groups[k].0 + groups[k + 1].0)));
        }
    }
    best
}

/// Grows one tree on rows with positive weight. `features_per_split` of
/// `None` examines every feature at every node.
pub(super) fn fit_tree(
    x: &DocMatrix,
    y: &[bool],
    weights: &[f64],
    spec: &ClassifierSpec,
    features_per_split: Option<usize>,
    seed: u64,
) -> Tree {
    let mut rng = seeded_rng(seed);
    let min_leaf = spec.min_leaf as f64;
    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf { score: 0.0 }];
    let root: Vec<usize> = (0..y.len()).filter(|&i| weights[i] > 0.0).collect();
    let mut work = vec![(0usize, root, 0usize)];
    while let Some((at, rows, depth)) = work.pop() {
        let w: f64 = rows.iter().map(|&i| weights[i]).sum();
        let p: f64 = rows.iter().filter(|&&i| y[i]).map(|&i| weights[i]).sum();
        let score = if w > 0.0 { p / w } else { 0.0 };
        let pure = p <= 0.0 || p >= w;
        if pure || depth >= spec.max_depth || w + 1e-12 < 2.0 * min_leaf {
            nodes[at] = TreeNode::Leaf { score };
            continue;
        }
        // (feature, value, weight, positive weight) for stored entries of the node's rows
        let mut entries: Vec<(usize, f64, f64, f64)> = Vec::new();
        for &i in &rows {
            let pw = if y[i] { weights[i] } else { 0.0 };
            entries.extend(x.row(i).iter().map(|(j, v)| (j, v, weights[i], pw)));
        }
        entries.sort_unstable_by_key(|e| e.0);
        let mut spans: Vec<(usize, usize, usize)> = Vec::new();
        let mut s = 0;
        while s < entries.len() {
            let j = entries[s].0;
            let mut e = s;
            while e < entries.len() && entries[e].0 == j {
                e += 1;
            }
            spans.push((j, s, e));
            s = e;
        }
        // features with no stored entry are all-zero, hence constant in this node
        let quota = features_per_split.unwrap_or(usize::MAX);
        let mut order: Vec<usize> = (0..spans.len()).collect();
        let mut evaluated = 0;
        let mut best: Option<Candidate> = None;
        for k in 0..order.len() {
            if evaluated >= quota {
                break;
            }
            if features_per_split.is_some() {
                let pick = rng.gen_range(k..order.len());
                order.swap(k, pick);
            }
            let (feature, a, b) = spans[order[k]];
            let mut vals: Vec<(f64, f64, f64)> = entries[a..b].iter().map(|e| (e.1, e.2, e.3)).collect();
            let Some((impurity, threshold)) = best_threshold(&mut vals, (w, p), min_leaf) else {
                continue;
            };
            evaluated += 1;
            let better = match &best {
                None => true,
                Some(c) => impurity < c.impurity - 1e-12 || (impurity <= c.impurity + 1e-12 && feature < c.feature),
            };
            if better {
                best = Some(Candidate {
                    impurity,
                    feature,
                    threshold,
                });
            }
        }
        let Some(c) = best else {
            nodes[at] = TreeNode::Leaf { score };
            continue;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| x.row(i).get(c.feature) <= c.threshold);
        let left = nodes.len();
        nodes.push(TreeNode::Leaf { score: 0.0 });
        let right = nodes.len();
        nodes.push(TreeNode::Leaf { score: 0.0 });
        nodes[at] = TreeNode::Split {
            feature: c.feature,
            threshold: c.threshold,
            left,
            right,
        };
        work.push((right, right_rows, depth + 1));
        work.push((left, left_rows, depth + 1));
    }
    Tree { nodes }
}

/// Bootstrap-weighted trees with `√d` features per split unless the spec
/// says otherwise. Trees are grown in parallel and kept in index order.
pub(super) fn fit_forest(x: &DocMatrix, y: &[bool], spec: &ClassifierSpec) -> Vec<Tree> {
    let n = y.len();
    let m = spec
        .features_per_split
        .unwrap_or_else(|| ((x.n_features() as f64).sqrt().ceil() as usize).max(1));
    (0..spec.n_trees)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(spec.seed, t as u64);
            let mut rng = seeded_rng(seed);
            let mut weights = vec![0.0; n];
            let pick = Uniform::new(0, n);
            for _ in 0..n {
                weights[pick.sample(&mut rng)] += 1.0;
            }
            fit_tree(x, y, &weights, spec, Some(m), derive_seed(seed, 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Scheme;
    use crate::learn::ClassifierKind;

    fn unlimited() -> ClassifierSpec {
        let mut s = ClassifierSpec::new(ClassifierKind::DecisionTree);
        s.max_depth = usize::MAX;
        s.min_leaf = 1;
        s
    }

    #[test]
    fn xor_is_shattered() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = [false, true, true, false];
        let x = DocMatrix::from_dense(&rows, Scheme::Count);
        let t = fit_tree(&x, &y, &[1.0; 4], &unlimited(), None, 1);
        for (i, &yi) in y.iter().enumerate() {
            assert_eq!(t.score(&x.row(i)) >= 0.5, yi);
        }
    }

    #[test]
    fn depth_limit_respected() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..64).map(|i| i % 2 == 0).collect();
        let x = DocMatrix::from_dense(&rows, Scheme::Count);
        let mut spec = unlimited();
        spec.max_depth = 3;
        let t = fit_tree(&x, &y, &vec![1.0; 64], &spec, None, 1);
        assert!(t.depth() <= 3);
        assert!(t.n_leaves() <= 8);
    }

    #[test]
    fn min_leaf_respected() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
        let x = DocMatrix::from_dense(&rows, Scheme::Count);
        let mut spec = unlimited();
        spec.min_leaf = 4;
        let t = fit_tree(&x, &y, &[1.0; 20], &spec, None, 1);
        let mut counts = vec![0; t.nodes.len()];
        for i in 0..20 {
            let mut at = 0;
            while let TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } = t.nodes[at]
            {
                at = if x.row(i).get(feature) <= threshold {
                    left
                } else {
                    right
                };
            }
            counts[at] += 1;
        }
        for (k, n) in t.nodes.iter().enumerate() {
            if matches!(n, TreeNode::Leaf { .. }) {
                assert!(counts[k] >= 4, "leaf {k} has {}", counts[k]);
            }
        }
    }

    #[test]
    fn zero_weight_rows_are_ignored() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let x = DocMatrix::from_dense(&rows, Scheme::Count);
        let t = fit_tree(&x, &[true, true, false], &[1.0, 1.0, 0.0], &unlimited(), None, 1);
        assert_eq!(t.nodes, vec![TreeNode::Leaf { score: 1.0 }]);
    }

    #[test]
    fn best_split_has_lowest_gini() {
        // feature 1 separates perfectly, feature 0 is noise
        let rows = vec![vec![3.0, 0.0], vec![1.0, 0.0], vec![2.0, 5.0], vec![0.0, 6.0]];
        let x = DocMatrix::from_dense(&rows, Scheme::Count);
        let t = fit_tree(&x, &[false, false, true, true], &[1.0; 4], &unlimited(), None, 1);
        assert!(matches!(t.nodes[0], TreeNode::Split { feature: 1, threshold, .. } if threshold == 2.5));
    }

    #[test]
    fn forest_is_deterministic() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![i as f64, (i % 4) as f64, (i % 7) as f64])
            .collect();
        let y: Vec<bool> = (0..30).map(|i| i > 14).collect();
        let x = DocMatrix::from_dense(&rows, Scheme::Count);
        let mut spec = ClassifierSpec::new(ClassifierKind::RandomForest);
        spec.n_trees = 8;
        assert_eq!(fit_forest(&x, &y, &spec), fit_forest(&x, &y, &spec));
    }
}
