//! Depth-limited CART regression trees (variance reduction), the base
//! learner for quantile boosting and NGBoost.

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::model::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    spec: TreeSpec,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl RegressionTree {
    /// Fit on every row of `x`.
    pub fn fit(x: &Matrix, targets: &[f64], spec: TreeSpec) -> Result<Self, ModelError> {
        let rows: Vec<usize> = (0..x.rows()).collect();
        Self::fit_rows(x, targets, &rows, spec).map(|(t, _)| t)
    }

    /// Fit on a subset of rows. Also returns, for every leaf node, the
    /// training rows that landed in it so callers can re-estimate leaf
    /// values.
    pub fn fit_rows(
        x: &Matrix,
        targets: &[f64],
        rows: &[usize],
        spec: TreeSpec,
    ) -> Result<(Self, Vec<(usize, Vec<usize>)>), ModelError> {
        if rows.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let spec = TreeSpec { min_samples_leaf: spec.min_samples_leaf.max(1), ..spec };
        let mut tree = RegressionTree { nodes: Vec::new(), spec };
        let mut leaves = Vec::new();
        tree.grow(x, targets, rows.to_vec(), 0, &mut leaves);
        Ok((tree, leaves))
    }

    fn grow(
        &mut self,
        x: &Matrix,
        targets: &[f64],
        rows: Vec<usize>,
        depth: usize,
        leaves: &mut Vec<(usize, Vec<usize>)>,
    ) -> usize {
        let id = self.nodes.len();
        let mean = rows.iter().map(|&i| targets[i]).sum::<f64>() / rows.len() as f64;
        self.nodes.push(Node::Leaf { value: mean });

        let split = if depth < self.spec.max_depth { self.best_split(x, targets, &rows, mean) } else { None };
        match split {
            None => leaves.push((id, rows)),
            Some(c) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x.get(i, c.feature) <= c.threshold);
                let left = self.grow(x, targets, l, depth + 1, leaves);
                let right = self.grow(x, targets, r, depth + 1, leaves);
                self.nodes[id] = Node::Split { feature: c.feature, threshold: c.threshold, left, right };
            }
        }
        id
    }

    /// Highest SSE reduction; ties go to the lowest feature index, then the
    /// lowest threshold.
    fn best_split(&self, x: &Matrix, targets: &[f64], rows: &[usize], mean: f64) -> Option<Candidate> {
        let n = rows.len();
        let min_leaf = self.spec.min_samples_leaf;
        if n < 2 * min_leaf {
            return None;
        }
        let sse: f64 = rows.iter().map(|&i| (targets[i] - mean).powi(2)).sum();
        if sse <= n as f64 * (1e-10 * mean.abs()).powi(2) {
            return None;
        }
        let mut best: Option<Candidate> = None;
        let mut order = rows.to_vec();
        for feature in 0..x.cols() {
            order.sort_by(|&a, &b| x.get(a, feature).total_cmp(&x.get(b, feature)).then(a.cmp(&b)));
            let total: f64 = order.iter().map(|&i| targets[i] - mean).sum();
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += targets[order[k]] - mean;
                let n_left = k + 1;
                let (v, v_next) = (x.get(order[k], feature), x.get(order[k + 1], feature));
                if n_left < min_leaf || n - n_left < min_leaf || v == v_next {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64
                    - total * total / n as f64;
                if gain > best.as_ref().map_or(1e-12 * sse, |b| b.gain) {
                    let mut threshold = 0.5 * (v + v_next);
                    if threshold >= v_next {
                        threshold = v;
                    }
                    best = Some(Candidate { feature, threshold, gain });
                }
            }
        }
        best
    }

    fn leaf_of(&self, row: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { .. } => return id,
                Node::Split { feature, threshold, left, right } => {
                    id = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_of(row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_of returns leaves"),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.predict_row(r)).collect()
    }

    /// Overwrite the value of leaf `node`.
    pub fn set_leaf_value(&mut self, node: usize, value: f64) {
        if let Node::Leaf { value: v } = &mut self.nodes[node] {
            *v = value;
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng as _;

    #[test]
    fn constant_targets_give_a_single_leaf() {
        let x = Matrix::from_rows(&(0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect::<Vec<_>>());
        let t = RegressionTree::fit(&x, &[0.1; 20], TreeSpec { max_depth: 4, min_samples_leaf: 1 }).unwrap();
        assert_eq!(t.n_leaves(), 1);
        assert!((t.predict_row(&[3.0, 1.0]) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn stump_on_indicator() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0], vec![-1.0], vec![1.0]]);
        let y = [0.0, 1.0, 0.0, 1.0];
        let t = RegressionTree::fit(&x, &y, TreeSpec { max_depth: 1, min_samples_leaf: 1 }).unwrap();
        match t.nodes()[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 0.0);
            }
            _ => panic!("expected a split"),
        }
        assert_eq!(t.predict_row(&[-1.0]), 0.0);
        assert_eq!(t.predict_row(&[1.0]), 1.0);
    }

    #[test]
    fn duplicated_feature_breaks_ties_toward_lower_index() {
        let x = Matrix::from_rows(&(0..10).map(|i| vec![i as f64, i as f64]).collect::<Vec<_>>());
        let y: Vec<f64> = (0..10).map(|i| if i < 5 { 0.0 } else { 1.0 }).collect();
        let t = RegressionTree::fit(&x, &y, TreeSpec { max_depth: 1, min_samples_leaf: 1 }).unwrap();
        assert!(matches!(t.nodes()[0], Node::Split { feature: 0, threshold, .. } if threshold == 4.5));
    }

    #[test]
    fn reduces_training_sse_and_respects_constraints() {
        let mut r = rng::from_seed(5);
        let x = Matrix::from_rows(&(0..200).map(|_| vec![r.random::<f64>(), r.random::<f64>()]).collect::<Vec<_>>());
        let y: Vec<f64> = x.iter_rows().map(|row| (3.0 * row[0]).sin() + row[1] + 0.1 * r.random::<f64>()).collect();
        let spec = TreeSpec { max_depth: 3, min_samples_leaf: 5 };
        let (t, leaves) = RegressionTree::fit_rows(&x, &y, &(0..200).collect::<Vec<_>>(), spec).unwrap();
        let mean = y.iter().sum::<f64>() / 200.0;
        let sse_root: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        let sse_tree: f64 = x.iter_rows().zip(&y).map(|(row, v)| (v - t.predict_row(row)).powi(2)).sum();
        assert!(sse_tree < sse_root);
        assert!(t.depth() <= 3);
        assert!(leaves.iter().all(|(_, rows)| rows.len() >= 5));
        assert_eq!(leaves.iter().map(|(_, r)| r.len()).sum::<usize>(), 200);
        let again = RegressionTree::fit(&x, &y, spec).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn empty_input() {
        let x = Matrix::zeros(0, 2);
        assert!(RegressionTree::fit(&x, &[], TreeSpec { max_depth: 2, min_samples_leaf: 1 }).is_err());
    }
}
