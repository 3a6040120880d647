//! Regression trees and the exact greedy grower.

use crate::scalar::Scalar;

use super::objective::{NodeStats, SplitObjective};
use super::FeatureMatrix;

/// A regression tree node. Rows with `value < threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode<T> {
    Leaf {
        weight: T,
    },
    Split {
        feature: usize,
        threshold: T,
        /// Objective reduction recorded when the split was chosen.
        gain: T,
        left: Box<TreeNode<T>>,
        right: Box<TreeNode<T>>,
    },
}

impl<T: Scalar> TreeNode<T> {
    pub fn predict(&self, row: &[T]) -> T {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    /// Depth of the deepest leaf; a lone leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Visit internal nodes in preorder.
    pub fn for_each_split(&self, f: &mut impl FnMut(usize, T, T)) {
        if let TreeNode::Split {
            feature,
            threshold,
            gain,
            left,
            right,
        } = self
        {
            f(*feature, *threshold, *gain);
            left.for_each_split(f);
            right.for_each_split(f);
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GrowParams<T> {
    pub max_depth: usize,
    pub min_child_weight: T,
}

#[derive(Debug, Clone, Copy)]
struct Candidate<T> {
    feature: usize,
    threshold: T,
    gain: T,
}

/// Midpoint strictly above `lo` and at most `hi`.
fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let mid = (lo + hi) / T::lit(2.0);
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

/// Exact greedy tree construction over per-row statistics.
///
/// `order[f]` holds every row index sorted by (value of feature `f`, row
/// index); it is computed once per training run and shared by all trees.
pub struct TreeGrower<'a, T, O> {
    x: &'a FeatureMatrix<T>,
    order: &'a [Vec<u32>],
    objective: O,
    params: GrowParams<T>,
}

/// Per-feature sorted row order for `x`.
pub fn presort<T: Scalar>(x: &FeatureMatrix<T>) -> Vec<Vec<u32>> {
    (0..x.cols())
        .map(|f| {
            let mut idx: Vec<u32> = (0..x.rows() as u32).collect();
            idx.sort_by(|&a, &b| {
                x.get(a as usize, f)
                    .partial_cmp(&x.get(b as usize, f))
                    .expect("finite features")
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect()
}

impl<'a, T: Scalar, O: SplitObjective<T>> TreeGrower<'a, T, O> {
    pub fn new(x: &'a FeatureMatrix<T>, order: &'a [Vec<u32>], objective: O, params: GrowParams<T>) -> Self {
        debug_assert_eq!(order.len(), x.cols());
        TreeGrower {
            x,
            order,
            objective,
            params,
        }
    }

    /// Grow one tree from per-row `(first, second)` statistics over every row.
    pub fn grow(&self, first: &[T], second: &[T]) -> TreeNode<T> {
        assert!(self.x.rows() > 0, "cannot grow a tree on zero rows");
        assert_eq!(first.len(), self.x.rows());
        assert_eq!(second.len(), self.x.rows());
        let sorted: Vec<Vec<u32>> = self.order.to_vec();
        let rows: Vec<u32> = (0..self.x.rows() as u32).collect();
        let mut mask = vec![false; self.x.rows()];
        self.grow_node(rows, sorted, 0, first, second, &mut mask)
    }

    fn grow_node(
        &self,
        rows: Vec<u32>,
        sorted: Vec<Vec<u32>>,
        depth: usize,
        first: &[T],
        second: &[T],
        mask: &mut [bool],
    ) -> TreeNode<T> {
        let mut total = NodeStats::zero();
        for &r in &rows {
            total.add(first[r as usize], second[r as usize]);
        }
        let leaf = || TreeNode::Leaf {
            weight: self.objective.leaf_value(total),
        };
        if depth >= self.params.max_depth || rows.len() < 2 {
            return leaf();
        }
        let best = match self.best_split(&sorted, total, first, second) {
            Some(c) if c.gain > T::zero() => c,
            _ => return leaf(),
        };

        for &r in &rows {
            mask[r as usize] = self.x.get(r as usize, best.feature) < best.threshold;
        }
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) =
            rows.iter().partition(|&&r| mask[r as usize]);
        let mut left_sorted = Vec::with_capacity(sorted.len());
        let mut right_sorted = Vec::with_capacity(sorted.len());
        for list in sorted {
            let (l, r): (Vec<u32>, Vec<u32>) = list.into_iter().partition(|&r| mask[r as usize]);
            left_sorted.push(l);
            right_sorted.push(r);
        }
        let left = self.grow_node(left_rows, left_sorted, depth + 1, first, second, mask);
        let right = self.grow_node(right_rows, right_sorted, depth + 1, first, second, mask);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            gain: best.gain,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Highest-gain admissible split; ties keep the lowest feature, then the
    /// lowest threshold.
    fn best_split(
        &self,
        sorted: &[Vec<u32>],
        total: NodeStats<T>,
        first: &[T],
        second: &[T],
    ) -> Option<Candidate<T>> {
        let mut best: Option<Candidate<T>> = None;
        for (feature, list) in sorted.iter().enumerate() {
            let mut left = NodeStats::zero();
            for pair in list.windows(2) {
                let (r, next) = (pair[0] as usize, pair[1] as usize);
                left.add(first[r], second[r]);
                let (lo, hi) = (self.x.get(r, feature), self.x.get(next, feature));
                if !(lo < hi) {
                    continue;
                }
                let right = total.minus(left);
                if self.objective.child_weight(left) < self.params.min_child_weight
                    || self.objective.child_weight(right) < self.params.min_child_weight
                {
                    continue;
                }
                let gain = self.objective.gain(left, right);
                if best.map_or(true, |b| gain > b.gain) {
                    best = Some(Candidate {
                        feature,
                        threshold: midpoint(lo, hi),
                        gain,
                    });
                }
            }
        }
        best
    }
}
