//! Random forest of Gini-split decision trees.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;
use crate::rng::{derive_seed, rng_from_seed, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfSpec {
    pub n_estimators: usize,
    /// `None` grows trees until leaves are pure.
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for RfSpec {
    fn default() -> Self {
        RfSpec { n_estimators: 100, max_depth: None, seed: 0 }
    }
}

impl RfSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 || self.max_depth == Some(0) {
            return Err(Error::invalid("rf n_estimators and max_depth must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { label: Label },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> Label {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { label } => return label,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub spec: RfSpec,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Majority of tree votes; ties go to no-crackle.
    pub fn predict(&self, row: &[f64]) -> Label {
        let pos = self.trees.iter().filter(|t| t.predict(row).is_positive()).count();
        if 2 * pos > self.trees.len() {
            Label::Crackle
        } else {
            Label::NoCrackle
        }
    }
}

fn leaf_label(counts: [usize; 2]) -> Label {
    if counts[1] > counts[0] {
        Label::Crackle
    } else {
        Label::NoCrackle
    }
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = counts[1] as f64 / n;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [Label],
    max_depth: Option<usize>,
    max_features: usize,
    rng: Rng,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> [usize; 2] {
        let mut c = [0, 0];
        idx.iter().for_each(|&i| c[self.labels[i].index()] += 1);
        c
    }

    /// Best (weighted child impurity, feature, threshold) over random candidates.
    /// Constant features do not count towards `max_features`.
    fn best_split(&mut self, idx: &mut [usize]) -> Option<(f64, usize, f64)> {
        let d = self.rows[0].len();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(&mut self.rng);
        let total = self.counts(idx);
        let n = idx.len() as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut informative = 0;
        for f in features {
            if informative == self.max_features {
                break;
            }
            let rows = self.rows;
            idx.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]));
            if rows[idx[0]][f] == rows[idx[idx.len() - 1]][f] {
                continue;
            }
            informative += 1;
            let mut left = [0usize; 2];
            for k in 0..idx.len() - 1 {
                left[self.labels[idx[k]].index()] += 1;
                let (a, b) = (rows[idx[k]][f], rows[idx[k + 1]][f]);
                if a == b {
                    continue;
                }
                let right = [total[0] - left[0], total[1] - left[1]];
                let nl = (k + 1) as f64;
                let score = (nl * gini(left) + (n - nl) * gini(right)) / n;
                if best.is_none_or(|(s, _, _)| score < s) {
                    let mut thr = a + (b - a) / 2.0;
                    if thr >= b {
                        thr = a;
                    }
                    best = Some((score, f, thr));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let counts = self.counts(idx);
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { label: leaf_label(counts) });
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || idx.len() < 2 || self.max_depth.is_some_and(|m| depth >= m) {
            return id;
        }
        let Some((_, feature, threshold)) = self.best_split(idx) else {
            return id;
        };
        let rows = self.rows;
        let mut part: Vec<usize> = idx.to_vec();
        part.sort_by_key(|&i| rows[i][feature] > threshold);
        let cut = part.iter().take_while(|&&i| rows[i][feature] <= threshold).count();
        let (l, r) = part.split_at_mut(cut);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = TreeNode::Split { feature, threshold, left, right };
        id
    }
}

/// One tree per bootstrap sample; trees grow in parallel, each from its own
/// seed, and are collected in index order.
pub fn rf_fit(rows: &[Vec<f64>], labels: &[Label], spec: &RfSpec) -> Result<ForestModel> {
    spec.validate()?;
    super::check_training(rows, labels)?;
    let d = rows[0].len();
    let max_features = ((d as f64).sqrt().floor() as usize).max(1);
    let n = rows.len();
    let trees = (0..spec.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(spec.seed, &[t as u64]));
            let mut sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            sample.sort_unstable();
            let mut b = Builder { rows, labels, max_depth: spec.max_depth, max_features, rng, nodes: Vec::new() };
            b.grow(&mut sample, 0);
            Tree { nodes: b.nodes }
        })
        .collect();
    Ok(ForestModel { spec: spec.clone(), trees })
}
