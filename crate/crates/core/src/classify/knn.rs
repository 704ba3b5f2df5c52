//! k-nearest neighbours over a kd-tree with Minkowski distances.

use serde::{Deserialize, Serialize};

use super::majority;
use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnSpec {
    pub n_neighbors: usize,
    /// Minkowski order, ≥ 1.
    pub p: f64,
    pub leaf_size: usize,
}

impl Default for KnnSpec {
    fn default() -> Self {
        KnnSpec { n_neighbors: 5, p: 2.0, leaf_size: 30 }
    }
}

impl KnnSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_neighbors == 0 || self.leaf_size == 0 {
            return Err(Error::invalid("knn n_neighbors and leaf_size must be >= 1"));
        }
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::invalid(format!("knn p = {} must be a finite value >= 1", self.p)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KdNode {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub spec: KnnSpec,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    /// Point indices, grouped so every leaf owns a contiguous range.
    order: Vec<usize>,
    nodes: Vec<KdNode>,
}

/// Σ|a−b|^p; the p-th root is monotone so ranking never needs it.
pub fn minkowski_pow(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum()
    }
}

fn coord_pow(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d.abs()
    } else if p == 2.0 {
        d * d
    } else {
        d.abs().powf(p)
    }
}

pub fn knn_fit(rows: &[Vec<f64>], labels: &[Label], spec: &KnnSpec) -> Result<KnnModel> {
    spec.validate()?;
    super::check_training(rows, labels)?;
    if spec.n_neighbors > rows.len() {
        return Err(Error::invalid(format!(
            "knn n_neighbors = {} exceeds the {} training rows",
            spec.n_neighbors,
            rows.len()
        )));
    }
    let mut model = KnnModel {
        spec: spec.clone(),
        points: rows.to_vec(),
        labels: labels.to_vec(),
        order: (0..rows.len()).collect(),
        nodes: Vec::new(),
    };
    let n = rows.len();
    model.build(0, n);
    Ok(model)
}

impl KnnModel {
    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(KdNode::Leaf { start, end });
        if end - start <= self.spec.leaf_size {
            return id;
        }
        let d = self.points[0].len();
        let (dim, spread) = (0..d)
            .map(|j| {
                let (lo, hi) = self.order[start..end]
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        (lo.min(self.points[i][j]), hi.max(self.points[i][j]))
                    });
                (j, hi - lo)
            })
            .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if !(spread > 0.0) {
            return id;
        }
        let points = &self.points;
        self.order[start..end].sort_by(|&a, &b| points[a][dim].total_cmp(&points[b][dim]).then(a.cmp(&b)));
        let mid = start + (end - start) / 2;
        let value = self.points[self.order[mid]][dim];
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = KdNode::Split { dim, value, left, right };
        id
    }

    /// The `k` nearest training points as (powered distance, index), ordered by
    /// distance then index. Identical to an exhaustive scan.
    pub fn neighbors(&self, query: &[f64], k: usize) -> Vec<(f64, usize)> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        self.search(0, query, k, &mut best);
        best
    }

    fn search(&self, node: usize, q: &[f64], k: usize, best: &mut Vec<(f64, usize)>) {
        match self.nodes[node] {
            KdNode::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = minkowski_pow(q, &self.points[i], self.spec.p);
                    let cand = (d, i);
                    if best.len() < k || lt(cand, best[best.len() - 1]) {
                        let pos = best.partition_point(|&b| lt(b, cand));
                        best.insert(pos, cand);
                        best.truncate(k);
                    }
                }
            }
            KdNode::Split { dim, value, left, right } => {
                let diff = q[dim] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, k, best);
                // Visit on equality: an equally distant point with a lower index still wins.
                let bound = coord_pow(diff, self.spec.p);
                if best.len() < k || bound <= best[best.len() - 1].0 {
                    self.search(far, q, k, best);
                }
            }
        }
    }

    /// Majority vote; a tied vote goes to the nearest neighbour's label.
    pub fn predict(&self, row: &[f64]) -> Label {
        let nn = self.neighbors(row, self.spec.n_neighbors);
        let votes: Vec<Label> = nn.iter().map(|&(_, i)| self.labels[i]).collect();
        majority(&votes).unwrap_or(votes[0])
    }
}

fn lt(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}
