//! Self-organising map; nodes are labelled by the training rows they win.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::map_majority;
use crate::error::{Error, Result};
use crate::label::Label;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SomSpec {
    pub rows: usize,
    pub cols: usize,
    pub learning_rate: f64,
    /// Initial neighbourhood radius in grid units; defaults to half the larger side.
    pub radius: Option<f64>,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SomSpec {
    fn default() -> Self {
        SomSpec { rows: 8, cols: 8, learning_rate: 0.5, radius: None, epochs: 20, seed: 0 }
    }
}

impl SomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.epochs == 0 {
            return Err(Error::invalid("som grid sides and epochs must be >= 1"));
        }
        if !(self.learning_rate > 0.0) || self.radius.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::invalid("som learning rate and radius must be > 0"));
        }
        Ok(())
    }

    pub fn initial_radius(&self) -> f64 {
        self.radius.unwrap_or(self.rows.max(self.cols) as f64 / 2.0)
    }

    /// Learning rate and radius at step `t` of `total`: both decay as exp(−3t/total).
    pub fn schedule(&self, t: usize, total: usize) -> (f64, f64) {
        let decay = (-3.0 * t as f64 / total.max(1) as f64).exp();
        (self.learning_rate * decay, self.initial_radius() * decay)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomModel {
    pub spec: SomSpec,
    /// Row-major over the grid.
    pub codebook: Vec<Vec<f64>>,
    pub node_labels: Vec<Label>,
}

impl SomModel {
    pub fn bmu(&self, row: &[f64]) -> usize {
        bmu(&self.codebook, row)
    }

    pub fn predict(&self, row: &[f64]) -> Label {
        self.node_labels[self.bmu(row)]
    }
}

fn bmu(codebook: &[Vec<f64>], row: &[f64]) -> usize {
    super::kmeans::nearest(codebook, row).0
}

pub fn som_fit(rows: &[Vec<f64>], labels: &[Label], spec: &SomSpec) -> Result<SomModel> {
    spec.validate()?;
    super::check_training(rows, labels)?;
    let nodes = spec.rows * spec.cols;
    let mut rng = rng_from_seed(derive_seed(spec.seed, &[0x50]));
    let mut codebook: Vec<Vec<f64>> = (0..nodes).map(|_| rows[rng.random_range(0..rows.len())].clone()).collect();
    let pos = |i: usize| ((i / spec.cols) as f64, (i % spec.cols) as f64);
    let total = spec.epochs * rows.len();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut t = 0;
    for _ in 0..spec.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &rows[i];
            let win = bmu(&codebook, x);
            let (eta, r) = spec.schedule(t, total);
            let (wr, wc) = pos(win);
            for (node, w) in codebook.iter_mut().enumerate() {
                let (nr, nc) = pos(node);
                let g2 = (nr - wr).powi(2) + (nc - wc).powi(2);
                let h = (-g2 / (2.0 * r * r)).exp();
                let step = eta * h;
                if step > 0.0 {
                    w.iter_mut().zip(x).for_each(|(wv, xv)| *wv += step * (xv - *wv));
                }
            }
            t += 1;
        }
    }
    let hits: Vec<usize> = rows.iter().map(|r| bmu(&codebook, r)).collect();
    let mut hit = vec![false; nodes];
    hits.iter().for_each(|&h| hit[h] = true);
    let counts_label = map_majority(nodes, &hits, labels, |_| Label::NoCrackle);
    // Unhit nodes copy the nearest hit node on the grid (lower index on ties).
    let node_labels = (0..nodes)
        .map(|n| {
            if hit[n] {
                return counts_label[n];
            }
            let (r0, c0) = pos(n);
            let src = (0..nodes)
                .filter(|&m| hit[m])
                .min_by(|&a, &b| {
                    let d = |m: usize| {
                        let (r, c) = pos(m);
                        (r - r0).powi(2) + (c - c0).powi(2)
                    };
                    d(a).total_cmp(&d(b)).then(a.cmp(&b))
                })
                .expect("at least one node is hit");
            counts_label[src]
        })
        .collect();
    Ok(SomModel { spec: spec.clone(), codebook, node_labels })
}
