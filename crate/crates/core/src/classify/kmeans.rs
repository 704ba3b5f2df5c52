//! k-means clustering with k-means++ seeding; clusters vote for labels afterwards.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{majority, map_majority};
use crate::error::{Error, Result};
use crate::label::Label;
use crate::rng::{derive_seed, rng_from_seed, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KmeansSpec {
    pub k: usize,
    pub n_init: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KmeansSpec {
    fn default() -> Self {
        KmeansSpec { k: 2, n_init: 10, max_iter: 300, seed: 0 }
    }
}

impl KmeansSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n_init == 0 || self.max_iter == 0 {
            return Err(Error::invalid("kmeans k, n_init and max_iter must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmeansModel {
    pub spec: KmeansSpec,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Label assigned to each cluster.
    pub label_map: Vec<Label>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lower index.
pub fn nearest(centroids: &[Vec<f64>], row: &[f64]) -> (usize, f64) {
    centroids
        .iter()
        .enumerate()
        .map(|(i, c)| (i, sq_dist(c, row)))
        .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}

fn plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![rows[rng.random_range(0..rows.len())].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // every point already coincides with a centre
            Err(_) => rng.random_range(0..rows.len()),
        };
        centroids.push(rows[next].clone());
        let c = centroids.last().expect("just pushed");
        d2.iter_mut().zip(rows).for_each(|(d, r)| *d = d.min(sq_dist(r, c)));
    }
    centroids
}

/// Result of one Lloyd run: centroids, assignments and inertia after every iteration.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    pub inertia_history: Vec<f64>,
}

pub fn lloyd(rows: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iter: usize) -> LloydRun {
    let k = centroids.len();
    let d = rows[0].len();
    let assign = |centroids: &[Vec<f64>]| -> (Vec<usize>, Vec<f64>) {
        rows.iter().map(|r| nearest(centroids, r)).unzip()
    };
    let (mut assignment, mut dists) = assign(&centroids);
    let mut inertia_history = vec![dists.iter().sum()];
    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (r, &a) in rows.iter().zip(&assignment) {
            counts[a] += 1;
            sums[a].iter_mut().zip(r).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // Empty cluster: move it onto the point farthest from its centre.
                let far = (0..rows.len()).fold(0, |best, i| if dists[i] > dists[best] { i } else { best });
                centroids[c] = rows[far].clone();
                dists[far] = 0.0;
            }
        }
        let (next, next_d) = assign(&centroids);
        inertia_history.push(next_d.iter().sum());
        dists = next_d;
        if next == assignment {
            break;
        }
        assignment = next;
    }
    LloydRun { centroids, assignment, inertia_history }
}

/// Best of `n_init` seeded restarts by inertia; the first wins ties.
pub fn kmeans_cluster(rows: &[Vec<f64>], spec: &KmeansSpec) -> Result<LloydRun> {
    spec.validate()?;
    if rows.len() < spec.k {
        return Err(Error::invalid(format!("kmeans k = {} exceeds the {} rows", spec.k, rows.len())));
    }
    let mut best: Option<LloydRun> = None;
    for init in 0..spec.n_init {
        let mut rng = rng_from_seed(derive_seed(spec.seed, &[init as u64]));
        let run = lloyd(rows, plus_plus(rows, spec.k, &mut rng), spec.max_iter);
        let inertia = *run.inertia_history.last().expect("at least one entry");
        if best.as_ref().is_none_or(|b| inertia < *b.inertia_history.last().expect("entry")) {
            best = Some(run);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

pub fn kmeans_fit(rows: &[Vec<f64>], labels: &[Label], spec: &KmeansSpec) -> Result<KmeansModel> {
    super::check_training(rows, labels)?;
    let run = kmeans_cluster(rows, spec)?;
    let fallback = majority(labels).unwrap_or(Label::NoCrackle);
    let label_map = map_majority(spec.k, &run.assignment, labels, |_| fallback);
    Ok(KmeansModel {
        spec: spec.clone(),
        inertia: *run.inertia_history.last().expect("entry"),
        centroids: run.centroids,
        label_map,
    })
}

impl KmeansModel {
    pub fn predict(&self, row: &[f64]) -> Label {
        self.label_map[nearest(&self.centroids, row).0]
    }
}
