//! RBF support vector machine trained by Platt's sequential minimal optimisation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSpec {
    pub c: f64,
    pub gamma: f64,
    pub tolerance: f64,
    /// Maximum number of sweeps over the whole training set.
    pub max_passes: usize,
}

impl Default for SvmSpec {
    fn default() -> Self {
        SvmSpec { c: 1.0, gamma: 0.1, tolerance: 1e-3, max_passes: 10 }
    }
}

impl SvmSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.gamma > 0.0) || !(self.tolerance > 0.0) {
            return Err(Error::invalid("svm C, gamma and tolerance must be > 0"));
        }
        if self.max_passes == 0 {
            return Err(Error::invalid("svm max_passes must be >= 1"));
        }
        Ok(())
    }
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Dual solution. Decision values are `Σ αᵢ yᵢ K(xᵢ, x) − b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alphas: Vec<f64>,
    pub b: f64,
    pub converged: bool,
    pub passes: usize,
}

const ALPHA_EPS: f64 = 1e-8;
const STEP_EPS: f64 = 1e-6;

struct Smo<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    c: f64,
    gamma: f64,
    tol: f64,
    alpha: Vec<f64>,
    b: f64,
    err: Vec<f64>,
}

impl Smo<'_> {
    fn k(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            rbf(&self.x[i], &self.x[j], self.gamma)
        }
    }

    fn non_bound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.err[i1], self.err[i2]);
        let s = y1 * y2;
        let (lo, hi) = if y1 != y2 {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        } else {
            ((a2 + a1 - self.c).max(0.0), (a2 + a1).min(self.c))
        };
        if hi - lo < ALPHA_EPS {
            return false;
        }
        let (k11, k12, k22) = (self.k(i1, i1), self.k(i1, i2), self.k(i2, i2));
        let eta = k11 + k22 - 2.0 * k12;
        let mut new2 = if eta > 0.0 {
            (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            let f1 = y1 * (e1 + self.b) - a1 * k11 - s * a2 * k12;
            let f2 = y2 * (e2 + self.b) - s * a1 * k12 - a2 * k22;
            let obj = |a: f64| {
                let a1x = a1 + s * (a2 - a);
                a1x * f1 + a * f2 + 0.5 * a1x * a1x * k11 + 0.5 * a * a * k22 + s * a * a1x * k12
            };
            let (ol, oh) = (obj(lo), obj(hi));
            if ol < oh - STEP_EPS {
                lo
            } else if ol > oh + STEP_EPS {
                hi
            } else {
                a2
            }
        };
        if new2 < ALPHA_EPS {
            new2 = 0.0;
        } else if new2 > self.c - ALPHA_EPS {
            new2 = self.c;
        }
        if (new2 - a2).abs() < STEP_EPS * (new2 + a2 + STEP_EPS) {
            return false;
        }
        let mut new1 = a1 + s * (a2 - new2);
        if new1 < ALPHA_EPS {
            new1 = 0.0;
        } else if new1 > self.c - ALPHA_EPS {
            new1 = self.c;
        }
        let (d1, d2) = (y1 * (new1 - a1), y2 * (new2 - a2));
        let b1 = e1 + d1 * k11 + d2 * k12 + self.b;
        let b2 = e2 + d1 * k12 + d2 * k22 + self.b;
        let new_b = if new1 > 0.0 && new1 < self.c {
            b1
        } else if new2 > 0.0 && new2 < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = new_b - self.b;
        for i in 0..self.x.len() {
            let ki1 = if d1 != 0.0 { self.k(i1, i) } else { 0.0 };
            self.err[i] += d1 * ki1 + d2 * self.k(i2, i) - db;
        }
        self.alpha[i1] = new1;
        self.alpha[i2] = new2;
        self.b = new_b;
        true
    }

    fn violates_kkt(&self, i: usize) -> bool {
        let r = self.err[i] * self.y[i];
        (r < -self.tol && self.alpha[i] < self.c) || (r > self.tol && self.alpha[i] > 0.0)
    }

    fn examine(&mut self, i2: usize) -> bool {
        if !self.violates_kkt(i2) {
            return false;
        }
        let n = self.x.len();
        let e2 = self.err[i2];
        let nb: Vec<usize> = (0..n).filter(|&i| self.non_bound(i)).collect();
        if nb.len() > 1 {
            let i1 = nb
                .iter()
                .copied()
                .max_by(|&a, &b| (self.err[a] - e2).abs().total_cmp(&(self.err[b] - e2).abs()).then(b.cmp(&a)))
                .expect("non-empty");
            if self.take_step(i1, i2) {
                return true;
            }
        }
        let start = i2 % n;
        for &i1 in nb.iter().cycle().skip(start % nb.len().max(1)).take(nb.len()) {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        (0..n).map(|k| (start + k) % n).any(|i1| self.take_step(i1, i2))
    }
}

/// Solve the soft-margin dual for labels `y ∈ {−1, +1}`.
pub fn smo_solve(x: &[Vec<f64>], y: &[f64], spec: &SvmSpec) -> SmoSolution {
    let n = x.len();
    let mut smo = Smo {
        x,
        y,
        c: spec.c,
        gamma: spec.gamma,
        tol: spec.tolerance,
        alpha: vec![0.0; n],
        b: 0.0,
        err: y.iter().map(|v| -v).collect(),
    };
    let mut examine_all = true;
    let mut passes = 0;
    let mut converged = false;
    loop {
        let changed = if examine_all {
            passes += 1;
            (0..n).filter(|&i| smo.examine(i)).count()
        } else {
            let nb: Vec<usize> = (0..n).filter(|&i| smo.non_bound(i)).collect();
            nb.into_iter().filter(|&i| smo.examine(i)).count()
        };
        if examine_all {
            if changed == 0 {
                converged = true;
                break;
            }
            examine_all = false;
        } else if changed == 0 {
            if passes >= spec.max_passes {
                break;
            }
            examine_all = true;
        }
    }
    SmoSolution { alphas: smo.alpha, b: smo.b, converged, passes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub spec: SvmSpec,
    pub support_vectors: Vec<Vec<f64>>,
    /// αᵢ·yᵢ per support vector.
    pub coef: Vec<f64>,
    pub b: f64,
    pub converged: bool,
    pub passes: usize,
}

impl SvmModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.support_vectors.iter().zip(&self.coef).map(|(sv, c)| c * rbf(sv, row, self.spec.gamma)).sum::<f64>() - self.b
    }

    pub fn predict(&self, row: &[f64]) -> Label {
        if self.decision(row) > 0.0 {
            Label::Crackle
        } else {
            Label::NoCrackle
        }
    }
}

pub fn svm_fit(rows: &[Vec<f64>], labels: &[Label], spec: &SvmSpec) -> Result<SvmModel> {
    spec.validate()?;
    super::check_training(rows, labels)?;
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    if y.iter().all(|&v| v == y[0]) {
        // One class: a constant decision of that sign.
        return Ok(SvmModel {
            spec: spec.clone(),
            support_vectors: Vec::new(),
            coef: Vec::new(),
            b: -y[0],
            converged: true,
            passes: 0,
        });
    }
    let sol = smo_solve(rows, &y, spec);
    if !sol.converged {
        log::warn!(
            "SMO stopped after {} passes without meeting the KKT tolerance {}; using the best-effort model",
            sol.passes,
            spec.tolerance
        );
    }
    let (support_vectors, coef) = sol
        .alphas
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, &a)| (rows[i].clone(), a * y[i]))
        .unzip();
    Ok(SvmModel { spec: spec.clone(), support_vectors, coef, b: sol.b, converged: sol.converged, passes: sol.passes })
}

/// Fraction of training points whose decision value meets the KKT conditions
/// within `tol`.
pub fn kkt_fraction(x: &[Vec<f64>], y: &[f64], sol: &SmoSolution, spec: &SvmSpec, tol: f64) -> f64 {
    let ok = (0..x.len())
        .filter(|&i| {
            let u: f64 = (0..x.len())
                .filter(|&j| sol.alphas[j] > 0.0)
                .map(|j| sol.alphas[j] * y[j] * rbf(&x[j], &x[i], spec.gamma))
                .sum::<f64>()
                - sol.b;
            let m = y[i] * u;
            let a = sol.alphas[i];
            if a <= 0.0 {
                m >= 1.0 - tol
            } else if a >= spec.c {
                m <= 1.0 + tol
            } else {
                (m - 1.0).abs() <= tol
            }
        })
        .count();
    ok as f64 / x.len() as f64
}
