use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// Confusion counts with crackle as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, o: &Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_confusion(c: Confusion) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Metrics { accuracy: ratio(c.tp + c.tn, c.total()), precision, recall, f1, confusion: c }
    }

    /// Arithmetic mean of each score over folds; confusion counts are summed.
    pub fn mean(folds: &[Metrics]) -> Metrics {
        let n = folds.len().max(1) as f64;
        let mut confusion = Confusion::default();
        folds.iter().for_each(|m| confusion.add(&m.confusion));
        Metrics {
            accuracy: folds.iter().map(|m| m.accuracy).sum::<f64>() / n,
            precision: folds.iter().map(|m| m.precision).sum::<f64>() / n,
            recall: folds.iter().map(|m| m.recall).sum::<f64>() / n,
            f1: folds.iter().map(|m| m.f1).sum::<f64>() / n,
            confusion,
        }
    }
}

pub fn compute_metrics(y_true: &[Label], y_pred: &[Label]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::invalid(format!("{} true labels but {} predictions", y_true.len(), y_pred.len())));
    }
    if y_true.is_empty() {
        return Err(Error::invalid("metrics need at least one prediction"));
    }
    let mut c = Confusion::default();
    for (t, p) in y_true.iter().zip(y_pred) {
        match (t.is_positive(), p.is_positive()) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(Metrics::from_confusion(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(bits: &[u8]) -> Vec<Label> {
        bits.iter().map(|&b| Label::from_index(b as usize)).collect()
    }

    #[test]
    fn worked_example() {
        // tp=2 fp=1 fn=1 tn=6
        let t = labels(&[1, 1, 1, 0, 0, 0, 0, 0, 0, 0]);
        let p = labels(&[1, 1, 0, 1, 0, 0, 0, 0, 0, 0]);
        let m = compute_metrics(&t, &p).unwrap();
        assert_eq!(m.confusion, Confusion { tp: 2, fp: 1, fn_: 1, tn: 6 });
        for v in [m.precision, m.recall, m.f1] {
            assert!((v - 2.0 / 3.0).abs() < 1e-15);
        }
        assert!((m.accuracy - 0.8).abs() < 1e-15);
    }

    #[test]
    fn conventions() {
        let m = compute_metrics(&labels(&[1, 0, 1]), &labels(&[1, 0, 1])).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
        let m = compute_metrics(&labels(&[1, 0, 1]), &labels(&[0, 0, 0])).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert!(compute_metrics(&labels(&[1]), &labels(&[1, 0])).is_err());
    }

    proptest! {
        #[test]
        fn matches_confusion_oracle(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..200)) {
            let t: Vec<Label> = pairs.iter().map(|p| Label::from_index(p.0 as usize)).collect();
            let p: Vec<Label> = pairs.iter().map(|p| Label::from_index(p.1 as usize)).collect();
            let m = compute_metrics(&t, &p).unwrap();
            let tp = pairs.iter().filter(|x| **x == (1, 1)).count() as f64;
            let fp = pairs.iter().filter(|x| **x == (0, 1)).count() as f64;
            let fn_ = pairs.iter().filter(|x| **x == (1, 0)).count() as f64;
            let tn = pairs.iter().filter(|x| **x == (0, 0)).count() as f64;
            let prec = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let rec = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            let f1 = if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 };
            prop_assert!((m.accuracy - (tp + tn) / pairs.len() as f64).abs() < 1e-12);
            prop_assert!((m.precision - prec).abs() < 1e-12);
            prop_assert!((m.recall - rec).abs() < 1e-12);
            prop_assert!((m.f1 - f1).abs() < 1e-12);
        }
    }
}
