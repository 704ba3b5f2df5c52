use std::cmp::Ordering;

use super::{SelectorModel, SelectorParams};
use crate::error::{Error, Result};
use crate::label::Label;

/// χ² statistic of each non-negative feature against the two classes,
/// using per-class feature sums as observed counts.
pub fn chi2_scores(rows: &[Vec<f64>], labels: &[Label]) -> Result<Vec<f64>> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::invalid("chi2 needs one label per row and at least one row"));
    }
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mut class_n = [0usize; 2];
    let mut observed = [vec![0.0; d], vec![0.0; d]];
    for (row, label) in rows.iter().zip(labels) {
        if row.len() != d {
            return Err(Error::invalid("ragged feature rows"));
        }
        let c = label.index();
        class_n[c] += 1;
        for (o, &x) in observed[c].iter_mut().zip(row) {
            if !(x >= 0.0) {
                return Err(Error::invalid(format!("chi2 requires non-negative features, found {x}")));
            }
            *o += x;
        }
    }
    if class_n.contains(&0) {
        return Err(Error::invalid("chi2 needs rows from both classes"));
    }
    Ok((0..d)
        .map(|j| {
            let total = observed[0][j] + observed[1][j];
            (0..2)
                .map(|c| {
                    let expected = total * class_n[c] as f64 / n;
                    if expected > 0.0 {
                        (observed[c][j] - expected).powi(2) / expected
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect())
}

/// Keep the `k` highest-scoring columns; equal scores prefer the lower index.
pub fn chi2_fit(rows: &[Vec<f64>], labels: &[Label], k: usize) -> Result<SelectorModel> {
    let scores = chi2_scores(rows, labels)?;
    let d = scores.len();
    if k == 0 || k > d {
        return Err(Error::invalid(format!("chi2 k = {k} must be in 1..={d}")));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    order.truncate(k);
    let picked = order.iter().map(|&j| scores[j]).collect();
    Ok(SelectorModel { input_dim: d, output_dim: k, params: SelectorParams::Chi2 { indices: order, scores: picked } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(bits: &[usize]) -> Vec<Label> {
        bits.iter().map(|&b| Label::from_index(b)).collect()
    }

    #[test]
    fn toy_selection_matches_hand_computation() {
        // columns: label copy, label complement, constant
        let y = [0, 1, 0, 1, 1, 0];
        let rows: Vec<Vec<f64>> = y.iter().map(|&b| vec![b as f64, 1.0 - b as f64, 0.5]).collect();
        let scores = chi2_scores(&rows, &labels(&y)).unwrap();
        // copy: O = (0, 3), E = (1.5, 1.5) → 1.5 + 1.5 = 3; complement symmetric.
        assert!((scores[0] - 3.0).abs() < 1e-12);
        assert!((scores[1] - 3.0).abs() < 1e-12);
        assert_eq!(scores[2], 0.0);
        let m = chi2_fit(&rows, &labels(&y), 2).unwrap();
        match m.params {
            SelectorParams::Chi2 { indices, .. } => assert_eq!(indices, vec![0, 1]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn unbalanced_hand_computation() {
        // n = 4, n0 = 1, n1 = 3; x = [0.2 | 0.4, 0.6, 0.8]; total 2.0
        let rows = vec![vec![0.2], vec![0.4], vec![0.6], vec![0.8]];
        let s = chi2_scores(&rows, &labels(&[0, 1, 1, 1])).unwrap()[0];
        let (e0, e1) = (2.0 * 0.25, 2.0 * 0.75);
        let want = (0.2f64 - e0).powi(2) / e0 + (1.8f64 - e1).powi(2) / e1;
        assert!((s - want).abs() < 1e-12);
    }

    #[test]
    fn label_copy_beats_constant() {
        let y = [0, 1, 1, 0, 1, 0, 0, 1];
        let rows: Vec<Vec<f64>> = y.iter().map(|&b| vec![0.7, b as f64]).collect();
        let m = chi2_fit(&rows, &labels(&y), 1).unwrap();
        assert!(matches!(m.params, SelectorParams::Chi2 { ref indices, .. } if indices == &vec![1]));
    }

    #[test]
    fn errors() {
        let rows = vec![vec![0.1, 0.2], vec![0.3, 0.4]];
        assert!(chi2_fit(&rows, &labels(&[0, 1]), 3).is_err());
        assert!(chi2_fit(&rows, &labels(&[1, 1]), 1).is_err());
        assert!(chi2_fit(&[vec![-0.1], vec![0.2]], &labels(&[0, 1]), 1).is_err());
    }

    proptest! {
        #[test]
        fn row_order_and_duplicates_do_not_matter(
            data in prop::collection::vec((prop::collection::vec(0.0f64..1.0, 4), 0usize..2), 4..30),
            rot in 0usize..30,
        ) {
            let mut data = data;
            data[0].1 = 0;
            data[1].1 = 1;
            let rows: Vec<Vec<f64>> = data.iter().map(|d| d.0.clone()).collect();
            let ys: Vec<Label> = data.iter().map(|d| Label::from_index(d.1)).collect();
            let base = chi2_scores(&rows, &ys).unwrap();
            let r = rot % rows.len();
            let mut rrows = rows.clone();
            let mut rys = ys.clone();
            rrows.rotate_left(r);
            rys.rotate_left(r);
            let rotated = chi2_scores(&rrows, &rys).unwrap();
            for (a, b) in base.iter().zip(&rotated) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }

            let m = chi2_fit(&rows, &ys, 2).unwrap();
            let SelectorParams::Chi2 { indices, .. } = &m.params else { unreachable!() };
            let unpicked = (0..4).find(|j| !indices.contains(j)).unwrap();
            let wider: Vec<Vec<f64>> = rows.iter().map(|r| { let mut r = r.clone(); r.push(r[unpicked]); r }).collect();
            let m2 = chi2_fit(&wider, &ys, 2).unwrap();
            let SelectorParams::Chi2 { indices: i2, .. } = &m2.params else { unreachable!() };
            prop_assert_eq!(indices, i2);
        }
    }
}
