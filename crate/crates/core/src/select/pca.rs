use nalgebra::DMatrix;

use super::{SelectorModel, SelectorParams};
use crate::error::{Error, Result};

/// Principal components from the thin SVD of the mean-centred data.
///
/// Each component is flipped so its largest-magnitude loading is positive.
pub fn pca_fit(rows: &[Vec<f64>], n_components: usize) -> Result<SelectorModel> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if n < 2 || d == 0 {
        return Err(Error::invalid("PCA needs at least 2 rows and 1 feature"));
    }
    if n_components == 0 || n_components > (n - 1).min(d) {
        return Err(Error::invalid(format!(
            "PCA n_components = {n_components} must be in 1..={}",
            (n - 1).min(d)
        )));
    }
    let mut mean = vec![0.0; d];
    for r in rows {
        if r.len() != d {
            return Err(Error::invalid("ragged feature rows"));
        }
        mean.iter_mut().zip(r).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centred = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
    let svd = centred.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Degenerate("SVD did not produce right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));

    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
    let mut components = Vec::with_capacity(n_components);
    let mut explained_variance = Vec::with_capacity(n_components);
    let mut explained_variance_ratio = Vec::with_capacity(n_components);
    for &k in order.iter().take(n_components) {
        let mut c: Vec<f64> = v_t.row(k).iter().copied().collect();
        let lead = c.iter().copied().fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if lead < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        let s2 = svd.singular_values[k].powi(2);
        components.push(c);
        explained_variance.push(s2 / (n - 1) as f64);
        explained_variance_ratio.push(if total > 0.0 { s2 / total } else { 0.0 });
    }
    Ok(SelectorModel {
        input_dim: d,
        output_dim: n_components,
        params: SelectorParams::Pca { mean, components, explained_variance, explained_variance_ratio },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::stats::std_pop;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal};

    fn parts(m: &SelectorModel) -> (&Vec<Vec<f64>>, &Vec<f64>, &Vec<f64>) {
        match &m.params {
            SelectorParams::Pca { components, explained_variance, explained_variance_ratio, .. } => {
                (components, explained_variance, explained_variance_ratio)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn points_on_a_line_are_rank_one() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 3.0 - 2.0 * i as f64]).collect();
        let m = pca_fit(&rows, 2).unwrap();
        let (_, _, ratio) = parts(&m);
        assert!((ratio[0] - 1.0).abs() < 1e-10);
    }

    /// Sample covariance of [[2,1],[1,2]] has eigenvectors (1,1)/√2 and (1,−1)/√2.
    #[test]
    fn matches_closed_form_2x2_eigenvectors() {
        // Whitened sample so the sample covariance is exactly [[2,1],[1,2]].
        let mut rng = rng_from_seed(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 500;
        let mut z: Vec<[f64; 2]> = (0..n).map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)]).collect();
        for k in 0..2 {
            let m = z.iter().map(|p| p[k]).sum::<f64>() / n as f64;
            z.iter_mut().for_each(|p| p[k] -= m);
        }
        // Gram–Schmidt on the two columns, scaled to unit sample variance.
        let dot = |a: usize, b: usize, z: &[[f64; 2]]| z.iter().map(|p| p[a] * p[b]).sum::<f64>();
        let s0 = (dot(0, 0, &z) / (n - 1) as f64).sqrt();
        z.iter_mut().for_each(|p| p[0] /= s0);
        let proj = dot(0, 1, &z) / dot(0, 0, &z);
        z.iter_mut().for_each(|p| p[1] -= proj * p[0]);
        let s1 = (dot(1, 1, &z) / (n - 1) as f64).sqrt();
        z.iter_mut().for_each(|p| p[1] /= s1);
        // L = chol([[2,1],[1,2]])
        let (l00, l10, l11) = (2f64.sqrt(), 1.0 / 2f64.sqrt(), 1.5f64.sqrt());
        let rows: Vec<Vec<f64>> = z.iter().map(|p| vec![l00 * p[0], l10 * p[0] + l11 * p[1]]).collect();

        let m = pca_fit(&rows, 2).unwrap();
        let (comps, var, _) = parts(&m);
        let h = 1.0 / 2f64.sqrt();
        assert!((comps[0][0] - h).abs() < 1e-6 && (comps[0][1] - h).abs() < 1e-6, "{comps:?}");
        // Largest-magnitude loading positive; for (1,−1)/√2 both tie, so either sign
        // of the pair with a positive first entry.
        assert!((comps[1][0].abs() - h).abs() < 1e-6 && (comps[1][0] + comps[1][1]).abs() < 1e-6);
        assert!((var[0] - 3.0).abs() < 1e-6 && (var[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn too_many_components_is_an_error() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!(pca_fit(&rows, 3).is_err());
        assert!(pca_fit(&rows, 0).is_err());
        assert!(pca_fit(&rows, 2).is_ok());
    }

    fn random_rows(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
        let mut rng = rng_from_seed(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        (0..n).map(|i| (0..d).map(|j| normal.sample(&mut rng) * (j + 1) as f64 + 0.1 * i as f64).collect()).collect()
    }

    #[test]
    fn full_rank_transform_inverts() {
        let rows = random_rows(2, 12, 5);
        let m = pca_fit(&rows, 5).unwrap();
        for r in &rows {
            let back = m.pca_inverse(&m.transform_row(r).unwrap()).unwrap();
            for (a, b) in back.iter().zip(r) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn invariants(seed in 0u64..500, n in 4usize..30, d in 1usize..7) {
            let rows = random_rows(seed, n, d);
            let k = (n - 1).min(d);
            let m = pca_fit(&rows, k).unwrap();
            let (comps, var, ratio) = parts(&m);
            for (a, ca) in comps.iter().enumerate() {
                for (b, cb) in comps.iter().enumerate() {
                    let dot: f64 = ca.iter().zip(cb).map(|(x, y)| x * y).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-8);
                }
                let lead = ca.iter().copied().fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
                prop_assert!(lead > 0.0);
            }
            prop_assert!(ratio.windows(2).all(|w| w[0] >= w[1] - 1e-15));
            let reduced = m.transform(&rows).unwrap();
            for c in 0..k {
                let col: Vec<f64> = reduced.iter().map(|r| r[c]).collect();
                let s = std_pop(&col);
                let sample_var = s * s * n as f64 / (n - 1) as f64;
                prop_assert!((sample_var - var[c]).abs() <= 1e-8 * var[c].max(1.0));
            }
        }
    }
}
