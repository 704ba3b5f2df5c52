use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::label::Label;
use crate::rng::rng_from_seed;

/// Fold index per item. Each class is shuffled (seeded) and dealt round-robin,
/// the deal continuing where the previous class stopped, so fold sizes differ
/// by at most one and every fold holds ⌊n_c/k⌋ or ⌈n_c/k⌉ of each class.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid("cross-validation needs k >= 2"));
    }
    let mut assignment = vec![0; labels.len()];
    let mut rng = rng_from_seed(seed);
    let mut next = 0;
    for class in [Label::NoCrackle, Label::Crackle] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(Error::invalid(format!(
                "class {class} has {} cycles, fewer than the {k} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(assignment)
}

/// Folds that keep every group (patient) in a single fold. Groups are
/// shuffled, then placed largest first into the currently smallest fold.
pub fn group_kfold(groups: &[String], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid("cross-validation needs k >= 2"));
    }
    let mut names: Vec<&String> = groups.iter().collect();
    names.sort();
    names.dedup();
    if names.len() < k {
        return Err(Error::invalid(format!("{} groups cannot fill {k} folds", names.len())));
    }
    names.shuffle(&mut rng_from_seed(seed));
    let size = |g: &String| groups.iter().filter(|x| *x == g).count();
    let mut sized: Vec<(usize, &String)> = names.into_iter().map(|g| (size(g), g)).collect();
    sized.sort_by_key(|s| std::cmp::Reverse(s.0));
    let mut load = vec![0usize; k];
    let mut fold_of = std::collections::HashMap::new();
    for (n, g) in sized {
        let f = (0..k).min_by_key(|&f| (load[f], f)).expect("k >= 2");
        load[f] += n;
        fold_of.insert(g, f);
    }
    Ok(groups.iter().map(|g| fold_of[g]).collect())
}

/// (train, test) row indices of `fold`.
pub fn split(assignment: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    (0..assignment.len()).partition(|&i| assignment[i] != fold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_ten_items() {
        let labels: Vec<Label> = (0..10).map(|i| Label::from_index(i % 2)).collect();
        let a = stratified_kfold(&labels, 5, 3).unwrap();
        for f in 0..5 {
            let (_, test) = split(&a, f);
            assert_eq!(test.len(), 2);
            assert_eq!(test.iter().filter(|&&i| labels[i].is_positive()).count(), 1);
        }
        assert_eq!(a, stratified_kfold(&labels, 5, 3).unwrap());
    }

    #[test]
    fn small_class_is_an_error() {
        let labels = vec![Label::Crackle, Label::NoCrackle, Label::NoCrackle];
        assert!(stratified_kfold(&labels, 2, 0).is_err());
    }

    #[test]
    fn groups_stay_together() {
        let groups: Vec<String> = (0..40).map(|i| format!("p{}", i % 7)).collect();
        let a = group_kfold(&groups, 5, 1).unwrap();
        for (i, g) in groups.iter().enumerate() {
            for (j, h) in groups.iter().enumerate() {
                if g == h {
                    assert_eq!(a[i], a[j]);
                }
            }
        }
        assert!((0..5).all(|f| a.contains(&f)));
        assert!(group_kfold(&groups[..3], 5, 1).is_err());
    }

    proptest! {
        #[test]
        fn partition_properties(n_pos in 5usize..40, n_neg in 5usize..40, k in 2usize..6, seed in 0u64..100) {
            let mut labels = vec![Label::Crackle; n_pos];
            labels.extend(vec![Label::NoCrackle; n_neg]);
            let a = stratified_kfold(&labels, k, seed).unwrap();
            let n = labels.len();
            let sizes: Vec<usize> = (0..k).map(|f| a.iter().filter(|&&x| x == f).count()).collect();
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let global = n_pos as f64 / n as f64;
            for (f, &size) in sizes.iter().enumerate() {
                let pos = (0..n).filter(|&i| a[i] == f && labels[i].is_positive()).count();
                prop_assert!((pos as f64 / size as f64 - global).abs() <= 1.0 / size as f64 + 1e-12);
            }
        }
    }
}
