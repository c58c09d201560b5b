use rand::seq::SliceRandom;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// One train/test partition. Indices are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn shuffled_class(labels: &[u8], label: u8, rng: &mut rng::Stream) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
    idx.shuffle(rng);
    idx
}

/// Stratified k-fold split over binary labels. Each class is shuffled and
/// dealt round-robin; the deal for the second class continues where the
/// first stopped so fold sizes stay within one of each other.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::param(format!("cross-validation needs k >= 2, got {k}")));
    }
    let smallest = [0u8, 1].map(|c| labels.iter().filter(|&&l| l == c).count());
    let minority = smallest.into_iter().min().unwrap();
    if minority < k {
        return Err(Error::data(format!(
            "{k}-fold cross-validation needs at least {k} rows of each class, smallest class has {minority}"
        )));
    }
    let mut rng = rng::substream(seed, &[rng::tag("folds")]);
    let mut assignment = vec![0usize; labels.len()];
    let mut next = 0;
    for label in [1u8, 0] {
        for i in shuffled_class(labels, label, &mut rng) {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok((0..k)
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| assignment[i] == fold);
            FoldSplit { fold, train, test }
        })
        .collect())
}

pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    stratified_folds(&dataset.labels, k, seed)
}

/// Stratified holdout: `round(test_fraction · n_c)` rows of each class go
/// to the test side.
pub fn stratified_split(labels: &[u8], test_fraction: f64, seed: u64) -> Result<FoldSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::param(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let mut rng = rng::substream(seed, &[rng::tag("holdout")]);
    let mut test = Vec::new();
    for label in [1u8, 0] {
        let idx = shuffled_class(labels, label, &mut rng);
        let take = (test_fraction * idx.len() as f64).round() as usize;
        if take == 0 || take == idx.len() {
            return Err(Error::data(format!(
                "class {label} has {} rows, too few for a {test_fraction} holdout",
                idx.len()
            )));
        }
        test.extend_from_slice(&idx[..take]);
    }
    test.sort_unstable();
    let mut is_test = vec![false; labels.len()];
    test.iter().for_each(|&i| is_test[i] = true);
    let train = (0..labels.len()).filter(|&i| !is_test[i]).collect();
    Ok(FoldSplit { fold: 0, train, test })
}
