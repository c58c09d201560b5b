use std::collections::HashMap;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

use super::boosted::{fit_boosted, BoostConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub folds: usize,
    pub boost: BoostConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            folds: 3,
            boost: BoostConfig::default(),
        }
    }
}

/// Resamples `rows` to exactly `count` rows: without replacement when
/// shrinking, all rows plus draws with replacement when growing.
fn resample_to(rows: &Matrix, count: usize, rng: &mut impl Rng) -> Matrix {
    let n = rows.rows();
    let idx: Vec<usize> = if count <= n {
        let mut i = sample(rng, n, count).into_vec();
        i.sort_unstable();
        i
    } else {
        (0..n).chain((n..count).map(|_| rng.gen_range(0..n))).collect()
    };
    rows.select_rows(&idx)
}

/// Test-index sets for `k` folds in which identical rows always share a
/// fold. Groups are dealt in shuffled order to the currently smallest fold.
fn grouped_folds(features: &Matrix, k: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for (i, row) in features.iter_rows().enumerate() {
        let key: Vec<u64> = row.iter().map(|v| (v + 0.0).to_bits()).collect();
        let g = *seen.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups.shuffle(rng);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for g in groups {
        let target = (0..k).min_by_key(|&f| (folds[f].len(), f)).unwrap();
        folds[target].extend(g);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    folds
}

/// Cross-validated accuracy of boosted trees told to separate real rows
/// from generated ones. The generated set is resampled to the real count,
/// so 0.5 means indistinguishable. Identical rows are kept in the same fold
/// so exact duplicates cannot leak labels across the split.
pub fn probe_accuracy(real: &Matrix, generated: &Matrix, config: &ProbeConfig, seed: u64) -> Result<f64> {
    if real.rows() < config.folds || generated.rows() == 0 {
        return Err(Error::data(format!(
            "probe needs at least {} real rows and one generated row, got {} and {}",
            config.folds,
            real.rows(),
            generated.rows()
        )));
    }
    if real.cols() != generated.cols() {
        return Err(Error::Shape {
            op: "probe_accuracy",
            left: real.shape(),
            right: generated.shape(),
        });
    }
    if !generated.is_finite() {
        return Err(Error::data("generated rows contain non-finite values"));
    }
    let mut rng = rng::substream(seed, &[rng::tag("probe")]);
    let fake = resample_to(generated, real.rows(), &mut rng);
    let features = Matrix::vstack(&[real, &fake])?;
    let labels: Vec<u8> = (0..features.rows()).map(|i| (i < real.rows()) as u8).collect();
    let data = Dataset::unnamed(features, labels)?;
    let mut correct = 0usize;
    for test_rows in grouped_folds(&data.features, config.folds, &mut rng) {
        let mut in_test = vec![false; data.len()];
        test_rows.iter().for_each(|&i| in_test[i] = true);
        let train_rows: Vec<usize> = (0..data.len()).filter(|&i| !in_test[i]).collect();
        let train = data.subset(&train_rows);
        if train.require_both_classes().is_err() || test_rows.is_empty() {
            return Err(Error::data("probe fold lost a class; inputs are too small or too repetitive"));
        }
        let model = fit_boosted(&train, config.boost)?;
        let test = data.subset(&test_rows);
        let p = model.predict_proba(&test.features)?;
        correct += p.iter().zip(&test.labels).filter(|(&p, &y)| (p >= 0.5) == (y == 1)).count();
    }
    Ok(correct as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gan::sample_noise;

    #[test]
    fn shuffled_copy_is_indistinguishable() {
        let real = sample_noise(300, 2, &mut rng::stream(1));
        let mut order: Vec<usize> = (0..300).collect();
        order.reverse();
        let acc = probe_accuracy(&real, &real.select_rows(&order), &ProbeConfig::default(), 5).unwrap();
        assert!((acc - 0.5).abs() <= 0.1, "{acc}");
    }

    #[test]
    fn offset_copy_is_detected() {
        let real = sample_noise(300, 2, &mut rng::stream(2));
        let shifted = real.map(|v| v + 10.0);
        // a single threshold halfway along the shift separates the two sets
        let hits = real.column(0).iter().filter(|&&v| v <= 5.0).count()
            + shifted.column(0).iter().filter(|&&v| v > 5.0).count();
        assert!(hits as f64 / 600.0 >= 0.95);
        let acc = probe_accuracy(&real, &shifted, &ProbeConfig::default(), 5).unwrap();
        assert!(acc >= 0.95, "{acc}");
    }

    #[test]
    fn resampling_hits_the_count() {
        let rows = Matrix::from_fn(5, 1, |r, _| r as f64);
        let mut rng = rng::stream(0);
        assert_eq!(resample_to(&rows, 3, &mut rng).rows(), 3);
        let grown = resample_to(&rows, 12, &mut rng);
        assert_eq!(grown.rows(), 12);
        assert_eq!(grown.select_rows(&[0, 1, 2, 3, 4]), rows);
    }

    #[test]
    fn duplicates_share_a_fold() {
        let rows = Matrix::from_fn(40, 2, |r, c| ((r % 10) * (c + 1)) as f64);
        let folds = grouped_folds(&rows, 3, &mut rng::stream(4));
        let fold_of = |i: usize| folds.iter().position(|f| f.contains(&i)).unwrap();
        for i in 0..40 {
            assert_eq!(fold_of(i), fold_of(i % 10));
        }
        assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), 40);
    }

    #[test]
    fn degenerate_inputs() {
        let real = Matrix::zeros(2, 2);
        assert!(probe_accuracy(&real, &Matrix::zeros(4, 2), &ProbeConfig::default(), 0).is_err());
        assert!(probe_accuracy(&Matrix::zeros(9, 2), &Matrix::zeros(0, 2), &ProbeConfig::default(), 0).is_err());
        assert!(probe_accuracy(&Matrix::zeros(9, 2), &Matrix::zeros(9, 3), &ProbeConfig::default(), 0).is_err());
    }
}
