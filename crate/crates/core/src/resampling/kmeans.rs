use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};
use crate::rng;

const MAX_ITERATIONS: usize = 100;

/// Cluster assignment used as the condition label of each minority row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionLabels {
    pub labels: Vec<usize>,
    pub centroids: Matrix,
    /// Within-cluster sum of squares after each centroid update.
    pub objective: Vec<f64>,
}

impl ConditionLabels {
    pub fn classes(&self) -> usize {
        self.centroids.rows()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.classes()];
        self.labels.iter().for_each(|&l| c[l] += 1);
        c
    }
}

fn closest(centroids: &Matrix, row: &[f64]) -> (usize, f64) {
    (0..centroids.rows())
        .map(|c| (c, squared_distance(centroids.row(c), row)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn seed_centroids(data: &Matrix, classes: usize, rng: &mut impl Rng) -> Matrix {
    let n = data.rows();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| squared_distance(data.row(i), data.row(chosen[0]))).collect();
    while chosen.len() < classes {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(data.row(i), data.row(next)));
        }
    }
    data.select_rows(&chosen)
}

fn update_centroids(data: &Matrix, labels: &[usize], classes: usize) -> Matrix {
    let mut sums = Matrix::zeros(classes, data.cols());
    let mut counts = vec![0usize; classes];
    for (row, &l) in data.iter_rows().zip(labels) {
        counts[l] += 1;
        sums.row_mut(l).iter_mut().zip(row).for_each(|(s, v)| *s += v);
    }
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 {
            sums.row_mut(c).iter_mut().for_each(|s| *s /= n as f64);
        }
    }
    sums
}

/// Moves the farthest member of the largest cluster into each empty cluster.
fn repair_empty(data: &Matrix, labels: &mut [usize], centroids: &Matrix) {
    let classes = centroids.rows();
    loop {
        let mut counts = vec![0usize; classes];
        labels.iter().for_each(|&l| counts[l] += 1);
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let largest = (0..classes).max_by_key(|&c| (counts[c], std::cmp::Reverse(c))).unwrap();
        let far = (0..data.rows())
            .filter(|&i| labels[i] == largest)
            .map(|i| (i, squared_distance(data.row(i), centroids.row(largest))))
            .fold((usize::MAX, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0;
        labels[far] = empty;
    }
}

fn wcss(data: &Matrix, labels: &[usize], centroids: &Matrix) -> f64 {
    data.iter_rows()
        .zip(labels)
        .map(|(r, &l)| squared_distance(r, centroids.row(l)))
        .sum()
}

/// Lloyd's iterations from k-means++ seeding, until the assignment stops
/// changing or 100 iterations pass.
pub fn kmeans(data: &Matrix, classes: usize, seed: u64) -> Result<ConditionLabels> {
    if classes == 0 {
        return Err(Error::param("k-means needs at least one class"));
    }
    if data.rows() < classes {
        return Err(Error::param(format!(
            "k-means with {classes} classes needs at least {classes} rows, got {}",
            data.rows()
        )));
    }
    let mut rng = rng::substream(seed, &[rng::tag("kmeans")]);
    let mut centroids = seed_centroids(data, classes, &mut rng);
    let mut labels: Vec<usize> = Vec::new();
    let mut objective = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<usize> = data.iter_rows().map(|r| closest(&centroids, r).0).collect();
        repair_empty(data, &mut next, &centroids);
        let converged = next == labels;
        labels = next;
        centroids = update_centroids(data, &labels, classes);
        objective.push(wcss(data, &labels, &centroids));
        if converged {
            break;
        }
    }
    Ok(ConditionLabels {
        labels,
        centroids,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gan::sample_noise;

    #[test]
    fn separated_pairs() {
        let data = Matrix::from_rows(&[[0.0, 0.0], [10.0, 10.0], [0.0, 1.0], [10.0, 11.0]]).unwrap();
        for seed in 0..10 {
            let out = kmeans(&data, 2, seed).unwrap();
            let mut cents: Vec<Vec<f64>> = out.centroids.iter_rows().map(|r| r.to_vec()).collect();
            cents.sort_by(|a, b| a[0].total_cmp(&b[0]));
            assert_eq!(cents, vec![vec![0.0, 0.5], vec![10.0, 10.5]]);
            assert_eq!(out.labels[0], out.labels[2]);
            assert_ne!(out.labels[0], out.labels[1]);
        }
    }

    #[test]
    fn single_class_is_column_mean() {
        let data = Matrix::from_fn(9, 3, |r, c| (r * r + c) as f64);
        let out = kmeans(&data, 1, 0).unwrap();
        assert_eq!(out.centroids.row(0), data.column_means().as_slice());
        assert!(out.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn objective_never_increases() {
        for seed in 0..20 {
            let data = sample_noise(200, 3, &mut rng::stream(seed));
            let out = kmeans(&data, 5, seed).unwrap();
            for w in out.objective.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "seed {seed}: {:?}", out.objective);
            }
        }
    }

    #[test]
    fn clusters_are_never_empty() {
        // duplicates force degenerate seeding
        let data = Matrix::from_rows(&[[1.0], [1.0], [1.0], [1.0], [5.0]]).unwrap();
        let out = kmeans(&data, 3, 2).unwrap();
        assert!(out.counts().iter().all(|&c| c > 0));
        assert_eq!(out.labels.len(), 5);
    }

    #[test]
    fn too_few_rows() {
        assert!(kmeans(&Matrix::zeros(2, 2), 3, 0).is_err());
    }
}
