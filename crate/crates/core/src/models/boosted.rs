use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{sigmoid, Matrix};
use crate::par;

use super::logistic::{check_width, softplus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            max_depth: 4,
            shrinkage: 0.1,
            lambda: 1.0,
        }
    }
}

/// Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(f64),
}

/// Regression tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostedTreesModel {
    pub base_score: f64,
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub config: BoostConfig,
}

impl BoostedTreesModel {
    /// Raw log-odds before the sigmoid.
    pub fn margins(&self, features: &Matrix) -> Result<Vec<f64>> {
        check_width(self.n_features, features)?;
        Ok(features
            .iter_rows()
            .map(|r| self.base_score + self.trees.iter().map(|t| t.predict_row(r)).sum::<f64>())
            .collect())
    }

    pub fn predict_proba(&self, features: &Matrix) -> Result<Vec<f64>> {
        Ok(self.margins(features)?.into_iter().map(sigmoid).collect())
    }

    /// Mean log-loss on `(features, labels)`.
    pub fn log_loss(&self, features: &Matrix, labels: &[u8]) -> Result<f64> {
        let m = self.margins(features)?;
        Ok(m.iter().zip(labels).map(|(&z, &y)| softplus(z) - y as f64 * z).sum::<f64>() / labels.len() as f64)
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Best split per open node for one feature, scanning its presorted rows.
fn best_for_feature(
    feature: usize,
    column: &[f64],
    order: &[usize],
    node_of: &[Option<usize>],
    totals: &[(f64, f64)],
    grad: &[f64],
    hess: &[f64],
    lambda: f64,
) -> Vec<Option<Candidate>> {
    let k = totals.len();
    let mut left = vec![(0.0, 0.0); k];
    let mut last: Vec<Option<f64>> = vec![None; k];
    let mut best: Vec<Option<Candidate>> = vec![None; k];
    for &i in order {
        let Some(node) = node_of[i] else { continue };
        let x = column[i];
        if let Some(prev) = last[node] {
            if x > prev {
                let (gl, hl) = left[node];
                let (g, h) = totals[node];
                let gain = 0.5 * (score(gl, hl, lambda) + score(g - gl, h - hl, lambda) - score(g, h, lambda));
                if gain > 1e-12 && best[node].is_none_or(|b| gain > b.gain) {
                    let mut threshold = prev + (x - prev) / 2.0;
                    if threshold >= x {
                        threshold = prev;
                    }
                    best[node] = Some(Candidate {
                        gain,
                        feature,
                        threshold,
                    });
                }
            }
        }
        left[node].0 += grad[i];
        left[node].1 += hess[i];
        last[node] = Some(x);
    }
    best
}

/// Level-wise exact greedy tree on gradient statistics. Ties in gain go to
/// the lowest feature, then the lowest threshold.
fn grow_tree(
    columns: &[Vec<f64>],
    orders: &[Vec<usize>],
    grad: &[f64],
    hess: &[f64],
    config: &BoostConfig,
) -> Tree {
    let n = grad.len();
    let leaf = |g: f64, h: f64| Node::Leaf(-g / (h + config.lambda) * config.shrinkage);
    let mut nodes = vec![Node::Leaf(0.0)];
    // open[j] is the arena index of the j-th node still being split
    let mut open = vec![0usize];
    let mut node_of: Vec<Option<usize>> = vec![Some(0); n];
    let mut totals = vec![(grad.iter().sum::<f64>(), hess.iter().sum::<f64>())];
    for depth in 0..=config.max_depth {
        if open.is_empty() {
            break;
        }
        let best: Vec<Option<Candidate>> = if depth == config.max_depth {
            vec![None; open.len()]
        } else {
            let per_feature = par::map_range(columns.len(), |f| {
                best_for_feature(f, &columns[f], &orders[f], &node_of, &totals, grad, hess, config.lambda)
            });
            (0..open.len())
                .map(|j| {
                    per_feature
                        .iter()
                        .filter_map(|c| c[j])
                        .fold(None, |acc: Option<Candidate>, c| match acc {
                            Some(a) if a.gain >= c.gain => Some(a),
                            _ => Some(c),
                        })
                })
                .collect()
        };
        let mut next_open = Vec::new();
        let mut next_totals = Vec::new();
        let mut child_slot = vec![None; open.len()];
        for (j, cand) in best.iter().enumerate() {
            let (g, h) = totals[j];
            match cand {
                None => nodes[open[j]] = leaf(g, h),
                Some(c) => {
                    let left = nodes.len();
                    nodes.push(Node::Leaf(0.0));
                    nodes.push(Node::Leaf(0.0));
                    nodes[open[j]] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left,
                        right: left + 1,
                    };
                    child_slot[j] = Some(next_open.len());
                    next_open.extend([left, left + 1]);
                    next_totals.extend([(0.0, 0.0), (0.0, 0.0)]);
                }
            }
        }
        for i in 0..n {
            let Some(j) = node_of[i] else { continue };
            node_of[i] = match (child_slot[j], best[j]) {
                (Some(slot), Some(c)) => {
                    let s = if columns[c.feature][i] <= c.threshold { slot } else { slot + 1 };
                    next_totals[s].0 += grad[i];
                    next_totals[s].1 += hess[i];
                    Some(s)
                }
                _ => None,
            };
        }
        open = next_open;
        totals = next_totals;
    }
    Tree { nodes: to_preorder(&nodes) }
}

/// Renumbers an arena so nodes appear in preorder.
fn to_preorder(nodes: &[Node]) -> Vec<Node> {
    fn walk(src: &[Node], at: usize, out: &mut Vec<Node>) {
        match src[at] {
            Node::Leaf(v) => out.push(Node::Leaf(v)),
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let me = out.len();
                out.push(Node::Leaf(0.0));
                let l = out.len();
                walk(src, left, out);
                let r = out.len();
                walk(src, right, out);
                out[me] = Node::Split {
                    feature,
                    threshold,
                    left: l,
                    right: r,
                };
            }
        }
    }
    let mut out = Vec::with_capacity(nodes.len());
    walk(nodes, 0, &mut out);
    out
}

/// Newton boosting on the logistic loss, starting from the prior log-odds.
pub fn fit_boosted(train: &Dataset, config: BoostConfig) -> Result<BoostedTreesModel> {
    train.require_both_classes()?;
    if !(config.shrinkage > 0.0) || !(config.lambda >= 0.0) {
        return Err(Error::param("boosting needs shrinkage > 0 and lambda >= 0"));
    }
    let n = train.len();
    let prior = train.count(1) as f64 / n as f64;
    let base_score = (prior / (1.0 - prior)).ln();
    let columns: Vec<Vec<f64>> = (0..train.n_features()).map(|c| train.features.column(c)).collect();
    let orders: Vec<Vec<usize>> = columns
        .iter()
        .map(|col| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            idx
        })
        .collect();
    let labels: Vec<f64> = train.labels.iter().map(|&l| l as f64).collect();
    let mut margin = vec![base_score; n];
    let mut trees = Vec::with_capacity(config.rounds);
    for _ in 0..config.rounds {
        let p: Vec<f64> = margin.iter().map(|&z| sigmoid(z)).collect();
        let grad: Vec<f64> = p.iter().zip(&labels).map(|(p, y)| p - y).collect();
        let hess: Vec<f64> = p.iter().map(|p| p * (1.0 - p)).collect();
        let tree = grow_tree(&columns, &orders, &grad, &hess, &config);
        for (i, m) in margin.iter_mut().enumerate() {
            *m += tree.predict_row(train.features.row(i));
        }
        trees.push(tree);
    }
    Ok(BoostedTreesModel {
        base_score,
        trees,
        n_features: train.n_features(),
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], labels: &[u8]) -> Dataset {
        Dataset::unnamed(Matrix::new(xs.len(), 1, xs.to_vec()).unwrap(), labels.to_vec()).unwrap()
    }

    fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &si) in scores.iter().enumerate() {
            for (j, &sj) in scores.iter().enumerate() {
                if labels[i] == 1 && labels[j] == 0 {
                    den += 1.0;
                    num += if si > sj { 1.0 } else if si == sj { 0.5 } else { 0.0 };
                }
            }
        }
        num / den
    }

    #[test]
    fn zero_rounds_predict_the_prior() {
        let d = line(&[0.0, 1.0, 2.0, 3.0], &[0, 1, 0, 1]);
        let m = fit_boosted(&d, BoostConfig { rounds: 0, ..Default::default() }).unwrap();
        assert!(m.predict_proba(&d.features).unwrap().iter().all(|&p| (p - 0.5).abs() < 1e-15));
        let d = line(&[0.0, 1.0, 2.0, 3.0], &[0, 0, 0, 1]);
        let m = fit_boosted(&d, BoostConfig { rounds: 0, ..Default::default() }).unwrap();
        assert!(m.predict_proba(&d.features).unwrap().iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn threshold_data_is_separated_quickly() {
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin() * 5.0).collect();
        let labels: Vec<u8> = xs.iter().map(|&x| (x > 1.3) as u8).collect();
        // one depth-1 split at the gap separates the classes
        let max_neg = xs.iter().zip(&labels).filter(|p| *p.1 == 0).map(|p| *p.0).fold(f64::MIN, f64::max);
        let min_pos = xs.iter().zip(&labels).filter(|p| *p.1 == 1).map(|p| *p.0).fold(f64::MAX, f64::min);
        assert!(max_neg < min_pos);
        let d = line(&xs, &labels);
        let m = fit_boosted(&d, BoostConfig { rounds: 5, ..Default::default() }).unwrap();
        let p = m.predict_proba(&d.features).unwrap();
        assert_eq!(pairwise_auc(&p, &labels), 1.0);
        let first = &m.trees[0].nodes[0];
        match *first {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert!(threshold >= max_neg && threshold < min_pos);
            }
            Node::Leaf(_) => panic!("root should split"),
        }
    }

    #[test]
    fn log_loss_never_increases_with_rounds() {
        let features = Matrix::from_fn(120, 3, |r, c| ((r * (c + 3)) as f64 * 0.61).sin());
        let labels: Vec<u8> = (0..120)
            .map(|r| (features.get(r, 0) + 0.5 * features.get(r, 1) * features.get(r, 2) + ((r * 7) % 5) as f64 * 0.1 > 0.2) as u8)
            .collect();
        let d = Dataset::unnamed(features, labels).unwrap();
        let full = fit_boosted(&d, BoostConfig { rounds: 40, ..Default::default() }).unwrap();
        let mut prev = f64::INFINITY;
        for r in 0..=40 {
            let partial = BoostedTreesModel {
                trees: full.trees[..r].to_vec(),
                ..full.clone()
            };
            let loss = partial.log_loss(&d.features, &d.labels).unwrap();
            assert!(loss <= prev + 1e-12, "round {r}: {loss} > {prev}");
            prev = loss;
        }
    }

    #[test]
    fn trees_respect_depth_and_features() {
        let features = Matrix::from_fn(200, 4, |r, c| ((r * 31 + c * 17) % 23) as f64);
        let labels: Vec<u8> = (0..200).map(|r| (r % 3 == 0) as u8).collect();
        let d = Dataset::unnamed(features, labels).unwrap();
        let m = fit_boosted(&d, BoostConfig::default()).unwrap();
        for t in &m.trees {
            assert!(t.depth() <= 4);
            for n in &t.nodes {
                match *n {
                    Node::Split { feature, .. } => assert!(feature < 4),
                    Node::Leaf(v) => assert!(v.is_finite()),
                }
            }
        }
    }

    #[test]
    fn hand_traced_tree() {
        let tree = Tree {
            nodes: vec![
                Node::Split { feature: 1, threshold: 0.5, left: 1, right: 4 },
                Node::Split { feature: 0, threshold: -1.0, left: 2, right: 3 },
                Node::Leaf(-0.3),
                Node::Leaf(0.1),
                Node::Leaf(0.7),
            ],
        };
        let m = BoostedTreesModel {
            base_score: 0.2,
            trees: vec![tree],
            n_features: 2,
            config: BoostConfig::default(),
        };
        let rows = Matrix::from_rows(&[[-2.0, 0.0], [0.0, 0.0], [-1.0, 0.5], [5.0, 0.6], [-5.0, 9.0]]).unwrap();
        // (-2,0): left, left → -0.3; (0,0): left, right → 0.1; (-1,0.5): left, left → -0.3;
        // (5,0.6): right → 0.7; (-5,9): right → 0.7
        let expected = [-0.1, 0.3, -0.1, 0.9, 0.9].map(sigmoid);
        let got = m.predict_proba(&rows).unwrap();
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-15);
        }
    }

    #[test]
    fn errors() {
        assert!(fit_boosted(&line(&[1.0, 2.0], &[0, 0]), BoostConfig::default()).is_err());
        let m = fit_boosted(&line(&[1.0, 2.0], &[0, 1]), BoostConfig::default()).unwrap();
        assert!(m.predict_proba(&Matrix::zeros(2, 2)).is_err());
    }
}
