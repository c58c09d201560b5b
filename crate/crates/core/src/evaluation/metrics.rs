use crate::error::{Error, Result};

fn check(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::param(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::data("scores contain NaN"));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    Ok((pos, labels.len() - pos))
}

/// Indices sorted by descending score, ties by index.
fn descending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Runs of equal score in `order`, as `(start, end)` ranges.
fn tie_groups<'a>(scores: &'a [f64], order: &'a [usize]) -> impl Iterator<Item = (usize, usize)> + 'a {
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= order.len() {
            return None;
        }
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let g = (start, end);
        start = end;
        Some(g)
    })
}

/// Area under the ROC curve via the Mann–Whitney statistic with midranks,
/// so tied positive/negative pairs count one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = check(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(Error::data("AUC needs both classes"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j share their mean
        let mid = (i + j + 1) as f64 / 2.0;
        rank_sum += mid * order[i..j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j;
    }
    let p = pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// ROC points from a descending threshold sweep, one point per distinct score.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)`, from (0,0) to (1,1).
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum()
    }

    pub fn write_csv(&self, out: &mut impl std::io::Write) -> Result<()> {
        writeln!(out, "fpr,tpr")?;
        for (f, t) in &self.points {
            writeln!(out, "{f},{t}")?;
        }
        Ok(())
    }
}

pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    let (pos, neg) = check(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(Error::data("ROC curve needs both classes"));
    }
    let order = descending(scores);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    for (s, e) in tie_groups(scores, &order) {
        let p = order[s..e].iter().filter(|&&k| labels[k] == 1).count();
        tp += p;
        fp += e - s - p;
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(RocCurve { points })
}

/// Average precision: each distinct threshold contributes its precision
/// weighted by the recall it adds. No interpolation between PR points.
pub fn auprc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, _) = check(scores, labels)?;
    if pos == 0 {
        return Err(Error::data("AUPRC needs at least one positive"));
    }
    let order = descending(scores);
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut ap = 0.0;
    for (s, e) in tie_groups(scores, &order) {
        let p = order[s..e].iter().filter(|&&k| labels[k] == 1).count();
        tp += p;
        seen += e - s;
        ap += (p as f64 / pos as f64) * (tp as f64 / seen as f64);
    }
    Ok(ap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationMetrics {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    /// Set when some ratio had a zero denominator and was reported as 0.
    pub undefined: bool,
}

/// Recall, precision and F1 for `score >= threshold` predicted positive.
pub fn classification_metrics(scores: &[f64], labels: &[u8], threshold: f64) -> ClassificationMetrics {
    let (mut tp, mut fp, mut fnn) = (0usize, 0usize, 0usize);
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fnn += 1,
            (false, false) => {}
        }
    }
    let mut undefined = false;
    let mut ratio = |num: f64, den: f64| {
        if den == 0.0 {
            undefined = true;
            0.0
        } else {
            num / den
        }
    };
    let recall = ratio(tp as f64, (tp + fnn) as f64);
    let precision = ratio(tp as f64, (tp + fp) as f64);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    ClassificationMetrics {
        recall,
        precision,
        f1,
        undefined,
    }
}
