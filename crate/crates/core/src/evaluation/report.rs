use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};

use super::experiment::MetricsReport;
use super::metrics::RocCurve;
use super::sweep::SweepRow;

pub fn write_reports_csv(reports: &[MetricsReport], out: &mut impl Write) -> Result<()> {
    writeln!(out, "sampler,classifier,fold,auc,auprc,recall,precision,f1")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.sampler, r.classifier, r.fold, r.auc, r.auprc, r.recall, r.precision, r.f1
        )?;
    }
    Ok(())
}

/// Parses the table written by [`write_reports_csv`].
pub fn read_reports_csv(input: impl std::io::Read) -> Result<Vec<MetricsReport>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["sampler", "classifier", "fold", "auc", "auprc", "recall", "precision", "f1"] {
        return Err(Error::data(format!("unexpected reports header {header:?}")));
    }
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let field = |c: usize| -> Result<f64> {
            record[c].parse().map_err(|_| Error::Parse {
                row: i + 1,
                column: header[c].clone(),
                detail: format!("not a number: {:?}", &record[c]),
            })
        };
        out.push(MetricsReport {
            sampler: record[0].to_string(),
            classifier: record[1].to_string(),
            fold: field(2)? as usize,
            auc: field(3)?,
            auprc: field(4)?,
            recall: field(5)?,
            precision: field(6)?,
            f1: field(7)?,
            undefined: false,
        });
    }
    Ok(out)
}

/// Fold-mean metrics for one sampler/classifier pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub sampler: String,
    pub classifier: String,
    pub folds: usize,
    /// Means of auc, auprc, recall, precision, f1.
    pub means: [f64; 5],
    /// Mean over the five metrics of this row's rank (1 = best).
    pub rank: f64,
}

/// Ranks where larger values are better; ties share their average rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        order[i..j].iter().for_each(|&k| out[k] = r);
        i = j;
    }
    out
}

/// One row per sampler/classifier pair in first-seen order.
pub fn aggregate(reports: &[MetricsReport]) -> Vec<AggregateRow> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in reports {
        let k = (r.sampler.clone(), r.classifier.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut rows: Vec<AggregateRow> = keys
        .into_iter()
        .map(|(sampler, classifier)| {
            let group: Vec<&MetricsReport> = reports
                .iter()
                .filter(|r| r.sampler == sampler && r.classifier == classifier)
                .collect();
            let mut means = [0.0; 5];
            for r in &group {
                means.iter_mut().zip(r.values()).for_each(|(m, v)| *m += v);
            }
            means.iter_mut().for_each(|m| *m /= group.len() as f64);
            AggregateRow {
                sampler,
                classifier,
                folds: group.len(),
                means,
                rank: 0.0,
            }
        })
        .collect();
    let per_metric: Vec<Vec<f64>> = (0..5)
        .map(|m| ranks(&rows.iter().map(|r| r.means[m]).collect::<Vec<_>>()))
        .collect();
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = per_metric.iter().map(|r| r[i]).sum::<f64>() / 5.0;
    }
    rows
}

pub fn write_aggregate_csv(rows: &[AggregateRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "sampler,classifier,folds,auc,auprc,recall,precision,f1,rank")?;
    for r in rows {
        let [a, b, c, d, e] = r.means;
        writeln!(out, "{},{},{},{a},{b},{c},{d},{e},{}", r.sampler, r.classifier, r.folds, r.rank)?;
    }
    Ok(())
}

/// Long-format sweep table: `source,fraction,metric,value`.
pub fn write_sweep_csv(rows: &[SweepRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "source,fraction,metric,value")?;
    for (m, name) in MetricsReport::METRICS.iter().enumerate() {
        for r in rows {
            writeln!(out, "{},{},{name},{}", r.source, r.fraction, r.report.values()[m])?;
        }
    }
    Ok(())
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Standalone SVG with one polyline per named ROC curve, axes, ticks and a legend.
pub fn roc_svg(curves: &[(String, RocCurve)]) -> String {
    let (w, h, margin) = (480.0, 480.0, 50.0);
    let side = w - 2.0 * margin;
    let px = |x: f64| margin + x * side;
    let py = |y: f64| h - margin - y * side;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{margin}" y="{margin}" width="{side}" height="{side}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{t:.1}</text>"#,
            px(t),
            h - margin + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{t:.1}</text>"#,
            margin - 6.0,
            py(t) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="gray" stroke-dasharray="4 4"/>"#,
        px(0.0),
        py(0.0),
        px(1.0),
        py(1.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">False positive rate</text>"#,
        w / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {:.1})">True positive rate</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (i, (name, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = curve.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = margin + 18.0 + 16.0 * i as f64;
        let lx = px(0.55);
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
            ly,
            lx + 18.0,
            ly
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="12">{} (AUC {:.3})</text>"#,
            lx + 24.0,
            ly + 4.0,
            escape(name),
            curve.area()
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(sampler: &str, fold: usize, v: [f64; 5]) -> MetricsReport {
        MetricsReport {
            sampler: sampler.into(),
            classifier: "lr".into(),
            fold,
            auc: v[0],
            auprc: v[1],
            recall: v[2],
            precision: v[3],
            f1: v[4],
            undefined: false,
        }
    }

    #[test]
    fn reports_roundtrip() {
        let reports = vec![report("smote", 3, [0.1 + 0.2, 1.0 / 3.0, 0.0, 1.0, 0.25])];
        let mut buf = Vec::new();
        write_reports_csv(&reports, &mut buf).unwrap();
        assert_eq!(read_reports_csv(buf.as_slice()).unwrap(), reports);
        assert!(read_reports_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn aggregate_means_and_ranks() {
        let reports = vec![
            report("none", 0, [0.9, 0.5, 0.4, 0.9, 0.5]),
            report("none", 1, [0.8, 0.5, 0.6, 0.7, 0.5]),
            report("ros", 0, [0.95, 0.6, 0.9, 0.1, 0.2]),
            report("ros", 1, [0.95, 0.6, 0.9, 0.1, 0.2]),
        ];
        let rows = aggregate(&reports);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].sampler, "none");
        assert!((rows[0].means[0] - 0.85).abs() < 1e-15);
        // none: ranks 2,2,2,1,1 ; ros: 1,1,1,2,2
        assert!((rows[0].rank - 1.6).abs() < 1e-15);
        assert!((rows[1].rank - 1.4).abs() < 1e-15);
    }

    #[test]
    fn tied_metrics_share_rank() {
        assert_eq!(ranks(&[0.5, 0.9, 0.5]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        write_reports_csv(&[report("none", 0, [1.0, 1.0, 0.5, 0.25, 0.5])], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "sampler,classifier,fold,auc,auprc,recall,precision,f1\nnone,lr,0,1,1,0.5,0.25,0.5\n");
    }

    #[test]
    fn svg_has_one_polyline_per_curve() {
        let c = RocCurve {
            points: vec![(0.0, 0.0), (0.2, 0.8), (1.0, 1.0)],
        };
        let svg = roc_svg(&[("a<b".into(), c.clone()), ("ros".into(), c)]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
