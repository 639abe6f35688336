//! Confusion matrices, per-class and support-weighted metrics, and report rendering.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub class_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>, class_names: Vec<String>) -> Result<Self> {
        let c = class_names.len();
        if counts.len() != c || counts.iter().any(|r| r.len() != c) {
            return Err(Error::LengthMismatch {
                left: counts.len(),
                right: c,
            });
        }
        Ok(ConfusionMatrix {
            counts,
            class_names,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    /// Number of samples whose true class is `c`.
    pub fn support(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn predicted(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }
}

pub fn confusion_matrix(
    preds: &[usize],
    labels: &[usize],
    class_names: &[String],
) -> Result<ConfusionMatrix> {
    if preds.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: labels.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyDataset("no predictions to evaluate".into()));
    }
    let c = class_names.len();
    let mut counts = vec![vec![0u64; c]; c];
    for (&p, &y) in preds.iter().zip(labels) {
        if p >= c || y >= c {
            return Err(Error::Config(format!(
                "class index {} out of range for {c} classes",
                p.max(y)
            )));
        }
        counts[y][p] += 1;
    }
    Ok(ConfusionMatrix {
        counts,
        class_names: class_names.to_vec(),
    })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `trace / total`; 0 for an empty matrix.
pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.trace(), cm.total())
}

/// One-vs-rest precision, recall and F1 for class `c`; any 0/0 is 0.
///
/// F1 is evaluated as `2TP / (predicted + support)`, the same value as the
/// harmonic mean of precision and recall but with a single rounding, so it
/// never leaves `[min(P, R), max(P, R)]`.
pub fn per_class_prf(cm: &ConfusionMatrix, c: usize) -> (f64, f64, f64) {
    let tp = cm.counts[c][c];
    let (predicted, support) = (cm.predicted(c), cm.support(c));
    let precision = ratio(tp, predicted);
    let recall = ratio(tp, support);
    let f1 = ratio(2 * tp, predicted + support);
    (precision, recall, f1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion_matrix: ConfusionMatrix,
}

/// Support-weighted aggregates. Weighted recall is computed as
/// `Σ TP_c / total`, so it equals accuracy exactly.
pub fn weighted_metrics(cm: &ConfusionMatrix) -> MetricsReport {
    let total = cm.total();
    let mut per_class = Vec::with_capacity(cm.n_classes());
    let (mut wp, mut wf) = (0.0, 0.0);
    let mut tp_sum = 0u64;
    for c in 0..cm.n_classes() {
        let (precision, recall, f1) = per_class_prf(cm, c);
        let support = cm.support(c);
        wp += precision * support as f64;
        wf += f1 * support as f64;
        tp_sum += cm.counts[c][c];
        per_class.push(ClassMetrics {
            class: cm.class_names[c].clone(),
            precision,
            recall,
            f1,
            support,
        });
    }
    let n = total as f64;
    let (precision, f1) = if total == 0 {
        (0.0, 0.0)
    } else {
        (wp / n, wf / n)
    };
    MetricsReport {
        accuracy: accuracy(cm),
        precision,
        recall: ratio(tp_sum, total),
        f1,
        per_class,
        confusion_matrix: cm.clone(),
    }
}

/// Convenience: confusion matrix then weighted metrics.
pub fn evaluate(
    preds: &[usize],
    labels: &[usize],
    class_names: &[String],
) -> Result<MetricsReport> {
    Ok(weighted_metrics(&confusion_matrix(
        preds,
        labels,
        class_names,
    )?))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Tsv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(ReportFormat::Tsv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::Config(format!("unknown report format `{s}`"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Tsv => "tsv",
            ReportFormat::Json => "json",
        })
    }
}

/// Three decimals, halves rounded up. The value is first snapped to 1e-9 so
/// binary representation error cannot push 0.8915 below the half.
pub fn format_score(v: f64) -> String {
    let snapped = (v * 1e9).round() as i64;
    let thousandths = (snapped + 500_000).div_euclid(1_000_000);
    let sign = if thousandths < 0 { "-" } else { "" };
    let t = thousandths.abs();
    format!("{sign}{}.{:03}", t / 1000, t % 1000)
}

pub const REPORT_COLUMNS: [&str; 5] = ["Model", "Accuracy", "Precision", "Recall", "F1-score"];

#[derive(Serialize)]
struct JsonRow<'a> {
    model: &'a str,
    #[serde(flatten)]
    metrics: &'a MetricsReport,
}

/// Rows in the given order. TSV carries a header line; JSON keeps full
/// precision and the per-class breakdown.
pub fn render_report(reports: &[(String, MetricsReport)], format: ReportFormat) -> String {
    match format {
        ReportFormat::Tsv => {
            let mut out = REPORT_COLUMNS.join("\t");
            out.push('\n');
            for (name, r) in reports {
                let cells = [r.accuracy, r.precision, r.recall, r.f1].map(format_score);
                out.push_str(name);
                for cell in cells {
                    out.push('\t');
                    out.push_str(&cell);
                }
                out.push('\n');
            }
            out
        }
        ReportFormat::Json => {
            let rows: Vec<JsonRow> = reports
                .iter()
                .map(|(model, metrics)| JsonRow { model, metrics })
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::json!({ "models": rows }))
                .expect("metrics serialize");
            s.push('\n');
            s
        }
    }
}
