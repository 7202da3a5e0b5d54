//! Radius-thresholded landmark matching and fold-level metrics.
//!
//! Percentages are carried unrounded; two-decimal rounding happens only when
//! a summary is formatted.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::LandmarkSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Match radius in pixels.
    pub radius: f64,
    /// `true`: distance must be strictly below `radius`; `false`: at most `radius`.
    pub strict: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            radius: 6.0,
            strict: true,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "match radius must be positive, got {}",
                self.radius
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn accepts(&self, distance: f64) -> bool {
        if self.strict {
            distance < self.radius
        } else {
            distance <= self.radius
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub pred_index: usize,
    pub gt_index: usize,
    pub distance: f64,
}

/// Match counts for one frame, or pooled over many.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub pairs: Vec<MatchedPair>,
}

/// Greedy one-to-one matching.
///
/// All `(pred, gt)` pairs within the radius are sorted by
/// `(distance, pred_index, gt_index)` and accepted while both ends are free.
pub fn match_points(pred: &LandmarkSet, gt: &LandmarkSet, cfg: &MatchConfig) -> Result<MatchReport> {
    pred.dims.ensure_same(&gt.dims)?;
    cfg.validate()?;

    let mut candidates = Vec::new();
    for (pi, p) in pred.points.iter().enumerate() {
        for (gi, g) in gt.points.iter().enumerate() {
            let distance = p.distance(g);
            if cfg.accepts(distance) {
                candidates.push(MatchedPair {
                    pred_index: pi,
                    gt_index: gi,
                    distance,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.pred_index.cmp(&b.pred_index))
            .then(a.gt_index.cmp(&b.gt_index))
    });

    let mut pred_used = vec![false; pred.len()];
    let mut gt_used = vec![false; gt.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if !pred_used[c.pred_index] && !gt_used[c.gt_index] {
            pred_used[c.pred_index] = true;
            gt_used[c.gt_index] = true;
            pairs.push(c);
        }
    }
    Ok(MatchReport {
        tp: pairs.len(),
        fp: pred.len() - pairs.len(),
        fn_: gt.len() - pairs.len(),
        pairs,
    })
}

/// Sums counts over frames and concatenates their pairs.
pub fn accumulate_frames<'a>(reports: impl IntoIterator<Item = &'a MatchReport>) -> MatchReport {
    let mut total = MatchReport::default();
    for r in reports {
        total.tp += r.tp;
        total.fp += r.fp;
        total.fn_ += r.fn_;
        total.pairs.extend_from_slice(&r.pairs);
    }
    total
}

/// A percentage, flagged when its denominator was zero (value is then 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub value: f64,
    pub degenerate: bool,
}

impl Score {
    fn ratio(num: usize, den: usize) -> Self {
        if den == 0 {
            Score {
                value: 0.0,
                degenerate: true,
            }
        } else {
            Score {
                value: 100.0 * num as f64 / den as f64,
                degenerate: false,
            }
        }
    }
}

/// `100·TP / (TP + FP)`.
pub fn precision(r: &MatchReport) -> Score {
    Score::ratio(r.tp, r.tp + r.fp)
}

/// `100·TP / (TP + FN)`.
pub fn sensitivity(r: &MatchReport) -> Score {
    Score::ratio(r.tp, r.tp + r.fn_)
}

/// Harmonic mean `2·p·s / (p + s)` of two percentages.
pub fn f1(p: f64, s: f64) -> Score {
    if p + s <= 0.0 {
        Score {
            value: 0.0,
            degenerate: true,
        }
    } else {
        Score {
            value: 2.0 * p * s / (p + s),
            degenerate: false,
        }
    }
}

/// Precision, sensitivity and F1 in percent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub sensitivity: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn from_report(r: &MatchReport) -> Self {
        let p = precision(r).value;
        let s = sensitivity(r).value;
        Self {
            precision: p,
            sensitivity: s,
            f1: f1(p, s).value,
        }
    }

    /// Frames with neither predictions nor ground truth carry no evidence.
    pub fn is_scorable(r: &MatchReport) -> bool {
        r.tp + r.fp + r.fn_ > 0
    }

    fn values(&self) -> [f64; 3] {
        [self.precision, self.sensitivity, self.f1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRow {
    pub fold_id: String,
    pub metrics: Metrics,
}

/// Per-fold metrics with their mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub per_fold: Vec<FoldRow>,
    pub mean: Metrics,
    pub std: Metrics,
}

/// Mean and population (÷n) standard deviation of each metric over folds.
pub fn aggregate_folds(per_fold: Vec<FoldRow>) -> Result<MetricSummary> {
    if per_fold.is_empty() {
        return Err(Error::EmptyInput("aggregate_folds needs at least one fold"));
    }
    let n = per_fold.len() as f64;
    let mut mean = [0.0f64; 3];
    for row in &per_fold {
        for (m, v) in mean.iter_mut().zip(row.metrics.values()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0f64; 3];
    for row in &per_fold {
        for ((acc, v), m) in var.iter_mut().zip(row.metrics.values()).zip(mean) {
            *acc += (v - m).powi(2);
        }
    }
    let std = var.map(|v| (v / n).sqrt());
    Ok(MetricSummary {
        per_fold,
        mean: Metrics {
            precision: mean[0],
            sensitivity: mean[1],
            f1: mean[2],
        },
        std: Metrics {
            precision: std[0],
            sensitivity: std[1],
            f1: std[2],
        },
    })
}

impl MetricSummary {
    /// `fold,precision,sensitivity,f1` rows, then `mean` and `std` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let to_err = |e: csv::Error| Error::InvalidParameter(format!("csv write failed: {e}"));
        w.write_record(["fold", "precision", "sensitivity", "f1"])
            .map_err(to_err)?;
        let rows = self
            .per_fold
            .iter()
            .map(|r| (r.fold_id.as_str(), &r.metrics))
            .chain([("mean", &self.mean), ("std", &self.std)]);
        for (id, m) in rows {
            w.write_record([
                id.to_string(),
                m.precision.to_string(),
                m.sensitivity.to_string(),
                m.f1.to_string(),
            ])
            .map_err(to_err)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidParameter(format!("csv write failed: {e}")))?;
        Ok(())
    }

    /// Reads fold rows written by [`MetricSummary::write_csv`]; `mean` and
    /// `std` rows are skipped.
    pub fn read_fold_rows<R: std::io::Read>(reader: R) -> Result<Vec<FoldRow>> {
        let mut r = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for record in r.records() {
            let record =
                record.map_err(|e| Error::InvalidParameter(format!("csv read failed: {e}")))?;
            if record.len() != 4 {
                return Err(Error::InvalidParameter(format!(
                    "expected 4 columns, got {}",
                    record.len()
                )));
            }
            let id = record[0].trim().to_string();
            if id == "mean" || id == "std" {
                continue;
            }
            let num = |i: usize| -> Result<f64> {
                record[i].trim().parse::<f64>().map_err(|e| {
                    Error::InvalidParameter(format!("fold {id}: column {i}: {e}"))
                })
            };
            rows.push(FoldRow {
                metrics: Metrics {
                    precision: num(1)?,
                    sensitivity: num(2)?,
                    f1: num(3)?,
                },
                fold_id: id,
            });
        }
        Ok(rows)
    }
}

impl fmt::Display for MetricSummary {
    /// One line per metric, one column per fold, then `μ ± σ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<12}", "Metric")?;
        for row in &self.per_fold {
            write!(f, " {:>8}", row.fold_id)?;
        }
        writeln!(f, "  {:>14}", "μ ± σ")?;
        let lines: [(&str, fn(&Metrics) -> f64); 3] = [
            ("Precision", |m| m.precision),
            ("Sensitivity", |m| m.sensitivity),
            ("F1 score", |m| m.f1),
        ];
        for (name, get) in lines {
            write!(f, "{name:<12}")?;
            for row in &self.per_fold {
                write!(f, " {:>8.2}", get(&row.metrics))?;
            }
            writeln!(f, "  {:>6.2} ± {:.2}", get(&self.mean), get(&self.std))?;
        }
        Ok(())
    }
}
