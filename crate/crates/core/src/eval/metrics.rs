use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decision threshold for the thresholded metrics.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    AucRoc,
    Auprc,
    AveragePrecision,
    MacroF1,
    BalancedAccuracy,
}

impl MetricName {
    pub const ALL: [MetricName; 5] = [
        MetricName::AucRoc,
        MetricName::Auprc,
        MetricName::AveragePrecision,
        MetricName::MacroF1,
        MetricName::BalancedAccuracy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::AucRoc => "auc_roc",
            MetricName::Auprc => "auprc",
            MetricName::AveragePrecision => "average_precision",
            MetricName::MacroF1 => "macro_f1",
            MetricName::BalancedAccuracy => "balanced_accuracy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub auc_roc: f64,
    pub auprc: f64,
    pub average_precision: f64,
    pub macro_f1: f64,
    pub balanced_accuracy: f64,
}

impl Metrics {
    pub fn get(&self, name: MetricName) -> f64 {
        match name {
            MetricName::AucRoc => self.auc_roc,
            MetricName::Auprc => self.auprc,
            MetricName::AveragePrecision => self.average_precision,
            MetricName::MacroF1 => self.macro_f1,
            MetricName::BalancedAccuracy => self.balanced_accuracy,
        }
    }
}

/// Metrics for a subset of test edges that may hold a single class or none.
/// Ranking metrics need both classes; balanced accuracy only needs one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionMetrics {
    pub positives: usize,
    pub negatives: usize,
    pub auc_roc: Option<f64>,
    pub auprc: Option<f64>,
    pub average_precision: Option<f64>,
    pub macro_f1: Option<f64>,
    pub balanced_accuracy: Option<f64>,
}

impl RegionMetrics {
    pub fn get(&self, name: MetricName) -> Option<f64> {
        match name {
            MetricName::AucRoc => self.auc_roc,
            MetricName::Auprc => self.auprc,
            MetricName::AveragePrecision => self.average_precision,
            MetricName::MacroF1 => self.macro_f1,
            MetricName::BalancedAccuracy => self.balanced_accuracy,
        }
    }
}

fn check(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Precondition(format!(
            "metrics need both classes, got {pos} positives and {neg} negatives"
        )));
    }
    Ok((pos, neg))
}

/// Indices sorted by descending score; groups of equal scores are returned as
/// (positives, negatives) counts in that order.
fn tie_groups_descending(scores: &[f64], labels: &[bool]) -> Vec<(u64, u64)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups: Vec<(u64, u64)> = Vec::new();
    let mut last: Option<f64> = None;
    for i in order {
        if last.is_none_or(|s| s.partial_cmp(&scores[i]) != Some(Ordering::Equal)) {
            groups.push((0, 0));
            last = Some(scores[i]);
        }
        let g = groups.last_mut().expect("group pushed above");
        if labels[i] {
            g.0 += 1;
        } else {
            g.1 += 1;
        }
    }
    groups
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Counted in half-units so the result is exact.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = check(scores, labels)?;
    let mut halves: u64 = 0;
    let mut neg_above: u64 = 0;
    let total_neg = neg as u64;
    for (p, q) in tie_groups_descending(scores, labels) {
        let neg_below = total_neg - neg_above - q;
        halves += 2 * p * neg_below + p * q;
        neg_above += q;
    }
    Ok(halves as f64 / (2 * pos as u64 * neg as u64) as f64)
}

/// Step-sum average precision: Σ (R_k − R_{k−1}) · P_k over distinct score
/// thresholds, descending.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, _) = check(scores, labels)?;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut ap = 0.0;
    for (p, q) in tie_groups_descending(scores, labels) {
        tp += p;
        fp += q;
        ap += (p as f64 / pos as f64) * (tp as f64 / (tp + fp) as f64);
    }
    Ok(ap)
}

/// Trapezoidal area under the precision-recall curve, anchored at
/// (recall 0, precision 1).
pub fn auprc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, _) = check(scores, labels)?;
    let (mut tp, mut fp) = (0u64, 0u64);
    let (mut r_prev, mut p_prev) = (0.0, 1.0);
    let mut area = 0.0;
    for (p, q) in tie_groups_descending(scores, labels) {
        tp += p;
        fp += q;
        let r = tp as f64 / pos as f64;
        let prec = tp as f64 / (tp + fp) as f64;
        area += (r - r_prev) * (prec + p_prev) / 2.0;
        r_prev = r;
        p_prev = prec;
    }
    Ok(area)
}

#[derive(Debug, Clone, Copy, Default)]
struct Confusion {
    tp: u64,
    fp: u64,
    tn: u64,
    fn_: u64,
}

fn confusion(scores: &[f64], labels: &[bool]) -> Confusion {
    let mut c = Confusion::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= THRESHOLD, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

fn f1(hit: u64, false_pos: u64, false_neg: u64) -> f64 {
    let denom = 2 * hit + false_pos + false_neg;
    if denom == 0 {
        0.0
    } else {
        (2 * hit) as f64 / denom as f64
    }
}

/// Unweighted mean of the F1 scores of both classes at `THRESHOLD`.
pub fn macro_f1(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check(scores, labels)?;
    let c = confusion(scores, labels);
    Ok((f1(c.tp, c.fp, c.fn_) + f1(c.tn, c.fn_, c.fp)) / 2.0)
}

/// Mean recall over the classes present, at `THRESHOLD`.
pub fn balanced_accuracy(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let c = confusion(scores, labels);
    let mut recalls = Vec::with_capacity(2);
    if c.tp + c.fn_ > 0 {
        recalls.push(c.tp as f64 / (c.tp + c.fn_) as f64);
    }
    if c.tn + c.fp > 0 {
        recalls.push(c.tn as f64 / (c.tn + c.fp) as f64);
    }
    if recalls.is_empty() {
        return Err(Error::Precondition(
            "balanced accuracy of an empty set".into(),
        ));
    }
    Ok(recalls.iter().sum::<f64>() / recalls.len() as f64)
}

pub fn compute_metrics(scores: &[f64], labels: &[bool]) -> Result<Metrics> {
    Ok(Metrics {
        auc_roc: roc_auc(scores, labels)?,
        auprc: auprc(scores, labels)?,
        average_precision: average_precision(scores, labels)?,
        macro_f1: macro_f1(scores, labels)?,
        balanced_accuracy: balanced_accuracy(scores, labels)?,
    })
}

/// Whatever metrics are defined for this subset; an empty or single-class
/// subset leaves the ranking metrics unset.
pub fn region_metrics(scores: &[f64], labels: &[bool]) -> Result<RegionMetrics> {
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    let mut out = RegionMetrics {
        positives,
        negatives,
        ..RegionMetrics::default()
    };
    if positives > 0 && negatives > 0 {
        let m = compute_metrics(scores, labels)?;
        out.auc_roc = Some(m.auc_roc);
        out.auprc = Some(m.auprc);
        out.average_precision = Some(m.average_precision);
        out.macro_f1 = Some(m.macro_f1);
        out.balanced_accuracy = Some(m.balanced_accuracy);
    } else if !labels.is_empty() {
        out.balanced_accuracy = Some(balanced_accuracy(scores, labels)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: [bool; 4] = [true, true, false, false];

    #[test]
    fn perfect_ranking() {
        let m = compute_metrics(&[0.9, 0.8, 0.3, 0.1], &L).unwrap();
        assert_eq!(m.auc_roc, 1.0);
        assert_eq!(m.balanced_accuracy, 1.0);
        assert_eq!(m.average_precision, 1.0);
        assert_eq!(m.auprc, 1.0);
        assert_eq!(m.macro_f1, 1.0);
    }

    #[test]
    fn three_of_four_pairs_concordant() {
        assert_eq!(roc_auc(&[0.9, 0.3, 0.8, 0.1], &L).unwrap(), 0.75);
    }

    #[test]
    fn ties_count_half() {
        assert_eq!(roc_auc(&[0.4; 4], &L).unwrap(), 0.5);
        assert_eq!(average_precision(&[0.4; 4], &L).unwrap(), 0.5);
    }

    #[test]
    fn average_precision_by_hand() {
        // Ranking +, -, +, -: precision 1 at recall 1/2, 2/3 at recall 1.
        let ap = average_precision(&[0.9, 0.8, 0.7, 0.1], &[true, false, true, false]).unwrap();
        assert!((ap - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn constant_classifier_has_balanced_accuracy_half() {
        let labels = [true, false, false, false, true, false];
        assert_eq!(balanced_accuracy(&[0.7; 6], &labels).unwrap(), 0.5);
        assert_eq!(balanced_accuracy(&[0.2; 6], &labels).unwrap(), 0.5);
    }

    #[test]
    fn macro_f1_at_half() {
        // Predictions: +, -, +, - against +, +, -, -.
        let f = macro_f1(&[0.9, 0.3, 0.8, 0.1], &L).unwrap();
        assert_eq!(f, 0.5);
    }

    #[test]
    fn single_class_rejected() {
        assert!(compute_metrics(&[0.1, 0.2], &[true, true]).is_err());
        assert!(compute_metrics(&[0.1], &[true, false]).is_err());
    }

    #[test]
    fn single_class_regions_keep_balanced_accuracy() {
        let r = region_metrics(&[0.9, 0.2, 0.6], &[true, true, true]).unwrap();
        assert_eq!(r.auc_roc, None);
        assert_eq!(r.balanced_accuracy, Some(2.0 / 3.0));
        let empty = region_metrics(&[], &[]).unwrap();
        assert_eq!(empty.balanced_accuracy, None);
        assert_eq!((empty.positives, empty.negatives), (0, 0));
    }
}
