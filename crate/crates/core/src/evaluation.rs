//! Inter-method agreement, calibration metrics and gold-standard scoring.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::FeatureMatrix;

/// Relative frequency difference below which two methods agree.
pub const AGREEMENT_TOLERANCE: f64 = 0.30;
pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no predictions to evaluate")]
    Empty,
    #[error("bin count must be ≥ 1")]
    ZeroBins,
    #[error("confidence {0} outside [0, 1]")]
    ConfidenceRange(f64),
    #[error("gold example {index}: prediction is for `{predicted}`, gold target is `{target}`")]
    Alignment { index: usize, target: String, predicted: String },
    #[error("gold example {index} (`{target}`): features {overlap:?} are both true and expected false positives")]
    GoldOverlap { index: usize, target: String, overlap: Vec<String> },
    #[error("matrices disagree on {0}")]
    MatrixShape(&'static str),
    #[error("cannot read gold file: {0}")]
    GoldRead(String),
}

/// 1 when both frequencies are zero or their relative difference is below 0.30.
pub fn agreement(f_regex: f64, f_transformer: f64) -> bool {
    let hi = f_regex.max(f_transformer);
    if hi == 0.0 {
        return true;
    }
    (f_regex - f_transformer).abs() / hi < AGREEMENT_TOLERANCE
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(EvalError::UndefinedCorrelation("fewer than two observations"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::UndefinedCorrelation("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementCounts {
    pub positive: usize,
    pub negative: usize,
    pub total: usize,
    pub rate: f64,
}

impl AgreementCounts {
    fn from_counts(positive: usize, negative: usize, total: usize) -> Self {
        let rate = if total == 0 { 0.0 } else { (positive + negative) as f64 / total as f64 };
        AgreementCounts { positive, negative, total, rate }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementCell {
    pub feature_id: String,
    pub text_id: String,
    pub f_regex: f64,
    pub f_neural: f64,
    pub frequency_agree: bool,
    pub detection_agree: bool,
}

/// Two agreement statistics over the same (feature, text) cells: the frequency
/// indicator (relative difference < 0.30, both-zero counts as negative
/// agreement) and plain joint detection (both detect or neither does).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub frequency: AgreementCounts,
    pub detection: AgreementCounts,
    /// Pearson r over all frequency pairs; absent when undefined.
    pub correlation: Option<f64>,
    pub cells: Vec<AgreementCell>,
}

pub fn agreement_report(regex: &FeatureMatrix, neural: &FeatureMatrix) -> Result<AgreementReport, EvalError> {
    if regex.texts != neural.texts {
        return Err(EvalError::MatrixShape("text ids"));
    }
    if regex.features != neural.features {
        return Err(EvalError::MatrixShape("feature ids"));
    }
    let mut cells = Vec::new();
    let (mut fp, mut fneg, mut dp, mut dneg) = (0, 0, 0, 0);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (f, fid) in regex.features.iter().enumerate() {
        for (t, tid) in regex.texts.iter().enumerate() {
            let (a, b) = (regex.freq[f][t], neural.freq[f][t]);
            let (da, db) = (regex.detected[f][t], neural.detected[f][t]);
            let fa = agreement(a, b);
            if fa {
                if a == 0.0 && b == 0.0 {
                    fneg += 1;
                } else {
                    fp += 1;
                }
            }
            match (da, db) {
                (true, true) => dp += 1,
                (false, false) => dneg += 1,
                _ => {}
            }
            xs.push(a);
            ys.push(b);
            cells.push(AgreementCell {
                feature_id: fid.clone(),
                text_id: tid.clone(),
                f_regex: a,
                f_neural: b,
                frequency_agree: fa,
                detection_agree: da == db,
            });
        }
    }
    let total = cells.len();
    Ok(AgreementReport {
        frequency: AgreementCounts::from_counts(fp, fneg, total),
        detection: AgreementCounts::from_counts(dp, dneg, total),
        correlation: pearson(&xs, &ys).ok(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Zero for empty bins.
    pub accuracy: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub bins: Vec<CalibrationBin>,
    pub total: usize,
    pub ece: f64,
    /// Correlation of per-bin confidence and accuracy over non-empty bins.
    pub pearson_r: Option<f64>,
}

/// Bin of `c` among `bins` equal-width, right-closed bins; 0 falls in the first.
pub fn bin_index(c: f64, bins: usize) -> usize {
    let b = bins as f64;
    let mut idx = ((c * b).ceil() as usize).saturating_sub(1).min(bins - 1);
    // correct float drift so membership matches lower < c ≤ upper exactly
    while idx > 0 && c <= idx as f64 / b {
        idx -= 1;
    }
    while idx + 1 < bins && c > (idx + 1) as f64 / b {
        idx += 1;
    }
    idx
}

pub fn ece(confidences: &[f64], correct: &[bool], bins: usize) -> Result<CalibrationReport, EvalError> {
    if confidences.len() != correct.len() {
        return Err(EvalError::LengthMismatch { left: confidences.len(), right: correct.len() });
    }
    if confidences.is_empty() {
        return Err(EvalError::Empty);
    }
    if bins == 0 {
        return Err(EvalError::ZeroBins);
    }
    if let Some(&c) = confidences.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(EvalError::ConfidenceRange(c));
    }
    let mut count = vec![0usize; bins];
    let mut hits = vec![0usize; bins];
    let mut conf_sum = vec![0.0f64; bins];
    for (&c, &ok) in confidences.iter().zip(correct) {
        let b = bin_index(c, bins);
        count[b] += 1;
        hits[b] += usize::from(ok);
        conf_sum[b] += c;
    }
    let n = confidences.len() as f64;
    let mut total_gap = 0.0;
    let mut out = Vec::with_capacity(bins);
    for b in 0..bins {
        let (accuracy, confidence) = if count[b] == 0 {
            (0.0, 0.0)
        } else {
            (hits[b] as f64 / count[b] as f64, conf_sum[b] / count[b] as f64)
        };
        total_gap += count[b] as f64 / n * (accuracy - confidence).abs();
        out.push(CalibrationBin {
            lower: b as f64 / bins as f64,
            upper: (b + 1) as f64 / bins as f64,
            count: count[b],
            accuracy,
            confidence,
        });
    }
    let (cs, accs): (Vec<f64>, Vec<f64>) =
        out.iter().filter(|b| b.count > 0).map(|b| (b.confidence, b.accuracy)).unzip();
    Ok(CalibrationReport {
        bins: out,
        total: confidences.len(),
        ece: total_gap.clamp(0.0, 1.0),
        pearson_r: pearson(&cs, &accs).ok(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldExample {
    pub target_word: String,
    pub context: String,
    /// Feature id → annotator confidence.
    pub true_features: BTreeMap<String, f64>,
    #[serde(default)]
    pub expected_false_positives: BTreeSet<String>,
    #[serde(default)]
    pub distinguishing_cues: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldFile {
    pub version: String,
    /// True for fixtures that carry no philological authority.
    #[serde(default)]
    pub synthetic: bool,
    pub examples: Vec<GoldExample>,
}

impl GoldFile {
    pub fn from_path(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::GoldRead(format!("{}: {e}", path.display())))?;
        let gold: GoldFile = serde_json::from_str(&text).map_err(|e| EvalError::GoldRead(e.to_string()))?;
        validate_gold(&gold.examples)?;
        Ok(gold)
    }
}

pub fn validate_gold(gold: &[GoldExample]) -> Result<(), EvalError> {
    for (index, ex) in gold.iter().enumerate() {
        let overlap: Vec<String> = ex
            .expected_false_positives
            .iter()
            .filter(|f| ex.true_features.contains_key(*f))
            .cloned()
            .collect();
        if !overlap.is_empty() {
            return Err(EvalError::GoldOverlap { index, target: ex.target_word.clone(), overlap });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldPrediction {
    pub target_word: String,
    pub features: BTreeSet<String>,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldMetrics {
    pub examples: usize,
    /// Fraction of examples whose predicted feature set equals the gold set.
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    /// Micro-averaged over (example, feature) pairs.
    pub f1: f64,
    /// Predicted features listed as expected false positives.
    pub false_positive_traps_hit: usize,
    pub calibration: CalibrationReport,
}

pub fn evaluate_gold(gold: &[GoldExample], predictions: &[GoldPrediction], bins: usize) -> Result<GoldMetrics, EvalError> {
    if gold.len() != predictions.len() {
        return Err(EvalError::LengthMismatch { left: gold.len(), right: predictions.len() });
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    validate_gold(gold)?;
    let (mut tp, mut fp, mut fneg, mut exact, mut traps) = (0usize, 0usize, 0usize, 0usize, 0usize);
    let mut confidences = Vec::with_capacity(gold.len());
    let mut correct = Vec::with_capacity(gold.len());
    for (index, (g, p)) in gold.iter().zip(predictions).enumerate() {
        if g.target_word != p.target_word {
            return Err(EvalError::Alignment {
                index,
                target: g.target_word.clone(),
                predicted: p.target_word.clone(),
            });
        }
        let truth: BTreeSet<&String> = g.true_features.keys().collect();
        let pred: BTreeSet<&String> = p.features.iter().collect();
        tp += truth.intersection(&pred).count();
        fp += pred.difference(&truth).count();
        fneg += truth.difference(&pred).count();
        traps += p.features.iter().filter(|f| g.expected_false_positives.contains(*f)).count();
        let ok = truth == pred;
        exact += usize::from(ok);
        confidences.push(p.confidence);
        correct.push(ok);
    }
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    Ok(GoldMetrics {
        examples: gold.len(),
        accuracy: exact as f64 / gold.len() as f64,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fneg),
        f1: ratio(2 * tp, 2 * tp + fp + fneg),
        false_positive_traps_hit: traps,
        calibration: ece(&confidences, &correct, bins)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Method;
    use proptest::prelude::*;

    #[test]
    fn agreement_table() {
        assert!(agreement(10.0, 12.0));
        assert!(!agreement(5.0, 10.0));
        assert!(agreement(0.0, 0.0));
        assert!(!agreement(0.0, 3.0));
        assert!(!agreement(3.0, 0.0));
        // exactly 0.30 is not below the tolerance
        assert!(!agreement(7.0, 10.0));
        assert!(agreement(7.5, 10.0));
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&x, &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(pearson(&x, &[2.0; 4]), Err(EvalError::UndefinedCorrelation(_))));
        assert!(matches!(pearson(&x, &[1.0]), Err(EvalError::LengthMismatch { .. })));
    }

    #[test]
    fn ece_examples() {
        let r = ece(&[1.0; 5], &[true; 5], DEFAULT_BINS).unwrap();
        assert_eq!(r.ece, 0.0);

        let r = ece(&[0.8, 0.8, 0.6, 0.6], &[true, true, false, false], 2).unwrap();
        assert_eq!(r.bins[0].count, 0);
        assert_eq!(r.bins[1].count, 4);
        assert_eq!(r.bins[1].accuracy, 0.5);
        assert!((r.bins[1].confidence - 0.7).abs() < 1e-15);
        assert!((r.ece - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ece_bins_are_right_closed() {
        assert_eq!(bin_index(0.0, 10), 0);
        assert_eq!(bin_index(0.1, 10), 0);
        assert_eq!(bin_index(0.3, 10), 2);
        assert_eq!(bin_index(0.7, 10), 6);
        assert_eq!(bin_index(0.70001, 10), 7);
        assert_eq!(bin_index(1.0, 10), 9);
        assert_eq!(bin_index(0.5, 2), 0);
        assert_eq!(bin_index(0.5, 1), 0);
    }

    #[test]
    fn ece_errors() {
        assert_eq!(ece(&[], &[], 10), Err(EvalError::Empty));
        assert_eq!(ece(&[0.5], &[true], 0), Err(EvalError::ZeroBins));
        assert_eq!(ece(&[1.5], &[true], 10), Err(EvalError::ConfidenceRange(1.5)));
    }

    #[test]
    fn perfectly_calibrated_predictor() {
        // bins hold confidence 0.25 (1/4 correct) and 0.75 (3/4 correct)
        let conf = [0.25, 0.25, 0.25, 0.25, 0.75, 0.75, 0.75, 0.75];
        let ok = [true, false, false, false, true, true, true, false];
        assert_eq!(ece(&conf, &ok, 10).unwrap().ece, 0.0);
    }

    #[test]
    fn finer_bins_expose_two_cluster_miscalibration() {
        // one bin averages the clusters away; ten bins separate them
        let conf = [0.2, 0.2, 0.8, 0.8];
        let ok = [true, true, false, false];
        let coarse = ece(&conf, &ok, 1).unwrap().ece;
        let fine = ece(&conf, &ok, 10).unwrap().ece;
        assert!(coarse.abs() < 1e-12);
        assert!((fine - 0.8).abs() < 1e-12);
    }

    fn gold(target: &str, features: &[&str]) -> GoldExample {
        GoldExample {
            target_word: target.into(),
            context: format!("… {target} …"),
            true_features: features.iter().map(|f| (f.to_string(), 1.0)).collect(),
            expected_false_positives: BTreeSet::new(),
            distinguishing_cues: String::new(),
        }
    }

    fn predict(target: &str, features: &[&str], confidence: f64) -> GoldPrediction {
        GoldPrediction {
            target_word: target.into(),
            features: features.iter().map(|f| f.to_string()).collect(),
            confidence,
        }
    }

    #[test]
    fn gold_perfect_and_empty() {
        let g = vec![gold("a", &["x"]), gold("b", &["x", "y"])];
        let perfect = vec![predict("a", &["x"], 1.0), predict("b", &["x", "y"], 1.0)];
        let m = evaluate_gold(&g, &perfect, 10).unwrap();
        assert_eq!((m.accuracy, m.f1, m.calibration.ece), (1.0, 1.0, 0.0));

        let empty = vec![predict("a", &[], 0.5), predict("b", &[], 0.5)];
        let m = evaluate_gold(&g, &empty, 10).unwrap();
        assert_eq!(m.accuracy, 0.0);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn gold_planted_eighty_percent() {
        let g: Vec<_> = (0..50).map(|i| gold(&format!("w{i}"), &["f"])).collect();
        let p: Vec<_> = (0..50)
            .map(|i| predict(&format!("w{i}"), if i % 5 == 4 { &["g"] } else { &["f"] }, 0.8))
            .collect();
        let m = evaluate_gold(&g, &p, 10).unwrap();
        assert_eq!(m.accuracy, 0.8);
        assert!((m.f1 - 0.8).abs() < 1e-15);
        // confidence 0.8 with accuracy 0.8: calibrated
        assert!(m.calibration.ece < 1e-12);
    }

    #[test]
    fn gold_errors() {
        let g = vec![gold("a", &["x"])];
        assert!(matches!(evaluate_gold(&g, &[predict("b", &[], 0.5)], 10), Err(EvalError::Alignment { .. })));
        assert!(matches!(evaluate_gold(&g, &[], 10), Err(EvalError::LengthMismatch { .. })));
        let mut bad = gold("a", &["x"]);
        bad.expected_false_positives.insert("x".into());
        assert!(matches!(validate_gold(&[bad]), Err(EvalError::GoldOverlap { .. })));
    }

    #[test]
    fn gold_counts_trap_hits() {
        let mut g = gold("a", &["x"]);
        g.expected_false_positives.insert("y".into());
        let m = evaluate_gold(&[g], &[predict("a", &["x", "y"], 0.6)], 10).unwrap();
        assert_eq!(m.false_positive_traps_hit, 1);
        assert_eq!(m.accuracy, 0.0);
    }

    #[test]
    fn agreement_report_counts() {
        let texts = vec!["t0".to_string(), "t1".to_string()];
        let features = vec!["a".to_string(), "b".to_string()];
        let mut r = FeatureMatrix::zeros(Method::Regex, texts.clone(), features.clone());
        let mut n = FeatureMatrix::zeros(Method::Neural, texts, features);
        r.freq = vec![vec![10.0, 0.0], vec![5.0, 0.0]];
        n.freq = vec![vec![12.0, 0.0], vec![10.0, 3.0]];
        for m in [&mut r, &mut n] {
            m.detected = m.freq.iter().map(|row| row.iter().map(|v| *v > 0.0).collect()).collect();
        }
        let rep = agreement_report(&r, &n).unwrap();
        assert_eq!((rep.frequency.positive, rep.frequency.negative), (1, 1));
        assert_eq!(rep.frequency.rate, 0.5);
        assert_eq!((rep.detection.positive, rep.detection.negative), (2, 1));
        assert_eq!(rep.detection.rate, 0.75);
        assert!(rep.correlation.is_some());
    }

    proptest! {
        #[test]
        fn agreement_is_symmetric(a in 0.0f64..100.0, b in 0.0f64..100.0) {
            prop_assert_eq!(agreement(a, b), agreement(b, a));
        }

        #[test]
        fn pearson_affine_invariance(
            pts in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..30),
            a in 0.1f64..10.0, b in -10.0f64..10.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            if let Ok(r) = pearson(&x, &y) {
                let xp: Vec<f64> = x.iter().map(|v| a * v + b).collect();
                let xn: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
                prop_assert!((pearson(&xp, &y).unwrap() - r).abs() < 1e-9);
                prop_assert!((pearson(&xn, &y).unwrap() + r).abs() < 1e-9);
            }
        }

        #[test]
        fn ece_in_unit_interval(
            preds in proptest::collection::vec((0.0f64..=1.0, any::<bool>()), 1..100),
            bins in 1usize..20,
        ) {
            let (c, ok): (Vec<f64>, Vec<bool>) = preds.into_iter().unzip();
            let r = ece(&c, &ok, bins).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.ece));
            prop_assert_eq!(r.bins.iter().map(|b| b.count).sum::<usize>(), c.len());
        }
    }
}
