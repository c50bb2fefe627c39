//! Confidence-weighted combination of regex and neural frequencies.
//!
//! `f = (w_t·c·f_t + w_r·f_r) / (w_t·c + w_r)`, where `c` is the neural
//! confidence. Detection decisions use two confidence thresholds: a regex hit
//! always detects; a neural hit detects when `c ≥ high`, is ignored when
//! `c ≤ low`, and in between detects when the combined frequency is positive.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::{Category, FeatureMatrix, Method};

#[derive(Debug, Error, PartialEq)]
pub enum EnsembleError {
    #[error("degenerate weights: w_t·c + w_r = 0 (w_t={w_t}, c={c}, w_r={w_r})")]
    DegenerateWeights { w_t: f64, c: f64, w_r: f64 },
    #[error("invalid ensemble configuration: {0}")]
    Config(String),
    #[error("neural predictions do not align with the regex matrix: unknown texts {texts:?}, unknown features {features:?}")]
    Alignment { texts: Vec<String>, features: Vec<String> },
    #[error("duplicate neural prediction for text `{text_id}`, feature `{feature_id}`")]
    DuplicatePrediction { text_id: String, feature_id: String },
    #[error("prediction for text `{text_id}`, feature `{feature_id}`: {message}")]
    InvalidPrediction {
        text_id: String,
        feature_id: String,
        message: String,
    },
    #[error("{path}:{line}: {message}")]
    Read { path: String, line: usize, message: String },
}

/// Per-text, per-feature neural output; one JSON object per line on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralPrediction {
    pub text_id: String,
    pub feature_id: String,
    pub frequency: f64,
    pub confidence: f64,
}

impl NeuralPrediction {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let bad = |message: &str| EnsembleError::InvalidPrediction {
            text_id: self.text_id.clone(),
            feature_id: self.feature_id.clone(),
            message: message.to_string(),
        };
        if !self.frequency.is_finite() || self.frequency < 0.0 {
            return Err(bad("frequency must be finite and ≥ 0"));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(bad("confidence must lie in [0, 1]"));
        }
        Ok(())
    }
}

pub fn read_predictions(path: &Path) -> Result<Vec<NeuralPrediction>, EnsembleError> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| EnsembleError::Read {
        path: display.clone(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| EnsembleError::Read {
            path: display.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let p: NeuralPrediction = serde_json::from_str(&line).map_err(|e| EnsembleError::Read {
            path: display.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        p.validate()?;
        out.push(p);
    }
    Ok(out)
}

pub fn write_predictions<W: Write>(predictions: &[NeuralPrediction], mut out: W) -> std::io::Result<()> {
    for p in predictions {
        writeln!(out, "{}", serde_json::to_string(p).expect("prediction serializes"))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodWeights {
    pub transformer: f64,
    pub regex: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub regex_weight: f64,
    /// Defaults to `1 - regex_weight`.
    pub transformer_weight: Option<f64>,
    pub high_conf: f64,
    pub low_conf: f64,
    pub category_weights: BTreeMap<Category, MethodWeights>,
    /// Feature groups whose ensemble values are renormalized to sum to 1 per text.
    pub distribution_groups: BTreeMap<String, Vec<String>>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            regex_weight: 0.65,
            transformer_weight: None,
            high_conf: 0.75,
            low_conf: 0.25,
            category_weights: BTreeMap::new(),
            distribution_groups: BTreeMap::new(),
        }
    }
}

impl EnsembleConfig {
    pub fn default_weights(&self) -> MethodWeights {
        MethodWeights {
            transformer: self.transformer_weight.unwrap_or(1.0 - self.regex_weight),
            regex: self.regex_weight,
        }
    }

    pub fn weights_for(&self, category: Option<Category>) -> MethodWeights {
        category
            .and_then(|c| self.category_weights.get(&c).copied())
            .unwrap_or_else(|| self.default_weights())
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        let check = |w: MethodWeights, what: &str| {
            if !(w.transformer >= 0.0 && w.regex >= 0.0 && w.transformer + w.regex > 0.0) {
                return Err(EnsembleError::Config(format!(
                    "{what}: weights must be ≥ 0 with positive sum (w_t={}, w_r={})",
                    w.transformer, w.regex
                )));
            }
            Ok(())
        };
        if !(0.0..=1.0).contains(&self.regex_weight) {
            return Err(EnsembleError::Config(format!("regex weight {} outside [0, 1]", self.regex_weight)));
        }
        check(self.default_weights(), "default")?;
        for (cat, w) in &self.category_weights {
            check(*w, &format!("{cat:?}"))?;
        }
        if !(0.0 <= self.low_conf && self.low_conf <= self.high_conf && self.high_conf <= 1.0) {
            return Err(EnsembleError::Config(format!(
                "thresholds must satisfy 0 ≤ low ({}) ≤ high ({}) ≤ 1",
                self.low_conf, self.high_conf
            )));
        }
        Ok(())
    }
}

/// Confidence-weighted frequency. The result is kept inside `[min, max]` of the inputs.
pub fn combine(f_t: f64, f_r: f64, c: f64, w_t: f64, w_r: f64) -> Result<f64, EnsembleError> {
    let neural = w_t * c;
    let denom = neural + w_r;
    if denom == 0.0 || !denom.is_finite() {
        return Err(EnsembleError::DegenerateWeights { w_t, c, w_r });
    }
    if neural == 0.0 {
        return Ok(f_r);
    }
    if w_r == 0.0 {
        return Ok(f_t);
    }
    let value = (neural * f_t + w_r * f_r) / denom;
    Ok(value.clamp(f_t.min(f_r), f_t.max(f_r)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionSource {
    Both,
    RegexOnly,
    NeuralOnly,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub detected: bool,
    pub source: DecisionSource,
}

/// Detection decision with explicit weights (used for the between-threshold case).
pub fn decide_weighted(f_r: f64, f_t: f64, c: f64, config: &EnsembleConfig, weights: MethodWeights) -> Decision {
    let regex_fires = f_r > 0.0;
    let neural_fires = f_t > 0.0
        && if c >= config.high_conf {
            true
        } else if c <= config.low_conf {
            false
        } else {
            combine(f_t, f_r, c, weights.transformer, weights.regex).is_ok_and(|f| f > 0.0)
        };
    let source = match (regex_fires, neural_fires) {
        (true, true) => DecisionSource::Both,
        (true, false) => DecisionSource::RegexOnly,
        (false, true) => DecisionSource::NeuralOnly,
        (false, false) => DecisionSource::None,
    };
    Decision {
        detected: regex_fires || neural_fires,
        source,
    }
}

pub fn decide(f_r: f64, f_t: f64, c: f64, config: &EnsembleConfig) -> Decision {
    decide_weighted(f_r, f_t, c, config, config.default_weights())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCell {
    pub feature_id: String,
    pub text_id: String,
    pub f_regex: f64,
    pub f_neural: f64,
    pub confidence: f64,
    pub w_t: f64,
    pub w_r: f64,
    pub f_ensemble: f64,
    pub detected: bool,
    pub decision_source: DecisionSource,
    /// False when no neural record existed for this cell.
    pub neural_present: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub matrix: FeatureMatrix,
    /// Feature-major, matching `matrix` rows then columns.
    pub cells: Vec<EnsembleCell>,
    pub config: EnsembleConfig,
}

impl EnsembleResult {
    pub fn cell(&self, feature: usize, text: usize) -> &EnsembleCell {
        &self.cells[feature * self.matrix.num_texts() + text]
    }

    pub fn source_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for c in &self.cells {
            let key = serde_json::to_value(c.decision_source).expect("enum serializes");
            *out.entry(key.as_str().unwrap_or_default().to_string()).or_insert(0) += 1;
        }
        out
    }
}

/// Aligns neural records to the regex matrix; missing records become `f_t = 0, c = 0`.
pub fn align_predictions(
    regex: &FeatureMatrix,
    neural: &[NeuralPrediction],
) -> Result<Vec<Vec<Option<(f64, f64)>>>, EnsembleError> {
    let texts: HashMap<&str, usize> = regex.texts.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let features: HashMap<&str, usize> = regex.features.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();
    let mut grid = vec![vec![None; regex.num_texts()]; regex.num_features()];
    let mut orphan_texts = HashSet::new();
    let mut orphan_features = HashSet::new();
    for p in neural {
        p.validate()?;
        let (t, f) = (texts.get(p.text_id.as_str()), features.get(p.feature_id.as_str()));
        if t.is_none() {
            orphan_texts.insert(p.text_id.clone());
        }
        if f.is_none() {
            orphan_features.insert(p.feature_id.clone());
        }
        if let (Some(&t), Some(&f)) = (t, f) {
            if grid[f][t].replace((p.frequency, p.confidence)).is_some() {
                return Err(EnsembleError::DuplicatePrediction {
                    text_id: p.text_id.clone(),
                    feature_id: p.feature_id.clone(),
                });
            }
        }
    }
    if !orphan_texts.is_empty() || !orphan_features.is_empty() {
        let mut texts: Vec<_> = orphan_texts.into_iter().collect();
        let mut features: Vec<_> = orphan_features.into_iter().collect();
        texts.sort();
        features.sort();
        return Err(EnsembleError::Alignment { texts, features });
    }
    Ok(grid)
}

/// Builds a neural frequency matrix from aligned predictions (`c > 0` not required).
pub fn neural_matrix(regex: &FeatureMatrix, neural: &[NeuralPrediction]) -> Result<FeatureMatrix, EnsembleError> {
    let grid = align_predictions(regex, neural)?;
    let mut m = FeatureMatrix::zeros(Method::Neural, regex.texts.clone(), regex.features.clone());
    for (f, row) in grid.iter().enumerate() {
        for (t, cell) in row.iter().enumerate() {
            let (freq, _) = cell.unwrap_or((0.0, 0.0));
            m.freq[f][t] = freq;
            m.detected[f][t] = freq > 0.0;
        }
    }
    Ok(m)
}

pub fn combine_matrix(
    regex: &FeatureMatrix,
    neural: &[NeuralPrediction],
    config: &EnsembleConfig,
    categories: &BTreeMap<String, Category>,
) -> Result<EnsembleResult, EnsembleError> {
    config.validate()?;
    let grid = align_predictions(regex, neural)?;
    let mut matrix = FeatureMatrix::zeros(Method::Ensemble, regex.texts.clone(), regex.features.clone());
    let mut cells = Vec::with_capacity(regex.num_features() * regex.num_texts());
    for (f, feature_id) in regex.features.iter().enumerate() {
        let weights = config.weights_for(categories.get(feature_id).copied());
        for (t, text_id) in regex.texts.iter().enumerate() {
            let f_r = regex.freq[f][t];
            let (f_t, c) = grid[f][t].unwrap_or((0.0, 0.0));
            let f_ens = match grid[f][t] {
                Some(_) => combine(f_t, f_r, c, weights.transformer, weights.regex)?,
                None => f_r,
            };
            let decision = decide_weighted(f_r, f_t, c, config, weights);
            matrix.freq[f][t] = f_ens;
            matrix.detected[f][t] = decision.detected;
            cells.push(EnsembleCell {
                feature_id: feature_id.clone(),
                text_id: text_id.clone(),
                f_regex: f_r,
                f_neural: f_t,
                confidence: c,
                w_t: weights.transformer,
                w_r: weights.regex,
                f_ensemble: f_ens,
                detected: decision.detected,
                decision_source: decision.source,
                neural_present: grid[f][t].is_some(),
            });
        }
    }
    renormalize_groups(&mut matrix, &mut cells, &config.distribution_groups);
    matrix.token_counts = regex.token_counts.clone();
    Ok(EnsembleResult {
        matrix,
        cells,
        config: config.clone(),
    })
}

fn renormalize_groups(matrix: &mut FeatureMatrix, cells: &mut [EnsembleCell], groups: &BTreeMap<String, Vec<String>>) {
    let nt = matrix.num_texts();
    for members in groups.values() {
        let rows: Vec<usize> = members.iter().filter_map(|m| matrix.feature_index(m)).collect();
        for t in 0..nt {
            let total: f64 = rows.iter().map(|&f| matrix.freq[f][t]).sum();
            if total > 0.0 {
                for &f in &rows {
                    matrix.freq[f][t] /= total;
                    cells[f * nt + t].f_ensemble = matrix.freq[f][t];
                }
            }
        }
    }
}

pub fn write_cells_csv<W: Write>(result: &EnsembleResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "feature_id",
        "text_id",
        "f_regex",
        "f_neural",
        "confidence",
        "w_t",
        "w_r",
        "f_ensemble",
        "detected",
        "decision_source",
    ])?;
    for c in &result.cells {
        let source = serde_json::to_value(c.decision_source).expect("enum serializes");
        w.write_record([
            c.feature_id.clone(),
            c.text_id.clone(),
            c.f_regex.to_string(),
            c.f_neural.to_string(),
            c.confidence.to_string(),
            c.w_t.to_string(),
            c.w_r.to_string(),
            c.f_ensemble.to_string(),
            c.detected.to_string(),
            source.as_str().unwrap_or_default().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn combine_examples() {
        assert_eq!(combine(12.0, 3.0, 0.0, 0.35, 0.65), Ok(3.0));
        for c in [0.0, 0.3, 1.0] {
            assert_eq!(combine(7.5, 7.5, c, 0.35, 0.65), Ok(7.5));
        }
        // (0.35·0.8·10 + 0.65·20) / (0.35·0.8 + 0.65) = 15.8 / 0.93
        let v = combine(10.0, 20.0, 0.8, 0.35, 0.65).unwrap();
        assert!((v - 16.989_247_311_827_956).abs() < 1e-12, "{v}");
    }

    #[test]
    fn combine_degenerate() {
        assert!(matches!(combine(1.0, 2.0, 0.0, 0.35, 0.0), Err(EnsembleError::DegenerateWeights { .. })));
        assert!(matches!(combine(1.0, 2.0, 0.5, 0.0, 0.0), Err(EnsembleError::DegenerateWeights { .. })));
        assert_eq!(combine(1.0, 2.0, 0.5, 0.35, 0.0), Ok(1.0));
    }

    #[test]
    fn decide_examples() {
        let cfg = EnsembleConfig::default();
        assert_eq!(decide(2.0, 0.0, 0.3, &cfg), Decision { detected: true, source: DecisionSource::RegexOnly });
        assert_eq!(decide(0.0, 3.0, 0.9, &cfg), Decision { detected: true, source: DecisionSource::NeuralOnly });
        assert_eq!(decide(0.0, 3.0, 0.1, &cfg), Decision { detected: false, source: DecisionSource::None });
        assert_eq!(decide(0.0, 3.0, 0.5, &cfg), Decision { detected: true, source: DecisionSource::NeuralOnly });
        assert_eq!(decide(1.0, 3.0, 0.25, &cfg), Decision { detected: true, source: DecisionSource::RegexOnly });
        assert_eq!(decide(1.0, 3.0, 0.75, &cfg), Decision { detected: true, source: DecisionSource::Both });
    }

    #[test]
    fn between_thresholds_needs_transformer_weight() {
        let mut cfg = EnsembleConfig::default();
        cfg.transformer_weight = Some(0.0);
        assert!(!decide(0.0, 3.0, 0.5, &cfg).detected);
        // high confidence still fires
        assert!(decide(0.0, 3.0, 0.8, &cfg).detected);
    }

    #[test]
    fn config_validation() {
        assert!(EnsembleConfig::default().validate().is_ok());
        let cfg = EnsembleConfig { low_conf: 0.8, high_conf: 0.7, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = EnsembleConfig { regex_weight: 1.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        let mut cfg = EnsembleConfig::default();
        cfg.category_weights.insert(Category::Lexical, MethodWeights { transformer: 0.0, regex: 0.0 });
        assert!(cfg.validate().is_err());
    }

    fn regex_matrix() -> FeatureMatrix {
        let mut m = FeatureMatrix::zeros(
            Method::Regex,
            vec!["t0".into(), "t1".into()],
            vec!["a".into(), "b".into()],
        );
        m.freq = vec![vec![2.0, 0.0], vec![0.0, 4.0]];
        m.detected = vec![vec![true, false], vec![false, true]];
        m
    }

    fn pred(t: &str, f: &str, freq: f64, c: f64) -> NeuralPrediction {
        NeuralPrediction { text_id: t.into(), feature_id: f.into(), frequency: freq, confidence: c }
    }

    #[test]
    fn matrix_without_neural_is_regex() {
        let m = regex_matrix();
        let r = combine_matrix(&m, &[], &EnsembleConfig::default(), &BTreeMap::new()).unwrap();
        assert_eq!(r.matrix.freq, m.freq);
        assert_eq!(r.matrix.detected, m.detected);
        assert!(r
            .cells
            .iter()
            .all(|c| matches!(c.decision_source, DecisionSource::RegexOnly | DecisionSource::None)));
    }

    #[test]
    fn matrix_with_zero_regex_and_confident_neural() {
        let mut m = regex_matrix();
        m.freq = vec![vec![0.0; 2]; 2];
        m.detected = vec![vec![false; 2]; 2];
        let neural = vec![pred("t0", "a", 3.0, 0.9), pred("t1", "a", 1.5, 0.95), pred("t0", "b", 6.0, 0.8)];
        let r = combine_matrix(&m, &neural, &EnsembleConfig::default(), &BTreeMap::new()).unwrap();
        // f_r = 0 pulls the blend toward zero: w_t·c·f_t / (w_t·c + w_r)
        let blend = |f_t: f64, c: f64| 0.35 * c * f_t / (0.35 * c + 0.65);
        assert!((r.matrix.freq[0][0] - blend(3.0, 0.9)).abs() < 1e-15);
        assert!((r.matrix.freq[0][1] - blend(1.5, 0.95)).abs() < 1e-15);
        assert!((r.matrix.freq[1][0] - blend(6.0, 0.8)).abs() < 1e-15);
        assert_eq!(r.matrix.freq[1][1], 0.0);
        assert_eq!(r.cell(0, 0).decision_source, DecisionSource::NeuralOnly);
        assert_eq!(r.cell(1, 1).decision_source, DecisionSource::None);
        assert!(!r.cell(1, 1).neural_present);
    }

    #[test]
    fn alignment_errors() {
        let m = regex_matrix();
        let err = combine_matrix(&m, &[pred("zz", "a", 1.0, 0.5), pred("t0", "q", 1.0, 0.5)], &EnsembleConfig::default(), &BTreeMap::new())
            .unwrap_err();
        assert_eq!(err, EnsembleError::Alignment { texts: vec!["zz".into()], features: vec!["q".into()] });
        let err = combine_matrix(&m, &[pred("t0", "a", 1.0, 0.5), pred("t0", "a", 2.0, 0.5)], &EnsembleConfig::default(), &BTreeMap::new())
            .unwrap_err();
        assert!(matches!(err, EnsembleError::DuplicatePrediction { .. }));
        let err = combine_matrix(&m, &[pred("t0", "a", 1.0, 1.5)], &EnsembleConfig::default(), &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, EnsembleError::InvalidPrediction { .. }));
    }

    #[test]
    fn category_weights_apply() {
        let m = regex_matrix();
        let mut cfg = EnsembleConfig::default();
        cfg.category_weights.insert(Category::Lexical, MethodWeights { transformer: 1.0, regex: 0.0 });
        let cats: BTreeMap<_, _> = [("a".to_string(), Category::Lexical)].into();
        let r = combine_matrix(&m, &[pred("t0", "a", 9.0, 0.5)], &cfg, &cats).unwrap();
        assert_eq!(r.cell(0, 0).f_ensemble, 9.0);
        assert_eq!(r.cell(0, 0).w_r, 0.0);
    }

    #[test]
    fn distribution_groups_sum_to_one() {
        let mut m = regex_matrix();
        m.freq = vec![vec![0.2, 0.5], vec![0.6, 0.5]];
        let mut cfg = EnsembleConfig::default();
        cfg.distribution_groups.insert("g".into(), vec!["a".into(), "b".into()]);
        let neural = vec![pred("t0", "a", 0.4, 0.9), pred("t0", "b", 0.6, 0.9)];
        let r = combine_matrix(&m, &neural, &cfg, &BTreeMap::new()).unwrap();
        for t in 0..2 {
            let s = r.matrix.freq[0][t] + r.matrix.freq[1][t];
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn predictions_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("n.jsonl");
        let preds = vec![pred("t0", "a", 1.25, 0.5), pred("t1", "b", 0.0, 0.0)];
        write_predictions(&preds, File::create(&path).unwrap()).unwrap();
        assert_eq!(read_predictions(&path).unwrap(), preds);
        std::fs::write(&path, "{\"text_id\":1}\n").unwrap();
        assert!(matches!(read_predictions(&path), Err(EnsembleError::Read { line: 1, .. })));
    }

    proptest! {
        #[test]
        fn combine_is_convex_and_monotone(
            f_t in 0.0f64..500.0, f_r in 0.0f64..500.0, c in 0.0f64..=1.0,
            w_t in 0.0f64..1.0, w_r in 0.01f64..1.0, bump in 0.0f64..10.0,
        ) {
            let v = combine(f_t, f_r, c, w_t, w_r).unwrap();
            prop_assert!(v >= f_t.min(f_r) && v <= f_t.max(f_r));
            prop_assert!(combine(f_t + bump, f_r, c, w_t, w_r).unwrap() >= v - 1e-9);
            prop_assert!(combine(f_t, f_r + bump, c, w_t, w_r).unwrap() >= v - 1e-9);
            let c2 = (c + 0.1).min(1.0);
            let v2 = combine(f_t, f_r, c2, w_t, w_r).unwrap();
            prop_assert!((v2 - f_t).abs() <= (v - f_t).abs() + 1e-9);
        }

        #[test]
        fn decide_is_monotone_in_confidence(f_r in 0.0f64..5.0, f_t in 0.0f64..5.0, c in 0.0f64..=1.0, dc in 0.0f64..1.0) {
            let cfg = EnsembleConfig::default();
            if decide(f_r, f_t, c, &cfg).detected {
                prop_assert!(decide(f_r, f_t, (c + dc).min(1.0), &cfg).detected);
            }
        }
    }
}
