//! Contextual feature patterns and the confidence-weighted scanner.
//!
//! A pattern is a base expression matched against whole token surfaces, plus
//! positive and negative cue expressions evaluated against the ±`window` token
//! context around each hit. Each cue counts once per window. The match confidence
//! is `clamp[0.1, 0.95](0.6 + 0.2·positives − 0.3·negatives)` and matches below
//! 0.4 are discarded.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use regex::{Regex, RegexSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::TextDocument;

pub const DEFAULT_WINDOW: usize = 20;
pub const MIN_CONFIDENCE: f64 = 0.4;
pub const CONFIDENCE_FLOOR: f64 = 0.1;
pub const CONFIDENCE_CEILING: f64 = 0.95;

// The formula in twentieths: 0.6 = 12, 0.2 = 4, 0.3 = 6, 0.1 = 2, 0.95 = 19, 0.4 = 8.
const UNITS: f64 = 20.0;
const BASE_UNITS: i64 = 12;
const POSITIVE_UNITS: i64 = 4;
const NEGATIVE_UNITS: i64 = 6;
const FLOOR_UNITS: i64 = 2;
const CEILING_UNITS: i64 = 19;
const RETAIN_UNITS: i64 = 8;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("feature `{feature_id}`: invalid {role} expression `{pattern}`: {message}")]
    Regex {
        feature_id: String,
        role: &'static str,
        pattern: String,
        message: String,
    },
    #[error("duplicate feature id `{0}` in catalog")]
    DuplicateFeature(String),
    #[error("declared category count for {category:?} is {declared}, catalog has {actual}")]
    CategoryCount {
        category: Category,
        declared: usize,
        actual: usize,
    },
    #[error("cannot read catalog {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed catalog: {0}")]
    Format(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Phonological,
    Morphological,
    Syntactic,
    Lexical,
    Stylistic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeaturePattern {
    pub feature_id: String,
    pub category: Category,
    pub base_regex: String,
    #[serde(default)]
    pub positive_contexts: Vec<String>,
    #[serde(default)]
    pub negative_contexts: Vec<String>,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCatalog {
    pub version: String,
    pub patterns: Vec<FeaturePattern>,
    /// Optional declared counts; checked against `patterns` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_counts: Option<BTreeMap<Category, usize>>,
}

impl PatternCatalog {
    pub fn from_json(s: &str) -> Result<Self, CatalogError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|e| CatalogError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn category_counts(&self) -> BTreeMap<Category, usize> {
        let mut counts = BTreeMap::new();
        for p in &self.patterns {
            *counts.entry(p.category).or_insert(0) += 1;
        }
        counts
    }

    pub fn feature_ids(&self) -> Vec<String> {
        self.patterns.iter().map(|p| p.feature_id.clone()).collect()
    }

    pub fn categories(&self) -> BTreeMap<String, Category> {
        self.patterns.iter().map(|p| (p.feature_id.clone(), p.category)).collect()
    }

    /// Validates ids and declared counts and compiles every expression.
    pub fn compile(&self) -> Result<CompiledCatalog, CatalogError> {
        let mut seen = HashSet::new();
        for p in &self.patterns {
            if !seen.insert(p.feature_id.as_str()) {
                return Err(CatalogError::DuplicateFeature(p.feature_id.clone()));
            }
        }
        if let Some(declared) = &self.category_counts {
            let actual = self.category_counts();
            for category in [
                Category::Phonological,
                Category::Morphological,
                Category::Syntactic,
                Category::Lexical,
                Category::Stylistic,
            ] {
                let d = declared.get(&category).copied().unwrap_or(0);
                let a = actual.get(&category).copied().unwrap_or(0);
                if d != a {
                    return Err(CatalogError::CategoryCount { category, declared: d, actual: a });
                }
            }
        }
        let patterns = self
            .patterns
            .iter()
            .map(CompiledPattern::new)
            .collect::<Result<Vec<_>, _>>()?;
        let anchored: Vec<&str> = patterns.iter().map(|p| p.base.as_str()).collect();
        let base_set = RegexSet::new(anchored).map_err(|e| CatalogError::Regex {
            feature_id: "*".into(),
            role: "base",
            pattern: String::new(),
            message: e.to_string(),
        })?;
        Ok(CompiledCatalog {
            version: self.version.clone(),
            patterns,
            base_set,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CompiledPattern {
    pub feature_id: String,
    pub category: Category,
    base: Regex,
    positives: Vec<Regex>,
    negatives: Vec<Regex>,
}

fn compile_expr(feature_id: &str, role: &'static str, source: &str, anchored: bool) -> Result<Regex, CatalogError> {
    let source: String = source.nfc().collect();
    let full = if anchored { format!(r"\A(?:{source})\z") } else { source.clone() };
    Regex::new(&full).map_err(|e| CatalogError::Regex {
        feature_id: feature_id.to_string(),
        role,
        pattern: source,
        message: e.to_string(),
    })
}

impl CompiledPattern {
    pub fn new(pattern: &FeaturePattern) -> Result<Self, CatalogError> {
        let id = &pattern.feature_id;
        Ok(CompiledPattern {
            feature_id: id.clone(),
            category: pattern.category,
            base: compile_expr(id, "base", &pattern.base_regex, true)?,
            positives: pattern
                .positive_contexts
                .iter()
                .map(|s| compile_expr(id, "positive context", s, false))
                .collect::<Result<_, _>>()?,
            negatives: pattern
                .negative_contexts
                .iter()
                .map(|s| compile_expr(id, "negative context", s, false))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn matches_word(&self, surface: &str) -> bool {
        self.base.is_match(surface)
    }

    /// Number of distinct positive and negative cues present in `context`.
    pub fn context_counts(&self, context: &str) -> (usize, usize) {
        let pos = self.positives.iter().filter(|r| r.is_match(context)).count();
        let neg = self.negatives.iter().filter(|r| r.is_match(context)).count();
        (pos, neg)
    }
}

#[derive(Debug, Clone)]
pub struct CompiledCatalog {
    pub version: String,
    pub patterns: Vec<CompiledPattern>,
    base_set: RegexSet,
}

impl CompiledCatalog {
    pub fn feature_ids(&self) -> Vec<String> {
        self.patterns.iter().map(|p| p.feature_id.clone()).collect()
    }
}

fn confidence_units(positives: usize, negatives: usize) -> i64 {
    let pos = i64::try_from(positives).unwrap_or(i64::MAX / 8);
    let neg = i64::try_from(negatives).unwrap_or(i64::MAX / 8);
    (BASE_UNITS + POSITIVE_UNITS * pos - NEGATIVE_UNITS * neg).clamp(FLOOR_UNITS, CEILING_UNITS)
}

/// Match confidence from the number of matched positive and negative cues.
///
/// Evaluated in exact twentieths, so `(2, 1)` yields the double nearest 0.7.
pub fn match_confidence(positives: usize, negatives: usize) -> f64 {
    confidence_units(positives, negatives) as f64 / UNITS
}

/// Whether a match with these cue counts clears the 0.4 retention threshold.
pub fn is_retained(positives: usize, negatives: usize) -> bool {
    confidence_units(positives, negatives) >= RETAIN_UNITS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatch {
    pub feature_id: String,
    pub text_id: String,
    pub word_index: usize,
    pub matched_surface: String,
    pub confidence: f64,
    pub positives_matched: usize,
    pub negatives_matched: usize,
    /// Window tokens joined by single spaces.
    pub context: String,
}

/// Tokens at word distance ≤ `window` from `index`, space-joined.
pub fn context_window(doc: &TextDocument, index: usize, window: usize) -> String {
    let lo = index.saturating_sub(window);
    let hi = index.saturating_add(window).min(doc.tokens.len().saturating_sub(1));
    let mut out = String::new();
    for (k, t) in doc.tokens[lo..=hi].iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        out.push_str(&t.surface);
    }
    out
}

fn evaluate_hit(doc: &TextDocument, pattern: &CompiledPattern, index: usize, window: usize) -> Option<FeatureMatch> {
    let context = context_window(doc, index, window);
    let (pos, neg) = pattern.context_counts(&context);
    if !is_retained(pos, neg) {
        return None;
    }
    Some(FeatureMatch {
        feature_id: pattern.feature_id.clone(),
        text_id: doc.id.clone(),
        word_index: index,
        matched_surface: doc.tokens[index].surface.clone(),
        confidence: match_confidence(pos, neg),
        positives_matched: pos,
        negatives_matched: neg,
        context,
    })
}

/// Retained matches of one pattern in word order.
pub fn scan_text(doc: &TextDocument, pattern: &CompiledPattern, window: usize) -> Vec<FeatureMatch> {
    doc.tokens
        .iter()
        .filter(|t| pattern.matches_word(&t.surface))
        .filter_map(|t| evaluate_hit(doc, pattern, t.word_index, window))
        .collect()
}

/// Retained matches of every pattern, ordered by (word index, catalog order).
pub fn scan_document(doc: &TextDocument, catalog: &CompiledCatalog, window: usize) -> Vec<FeatureMatch> {
    let mut out = Vec::new();
    for token in &doc.tokens {
        for i in catalog.base_set.matches(&token.surface).iter() {
            if let Some(m) = evaluate_hit(doc, &catalog.patterns[i], token.word_index, window) {
                out.push(m);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Regex,
    Neural,
    Ensemble,
}

/// Per-feature, per-text frequencies per 1,000 words. Rows are features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub method: Method,
    pub texts: Vec<String>,
    pub features: Vec<String>,
    pub freq: Vec<Vec<f64>>,
    pub detected: Vec<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_counts: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_counts: Option<Vec<usize>>,
}

impl FeatureMatrix {
    pub fn zeros(method: Method, texts: Vec<String>, features: Vec<String>) -> Self {
        let (nf, nt) = (features.len(), texts.len());
        FeatureMatrix {
            method,
            texts,
            features,
            freq: vec![vec![0.0; nt]; nf],
            detected: vec![vec![false; nt]; nf],
            match_counts: None,
            token_counts: None,
        }
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn num_texts(&self) -> usize {
        self.texts.len()
    }

    pub fn feature_index(&self, id: &str) -> Option<usize> {
        self.features.iter().position(|f| f == id)
    }

    pub fn text_index(&self, id: &str) -> Option<usize> {
        self.texts.iter().position(|t| t == id)
    }

    pub fn detection_count(&self) -> usize {
        self.detected.iter().flatten().filter(|d| **d).count()
    }

    /// CSV: header `feature_id,<text ids>`, one row per feature.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["feature_id".to_string()];
        header.extend(self.texts.iter().cloned());
        w.write_record(&header)?;
        for (fid, row) in self.features.iter().zip(&self.freq) {
            let mut rec = vec![fid.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanWarning {
    pub text_id: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Detection {
    pub matrix: FeatureMatrix,
    /// Ordered by (chrono order of text, word index, catalog order).
    pub matches: Vec<FeatureMatch>,
    pub warnings: Vec<ScanWarning>,
}

/// Scans every document with every pattern and builds the regex frequency matrix.
pub fn detect_all(corpus: &[TextDocument], catalog: &CompiledCatalog, window: usize) -> Detection {
    let texts: Vec<String> = corpus.iter().map(|d| d.id.clone()).collect();
    let mut matrix = FeatureMatrix::zeros(Method::Regex, texts, catalog.feature_ids());
    let mut counts = vec![vec![0usize; corpus.len()]; catalog.patterns.len()];
    let mut matches = Vec::new();
    let mut warnings = Vec::new();
    let index: BTreeMap<&str, usize> = catalog
        .patterns
        .iter()
        .enumerate()
        .map(|(i, p)| (p.feature_id.as_str(), i))
        .collect();

    for (t, doc) in corpus.iter().enumerate() {
        if doc.tokens.is_empty() {
            warnings.push(ScanWarning {
                text_id: doc.id.clone(),
                message: "zero-token text; frequencies set to 0".into(),
            });
            continue;
        }
        let found = scan_document(doc, catalog, window);
        for m in &found {
            counts[index[m.feature_id.as_str()]][t] += 1;
        }
        matches.extend(found);
        let words = doc.tokens.len() as f64;
        for f in 0..catalog.patterns.len() {
            let c = counts[f][t];
            matrix.freq[f][t] = 1000.0 * c as f64 / words;
            matrix.detected[f][t] = c > 0;
        }
    }
    matrix.match_counts = Some(counts);
    matrix.token_counts = Some(corpus.iter().map(TextDocument::word_count).collect());
    Detection { matrix, matches, warnings }
}
