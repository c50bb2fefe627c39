//! Corpus ingestion: normalization, word tokenization and manifest-driven loading.
//!
//! Texts are IAST-transliterated UTF-8. Normalization lowercases and composes to
//! NFC so that diacritics such as `ā`, `ṃ` and `ḷ` have exactly one encoding.
//! Tokens are maximal runs of letters, combining marks and the avagraha; all
//! other characters (whitespace, punctuation, digits, dandas) separate words.
//! Sandhi is never split.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Relative tolerance on `expected_word_count` before a warning is raised.
pub const WORD_COUNT_TOLERANCE: f64 = 0.005;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Encoding { offset: usize },
    #[error("manifest entry `{id}`: cannot read {path}: {source}")]
    MissingFile {
        id: String,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest entry `{id}`: invalid UTF-8 at byte offset {offset} in {path}")]
    FileEncoding { id: String, path: PathBuf, offset: usize },
    #[error("duplicate text id `{0}` in manifest")]
    DuplicateId(String),
    #[error("manifest entry `{id}`: unknown period `{period}`")]
    InvalidPeriod { id: String, period: String },
    #[error("manifest entry `{id}`: chrono_index {index} is duplicated or outside 0..{len}")]
    ChronoIndex { id: String, index: usize, len: usize },
    #[error("cannot read manifest {path}: {source}")]
    ManifestIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest: {0}")]
    ManifestFormat(#[from] serde_json::Error),
}

/// Chronological stratum of a text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodId {
    EarlyVedic,
    LateVedic,
    LatestVedic,
    Classical,
}

impl PeriodId {
    pub const ALL: [PeriodId; 4] = [
        PeriodId::EarlyVedic,
        PeriodId::LateVedic,
        PeriodId::LatestVedic,
        PeriodId::Classical,
    ];

    pub fn key(self) -> &'static str {
        match self {
            PeriodId::EarlyVedic => "early_vedic",
            PeriodId::LateVedic => "late_vedic",
            PeriodId::LatestVedic => "latest_vedic",
            PeriodId::Classical => "classical",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            PeriodId::EarlyVedic => "Early Vedic",
            PeriodId::LateVedic => "Late Vedic",
            PeriodId::LatestVedic => "Latest Vedic",
            PeriodId::Classical => "Classical",
        }
    }

    pub fn date_range(self) -> &'static str {
        match self {
            PeriodId::EarlyVedic => "1500-1000 BCE",
            PeriodId::LateVedic => "1000-700 BCE",
            PeriodId::LatestVedic => "700-300 BCE",
            PeriodId::Classical => "300 BCE-500 CE",
        }
    }
}

impl fmt::Display for PeriodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for PeriodId {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c.to_ascii_lowercase() })
            .collect();
        PeriodId::ALL.into_iter().find(|p| p.key() == key).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Byte offsets into the normalized text.
    pub byte_span: (usize, usize),
    pub word_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextDocument {
    pub id: String,
    pub title: String,
    pub period: PeriodId,
    pub chrono_index: usize,
    pub raw: String,
    pub normalized: String,
    pub tokens: Vec<Token>,
}

impl TextDocument {
    /// Builds a document, normalizing and tokenizing `raw`.
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        period: PeriodId,
        chrono_index: usize,
        raw: impl Into<String>,
    ) -> Self {
        let raw = raw.into();
        let normalized = normalize(&raw);
        let tokens = tokenize(&normalized);
        TextDocument {
            id: id.into(),
            title: title.into(),
            period,
            chrono_index,
            raw,
            normalized,
            tokens,
        }
    }

    pub fn word_count(&self) -> usize {
        self.tokens.len()
    }
}

/// Lowercases and composes to NFC.
pub fn normalize(raw: &str) -> String {
    let composed: String = raw.nfc().collect();
    composed.to_lowercase().nfc().collect()
}

/// Byte-level entry point; reports the offset of the first invalid sequence.
pub fn normalize_bytes(raw: &[u8]) -> Result<String, CorpusError> {
    std::str::from_utf8(raw)
        .map(normalize)
        .map_err(|e| CorpusError::Encoding { offset: e.valid_up_to() })
}

fn is_avagraha(c: char) -> bool {
    matches!(c, '\u{093D}' | '\'' | '\u{2019}')
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || is_combining_mark(c) || is_avagraha(c)
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    let push = |s: usize, e: usize, tokens: &mut Vec<Token>| {
        let surface = &text[s..e];
        // a run of bare apostrophes is quotation, not a word
        if surface.chars().all(is_avagraha) {
            return;
        }
        let word_index = tokens.len();
        tokens.push(Token {
            surface: surface.to_string(),
            byte_span: (s, e),
            word_index,
        });
    };
    for (i, c) in text.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                push(s, i, &mut tokens);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        push(s, text.len(), &mut tokens);
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub title: String,
    pub period: String,
    pub chrono_index: usize,
    pub file_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_word_count: Option<u64>,
}

/// Expected composition of one period; checked like `expected_word_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodTotals {
    pub texts: usize,
    pub words: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub entries: Vec<ManifestEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub period_totals: BTreeMap<PeriodId, PeriodTotals>,
}

impl CorpusManifest {
    pub fn from_json(s: &str) -> Result<Self, CorpusError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::ManifestIo {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Checks ids, periods and chrono indices without touching the filesystem.
    pub fn validate(&self) -> Result<Vec<PeriodId>, CorpusError> {
        let mut ids = HashSet::new();
        let mut seen = vec![false; self.entries.len()];
        let mut periods = Vec::with_capacity(self.entries.len());
        for entry in &self.entries {
            if !ids.insert(entry.id.as_str()) {
                return Err(CorpusError::DuplicateId(entry.id.clone()));
            }
            let period = entry.period.parse().map_err(|_| CorpusError::InvalidPeriod {
                id: entry.id.clone(),
                period: entry.period.clone(),
            })?;
            periods.push(period);
            let slot = seen.get_mut(entry.chrono_index).filter(|s| !**s);
            match slot {
                Some(s) => *s = true,
                None => {
                    return Err(CorpusError::ChronoIndex {
                        id: entry.id.clone(),
                        index: entry.chrono_index,
                        len: self.entries.len(),
                    })
                }
            }
        }
        Ok(periods)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadWarning {
    pub entry: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    /// Sorted by `chrono_index`.
    pub documents: Vec<TextDocument>,
    pub warnings: Vec<LoadWarning>,
}

impl LoadedCorpus {
    pub fn total_words(&self) -> usize {
        self.documents.iter().map(TextDocument::word_count).sum()
    }
}

fn outside_tolerance(actual: u64, expected: u64) -> bool {
    if expected == 0 {
        return actual != 0;
    }
    (actual as f64 - expected as f64).abs() / expected as f64 > WORD_COUNT_TOLERANCE
}

/// Loads every manifest entry; relative file paths resolve against `base_dir`.
pub fn load_corpus(manifest: &CorpusManifest, base_dir: &Path) -> Result<LoadedCorpus, CorpusError> {
    let periods = manifest.validate()?;
    let mut documents = Vec::with_capacity(manifest.entries.len());
    let mut warnings = Vec::new();
    for (entry, period) in manifest.entries.iter().zip(periods) {
        let path = base_dir.join(&entry.file_path);
        let bytes = std::fs::read(&path).map_err(|source| CorpusError::MissingFile {
            id: entry.id.clone(),
            path: path.clone(),
            source,
        })?;
        let raw = String::from_utf8(bytes).map_err(|e| CorpusError::FileEncoding {
            id: entry.id.clone(),
            path: path.clone(),
            offset: e.utf8_error().valid_up_to(),
        })?;
        let doc = TextDocument::new(&entry.id, &entry.title, period, entry.chrono_index, raw);
        if let Some(expected) = entry.expected_word_count {
            let actual = doc.word_count() as u64;
            if outside_tolerance(actual, expected) {
                warnings.push(LoadWarning {
                    entry: entry.id.clone(),
                    message: format!("word count {actual} differs from expected {expected} by more than 0.5%"),
                });
            }
        }
        if doc.word_count() == 0 {
            warnings.push(LoadWarning {
                entry: entry.id.clone(),
                message: "text has no tokens".into(),
            });
        }
        documents.push(doc);
    }
    documents.sort_by_key(|d| d.chrono_index);

    for (period, totals) in &manifest.period_totals {
        let docs: Vec<_> = documents.iter().filter(|d| d.period == *period).collect();
        let words: u64 = docs.iter().map(|d| d.word_count() as u64).sum();
        if docs.len() != totals.texts {
            warnings.push(LoadWarning {
                entry: period.key().into(),
                message: format!("period has {} texts, expected {}", docs.len(), totals.texts),
            });
        }
        if outside_tolerance(words, totals.words) {
            warnings.push(LoadWarning {
                entry: period.key().into(),
                message: format!("period has {words} words, expected {}", totals.words),
            });
        }
    }
    Ok(LoadedCorpus { documents, warnings })
}

/// SHA-256 over ids and normalized texts in chronological order.
pub fn corpus_hash<'a>(documents: impl IntoIterator<Item = &'a TextDocument>) -> String {
    let mut hasher = Sha256::new();
    for doc in documents {
        hasher.update(doc.id.as_bytes());
        hasher.update([0u8]);
        hasher.update(doc.normalized.as_bytes());
        hasher.update([0u8]);
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn normalize_lowercases_and_keeps_diacritics() {
        assert_eq!(normalize("Agním Īḷe"), "agním īḷe");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("PURÓHITAṂ"), "puróhitaṃ");
    }

    #[test]
    fn normalize_composes_decomposed_macron() {
        let decomposed = "a\u{0304}";
        let out = normalize(decomposed);
        assert_eq!(out, "\u{0101}");
        assert_eq!(out.chars().count(), 1);
        // ṃ as m + combining dot below
        assert_eq!(normalize("m\u{0323}"), "\u{1E43}");
        // ḷ as L + combining dot below, uppercase
        assert_eq!(normalize("L\u{0323}"), "\u{1E37}");
    }

    #[test]
    fn normalize_bytes_reports_offset() {
        let err = normalize_bytes(b"deva\xffsya").unwrap_err();
        assert!(matches!(err, CorpusError::Encoding { offset: 4 }));
        assert_eq!(normalize_bytes("Sóma".as_bytes()).unwrap(), "sóma");
    }

    #[test]
    fn tokenize_basic_examples() {
        assert_eq!(surfaces("agním īḷe puróhitaṃ"), ["agním", "īḷe", "puróhitaṃ"]);
        assert_eq!(surfaces("tat tvam asi ॥"), ["tat", "tvam", "asi"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize(" ।। 12 , ").is_empty());
    }

    #[test]
    fn tokenize_separators_and_sandhi() {
        assert_eq!(surfaces("indrāgnī।soma॥1॥vāyav"), ["indrāgnī", "soma", "vāyav"]);
        assert_eq!(surfaces("tvam3asi"), ["tvam", "asi"]);
        // sandhi compound stays whole; avagraha is word-internal
        assert_eq!(surfaces("so'ham ko'pi"), ["so'ham", "ko'pi"]);
        assert_eq!(surfaces("सोऽहम्"), ["सोऽहम्"]);
        // bare quotes are dropped
        assert_eq!(surfaces("' agni '"), ["agni"]);
    }

    #[test]
    fn tokenize_hundred_word_reference() {
        let words = ["agni", "indra", "sóma", "vāyu", "mitrá"];
        let seps = [" ", ", ", " । ", "; ", " 12 ", "\n", " ॥ ", "-", "(", ") "];
        let mut text = String::new();
        for i in 0..100 {
            text.push_str(words[i % words.len()]);
            text.push_str(seps[(i * 7) % seps.len()]);
        }
        let tokens = tokenize(&normalize(&text));
        // hand count: 100 words separated by non-letter runs
        assert_eq!(tokens.len(), 100);
        for (i, t) in tokens.iter().enumerate() {
            assert_eq!(t.word_index, i);
            assert_eq!(t.surface, words[i % words.len()]);
        }
    }

    #[test]
    fn token_spans_point_into_text() {
        let text = normalize("Agním īḷe, puróhitaṃ ॥");
        for t in tokenize(&text) {
            assert_eq!(&text[t.byte_span.0..t.byte_span.1], t.surface);
        }
    }

    #[test]
    fn period_parsing() {
        assert_eq!("early_vedic".parse(), Ok(PeriodId::EarlyVedic));
        assert_eq!("Latest Vedic".parse(), Ok(PeriodId::LatestVedic));
        assert_eq!("classical".parse(), Ok(PeriodId::Classical));
        assert!("medieval".parse::<PeriodId>().is_err());
    }

    fn write_corpus(dir: &Path, entries: &[(&str, &str, usize, &str)]) -> CorpusManifest {
        let mut manifest = CorpusManifest::default();
        for (id, period, chrono, body) in entries {
            let file = format!("{id}.txt");
            std::fs::write(dir.join(&file), body).unwrap();
            manifest.entries.push(ManifestEntry {
                id: id.to_string(),
                title: id.to_uppercase(),
                period: period.to_string(),
                chrono_index: *chrono,
                file_path: file.into(),
                expected_word_count: None,
            });
        }
        manifest
    }

    #[test]
    fn load_orders_by_chrono_index() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_corpus(
            dir.path(),
            &[
                ("c", "classical", 3, "ekaṃ dvi trīṇi"),
                ("a", "early_vedic", 0, "agním īḷe"),
                ("d", "latest_vedic", 2, "tat tvam asi"),
                ("b", "late_vedic", 1, "yajñaḥ"),
            ],
        );
        let corpus = load_corpus(&manifest, dir.path()).unwrap();
        let ids: Vec<_> = corpus.documents.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "d", "c"]);
        assert_eq!(corpus.total_words(), 2 + 1 + 3 + 3);
        assert!(corpus.warnings.is_empty());
    }

    #[test]
    fn load_rejects_duplicate_id() {
        let dir = tempfile::tempdir().unwrap();
        let mut manifest = write_corpus(dir.path(), &[("a", "early_vedic", 0, "x"), ("b", "classical", 1, "y")]);
        manifest.entries[1].id = "a".into();
        let err = load_corpus(&manifest, dir.path()).unwrap_err();
        assert!(err.to_string().contains("`a`"), "{err}");
    }

    #[test]
    fn load_rejects_bad_period_and_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut manifest = write_corpus(dir.path(), &[("a", "bronze_age", 0, "x")]);
        let err = load_corpus(&manifest, dir.path()).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidPeriod { ref id, .. } if id == "a"));

        manifest.entries[0].period = "classical".into();
        manifest.entries[0].file_path = "nope.txt".into();
        let err = load_corpus(&manifest, dir.path()).unwrap_err();
        assert!(matches!(err, CorpusError::MissingFile { ref id, .. } if id == "a"));
    }

    #[test]
    fn load_rejects_sparse_chrono_index() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_corpus(dir.path(), &[("a", "early_vedic", 0, "x"), ("b", "classical", 5, "y")]);
        assert!(matches!(
            load_corpus(&manifest, dir.path()),
            Err(CorpusError::ChronoIndex { index: 5, .. })
        ));
    }

    #[test]
    fn word_count_mismatch_warns() {
        let dir = tempfile::tempdir().unwrap();
        let mut manifest = write_corpus(dir.path(), &[("a", "early_vedic", 0, "eka dvi tri")]);
        manifest.entries[0].expected_word_count = Some(3);
        assert!(load_corpus(&manifest, dir.path()).unwrap().warnings.is_empty());
        manifest.entries[0].expected_word_count = Some(4);
        let warnings = load_corpus(&manifest, dir.path()).unwrap().warnings;
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].entry, "a");
    }

    #[test]
    fn table_template_layout_parses() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/templates/gretil_manifest.template.json");
        let manifest = CorpusManifest::from_path(&path).unwrap();
        let periods = manifest.validate().unwrap();
        let count = |p| periods.iter().filter(|x| **x == p).count();
        assert_eq!(
            [PeriodId::EarlyVedic, PeriodId::LateVedic, PeriodId::LatestVedic, PeriodId::Classical].map(count),
            [6, 5, 6, 3]
        );
        let words: Vec<u64> = PeriodId::ALL.iter().map(|p| manifest.period_totals[p].words).collect();
        assert_eq!(words, [590_283, 321_284, 36_192, 526_597]);
        assert_eq!(words.iter().sum::<u64>(), 1_474_356);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,40}") {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn concatenation_adds_token_counts(
            a in "[a-zA-Zāīūṛṃḥṅñṭḍṇśṣ ,.।॥0-9]{0,60}",
            b in "[a-zA-Zāīūṛṃḥṅñṭḍṇśṣ ,.।॥0-9]{0,60}",
        ) {
            let na = normalize(&a);
            let nb = normalize(&b);
            let joined = format!("{na} {nb}");
            prop_assert_eq!(tokenize(&joined).len(), tokenize(&na).len() + tokenize(&nb).len());
        }

        #[test]
        fn tokens_are_maximal_word_runs(s in "\\PC{0,60}") {
            let text = normalize(&s);
            let tokens = tokenize(&text);
            for pair in tokens.windows(2) {
                prop_assert!(pair[0].word_index < pair[1].word_index);
                prop_assert!(pair[0].byte_span.1 < pair[1].byte_span.0);
            }
            for t in &tokens {
                prop_assert!(text.is_char_boundary(t.byte_span.0));
                prop_assert!(text.is_char_boundary(t.byte_span.1));
                prop_assert!(t.surface.chars().all(is_word_char));
            }
            prop_assert_eq!(tokenize(&text), tokens);
        }
    }
}
