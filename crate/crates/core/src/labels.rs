//! Weak-label generation from retained pattern matches, and the JSON-Lines
//! label file with its feature-index sidecar.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{corpus_hash, TextDocument};
use crate::pattern::{scan_document, CompiledCatalog};

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed label: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("label file {path} has {found} lines but its header declares {declared}")]
    CountMismatch { path: PathBuf, found: usize, declared: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLabel {
    pub text_id: String,
    pub word_index: usize,
    pub word: String,
    pub context: String,
    pub feature_id: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSet {
    pub labels: Vec<WeakLabel>,
    pub catalog_version: String,
    pub corpus_hash: String,
}

/// Sidecar written next to the label file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelHeader {
    pub catalog_version: String,
    pub corpus_hash: String,
    pub label_count: usize,
    /// Column of each feature in the multi-hot training target.
    pub feature_index: BTreeMap<String, usize>,
}

impl LabelSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn counts_by_feature(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for l in &self.labels {
            *out.entry(l.feature_id.clone()).or_insert(0) += 1;
        }
        out
    }
}

/// One label per retained match, ordered by (chrono index, word index, feature id).
pub fn generate_labels(corpus: &[TextDocument], catalog: &CompiledCatalog, window: usize) -> LabelSet {
    let mut docs: Vec<&TextDocument> = corpus.iter().collect();
    docs.sort_by_key(|d| d.chrono_index);
    let hash = corpus_hash(docs.iter().copied());
    let mut labels = Vec::new();
    for doc in docs {
        let mut found: Vec<WeakLabel> = scan_document(doc, catalog, window)
            .into_iter()
            .map(|m| WeakLabel {
                text_id: m.text_id,
                word_index: m.word_index,
                word: m.matched_surface,
                context: m.context,
                feature_id: m.feature_id,
                confidence: m.confidence,
            })
            .collect();
        found.sort_by(|a, b| (a.word_index, &a.feature_id).cmp(&(b.word_index, &b.feature_id)));
        labels.extend(found);
    }
    LabelSet {
        labels,
        catalog_version: catalog.version.clone(),
        corpus_hash: hash,
    }
}

/// `labels.jsonl` → `labels.header.json`.
pub fn header_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.header.json"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabelError + '_ {
    move |source| LabelError::Io { path: path.to_path_buf(), source }
}

/// Writes one JSON object per line plus the header sidecar.
pub fn export_labels(labels: &LabelSet, feature_ids: &[String], path: &Path) -> Result<PathBuf, LabelError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for label in &labels.labels {
        let line = serde_json::to_string(label).expect("label serializes");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))?;

    let header = LabelHeader {
        catalog_version: labels.catalog_version.clone(),
        corpus_hash: labels.corpus_hash.clone(),
        label_count: labels.len(),
        feature_index: feature_ids.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect(),
    };
    let hpath = header_path(path);
    let body = serde_json::to_string_pretty(&header).expect("header serializes");
    std::fs::write(&hpath, body + "\n").map_err(io_err(&hpath))?;
    Ok(hpath)
}

pub fn import_labels(path: &Path) -> Result<(LabelSet, LabelHeader), LabelError> {
    let hpath = header_path(path);
    let htext = std::fs::read_to_string(&hpath).map_err(io_err(&hpath))?;
    let header: LabelHeader = serde_json::from_str(&htext).map_err(|source| LabelError::Parse {
        path: hpath.clone(),
        line: 1,
        source,
    })?;
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut labels = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        labels.push(serde_json::from_str(&line).map_err(|source| LabelError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?);
    }
    if labels.len() != header.label_count {
        return Err(LabelError::CountMismatch {
            path: path.to_path_buf(),
            found: labels.len(),
            declared: header.label_count,
        });
    }
    let set = LabelSet {
        labels,
        catalog_version: header.catalog_version.clone(),
        corpus_hash: header.corpus_hash.clone(),
    };
    Ok((set, header))
}
