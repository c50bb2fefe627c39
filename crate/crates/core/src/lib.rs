//! Diachronic detection and analysis of grammatical features in a period-tagged corpus.
//!
//! The pipeline is: load and normalize texts ([`corpus`]), scan them with a
//! regex catalog ([`pattern`]), export weak labels ([`labels`]), blend regex
//! and neural frequencies ([`ensemble`]), score agreement and calibration
//! ([`evaluation`]) and test for change over time ([`stats`]). [`synth`]
//! builds seeded corpora with known ground truth plus slow reference
//! implementations to check the fast ones against.

pub mod corpus;
pub mod ensemble;
pub mod evaluation;
pub mod labels;
pub mod pattern;
pub mod stats;
pub mod synth;

pub use corpus::{
    corpus_hash, load_corpus, normalize, tokenize, CorpusError, CorpusManifest, LoadedCorpus, ManifestEntry, PeriodId,
    TextDocument, Token,
};
pub use ensemble::{
    combine, combine_matrix, decide, EnsembleConfig, EnsembleError, EnsembleResult, NeuralPrediction,
};
pub use evaluation::{agreement, agreement_report, ece, evaluate_gold, CalibrationReport, EvalError, GoldFile};
pub use labels::{export_labels, generate_labels, import_labels, LabelError, LabelSet, WeakLabel};
pub use pattern::{
    detect_all, match_confidence, scan_text, CatalogError, Category, CompiledCatalog, FeatureMatch, FeatureMatrix,
    FeaturePattern, Method, PatternCatalog,
};
pub use stats::{StatsError, TrendClass, TrendStats};
