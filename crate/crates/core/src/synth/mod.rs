//! Synthetic corpora with known ground truth, and slow reference
//! implementations for differential testing.

pub mod generate;
pub mod oracle;

pub use generate::{
    blob_matrix, generate, injection_count, stub_predictions, synthetic_gold, toy_catalog, toy_feature_id, Decoration,
    GroundTruth, PlantedOccurrence, SynthCorpus, SynthError, SynthSpec, SynthTextSpec, MAX_TOY_FEATURES,
    TOY_CATALOG_VERSION,
};
pub use oracle::OracleError;
