//! Fixtures shared by the benchmarks.

use diachron::synth::{generate, SynthCorpus, SynthSpec};
use diachron::{CompiledCatalog, FeatureMatrix, TextDocument};

pub struct Fixture {
    pub corpus: SynthCorpus,
    pub documents: Vec<TextDocument>,
    pub catalog: CompiledCatalog,
    pub matrix: FeatureMatrix,
}

/// The planted-trend corpus with its detected regex matrix.
pub fn trend_fixture(seed: u64) -> Fixture {
    let corpus = generate(&SynthSpec::trend_fixture(seed)).expect("trend fixture generates");
    let catalog = corpus.catalog.compile().expect("toy catalog compiles");
    let documents = corpus.documents();
    let matrix = diachron::detect_all(&documents, &catalog, corpus.spec.window).matrix;
    Fixture { corpus, documents, catalog, matrix }
}
