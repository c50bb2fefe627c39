use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use diachron::corpus::{corpus_hash, load_corpus, normalize, CorpusManifest, LoadedCorpus, PeriodId, TextDocument};
use diachron::ensemble::{combine_matrix, neural_matrix, read_predictions, write_cells_csv, write_predictions, EnsembleConfig, EnsembleResult, NeuralPrediction};
use diachron::evaluation::{agreement_report, ece, evaluate_gold, AgreementReport, CalibrationReport, GoldFile, GoldMetrics, GoldPrediction};
use diachron::labels::{export_labels, generate_labels};
use diachron::pattern::{detect_all, match_confidence, scan_document, CompiledCatalog, Detection, FeatureMatrix, PatternCatalog};
use diachron::stats::{anova_oneway, classify_trends, cluster, pca, write_trends_csv, Anova, ClusterTree, PcaResult, TrendOptions, TrendStats};
use diachron::synth::{generate, stub_predictions, synthetic_gold, SynthSpec};
use serde::Serialize;

use crate::args::{Command, Options};
use crate::error::CliError;
use crate::output::{config_digest, Output, Provenance};
use crate::report;

pub fn run(command: Command, opts: &Options) -> Result<(), CliError> {
    match command {
        Command::Ingest => ingest(opts),
        Command::Detect => detect(opts),
        Command::Labels => labels(opts),
        Command::Ensemble => ensemble(opts),
        Command::Evaluate => evaluate(opts),
        Command::Trends => trends(opts),
        Command::Report => report_cmd(opts),
        Command::Synth => synth(opts),
        Command::Pipeline => {
            ingest(opts)?;
            detect(opts)?;
            labels(opts)?;
            ensemble(opts)?;
            if opts.neural.is_some() || opts.gold.is_some() {
                evaluate(opts)?;
            } else {
                warn("pipeline: skipping evaluate (needs --neural or --gold)");
            }
            trends(opts)?;
            report_cmd(opts)
        }
    }
}

pub fn warn(msg: impl AsRef<str>) {
    eprintln!("warning: {}", msg.as_ref());
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str, command: &str) -> Result<&'a Path, CliError> {
    let path = path
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("`{command}` requires --{flag} <PATH>")))?;
    if !path.is_file() {
        return Err(CliError::Usage(format!("--{flag}: no such file: {}", path.display())));
    }
    Ok(path)
}

fn optional<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<Option<&'a Path>, CliError> {
    match path.as_deref() {
        Some(p) if !p.is_file() => Err(CliError::Usage(format!("--{flag}: no such file: {}", p.display()))),
        other => Ok(other),
    }
}

fn load_manifest_corpus(opts: &Options, command: &str) -> Result<(LoadedCorpus, String), CliError> {
    let path = require(&opts.manifest, "manifest", command)?;
    let manifest = CorpusManifest::from_path(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let corpus = load_corpus(&manifest, base)?;
    for w in &corpus.warnings {
        warn(format!("{}: {}: {}", path.display(), w.entry, w.message));
    }
    let hash = corpus_hash(&corpus.documents);
    Ok((corpus, hash))
}

pub struct Session<'a> {
    pub opts: &'a Options,
    pub corpus: LoadedCorpus,
    pub hash: String,
    pub catalog: PatternCatalog,
    pub compiled: CompiledCatalog,
    command: &'static str,
}

impl<'a> Session<'a> {
    pub fn load(opts: &'a Options, command: &'static str) -> Result<Self, CliError> {
        // check every referenced file before doing any work
        require(&opts.manifest, "manifest", command)?;
        let catalog_path = require(&opts.catalog, "catalog", command)?;
        optional(&opts.neural, "neural")?;
        optional(&opts.gold, "gold")?;
        let (corpus, hash) = load_manifest_corpus(opts, command)?;
        let catalog = PatternCatalog::from_path(catalog_path)?;
        let compiled = catalog.compile()?;
        Ok(Session { opts, corpus, hash, catalog, compiled, command })
    }

    pub fn output(&self, sub: &str) -> Result<Output, CliError> {
        Output::new(
            &self.opts.out,
            sub,
            self.opts.format,
            Provenance {
                tool: "diachron",
                version: env!("CARGO_PKG_VERSION"),
                command: self.command.to_string(),
                catalog_version: Some(self.catalog.version.clone()),
                corpus_hash: Some(self.hash.clone()),
                config_digest: config_digest(self.opts),
            },
        )
    }

    pub fn documents(&self) -> &[TextDocument] {
        &self.corpus.documents
    }

    pub fn detection(&self) -> Detection {
        let d = detect_all(self.documents(), &self.compiled, self.opts.window);
        for w in &d.warnings {
            warn(format!("{}: {}", w.text_id, w.message));
        }
        d
    }

    pub fn ensemble_config(&self) -> Result<EnsembleConfig, CliError> {
        let cfg = EnsembleConfig {
            regex_weight: self.opts.regex_weight,
            high_conf: self.opts.high_conf,
            low_conf: self.opts.low_conf,
            ..EnsembleConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn predictions(&self) -> Result<Option<Vec<NeuralPrediction>>, CliError> {
        match optional(&self.opts.neural, "neural")? {
            Some(p) => Ok(Some(read_predictions(p)?)),
            None => Ok(None),
        }
    }

    pub fn gold(&self) -> Result<Option<GoldFile>, CliError> {
        match optional(&self.opts.gold, "gold")? {
            Some(p) => Ok(Some(GoldFile::from_path(p)?)),
            None => Ok(None),
        }
    }
}

/// Everything downstream of detection, computed in memory.
pub struct Analysis {
    pub detection: Detection,
    pub neural: Option<FeatureMatrix>,
    pub ensemble: EnsembleResult,
    pub agreement: Option<AgreementReport>,
    /// Neural confidence against agreement with the regex detection.
    pub neural_calibration: Option<CalibrationReport>,
    pub gold: Option<(GoldMetrics, Vec<GoldPrediction>)>,
}

impl Analysis {
    pub fn compute(s: &Session<'_>, quiet: bool) -> Result<Self, CliError> {
        let detection = s.detection();
        let config = s.ensemble_config()?;
        let preds = s.predictions()?;
        if preds.is_none() && !quiet {
            warn("no --neural predictions; the ensemble is regex-only");
        }
        let ensemble = combine_matrix(&detection.matrix, preds.as_deref().unwrap_or(&[]), &config, &s.catalog.categories())?;
        let (neural, agreement, neural_calibration) = match &preds {
            Some(p) => {
                let nm = neural_matrix(&detection.matrix, p)?;
                let agreement = agreement_report(&detection.matrix, &nm)?;
                let (confs, correct): (Vec<f64>, Vec<bool>) = ensemble
                    .cells
                    .iter()
                    .filter(|c| c.neural_present)
                    .map(|c| (c.confidence, (c.f_neural > 0.0) == (c.f_regex > 0.0)))
                    .unzip();
                let cal = if confs.is_empty() { None } else { Some(ece(&confs, &correct, s.opts.bins)?) };
                (Some(nm), Some(agreement), cal)
            }
            None => (None, None, None),
        };
        let gold = match s.gold()? {
            Some(g) => {
                let preds = gold_predictions(&g, &s.compiled, s.opts.window);
                Some((evaluate_gold(&g.examples, &preds, s.opts.bins)?, preds))
            }
            None => None,
        };
        Ok(Analysis { detection, neural, ensemble, agreement, neural_calibration, gold })
    }

    pub fn trend_options(opts: &Options) -> TrendOptions {
        TrendOptions { alpha: opts.alpha, effect_group_size: opts.effect_group, ..TrendOptions::default() }
    }
}

/// Scans each gold context and predicts the features retained on the target
/// word. Confidence is the weakest retained match; with no retained match it is
/// one minus the strongest rejected one, or 0.5 when nothing matched at all.
pub fn gold_predictions(gold: &GoldFile, catalog: &CompiledCatalog, window: usize) -> Vec<GoldPrediction> {
    gold.examples
        .iter()
        .map(|ex| {
            let doc = TextDocument::new("gold", "", PeriodId::EarlyVedic, 0, &ex.context);
            let target = normalize(&ex.target_word);
            let index = doc.tokens.iter().position(|t| t.surface == target);
            let mut features = std::collections::BTreeSet::new();
            let mut confidence = 0.5;
            if let Some(i) = index {
                let hits: Vec<_> = scan_document(&doc, catalog, window).into_iter().filter(|m| m.word_index == i).collect();
                if hits.is_empty() {
                    let context = diachron::pattern::context_window(&doc, i, window);
                    let rejected = catalog
                        .patterns
                        .iter()
                        .filter(|p| p.matches_word(&target))
                        .map(|p| {
                            let (pos, neg) = p.context_counts(&context);
                            match_confidence(pos, neg)
                        })
                        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
                    if let Some(r) = rejected {
                        confidence = 1.0 - r;
                    }
                } else {
                    confidence = hits.iter().map(|m| m.confidence).fold(1.0, f64::min);
                    features.extend(hits.into_iter().map(|m| m.feature_id));
                }
            }
            GoldPrediction { target_word: ex.target_word.clone(), features, confidence }
        })
        .collect()
}

#[derive(Serialize)]
struct TextSummary<'a> {
    id: &'a str,
    title: &'a str,
    period: PeriodId,
    chrono_index: usize,
    words: usize,
}

#[derive(Serialize)]
struct CorpusSummary<'a> {
    texts: Vec<TextSummary<'a>>,
    periods: Vec<report::PeriodCount>,
    total_words: usize,
    warnings: Vec<String>,
}

fn ingest(opts: &Options) -> Result<(), CliError> {
    let (corpus, hash) = load_manifest_corpus(opts, "ingest")?;
    let out = Output::new(
        &opts.out,
        "ingest",
        opts.format,
        Provenance {
            tool: "diachron",
            version: env!("CARGO_PKG_VERSION"),
            command: "ingest".into(),
            catalog_version: None,
            corpus_hash: Some(hash),
            config_digest: config_digest(opts),
        },
    )?;
    let texts: Vec<TextSummary> = corpus
        .documents
        .iter()
        .map(|d| TextSummary { id: &d.id, title: &d.title, period: d.period, chrono_index: d.chrono_index, words: d.word_count() })
        .collect();
    let rows = texts
        .iter()
        .map(|t| vec![t.id.to_string(), t.title.to_string(), t.period.key().to_string(), t.chrono_index.to_string(), t.words.to_string()])
        .collect();
    out.csv_rows("corpus_summary.csv", &["id", "title", "period", "chrono_index", "words"], rows)?;
    let summary = CorpusSummary {
        periods: report::period_counts(&corpus.documents),
        total_words: corpus.total_words(),
        warnings: corpus.warnings.iter().map(|w| format!("{}: {}", w.entry, w.message)).collect(),
        texts,
    };
    out.json("corpus_summary.json", &summary)?;

    let mut cache = String::new();
    for d in &corpus.documents {
        let tokens: Vec<&str> = d.tokens.iter().map(|t| t.surface.as_str()).collect();
        let line = serde_json::json!({ "id": d.id, "period": d.period, "chrono_index": d.chrono_index, "tokens": tokens });
        cache.push_str(&line.to_string());
        cache.push('\n');
    }
    out.write_bytes("tokens.jsonl", cache.as_bytes())?;
    println!("ingest: {} texts, {} words -> {}", corpus.documents.len(), summary.total_words, out.path("").display());
    Ok(())
}

fn detect(opts: &Options) -> Result<(), CliError> {
    let s = Session::load(opts, "detect")?;
    let d = s.detection();
    let out = s.output("detect")?;
    out.csv("regex_matrix.csv", |buf| Ok(d.matrix.write_csv(buf)?))?;
    out.json("regex_matrix.json", &d.matrix)?;
    let rows = d
        .matches
        .iter()
        .map(|m| {
            vec![
                m.text_id.clone(),
                m.word_index.to_string(),
                m.feature_id.clone(),
                m.matched_surface.clone(),
                m.confidence.to_string(),
                m.positives_matched.to_string(),
                m.negatives_matched.to_string(),
            ]
        })
        .collect();
    out.csv_rows("matches.csv", &["text_id", "word_index", "feature_id", "surface", "confidence", "positives", "negatives"], rows)?;
    if out.wants_json() && !out.wants_csv() {
        out.json("matches.json", &d.matches)?;
    }
    println!(
        "detect: {} retained matches, {} detected cells -> {}",
        d.matches.len(),
        d.matrix.detection_count(),
        out.path("").display()
    );
    Ok(())
}

fn labels(opts: &Options) -> Result<(), CliError> {
    let s = Session::load(opts, "labels")?;
    let set = generate_labels(s.documents(), &s.compiled, opts.window);
    let out = s.output("labels")?;
    export_labels(&set, &s.compiled.feature_ids(), &out.path("weak_labels.jsonl"))?;
    out.json_always("label_counts.json", &set.counts_by_feature())?;
    println!("labels: {} weak labels -> {}", set.len(), out.path("weak_labels.jsonl").display());
    Ok(())
}

#[derive(Serialize)]
struct EnsembleSummary {
    neural_present: bool,
    regex_detections: usize,
    neural_detections: Option<usize>,
    ensemble_detections: usize,
    decision_sources: BTreeMap<String, usize>,
    config: EnsembleConfig,
}

fn ensemble(opts: &Options) -> Result<(), CliError> {
    let s = Session::load(opts, "ensemble")?;
    let a = Analysis::compute(&s, false)?;
    let out = s.output("ensemble")?;
    let e = &a.ensemble;
    out.csv("ensemble_matrix.csv", |buf| Ok(e.matrix.write_csv(buf)?))?;
    out.json("ensemble_matrix.json", &e.matrix)?;
    out.csv("cells.csv", |buf| Ok(write_cells_csv(e, buf)?))?;
    out.json("cells.json", &e.cells)?;
    let summary = EnsembleSummary {
        neural_present: a.neural.is_some(),
        regex_detections: a.detection.matrix.detection_count(),
        neural_detections: a.neural.as_ref().map(FeatureMatrix::detection_count),
        ensemble_detections: e.matrix.detection_count(),
        decision_sources: e.source_counts(),
        config: e.config.clone(),
    };
    out.json_always("summary.json", &summary)?;
    println!(
        "ensemble: {} detected cells (regex {}) -> {}",
        summary.ensemble_detections,
        summary.regex_detections,
        out.path("").display()
    );
    Ok(())
}

fn evaluate(opts: &Options) -> Result<(), CliError> {
    if opts.neural.is_none() && opts.gold.is_none() {
        return Err(CliError::Usage("`evaluate` requires --neural <PATH> or --gold <PATH>".into()));
    }
    let s = Session::load(opts, "evaluate")?;
    let a = Analysis::compute(&s, true)?;
    let out = s.output("evaluate")?;
    if let Some(ag) = &a.agreement {
        #[derive(Serialize)]
        struct Summary<'a> {
            frequency: &'a diachron::evaluation::AgreementCounts,
            detection: &'a diachron::evaluation::AgreementCounts,
            correlation: Option<f64>,
        }
        out.json_always("agreement.json", &Summary { frequency: &ag.frequency, detection: &ag.detection, correlation: ag.correlation })?;
        let rows = ag
            .cells
            .iter()
            .map(|c| {
                vec![
                    c.feature_id.clone(),
                    c.text_id.clone(),
                    c.f_regex.to_string(),
                    c.f_neural.to_string(),
                    c.frequency_agree.to_string(),
                    c.detection_agree.to_string(),
                ]
            })
            .collect();
        out.csv_rows("agreement_cells.csv", &["feature_id", "text_id", "f_regex", "f_neural", "frequency_agree", "detection_agree"], rows)?;
    }
    let mut calibrations: Vec<(&str, &CalibrationReport)> = Vec::new();
    if let Some(c) = &a.neural_calibration {
        calibrations.push(("neural_vs_regex", c));
    }
    if let Some((m, preds)) = &a.gold {
        out.json_always("gold_metrics.json", m)?;
        out.json("gold_predictions.json", preds)?;
        calibrations.push(("gold", &m.calibration));
    }
    let map: BTreeMap<&str, &CalibrationReport> = calibrations.iter().copied().collect();
    out.json_always("calibration.json", &map)?;
    out.csv_rows("reliability.csv", report::RELIABILITY_HEADER, report::reliability_rows(&calibrations))?;
    match (&a.agreement, &a.gold) {
        (Some(ag), _) => println!("evaluate: agreement {:.1}% -> {}", 100.0 * ag.frequency.rate, out.path("").display()),
        (None, Some((m, _))) => println!("evaluate: gold accuracy {:.1}% -> {}", 100.0 * m.accuracy, out.path("").display()),
        _ => {}
    }
    Ok(())
}

#[derive(Serialize)]
pub struct FeatureAnova {
    pub feature_id: String,
    pub periods: Vec<PeriodId>,
    #[serde(flatten)]
    pub result: Option<Anova>,
    pub error: Option<String>,
}

pub struct TrendBundle {
    pub trends: Vec<TrendStats>,
    pub pca: PcaResult,
    pub tree: ClusterTree,
    pub labels: Vec<usize>,
    pub anova: Vec<FeatureAnova>,
}

pub fn trend_bundle(s: &Session<'_>, matrix: &FeatureMatrix) -> Result<TrendBundle, CliError> {
    let opts = s.opts;
    let trends = classify_trends(matrix, &Analysis::trend_options(opts))?;
    let pca = pca(matrix, opts.components)?;
    for w in &pca.warnings {
        warn(format!("pca: {w}"));
    }
    let tree = cluster(matrix)?;
    let labels = tree.cut(opts.cut);
    let periods: Vec<PeriodId> = s.documents().iter().map(|d| d.period).collect();
    let present: Vec<PeriodId> = PeriodId::ALL.into_iter().filter(|p| periods.contains(p)).collect();
    let anova = matrix
        .features
        .iter()
        .zip(&matrix.freq)
        .map(|(fid, row)| {
            let groups: Vec<Vec<f64>> = present
                .iter()
                .map(|p| row.iter().zip(&periods).filter(|(_, q)| *q == p).map(|(v, _)| *v).collect())
                .collect();
            let (result, error) = match anova_oneway(&groups) {
                Ok(a) => (Some(a), None),
                Err(e) => (None, Some(e.to_string())),
            };
            FeatureAnova { feature_id: fid.clone(), periods: present.clone(), result, error }
        })
        .collect();
    Ok(TrendBundle { trends, pca, tree, labels, anova })
}

fn trends(opts: &Options) -> Result<(), CliError> {
    let s = Session::load(opts, "trends")?;
    let a = Analysis::compute(&s, true)?;
    let matrix = &a.ensemble.matrix;
    let b = trend_bundle(&s, matrix)?;
    let out = s.output("trends")?;
    out.csv("trends.csv", |buf| Ok(write_trends_csv(&b.trends, buf)?))?;
    out.json("trends.json", &b.trends)?;
    out.json_always("pca.json", &b.pca)?;
    #[derive(Serialize)]
    struct Clusters<'a> {
        cut: usize,
        texts: &'a [String],
        labels: &'a [usize],
        tree: &'a ClusterTree,
    }
    out.json_always("clusters.json", &Clusters { cut: opts.cut, texts: &b.tree.texts, labels: &b.labels, tree: &b.tree })?;
    out.json_always("anova.json", &b.anova)?;
    let count = |c| b.trends.iter().filter(|t| t.trend_class == c).count();
    use diachron::stats::TrendClass::*;
    println!(
        "trends: {} increasing, {} decreasing, {} stable -> {}",
        count(Increasing),
        count(Decreasing),
        count(Stable),
        out.path("").display()
    );
    Ok(())
}

fn report_cmd(opts: &Options) -> Result<(), CliError> {
    let s = Session::load(opts, "report")?;
    let a = Analysis::compute(&s, true)?;
    let b = trend_bundle(&s, &a.ensemble.matrix)?;
    let out = s.output("report")?;
    report::write(&s, &a, &b, &out)?;
    println!("report: {}", out.path("").display());
    Ok(())
}

fn synth(opts: &Options) -> Result<(), CliError> {
    let spec = SynthSpec::trend_fixture(opts.seed);
    let corpus = generate(&spec)?;
    let dir = &opts.out;
    corpus.write_to(dir)?;
    let compiled = corpus.catalog.compile()?;
    let docs = corpus.documents();
    let d = detect_all(&docs, &compiled, spec.window);
    let preds = stub_predictions(&d.matrix, opts.seed.wrapping_add(1));
    let path = dir.join("neural_predictions.jsonl");
    let mut buf = Vec::new();
    write_predictions(&preds, &mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(&path, buf).map_err(|source| CliError::Write { path: path.clone(), source })?;
    let gold = synthetic_gold(spec.features, 120, opts.seed.wrapping_add(2));
    diachron::synth::generate::write_json(&dir.join("gold.json"), &gold)?;
    println!(
        "synth: {} texts, {} features, {} planted occurrences -> {}",
        corpus.texts.len(),
        spec.features,
        corpus.truth.occurrences.len(),
        dir.display()
    );
    Ok(())
}
