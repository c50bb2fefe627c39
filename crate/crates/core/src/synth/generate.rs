//! Seeded synthetic corpora with planted feature occurrences.
//!
//! Texts are filler words with injected marker tokens from a toy catalog.
//! Around each marker the generator plants that feature's positive and
//! negative cue words, then records from the final token layout how many
//! distinct cues of each kind every marker actually sees. Rendering varies
//! separators, capitalization and Unicode composition so that normalization
//! and tokenization are exercised too.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{CorpusManifest, ManifestEntry, PeriodId, TextDocument};
use crate::ensemble::NeuralPrediction;
use crate::evaluation::{GoldExample, GoldFile};
use crate::pattern::{Category, FeatureMatrix, FeaturePattern, Method, PatternCatalog, DEFAULT_WINDOW};

pub const TOY_CATALOG_VERSION: &str = "toy-1";
pub const MAX_TOY_FEATURES: usize = 26;

const MARKER_ENDINGS: [&str; 3] = ["am", "ām", "ena"];
const POSITIVE_STEMS: [&str; 2] = ["pux", "puy"];
const NEGATIVE_STEMS: [&str; 2] = ["nax", "nay"];
const CATEGORIES: [Category; 5] = [
    Category::Phonological,
    Category::Morphological,
    Category::Syntactic,
    Category::Lexical,
    Category::Stylistic,
];

pub const FILLER: &[&str] = &[
    "agni", "indra", "soma", "deva", "vāc", "ṛta", "yajña", "brahman", "ātman", "dharma", "karman", "rājan",
    "putra", "gṛha", "nagara", "vana", "jala", "ratha", "aśva", "go", "mitra", "loka", "kāla", "mārga", "satya",
    "tapas", "śrī", "hṛdaya", "manas", "prāṇa", "anna", "vṛkṣa", "parvata", "nadī", "sūrya", "candra", "pṛthivī",
    "antarikṣa", "ṛṣi", "muni", "guru", "śiṣya", "vidyā", "jñāna", "bhakti", "śānti", "ca", "vā", "iti", "eva",
];

const SEPARATORS: &[&str] = &[" ", " ", " ", " ", " ", ", ", " । ", "\n", " - ", "; ", "  "];

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("text {text_id}: {injections} injections do not fit in {token_count} tokens")]
    Overfull { text_id: String, injections: usize, token_count: usize },
    #[error("text {text_id}: {message}")]
    InvalidSpec { text_id: String, message: String },
    #[error("the toy catalog has at most {MAX_TOY_FEATURES} features, {0} requested")]
    TooManyFeatures(usize),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn letter(i: usize) -> char {
    (b'a' + i as u8) as char
}

pub fn toy_feature_id(i: usize) -> String {
    format!("toy_{}", letter(i))
}

fn marker_form(feature: usize, form: usize) -> String {
    format!("qx{}{}", letter(feature), MARKER_ENDINGS[form])
}

fn cue_word(feature: usize, positive: bool, variant: usize) -> String {
    let stems = if positive { POSITIVE_STEMS } else { NEGATIVE_STEMS };
    format!("{}{}", stems[variant], letter(feature))
}

/// Catalog of `n` toy features. Feature `toy_c` matches `qxcam`, `qxcām` and
/// `qxcena`; its cues are the words `puxc`, `puyc` (positive) and `naxc`, `nayc`
/// (negative).
pub fn toy_catalog(n: usize) -> Result<PatternCatalog, SynthError> {
    if n > MAX_TOY_FEATURES {
        return Err(SynthError::TooManyFeatures(n));
    }
    let patterns = (0..n)
        .map(|i| {
            let c = letter(i);
            FeaturePattern {
                feature_id: toy_feature_id(i),
                category: CATEGORIES[i % CATEGORIES.len()],
                base_regex: format!("qx{c}(?:am|ām|ena)"),
                positive_contexts: POSITIVE_STEMS.iter().map(|s| format!(r"\b{s}{c}\b")).collect(),
                negative_contexts: NEGATIVE_STEMS.iter().map(|s| format!(r"\b{s}{c}\b")).collect(),
                description: format!("toy marker qx{c}- with cue words pux{c}/puy{c} and nax{c}/nay{c}"),
            }
        })
        .collect();
    Ok(PatternCatalog { version: TOY_CATALOG_VERSION.into(), patterns, category_counts: None })
}

/// Probabilities of planting each cue variant near an injected marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decoration {
    /// Applied independently to each of the two positive cue words.
    pub positive_prob: f64,
    /// Applied independently to each of the two negative cue words.
    pub negative_prob: f64,
}

impl Default for Decoration {
    fn default() -> Self {
        Decoration { positive_prob: 0.6, negative_prob: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTextSpec {
    pub text_id: String,
    pub period: PeriodId,
    pub token_count: usize,
    /// Feature id → injections per 1,000 words. Missing features get none.
    pub rates: BTreeMap<String, f64>,
    #[serde(default)]
    pub decoration: Decoration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    /// Size of the toy catalog.
    pub features: usize,
    pub window: usize,
    /// In chronological order.
    pub texts: Vec<SynthTextSpec>,
}

/// `round(rate × tokens / 1000)` with halves rounded up.
pub fn injection_count(rate: f64, token_count: usize) -> usize {
    (rate * token_count as f64 / 1000.0 + 0.5).floor() as usize
}

fn period_for(index: usize, n: usize) -> PeriodId {
    PeriodId::ALL[(index * PeriodId::ALL.len() / n.max(1)).min(3)]
}

impl SynthSpec {
    /// A random corpus of 3 to 8 texts and at most `max_tokens` words in total.
    pub fn random(seed: u64, features: usize, max_tokens: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3..=8usize);
        let per_text = (max_tokens / n).max(1);
        let window = [3, 8, DEFAULT_WINDOW][rng.gen_range(0..3)];
        let texts = (0..n)
            .map(|i| {
                let token_count = rng.gen_range((per_text / 4).max(1)..=per_text);
                let rates = (0..features)
                    .map(|f| {
                        let rate = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..15.0) };
                        (toy_feature_id(f), rate)
                    })
                    .collect();
                SynthTextSpec {
                    text_id: format!("syn_{i:02}"),
                    period: period_for(i, n),
                    token_count,
                    rates,
                    decoration: Decoration {
                        positive_prob: rng.gen_range(0.2..0.9),
                        negative_prob: rng.gen_range(0.0..0.6),
                    },
                }
            })
            .collect();
        SynthSpec { seed, features, window, texts }
    }

    /// Twenty equal-length texts (6/5/6/3 per period) with five rising, three
    /// falling and twelve flat features. Flat series are mirror-symmetric in time.
    /// Both positive cues are always planted, so injections are retained unless
    /// a window runs out of free slots.
    pub fn trend_fixture(seed: u64) -> Self {
        const N: usize = 20;
        const TOKENS: usize = 5000;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rates = vec![BTreeMap::new(); N];
        let noise = |rng: &mut ChaCha8Rng, a: f64| rng.gen_range(-a..a);
        for k in 0..5 {
            for (t, r) in rates.iter_mut().enumerate() {
                let v = 1.0 + (0.5 + 0.1 * k as f64) * t as f64 + noise(&mut rng, 0.1);
                r.insert(toy_feature_id(k), v);
            }
        }
        for k in 0..3 {
            for (t, r) in rates.iter_mut().enumerate() {
                let v = 20.0 - (0.5 + 0.1 * k as f64) * t as f64 + noise(&mut rng, 0.1);
                r.insert(toy_feature_id(5 + k), v);
            }
        }
        for k in 0..12 {
            let half: Vec<f64> = (0..N / 2).map(|_| 2.0 + 0.5 * k as f64 + noise(&mut rng, 1.0)).collect();
            for (t, r) in rates.iter_mut().enumerate() {
                let v = if t < N / 2 { half[t] } else { half[N - 1 - t] };
                r.insert(toy_feature_id(8 + k), v);
            }
        }
        let periods = [(PeriodId::EarlyVedic, 6), (PeriodId::LateVedic, 5), (PeriodId::LatestVedic, 6), (PeriodId::Classical, 3)];
        let period_of: Vec<PeriodId> = periods.iter().flat_map(|(p, n)| std::iter::repeat_n(*p, *n)).collect();
        let texts = rates
            .into_iter()
            .enumerate()
            .map(|(i, rates)| SynthTextSpec {
                text_id: format!("{}_{:02}", period_of[i].key(), i + 1),
                period: period_of[i],
                token_count: TOKENS,
                rates,
                decoration: Decoration { positive_prob: 1.0, negative_prob: 0.15 },
            })
            .collect();
        SynthSpec { seed, features: 20, window: DEFAULT_WINDOW, texts }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Filler(usize),
    Marker { feature: usize, form: usize },
    Cue { feature: usize, positive: bool, variant: usize },
}

impl Slot {
    fn surface(self) -> String {
        match self {
            Slot::Filler(i) => FILLER[i].to_string(),
            Slot::Marker { feature, form } => marker_form(feature, form),
            Slot::Cue { feature, positive, variant } => cue_word(feature, positive, variant),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedOccurrence {
    pub text_id: String,
    pub word_index: usize,
    pub feature_id: String,
    pub surface: String,
    /// Distinct positive cue words within the window.
    pub positives: usize,
    pub negatives: usize,
    /// Whether the cue counts clear the retention threshold.
    pub retained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTruth {
    pub feature_id: String,
    pub rate: f64,
    pub injected: usize,
    pub retained: usize,
    /// Retained occurrences per 1,000 words.
    pub expected_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextTruth {
    pub text_id: String,
    pub token_count: usize,
    pub features: Vec<FeatureTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub window: usize,
    pub catalog_version: String,
    pub texts: Vec<TextTruth>,
    /// Ordered by text, then word index.
    pub occurrences: Vec<PlantedOccurrence>,
}

impl GroundTruth {
    /// Expected regex frequency matrix (features × texts).
    pub fn frequency_matrix(&self, feature_ids: &[String]) -> Vec<Vec<f64>> {
        feature_ids
            .iter()
            .map(|f| {
                self.texts
                    .iter()
                    .map(|t| t.features.iter().find(|x| &x.feature_id == f).map_or(0.0, |x| x.expected_frequency))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthText {
    pub id: String,
    pub period: PeriodId,
    pub chrono_index: usize,
    pub raw: String,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub spec: SynthSpec,
    pub catalog: PatternCatalog,
    pub texts: Vec<SynthText>,
    pub truth: GroundTruth,
}

fn invalid(text_id: &str, message: impl Into<String>) -> SynthError {
    SynthError::InvalidSpec { text_id: text_id.to_string(), message: message.into() }
}

fn check_prob(text_id: &str, name: &str, p: f64) -> Result<(), SynthError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(text_id, format!("{name} {p} is not a probability")))
    }
}

fn text_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus, SynthError> {
    let catalog = toy_catalog(spec.features)?;
    let ids = catalog.feature_ids();
    let mut texts = Vec::with_capacity(spec.texts.len());
    let mut truths = Vec::with_capacity(spec.texts.len());
    let mut occurrences = Vec::new();
    let mut seen = BTreeSet::new();
    for (index, ts) in spec.texts.iter().enumerate() {
        if !seen.insert(ts.text_id.as_str()) {
            return Err(invalid(&ts.text_id, "duplicate text id"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(text_seed(spec.seed, index));
        let (slots, counts) = layout(ts, &ids, spec.window, &mut rng)?;
        let planted = planted_occurrences(&ts.text_id, &slots, spec.window, &ids);
        let features = ids
            .iter()
            .enumerate()
            .map(|(f, id)| {
                let retained = planted.iter().filter(|o| &o.feature_id == id && o.retained).count();
                FeatureTruth {
                    feature_id: id.clone(),
                    rate: ts.rates.get(id).copied().unwrap_or(0.0),
                    injected: counts[f],
                    retained,
                    expected_frequency: 1000.0 * retained as f64 / ts.token_count as f64,
                }
            })
            .collect();
        truths.push(TextTruth { text_id: ts.text_id.clone(), token_count: ts.token_count, features });
        occurrences.extend(planted);
        texts.push(SynthText {
            id: ts.text_id.clone(),
            period: ts.period,
            chrono_index: index,
            raw: render(&slots, &mut rng),
        });
    }
    Ok(SynthCorpus {
        spec: spec.clone(),
        truth: GroundTruth {
            seed: spec.seed,
            window: spec.window,
            catalog_version: catalog.version.clone(),
            texts: truths,
            occurrences,
        },
        catalog,
        texts,
    })
}

fn layout(
    ts: &SynthTextSpec,
    ids: &[String],
    window: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Slot>, Vec<usize>), SynthError> {
    let id = ts.text_id.as_str();
    if ts.token_count == 0 {
        return Err(invalid(id, "token_count must be positive"));
    }
    check_prob(id, "positive_prob", ts.decoration.positive_prob)?;
    check_prob(id, "negative_prob", ts.decoration.negative_prob)?;
    for (f, rate) in &ts.rates {
        if !ids.contains(f) {
            return Err(invalid(id, format!("unknown feature {f}")));
        }
        if !(rate.is_finite() && *rate >= 0.0) {
            return Err(invalid(id, format!("rate for {f} must be finite and non-negative, got {rate}")));
        }
    }
    let counts: Vec<usize> = ids
        .iter()
        .map(|f| injection_count(ts.rates.get(f).copied().unwrap_or(0.0), ts.token_count))
        .collect();
    let total: usize = counts.iter().sum();
    if total > ts.token_count {
        return Err(SynthError::Overfull { text_id: id.to_string(), injections: total, token_count: ts.token_count });
    }

    let mut slots: Vec<Slot> = (0..ts.token_count).map(|_| Slot::Filler(rng.gen_range(0..FILLER.len()))).collect();
    let mut features: Vec<usize> = counts.iter().enumerate().flat_map(|(f, &c)| std::iter::repeat_n(f, c)).collect();
    features.shuffle(rng);
    let mut positions = rand::seq::index::sample(rng, ts.token_count, total).into_vec();
    positions.sort_unstable();
    let mut markers = Vec::with_capacity(total);
    for (&pos, &feature) in positions.iter().zip(&features) {
        slots[pos] = Slot::Marker { feature, form: rng.gen_range(0..MARKER_ENDINGS.len()) };
        markers.push((pos, feature));
    }
    for (pos, feature) in markers {
        for (positive, prob) in [(true, ts.decoration.positive_prob), (false, ts.decoration.negative_prob)] {
            for variant in 0..2 {
                if !rng.gen_bool(prob) {
                    continue;
                }
                let lo = pos.saturating_sub(window);
                let hi = (pos + window).min(ts.token_count - 1);
                let free: Vec<usize> = (lo..=hi).filter(|&i| matches!(slots[i], Slot::Filler(_))).collect();
                if let Some(&i) = free.choose(rng) {
                    slots[i] = Slot::Cue { feature, positive, variant };
                }
            }
        }
    }
    Ok((slots, counts))
}

fn planted_occurrences(text_id: &str, slots: &[Slot], window: usize, ids: &[String]) -> Vec<PlantedOccurrence> {
    let mut out = Vec::new();
    for (i, slot) in slots.iter().enumerate() {
        let Slot::Marker { feature, .. } = *slot else { continue };
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(slots.len() - 1);
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        for s in &slots[lo..=hi] {
            if let Slot::Cue { feature: g, positive, variant } = *s {
                if g == feature {
                    if positive {
                        pos.insert(variant);
                    } else {
                        neg.insert(variant);
                    }
                }
            }
        }
        let (p, n) = (pos.len() as i64, neg.len() as i64);
        out.push(PlantedOccurrence {
            text_id: text_id.to_string(),
            word_index: i,
            feature_id: ids[feature].clone(),
            surface: slot.surface(),
            positives: pos.len(),
            negatives: neg.len(),
            // 0.6 + 0.2p − 0.3n ≥ 0.4, scaled by 10
            retained: 6 + 2 * p - 3 * n >= 4,
        });
    }
    out
}

fn render(slots: &[Slot], rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    let mut verse = 1;
    if rng.gen_bool(0.5) {
        out.push_str("॥ 0 ॥ ");
    }
    for (i, slot) in slots.iter().enumerate() {
        if i > 0 {
            if rng.gen_bool(0.02) {
                out.push_str(&format!(" ॥ {verse} ॥\n"));
                verse += 1;
            } else {
                out.push_str(SEPARATORS[rng.gen_range(0..SEPARATORS.len())]);
            }
        }
        let mut word = slot.surface();
        if rng.gen_bool(0.1) {
            let mut chars = word.chars();
            let first = chars.next().expect("surfaces are non-empty");
            word = first.to_uppercase().chain(chars).collect();
        }
        if rng.gen_bool(0.15) {
            word = word.nfd().collect();
        }
        out.push_str(&word);
    }
    if rng.gen_bool(0.5) {
        out.push_str(" ॥");
    }
    out.push('\n');
    out
}

fn title(id: &str) -> String {
    format!("Synthetic text {id}")
}

impl SynthCorpus {
    pub fn documents(&self) -> Vec<TextDocument> {
        self.texts
            .iter()
            .map(|t| TextDocument::new(&t.id, title(&t.id), t.period, t.chrono_index, &t.raw))
            .collect()
    }

    pub fn manifest(&self) -> CorpusManifest {
        CorpusManifest {
            description: Some(format!("synthetic corpus, seed {}", self.spec.seed)),
            entries: self
                .texts
                .iter()
                .zip(&self.spec.texts)
                .map(|(t, s)| ManifestEntry {
                    id: t.id.clone(),
                    title: title(&t.id),
                    period: t.period.key().to_string(),
                    chrono_index: t.chrono_index,
                    file_path: PathBuf::from("texts").join(format!("{}.txt", t.id)),
                    expected_word_count: Some(s.token_count as u64),
                })
                .collect(),
            period_totals: BTreeMap::new(),
        }
    }

    /// Writes `texts/*.txt`, `manifest.json`, `catalog.json`, `ground_truth.json`
    /// and `spec.json` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), SynthError> {
        let texts_dir = dir.join("texts");
        std::fs::create_dir_all(&texts_dir).map_err(|source| SynthError::Io { path: texts_dir.clone(), source })?;
        for t in &self.texts {
            write_file(&texts_dir.join(format!("{}.txt", t.id)), t.raw.as_bytes())?;
        }
        write_json(&dir.join("manifest.json"), &self.manifest())?;
        write_json(&dir.join("catalog.json"), &self.catalog)?;
        write_json(&dir.join("ground_truth.json"), &self.truth)?;
        write_json(&dir.join("spec.json"), &self.spec)?;
        Ok(())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), SynthError> {
    std::fs::write(path, bytes).map_err(|source| SynthError::Io { path: path.to_path_buf(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SynthError> {
    let body = serde_json::to_string_pretty(value).expect("synthetic artifacts serialize");
    write_file(path, (body + "\n").as_bytes())
}

/// Stand-in neural predictions that loosely track the regex matrix: most
/// detected cells get a noisy frequency, a few are missed, a few undetected
/// cells get spurious low-confidence hits.
pub fn stub_predictions(regex: &FeatureMatrix, seed: u64) -> Vec<NeuralPrediction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(regex.num_features() * regex.num_texts());
    for t in 0..regex.num_texts() {
        for f in 0..regex.num_features() {
            let f_r = regex.freq[f][t];
            let (frequency, confidence) = if f_r > 0.0 {
                if rng.gen_bool(0.1) {
                    (0.0, rng.gen_range(0.05..0.5))
                } else {
                    (f_r * rng.gen_range(0.6..1.4), rng.gen_range(0.3..0.99))
                }
            } else if rng.gen_bool(0.15) {
                (rng.gen_range(0.2..2.0), rng.gen_range(0.05..0.6))
            } else {
                (0.0, rng.gen_range(0.05..0.5))
            };
            out.push(NeuralPrediction {
                text_id: regex.texts[t].clone(),
                feature_id: regex.features[f].clone(),
                frequency,
                confidence,
            });
        }
    }
    out
}

/// Gold examples built from toy markers: clean hits, cue-free hits, hits with
/// mixed cues, and traps where negative cues mark the form as something else.
pub fn synthetic_gold(features: usize, examples: usize, seed: u64) -> GoldFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = features.clamp(1, MAX_TOY_FEATURES);
    let mut out = Vec::with_capacity(examples);
    for _ in 0..examples {
        let f = rng.gen_range(0..features);
        let target = marker_form(f, rng.gen_range(0..MARKER_ENDINGS.len()));
        let kind = rng.gen_range(0..4);
        let (pos, neg): (Vec<usize>, Vec<usize>) = match kind {
            0 => (vec![0, 1][..rng.gen_range(1..=2)].to_vec(), vec![]),
            1 => (vec![], vec![]),
            2 => (vec![rng.gen_range(0..2)], vec![rng.gen_range(0..2)]),
            _ => (vec![], vec![0, 1][..rng.gen_range(1..=2)].to_vec()),
        };
        let mut words: Vec<String> = (0..rng.gen_range(6..14)).map(|_| FILLER[rng.gen_range(0..FILLER.len())].to_string()).collect();
        let mut cues = Vec::new();
        for v in &pos {
            cues.push(cue_word(f, true, *v));
        }
        for v in &neg {
            cues.push(cue_word(f, false, *v));
        }
        for c in &cues {
            let at = rng.gen_range(0..=words.len());
            words.insert(at, c.clone());
        }
        let at = rng.gen_range(0..=words.len());
        words.insert(at, target.clone());
        let id = toy_feature_id(f);
        let (true_features, expected_false_positives) = match kind {
            0 => (BTreeMap::from([(id, 0.95)]), BTreeSet::new()),
            1 => (BTreeMap::from([(id, 0.7)]), BTreeSet::new()),
            // mixed cues: annotators side with the feature two times in three
            2 if rng.gen_bool(2.0 / 3.0) => (BTreeMap::from([(id, 0.6)]), BTreeSet::new()),
            _ => (BTreeMap::new(), BTreeSet::from([id])),
        };
        out.push(GoldExample {
            target_word: target,
            context: words.join(" "),
            true_features,
            expected_false_positives,
            distinguishing_cues: if cues.is_empty() { "no cue words".into() } else { cues.join(", ") },
        });
    }
    GoldFile { version: format!("synthetic-gold-{seed}"), synthetic: true, examples: out }
}

/// Three well-separated Gaussian blobs of texts in feature space, shuffled.
/// Returns the matrix and each text's planted blob.
pub fn blob_matrix(seed: u64, per_blob: usize, features: usize) -> (FeatureMatrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let centers: Vec<Vec<f64>> = (0..3)
        .map(|k| (0..features).map(|_| 20.0 * k as f64 + rng.gen_range(0.0..5.0) + 10.0).collect())
        .collect();
    let mut labels: Vec<usize> = (0..3).flat_map(|k| std::iter::repeat_n(k, per_blob)).collect();
    labels.shuffle(&mut rng);
    let texts: Vec<String> = (0..labels.len()).map(|i| format!("b{i:02}")).collect();
    let mut m = FeatureMatrix::zeros(Method::Regex, texts, (0..features).map(toy_feature_id).collect());
    for (t, &k) in labels.iter().enumerate() {
        for f in 0..features {
            m.freq[f][t] = centers[k][f] + unit.sample(&mut rng);
        }
    }
    (m, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_corpus, normalize, tokenize};

    fn one_text(tokens: usize, rate: f64) -> SynthSpec {
        SynthSpec {
            seed: 7,
            features: 1,
            window: 5,
            texts: vec![SynthTextSpec {
                text_id: "x".into(),
                period: PeriodId::EarlyVedic,
                token_count: tokens,
                rates: BTreeMap::from([(toy_feature_id(0), rate)]),
                decoration: Decoration::default(),
            }],
        }
    }

    #[test]
    fn injection_rounding() {
        assert_eq!(injection_count(5.0, 1000), 5);
        assert_eq!(injection_count(0.0, 1000), 0);
        assert_eq!(injection_count(2.5, 200), 1); // 0.5 rounds up
        assert_eq!(injection_count(2.4, 200), 0);
        let c = generate(&one_text(1000, 5.0)).unwrap();
        assert_eq!(c.truth.texts[0].features[0].injected, 5);
        assert_eq!(c.truth.occurrences.len(), 5);
        let c = generate(&one_text(1000, 0.0)).unwrap();
        assert!(c.truth.occurrences.is_empty());
    }

    #[test]
    fn overfull_rejected() {
        assert!(matches!(generate(&one_text(10, 2000.0)), Err(SynthError::Overfull { injections: 20, .. })));
        assert!(generate(&one_text(10, 1000.0)).is_ok());
        assert!(matches!(generate(&one_text(0, 1.0)), Err(SynthError::InvalidSpec { .. })));
        assert!(matches!(generate(&one_text(10, -1.0)), Err(SynthError::InvalidSpec { .. })));
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec::random(11, 6, 5000);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.texts, b.texts);
        assert_eq!(a.truth, b.truth);
        let c = generate(&SynthSpec::random(12, 6, 5000)).unwrap();
        assert_ne!(a.texts, c.texts);
    }

    #[test]
    fn rendered_text_tokenizes_back_to_layout() {
        let c = generate(&SynthSpec::random(3, 8, 8000)).unwrap();
        for (t, ts) in c.texts.iter().zip(&c.spec.texts) {
            let tokens = tokenize(&normalize(&t.raw));
            assert_eq!(tokens.len(), ts.token_count, "{}", t.id);
        }
        for o in &c.truth.occurrences {
            let t = c.texts.iter().find(|t| t.id == o.text_id).unwrap();
            let tokens = tokenize(&normalize(&t.raw));
            assert_eq!(tokens[o.word_index].surface, o.surface);
        }
    }

    #[test]
    fn filler_never_looks_like_a_marker_or_cue() {
        let cat = toy_catalog(MAX_TOY_FEATURES).unwrap().compile().unwrap();
        for w in FILLER {
            assert!(!w.contains('q'));
            for p in &cat.patterns {
                assert!(!p.matches_word(w));
                assert_eq!(p.context_counts(w), (0, 0));
            }
        }
        assert!(toy_catalog(MAX_TOY_FEATURES + 1).is_err());
    }

    #[test]
    fn written_corpus_loads_with_expected_counts() {
        let c = generate(&SynthSpec::random(5, 4, 3000)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        c.write_to(dir.path()).unwrap();
        let manifest = CorpusManifest::from_path(&dir.path().join("manifest.json")).unwrap();
        let loaded = load_corpus(&manifest, dir.path()).unwrap();
        assert!(loaded.warnings.is_empty(), "{:?}", loaded.warnings);
        assert_eq!(loaded.documents, c.documents());
        let back: PatternCatalog =
            PatternCatalog::from_path(&dir.path().join("catalog.json")).unwrap();
        assert_eq!(back, c.catalog);
    }

    #[test]
    fn trend_fixture_retains_every_injection() {
        let c = generate(&SynthSpec::trend_fixture(1)).unwrap();
        assert_eq!(c.texts.len(), 20);
        assert!(c.truth.occurrences.iter().all(|o| o.retained));
        let f = c.truth.frequency_matrix(&c.catalog.feature_ids());
        for row in &f[..5] {
            assert!(row.windows(2).all(|w| w[1] > w[0]));
        }
        for row in &f[5..8] {
            assert!(row.windows(2).all(|w| w[1] < w[0]));
        }
        for row in &f[8..] {
            assert!((0..10).all(|t| row[t] == row[19 - t]));
        }
    }

    #[test]
    fn stub_predictions_cover_every_cell() {
        let mut m = FeatureMatrix::zeros(Method::Regex, vec!["a".into(), "b".into()], vec!["f".into()]);
        m.freq[0][0] = 4.0;
        let p = stub_predictions(&m, 1);
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(|x| x.validate().is_ok()));
        assert_eq!(p, stub_predictions(&m, 1));
    }

    #[test]
    fn gold_fixture_is_valid() {
        let g = synthetic_gold(5, 60, 2);
        assert_eq!(g.examples.len(), 60);
        assert!(crate::evaluation::validate_gold(&g.examples).is_ok());
        for ex in &g.examples {
            assert!(ex.context.split(' ').any(|w| w == ex.target_word));
        }
    }

    #[test]
    fn blobs_are_balanced() {
        let (m, labels) = blob_matrix(3, 6, 4);
        assert_eq!(m.num_texts(), 18);
        assert_eq!(labels.iter().filter(|k| **k == 2).count(), 6);
    }
}
