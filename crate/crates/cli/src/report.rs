//! Consolidated report tables and plot-ready CSVs.

use std::collections::BTreeMap;

use diachron::corpus::{PeriodId, TextDocument};
use diachron::evaluation::CalibrationReport;
use diachron::pattern::FeatureMatrix;
use diachron::stats::{ols_trend, TrendClass};
use serde::Serialize;

use crate::commands::{Analysis, Session, TrendBundle};
use crate::error::CliError;
use crate::output::Output;

#[derive(Debug, Clone, Serialize)]
pub struct PeriodCount {
    pub period: PeriodId,
    pub texts: usize,
    pub words: usize,
}

pub fn period_counts(docs: &[TextDocument]) -> Vec<PeriodCount> {
    PeriodId::ALL
        .into_iter()
        .filter_map(|p| {
            let in_period: Vec<_> = docs.iter().filter(|d| d.period == p).collect();
            (!in_period.is_empty()).then(|| PeriodCount {
                period: p,
                texts: in_period.len(),
                words: in_period.iter().map(|d| d.word_count()).sum(),
            })
        })
        .collect()
}

pub const RELIABILITY_HEADER: &[&str] = &["source", "bin", "lower", "upper", "count", "accuracy", "confidence"];

pub fn reliability_rows(reports: &[(&str, &CalibrationReport)]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (name, r) in reports {
        for (i, b) in r.bins.iter().enumerate() {
            rows.push(vec![
                name.to_string(),
                i.to_string(),
                b.lower.to_string(),
                b.upper.to_string(),
                b.count.to_string(),
                b.accuracy.to_string(),
                b.confidence.to_string(),
            ]);
        }
    }
    rows
}

fn pct(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_default()
}

/// Detected cells of `m` restricted to the texts in `cols`.
fn detections(m: &FeatureMatrix, cols: &[usize]) -> usize {
    m.detected.iter().map(|row| cols.iter().filter(|&&t| row[t]).count()).sum()
}

#[derive(Serialize)]
struct PeriodStats {
    period: PeriodId,
    date_range: &'static str,
    texts: usize,
    words: usize,
    regex_detections: usize,
    neural_detections: Option<usize>,
    ensemble_detections: usize,
    detection_rate_percent: Option<f64>,
    agreement_percent: Option<f64>,
}

#[derive(Serialize)]
struct MethodRow {
    method: &'static str,
    detections: usize,
    cells: usize,
    detection_rate_percent: Option<f64>,
    mean_frequency: f64,
}

#[derive(Serialize)]
struct FeatureEvolution {
    feature_id: String,
    category: Option<String>,
    period_means: BTreeMap<PeriodId, f64>,
    change_percent: Option<f64>,
}

#[derive(Serialize)]
struct TrendSummary {
    increasing: Vec<String>,
    decreasing: Vec<String>,
    stable: usize,
    effect_bands: BTreeMap<&'static str, usize>,
}

#[derive(Serialize)]
struct Report<'a> {
    corpus: Vec<PeriodCount>,
    trend_source: &'static str,
    period_stats: &'a [PeriodStats],
    method_comparison: &'a [MethodRow],
    feature_evolution: &'a [FeatureEvolution],
    agreement: Option<serde_json::Value>,
    calibration: BTreeMap<&'static str, &'a CalibrationReport>,
    gold_accuracy: Option<f64>,
    trends: TrendSummary,
    explained_variance_ratio: &'a [f64],
    cluster_labels: BTreeMap<&'a str, usize>,
}

pub fn write(s: &Session<'_>, a: &Analysis, b: &TrendBundle, out: &Output) -> Result<(), CliError> {
    let docs = s.documents();
    let regex = &a.detection.matrix;
    let ens = &a.ensemble.matrix;
    let index: BTreeMap<&str, usize> = ens.texts.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let cols_of = |p: PeriodId| -> Vec<usize> {
        docs.iter().filter(|d| d.period == p).map(|d| index[d.id.as_str()]).collect()
    };
    let counts = period_counts(docs);

    let period_stats: Vec<PeriodStats> = counts
        .iter()
        .map(|c| {
            let cols = cols_of(c.period);
            let cells = cols.len() * ens.num_features();
            let ensemble_detections = detections(ens, &cols);
            let agreement_percent = a.agreement.as_ref().map(|ag| {
                let set: Vec<&str> = cols.iter().map(|&t| ens.texts[t].as_str()).collect();
                let (agree, total) = ag
                    .cells
                    .iter()
                    .filter(|cell| set.contains(&cell.text_id.as_str()))
                    .fold((0, 0), |(n, d), cell| (n + cell.frequency_agree as usize, d + 1));
                100.0 * agree as f64 / total.max(1) as f64
            });
            PeriodStats {
                period: c.period,
                date_range: c.period.date_range(),
                texts: c.texts,
                words: c.words,
                regex_detections: detections(regex, &cols),
                neural_detections: a.neural.as_ref().map(|n| detections(n, &cols)),
                ensemble_detections,
                detection_rate_percent: pct(ensemble_detections, cells),
                agreement_percent,
            }
        })
        .collect();
    out.csv_rows(
        "period_stats.csv",
        &["period", "date_range", "texts", "words", "regex_detections", "neural_detections", "ensemble_detections", "detection_rate_percent", "agreement_percent"],
        period_stats
            .iter()
            .map(|p| {
                vec![
                    p.period.key().to_string(),
                    p.date_range.to_string(),
                    p.texts.to_string(),
                    p.words.to_string(),
                    p.regex_detections.to_string(),
                    p.neural_detections.map(|n| n.to_string()).unwrap_or_default(),
                    p.ensemble_detections.to_string(),
                    fmt_opt(p.detection_rate_percent, 1),
                    fmt_opt(p.agreement_percent, 1),
                ]
            })
            .collect(),
    )?;

    let mut methods: Vec<(&'static str, &FeatureMatrix)> = vec![("regex", regex)];
    if let Some(n) = &a.neural {
        methods.push(("neural", n));
    }
    methods.push(("ensemble", ens));
    let method_rows: Vec<MethodRow> = methods
        .iter()
        .map(|(name, m)| {
            let cells = m.num_features() * m.num_texts();
            let sum: f64 = m.freq.iter().flatten().sum();
            MethodRow {
                method: name,
                detections: m.detection_count(),
                cells,
                detection_rate_percent: pct(m.detection_count(), cells),
                mean_frequency: if cells > 0 { sum / cells as f64 } else { 0.0 },
            }
        })
        .collect();
    out.csv_rows(
        "method_comparison.csv",
        &["method", "detections", "cells", "detection_rate_percent", "mean_frequency"],
        method_rows
            .iter()
            .map(|r| {
                vec![
                    r.method.to_string(),
                    r.detections.to_string(),
                    r.cells.to_string(),
                    fmt_opt(r.detection_rate_percent, 2),
                    format!("{:.4}", r.mean_frequency),
                ]
            })
            .collect(),
    )?;

    let categories = s.catalog.categories();
    let present: Vec<PeriodId> = counts.iter().map(|c| c.period).collect();
    let evolution: Vec<FeatureEvolution> = ens
        .features
        .iter()
        .zip(&ens.freq)
        .map(|(fid, row)| {
            let period_means: BTreeMap<PeriodId, f64> = present
                .iter()
                .map(|&p| {
                    let cols = cols_of(p);
                    (p, cols.iter().map(|&t| row[t]).sum::<f64>() / cols.len() as f64)
                })
                .collect();
            let first = present.first().map(|p| period_means[p]);
            let last = present.last().map(|p| period_means[p]);
            let change_percent = match (first, last) {
                (Some(f), Some(l)) if f > 0.0 && present.len() > 1 => Some(100.0 * (l - f) / f),
                _ => None,
            };
            FeatureEvolution {
                feature_id: fid.clone(),
                category: categories.get(fid).map(|c| format!("{c:?}").to_lowercase()),
                period_means,
                change_percent,
            }
        })
        .collect();
    let mut header = vec!["feature", "category"];
    header.extend(present.iter().map(|p| p.key()));
    header.push("change_percent");
    out.csv_rows(
        "feature_evolution.csv",
        &header,
        evolution
            .iter()
            .map(|e| {
                let mut row = vec![e.feature_id.clone(), e.category.clone().unwrap_or_default()];
                row.extend(e.period_means.values().map(|v| format!("{v:.4}")));
                row.push(fmt_opt(e.change_percent, 1));
                row
            })
            .collect(),
    )?;

    let mut bands = BTreeMap::new();
    let mut summary = TrendSummary { increasing: vec![], decreasing: vec![], stable: 0, effect_bands: BTreeMap::new() };
    for t in &b.trends {
        *bands.entry(t.effect_band.label()).or_insert(0) += 1;
        match t.trend_class {
            TrendClass::Increasing => summary.increasing.push(t.feature_id.clone()),
            TrendClass::Decreasing => summary.decreasing.push(t.feature_id.clone()),
            TrendClass::Stable => summary.stable += 1,
        }
    }
    summary.effect_bands = bands;
    out.csv_rows(
        "trend_summary.csv",
        &["feature", "trend", "slope", "p_regression", "p_spearman", "effect"],
        b.trends
            .iter()
            .map(|t| {
                vec![
                    t.feature_id.clone(),
                    format!("{:?}", t.trend_class).to_lowercase(),
                    format!("{:.4}", t.slope),
                    format!("{:.4}", t.p_regression),
                    format!("{:.4}", t.p_spearman),
                    t.effect_band.label().to_string(),
                ]
            })
            .collect(),
    )?;

    // plot data
    let mut rows = Vec::new();
    for p in &period_stats {
        let cells = p.texts * ens.num_features();
        let mut add = |method: &str, n: usize| {
            rows.push(vec![p.period.key().to_string(), method.to_string(), n.to_string(), cells.to_string(), fmt_opt(pct(n, cells), 2)]);
        };
        add("regex", p.regex_detections);
        if let Some(n) = p.neural_detections {
            add("neural", n);
        }
        add("ensemble", p.ensemble_detections);
    }
    out.csv_rows("plot_period_detection.csv", &["period", "method", "detections", "cells", "rate_percent"], rows)?;

    let mut rows = Vec::new();
    let periods: BTreeMap<&str, PeriodId> = docs.iter().map(|d| (d.id.as_str(), d.period)).collect();
    for (fid, row) in ens.features.iter().zip(&ens.freq) {
        let fit = ols_trend(row).ok();
        for (t, v) in row.iter().enumerate() {
            let fitted = fit.map(|f| f.intercept + f.slope * t as f64);
            rows.push(vec![
                fid.clone(),
                ens.texts[t].clone(),
                t.to_string(),
                periods[ens.texts[t].as_str()].key().to_string(),
                v.to_string(),
                fmt_opt(fitted, 6),
            ]);
        }
    }
    out.csv_rows("plot_trend_lines.csv", &["feature", "text_id", "position", "period", "frequency", "fitted"], rows)?;

    let mut calibration: BTreeMap<&'static str, &CalibrationReport> = BTreeMap::new();
    if let Some(c) = &a.neural_calibration {
        calibration.insert("neural_vs_regex", c);
    }
    if let Some((m, _)) = &a.gold {
        calibration.insert("gold", &m.calibration);
    }
    let cal_list: Vec<(&str, &CalibrationReport)> = calibration.iter().map(|(k, v)| (*k, *v)).collect();
    out.csv_rows("plot_reliability.csv", RELIABILITY_HEADER, reliability_rows(&cal_list))?;

    let pca = &b.pca;
    let total: f64 = pca.eigenvalues.iter().sum();
    let mut cum = 0.0;
    let rows = pca
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, ev)| {
            let ratio = if total > 0.0 { ev / total } else { 0.0 };
            cum += ratio;
            vec![(i + 1).to_string(), ev.to_string(), ratio.to_string(), cum.to_string()]
        })
        .collect();
    out.csv_rows("plot_scree.csv", &["component", "eigenvalue", "explained_ratio", "cumulative"], rows)?;

    let rows = b
        .tree
        .dendrogram_coordinates()
        .into_iter()
        .zip(&b.tree.merges)
        .map(|((node, l, r, h, xl, xr), m)| {
            vec![node.to_string(), l.to_string(), r.to_string(), h.to_string(), xl.to_string(), xr.to_string(), m.size.to_string()]
        })
        .collect();
    out.csv_rows("plot_dendrogram.csv", &["node", "left", "right", "height", "x_left", "x_right", "size"], rows)?;

    let report = Report {
        corpus: counts,
        trend_source: if a.neural.is_some() { "ensemble" } else { "regex" },
        period_stats: &period_stats,
        method_comparison: &method_rows,
        feature_evolution: &evolution,
        agreement: a.agreement.as_ref().map(|ag| {
            serde_json::json!({ "frequency": ag.frequency, "detection": ag.detection, "correlation": ag.correlation })
        }),
        calibration,
        gold_accuracy: a.gold.as_ref().map(|(m, _)| m.accuracy),
        trends: summary,
        explained_variance_ratio: &pca.explained_variance_ratio,
        cluster_labels: b.tree.texts.iter().map(String::as_str).zip(b.labels.iter().copied()).collect(),
    };
    out.json_always("report.json", &report)
}
