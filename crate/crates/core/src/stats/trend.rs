//! Per-feature diachronic trend statistics.
//!
//! The regressor is the chronological position `0..n`. A trend is significant
//! only when both the regression p-value and the Spearman p-value fall below
//! `alpha`; the sign of the slope then picks increasing or decreasing.

use serde::{Deserialize, Serialize};

use super::special::student_t_two_sided;
use super::StatsError;
use crate::pattern::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsTrend {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Least-squares line through `(i, y[i])` with a two-sided slope test.
pub fn ols_trend(y: &[f64]) -> Result<OlsTrend, StatsError> {
    let n = y.len();
    if n < 3 {
        return Err(StatsError::TooFew { needed: 3, got: n });
    }
    let nf = n as f64;
    let mx = (nf - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - mx;
        let dy = v - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if syy == 0.0 {
        return Ok(OlsTrend { slope: 0.0, intercept: my, r_squared: 0.0, p_value: 1.0, n });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0);
    let sse: f64 = y
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let r = v - (intercept + slope * i as f64);
            r * r
        })
        .sum();
    let df = nf - 2.0;
    let p_value = if slope == 0.0 {
        1.0
    } else if sse <= syy * 1e-30 {
        0.0
    } else {
        let se = (sse / df / sxx).sqrt();
        student_t_two_sided(slope / se, df)
    };
    Ok(OlsTrend { slope, intercept, r_squared, p_value, n })
}

/// 1-based ranks; ties share their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpearmanPValue {
    #[default]
    TApproximation,
    /// Exact two-sided permutation test; only for n ≤ 10.
    Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpearmanTrend {
    pub rho: f64,
    pub p_value: f64,
}

/// Rank correlation of `y` with chronological position.
pub fn spearman(y: &[f64]) -> Result<SpearmanTrend, StatsError> {
    spearman_with(y, SpearmanPValue::TApproximation)
}

pub fn spearman_with(y: &[f64], method: SpearmanPValue) -> Result<SpearmanTrend, StatsError> {
    let n = y.len();
    if n < 3 {
        return Err(StatsError::TooFew { needed: 3, got: n });
    }
    let ry = average_ranks(y);
    let rx: Vec<f64> = (1..=n).map(|r| r as f64).collect();
    let Some(rho) = rank_correlation(&rx, &ry) else {
        return Ok(SpearmanTrend { rho: 0.0, p_value: 1.0 });
    };
    let p_value = match method {
        SpearmanPValue::TApproximation => {
            if rho.abs() >= 1.0 {
                0.0
            } else {
                let df = n as f64 - 2.0;
                student_t_two_sided(rho * (df / (1.0 - rho * rho)).sqrt(), df)
            }
        }
        SpearmanPValue::Permutation => {
            if n > 10 {
                return Err(StatsError::Unsupported("exact permutation p-value needs n ≤ 10"));
            }
            permutation_p(&ry, rho)
        }
    };
    Ok(SpearmanTrend { rho, p_value })
}

/// Pearson correlation of two rank vectors; `None` if either is constant.
/// Identical rank vectors give exactly 1.
fn rank_correlation(rx: &[f64], ry: &[f64]) -> Option<f64> {
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in rx.iter().zip(ry) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Fraction of all orderings whose |ρ| reaches the observed |ρ| (Heap's algorithm).
fn permutation_p(ranks_y: &[f64], rho: f64) -> f64 {
    let n = ranks_y.len();
    let mut perm: Vec<f64> = (1..=n).map(|r| r as f64).collect();
    let threshold = rho.abs() - 1e-12;
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut visit = |p: &[f64]| {
        total += 1;
        if rank_correlation(p, ranks_y).is_some_and(|r| r.abs() >= threshold) {
            hits += 1;
        }
    };
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    hits as f64 / total as f64
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    (m, ss / (n - 1.0))
}

/// Standardized mean difference `(mean(late) − mean(early)) / s_pooled`.
pub fn cohens_d(early: &[f64], late: &[f64]) -> Result<f64, StatsError> {
    if early.len() < 2 || late.len() < 2 {
        return Err(StatsError::TooFew { needed: 2, got: early.len().min(late.len()) });
    }
    let (m1, v1) = mean_var(early);
    let (m2, v2) = mean_var(late);
    let (n1, n2) = (early.len() as f64, late.len() as f64);
    let pooled = (((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0)).sqrt();
    if pooled == 0.0 {
        return if m1 == m2 { Ok(0.0) } else { Err(StatsError::InfiniteEffect) };
    }
    Ok((m2 - m1) / pooled)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectBand {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectBand {
    /// Cuts at |d| = 0.2, 0.5, 0.8.
    pub fn from_d(d: f64) -> Self {
        let a = d.abs();
        if a >= 0.8 {
            EffectBand::Large
        } else if a >= 0.5 {
            EffectBand::Medium
        } else if a >= 0.2 {
            EffectBand::Small
        } else {
            EffectBand::Negligible
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EffectBand::Negligible => "Negligible",
            EffectBand::Small => "Small",
            EffectBand::Medium => "Medium",
            EffectBand::Large => "Large",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendClass {
    Increasing,
    Decreasing,
    Stable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendStats {
    pub feature_id: String,
    pub r_squared: f64,
    pub slope: f64,
    pub p_regression: f64,
    pub spearman_rho: f64,
    pub p_spearman: f64,
    /// Absent when the pooled deviation is zero but the means differ.
    pub cohens_d: Option<f64>,
    pub effect_band: EffectBand,
    pub trend_class: TrendClass,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendOptions {
    pub alpha: f64,
    /// Texts at each end of the chronology compared by Cohen's d.
    pub effect_group_size: usize,
    pub spearman_p: SpearmanPValue,
}

impl Default for TrendOptions {
    fn default() -> Self {
        TrendOptions { alpha: 0.05, effect_group_size: 5, spearman_p: SpearmanPValue::TApproximation }
    }
}

/// Earliest and latest `k` values, shrunk so the groups never overlap.
fn effect_groups(y: &[f64], k: usize) -> (&[f64], &[f64]) {
    let k = k.min(y.len() / 2);
    (&y[..k], &y[y.len() - k..])
}

/// Applies the dual-significance rule to one series.
pub fn trend_for(feature_id: &str, y: &[f64], options: &TrendOptions) -> Result<TrendStats, StatsError> {
    let ols = ols_trend(y)?;
    let sp = spearman_with(y, options.spearman_p)?;
    let mut flags = Vec::new();
    if y.iter().all(|v| *v == 0.0) {
        flags.push("all_zero".to_string());
    }
    let (early, late) = effect_groups(y, options.effect_group_size);
    let (cohens_d, effect_band) = match cohens_d(early, late) {
        Ok(d) => (Some(d), EffectBand::from_d(d)),
        Err(StatsError::InfiniteEffect) => {
            flags.push("infinite_effect".to_string());
            (None, EffectBand::Large)
        }
        Err(StatsError::TooFew { .. }) => {
            flags.push("effect_groups_too_small".to_string());
            (None, EffectBand::Negligible)
        }
        Err(e) => return Err(e),
    };
    let significant = ols.p_value < options.alpha && sp.p_value < options.alpha;
    let trend_class = match (significant, ols.slope) {
        (true, s) if s > 0.0 => TrendClass::Increasing,
        (true, s) if s < 0.0 => TrendClass::Decreasing,
        _ => TrendClass::Stable,
    };
    Ok(TrendStats {
        feature_id: feature_id.to_string(),
        r_squared: ols.r_squared,
        slope: ols.slope,
        p_regression: ols.p_value,
        spearman_rho: sp.rho,
        p_spearman: sp.p_value,
        cohens_d,
        effect_band,
        trend_class,
        flags,
    })
}

/// One [`TrendStats`] per feature row of a chronologically ordered matrix.
pub fn classify_trends(matrix: &FeatureMatrix, options: &TrendOptions) -> Result<Vec<TrendStats>, StatsError> {
    matrix
        .features
        .iter()
        .zip(&matrix.freq)
        .map(|(id, row)| trend_for(id, row, options))
        .collect()
}

pub fn write_trends_csv<W: std::io::Write>(trends: &[TrendStats], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "feature", "r_squared", "beta", "p", "rho", "p_spearman", "cohens_d", "effect", "trend",
    ])?;
    for t in trends {
        let trend = match t.trend_class {
            TrendClass::Increasing => "increasing",
            TrendClass::Decreasing => "decreasing",
            TrendClass::Stable => "stable",
        };
        w.write_record([
            t.feature_id.clone(),
            format!("{:.3}", t.r_squared),
            format!("{:.4}", t.slope),
            format!("{:.4}", t.p_regression),
            format!("{:.3}", t.spearman_rho),
            format!("{:.4}", t.p_spearman),
            t.cohens_d.map(|d| format!("{d:.3}")).unwrap_or_else(|| "inf".into()),
            t.effect_band.label().to_string(),
            trend.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::pearson;
    use proptest::prelude::*;

    #[test]
    fn ols_exact_fit() {
        let r = ols_trend(&[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert_eq!(r.slope, 2.0);
        assert_eq!(r.r_squared, 1.0);
        assert_eq!(r.intercept, 1.0);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn ols_constant() {
        let r = ols_trend(&[4.0; 6]).unwrap();
        assert_eq!((r.slope, r.r_squared, r.p_value), (0.0, 0.0, 1.0));
        assert!(matches!(ols_trend(&[1.0, 2.0]), Err(StatsError::TooFew { .. })));
    }

    #[test]
    fn ols_small_series() {
        // y = [2,1,4,3,6]: sxy = 10, sxx = 10, syy = 14.8 → β = 1, R² = 100/148
        let r = ols_trend(&[2.0, 1.0, 4.0, 3.0, 6.0]).unwrap();
        assert!((r.slope - 1.0).abs() < 1e-12);
        assert!((r.r_squared - 100.0 / 148.0).abs() < 1e-12);
        // t = 1 / sqrt(4.8/3/10) = 2.5, df = 3; p frozen from an independent t-distribution reference
        assert!((r.p_value - 0.087_706_647_008_065_55).abs() < 1e-6, "{}", r.p_value);
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 30.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(average_ranks(&[5.0; 3]), vec![2.0; 3]);
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 4.0, 9.0, 10.0]).unwrap().rho, 1.0);
        assert_eq!(spearman(&[9.0, 4.0, 1.0, 0.0]).unwrap().rho, -1.0);
        let c = spearman(&[2.0; 5]).unwrap();
        assert_eq!((c.rho, c.p_value), (0.0, 1.0));
        // ranks x = 1..4, y = 1, 2.5, 2.5, 4 → ρ = 4.5 / sqrt(5 · 4.5)
        let t = spearman(&[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert!((t.rho - 4.5 / (5.0f64 * 4.5).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spearman_permutation_p() {
        // perfect ordering of 5: 2 of 120 permutations reach |ρ| = 1
        let r = spearman_with(&[1.0, 2.0, 3.0, 4.0, 5.0], SpearmanPValue::Permutation).unwrap();
        assert!((r.p_value - 2.0 / 120.0).abs() < 1e-15);
        assert!(spearman_with(&[0.0; 11], SpearmanPValue::Permutation).is_ok()); // constant short-circuits
        let long: Vec<f64> = (0..11).map(f64::from).collect();
        assert!(spearman_with(&long, SpearmanPValue::Permutation).is_err());
    }

    #[test]
    fn cohens_d_examples() {
        assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]).unwrap(), 2.0);
        assert_eq!(cohens_d(&[2.0, 2.0], &[2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(cohens_d(&[1.0, 1.0], &[2.0, 2.0]), Err(StatsError::InfiniteEffect));
        assert!(cohens_d(&[1.0], &[2.0, 3.0]).is_err());
    }

    #[test]
    fn effect_bands() {
        assert_eq!(EffectBand::from_d(-1.438), EffectBand::Large);
        assert_eq!(EffectBand::from_d(0.653), EffectBand::Medium);
        assert_eq!(EffectBand::from_d(-0.487), EffectBand::Small);
        assert_eq!(EffectBand::from_d(-0.047), EffectBand::Negligible);
    }

    #[test]
    fn classification_rules() {
        let opts = TrendOptions::default();
        let up: Vec<f64> = (0..12).map(|i| 2.0 + 0.5 * i as f64).collect();
        assert_eq!(trend_for("up", &up, &opts).unwrap().trend_class, TrendClass::Increasing);
        let down: Vec<f64> = up.iter().rev().copied().collect();
        assert_eq!(trend_for("down", &down, &opts).unwrap().trend_class, TrendClass::Decreasing);
        let zero = trend_for("z", &[0.0; 8], &opts).unwrap();
        assert_eq!(zero.trend_class, TrendClass::Stable);
        assert_eq!(zero.flags, ["all_zero"]);
        // rank order perfect but regression weak: stays stable under the dual rule
        let noisy = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 100.0];
        let t = trend_for("n", &noisy, &opts).unwrap();
        assert!(t.p_spearman < 0.05 && t.p_regression >= 0.05, "{t:?}");
        assert_eq!(t.trend_class, TrendClass::Stable);
    }

    proptest! {
        #[test]
        fn r_squared_is_squared_correlation(y in proptest::collection::vec(-100.0f64..100.0, 3..40)) {
            let r = ols_trend(&y).unwrap();
            let x: Vec<f64> = (0..y.len()).map(|i| i as f64).collect();
            if let Ok(c) = pearson(&x, &y) {
                prop_assert!((r.r_squared - c * c).abs() < 1e-12);
            }
        }

        #[test]
        fn spearman_invariant_under_monotone_transform(y in proptest::collection::vec(-5.0f64..5.0, 3..30)) {
            let a = spearman(&y).unwrap();
            let t: Vec<f64> = y.iter().map(|v| v.exp() * 3.0 + 1.0).collect();
            let b = spearman(&t).unwrap();
            prop_assert!((a.rho - b.rho).abs() < 1e-12);
        }

        #[test]
        fn cohens_d_symmetries(
            a in proptest::collection::vec(-10.0f64..10.0, 2..12),
            b in proptest::collection::vec(-10.0f64..10.0, 2..12),
            shift in -50.0f64..50.0, k in 0.1f64..10.0,
        ) {
            if let Ok(d) = cohens_d(&a, &b) {
                prop_assert!((cohens_d(&b, &a).unwrap() + d).abs() < 1e-9);
                let sa: Vec<f64> = a.iter().map(|v| v + shift).collect();
                let sb: Vec<f64> = b.iter().map(|v| v + shift).collect();
                prop_assert!((cohens_d(&sa, &sb).unwrap() - d).abs() < 1e-6 * (1.0 + d.abs()));
                let ka: Vec<f64> = a.iter().map(|v| v * k).collect();
                let kb: Vec<f64> = b.iter().map(|v| v * k).collect();
                prop_assert!((cohens_d(&ka, &kb).unwrap() - d).abs() < 1e-9 * (1.0 + d.abs()));
            }
        }
    }
}
