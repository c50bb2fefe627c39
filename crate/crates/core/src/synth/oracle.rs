//! Brute-force reference implementations.
//!
//! Everything here is written from the definitions and shares no code with the
//! production scanner, statistics or evaluation modules: its own tokenizer,
//! regexes compiled per call, normal equations by Cramer's rule, ranks by
//! counting, pairwise correlation sums, distribution functions by numerical
//! integration, eigenvalues by Householder reduction and Sturm bisection,
//! and Ward merges by recomputed centroids. The statistical references refuse
//! instances larger than [`MAX_N`] observations or [`MAX_DIM`] dimensions.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

use regex::Regex;
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::pattern::PatternCatalog;

pub const MAX_N: usize = 50;
pub const MAX_DIM: usize = 8;
const SIMPSON_PANELS: usize = 4000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("instance outside oracle scope: {what} is {got}, limit {limit}")]
    Scope { what: &'static str, got: usize, limit: usize },
    #[error("undefined for this input: {0}")]
    Undefined(&'static str),
    #[error("bad expression for {feature_id}: {message}")]
    Regex { feature_id: String, message: String },
}

fn scope(what: &'static str, got: usize, limit: usize) -> Result<(), OracleError> {
    if got > limit {
        Err(OracleError::Scope { what, got, limit })
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------- scanning

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMatch {
    pub text_id: String,
    pub word_index: usize,
    pub feature_id: String,
    pub surface: String,
    pub positives: usize,
    pub negatives: usize,
    pub confidence: f64,
}

fn oracle_words(raw: &str) -> Vec<String> {
    let lowered: String = raw.nfc().flat_map(char::to_lowercase).collect();
    let text: String = lowered.nfc().collect();
    let word_char = |c: char| c.is_alphabetic() || is_combining_mark(c) || c == '\u{093D}' || c == '\'' || c == '\u{2019}';
    text.split(|c: char| !word_char(c))
        .filter(|w| !w.is_empty())
        .filter(|w| w.chars().any(|c| !(c == '\u{093D}' || c == '\'' || c == '\u{2019}')))
        .map(str::to_string)
        .collect()
}

fn compile(feature_id: &str, src: &str, whole_word: bool) -> Result<Regex, OracleError> {
    let src: String = src.nfc().collect();
    let full = if whole_word { format!("^(?:{src})$") } else { src };
    Regex::new(&full).map_err(|e| OracleError::Regex { feature_id: feature_id.to_string(), message: e.to_string() })
}

/// Confidence `clamp[0.1, 0.95](0.6 + 0.2p − 0.3n)`, computed in tenths.
pub fn oracle_confidence(p: usize, n: usize) -> f64 {
    let tenths = 6.0 + 2.0 * p as f64 - 3.0 * n as f64;
    (tenths / 10.0).clamp(0.1, 0.95)
}

pub fn oracle_retained(p: usize, n: usize) -> bool {
    6 + 2 * p as i64 - 3 * n as i64 >= 4
}

/// Re-evaluates every (token, pattern) pair from scratch. Texts are
/// `(id, raw text)` in chronological order.
pub fn brute_scan(texts: &[(String, String)], catalog: &PatternCatalog, window: usize) -> Result<Vec<OracleMatch>, OracleError> {
    let mut compiled = Vec::new();
    for p in &catalog.patterns {
        let base = compile(&p.feature_id, &p.base_regex, true)?;
        let pos = p.positive_contexts.iter().map(|s| compile(&p.feature_id, s, false)).collect::<Result<Vec<_>, _>>()?;
        let neg = p.negative_contexts.iter().map(|s| compile(&p.feature_id, s, false)).collect::<Result<Vec<_>, _>>()?;
        compiled.push((p.feature_id.clone(), base, pos, neg));
    }
    let mut out = Vec::new();
    for (id, raw) in texts {
        let words = oracle_words(raw);
        for (i, w) in words.iter().enumerate() {
            for (fid, base, pos, neg) in &compiled {
                if !base.is_match(w) {
                    continue;
                }
                let from = i.saturating_sub(window);
                let to = if i + window >= words.len() { words.len() - 1 } else { i + window };
                let context = words[from..=to].join(" ");
                let p = pos.iter().filter(|r| r.is_match(&context)).count();
                let n = neg.iter().filter(|r| r.is_match(&context)).count();
                if oracle_retained(p, n) {
                    out.push(OracleMatch {
                        text_id: id.clone(),
                        word_index: i,
                        feature_id: fid.clone(),
                        surface: w.clone(),
                        positives: p,
                        negatives: n,
                        confidence: oracle_confidence(p, n),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Word count per text under the oracle tokenizer.
pub fn oracle_word_count(raw: &str) -> usize {
    oracle_words(raw).len()
}

// ------------------------------------------------------ distribution functions

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Regularized incomplete beta `I_x(a, b)` by integrating the density after
/// the substitution `t = sin²θ`, which turns it into `2 sin^(2a−1)θ cos^(2b−1)θ`.
pub fn beta_integral(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let g = |th: f64| 2.0 * th.sin().powf(2.0 * a - 1.0) * th.cos().powf(2.0 * b - 1.0);
    let theta = x.sqrt().asin();
    let part = simpson(g, 0.0, theta, SIMPSON_PANELS);
    let rest = simpson(g, theta, FRAC_PI_2, SIMPSON_PANELS);
    part / (part + rest)
}

pub fn t_cdf(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    let tail = 0.5 * beta_integral(df / (df + t * t), df / 2.0, 0.5);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_integral(df / (df + t * t), df / 2.0, 0.5)
}

pub fn f_cdf(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    beta_integral(d1 * f / (d1 * f + d2), d1 / 2.0, d2 / 2.0)
}

pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    beta_integral(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0)
}

// ---------------------------------------------------------------- statistics

/// Pearson correlation from all pairwise differences.
pub fn pairwise_pearson(x: &[f64], y: &[f64]) -> Result<f64, OracleError> {
    if x.len() != y.len() {
        return Err(OracleError::Undefined("length mismatch"));
    }
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(OracleError::Undefined("constant input"));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefOls {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub p_value: f64,
}

/// Regression of `y` on `0..n` via the 2×2 normal equations.
pub fn ref_ols(y: &[f64]) -> Result<RefOls, OracleError> {
    scope("series length", y.len(), MAX_N)?;
    if y.len() < 3 {
        return Err(OracleError::Undefined("fewer than 3 points"));
    }
    let n = y.len() as f64;
    let (mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let x = i as f64;
        sx += x;
        sxx += x * x;
        sy += v;
        sxy += x * v;
    }
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let mean = sy / n;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if sst == 0.0 {
        return Ok(RefOls { slope: 0.0, intercept: mean, r_squared: 0.0, p_value: 1.0 });
    }
    let sse: f64 = y.iter().enumerate().map(|(i, v)| (v - intercept - slope * i as f64).powi(2)).sum();
    let r_squared = 1.0 - sse / sst;
    let centered_sxx = sxx - sx * sx / n;
    let p_value = if sse <= sst * 1e-24 {
        0.0
    } else {
        let se = (sse / (n - 2.0) / centered_sxx).sqrt();
        t_two_sided_p(slope / se, n - 2.0)
    };
    Ok(RefOls { slope, intercept, r_squared, p_value })
}

/// Average ranks by counting smaller and equal values.
pub fn ref_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let less = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Spearman ρ against time with a t-approximation p-value.
pub fn ref_spearman(y: &[f64]) -> Result<(f64, f64), OracleError> {
    scope("series length", y.len(), MAX_N)?;
    if y.len() < 3 {
        return Err(OracleError::Undefined("fewer than 3 points"));
    }
    let time: Vec<f64> = (1..=y.len()).map(|i| i as f64).collect();
    let rho = match pairwise_pearson(&time, &ref_ranks(y)) {
        Ok(r) => r,
        Err(_) => return Ok((0.0, 1.0)),
    };
    let df = y.len() as f64 - 2.0;
    let p = if rho.abs() >= 1.0 { 0.0 } else { t_two_sided_p(rho * (df / (1.0 - rho * rho)).sqrt(), df) };
    Ok((rho, p))
}

pub fn ref_cohens_d(early: &[f64], late: &[f64]) -> Result<f64, OracleError> {
    scope("group size", early.len() + late.len(), MAX_N)?;
    if early.len() < 2 || late.len() < 2 {
        return Err(OracleError::Undefined("groups need two values"));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (m1, m2) = (mean(early), mean(late));
    let ss = early.iter().map(|v| (v - m1).powi(2)).sum::<f64>() + late.iter().map(|v| (v - m2).powi(2)).sum::<f64>();
    let pooled = (ss / (early.len() + late.len() - 2) as f64).sqrt();
    if pooled == 0.0 {
        return Err(OracleError::Undefined("zero pooled deviation"));
    }
    Ok((m2 - m1) / pooled)
}

/// `(F, p)` of a one-way ANOVA.
pub fn ref_anova(groups: &[Vec<f64>]) -> Result<(f64, f64), OracleError> {
    let n: usize = groups.iter().map(Vec::len).sum();
    scope("observations", n, MAX_N)?;
    let k = groups.len();
    if k < 2 || groups.iter().any(Vec::is_empty) || n <= k {
        return Err(OracleError::Undefined("need two non-empty groups and n > k"));
    }
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand = all.iter().sum::<f64>() / n as f64;
    let sst: f64 = all.iter().map(|v| (v - grand).powi(2)).sum();
    let ssw: f64 = groups
        .iter()
        .map(|g| {
            let m = g.iter().sum::<f64>() / g.len() as f64;
            g.iter().map(|v| (v - m).powi(2)).sum::<f64>()
        })
        .sum();
    if ssw == 0.0 {
        return Ok(if sst == 0.0 { (0.0, 1.0) } else { (f64::INFINITY, 0.0) });
    }
    let ssb = (sst - ssw).max(0.0);
    let (d1, d2) = ((k - 1) as f64, (n - k) as f64);
    let f = (ssb / d1) / (ssw / d2);
    Ok((f, f_sf(f, d1, d2)))
}

/// Correlation matrix of the given columns (variables).
pub fn ref_correlation_matrix(columns: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, OracleError> {
    scope("dimension", columns.len(), MAX_DIM)?;
    let p = columns.len();
    let mut r = vec![vec![0.0; p]; p];
    for i in 0..p {
        scope("observations", columns[i].len(), MAX_N)?;
        r[i][i] = 1.0;
        for j in 0..i {
            let v = pairwise_pearson(&columns[i], &columns[j])?;
            r[i][j] = v;
            r[j][i] = v;
        }
    }
    Ok(r)
}

fn householder_tridiagonal(a: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| m[i][k] * m[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if m[k + 1][k] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for i in k + 1..n {
            v[i] = m[i][k];
        }
        v[k + 1] -= alpha;
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vn);
        let h: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) - 2.0 * v[i] * v[j]).collect())
            .collect();
        let mul = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| (0..n).map(|l| x[i][l] * y[l][j]).sum()).collect()).collect()
        };
        m = mul(&mul(&h, &m), &h);
    }
    let d = (0..n).map(|i| m[i][i]).collect();
    let e = (0..n.saturating_sub(1)).map(|i| m[i + 1][i]).collect();
    (d, e)
}

/// Eigenvalues of the tridiagonal matrix below `sigma` (Sturm count).
fn sturm_count(d: &[f64], e: &[f64], sigma: f64) -> usize {
    let pivmin = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = d[0] - sigma;
    for i in 0..d.len() {
        if i > 0 {
            q = d[i] - sigma - e[i - 1] * e[i - 1] / q;
        }
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of a symmetric matrix, descending.
pub fn ref_symmetric_eigenvalues(a: &[Vec<f64>]) -> Result<Vec<f64>, OracleError> {
    scope("dimension", a.len(), MAX_DIM)?;
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let (d, e) = householder_tridiagonal(a);
    let n = d.len();
    let radius = |i: usize| {
        let l = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let r = if i + 1 < n { e[i].abs() } else { 0.0 };
        l + r
    };
    let lo0 = (0..n).map(|i| d[i] - radius(i)).fold(f64::INFINITY, f64::min) - 1.0;
    let hi0 = (0..n).map(|i| d[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        // k-th smallest: smallest sigma with count(sigma) > k
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&d, &e, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        values.push(0.5 * (lo + hi));
    }
    values.reverse();
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefMerge {
    /// Leaves of the two merged clusters, the one with the smaller leaf first.
    pub left: BTreeSet<usize>,
    pub right: BTreeSet<usize>,
    pub height: f64,
}

/// Ward clustering by exhaustive search over cluster pairs with centroids
/// recomputed from members: height `sqrt(2·nᵢ·nⱼ/(nᵢ+nⱼ))·‖cᵢ − cⱼ‖`.
pub fn ref_ward(points: &[Vec<f64>]) -> Result<Vec<RefMerge>, OracleError> {
    scope("points", points.len(), MAX_N)?;
    let mut clusters: Vec<BTreeSet<usize>> = (0..points.len()).map(|i| BTreeSet::from([i])).collect();
    let centroid = |c: &BTreeSet<usize>| -> Vec<f64> {
        let dim = points[0].len();
        (0..dim).map(|d| c.iter().map(|&i| points[i][d]).sum::<f64>() / c.len() as f64).collect()
    };
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (ci, cj) = (centroid(&clusters[i]), centroid(&clusters[j]));
                let (ni, nj) = (clusters[i].len() as f64, clusters[j].len() as f64);
                let d2: f64 = ci.iter().zip(&cj).map(|(a, b)| (a - b) * (a - b)).sum();
                let h = (2.0 * ni * nj / (ni + nj) * d2).sqrt();
                let (mi, mj) = (clusters[i].first().copied().unwrap(), clusters[j].first().copied().unwrap());
                let key = (h, mi.min(mj), mi.max(mj));
                if best.is_none_or(|b| key.0 < b.0 || (key.0 == b.0 && (key.1, key.2) < (b.1, b.2))) {
                    best = Some((key.0, key.1, key.2, i, j));
                }
            }
        }
        let (h, _, _, i, j) = best.expect("two clusters");
        let b = clusters.remove(j);
        let a = clusters.remove(i);
        let (left, right) = if a.first() < b.first() { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        merges.push(RefMerge { left, right, height: h });
        clusters.push(a.union(&b).copied().collect());
    }
    Ok(merges)
}

/// ECE by scanning all predictions once per bin, with bin `b` covering
/// `(b/B, (b+1)/B]` and zero counted in the first bin.
pub fn ref_ece(confidences: &[f64], correct: &[bool], bins: usize) -> Result<f64, OracleError> {
    if confidences.is_empty() || confidences.len() != correct.len() || bins == 0 {
        return Err(OracleError::Undefined("need matching non-empty inputs and bins"));
    }
    let n = confidences.len() as f64;
    let mut total = 0.0;
    for b in 0..bins {
        let lower = b as f64 / bins as f64;
        let upper = (b + 1) as f64 / bins as f64;
        let members: Vec<usize> = (0..confidences.len())
            .filter(|&i| {
                let c = confidences[i];
                (c > lower || (b == 0 && c == 0.0)) && (c <= upper || b + 1 == bins)
            })
            .collect();
        if members.is_empty() {
            continue;
        }
        let m = members.len() as f64;
        let acc = members.iter().filter(|&&i| correct[i]).count() as f64 / m;
        let conf = members.iter().map(|&i| confidences[i]).sum::<f64>() / m;
        total += m / n * (acc - conf).abs();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_closed_forms() {
        let r = ref_ols(&[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert_eq!((r.slope, r.intercept, r.r_squared, r.p_value), (2.0, 1.0, 1.0, 0.0));
        let c = ref_ols(&[4.0; 6]).unwrap();
        assert_eq!((c.slope, c.p_value), (0.0, 1.0));
        assert!(matches!(ref_ols(&[0.0; 51]), Err(OracleError::Scope { .. })));
    }

    #[test]
    fn distribution_functions() {
        assert_eq!(t_cdf(0.0, 5.0), 0.5);
        // df = 1 is Cauchy
        assert!((t_cdf(1.0, 1.0) - 0.75).abs() < 1e-10);
        // df = 2: two-sided p = 1 − t/sqrt(2 + t²)
        assert!((t_two_sided_p(1.7, 2.0) - (1.0 - 1.7 / (2.0f64 + 1.7 * 1.7).sqrt())).abs() < 1e-10);
        // F(2, 12) upper tail = (1 + f/6)^(-6)
        for f in [0.3, 1.0, 4.2] {
            assert!((f_sf(f, 2.0, 12.0) - (1.0 + f / 6.0f64).powi(-6)).abs() < 1e-10);
            assert!((f_cdf(f, 2.0, 12.0) + f_sf(f, 2.0, 12.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ranks_and_spearman() {
        assert_eq!(ref_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        let (rho, p) = ref_spearman(&[1.0, 2.0, 8.0, 9.0]).unwrap();
        assert!((rho - 1.0).abs() < 1e-15 && p < 1e-10);
        assert_eq!(ref_spearman(&[2.0; 5]).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let e = ref_symmetric_eigenvalues(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((e[0] - 3.0).abs() < 1e-13 && (e[1] - 1.0).abs() < 1e-13);
        // path-graph Laplacian on 4 nodes: 2 − 2cos(kπ/4)
        let a = vec![
            vec![1.0, -1.0, 0.0, 0.0],
            vec![-1.0, 2.0, -1.0, 0.0],
            vec![0.0, -1.0, 2.0, -1.0],
            vec![0.0, 0.0, -1.0, 1.0],
        ];
        let e = ref_symmetric_eigenvalues(&a).unwrap();
        for (k, v) in (0..4).rev().zip(&e) {
            let want = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 4.0).cos();
            assert!((v - want).abs() < 1e-12, "{v} vs {want}");
        }
        let big = vec![vec![0.0; 9]; 9];
        assert!(ref_symmetric_eigenvalues(&big).is_err());
    }

    #[test]
    fn ward_on_a_line() {
        let m = ref_ward(&[vec![0.0], vec![1.0], vec![10.0]]).unwrap();
        assert_eq!(m[0].left, BTreeSet::from([0]));
        assert_eq!(m[0].height, 1.0);
        // centroid 0.5 vs 10: sqrt(2·2·1/3)·9.5
        assert!((m[1].height - (4.0f64 / 3.0).sqrt() * 9.5).abs() < 1e-12);
    }

    #[test]
    fn ece_and_pearson() {
        assert_eq!(ref_ece(&[0.5, 0.5], &[true, false], 10).unwrap(), 0.0);
        assert!((ref_ece(&[1.0, 1.0], &[true, false], 10).unwrap() - 0.5).abs() < 1e-15);
        assert!((pairwise_pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn brute_scan_basics() {
        let cat = crate::synth::toy_catalog(1).unwrap();
        assert!(brute_scan(&[], &cat, 20).unwrap().is_empty());
        let texts = vec![("t".to_string(), "PUXA deva QXAAM naxa".to_string())];
        let m = brute_scan(&texts, &cat, 20).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].word_index, m[0].positives, m[0].negatives), (2, 1, 1));
        assert_eq!(m[0].confidence, 0.5);
    }
}
