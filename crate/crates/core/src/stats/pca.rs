//! Principal component analysis on the feature correlation matrix.
//!
//! Texts are observations and features are variables. Features are
//! standardized with the sample deviation; constant features are dropped.
//! The eigendecomposition uses cyclic Jacobi rotations.

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::pattern::FeatureMatrix;

const JACOBI_TOL: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Column `j` of the row-major matrix is the eigenvector of `values[j]`.
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm falls below `1e-10` relative
/// to the matrix norm, and then one extra sweep.
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> Result<SymmetricEigen, StatsError> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(StatsError::Shape("matrix must be square"));
    }
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    let mut polish = false;
    while sweeps < JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off == 0.0 {
            break;
        }
        if off <= JACOBI_TOL * scale {
            if polish {
                break;
            }
            polish = true;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    if off_diagonal_norm(&a) > JACOBI_TOL * scale {
        return Err(StatsError::NoConvergence(sweeps));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    Ok(SymmetricEigen { values, vectors, sweeps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardized {
    pub texts: Vec<String>,
    /// Retained features.
    pub features: Vec<String>,
    pub dropped: Vec<String>,
    /// Rows are texts, columns retained features.
    pub z: Vec<Vec<f64>>,
}

/// Z-scores each feature across texts; zero-variance features are dropped.
pub fn standardize(matrix: &FeatureMatrix) -> Standardized {
    let nt = matrix.num_texts();
    let mut features = Vec::new();
    let mut dropped = Vec::new();
    let mut columns = Vec::new();
    for (id, row) in matrix.features.iter().zip(&matrix.freq) {
        let mean = row.iter().sum::<f64>() / nt as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nt as f64 - 1.0);
        let sd = var.sqrt();
        if nt < 2 || !(sd > 1e-12 * mean.abs().max(1.0)) {
            dropped.push(id.clone());
            continue;
        }
        features.push(id.clone());
        columns.push(row.iter().map(|v| (v - mean) / sd).collect::<Vec<f64>>());
    }
    let z = (0..nt).map(|t| columns.iter().map(|c| c[t]).collect()).collect();
    Standardized { texts: matrix.texts.clone(), features, dropped, z }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub texts: Vec<String>,
    pub features: Vec<String>,
    pub dropped_features: Vec<String>,
    /// All eigenvalues of the correlation matrix, descending.
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub cumulative_ratio: Vec<f64>,
    /// Rows are features, columns components.
    pub loadings: Vec<Vec<f64>>,
    /// Rows are texts, columns components.
    pub scores: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

pub fn pca(matrix: &FeatureMatrix, k: usize) -> Result<PcaResult, StatsError> {
    if matrix.num_texts() < 2 {
        return Err(StatsError::TooFew { needed: 2, got: matrix.num_texts() });
    }
    if matrix.num_features() < 2 {
        return Err(StatsError::TooFew { needed: 2, got: matrix.num_features() });
    }
    let std = standardize(matrix);
    let mut warnings = Vec::new();
    if !std.dropped.is_empty() {
        warnings.push(format!("dropped {} zero-variance feature(s): {}", std.dropped.len(), std.dropped.join(", ")));
    }
    let p = std.features.len();
    if p == 0 {
        return Err(StatsError::Shape("every feature has zero variance"));
    }
    let denom = (matrix.num_texts() - 1) as f64;
    let mut corr = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i..p {
            let s: f64 = std.z.iter().map(|row| row[i] * row[j]).sum::<f64>() / denom;
            corr[i][j] = s;
            corr[j][i] = s;
        }
    }
    let eig = jacobi_eigen(&corr)?;
    let eigenvalues: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();
    let rank_tol = 1e-9 * eigenvalues[0].max(1.0);
    let rank = eigenvalues.iter().filter(|v| **v > rank_tol).count();
    let k_eff = k.min(rank);
    if k_eff < k {
        warnings.push(format!("requested {k} components but the correlation matrix has rank {rank}"));
    }

    let mut loadings = vec![vec![0.0; k_eff]; p];
    for c in 0..k_eff {
        let col: Vec<f64> = (0..p).map(|r| eig.vectors[r][c]).collect();
        // largest-magnitude loading positive
        let pivot = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..p {
            loadings[r][c] = sign * col[r];
        }
    }
    let scores = std
        .z
        .iter()
        .map(|row| (0..k_eff).map(|c| (0..p).map(|r| row[r] * loadings[r][c]).sum()).collect())
        .collect();
    let explained_variance_ratio: Vec<f64> = eigenvalues[..k_eff].iter().map(|v| v / total).collect();
    let cumulative_ratio = explained_variance_ratio
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    Ok(PcaResult {
        texts: std.texts,
        features: std.features,
        dropped_features: std.dropped,
        eigenvalues,
        explained_variance_ratio,
        cumulative_ratio,
        loadings,
        scores,
        warnings,
    })
}
