//! One-way analysis of variance.

use serde::{Deserialize, Serialize};

use super::special::f_upper_tail;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnovaDegeneracy {
    /// No variance at all: F = 0, p = 1.
    NoVariance,
    /// Groups differ but are internally constant: F = ∞, p = 0.
    ZeroWithinVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anova {
    /// `f64::INFINITY` for [`AnovaDegeneracy::ZeroWithinVariance`] (serialized as null).
    pub f_statistic: f64,
    pub p_value: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
    pub degenerate: Option<AnovaDegeneracy>,
}

pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<Anova, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFew { needed: 2, got: groups.len() });
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(StatsError::EmptyGroup);
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    if n <= k {
        return Err(StatsError::TooFew { needed: k + 1, got: n });
    }
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (m - grand) * (m - grand);
        ss_within += g.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }
    let (df_between, df_within) = (k - 1, n - k);
    let base = Anova {
        f_statistic: 0.0,
        p_value: 1.0,
        df_between,
        df_within,
        ss_between,
        ss_within,
        degenerate: None,
    };
    if ss_within == 0.0 {
        return Ok(if ss_between == 0.0 {
            Anova { degenerate: Some(AnovaDegeneracy::NoVariance), ..base }
        } else {
            Anova {
                f_statistic: f64::INFINITY,
                p_value: 0.0,
                degenerate: Some(AnovaDegeneracy::ZeroWithinVariance),
                ..base
            }
        });
    }
    let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
    Ok(Anova {
        f_statistic: f,
        p_value: f_upper_tail(f, df_between as f64, df_within as f64),
        ..base
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_constant_groups() {
        let a = anova_oneway(&[vec![3.0; 4], vec![3.0; 3], vec![3.0; 2]]).unwrap();
        assert_eq!((a.f_statistic, a.p_value), (0.0, 1.0));
        assert_eq!(a.degenerate, Some(AnovaDegeneracy::NoVariance));
    }

    #[test]
    fn separated_constant_groups() {
        let a = anova_oneway(&[vec![0.0; 3], vec![10.0; 3]]).unwrap();
        assert!(a.f_statistic.is_infinite());
        assert_eq!(a.p_value, 0.0);
        assert_eq!(a.degenerate, Some(AnovaDegeneracy::ZeroWithinVariance));
    }

    #[test]
    fn textbook_example() {
        // group means 2, 5, 8 with unit within-variance: SSB = 54, SSW = 6, F = 27 on (2, 6)
        let a = anova_oneway(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]]).unwrap();
        assert!((a.f_statistic - 27.0).abs() < 1e-12);
        // F(2, 6) upper tail = (1 + 2F/6)^(-3)
        assert!((a.p_value - (1.0f64 + 9.0).powi(-3)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(anova_oneway(&[vec![1.0]]).is_err());
        assert!(matches!(anova_oneway(&[vec![1.0], vec![]]), Err(StatsError::EmptyGroup)));
        assert!(anova_oneway(&[vec![1.0], vec![2.0]]).is_err());
    }
}
