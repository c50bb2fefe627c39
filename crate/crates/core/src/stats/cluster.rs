//! Agglomerative clustering of texts with Ward linkage on standardized feature vectors.

use serde::{Deserialize, Serialize};

use super::pca::standardize;
use super::StatsError;
use crate::pattern::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Node ids: `0..n` are texts, `n + i` is the cluster formed by merge `i`.
    pub left: usize,
    pub right: usize,
    /// Ward distance `sqrt(2·n_a·n_b/(n_a+n_b))·‖c_a − c_b‖`.
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTree {
    pub texts: Vec<String>,
    pub merges: Vec<Merge>,
}

impl ClusterTree {
    /// Flat labels for `k` clusters, numbered by first appearance in text order.
    pub fn cut(&self, k: usize) -> Vec<usize> {
        let n = self.texts.len();
        let k = k.clamp(1, n.max(1));
        let mut parent: Vec<usize> = (0..2 * n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, m) in self.merges.iter().take(n - k).enumerate() {
            let node = n + i;
            let a = find(&mut parent, m.left);
            let b = find(&mut parent, m.right);
            parent[a] = node;
            parent[b] = node;
        }
        let mut labels = vec![usize::MAX; n];
        let mut roots: Vec<usize> = Vec::new();
        for (t, label) in labels.iter_mut().enumerate() {
            let r = find(&mut parent, t);
            *label = match roots.iter().position(|x| *x == r) {
                Some(p) => p,
                None => {
                    roots.push(r);
                    roots.len() - 1
                }
            };
        }
        labels
    }

    /// Plot coordinates per merge: (node, left, right, height, x of left, x of right).
    pub fn dendrogram_coordinates(&self) -> Vec<(usize, usize, usize, f64, f64, f64)> {
        let n = self.texts.len();
        let mut order = Vec::new();
        fn leaves(tree: &ClusterTree, node: usize, out: &mut Vec<usize>) {
            let n = tree.texts.len();
            if node < n {
                out.push(node);
            } else {
                let m = tree.merges[node - n];
                leaves(tree, m.left, out);
                leaves(tree, m.right, out);
            }
        }
        if n > 0 {
            leaves(self, if self.merges.is_empty() { 0 } else { n + self.merges.len() - 1 }, &mut order);
        }
        let mut x = vec![0.0; n + self.merges.len()];
        for (pos, leaf) in order.iter().enumerate() {
            x[*leaf] = pos as f64;
        }
        let mut out = Vec::new();
        for (i, m) in self.merges.iter().enumerate() {
            x[n + i] = (x[m.left] + x[m.right]) / 2.0;
            out.push((n + i, m.left, m.right, m.height, x[m.left], x[m.right]));
        }
        out
    }
}

/// Ward clustering of row vectors (Lance–Williams updates on squared distances).
pub fn ward(points: &[Vec<f64>], labels: Vec<String>) -> Result<ClusterTree, StatsError> {
    let n = points.len();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    let mut d2 = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            d2[i][j] = s;
            d2[j][i] = s;
        }
    }
    // slot i holds an active cluster: (node id, size, smallest text index)
    let mut active: Vec<Option<(usize, usize, usize)>> = (0..n).map(|i| Some((i, 1, i))).collect();
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..n {
            let Some((_, _, li)) = active[i] else { continue };
            for j in i + 1..n {
                let Some((_, _, lj)) = active[j] else { continue };
                let key = (d2[i][j], li.min(lj), li.max(lj));
                let better = match best {
                    None => true,
                    Some((bd, bl, bh, _, _)) => {
                        key.0 < bd || (key.0 == bd && (key.1, key.2) < (bl, bh))
                    }
                };
                if better {
                    best = Some((key.0, key.1, key.2, i, j));
                }
            }
        }
        let (dist2, _, _, i, j) = best.expect("at least two active clusters");
        let (ni_id, ni, li) = active[i].unwrap();
        let (nj_id, nj, lj) = active[j].unwrap();
        let (left, right) = if li <= lj { (ni_id, nj_id) } else { (nj_id, ni_id) };
        merges.push(Merge { left, right, height: dist2.max(0.0).sqrt(), size: ni + nj });
        for k in 0..n {
            if k == i || k == j {
                continue;
            }
            let Some((_, nk, _)) = active[k] else { continue };
            let (fi, fj, fk) = (ni as f64, nj as f64, nk as f64);
            let v = ((fi + fk) * d2[i][k] + (fj + fk) * d2[j][k] - fk * d2[i][j]) / (fi + fj + fk);
            d2[i][k] = v;
            d2[k][i] = v;
        }
        active[i] = Some((n + step, ni + nj, li.min(lj)));
        active[j] = None;
    }
    Ok(ClusterTree { texts: labels, merges })
}

/// Ward clustering of the texts of `matrix` on z-scored features.
pub fn cluster(matrix: &FeatureMatrix) -> Result<ClusterTree, StatsError> {
    let std = standardize(matrix);
    ward(&std.z, std.texts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn two_points_single_merge() {
        let t = ward(&[vec![0.0, 0.0], vec![3.0, 4.0]], names(2)).unwrap();
        assert_eq!(t.merges, vec![Merge { left: 0, right: 1, height: 5.0, size: 2 }]);
        assert_eq!(t.cut(1), vec![0, 0]);
        assert_eq!(t.cut(2), vec![0, 1]);
    }

    #[test]
    fn outlier_merges_last() {
        let pts = vec![vec![0.0], vec![0.1], vec![5.0], vec![5.2], vec![40.0]];
        let t = ward(&pts, names(5)).unwrap();
        let last = t.merges.last().unwrap();
        assert!(last.left == 4 || last.right == 4);
        assert_eq!(t.cut(3), vec![0, 0, 1, 1, 2]);
    }

    #[test]
    fn heights_monotone() {
        let pts: Vec<Vec<f64>> = (0..12).map(|i| vec![(i * 7 % 5) as f64, (i * 3 % 7) as f64 * 0.5]).collect();
        let t = ward(&pts, names(12)).unwrap();
        for w in t.merges.windows(2) {
            assert!(w[1].height >= w[0].height - 1e-12);
        }
        assert_eq!(t.merges.last().unwrap().size, 12);
    }

    #[test]
    fn ties_break_on_lowest_index() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let t = ward(&pts, names(4)).unwrap();
        assert_eq!((t.merges[0].left, t.merges[0].right), (0, 1));
        assert_eq!((t.merges[1].left, t.merges[1].right), (2, 3));
    }

    #[test]
    fn dendrogram_coordinates_cover_merges() {
        let pts = vec![vec![0.0], vec![10.0], vec![0.5]];
        let t = ward(&pts, names(3)).unwrap();
        let coords = t.dendrogram_coordinates();
        assert_eq!(coords.len(), 2);
        assert_eq!(coords[0].1, 0);
        assert_eq!(coords[0].2, 2);
    }
}
