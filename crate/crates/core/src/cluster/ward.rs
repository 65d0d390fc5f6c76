use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{sq_dist, ClusterAssignment};
use crate::{Error, Result};

/// One Ward merge. `a < b` are cluster slots: singletons start in slot `i`
/// for point `i`, and a merged cluster keeps the smaller slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    /// `sqrt` of the Lance-Williams Ward distance (twice the increase in
    /// within-cluster sum of squares).
    pub height: f64,
    pub size: usize,
}

/// Bottom-up Ward merging with Lance-Williams updates on squared Euclidean
/// distances, stopping when `stop_at` clusters remain. Ties go to the
/// lexicographically smallest slot pair.
pub fn ward_merges(y: ArrayView2<f64>, stop_at: usize) -> Result<(Vec<Merge>, Vec<usize>)> {
    let n = y.nrows();
    if stop_at == 0 || stop_at > n {
        return Err(Error::invalid(format!("k={stop_at} must be in 1..={n}")));
    }
    let pts: Vec<Vec<f64>> = y.rows().into_iter().map(|r| r.to_vec()).collect();
    // upper triangle, d[i * n + j] for i < j
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            d[i * n + j] = sq_dist(&pts[i], &pts[j]);
        }
    }
    let at = |d: &Vec<f64>, i: usize, j: usize| if i < j { d[i * n + j] } else { d[j * n + i] };

    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut slot: Vec<usize> = (0..n).collect();
    // nearest active partner with a larger slot index
    let mut nn = vec![usize::MAX; n];
    let mut nn_d = vec![f64::INFINITY; n];
    let refresh = |i: usize, d: &Vec<f64>, active: &[bool], nn: &mut [usize], nn_d: &mut [f64]| {
        nn[i] = usize::MAX;
        nn_d[i] = f64::INFINITY;
        for j in (i + 1)..n {
            if active[j] && d[i * n + j] < nn_d[i] {
                nn_d[i] = d[i * n + j];
                nn[i] = j;
            }
        }
    };
    for i in 0..n {
        refresh(i, &d, &active, &mut nn, &mut nn_d);
    }

    let mut merges = Vec::with_capacity(n - stop_at);
    let mut remaining = n;
    while remaining > stop_at {
        let mut a = usize::MAX;
        for i in 0..n {
            if active[i] && nn[i] != usize::MAX && (a == usize::MAX || nn_d[i] < nn_d[a]) {
                a = i;
            }
        }
        let b = nn[a];
        let dab = nn_d[a];
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in 0..n {
            if !active[k] || k == a || k == b {
                continue;
            }
            let nk = size[k] as f64;
            let v = ((na + nk) * at(&d, k, a) + (nb + nk) * at(&d, k, b) - nk * dab)
                / (na + nb + nk);
            if k < a {
                d[k * n + a] = v;
            } else {
                d[a * n + k] = v;
            }
        }
        active[b] = false;
        size[a] += size[b];
        for s in slot.iter_mut() {
            if *s == b {
                *s = a;
            }
        }
        merges.push(Merge {
            a,
            b,
            height: dab.max(0.0).sqrt(),
            size: size[a],
        });
        remaining -= 1;

        refresh(a, &d, &active, &mut nn, &mut nn_d);
        for i in 0..a {
            if !active[i] {
                continue;
            }
            if nn[i] == a || nn[i] == b {
                refresh(i, &d, &active, &mut nn, &mut nn_d);
            } else if d[i * n + a] < nn_d[i] || (d[i * n + a] == nn_d[i] && a < nn[i]) {
                nn[i] = a;
                nn_d[i] = d[i * n + a];
            }
        }
        for i in (a + 1)..n {
            if active[i] && nn[i] == b {
                refresh(i, &d, &active, &mut nn, &mut nn_d);
            }
        }
    }
    Ok((merges, slot))
}

/// Ward agglomerative clustering into `k` clusters. Labels are numbered by the
/// first point of each cluster.
pub fn agglomerative(y: ArrayView2<f64>, k: usize) -> Result<ClusterAssignment> {
    let (merges, slot) = ward_merges(y, k)?;
    let mut relabel = std::collections::HashMap::new();
    let labels = slot
        .iter()
        .map(|s| {
            let next = relabel.len() as i64;
            *relabel.entry(*s).or_insert(next)
        })
        .collect();
    Ok(ClusterAssignment {
        labels,
        n_clusters: k,
        inertia: None,
        n_iter: merges.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn k_equals_n_gives_singletons() {
        let y = array![[0.0], [1.0], [3.0]];
        let a = agglomerative(y.view(), 3).unwrap();
        assert_eq!(a.labels, [0, 1, 2]);
        assert_eq!(a.n_iter, 0);
    }

    #[test]
    fn two_far_blobs() {
        let y = array![[0.0, 0.0], [100.0, 100.0], [0.1, 0.0], [100.2, 99.9], [0.0, 0.2]];
        let a = agglomerative(y.view(), 2).unwrap();
        assert_eq!(a.labels, [0, 1, 0, 1, 0]);
    }

    #[test]
    fn ward_distance_of_singleton_pairs() {
        // merging {0},{1} at squared distance 4 then {2} at 10 from both
        let y = array![[0.0], [2.0], [11.0]];
        let (m, _) = ward_merges(y.view(), 1).unwrap();
        assert_eq!((m[0].a, m[0].b), (0, 1));
        assert!((m[0].height - 2.0).abs() < 1e-12);
        // Ward cost for {0,1} vs {2}: 2·(2·1/3)·10² → distance² = 4/3·100
        assert!((m[1].height.powi(2) - 400.0 / 3.0).abs() < 1e-9);
        assert!(m[1].height >= m[0].height);
    }
}
