//! Top-k eigenpairs of symmetric operators.
//!
//! Lanczos with full reorthogonalization and explicit Rayleigh-Ritz
//! extraction. The Krylov basis grows until every requested Ritz pair meets
//! the residual bound; once the basis spans the whole space the result is an
//! exact dense eigendecomposition, so the solver never silently returns
//! unconverged pairs.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Eigenpairs sorted by descending eigenvalue. Column `j` of `eigenvectors`
/// belongs to `eigenvalues[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Array2<f64>,
}

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
pub fn normalize_sign(v: &mut [f64]) -> bool {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
        true
    } else {
        false
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

struct SplitMix(u64);

impl SplitMix {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_f64()).collect()
    }
}

/// Orthogonalizes `q` against `basis` (two Gram-Schmidt passes) and returns
/// its remaining norm.
fn orthogonalize(q: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, q);
            axpy(-c, b, q);
        }
    }
    norm(q)
}

/// Settings for [`lanczos_topk`].
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Residual bound `‖A x − θ x‖₂ ≤ abs_tol` required for every pair.
    pub abs_tol: f64,
    /// Seed of the start vector.
    pub seed: u64,
}

/// Top-`k` eigenpairs of the symmetric `n × n` operator `apply(x, y): y = A x`.
pub fn lanczos_topk<F>(n: usize, k: usize, apply: F, opts: LanczosOptions) -> Result<EigenResult>
where
    F: Fn(&[f64], &mut [f64]),
{
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let mut rng = SplitMix(opts.seed ^ 0x5eed_1a2c_0000_0000);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();

    let mut next = rng.vector(n);
    let nn = norm(&next);
    next.iter_mut().for_each(|x| *x /= nn);

    let mut target = n.min((2 * k + 20).max(30));
    let mut last_worst = f64::INFINITY;
    loop {
        while basis.len() < target {
            let v = next;
            let mut w = vec![0.0; n];
            apply(&v, &mut w);
            basis.push(v);
            let mut q = w.clone();
            images.push(w);
            if basis.len() == n {
                next = Vec::new();
                break;
            }
            let scale = norm(&q).max(1.0);
            let mut r = orthogonalize(&mut q, &basis);
            // Invariant subspace found: continue from a fresh random direction.
            let mut attempts = 0;
            while r <= 1e-10 * scale {
                q = rng.vector(n);
                r = orthogonalize(&mut q, &basis);
                attempts += 1;
                if attempts > 8 {
                    return Err(Error::Convergence(
                        "could not extend the Krylov basis".into(),
                    ));
                }
            }
            q.iter_mut().for_each(|x| *x /= r);
            next = q;
        }

        let m = basis.len();
        let h = DMatrix::from_fn(m, m, |i, j| {
            0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]))
        });
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

        let mut values = Vec::with_capacity(k);
        let mut vectors = Array2::zeros((n, k));
        let mut worst: f64 = 0.0;
        for (col, &idx) in order.iter().take(k).enumerate() {
            let theta = eig.eigenvalues[idx];
            let y = eig.eigenvectors.column(idx);
            let mut x = vec![0.0; n];
            let mut ax = vec![0.0; n];
            for (j, &yj) in y.iter().enumerate() {
                axpy(yj, &basis[j], &mut x);
                axpy(yj, &images[j], &mut ax);
            }
            let xn = norm(&x);
            x.iter_mut().for_each(|v| *v /= xn);
            ax.iter_mut().for_each(|v| *v /= xn);
            axpy(-theta, &x, &mut ax);
            worst = worst.max(norm(&ax));
            normalize_sign(&mut x);
            for (i, v) in x.into_iter().enumerate() {
                vectors[[i, col]] = v;
            }
            values.push(theta);
        }

        if worst <= opts.abs_tol {
            return Ok(EigenResult {
                eigenvalues: values,
                eigenvectors: vectors,
            });
        }
        if m == n {
            return Err(Error::Convergence(format!(
                "residual {worst:.3e} above bound {:.3e} with a full basis",
                opts.abs_tol
            )));
        }
        log::debug!("lanczos: basis {m}, worst residual {worst:.3e} (previous {last_worst:.3e})");
        last_worst = worst;
        target = n.min(m + (m / 2).max(10));
    }
}

/// Frobenius norm.
pub fn frobenius(m: ArrayView2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Top-`k` eigenpairs of a dense symmetric matrix with residuals bounded by
/// `tol · ‖M‖_F`.
pub fn sym_eigs_topk(m: ArrayView2<f64>, k: usize, tol: f64) -> Result<EigenResult> {
    sym_eigs_topk_seeded(m, k, tol, 0)
}

pub fn sym_eigs_topk_seeded(m: ArrayView2<f64>, k: usize, tol: f64, seed: u64) -> Result<EigenResult> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::invalid(format!("matrix is {r}x{c}, not square")));
    }
    let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    for i in 0..r {
        for j in (i + 1)..r {
            if (m[[i, j]] - m[[j, i]]).abs() > 1e-10 * scale {
                return Err(Error::invalid(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }
    let fro = frobenius(m);
    let abs_tol = (tol * fro).max(f64::MIN_POSITIVE);
    lanczos_topk(
        r,
        k,
        |x, y| {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = m.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
            }
        },
        LanczosOptions { abs_tol, seed },
    )
}
