//! Dimensionality reduction: PCA, kernel PCA and truncated SVD.

pub mod eigen;
pub mod kernel;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingMatrix;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

pub use eigen::{normalize_sign, sym_eigs_topk, EigenResult};
pub use kernel::{center_kernel, compute_kernel, KernelCentering, KernelConfig, KernelKind};

/// Residual bound (relative to ‖K'‖_F) for kernel PCA eigenpairs.
pub const KPCA_RESIDUAL_TOL: f64 = 1e-8;
/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionMethod {
    Pca,
    Kpca,
    Svd,
}

impl std::fmt::Display for ReductionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReductionMethod::Pca => "pca",
            ReductionMethod::Kpca => "kpca",
            ReductionMethod::Svd => "svd",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedMatrix {
    pub data: Array2<f64>,
    pub method: ReductionMethod,
    pub components: usize,
}

impl ReducedMatrix {
    /// Wraps the projections for EMB1 caching.
    pub fn to_embedding(&self, doc_ids: Vec<String>) -> Result<EmbeddingMatrix> {
        EmbeddingMatrix::new(self.data.clone(), doc_ids)
    }
}

/// Anything that can multiply by itself and its transpose.
pub trait LinearOperator {
    fn shape(&self) -> (usize, usize);
    fn matvec(&self, x: &[f64], y: &mut [f64]);
    fn rmatvec(&self, x: &[f64], y: &mut [f64]);
    fn frobenius(&self) -> f64;
}

impl LinearOperator for ArrayView2<'_, f64> {
    fn shape(&self) -> (usize, usize) {
        self.dim()
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn rmatvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            y.iter_mut().zip(self.row(i)).for_each(|(yj, a)| *yj += a * xi);
        }
    }

    fn frobenius(&self) -> f64 {
        eigen::frobenius(*self)
    }
}

impl LinearOperator for Array2<f64> {
    fn shape(&self) -> (usize, usize) {
        self.dim()
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        self.view().matvec(x, y)
    }

    fn rmatvec(&self, x: &[f64], y: &mut [f64]) {
        self.view().rmatvec(x, y)
    }

    fn frobenius(&self) -> f64 {
        eigen::frobenius(self.view())
    }
}

impl LinearOperator for CsrMatrix<f64> {
    fn shape(&self) -> (usize, usize) {
        (self.n_rows(), self.n_cols())
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        CsrMatrix::matvec(self, x, y)
    }

    fn rmatvec(&self, x: &[f64], y: &mut [f64]) {
        CsrMatrix::rmatvec(self, x, y)
    }

    fn frobenius(&self) -> f64 {
        (0..self.n_rows())
            .flat_map(|i| self.row(i))
            .map(|(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Rank-k factorization `M ≈ U diag(σ) Vᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svd {
    /// rows × k, orthonormal columns.
    pub u: Array2<f64>,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    /// cols × k, orthonormal columns.
    pub v: Array2<f64>,
}

impl Svd {
    /// Row coordinates `U Σ`.
    pub fn row_coords(&self) -> Array2<f64> {
        let mut out = self.u.clone();
        for (mut col, s) in out.axis_iter_mut(Axis(1)).zip(&self.singular_values) {
            col.mapv_inplace(|x| x * s);
        }
        out
    }

    pub fn reconstruct(&self) -> Array2<f64> {
        self.row_coords().dot(&self.v.t())
    }
}

/// Truncated SVD through the top eigenpairs of the smaller Gram matrix
/// (`M Mᵀ` or `Mᵀ M`), applied implicitly. Each column of `U` follows the
/// eigenvector sign convention; `V` is flipped to match.
pub fn truncated_svd_op(m: &impl LinearOperator, k: usize, seed: u64) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if k == 0 || k > rows.min(cols) {
        return Err(Error::invalid(format!(
            "k={k} must be in 1..={} for a {rows}x{cols} matrix",
            rows.min(cols)
        )));
    }
    let fro = m.frobenius();
    let abs_tol = (1e-12 * fro * fro).max(f64::MIN_POSITIVE);
    let opts = eigen::LanczosOptions { abs_tol, seed };
    let rows_side = rows <= cols;
    let n = if rows_side { rows } else { cols };
    let mid = if rows_side { cols } else { rows };
    let eig = eigen::lanczos_topk(
        n,
        k,
        |x, y| {
            let mut t = vec![0.0; mid];
            if rows_side {
                m.rmatvec(x, &mut t);
                m.matvec(&t, y);
            } else {
                m.matvec(x, &mut t);
                m.rmatvec(&t, y);
            }
        },
        opts,
    )?;
    let top = eig.eigenvalues[0].max(0.0);
    let admissible = eig
        .eigenvalues
        .iter()
        .take_while(|&&l| top > 0.0 && l > RANK_CUTOFF * top)
        .count();
    if admissible < k {
        return Err(Error::Rank {
            requested: k,
            available: admissible,
        });
    }
    let sigma: Vec<f64> = eig.eigenvalues.iter().map(|l| l.sqrt()).collect();
    let mut u = Array2::zeros((rows, k));
    let mut v = Array2::zeros((cols, k));
    for j in 0..k {
        let e: Vec<f64> = eig.eigenvectors.column(j).to_vec();
        let (mut uj, mut vj) = if rows_side {
            let mut vj = vec![0.0; cols];
            m.rmatvec(&e, &mut vj);
            vj.iter_mut().for_each(|x| *x /= sigma[j]);
            (e, vj)
        } else {
            let mut uj = vec![0.0; rows];
            m.matvec(&e, &mut uj);
            uj.iter_mut().for_each(|x| *x /= sigma[j]);
            (uj, e)
        };
        if normalize_sign(&mut uj) {
            vj.iter_mut().for_each(|x| *x = -*x);
        }
        u.column_mut(j).assign(&Array1::from(uj));
        v.column_mut(j).assign(&Array1::from(vj));
    }
    Ok(Svd {
        u,
        singular_values: sigma,
        v,
    })
}

/// Document coordinates `U_k Σ_k` of a dense or sparse matrix.
pub fn truncated_svd(m: &impl LinearOperator, k: usize) -> Result<ReducedMatrix> {
    truncated_svd_seeded(m, k, 0)
}

pub fn truncated_svd_seeded(m: &impl LinearOperator, k: usize, seed: u64) -> Result<ReducedMatrix> {
    let svd = truncated_svd_op(m, k, seed)?;
    Ok(ReducedMatrix {
        data: svd.row_coords(),
        method: ReductionMethod::Svd,
        components: k,
    })
}

/// Linear PCA on column-centered data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Array1<f64>,
    /// D × k principal axes.
    pub components: Array2<f64>,
    /// Eigenvalues of the covariance `C = (1/N) Σ x xᵀ`, descending.
    pub explained_variance: Vec<f64>,
}

impl Pca {
    pub fn fit(x: ArrayView2<f64>, k: usize) -> Result<(Self, Array2<f64>)> {
        let (n, d) = x.dim();
        if k == 0 || k > n.min(d) {
            return Err(Error::invalid(format!("k={k} must be in 1..={}", n.min(d))));
        }
        let mean = x.mean_axis(Axis(0)).expect("non-empty");
        let centered = &x - &mean;
        let svd = truncated_svd_op(&centered, k, 0)?;
        let explained_variance = svd
            .singular_values
            .iter()
            .map(|s| s * s / n as f64)
            .collect();
        let projections = svd.row_coords();
        Ok((
            Self {
                mean,
                components: svd.v,
                explained_variance,
            },
            projections,
        ))
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        (&x - &self.mean).dot(&self.components)
    }
}

pub fn pca_fit_transform(x: &EmbeddingMatrix, k: usize) -> Result<ReducedMatrix> {
    let (_, data) = Pca::fit(x.data().view(), k)?;
    Ok(ReducedMatrix {
        data,
        method: ReductionMethod::Pca,
        components: k,
    })
}

/// Kernel PCA fitted on a training set; supports out-of-sample projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPca {
    pub config: KernelConfig,
    train: Array2<f64>,
    centering: KernelCentering,
    /// Unit eigenvectors of the centered kernel and their eigenvalues μ
    /// (`μ = N λ`).
    pub eigen: EigenResult,
    /// `α_k = u_k / √μ_k`, so the feature-space axis has unit norm.
    pub alphas: Array2<f64>,
}

impl KernelPca {
    pub fn fit(
        x: ArrayView2<f64>,
        k: usize,
        config: KernelConfig,
        random_state: u64,
    ) -> Result<(Self, Array2<f64>)> {
        config.validate()?;
        let n = x.nrows();
        if k == 0 || k + 1 > n {
            return Err(Error::invalid(format!(
                "kernel PCA needs 1 <= k <= N-1, got k={k}, N={n}"
            )));
        }
        let kmat = compute_kernel(x, &config)?;
        let centering = KernelCentering::fit(kmat.view());
        let centered = centering.center_train(kmat.view());
        let eigen =
            eigen::sym_eigs_topk_seeded(centered.view(), k, KPCA_RESIDUAL_TOL, random_state)?;
        let top = eigen.eigenvalues[0];
        let admissible = eigen
            .eigenvalues
            .iter()
            .take_while(|&&mu| top > 0.0 && mu > RANK_CUTOFF * top)
            .count();
        if admissible < k {
            return Err(Error::Rank {
                requested: k,
                available: admissible,
            });
        }
        let mut alphas = eigen.eigenvectors.clone();
        for (mut col, mu) in alphas.axis_iter_mut(Axis(1)).zip(&eigen.eigenvalues) {
            let s = mu.sqrt();
            col.mapv_inplace(|a| a / s);
        }
        let projections = centered.dot(&alphas);
        Ok((
            Self {
                config,
                train: x.to_owned(),
                centering,
                eigen,
                alphas,
            },
            projections,
        ))
    }

    /// Projects new points, centering their kernel rows against the training
    /// kernel.
    pub fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let rows = kernel::cross_kernel(x, self.train.view(), &self.config)?;
        Ok(self.centering.center_rows(rows.view()).dot(&self.alphas))
    }
}

pub fn kpca_fit_transform(x: &EmbeddingMatrix, k: usize, cfg: &KernelConfig) -> Result<ReducedMatrix> {
    kpca_fit_transform_seeded(x, k, cfg, 42)
}

pub fn kpca_fit_transform_seeded(
    x: &EmbeddingMatrix,
    k: usize,
    cfg: &KernelConfig,
    random_state: u64,
) -> Result<ReducedMatrix> {
    let (_, data) = KernelPca::fit(x.data().view(), k, *cfg, random_state)?;
    Ok(ReducedMatrix {
        data,
        method: ReductionMethod::Kpca,
        components: k,
    })
}
