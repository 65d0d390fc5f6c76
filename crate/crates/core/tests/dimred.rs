mod common;

use common::*;
use ktopic::dimred::eigen::frobenius;
use ktopic::dimred::{
    center_kernel, compute_kernel, sym_eigs_topk, truncated_svd_op, KernelConfig, KernelPca, Pca,
};
use ndarray::{array, Array2, Axis};
use proptest::prelude::*;

#[test]
fn oracle_self_checks() {
    let a = array![[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
    let (vals, vecs) = jacobi_eigen(a.view());
    for c in 0..3 {
        let r = a.dot(&vecs.column(c)) - &vecs.column(c) * vals[c];
        assert!(r.iter().all(|x| x.abs() < 1e-12));
    }
    let m = random_matrix(6, 4, -1.0, 1.0, 1);
    let (u, s, v) = jacobi_svd(m.view());
    let back = u.dot(&Array2::from_diag(&ndarray::Array1::from(s))).dot(&v.t());
    assert!((&back - &m).iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn four_point_kpca_matches_frozen_reference() {
    // values from an external dense eigensolver; sign: largest |u| entry positive
    let x = array![[0.0, 0.0], [0.3, 0.1], [0.1, 0.4], [0.5, 0.45]];
    let expected = array![
        [-0.6069204558681326, -0.22435893343280183],
        [-0.31269401405177033, -0.11969589391553441],
        [0.1923621582264023, 0.7923325592785325],
        [0.7272523116935007, -0.4482777319301963]
    ];
    let (model, proj) = KernelPca::fit(x.view(), 2, KernelConfig::rbf(15.0), 42).unwrap();
    assert!((&proj - &expected).iter().all(|d| d.abs() < 1e-9), "{proj}");
    let mu = &model.eigen.eigenvalues;
    assert!((mu[0] - 1.03202911e+00).abs() < 1e-8 && (mu[1] - 8.93407847e-01).abs() < 1e-8);
    let oracle = brute_kpca(x.view(), 2, OracleKernel::Rbf(15.0));
    assert!(max_diff_up_to_sign(proj.view(), oracle.view()) < 1e-9);
}

#[test]
fn kpca_matches_brute_force_on_random_data() {
    let x = random_matrix(40, 4, 0.0, 1.0, 5);
    let (_, proj) = KernelPca::fit(x.view(), 5, KernelConfig::rbf(1.5), 42).unwrap();
    let oracle = brute_kpca(x.view(), 5, OracleKernel::Rbf(1.5));
    assert!(max_diff_up_to_sign(proj.view(), oracle.view()) < 1e-8);
}

#[test]
fn linear_kpca_equals_pca() {
    let x = random_matrix(50, 10, -1.0, 1.0, 11);
    let (_, kp) = KernelPca::fit(x.view(), 5, KernelConfig::linear(), 42).unwrap();
    let (_, p) = Pca::fit(x.view(), 5).unwrap();
    let bp = brute_pca(x.view(), 5);
    for c in 0..5 {
        assert!(corr(kp.column(c), p.column(c)).abs() >= 1.0 - 1e-8);
        assert!(corr(bp.column(c), p.column(c)).abs() >= 1.0 - 1e-8);
    }
}

#[test]
fn kpca_out_of_sample_reproduces_training_projection() {
    let x = random_matrix(25, 3, 0.0, 1.0, 2);
    let (model, proj) = KernelPca::fit(x.view(), 3, KernelConfig::rbf(2.0), 42).unwrap();
    let again = model.transform(x.view()).unwrap();
    assert!((&again - &proj).iter().all(|d| d.abs() < 1e-10));
}

#[test]
fn eigen_residual_bound_at_table_gamma() {
    let x = random_matrix(100, 16, 0.0, 0.25, 3);
    let k = compute_kernel(x.view(), &KernelConfig::rbf(15.0)).unwrap();
    let kc = center_kernel(k.view()).unwrap();
    let bound = 1e-8 * frobenius(kc.view());
    let (model, _) = KernelPca::fit(x.view(), 5, KernelConfig::rbf(15.0), 42).unwrap();
    for (j, mu) in model.eigen.eigenvalues.iter().enumerate() {
        let a = model.alphas.column(j);
        let r = kc.dot(&a) - &a * *mu;
        assert!(r.dot(&r).sqrt() <= bound);
    }
}

#[test]
fn topk_eigs_match_jacobi() {
    let b = random_matrix(30, 30, -1.0, 1.0, 8);
    let s = &b + &b.t();
    let (vals, vecs) = jacobi_eigen(s.view());
    let got = sym_eigs_topk(s.view(), 4, 1e-10).unwrap();
    for j in 0..4 {
        assert!((got.eigenvalues[j] - vals[j]).abs() < 1e-9);
        let d = got.eigenvectors.column(j).dot(&vecs.column(j)).abs();
        assert!((d - 1.0).abs() < 1e-9);
    }
}

#[test]
fn truncated_svd_matches_jacobi_svd() {
    for (r, c) in [(20, 7), (7, 20)] {
        let m = random_matrix(r, c, -1.0, 1.0, (r * 31 + c) as u64);
        let svd = truncated_svd_op(&m, 3, 0).unwrap();
        let (u, s, _) = jacobi_svd(if r >= c { m.view() } else { m.t() });
        for j in 0..3 {
            assert!((svd.singular_values[j] - s[j]).abs() < 1e-10);
        }
        if r >= c {
            let top = u.slice(ndarray::s![.., ..3]).to_owned();
            assert!(max_diff_up_to_sign(svd.u.view(), top.view()) < 1e-8);
        }
        let full = truncated_svd_op(&m, r.min(c), 0).unwrap().reconstruct();
        assert!((&full - &m).iter().all(|d| d.abs() < 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kpca_projections_are_centered_and_axes_unit(seed in 0u64..1000, n in 6usize..20, gamma in 0.2f64..5.0) {
        let x = random_matrix(n, 3, 0.0, 1.0, seed);
        let (model, proj) = KernelPca::fit(x.view(), 2, KernelConfig::rbf(gamma), seed).unwrap();
        for s in proj.sum_axis(Axis(0)).iter() {
            prop_assert!(s.abs() < 1e-9);
        }
        // feature-space axis norm αᵀ K' α = 1
        let kc = center_kernel(compute_kernel(x.view(), &model.config).unwrap().view()).unwrap();
        for j in 0..2 {
            let a = model.alphas.column(j);
            prop_assert!((a.dot(&kc.dot(&a)) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn topk_eigenvectors_are_orthonormal(seed in 0u64..1000, n in 3usize..25) {
        let b = random_matrix(n, n, -1.0, 1.0, seed);
        let s = &b + &b.t();
        let k = n.min(4);
        let r = sym_eigs_topk(s.view(), k, 1e-10).unwrap();
        let g = r.eigenvectors.t().dot(&r.eigenvectors);
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g[[i, j]] - want).abs() < 1e-9);
            }
        }
        prop_assert!(r.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }
}
