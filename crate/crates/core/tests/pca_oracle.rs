mod common;

use common::eigen::{
    characteristic_polynomial, compare, eigen_via_polynomial, eigen_via_power_iteration, real_roots,
};
use common::{covariance, random_data, rng, to_matrix, Dense};
use pcasvm_core::pca::{fit_pca, PcaModel};
use proptest::prelude::*;

fn columns(model: &PcaModel) -> Vec<Vec<f64>> {
    (0..model.n_inputs)
        .map(|k| model.eigenvectors.column(k))
        .collect()
}

fn check_against(data: &Dense, oracle: fn(&Dense) -> (Vec<f64>, Vec<Vec<f64>>)) -> (f64, f64) {
    let model = fit_pca(&to_matrix(data)).unwrap();
    let cov = covariance(data);
    let (values, vectors) = oracle(&cov);
    let scale = values[0].abs().max(1.0);
    compare(
        &model.eigenvalues,
        &columns(&model),
        &values,
        &vectors,
        1e-7 * scale,
    )
}

#[test]
fn oracle_recovers_known_spectra() {
    // diag(3, 1, 2) rotated by nothing
    let a = vec![
        vec![3.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 2.0],
    ];
    let c = characteristic_polynomial(&a);
    // (λ-1)(λ-2)(λ-3) = λ³ - 6λ² + 11λ - 6
    assert_eq!(c, vec![-6.0, 11.0, -6.0, 1.0]);
    let roots = real_roots(&c);
    for (r, e) in roots.iter().zip([1.0, 2.0, 3.0]) {
        assert!((r - e).abs() < 1e-12, "{roots:?}");
    }

    let b = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
    let (values, vectors) = eigen_via_polynomial(&b);
    assert!((values[0] - 3.0).abs() < 1e-12 && (values[1] - 1.0).abs() < 1e-12);
    assert!((vectors[0][0].abs() - 0.5f64.sqrt()).abs() < 1e-12);

    // both oracles agree with each other on a 4x4 with a repeated eigenvalue
    let r = vec![
        vec![2.0, 0.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0, 0.0],
        vec![0.0, 0.0, 5.0, 1.0],
        vec![0.0, 0.0, 1.0, 5.0],
    ];
    let (v1, e1) = eigen_via_polynomial(&r);
    let (v2, e2) = eigen_via_power_iteration(&r);
    let (dv, da) = compare(&v1, &e1, &v2, &e2, 1e-7);
    assert!(dv < 1e-10 && da < 1e-8, "{dv} {da}");
    assert!((v1[0] - 6.0).abs() < 1e-10 && (v1[3] - 2.0).abs() < 1e-10);
}

#[test]
fn three_by_three_fixture_matches_cubic_roots() {
    let data = vec![
        vec![2.5, 2.4, 0.5],
        vec![0.5, 0.7, 1.1],
        vec![2.2, 2.9, 0.3],
        vec![1.9, 2.2, 0.8],
        vec![3.1, 3.0, 0.1],
    ];
    let (dv, da) = check_against(&data, eigen_via_polynomial);
    assert!(dv <= 1e-8, "eigenvalue error {dv}");
    assert!(da <= 1e-8, "eigenvector error {da}");

    let model = fit_pca(&to_matrix(&data)).unwrap();
    let trace: f64 = (0..3).map(|i| covariance(&data)[i][i]).sum();
    assert!((model.eigenvalues.iter().sum::<f64>() - trace).abs() <= 1e-12 * trace);
}

#[test]
fn rank_deficient_covariance_matches_oracle() {
    // three rows in four dimensions: two zero eigenvalues
    let mut g = rng(11);
    let data = random_data(&mut g, 3, 4);
    let (dv, da) = check_against(&data, eigen_via_polynomial);
    assert!(dv <= 1e-8 && da <= 1e-6, "{dv} {da}");
    let model = fit_pca(&to_matrix(&data)).unwrap();
    assert_eq!(model.eigenvalues[3], 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn small_spectra_match_polynomial_oracle(seed in any::<u64>(), n in 1usize..=4, extra in 0usize..8) {
        let mut g = rng(seed);
        let data = random_data(&mut g, n + 1 + extra, n);
        let (dv, da) = check_against(&data, eigen_via_polynomial);
        prop_assert!(dv <= 1e-8, "eigenvalue error {}", dv);
        prop_assert!(da <= 1e-6, "subspace error {}", da);
    }

    #[test]
    fn larger_spectra_match_power_iteration(seed in any::<u64>(), n in 5usize..=12, rows in 2usize..30) {
        let mut g = rng(seed);
        let data = random_data(&mut g, rows, n);
        let (dv, da) = check_against(&data, eigen_via_power_iteration);
        prop_assert!(dv <= 1e-8, "eigenvalue error {}", dv);
        prop_assert!(da <= 1e-6, "subspace error {}", da);
    }
}
