mod common;

use asm3d_core::linalg::{CsrMatrix, LinearOperator};
use asm3d_core::pcg::{lanczos_condition_estimate, pcg_solve, IdentityOperator};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn random_spd(seed: u64, n: usize) -> DMatrix<f64> {
    let mut rng = common::rng(seed);
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let a = &g * g.transpose() + DMatrix::identity(n, n) * 0.1;
    (&a + a.transpose()) * 0.5
}

fn to_csr(a: &DMatrix<f64>) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            t.push((i, j, a[(i, j)]));
        }
    }
    CsrMatrix::from_triplets(a.nrows(), a.ncols(), &t)
}

/// Diagonal (Jacobi) preconditioner.
struct Jacobi(Vec<f64>);

impl LinearOperator for Jacobi {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..x.len() {
            y[i] = x[i] / self.0[i];
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn solves_and_estimates_spd_systems(seed in any::<u64>(), n in 2usize..40) {
        let a = random_spd(seed, n);
        let csr = to_csr(&a);
        let m = Jacobi(csr.diagonal());
        let b = common::random_vec(&mut common::rng(seed ^ 1), n);
        let (x, rep) = pcg_solve(&csr, &m, &b, 1e-10, 10 * n).unwrap();
        prop_assert!(rep.converged);
        // reported residual is the true one
        let r: Vec<f64> = b.iter().zip(csr.mul_vec_alloc(&x)).map(|(bi, ai)| bi - ai).collect();
        let true_rel = asm3d_core::linalg::norm2(&r) / asm3d_core::linalg::norm2(&b);
        prop_assert!((true_rel - rep.final_relative_residual).abs() <= 1e-12);
        prop_assert!(true_rel <= 1e-10);
        prop_assert_eq!(rep.relative_residual_history.len(), rep.iterations + 1);
        prop_assert_eq!(rep.relative_residual_history[0], 1.0);

        // Ritz values lie inside the spectrum of M⁻¹A
        let minv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, m.0.iter().map(|d| 1.0 / d)));
        let ev = common::dense_preconditioned_spectrum(&a, &minv).unwrap();
        let (lo, hi) = (ev[0], ev[n - 1]);
        let (elo, ehi) = rep.extreme_eigs.unwrap();
        prop_assert!(elo >= lo * (1.0 - 1e-8) && ehi <= hi * (1.0 + 1e-8));
        prop_assert!(rep.cond_estimate.unwrap() <= hi / lo * 1.01);
    }

    #[test]
    fn diagonal_spectra_are_recovered(seed in any::<u64>(), n in 2usize..30) {
        let mut rng = common::rng(seed);
        let d: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(0.0..3.0))).collect();
        let a = CsrMatrix::from_triplets(n, n, &d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect::<Vec<_>>());
        let b = vec![1.0; n];
        let (_, rep) = pcg_solve(&a, &IdentityOperator(n), &b, 1e-13, 4 * n).unwrap();
        let lo = d.iter().copied().fold(f64::MAX, f64::min);
        let hi = d.iter().copied().fold(0.0, f64::max);
        let (elo, ehi) = rep.extreme_eigs.unwrap();
        prop_assert!(common::rel_close(elo, lo, 1e-3), "{} vs {}", elo, lo);
        prop_assert!(common::rel_close(ehi, hi, 1e-6), "{} vs {}", ehi, hi);
    }
}

#[test]
fn lanczos_matrix_of_a_known_recurrence() {
    // CG on diag(1, 2) from b = (1, 1): α₀ = 2/3, β₀ = 1/9, α₁ = 3/4.
    let est = lanczos_condition_estimate(&[2.0 / 3.0, 0.75], &[1.0 / 9.0]).unwrap();
    assert!((est.lambda_min - 1.0).abs() < 1e-12);
    assert!((est.lambda_max - 2.0).abs() < 1e-12);
    assert!(est.reliable);
    let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 2.0)]);
    let (_, rep) = pcg_solve(&a, &IdentityOperator(2), &[1.0, 1.0], 1e-14, 5).unwrap();
    assert_eq!(rep.iterations, 2);
    assert!((rep.cond_estimate.unwrap() - 2.0).abs() < 1e-12);
    assert!(lanczos_condition_estimate(&[], &[]).is_err());
    assert!(lanczos_condition_estimate(&[1.0, 1.0, 1.0], &[0.1]).is_err());
}

#[test]
fn residual_csv_lists_the_history() {
    let a = to_csr(&random_spd(4, 12));
    let (_, rep) = pcg_solve(&a, &IdentityOperator(12), &[1.0; 12], 1e-8, 100).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.csv");
    rep.write_residual_csv(&p).unwrap();
    let mut r = csv::Reader::from_path(&p).unwrap();
    let rows: Vec<(usize, f64)> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), rep.relative_residual_history.len());
    for (i, (it, v)) in rows.iter().enumerate() {
        assert_eq!(*it, i);
        assert_eq!(*v, rep.relative_residual_history[i]);
    }
}
