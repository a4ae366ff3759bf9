mod common;

use common::{integrate, ks_two_sample, mean, var};
use gammareg::numerics::special::{log_gamma, reg_lower_inc_gamma, reg_upper_inc_gamma};
use gammareg::numerics::{condition_number, solve_spd, sym_eigen, Cholesky, Matrix, RngStream};
use gammareg::Error;
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

#[test]
fn log_gamma_matches_reference_over_wide_range() {
    // statrs uses an independent Lanczos variant; agreement to ~1e-12 relative
    // (absolute near the roots at 1 and 2).
    let mut x = 1e-6;
    while x < 1e6 {
        let ours = log_gamma(x).unwrap();
        let theirs = statrs_ln_gamma(x);
        let err = (ours - theirs).abs() / theirs.abs().max(1.0);
        assert!(err < 1e-12, "x = {x}: {ours} vs {theirs}");
        x *= 1.37;
    }
}

#[test]
fn lower_incomplete_gamma_against_quadrature() {
    let q = integrate(&|t: f64| t * (-t).exp(), 0.0, 2.0, 1e-14);
    assert!((reg_lower_inc_gamma(2.0, 2.0).unwrap() - q).abs() < 1e-10);
    // Γ(3.5) P(3.5, 1.7) = ∫₀^1.7 t^2.5 e^{-t} dt
    let q = integrate(&|t: f64| t.powf(2.5) * (-t).exp(), 0.0, 1.7, 1e-14) / log_gamma(3.5).unwrap().exp();
    assert!((reg_lower_inc_gamma(3.5, 1.7).unwrap() - q).abs() < 1e-10);
}

#[test]
fn incomplete_gamma_is_monotone_and_complementary() {
    for a in [0.3, 1.0, 2.5, 10.0, 60.0] {
        let mut last = 0.0;
        for k in 0..200 {
            let x = k as f64 * 0.5;
            let p = reg_lower_inc_gamma(a, x).unwrap();
            assert!(p >= last - 1e-15 && p <= 1.0);
            assert!((p + reg_upper_inc_gamma(a, x).unwrap() - 1.0).abs() < 1e-13);
            last = p;
        }
    }
}

#[test]
fn normal_moments() {
    let mut rng = RngStream::new(2024, 0);
    let xs: Vec<f64> = (0..1_000_000).map(|_| rng.standard_normal()).collect();
    assert!(mean(&xs).abs() < 0.005);
    assert!((var(&xs) - 1.0).abs() < 0.01);
}

#[test]
fn gamma_mean() {
    let mut rng = RngStream::new(2024, 1);
    let xs: Vec<f64> = (0..1_000_000).map(|_| rng.gamma(4.0, 0.25).unwrap()).collect();
    assert!((mean(&xs) - 1.0).abs() < 0.005);
    assert!((var(&xs) - 0.25).abs() < 0.005);
}

#[test]
fn gamma_scaling_property() {
    let (shape, scale, c) = (2.0, 0.7, 3.5);
    let mut a = RngStream::new(5, 0);
    let mut b = RngStream::new(5, 1);
    let scaled: Vec<f64> = (0..100_000).map(|_| c * a.gamma(shape, scale).unwrap()).collect();
    let direct: Vec<f64> = (0..100_000).map(|_| b.gamma(shape, c * scale).unwrap()).collect();
    assert!(ks_two_sample(scaled, direct) < 0.01);
}

#[test]
fn streams_are_independent_smoke() {
    // Chi-square on the 4×4 table of (quartile of stream A, quartile of stream B).
    let mut a = RngStream::new(9, 100);
    let mut b = RngStream::new(9, 101);
    let n = 160_000;
    let mut table = [[0usize; 4]; 4];
    for _ in 0..n {
        let i = (a.uniform() * 4.0) as usize;
        let j = (b.uniform() * 4.0) as usize;
        table[i][j] += 1;
    }
    let expected = n as f64 / 16.0;
    let chi2: f64 = table
        .iter()
        .flatten()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    // 9 degrees of freedom; 0.999 quantile ≈ 27.9
    assert!(chi2 < 27.9, "chi2 = {chi2}");
}

#[test]
fn solve_spd_fixtures() {
    let x = solve_spd(&Matrix::from_diag(&[2.0, 4.0]), &Matrix::from_rows(&[[2.0], [4.0]]).unwrap()).unwrap();
    assert!(x.column(0).iter().all(|v| (v - 1.0).abs() < 1e-15));
    let err = Cholesky::new(&Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap()).unwrap_err();
    assert_eq!(err, Error::Singular { pivot: 1 });
    assert!((condition_number(&Matrix::from_diag(&[1.0, 100.0])).unwrap() - 10.0).abs() < 1e-12);
}

fn spd_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..7).prop_flat_map(|p| {
        proptest::collection::vec(-3.0f64..3.0, p * (p + 2)).prop_map(move |v| {
            let b = Matrix::from_row_major(p + 2, p, v).unwrap();
            b.gram().add_diag(&vec![0.1; p]).unwrap()
        })
    })
}

fn symmetric_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..8).prop_flat_map(|p| {
        proptest::collection::vec(-5.0f64..5.0, p * p).prop_map(move |v| {
            let a = Matrix::from_row_major(p, p, v).unwrap();
            a.add(&a.transpose()).unwrap().scale(0.5)
        })
    })
}

proptest! {
    #[test]
    fn eigen_reconstruction_and_orthonormality(a in symmetric_matrix()) {
        let e = sym_eigen(&a).unwrap();
        let p = a.rows();
        let norm = a.frobenius_norm().max(1e-300);
        let diff = e.reconstruct().add(&a.scale(-1.0)).unwrap().frobenius_norm();
        prop_assert!(diff / norm < 1e-9 || diff < 1e-12);
        let vtv = e.eigenvectors.transpose().matmul(&e.eigenvectors).unwrap();
        prop_assert!(vtv.add(&Matrix::identity(p).scale(-1.0)).unwrap().max_abs() < 1e-10);
        for w in e.eigenvalues.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        for j in 0..p {
            let v = e.eigenvectors.column(j);
            let av = a.matvec(&v).unwrap();
            for (x, y) in av.iter().zip(&v) {
                prop_assert!((x - e.eigenvalues[j] * y).abs() <= 1e-10 * (1.0 + a.max_abs()));
            }
        }
    }

    #[test]
    fn spd_solve_residual(a in spd_matrix(), seed in any::<u64>()) {
        let p = a.rows();
        let mut rng = RngStream::new(seed, 0);
        let b = Matrix::from_row_major(p, 2, (0..2 * p).map(|_| rng.standard_normal()).collect()).unwrap();
        let x = solve_spd(&a, &b).unwrap();
        let r = a.matmul(&x).unwrap().add(&b.scale(-1.0)).unwrap();
        prop_assert!(r.frobenius_norm() <= 1e-8 * b.frobenius_norm().max(1.0));
    }

    #[test]
    fn log_gamma_recurrence_random(x in 0.01f64..50.0) {
        let lhs = log_gamma(x + 1.0).unwrap();
        let rhs = log_gamma(x).unwrap() + x.ln();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }
}
