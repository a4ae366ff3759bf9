use gammareg::estimators::{
    canonical_form, fit_gre, fit_mle, fit_ridge, log_ls_start, mle_std_errors, ridge_k1, ridge_k2,
    AlphaConvention, MleMode, MleOptions, PenaltyRule, RidgePenalty,
};
use gammareg::model::{log_likelihood, score, weighted_crossproduct, Dataset};
use gammareg::numerics::{Matrix, RngStream};
use gammareg::simulation::{gen_design, gen_response};
use gammareg::Estimator;
use proptest::prelude::*;

fn sim(seed: u64, n: usize, rho: f64, beta: &[f64], zeta: f64) -> Dataset {
    let mut rng = RngStream::new(seed, 0);
    let x = gen_design(&mut rng, n, beta.len(), rho).unwrap();
    let y = gen_response(&mut rng, &x, beta, zeta).unwrap();
    Dataset::new(x, y, zeta).unwrap()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn large_sample_recovers_the_truth() {
    let beta = [1.0, 1.0, 1.0, 1.0];
    let data = sim(11, 5000, 0.0, &beta, 0.25);
    let fit = fit_mle(&data, &MleOptions::default()).unwrap();
    assert!(fit.converged);
    for (b, t) in fit.beta_hat.iter().zip(&beta) {
        assert!((b - t).abs() < 0.05, "{b} vs {t}");
    }
}

#[test]
fn std_errors_follow_the_weighted_inverse() {
    // Two columns, orthogonal after weighting, so the inverse is diagonal.
    let x = Matrix::from_rows(&[[1.0, 1.0], [1.0, -1.0], [1.0, 1.0], [1.0, -1.0]]).unwrap();
    let data = Dataset::new(x, vec![2.0, 3.0, 2.5, 2.8], 0.3).unwrap();
    let mut fit = fit_mle(&data, &MleOptions::default()).unwrap();
    fit.mu_hat = vec![2.0; 4];
    // XᵀWX = 4·4·I, so every SE is sqrt(0.3 / 16).
    let se = mle_std_errors(&data, &fit).unwrap();
    for s in se {
        assert!((s - (0.3f64 / 16.0).sqrt()).abs() < 1e-14);
    }
}

#[test]
fn converged_fit_zeroes_the_score_and_beats_the_start() {
    for seed in 0..20 {
        let data = sim(100 + seed, 40, 0.9, &[1.0, 0.5, -0.5, 0.2], 0.5);
        let fit = fit_mle(&data, &MleOptions::default()).unwrap();
        assert!(fit.converged, "seed {seed}");
        assert!(sup(&score(&data, &fit.beta_hat).unwrap()) < 1e-8);
        let start = log_ls_start(&data).unwrap();
        assert!(log_likelihood(&data, &fit.beta_hat).unwrap() >= log_likelihood(&data, &start).unwrap());
    }
}

#[test]
fn paper_faithful_mode_runs_and_reports_honestly() {
    let data = sim(5, 30, 0.8, &[0.5, 0.5, 0.5], 0.25);
    let opts = MleOptions { max_iter: 20, ..MleOptions::with_mode(MleMode::PaperFaithful) };
    let fit = fit_mle(&data, &opts).unwrap();
    assert!(fit.iterations <= 20);
    if !fit.converged {
        assert!(mle_std_errors(&data, &fit).is_err());
    }
}

#[test]
fn ridge_limits() {
    let data = sim(3, 50, 0.95, &[0.4, 0.3, 0.2, 0.1], 0.25);
    let mle = fit_mle(&data, &MleOptions::default()).unwrap();
    let zero = fit_ridge(&data, &mle, &RidgePenalty::Scalar(0.0)).unwrap();
    for (a, b) in zero.beta_hat.iter().zip(&mle.beta_hat) {
        assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
    }
    let huge = fit_ridge(&data, &mle, &RidgePenalty::Scalar(1e12)).unwrap();
    assert!(sup(&huge.beta_hat) < 1e-6);
    assert_eq!(zero.estimator, Estimator::CustomRidge);
}

#[test]
fn ridge_two_by_two_hand_oracle() {
    // Fixed fit with μ̂ = 1, so XᵀWX = XᵀX.
    let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]).unwrap();
    let data = Dataset::new(x, vec![1.0, 2.0, 3.0], 0.5).unwrap();
    let mut mle = fit_mle(&data, &MleOptions::default()).unwrap();
    mle.beta_hat = vec![1.0, 2.0];
    mle.mu_hat = vec![1.0; 3];
    // XᵀX = [[3, 3], [3, 5]]; A = XᵀX + 2I = [[5, 3], [3, 7]], det 26.
    let rhs = [3.0 * 1.0 + 3.0 * 2.0, 3.0 * 1.0 + 5.0 * 2.0];
    let want = [(7.0 * rhs[0] - 3.0 * rhs[1]) / 26.0, (-3.0 * rhs[0] + 5.0 * rhs[1]) / 26.0];
    let fit = fit_ridge(&data, &mle, &RidgePenalty::Scalar(2.0)).unwrap();
    for j in 0..2 {
        assert!((fit.beta_hat[j] - want[j]).abs() < 1e-12);
    }
    // Sandwich ζ A⁻¹ XᵀX A⁻¹, first diagonal by hand.
    let ainv = [[7.0 / 26.0, -3.0 / 26.0], [-3.0 / 26.0, 5.0 / 26.0]];
    let g = [[3.0, 3.0], [3.0, 5.0]];
    let mut v00 = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            v00 += ainv[0][a] * g[a][b] * ainv[b][0];
        }
    }
    assert!((fit.std_errors[0] - (0.5 * v00).sqrt()).abs() < 1e-12);
    // Per-coefficient penalties equal to the scalar agree.
    let per = fit_ridge(&data, &mle, &RidgePenalty::PerCoefficient(vec![2.0, 2.0])).unwrap();
    assert_eq!(per.beta_hat, fit.beta_hat);
}

#[test]
fn canonical_form_reconstructs() {
    let data = sim(9, 40, 0.9, &[0.3, -0.2, 0.6], 0.5);
    let mle = fit_mle(&data, &MleOptions::default()).unwrap();
    let cf = canonical_form(&data, &mle, AlphaConvention::Transpose).unwrap();
    let xtwx = weighted_crossproduct(&data, &mle.mu_hat).unwrap();
    let p = 3;
    for a in 0..p {
        for b in 0..p {
            let r: f64 = (0..p).map(|j| cf.eigenvectors[(a, j)] * cf.eigenvalues[j] * cf.eigenvectors[(b, j)]).sum();
            assert!((r - xtwx[(a, b)]).abs() < 1e-9 * xtwx.max_abs());
        }
    }
    // Λα recovers β̂ and the α norm equals the β̂ norm.
    let back = cf.eigenvectors.matvec(&cf.alpha).unwrap();
    for (u, v) in back.iter().zip(&mle.beta_hat) {
        assert!((u - v).abs() < 1e-10);
    }
    let k1 = ridge_k1(&cf, data.zeta()).unwrap();
    let k2 = ridge_k2(&cf, data.zeta(), data.n(), p).unwrap();
    assert!(k1 > 0.0 && k2 > 0.0);
    let g1 = fit_gre(&data, &mle, PenaltyRule::K1, AlphaConvention::Transpose).unwrap();
    assert_eq!(g1.estimator, Estimator::Gre1);
    assert_eq!(g1.penalty.as_deref(), Some(&[k1; 3][..]));
}

fn w_norm(data: &Dataset, mu: &[f64], b: &[f64]) -> f64 {
    let g = weighted_crossproduct(data, mu).unwrap();
    let gb = g.matvec(b).unwrap();
    b.iter().zip(&gb).map(|(x, y)| x * y).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shrinkage_is_monotone_in_k(seed in 0u64..1000, k1 in 0.0f64..50.0, dk in 0.01f64..50.0) {
        let data = sim(seed, 30, 0.9, &[0.5, 0.5, 0.5], 0.25);
        let mle = fit_mle(&data, &MleOptions::default()).unwrap();
        prop_assume!(mle.converged);
        let a = fit_ridge(&data, &mle, &RidgePenalty::Scalar(k1)).unwrap();
        let b = fit_ridge(&data, &mle, &RidgePenalty::Scalar(k1 + dk)).unwrap();
        let na = w_norm(&data, &mle.mu_hat, &a.beta_hat);
        let nb = w_norm(&data, &mle.mu_hat, &b.beta_hat);
        prop_assert!(nb <= na * (1.0 + 1e-12));
        let ea: f64 = a.beta_hat.iter().map(|v| v * v).sum();
        let eb: f64 = b.beta_hat.iter().map(|v| v * v).sum();
        prop_assert!(eb <= ea * (1.0 + 1e-12));
    }
}
