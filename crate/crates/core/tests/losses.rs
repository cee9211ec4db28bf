mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use pic::calibration::lambda_stat;
use pic::losses::{loss_gradient, loss_value, null_mle, scale_score, CompositeLoss};
use pic::model::{Dataset, FamilySpec};
use proptest::prelude::*;

#[test]
fn gradients_match_finite_differences_for_every_family() {
    for (k, tag) in ALL_FAMILIES.iter().enumerate() {
        let family = fam(tag);
        let d = dataset(&family, 40, 6, 100 + k as u64);
        let cl = CompositeLoss::new(family);
        let mut r = rng(k as u64);
        for _ in 0..50 {
            let (b0, beta) = random_point(&family, &d, &mut r);
            let err = fd_gradient_error(&cl, &d, b0, &beta, None);
            assert!(err <= 1e-5, "{tag}: relative error {err}");
        }
    }
}

#[test]
fn explicit_sigma_gradients_and_scale_scores() {
    for tag in ["gaussian-nll", "gumbel"] {
        let family = fam(tag);
        let d = dataset(&family, 40, 4, 9);
        let cl = CompositeLoss::with_explicit_sigma(family).unwrap();
        let mut r = rng(3);
        for _ in 0..20 {
            let (b0, beta) = random_point(&family, &d, &mut r);
            let sigma = rand::Rng::random_range(&mut r, 0.5..3.0);
            assert!(fd_gradient_error(&cl, &d, b0, &beta, Some(sigma)) <= 1e-5);
            let h = 1e-6 * sigma;
            let f = |s| loss_value(&cl, b0, &beta, Some(s), &d).unwrap();
            let fd = (f(sigma + h) - f(sigma - h)) / (2.0 * h);
            let an = scale_score(&cl, b0, &beta, sigma, &d).unwrap();
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{tag}: {fd} vs {an}");
        }
    }
}

#[test]
fn profiled_loss_is_minimum_over_explicit_sigma() {
    for tag in ["gaussian-nll", "gumbel"] {
        let family = fam(tag);
        let d = dataset(&family, 60, 3, 21);
        let beta = DVector::from_vec(vec![0.2, -0.1, 0.05]);
        let prof = loss_value(&CompositeLoss::new(family), 0.1, &beta, None, &d).unwrap();
        let cl = CompositeLoss::with_explicit_sigma(family).unwrap();
        let grid_min = (1..2000)
            .map(|i| loss_value(&cl, 0.1, &beta, Some(i as f64 * 0.005), &d).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(prof <= grid_min + 1e-12);
        assert!(grid_min - prof < 1e-3 * prof);
    }
}

#[test]
fn subbotin_two_is_the_gaussian_root_loss() {
    let g = CompositeLoss::new(FamilySpec::gaussian());
    let s = CompositeLoss::new(fam("subbotin:2"));
    let d = dataset(&FamilySpec::gaussian(), 50, 5, 4);
    let mut r = rng(8);
    for _ in 0..20 {
        let (b0, beta) = random_point(&FamilySpec::gaussian(), &d, &mut r);
        let (vg, vs) = (loss_value(&g, b0, &beta, None, &d).unwrap(), loss_value(&s, b0, &beta, None, &d).unwrap());
        assert!((vg - vs).abs() <= 1e-8);
        let (g0, gg) = loss_gradient(&g, b0, &beta, None, &d).unwrap();
        let (s0, gs) = loss_gradient(&s, b0, &beta, None, &d).unwrap();
        assert!((g0 - s0).abs() <= 1e-8 && (gg - gs).amax() <= 1e-8);
    }
    let a = lambda_stat(&FamilySpec::gaussian(), &d).unwrap().value;
    let b = lambda_stat(&fam("subbotin:2"), &d).unwrap().value;
    assert!((a - b).abs() <= 1e-8);
}

fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

#[test]
fn null_fits_match_textbook_estimators() {
    let d = dataset(&FamilySpec::gaussian(), 31, 2, 5);
    let y = d.y().as_slice();
    let g = null_mle(&CompositeLoss::new(FamilySpec::gaussian()), &d).unwrap();
    assert!((g.beta0_hat - mean(y)).abs() < 1e-12);

    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let l = null_mle(&CompositeLoss::new(fam("laplace")), &d).unwrap();
    assert!((l.beta0_hat - sorted[15]).abs() < 1e-12);

    let pf = fam("poisson");
    let dp = dataset(&pf, 40, 2, 6);
    let p = null_mle(&CompositeLoss::new(pf), &dp).unwrap();
    assert!((p.beta0_hat - mean(dp.y().as_slice()).ln()).abs() < 1e-12);

    let bf = fam("bernoulli");
    let db = dataset(&bf, 40, 2, 7);
    let m = mean(db.y().as_slice());
    let b = null_mle(&CompositeLoss::new(bf), &db).unwrap();
    assert!((b.beta0_hat - (m / (1.0 - m)).ln()).abs() < 1e-10);
}

#[test]
fn null_gradient_vanishes_in_the_intercept() {
    for (k, tag) in ALL_FAMILIES.iter().enumerate() {
        if *tag == "laplace" {
            continue;
        }
        let family = fam(tag);
        let d = dataset(&family, 41, 3, 50 + k as u64);
        let cl = CompositeLoss::new(family);
        let nm = null_mle(&cl, &d).unwrap();
        let (g0, _) = loss_gradient(&cl, nm.beta0_hat, &DVector::zeros(3), None, &d).unwrap();
        assert!(g0.abs() < 1e-7, "{tag}: {g0}");
    }
}

#[test]
fn lambda_matches_closed_forms() {
    let x = DMatrix::from_fn(6, 2, |i, j| if (i + j) % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + 0.1 * i as f64));
    let xs = pic::model::standardize(&x, &DVector::zeros(6)).unwrap();
    let n = 6.0;
    let cases: [(&str, Vec<f64>); 3] = [
        ("bernoulli", vec![1., 0., 0., 1., 1., 0.]),
        ("poisson", vec![3., 0., 1., 4., 2., 2.]),
        ("exponential", vec![0.5, 2.0, 1.2, 0.1, 3.3, 0.9]),
    ];
    for (tag, y) in cases {
        let d = xs.with_response(DVector::from_vec(y.clone())).unwrap();
        let yb = mean(&y);
        let k = match tag {
            "bernoulli" => 1.0 / (n * (yb * (1.0 - yb)).sqrt()),
            "poisson" => 1.0 / (n * yb.sqrt()),
            _ => 1.0 / (n * yb),
        };
        let g = DVector::from_iterator(6, y.iter().map(|v| (v - yb) * k));
        let expect = d.x().tr_mul(&g).amax();
        let got = lambda_stat(&fam(tag), &d).unwrap().value;
        assert!((got - expect).abs() < 1e-12, "{tag}: {got} vs {expect}");
    }
}

#[test]
fn response_validation() {
    let d = Dataset::raw(DMatrix::from_element(3, 1, 1.0), DVector::from_vec(vec![0.0, 2.0, 1.0])).unwrap();
    let b = CompositeLoss::new(fam("bernoulli"));
    assert!(loss_value(&b, 0.0, &DVector::zeros(1), None, &d).is_err());
    let dn = d.with_response(DVector::from_vec(vec![-1.0, 2.0, 1.0])).unwrap();
    assert!(loss_value(&CompositeLoss::new(fam("poisson")), 0.0, &DVector::zeros(1), None, &dn).is_err());
}

fn affine_case() -> impl Strategy<Value = (u64, f64, f64, usize)> {
    (0u64..1000, 0.1f64..10.0, -20.0f64..20.0, 0usize..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn location_scale_statistics_are_affine_invariant((seed, a, b, k) in affine_case()) {
        let tag = ["gaussian", "subbotin:1.5", "laplace", "gumbel"][k];
        let family = fam(tag);
        let d = dataset(&family, 30, 8, seed);
        let l1 = lambda_stat(&family, &d).unwrap().value;
        let d2 = d.with_response(d.y().map(|v| a * v + b)).unwrap();
        let l2 = lambda_stat(&family, &d2).unwrap().value;
        prop_assert!((l1 - l2).abs() <= 1e-8, "{} {} {}", tag, l1, l2);
    }
}
