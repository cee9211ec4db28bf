mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use pic::model::{gaussian_design, Dataset, FamilySpec, TruthSpec, generate_synthetic};
use pic::subset::*;
use proptest::prelude::*;

fn ols_rss(d: &Dataset, cols: &[usize]) -> f64 {
    let n = d.n();
    let mut a = DMatrix::from_element(n, cols.len() + 1, 1.0);
    for (k, &j) in cols.iter().enumerate() {
        a.set_column(k + 1, &d.x().column(j));
    }
    let coef = (a.transpose() * &a).cholesky().unwrap().solve(&(a.transpose() * d.y()));
    (d.y() - &a * coef).norm_squared()
}

#[test]
fn forward_statistic_hand_example() {
    let x = DMatrix::from_column_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
    let d = Dataset::from_standardized(x, DVector::from_vec(vec![2.0, 0.0, 1.0, 1.0])).unwrap();
    assert!((l0_statistic(&d, L0Mode::Forward).unwrap() - 2f64.ln()).abs() < 1e-14);
    assert!((l0_statistic(&d, L0Mode::BestSubset).unwrap() - 2f64.ln()).abs() < 1e-14);
    let path = forward_path(&d, &FamilySpec::gaussian(), 1).unwrap();
    assert_eq!(path.rss, vec![2.0, 1.0]);
}

#[test]
fn forward_path_rss_are_least_squares_fits() {
    let d = dataset(&FamilySpec::gaussian(), 50, 12, 3);
    let path = forward_path(&d, &FamilySpec::gaussian(), 8).unwrap();
    assert_eq!(path.kind, PathKind::Rss);
    for s in 0..=8 {
        let oracle = ols_rss(&d, &path.order[..s]);
        assert!((path.rss[s] - oracle).abs() < 1e-9 * oracle.max(1.0), "step {s}");
    }
    assert!(path.rss.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn forward_path_picks_the_greedy_best() {
    let d = dataset(&FamilySpec::gaussian(), 40, 10, 4);
    let path = forward_path(&d, &FamilySpec::gaussian(), 3).unwrap();
    for s in 1..=3 {
        let prefix = &path.order[..s - 1];
        let best = (0..10)
            .filter(|j| !prefix.contains(j))
            .map(|j| {
                let mut cols = prefix.to_vec();
                cols.push(j);
                ols_rss(&d, &cols)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((path.rss[s] - best).abs() < 1e-9 * best);
    }
}

#[test]
fn path_length_is_bounded() {
    let d = dataset(&FamilySpec::gaussian(), 10, 20, 5);
    assert!(forward_path(&d, &FamilySpec::gaussian(), 9).is_err());
    assert_eq!(forward_path(&d, &FamilySpec::gaussian(), 8).unwrap().k, 8);
    assert!(forward_path(&d, &fam("poisson"), 2).is_err());
}

#[test]
fn information_criteria_values() {
    let d = dataset(&FamilySpec::gaussian(), 60, 15, 6);
    let path = forward_path(&d, &FamilySpec::gaussian(), 10).unwrap();
    let (n, p) = (60.0f64, 15);
    let bic = select_ic(&path, Criterion::Bic, 60, p).unwrap();
    let ebic = select_ic(&path, Criterion::Ebic { gamma: 0.5 }, 60, p).unwrap();
    for s in 0..=10 {
        let b = n * (path.rss[s] / n).ln() + s as f64 * n.ln();
        assert!((bic.score_by_s[s] - b).abs() < 1e-9);
        let binom: f64 = (0..s).map(|i| ((p - i) as f64 / (i + 1) as f64).ln()).sum();
        assert!((ebic.score_by_s[s] - b - binom).abs() < 1e-9);
    }
    let best = (0..=10).min_by(|&a, &b| bic.score_by_s[a].total_cmp(&bic.score_by_s[b])).unwrap();
    assert_eq!(bic.s_hat, best);
    assert!(ebic.s_hat <= bic.s_hat);
}

#[test]
fn pivotal_criterion_is_gaussian_only() {
    let f = fam("bernoulli");
    let d = dataset(&f, 80, 6, 7);
    let path = forward_path(&d, &f, 4).unwrap();
    assert_eq!(path.kind, PathKind::Deviance);
    assert!(select_ic(&path, Criterion::PivotalBic { lambda: 0.1 }, 80, 6).is_err());
}

#[test]
fn early_stopped_deviance_path_selects_the_same_model() {
    let f = fam("bernoulli");
    for seed in 0..5 {
        let truth = TruthSpec { beta0: 0.0, support: vec![1, 4], values: vec![1.5, -1.5], sigma: 1.0 };
        let d = generate_synthetic(&f, &truth, 150, 30, seed).unwrap();
        let full = forward_path(&d, &f, 30).unwrap();
        let short = forward_path_with(&d, &f, 30, Some(DEFAULT_EBIC_GAMMA)).unwrap();
        assert!(short.k <= full.k);
        assert_eq!(&full.order[..short.k], &short.order[..]);
        for c in [Criterion::Bic, Criterion::Ebic { gamma: DEFAULT_EBIC_GAMMA }] {
            let a = select_ic(&full, c, 150, 30).unwrap();
            let b = select_ic(&short, c, 150, 30).unwrap();
            assert_eq!(a.support(&full), b.support(&short));
        }
    }
}

#[test]
fn l0_lambda_is_reproducible_and_pivotal() {
    let x = gaussian_design(&mut rng(1), 40, 10).unwrap();
    let d = Dataset::from_standardized(x.clone(), DVector::zeros(40)).unwrap();
    let a = pic_l0_lambda(&d, L0Mode::Forward, 0.05, 300, 2).unwrap();
    let b = pic_l0_lambda(&d, L0Mode::Forward, 0.05, 300, 2).unwrap();
    assert_eq!(a.lambda, b.lambda);
    let bs = pic_l0_lambda(&d, L0Mode::BestSubset, 0.05, 300, 2).unwrap();
    assert!(bs.lambda >= a.lambda);
    // the statistic is invariant under y -> a y + b
    let y = DVector::from_fn(40, |i, _| ((i * 7919) % 101) as f64 / 10.0);
    let d1 = d.with_response(y.clone()).unwrap();
    let d2 = d.with_response(y.map(|v| -3.0 * v + 11.0)).unwrap();
    let s1 = l0_statistic(&d1, L0Mode::BestSubset).unwrap();
    let s2 = l0_statistic(&d2, L0Mode::BestSubset).unwrap();
    assert!((s1 - s2).abs() < 1e-10);
}

#[test]
fn best_subset_is_limited() {
    let d = dataset(&FamilySpec::gaussian(), 40, BEST_SUBSET_MAX_P + 1, 1);
    assert!(l0_statistic(&d, L0Mode::BestSubset).is_err());
}

#[test]
fn cv_lasso_is_seeded() {
    let f = FamilySpec::gaussian();
    let truth = TruthSpec { beta0: 0.0, support: vec![0, 2], values: vec![2.0, 2.0], sigma: 1.0 };
    let d = generate_synthetic(&f, &truth, 80, 20, 9).unwrap();
    let a = cv_lasso(&d, &f, 5, 1).unwrap();
    let b = cv_lasso(&d, &f, 5, 1).unwrap();
    assert_eq!(a.beta_hat, b.beta_hat);
    assert!(a.support_hat.contains(&0) && a.support_hat.contains(&2));
    assert!(cv_lasso(&d, &f, 1, 1).is_err());
    assert!(cv_lasso(&d, &fam("gumbel"), 5, 1).is_err());
    let bern = fam("bernoulli");
    let db = generate_synthetic(&bern, &truth, 120, 10, 9).unwrap();
    let fb = cv_lasso(&db, &bern, 5, 3).unwrap();
    assert!(fb.support_hat.contains(&0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn best_subset_dominates_forward(seed in 0u64..10_000, p in 1usize..6) {
        let d = dataset(&FamilySpec::gaussian(), 12, p, seed);
        let f = l0_statistic(&d, L0Mode::Forward).unwrap();
        let b = l0_statistic(&d, L0Mode::BestSubset).unwrap();
        prop_assert!(b >= f - 1e-12);
        if p == 1 {
            prop_assert!((b - f).abs() < 1e-12);
        }
    }
}
