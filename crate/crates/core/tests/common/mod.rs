#![allow(dead_code)]

use nalgebra::DVector;
use pic::losses::{loss_gradient, loss_value, CompositeLoss};
use pic::model::{generate_synthetic, Dataset, FamilySpec, TruthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fam(tag: &str) -> FamilySpec {
    tag.parse().unwrap()
}

pub const ALL_FAMILIES: [&str; 11] = [
    "gaussian",
    "gaussian-nll",
    "subbotin:1.5",
    "subbotin:3",
    "laplace",
    "gumbel",
    "bernoulli",
    "bernoulli-nll",
    "poisson",
    "poisson-nll",
    "exponential",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A dataset with a few modest signals, response drawn from the family.
pub fn dataset(family: &FamilySpec, n: usize, p: usize, seed: u64) -> Dataset {
    let s = p.min(2);
    let truth = TruthSpec {
        beta0: 0.3,
        support: (0..s).collect(),
        values: vec![0.4; s],
        sigma: 1.5,
    };
    generate_synthetic(family, &truth, n, p, seed).unwrap()
}

/// A random point `(beta0, beta)` whose linear predictor stays inside the
/// family's link domain.
pub fn random_point(family: &FamilySpec, d: &Dataset, r: &mut ChaCha8Rng) -> (f64, DVector<f64>) {
    let dom = CompositeLoss::new(*family).domain();
    loop {
        let (b0, spread) = match family.to_string().as_str() {
            "bernoulli-nll" => (r.random_range(-0.4..0.4), 0.05),
            "poisson-nll" => (r.random_range(2.0..4.0), 0.05),
            _ => (r.random_range(-1.0..1.0), 0.4),
        };
        let beta = DVector::from_fn(d.p(), |_, _| r.random_range(-spread..spread));
        let eta = d.linear_predictor(b0, &beta);
        if eta.iter().all(|e| dom.contains(*e)) {
            return (b0, beta);
        }
    }
}

/// Relative sup-norm gap between the analytic gradient and central differences.
pub fn fd_gradient_error(cl: &CompositeLoss, d: &Dataset, b0: f64, beta: &DVector<f64>, sigma: Option<f64>) -> f64 {
    let (g0, g) = loss_gradient(cl, b0, beta, sigma, d).unwrap();
    let f = |b0: f64, b: &DVector<f64>| loss_value(cl, b0, b, sigma, d).unwrap();
    let h = |v: f64| 1e-6 * v.abs().max(1.0);
    let mut num = vec![(f(b0 + h(b0), beta) - f(b0 - h(b0), beta)) / (2.0 * h(b0))];
    for j in 0..d.p() {
        let hj = h(beta[j]);
        let mut up = beta.clone();
        let mut dn = beta.clone();
        up[j] += hj;
        dn[j] -= hj;
        num.push((f(b0, &up) - f(b0, &dn)) / (2.0 * hj));
    }
    let ana: Vec<f64> = std::iter::once(g0).chain(g.iter().copied()).collect();
    let scale = ana.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
    ana.iter().zip(&num).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())) / scale
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Asymptotic 1% critical value of the two-sample KS statistic.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.6276 * ((n + m) / (n * m)).sqrt()
}

/// Objective of the SCAD proximal problem.
pub fn scad_prox_objective(u: f64, z: f64, step: f64, lambda: f64, a: f64) -> f64 {
    0.5 * (u - z).powi(2) + step * pic::solver::scad_value(u, lambda, a)
}

/// Minimizer of the SCAD proximal objective over a grid of width 1e-5.
pub fn brute_scad_prox(z: f64, step: f64, lambda: f64, a: f64) -> f64 {
    let lo = -z.abs() - 1.0;
    let m = ((2.0 * z.abs() + 2.0) / 1e-5) as usize;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=m {
        let u = lo + i as f64 * 1e-5;
        let v = scad_prox_objective(u, z, step, lambda, a);
        if v < best.0 {
            best = (v, u);
        }
    }
    best.1
}
