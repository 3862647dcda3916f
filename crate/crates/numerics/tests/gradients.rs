//! Analytic gradients against central finite differences.

use gridiron_numerics::design::DesignMatrix;
use gridiron_numerics::gam::{GamDesign, GamOptions, GamTerm, FactorCodes};
use gridiron_numerics::mixed::{GroupFactor, RemlProfile};
use gridiron_numerics::multinomial::MultinomialProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

fn central<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], j: usize) -> f64 {
    let h = 1e-5 * x[j].abs().max(1.0);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[j] += h;
    xm[j] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

#[test]
fn multinomial_gradient_matches_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 300;
    let cols: Vec<(String, Vec<f64>)> = vec![
        ("one".into(), vec![1.0; n]),
        ("a".into(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()),
        ("b".into(), (0..n).map(|_| rng.random_range(0.0..3.0)).collect()),
    ];
    let x = DesignMatrix::from_columns(cols).unwrap();
    let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..7)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let prob = MultinomialProblem::new(&x, &y, &w, 7, 6, 1e-3).unwrap();
    for _ in 0..10 {
        let beta: Vec<f64> = (0..prob.n_parameters()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = prob.gradient(&beta);
        for j in 0..beta.len() {
            let fd = central(|b| prob.objective(b), &beta, j);
            assert!(rel_err(g[j], fd) <= 1e-5, "coord {j}: {} vs {fd}", g[j]);
        }
    }
}

#[test]
fn gam_gradient_matches_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 400;
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let zs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let codes: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let y: Vec<f64> = xs.iter().map(|&x| if rng.random::<f64>() < 1.0 / (1.0 + (-x).exp()) { 1.0 } else { 0.0 }).collect();
    let terms = vec![
        GamTerm::Linear { name: "lin".into(), values: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() },
        GamTerm::Smooth { name: "sx".into(), values: xs, by: None },
        GamTerm::Smooth {
            name: "sz".into(),
            values: zs,
            by: Some(FactorCodes { name: "half".into(), levels: vec!["1".into(), "2".into()], codes }),
        },
    ];
    let w = vec![1.0; n];
    let mut design = GamDesign::build(&terms, &y, &w, &GamOptions::default()).unwrap();
    let k = design.n_smooths();
    for _ in 0..10 {
        let l: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-2.0..2.0))).collect();
        design.set_lambdas(&l);
        let beta: Vec<f64> = (0..design.n_parameters()).map(|_| rng.random_range(-0.5..0.5)).collect();
        let g = design.penalized_nll_gradient(&beta);
        for j in 0..beta.len() {
            let fd = central(|b| design.penalized_nll(b), &beta, j);
            assert!(rel_err(g[j], fd) <= 1e-5, "coord {j}: {} vs {fd}", g[j]);
        }
    }
}

#[test]
fn reml_gradient_matches_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 250;
    let a: Vec<String> = (0..n).map(|_| format!("a{}", rng.random_range(0..12))).collect();
    let b: Vec<String> = (0..n).map(|_| format!("b{}", rng.random_range(0..7))).collect();
    let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..n).map(|i| 0.3 + 0.5 * x1[i] + rng.random_range(-1.0..1.0)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n]), ("x1".into(), x1)]).unwrap();
    let groups = [GroupFactor::from_labels("a", &a), GroupFactor::from_labels("b", &b)];
    let prof = RemlProfile::new(&y, &x, &groups, &w).unwrap();
    for _ in 0..10 {
        let theta: Vec<f64> = (0..2).map(|_| rng.random_range(0.05..3.0)).collect();
        let g = prof.gradient(&theta).unwrap();
        for j in 0..2 {
            let fd = central(|t| prof.criterion(t).unwrap(), &theta, j);
            assert!(rel_err(g[j], fd) <= 1e-5, "θ{j}: {} vs {fd}", g[j]);
        }
    }
}
