//! Invariants of the fitters: simplex rows, weight scaling, shrinkage
//! ordering, smoothing limits and closed-form small cases.

use gridiron_numerics::DesignMatrix;
use gridiron_numerics::gam::{fit_gam_logit, GamDesign, GamOptions, GamTerm};
use gridiron_numerics::mixed::{fit_varying_intercepts, GroupFactor, MixedOptions};
use gridiron_numerics::multinomial::{fit_multinomial, MultinomialOptions};
use gridiron_numerics::wls::fit_wls;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn softmax_draw(rng: &mut ChaCha8Rng, eta: &[f64]) -> usize {
    let z: f64 = eta.iter().map(|e| e.exp()).sum();
    let u = rng.random::<f64>() * z;
    let mut acc = 0.0;
    for (c, e) in eta.iter().enumerate() {
        acc += e.exp();
        if u < acc {
            return c;
        }
    }
    eta.len() - 1
}

fn small_problem(seed: u64, n: usize) -> (DesignMatrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = a.iter().map(|&v| softmax_draw(&mut rng, &[0.0, v, -v, 0.5 * v])).collect();
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n]), ("a".into(), a)]).unwrap();
    (x, y)
}

#[test]
fn probabilities_on_fifty_thousand_rows_track_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let n = 50_000;
    let beta = [[0.2, 0.9], [-0.8, 0.4], [-1.6, -0.3], [-1.0, -0.7], [0.4, -1.2], [-0.4, 0.6]];
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
    let eta = |v: f64| {
        let mut e = vec![0.0; 7];
        for k in 0..6 {
            e[k + 1] = beta[k][0] + beta[k][1] * v;
        }
        e
    };
    let y: Vec<usize> = a.iter().map(|&v| softmax_draw(&mut rng, &eta(v))).collect();
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n]), ("a".into(), a.clone())]).unwrap();
    let fit = fit_multinomial(&x, &y, &vec![1.0; n], 7, 0, &MultinomialOptions::default()).unwrap();
    let pred = fit.predict(&x).unwrap();
    let mut total = 0.0;
    for i in 0..n {
        let e = eta(a[i]);
        let z: f64 = e.iter().map(|v| v.exp()).sum();
        for c in 0..7 {
            total += (pred[(i, c)] - e[c].exp() / z).abs();
        }
    }
    let mean = total / (7 * n) as f64;
    assert!(mean <= 0.01, "mean |Δ| = {mean}");

    // brute-force softmax of Xβ̂ on a few rows
    for i in [0, 17, 4242] {
        let mut e = vec![0.0; 7];
        for k in 0..6 {
            e[k + 1] = fit.coefficients[k][0] + fit.coefficients[k][1] * a[i];
        }
        let z: f64 = e.iter().map(|v| v.exp()).sum();
        for c in 0..7 {
            assert!((pred[(i, c)] - e[c].exp() / z).abs() <= 1e-12);
        }
    }
}

#[test]
fn intercept_only_matches_base_rate() {
    let n = 400;
    let y: Vec<usize> = (0..n).map(|i| usize::from(i % 4 == 0)).collect();
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n])]).unwrap();
    let fit = fit_multinomial(&x, &y, &vec![1.0; n], 2, 0, &MultinomialOptions::default()).unwrap();
    assert!((fit.coefficients[0][0] - (0.25f64 / 0.75).ln()).abs() <= 1e-6);
}

#[test]
fn doubling_weights_leaves_coefficients_unchanged() {
    let (x, y) = small_problem(41, 3000);
    let w: Vec<f64> = (0..3000).map(|i| 0.5 + (i % 7) as f64 / 7.0).collect();
    let w2: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
    let a = fit_multinomial(&x, &y, &w, 4, 0, &MultinomialOptions::default()).unwrap();
    let b = fit_multinomial(&x, &y, &w2, 4, 0, &MultinomialOptions::default()).unwrap();
    for (ra, rb) in a.coefficients.iter().zip(&b.coefficients) {
        for (u, v) in ra.iter().zip(rb) {
            assert!((u - v).abs() <= 1e-12);
        }
    }
}

#[test]
fn refits_are_bitwise_identical() {
    let (x, y) = small_problem(42, 5000);
    let w = vec![1.0; 5000];
    let a = fit_multinomial(&x, &y, &w, 4, 0, &MultinomialOptions::default()).unwrap();
    let b = fit_multinomial(&x, &y, &w, 4, 0, &MultinomialOptions::default()).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    // Logit gaps stay below ~36 so that 1 − p is representable in f64.
    #[test]
    fn predicted_rows_lie_on_the_simplex(c in proptest::collection::vec(-6.0f64..6.0, 6), v in -2.0f64..2.0) {
        let fit = gridiron_numerics::multinomial::MultinomialFit {
            n_classes: 4,
            reference: 2,
            columns: vec!["one".into(), "v".into()],
            coefficients: c.chunks(2).map(<[f64]>::to_vec).collect(),
            report: gridiron_numerics::multinomial::ConvergenceReport { iterations: 0, gradient_norm: 0.0, objective: 0.0 },
        };
        let p = fit.predict_row(&[1.0, v]);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|&q| q > 0.0 && q < 1.0));
    }

    #[test]
    fn single_factor_intercepts_shrink_toward_zero(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut y = Vec::new();
        let mut labels = Vec::new();
        for g in 0..8 {
            let u: f64 = rng.random_range(-1.0..1.0);
            let m = rng.random_range(2..20);
            for _ in 0..m {
                y.push(u + rng.random_range(-1.0..1.0));
                labels.push(format!("g{g}"));
            }
        }
        let n = y.len();
        let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n])]).unwrap();
        let groups = [GroupFactor::from_labels("g", &labels)];
        let fit = fit_varying_intercepts(&y, &x, &groups, &vec![1.0; n], &MixedOptions::default()).unwrap();
        let comp = fit.factor("g").unwrap();
        for (l, level) in comp.levels.iter().enumerate() {
            let rows: Vec<usize> = (0..n).filter(|&i| &labels[i] == level).collect();
            let raw = rows.iter().map(|&i| y[i] - fit.fixed[0]).sum::<f64>() / rows.len() as f64;
            let u = comp.intercepts[l];
            prop_assert!(u * raw >= -1e-12);
            prop_assert!(u.abs() <= raw.abs() + 1e-12);
        }
    }
}

#[test]
fn shrinkage_grows_with_member_count() {
    // members with the same raw offset and increasing counts
    let counts = [1usize, 3, 10, 50, 1000];
    let mut y = Vec::new();
    let mut labels = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for (g, &m) in counts.iter().enumerate() {
        let noise: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = noise.iter().sum::<f64>() / m as f64;
        for e in noise {
            y.push(0.8 + e - mean);
            labels.push(format!("m{g}"));
        }
    }
    // balancing members pulling the other way
    for g in 0..5 {
        for _ in 0..20 {
            y.push(-0.8 + rng.random_range(-1.0..1.0));
            labels.push(format!("b{g}"));
        }
    }
    let n = y.len();
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n])]).unwrap();
    let fit = fit_varying_intercepts(&y, &x, &[GroupFactor::from_labels("g", &labels)], &vec![1.0; n], &MixedOptions::default()).unwrap();
    let comp = fit.factor("g").unwrap();
    let u: Vec<f64> = (0..counts.len()).map(|g| comp.intercept(&format!("m{g}")).unwrap()).collect();
    // equal raw means relative to the fitted grand mean
    for w in u.windows(2) {
        assert!(w[0].abs() <= w[1].abs(), "{u:?}");
    }
    assert!(u[0].abs() < u[4].abs());
}

#[test]
fn identical_group_means_give_zero_intercepts() {
    let mut y = Vec::new();
    let mut labels = Vec::new();
    for g in 0..6 {
        for k in 0..10 {
            y.push([-1.0, 0.5, 0.5, 1.0, -0.5, -0.5, 0.25, -0.25, 2.0, -2.0][k]);
            labels.push(format!("g{g}"));
        }
    }
    let n = y.len();
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n])]).unwrap();
    let fit = fit_varying_intercepts(&y, &x, &[GroupFactor::from_labels("g", &labels)], &vec![1.0; n], &MixedOptions::default()).unwrap();
    let comp = fit.factor("g").unwrap();
    assert!(comp.variance.abs() < 1e-10);
    assert!(comp.intercepts.iter().all(|u| u.abs() < 1e-10));
}

#[test]
fn unobserved_members_get_zero() {
    let n = 40;
    let labels: Vec<String> = (0..n).map(|i| format!("g{}", i % 4)).collect();
    let mut g = GroupFactor::from_labels("g", &labels);
    g.levels.push("ghost".into());
    let y: Vec<f64> = (0..n).map(|i| (i % 4) as f64 + 0.1 * (i % 3) as f64).collect();
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n])]).unwrap();
    let fit = fit_varying_intercepts(&y, &x, &[g], &vec![1.0; n], &MixedOptions::default()).unwrap();
    let comp = fit.factor("g").unwrap();
    assert_eq!(comp.intercept("ghost"), Some(0.0));
    assert_eq!(comp.counts[4], 0);
}

#[test]
fn wls_exact_cases() {
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; 4]), ("x".into(), vec![1.0, 2.0, 3.0, 4.0])]).unwrap();
    let fit = fit_wls(&x, &[2.0, 4.0, 6.0, 8.0], &[1.0; 4]).unwrap();
    assert!(fit.coefficients[0].abs() < 1e-12 && (fit.coefficients[1] - 2.0).abs() < 1e-12);

    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; 3]), ("x".into(), vec![0.0, 1.0, 2.0])]).unwrap();
    let fit = fit_wls(&x, &[1.0, 2.0, 3.0], &[1.0; 3]).unwrap();
    assert!((fit.coefficients[0] - 1.0).abs() < 1e-12 && (fit.coefficients[1] - 1.0).abs() < 1e-12);

    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; 3]), ("two".into(), vec![2.0; 3])]).unwrap();
    assert!(fit_wls(&x, &[1.0, 2.0, 3.0], &[1.0; 3]).is_err());
}

fn max_curvature(s: &gridiron_numerics::spline::SplineSmoother<f64>) -> f64 {
    let (lo, hi) = (s.basis.lower(), s.basis.upper());
    let h = (hi - lo) / 200.0;
    (1..200)
        .map(|k| {
            let x = lo + k as f64 * h;
            ((s.value(x + h) - 2.0 * s.value(x) + s.value(x - h)) / (h * h)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn linear_truth_gives_a_nearly_straight_smooth() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let n = 4000;
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let y: Vec<f64> = xs.iter().map(|&x| f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-0.7 * x).exp())))).collect();
    let terms = vec![GamTerm::Smooth { name: "x".into(), values: xs, by: None }];
    let w = vec![1.0; n];
    let fit = fit_gam_logit(&terms, &y, &w, &GamOptions::default()).unwrap();
    let stiff = GamOptions { log10_lambda_min: 9.0, log10_lambda_max: 9.0, grid_points: 2, ..GamOptions::default() };
    let refit = fit_gam_logit(&terms, &y, &w, &stiff).unwrap();
    let c_fit = max_curvature(&fit.smooth("x", None).unwrap().smoother);
    let c_stiff = max_curvature(&refit.smooth("x", None).unwrap().smoother);
    assert!(c_fit <= 10.0 * c_stiff.max(1e-6), "{c_fit} vs {c_stiff}");
}

#[test]
fn curvature_falls_as_smoothing_rises() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let n = 3000;
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..6.0)).collect();
    let y: Vec<f64> = xs.iter().map(|&x| f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-2.0 * x.sin()).exp())))).collect();
    let terms = vec![GamTerm::Smooth { name: "x".into(), values: xs, by: None }];
    let w = vec![1.0; n];
    let mut last = f64::INFINITY;
    for l in [-2.0, 1.0, 4.0, 7.0] {
        let opts = GamOptions { log10_lambda_min: l, log10_lambda_max: l, grid_points: 2, ..GamOptions::default() };
        let fit = fit_gam_logit(&terms, &y, &w, &opts).unwrap();
        let c = max_curvature(&fit.smooth("x", None).unwrap().smoother);
        assert!(c <= last * (1.0 + 1e-9), "λ=1e{l}: {c} after {last}");
        last = c;
    }
    assert!(last < 1e-3);
}

#[test]
fn kick_success_decays_with_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let n = 6000;
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(18.0..62.0)).collect();
    let y: Vec<f64> = d.iter().map(|&k| f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (0.12 * (k - 48.0)).exp())))).collect();
    let terms = vec![GamTerm::Smooth { name: "distance".into(), values: d, by: None }];
    let fit = fit_gam_logit(&terms, &y, &vec![1.0; n], &GamOptions::default()).unwrap();
    let grid = GamTerm::Smooth { name: "distance".into(), values: vec![20.0, 50.0], by: None };
    let p = fit.predict(&[grid]).unwrap();
    assert!(p[0] > p[1], "{p:?}");
}

#[test]
fn single_class_response_is_rejected() {
    let terms = vec![GamTerm::Smooth { name: "x".into(), values: (0..50).map(f64::from).collect(), by: None }];
    assert!(GamDesign::build(&terms, &[1.0; 50], &[1.0; 50], &GamOptions::default()).is_err());
    assert!(GamDesign::build(&terms, &[0.5; 50], &[1.0; 50], &GamOptions::default()).is_err());
}
