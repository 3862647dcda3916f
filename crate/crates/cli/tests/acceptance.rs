//! Acceptance suite. Prints one line per criterion and fails if any of
//! criteria 1 to 6 fails. Criterion 7 needs the public play-by-play files:
//! set GRIDIRON_REAL_DATA to a directory holding pbp.csv (raw export for
//! 2009-2017), games.csv and rosters.csv in the formats the CLI reads.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use gridiron_cli::io::{load_annotated, load_games, load_plays, load_rosters, read_json};
use gridiron_cli::pipeline::{run, PipelineConfig};
use gridiron_core::ep::{encode_ep_features, field_goal_ep, fit_ep, fit_kick_model, is_kick_attempt, loso_cv, training_set, EpOptions, KickModel};
use gridiron_core::pbp::{compute_weights, label_next_score, LabeledPlay, PlayType, ScoringEvent};
use gridiron_core::report::{autocorrelation, conventional_stats, SeasonTable};
use gridiron_core::state::State;
use gridiron_core::synth::{reference_ep_coefficients, simulate_credit, state_play, synthetic_ep_plays, true_ep_probabilities};
use gridiron_core::value::{AnnotatedPlay, Scale};
use gridiron_core::war::{
    compute_war, designate_replacement, fit_wins_conversion, ipaa, ipar, share_ahead, simulate, war_distributions,
    PlayerRecord, QbRule, ReplacementRules, Resampler, Triple, WarOptions,
};
use gridiron_numerics::design::DesignMatrix;
use gridiron_numerics::gam::{FactorCodes, GamDesign, GamOptions, GamTerm};
use gridiron_numerics::mixed::{fit_varying_intercepts, GroupFactor, MixedOptions, RemlProfile};
use gridiron_numerics::multinomial::{fit_multinomial, MultinomialOptions, MultinomialProblem};
use gridiron_numerics::wls::fit_wls;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const BIN: &str = env!("CARGO_BIN_EXE_gridiron");

/// Pipeline outputs on the bundled fixture league, produced once.
fn fixture() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let tmp = tempfile::tempdir().unwrap();
        let fx = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/league");
        let mut cfg = PipelineConfig::load(&fx.join("pipeline.toml")).unwrap();
        cfg.out = tmp.path().to_path_buf();
        cfg.n_sims = 2;
        run(&cfg).unwrap();
        tmp
    })
    .path()
}

fn fixture_input(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/league").join(name)
}

fn central<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], j: usize) -> f64 {
    let h = 1e-5 * x[j].abs().max(1.0);
    let (mut a, mut b) = (x.to_vec(), x.to_vec());
    a[j] += h;
    b[j] -= h;
    (f(&a) - f(&b)) / (2.0 * h)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

/// Gaussian elimination with partial pivoting on an augmented system.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let p = b.len();
    for c in 0..p {
        let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in 0..p {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..p {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    (0..p).map(|j| b[j] / a[j][j]).collect()
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);

    // Weighted least squares against the normal equations.
    let n = 400;
    let u: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
    let y: Vec<f64> = (0..n).map(|i| 0.5 - 1.5 * u[i] + 0.2 * v[i] + rng.random_range(-1.0..1.0)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
    let cols = [vec![1.0; n], u.clone(), v.clone()];
    let x = DesignMatrix::from_columns(vec![("one".into(), cols[0].clone()), ("u".into(), u), ("v".into(), v)]).unwrap();
    let fit = fit_wls(&x, &y, &w).map_err(|e| e.to_string())?;
    let a: Vec<Vec<f64>> =
        (0..3).map(|j| (0..3).map(|k| (0..n).map(|i| w[i] * cols[j][i] * cols[k][i]).sum()).collect()).collect();
    let b: Vec<f64> = (0..3).map(|j| (0..n).map(|i| w[i] * cols[j][i] * y[i]).sum()).collect();
    let oracle = solve(a, b);
    let wls_err = oracle.iter().zip(&fit.coefficients).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure!(wls_err <= 1e-10, "WLS differs from the normal equations by {wls_err:e}");

    // One-way BLUPs against the balanced closed form.
    let sim = simulate_credit(15, 8, 0.8, 1.0, 7);
    let (groups, per) = (15, 8);
    let y = &sim.response;
    let n = y.len();
    let mu = y.iter().sum::<f64>() / n as f64;
    let means: Vec<f64> = (0..groups).map(|g| y[g * per..(g + 1) * per].iter().sum::<f64>() / per as f64).collect();
    let msb = means.iter().map(|m| per as f64 * (m - mu).powi(2)).sum::<f64>() / (groups - 1) as f64;
    let msw = (0..n).map(|i| (y[i] - means[i / per]).powi(2)).sum::<f64>() / (n - groups) as f64;
    ensure!(msb > msw, "draw sits on the variance boundary");
    let s2a = (msb - msw) / per as f64;
    let k = per as f64 * s2a / (msw + per as f64 * s2a);
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n])]).unwrap();
    let fit = fit_varying_intercepts(y, &x, &[GroupFactor::from_labels("m", &sim.labels)], &vec![1.0; n], &MixedOptions::default())
        .map_err(|e| e.to_string())?;
    let comp = fit.factor("m").unwrap();
    let blup_err = (0..groups)
        .map(|g| (comp.intercept(&sim.truth[g].0).unwrap() - k * (means[g] - mu)).abs())
        .fold(0.0, f64::max);
    ensure!(blup_err <= 1e-6, "BLUPs differ from closed-form shrinkage by {blup_err:e}");

    // Intercept-only multinomial against log base-rate ratios: default
    // options on moderate rates, and without the ridge on rare classes.
    let mut mult_err: f64 = 0.0;
    for (counts, ridge) in [([60usize, 35, 50, 120, 45, 30, 100], 1e-8), ([30, 5, 12, 200, 41, 9, 103], 0.0)] {
        let y: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &m)| std::iter::repeat_n(c, m)).collect();
        let n = y.len();
        let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n])]).unwrap();
        let opts = MultinomialOptions { ridge, ..MultinomialOptions::default() };
        let fit = fit_multinomial(&x, &y, &vec![1.0; n], 7, 6, &opts).map_err(|e| e.to_string())?;
        for c in 0..6 {
            mult_err = mult_err.max((fit.coefficients[c][0] - (counts[c] as f64 / counts[6] as f64).ln()).abs());
        }
    }
    ensure!(mult_err <= 1e-6, "intercepts differ from log base-rate ratios by {mult_err:e}");

    // Analytic gradients of the three likelihoods at 10 random points each.
    let mut grad_err: f64 = 0.0;
    let n = 300;
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n]), ("a".into(), a)]).unwrap();
    let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..7)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let prob = MultinomialProblem::new(&x, &y, &w, 7, 6, 1e-3).map_err(|e| e.to_string())?;
    for _ in 0..10 {
        let beta: Vec<f64> = (0..prob.n_parameters()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = prob.gradient(&beta);
        for j in 0..beta.len() {
            grad_err = grad_err.max(rel_err(g[j], central(|b| prob.objective(b), &beta, j)));
        }
    }
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let yb: Vec<f64> = xs.iter().map(|&x| f64::from(rng.random::<f64>() < 1.0 / (1.0 + (-x).exp()))).collect();
    let terms = vec![
        GamTerm::Linear { name: "lin".into(), values: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() },
        GamTerm::Smooth {
            name: "sx".into(),
            values: xs,
            by: Some(FactorCodes { name: "h".into(), levels: vec!["1".into(), "2".into()], codes: (0..n).map(|i| i % 2).collect() }),
        },
    ];
    let mut design = GamDesign::build(&terms, &yb, &vec![1.0; n], &GamOptions::default()).map_err(|e| e.to_string())?;
    for _ in 0..10 {
        let l: Vec<f64> = (0..design.n_smooths()).map(|_| 10f64.powf(rng.random_range(-2.0..2.0))).collect();
        design.set_lambdas(&l);
        let beta: Vec<f64> = (0..design.n_parameters()).map(|_| rng.random_range(-0.5..0.5)).collect();
        let g = design.penalized_nll_gradient(&beta);
        for j in 0..beta.len() {
            grad_err = grad_err.max(rel_err(g[j], central(|b| design.penalized_nll(b), &beta, j)));
        }
    }
    let ga: Vec<String> = (0..n).map(|_| format!("a{}", rng.random_range(0..12))).collect();
    let gb: Vec<String> = (0..n).map(|_| format!("b{}", rng.random_range(0..7))).collect();
    let yr: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n])]).unwrap();
    let factors = [GroupFactor::from_labels("a", &ga), GroupFactor::from_labels("b", &gb)];
    let prof = RemlProfile::new(&yr, &x, &factors, &vec![1.0; n]).map_err(|e| e.to_string())?;
    for _ in 0..10 {
        let theta: Vec<f64> = (0..2).map(|_| rng.random_range(0.05..3.0)).collect();
        let g = prof.gradient(&theta).map_err(|e| e.to_string())?;
        for j in 0..2 {
            grad_err = grad_err.max(rel_err(g[j], central(|t| prof.criterion(t).unwrap(), &theta, j)));
        }
    }
    ensure!(grad_err <= 1e-5, "gradient relative error {grad_err:e}");
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.1} s");
    Ok(format!(
        "WLS {wls_err:.1e}, BLUP {blup_err:.1e}, multinomial {mult_err:.1e}, gradient {grad_err:.1e}, {secs:.1} s"
    ))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let beta = reference_ep_coefficients();
    let seasons: Vec<i32> = (2009..=2016).collect();
    let plays = synthetic_ep_plays(50_000, &seasons, &beta, 2024);
    let model = fit_ep(&plays, &EpOptions::default()).map_err(|e| e.to_string())?;
    let mut total = 0.0;
    for l in &plays {
        let f = encode_ep_features(&l.play).ok_or("synthetic play without EP features")?;
        let (p, q) = (model.probabilities(&f), true_ep_probabilities(&beta, &f));
        total += p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 7.0;
    }
    let mean = total / plays.len() as f64;
    ensure!(mean <= 0.01, "mean |Δp| = {mean:.4}");
    let cal = loso_cv(&plays, &EpOptions::default()).map_err(|e| e.to_string())?;
    ensure!(cal.overall <= 0.02, "held-out calibration error {:.4}", cal.overall);
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 120.0, "took {secs:.0} s");
    Ok(format!("mean |Δp| {mean:.4}, held-out calibration error {:.4}, {secs:.0} s", cal.overall))
}

fn criterion_3() -> Check {
    // Two-point conversion value.
    let mut kick: KickModel = read_json(&fixture().join("kick_model.json")).map_err(|e| e.to_string())?;
    kick.two_point_rate = 0.4735;
    ensure!(kick.two_point_ep() == 0.9470, "two-point EP {}", kick.two_point_ep());

    // Field-goal value at certain make and certain miss.
    for miss in [-2.5, 0.0, 0.8, 3.1] {
        ensure!(field_goal_ep(1.0, miss) == 3.0, "make: {}", field_goal_ep(1.0, miss));
        ensure!(field_goal_ep(0.0, miss) == -miss, "miss: {}", field_goal_ep(0.0, miss));
    }

    // iPAA and iPAR by hand: κ_pass = 120, κ_rush = 30.
    let ipa = Triple { air: 0.02, yac: 0.01, rush: -0.005 };
    let repl = Triple { air: -0.01, yac: 0.0, rush: -0.02 };
    let a = ipaa(120.0, 30.0, &ipa);
    let r = ipar(120.0, 30.0, &ipa, &repl);
    let close = |x: f64, y: f64| (x - y).abs() < 1e-12;
    ensure!(close(a.air, 2.4) && close(a.yac, 1.2) && close(a.rush, -0.15), "iPAA {a:?}");
    ensure!(close(r.air, 3.6) && close(r.yac, 1.2) && close(r.rush, 0.45) && close(r.total(), 5.25), "iPAR {r:?}");
    let records: Vec<PlayerRecord> = gridiron_cli::io::read_csv(&fixture().join("war.csv")).map_err(|e| e.to_string())?;
    for p in &records {
        let (kp, kr) = (p.kappa_pass as f64, p.kappa_rush as f64);
        let ok = close(p.ipaa_air, kp * p.ipa_air)
            && close(p.ipaa_yac, kp * p.ipa_yac)
            && close(p.ipaa_rush, kr * p.ipa_rush)
            && close(p.ipar_total, p.ipar_air + p.ipar_yac + p.ipar_rush);
        ensure!(ok, "identities fail for {} ({})", p.player_id, p.scale);
    }

    // Combined weights on a three-play toy set.
    let s = State {
        down: 1,
        yards_to_go: 10,
        yardline: 60,
        seconds_half: 900.0,
        seconds_game: 2700.0,
        half: gridiron_core::pbp::Half::First,
        score_differential: 0,
        timeouts_off: 3,
        timeouts_def: 3,
    };
    let mut toy: Vec<LabeledPlay> = [(0, 0), (7, 1), (14, 2)]
        .iter()
        .enumerate()
        .map(|(i, &(diff, gap))| {
            let mut play = state_play(&s, 2017, "toy".into(), i as u64);
            play.score_differential = diff;
            LabeledPlay { play, next_score: ScoringEvent::NoScore, drive_gap: gap, weight: f64::NAN }
        })
        .collect();
    compute_weights(&mut toy);
    let w: Vec<f64> = toy.iter().map(|l| l.weight).collect();
    ensure!(w == [1.0, 0.5, 0.0], "toy weights {w:?}");
    Ok(format!("two-point EP {:.4}, field-goal bounds, {} player identities, weights {w:?}", kick.two_point_ep(), records.len()))
}

fn check_decomposition(plays: &[AnnotatedPlay]) -> Result<usize, String> {
    let mut n = 0;
    for a in plays.iter().filter(|a| a.play.play_type == PlayType::Pass && a.play.complete_pass) {
        let v = &a.value;
        let (Some(ea), Some(ey), Some(wa), Some(wy)) = (v.epa_air, v.epa_yac, v.wpa_air, v.wpa_yac) else {
            return Err(format!("completed pass {} {} has no air/yac split", a.play.game_id, a.play.play_id));
        };
        let (de, dw) = ((ea + ey - v.epa).abs(), (wa + wy - v.wpa).abs());
        ensure!(de <= 1e-9 && dw <= 1e-9, "play {} {}: gaps {de:e} {dw:e}", a.play.game_id, a.play.play_id);
        n += 1;
    }
    ensure!(n > 0, "no completed passes");
    Ok(n)
}

fn criterion_4() -> Check {
    let plays = load_annotated(&fixture().join("annotated.csv")).map_err(|e| e.to_string())?;
    let n = check_decomposition(&plays)?;
    Ok(format!("{n} completed passes split exactly"))
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let ranks = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (k, &i) in idx.iter().enumerate() {
            r[i] = k as f64;
        }
        r
    };
    let (ra, rb) = (ranks(a), ranks(b));
    gridiron_core::report::pearson(&ra, &rb).unwrap_or(f64::NAN)
}

fn criterion_5() -> Check {
    let (members, each) = (50, 200);
    let sim = simulate_credit(members, each, 0.3, 1.0, 5);
    let n = sim.response.len();
    let x = DesignMatrix::from_columns(vec![("one".into(), vec![1.0; n])]).unwrap();
    let fit = fit_varying_intercepts(
        &sim.response,
        &x,
        &[GroupFactor::from_labels("member", &sim.labels)],
        &vec![1.0; n],
        &MixedOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let comp = fit.factor("member").unwrap();
    let truth: Vec<f64> = sim.truth.iter().map(|t| t.1).collect();
    let est: Vec<f64> = sim.truth.iter().map(|t| comp.intercept(&t.0).unwrap()).collect();
    let rho = spearman(&truth, &est);
    ensure!(rho >= 0.9, "rank correlation {rho:.3}");

    // Equal play counts: every estimate is the same fraction of its raw
    // deviation, so the ordering of raw means is kept and every estimate
    // sits strictly closer to zero.
    let raw: Vec<f64> =
        (0..members).map(|m| sim.response[m * each..(m + 1) * each].iter().sum::<f64>() / each as f64 - fit.fixed[0]).collect();
    for i in 0..members {
        ensure!(est[i].abs() < raw[i].abs(), "member {i} is not shrunk: {} vs {}", est[i], raw[i]);
        for j in 0..members {
            ensure!((raw[i] < raw[j]) == (est[i] < est[j]), "members {i} and {j} swap order");
        }
    }
    Ok(format!("rank correlation {rho:.3}, shrinkage ordering exact for {members} members"))
}

fn simulate_cli(out: &Path, extra: &[&str]) -> Result<(), String> {
    let f = fixture();
    let status = Command::new(BIN)
        .args(["simulate", "--annotated"])
        .arg(f.join("annotated.csv"))
        .arg("--rosters")
        .arg(fixture_input("rosters.csv"))
        .arg("--games")
        .arg(fixture_input("games.csv"))
        .args(["--season", "2017", "--n", "50", "--seed", "42", "--out"])
        .arg(out)
        .args(extra)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(status.status.success(), "simulate failed: {}", String::from_utf8_lossy(&status.stderr));
    Ok(())
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect()
}

fn criterion_6() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("serial"));
    simulate_cli(&a, &[])?;
    simulate_cli(&b, &[])?;
    simulate_cli(&c, &["--serial"])?;
    let (da, db, dc) = (dir_bytes(&a), dir_bytes(&b), dir_bytes(&c));
    ensure!(da.len() == 51, "{} files written", da.len());
    ensure!(da == db, "two runs differ");
    ensure!(da == dc, "serial and parallel runs differ");

    let all = load_annotated(&fixture().join("annotated.csv")).map_err(|e| e.to_string())?;
    let plays: Vec<AnnotatedPlay> = all.into_iter().filter(|p| p.play.season == 2017).collect();
    let rosters = load_rosters(&fixture_input("rosters.csv")).map_err(|e| e.to_string())?;
    let games = load_games(&fixture_input("games.csv")).map_err(|e| e.to_string())?;
    let raw: Vec<_> = plays.iter().map(|a| a.play.clone()).collect();
    let d = designate_replacement(&raw, &rosters, &ReplacementRules::default());
    let conv = fit_wins_conversion(&games, 2017).map_err(|e| e.to_string())?;
    for scale in [Scale::Epa, Scale::Wpa] {
        let base = compute_war(&plays, &rosters, &d.map, &conv, scale, &WarOptions::default()).map_err(|e| e.to_string())?;
        let sims = simulate(&plays, &rosters, &d.map, &conv, scale, 3, 42, Resampler::Identity, true).map_err(|e| e.to_string())?;
        for s in &sims {
            ensure!(s.players == base.players, "identity resample {} differs on {}", s.index, scale.label());
        }
    }
    Ok("50 simulations byte-identical across runs and serial/parallel; identity resample exact".into())
}

fn real_data_dir() -> Option<PathBuf> {
    let dir = PathBuf::from(std::env::var_os("GRIDIRON_REAL_DATA")?);
    ["pbp.csv", "games.csv", "rosters.csv"].iter().all(|f| dir.join(f).exists()).then_some(dir)
}

fn criterion_7(dir: &Path) -> Check {
    let mut failures = Vec::new();
    let plays = load_plays(&dir.join("pbp.csv")).map_err(|e| e.to_string())?;
    let games = load_games(&dir.join("games.csv")).map_err(|e| e.to_string())?;
    let rosters = load_rosters(&dir.join("rosters.csv")).map_err(|e| e.to_string())?;

    let labeled = label_next_score(&plays).map_err(|e| e.to_string())?.labeled;
    let train_labeled: Vec<LabeledPlay> = labeled.into_iter().filter(|l| (2009..=2016).contains(&l.play.season)).collect();
    let train = training_set(&train_labeled);
    if train.len() != 304_896 {
        failures.push(format!("(a) training set {}", train.len()));
    }
    let train_plays: Vec<_> = plays.iter().filter(|p| (2009..=2016).contains(&p.season)).cloned().collect();
    let kicks = train_plays.iter().filter(|p| is_kick_attempt(p)).count();
    if kicks != 16_906 {
        failures.push(format!("(b) kick attempts {kicks}"));
    }
    let cal = loso_cv(&train_labeled, &EpOptions::default()).map_err(|e| e.to_string())?;
    if !(0.008..=0.020).contains(&cal.overall) {
        failures.push(format!("(c) calibration {:.4}", cal.overall));
    }

    let ep = fit_ep(&train, &EpOptions::default()).map_err(|e| e.to_string())?;
    let kick = fit_kick_model(&train_plays, &GamOptions::default()).map_err(|e| e.to_string())?;
    let eps = gridiron_core::value::pre_snap_ep(&train_plays, &ep, &kick).map_err(|e| e.to_string())?;
    let (rows, _) = gridiron_core::wp::wp_rows(&train_plays, &eps, &games);
    let wp = gridiron_core::wp::fit_wp(&rows, &GamOptions::default()).map_err(|e| e.to_string())?;
    let models = gridiron_core::value::Models { ep: &ep, kick: &kick, wp: &wp };
    let season_plays = |s: i32| plays.iter().filter(|p| p.season == s).cloned().collect::<Vec<_>>();
    let annotate = |s: i32| gridiron_core::value::annotate_values(&season_plays(s), &models, &games).map(|a| a.plays);
    let (a16, a17) = (annotate(2016).map_err(|e| e.to_string())?, annotate(2017).map_err(|e| e.to_string())?);
    check_decomposition(&a17)?;

    let rules = ReplacementRules { qb_rule: QbRule::TenPercent, ..ReplacementRules::default() };
    let d17 = designate_replacement(&season_plays(2017), &rosters, &rules);
    let want = [("rushing RB", 52, 148), ("receiving WR", 73, 201), ("receiving TE", 45, 109)];
    for (g, r, t) in want {
        if !d17.summary.iter().any(|(h, x, y)| h == g && *x == r && *y == t) {
            failures.push(format!("(d) {g}: {:?}", d17.summary.iter().find(|(h, ..)| h == g)));
        }
    }
    for (rule, count) in [(QbRule::TenPercent, 25), (QbRule::OnePerTeam, 39)] {
        let d = designate_replacement(&season_plays(2017), &rosters, &ReplacementRules { qb_rule: rule, ..rules.clone() });
        if !d.summary.iter().any(|(h, x, _)| h == "QB" && *x == count) {
            failures.push(format!("(d) QB {rule:?}: {:?}", d.summary.iter().find(|(h, ..)| h == "QB")));
        }
    }

    let war_for = |season: i32, plays: &[AnnotatedPlay]| -> Result<_, String> {
        let raw: Vec<_> = plays.iter().map(|a| a.play.clone()).collect();
        let d = designate_replacement(&raw, &rosters, &rules);
        let conv = fit_wins_conversion(&games, season).map_err(|e| e.to_string())?;
        let r = compute_war(plays, &rosters, &d.map, &conv, Scale::Wpa, &WarOptions::default()).map_err(|e| e.to_string())?;
        Ok((r.players, d.map, conv))
    };
    let (p16, _, _) = war_for(2016, &a16)?;
    let (p17, map17, conv17) = war_for(2017, &a17)?;
    let (s16, s17) = (conventional_stats(&a16), conventional_stats(&a17));
    let ta = SeasonTable { season: 2016, players: &p16, stats: &s16 };
    let tb = SeasonTable { season: 2017, players: &p17, stats: &s17 };
    for (pos, want) in [("QB", 0.598), ("RB", 0.431)] {
        let rows = autocorrelation(&ta, &tb, pos).map_err(|e| e.to_string())?;
        let got = rows.iter().find(|r| r.statistic == "WAR").and_then(|r| r.correlation);
        if !got.is_some_and(|c| (c - want).abs() <= 0.05) {
            failures.push(format!("(e) {pos} WAR autocorrelation {got:?}"));
        }
    }

    let id = |name: &str| rosters.entries().iter().find(|e| e.season == 2017 && e.name.contains(name)).map(|e| e.player_id.clone());
    match (id("Kamara"), id("Hunt")) {
        (Some(k), Some(h)) => {
            let sims = simulate(&a17, &rosters, &map17, &conv17, Scale::Wpa, 1000, 42, Resampler::Drives, true)
                .map_err(|e| e.to_string())?;
            let dists = war_distributions(&sims, &p17);
            let share = share_ahead(&dists, &k, &h);
            if !share.is_some_and(|s| (s - 0.71).abs() <= 0.10) {
                failures.push(format!("(f) P(Kamara > Hunt) {share:?}"));
            }
        }
        _ => failures.push("(f) Kamara or Hunt missing from rosters".into()),
    }
    if failures.is_empty() {
        Ok("all six real-data checks hold".into())
    } else {
        Err(failures.join("; "))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Check); 6] = [
        ("numerics oracles", criterion_1),
        ("synthetic EP recovery", criterion_2),
        ("formula regressions", criterion_3),
        ("air/yac decomposition", criterion_4),
        ("credit-model recovery", criterion_5),
        ("resampling determinism", criterion_6),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} ({name}): PASS  {detail}", i + 1),
            Err(why) => {
                println!("criterion {} ({name}): FAIL  {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    match real_data_dir() {
        Some(dir) => match criterion_7(&dir) {
            Ok(detail) => println!("criterion 7 (real data): PASS  {detail}"),
            Err(why) => println!("criterion 7 (real data): FAIL  {why}"),
        },
        None => println!("criterion 7 (real data): SKIPPED  set GRIDIRON_REAL_DATA to a directory with pbp.csv, games.csv and rosters.csv"),
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
