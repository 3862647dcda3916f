use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use gridiron_cli::pipeline::{run, PipelineConfig, StageStatus, STAGES};
use gridiron_cli::spec::model_spec_hash;

const BIN: &str = env!("CARGO_BIN_EXE_gridiron");

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/league")
}

fn fixture_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(&fixture_dir().join("pipeline.toml")).unwrap();
    cfg.out = out.to_path_buf();
    cfg
}

/// Relative path and contents of every file below `dir`, sorted.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let f = fixture_dir();
    let text = format!(
        "pbp = {:?}\ngames = {:?}\nrosters = {:?}\ntrain_seasons = \"2016-2017\"\nwar_seasons = \"2016-2017\"\nout = {:?}\n{extra}\n",
        f.join("pbp.csv"),
        f.join("games.csv"),
        f.join("rosters.csv"),
        dir.join("out"),
    );
    let path = dir.join("pipeline.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn pipeline_reruns_from_cache_with_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixture_config(tmp.path());
    let start = Instant::now();
    let first = run(&cfg).unwrap();
    assert!(start.elapsed() < Duration::from_secs(60), "fixture run took {:?}", start.elapsed());
    assert_eq!(first.stages.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>(), STAGES);
    assert!(first.stages.iter().all(|(_, s)| *s == StageStatus::Done));
    let before = snapshot(tmp.path());

    let second = run(&cfg).unwrap();
    assert!(second.all_cached());
    assert_eq!(snapshot(tmp.path()), before);

    // A fresh directory reproduces every byte.
    let other = tempfile::tempdir().unwrap();
    run(&fixture_config(other.path())).unwrap();
    assert_eq!(snapshot(other.path()), before);
}

#[test]
fn changed_parameters_rerun_only_downstream_stages() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = fixture_config(tmp.path());
    cfg.n_sims = 3;
    run(&cfg).unwrap();
    cfg.n_sims = 4;
    let again = run(&cfg).unwrap();
    for (stage, status) in &again.stages {
        let rerun = matches!(stage.as_str(), "simulate" | "report");
        assert_eq!(*status == StageStatus::Done, rerun, "{stage}");
    }
    assert!(tmp.path().join("sims/2017_wpa/sim_0003.csv").exists());
}

#[test]
fn report_matches_golden_files() {
    let tmp = tempfile::tempdir().unwrap();
    run(&fixture_config(tmp.path())).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let got = snapshot(&tmp.path().join("report"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        for (name, bytes) in &got {
            std::fs::write(golden.join(name), bytes).unwrap();
        }
    }
    let want = snapshot(&golden);
    assert_eq!(got.iter().map(|f| &f.0).collect::<Vec<_>>(), want.iter().map(|f| &f.0).collect::<Vec<_>>());
    for ((name, a), (_, b)) in got.iter().zip(&want) {
        assert!(a == b, "{name} differs from the golden file");
    }
}

#[test]
fn zero_simulations_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "n_sims = 0");
    let out = Command::new(BIN).args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_sims"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn missing_season_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "n_sims = 2");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("war_seasons = \"2016-2017\"", "war_seasons = \"2018\"");
    std::fs::write(&cfg, text).unwrap();
    let out = Command::new(BIN).args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("ingest") && stderr.contains("2018"), "{stderr}");
    assert!(tmp.path().join("out/STALE").exists());
}

#[test]
fn failed_stage_halts_and_marks_outputs_stale() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), "n_sims = 2");
    let out = Command::new(BIN).args(["run", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // A games file without results makes the win-probability stage fail.
    let games = tmp.path().join("games.csv");
    let header = std::fs::read_to_string(fixture_dir().join("games.csv")).unwrap().lines().next().unwrap().to_string();
    std::fs::write(&games, format!("{header}\n")).unwrap();
    let text = std::fs::read_to_string(&cfg_path).unwrap().replace(
        &format!("{:?}", fixture_dir().join("games.csv")),
        &format!("{games:?}"),
    );
    std::fs::write(&cfg_path, text).unwrap();
    let out = Command::new(BIN).args(["run", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("stage"), "{stderr}");
    let stale = std::fs::read_to_string(tmp.path().join("out/STALE")).unwrap();
    let manifest = std::fs::read_to_string(tmp.path().join("out/manifest.json")).unwrap();
    assert!(!manifest.contains("\"report\""));
    assert!(stale.contains("stale"));
}

#[test]
fn report_without_simulations_omits_intervals() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = fixture_config(tmp.path());
    cfg.n_sims = 2;
    run(&cfg).unwrap();
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out_dir = tmp.path().join("plain");
    let out = Command::new(BIN)
        .current_dir(tmp.path())
        .args(["report", "--war", "war.csv", "--annotated", "annotated.csv", "--sims", "empty", "--out", "plain"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no simulation results"));
    let top = std::fs::read_to_string(out_dir.join("top_war.csv")).unwrap();
    assert!(!top.lines().next().unwrap().contains("q025"));
    assert!(!out_dir.join("autocorrelation.csv").exists());

    let with = std::fs::read_to_string(tmp.path().join("report/top_war.csv")).unwrap();
    assert!(with.lines().next().unwrap().contains("war_q025"));
}

#[test]
fn report_names_the_missing_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(BIN).current_dir(tmp.path()).args(["report"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("war.csv") && stderr.contains("gridiron war"), "{stderr}");
}

#[test]
fn version_carries_the_model_hash() {
    let out = Command::new(BIN).arg("--version").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(&model_spec_hash()[..16]));
    let out = Command::new(BIN).arg("--print-constants").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("name,value,description\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn bad_arguments_exit_with_validation_code() {
    let out = Command::new(BIN).args(["simulate", "--annotated", "a.csv", "--rosters", "r.csv", "--games", "g.csv", "--season", "2017", "--n", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(BIN).args(["fit-ep", "--plays", "p.csv", "--seasons", "2017-2016"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
