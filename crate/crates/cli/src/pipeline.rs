//! The full pipeline from a config file, with per-stage caching.
//!
//! Every stage has a key: the hash of its name, the program version, its
//! parameters and the contents of its inputs. The manifest in the output
//! directory records the key and the output hashes of each finished stage;
//! a stage whose key and outputs still match is skipped.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gridiron_core::value::Scale;
use gridiron_core::war::{QbRule, ReplacementRules};
use log::info;
use serde::{Deserialize, Serialize};

use crate::commands::{self, ReportInputs, ScaleChoice, WarOutputs};
use crate::error::{CliError, Result};
use crate::io::{file_hash, load_games, load_plays, read_json, text_hash, write_json};
use crate::seasons::SeasonSet;
use crate::spec::version_string;

pub const STAGES: [&str; 9] =
    ["ingest", "fit-ep", "fit-kick", "fit-wp", "annotate", "fit-credit", "war", "simulate", "report"];

/// Optional overrides of the built-in thresholds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub reject_threshold: Option<f64>,
    pub qb_share: Option<f64>,
    pub rushing_rb_per_team: Option<usize>,
    pub rushing_wrte_per_team: Option<usize>,
    pub receiving_rb_per_team: Option<usize>,
    pub receiving_wr_per_team: Option<usize>,
    pub receiving_te_per_team: Option<usize>,
    pub teams: Option<usize>,
}

fn default_n_sims() -> usize {
    1000
}

fn default_seed() -> u64 {
    42
}

fn default_top_n() -> usize {
    10
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Pipeline configuration. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub pbp: PathBuf,
    pub games: PathBuf,
    pub rosters: PathBuf,
    #[serde(default)]
    pub schema: Option<PathBuf>,
    pub train_seasons: SeasonSet,
    pub war_seasons: SeasonSet,
    #[serde(default = "default_qb_rule")]
    pub qb_rule: QbRule,
    #[serde(default = "default_scale")]
    pub scale: ScaleChoice,
    #[serde(default = "default_n_sims")]
    pub n_sims: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    #[serde(default)]
    pub compare_seasons: Option<(i32, i32)>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn default_qb_rule() -> QbRule {
    QbRule::TenPercent
}

fn default_scale() -> ScaleChoice {
    ScaleChoice::Both
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                CliError::Missing(format!("{} does not exist", path.display()))
            } else {
                CliError::io(path, e)
            }
        })?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.pbp);
        resolve(&mut cfg.games);
        resolve(&mut cfg.rosters);
        resolve(&mut cfg.out);
        if let Some(s) = cfg.schema.as_mut() {
            resolve(s);
        }
        Ok(cfg)
    }

    /// Checks that need no data.
    pub fn validate(&self) -> Result<()> {
        if self.n_sims == 0 {
            return Err(CliError::Invalid("n_sims must be at least 1".into()));
        }
        if self.top_n == 0 {
            return Err(CliError::Invalid("top_n must be at least 1".into()));
        }
        if let Some(t) = self.thresholds.reject_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::Invalid(format!("reject_threshold {t} outside [0, 1]")));
            }
        }
        if let Some(t) = self.thresholds.qb_share {
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::Invalid(format!("qb_share {t} outside [0, 1]")));
            }
        }
        if let Some((a, b)) = self.compare_seasons {
            for s in [a, b] {
                if !self.war_seasons.contains(s) {
                    return Err(CliError::Invalid(format!("compare season {s} is not among the WAR seasons {}", self.war_seasons)));
                }
            }
        }
        Ok(())
    }

    pub fn rules(&self) -> ReplacementRules {
        let d = ReplacementRules::default();
        let t = &self.thresholds;
        ReplacementRules {
            rushing_rb_per_team: t.rushing_rb_per_team.unwrap_or(d.rushing_rb_per_team),
            rushing_wrte_per_team: t.rushing_wrte_per_team.unwrap_or(d.rushing_wrte_per_team),
            receiving_rb_per_team: t.receiving_rb_per_team.unwrap_or(d.receiving_rb_per_team),
            receiving_wr_per_team: t.receiving_wr_per_team.unwrap_or(d.receiving_wr_per_team),
            receiving_te_per_team: t.receiving_te_per_team.unwrap_or(d.receiving_te_per_team),
            qb_rule: self.qb_rule,
            qb_share: t.qb_share.unwrap_or(d.qb_share),
            teams: t.teams.or(d.teams),
        }
    }

    /// The scale the report is drawn on.
    pub fn report_scale(&self) -> Scale {
        match self.scale {
            ScaleChoice::Epa => Scale::Epa,
            ScaleChoice::Wpa | ScaleChoice::Both => Scale::Wpa,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct StageRecord {
    key: String,
    outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Manifest {
    stages: BTreeMap<String, StageRecord>,
}

/// What happened to each stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Cached,
    Done,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub stages: Vec<(String, StageStatus)>,
}

impl RunSummary {
    pub fn all_cached(&self) -> bool {
        self.stages.iter().all(|(_, s)| *s == StageStatus::Cached)
    }
}

/// Hash of a file, or of every file below a directory.
fn path_hash(path: &Path) -> Result<String> {
    if path.is_dir() {
        let mut files = Vec::new();
        collect_files(path, &mut files)?;
        files.sort();
        let mut parts = Vec::new();
        for f in files {
            let rel = f.strip_prefix(path).unwrap_or(&f).to_string_lossy().into_owned();
            parts.push(format!("{rel}:{}", file_hash(&f)?));
        }
        Ok(text_hash(&parts.join("\n")))
    } else {
        file_hash(path)
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let p = entry.map_err(|e| CliError::io(dir, e))?.path();
        if p.is_dir() {
            collect_files(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

struct Stage<'a> {
    name: &'static str,
    params: String,
    inputs: Vec<&'a Path>,
    outputs: Vec<PathBuf>,
}

struct Runner {
    out: PathBuf,
    manifest: Manifest,
    summary: RunSummary,
}

impl Runner {
    fn manifest_path(&self) -> PathBuf {
        self.out.join("manifest.json")
    }

    fn stale_path(&self) -> PathBuf {
        self.out.join("STALE")
    }

    fn key(&self, stage: &Stage<'_>) -> Result<String> {
        let mut parts = vec![stage.name.to_string(), version_string(), stage.params.clone()];
        for p in &stage.inputs {
            parts.push(path_hash(p)?);
        }
        Ok(text_hash(&parts.join("\n")))
    }

    fn rel(&self, p: &Path) -> String {
        p.strip_prefix(&self.out).unwrap_or(p).to_string_lossy().into_owned()
    }

    fn is_current(&self, stage: &Stage<'_>, key: &str) -> bool {
        let Some(rec) = self.manifest.stages.get(stage.name) else {
            return false;
        };
        rec.key == key
            && stage.outputs.len() == rec.outputs.len()
            && stage.outputs.iter().all(|o| {
                o.exists() && rec.outputs.get(&self.rel(o)).is_some_and(|h| path_hash(o).is_ok_and(|x| &x == h))
            })
    }

    fn run(&mut self, stage: Stage<'_>, body: impl FnOnce() -> Result<()>) -> Result<()> {
        let key = self.key(&stage).map_err(|e| self.fail(stage.name, e))?;
        if self.is_current(&stage, &key) {
            println!("{:<11} cached", stage.name);
            self.summary.stages.push((stage.name.into(), StageStatus::Cached));
            return Ok(());
        }
        info!("running {}", stage.name);
        body().map_err(|e| self.fail(stage.name, e))?;
        let mut outputs = BTreeMap::new();
        for o in &stage.outputs {
            outputs.insert(self.rel(o), path_hash(o).map_err(|e| self.fail(stage.name, e))?);
        }
        self.manifest.stages.insert(stage.name.into(), StageRecord { key, outputs });
        write_json(&self.manifest_path(), &self.manifest)?;
        println!("{:<11} done", stage.name);
        self.summary.stages.push((stage.name.into(), StageStatus::Done));
        Ok(())
    }

    /// Drops the failed stage and everything after it from the manifest and
    /// marks the output directory stale.
    fn fail(&mut self, stage: &str, e: CliError) -> CliError {
        let from = STAGES.iter().position(|s| *s == stage).unwrap_or(0);
        for s in &STAGES[from..] {
            self.manifest.stages.remove(*s);
        }
        let _ = write_json(&self.manifest_path(), &self.manifest);
        let _ = std::fs::write(
            self.stale_path(),
            format!("stage {stage} failed; artifacts of {} and later stages are stale\n{e}\n", stage),
        );
        CliError::Stage { stage: stage.into(), source: Box::new(e) }
    }
}

/// Runs every stage, reusing cached results.
pub fn run(cfg: &PipelineConfig) -> Result<RunSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let manifest_path = cfg.out.join("manifest.json");
    let manifest = if manifest_path.exists() { read_json(&manifest_path).unwrap_or_default() } else { Manifest::default() };
    let mut r = Runner { out: cfg.out.clone(), manifest, summary: RunSummary { stages: Vec::new() } };

    let o = |name: &str| cfg.out.join(name);
    let (plays, rejects) = (o("plays.csv"), o("rejects.csv"));
    let (ep, kick, wp, wp_cal) = (o("ep_model.json"), o("kick_model.json"), o("wp_model.json"), o("wp_calibration.csv"));
    let annotated = o("annotated.csv");
    let effects = o("effects.csv");
    let (war, replacement) = (o("war.csv"), o("replacement.csv"));
    let sims = o("sims");
    let report_dir = o("report");
    let rules = cfg.rules();
    let rules_json = serde_json::to_string(&rules).map_err(gridiron_core::CoreError::from)?;

    let schema_path: Vec<&Path> = cfg.schema.iter().map(PathBuf::as_path).collect();
    let mut ingest_inputs = vec![cfg.pbp.as_path()];
    ingest_inputs.extend(schema_path);
    r.run(
        Stage {
            name: "ingest",
            params: format!("threshold={:?}", cfg.thresholds.reject_threshold),
            inputs: ingest_inputs,
            outputs: vec![plays.clone(), rejects.clone()],
        },
        || {
            commands::ingest(&cfg.pbp, cfg.schema.as_deref(), cfg.thresholds.reject_threshold, &plays, &rejects)?;
            check_data(cfg, &plays)
        },
    )?;

    let train = Some(&cfg.train_seasons);
    r.run(
        Stage { name: "fit-ep", params: format!("seasons={}", cfg.train_seasons), inputs: vec![&plays], outputs: vec![ep.clone()] },
        || commands::fit_ep(&plays, train, gridiron_core::constants::TOUCHDOWN_POINTS, &ep).map(|_| ()),
    )?;
    r.run(
        Stage { name: "fit-kick", params: format!("seasons={}", cfg.train_seasons), inputs: vec![&plays], outputs: vec![kick.clone()] },
        || commands::fit_kick(&plays, train, &kick).map(|_| ()),
    )?;
    r.run(
        Stage {
            name: "fit-wp",
            params: format!("seasons={}", cfg.train_seasons),
            inputs: vec![&plays, &cfg.games, &ep, &kick],
            outputs: vec![wp.clone(), wp_cal.clone()],
        },
        || commands::fit_wp(&plays, &cfg.games, &ep, &kick, train, &wp, Some(&wp_cal), false).map(|_| ()),
    )?;
    r.run(
        Stage {
            name: "annotate",
            params: format!("seasons={}", cfg.war_seasons),
            inputs: vec![&plays, &cfg.games, &ep, &kick, &wp],
            outputs: vec![annotated.clone()],
        },
        || commands::annotate(&plays, &cfg.games, &ep, &kick, &wp, Some(&cfg.war_seasons), &annotated).map(|_| ()),
    )?;
    let war_params = format!("seasons={};scale={:?};rules={rules_json}", cfg.war_seasons, cfg.scale);
    r.run(
        Stage { name: "fit-credit", params: war_params.clone(), inputs: vec![&annotated, &cfg.rosters], outputs: vec![effects.clone()] },
        || commands::fit_credit_cmd(&annotated, &cfg.rosters, &cfg.war_seasons, cfg.scale, &rules, &effects).map(|_| ()),
    )?;
    r.run(
        Stage {
            name: "war",
            params: war_params.clone(),
            inputs: vec![&annotated, &cfg.rosters, &cfg.games],
            outputs: vec![war.clone(), replacement.clone()],
        },
        || {
            let out = WarOutputs { war: &war, effects: None, replacement: Some(&replacement) };
            commands::war(&annotated, &cfg.rosters, &cfg.games, &cfg.war_seasons, cfg.scale, &rules, out).map(|_| ())
        },
    )?;
    r.run(
        Stage {
            name: "simulate",
            params: format!("{war_params};n={};seed={}", cfg.n_sims, cfg.seed),
            inputs: vec![&annotated, &cfg.rosters, &cfg.games],
            outputs: vec![sims.clone()],
        },
        || {
            if sims.exists() {
                std::fs::remove_dir_all(&sims).map_err(|e| CliError::io(&sims, e))?;
            }
            for &season in cfg.war_seasons.seasons() {
                for scale in cfg.scale.scales() {
                    let dir = sims.join(format!("{season}_{}", scale.label()));
                    commands::simulate(&annotated, &cfg.rosters, &cfg.games, season, scale, &rules, cfg.n_sims, cfg.seed, true, &dir)?;
                }
            }
            Ok(())
        },
    )?;
    r.run(
        Stage {
            name: "report",
            params: format!("scale={};compare={:?};top={}", cfg.report_scale().label(), cfg.compare_seasons, cfg.top_n),
            inputs: vec![&war, &annotated, &effects, &sims],
            outputs: vec![report_dir.clone()],
        },
        || {
            if report_dir.exists() {
                std::fs::remove_dir_all(&report_dir).map_err(|e| CliError::io(&report_dir, e))?;
            }
            let inputs = ReportInputs { war: &war, annotated: &annotated, effects: Some(&effects), sims: Some(&sims) };
            commands::report(inputs, cfg.report_scale(), cfg.compare_seasons, cfg.top_n, &report_dir).map(|_| ())
        },
    )?;

    let stale = r.stale_path();
    if stale.exists() {
        std::fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
    }
    if r.summary.all_cached() {
        println!("all cached");
    }
    Ok(r.summary)
}

/// Seasons named in the config must be present in the ingested data and
/// the games file.
fn check_data(cfg: &PipelineConfig, plays: &Path) -> Result<()> {
    let plays = load_plays(plays)?;
    commands::check_seasons(&plays, &cfg.train_seasons)?;
    commands::check_seasons(&plays, &cfg.war_seasons)?;
    let have = commands::game_seasons(&load_games(&cfg.games)?);
    let missing = cfg.war_seasons.missing_from(&have);
    if !missing.is_empty() {
        return Err(CliError::Invalid(format!("seasons {missing:?} have no results in {}", cfg.games.display())));
    }
    Ok(())
}
