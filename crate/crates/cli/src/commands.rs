//! One function per subcommand. Each reads its inputs from disk and writes
//! its artifacts, so stages can be run alone or chained by the pipeline.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use gridiron_core::calibration::CalibrationReport;
use gridiron_core::credit::{build_credit_datasets, fit_credit, member_effects, MemberEffect};
use gridiron_core::ep::{fit_ep as fit_ep_model, fit_kick_model, in_sample_calibration, loso_cv, training_set, EpModel, EpOptions, KickModel};
use gridiron_core::league::{write_games, write_rosters, Games};
use gridiron_core::pbp::{label_next_score, parse_plays, write_plays, write_rejects, LabeledPlay, Play, SchemaConfig};
use gridiron_core::report::{
    autocorrelation, conventional_stats, ipa_scatter, line_summary, top_by_position, wp_chart as chart, SeasonTable,
};
use gridiron_core::synth::{generate_league, SynthConfig};
use gridiron_core::value::{annotate_values, pre_snap_ep, write_annotated, AnnotatedPlay, Models, Scale};
use gridiron_core::war::{
    compute_war, designate_replacement, fit_wins_conversion, simulate as run_sims, war_distributions, PlayerRecord,
    PlayerSeasonValue, QbRule, ReplacementRules, Resampler, WarDistribution, WarOptions,
};
use gridiron_core::wp::{fit_wp as fit_wp_model, loso_wp, wp_calibration_by_quarter, wp_rows, WpModel};
use gridiron_numerics::{GamOptions, MixedOptions};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::{
    create, load_annotated, load_games, load_plays, load_rosters, open, read_csv, read_json, write_csv, write_json,
};
use crate::seasons::SeasonSet;

/// Which value scale(s) to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleChoice {
    Epa,
    Wpa,
    Both,
}

impl ScaleChoice {
    pub fn scales(self) -> Vec<Scale> {
        match self {
            ScaleChoice::Epa => vec![Scale::Epa],
            ScaleChoice::Wpa => vec![Scale::Wpa],
            ScaleChoice::Both => vec![Scale::Epa, Scale::Wpa],
        }
    }
}

impl std::str::FromStr for ScaleChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "epa" => Ok(ScaleChoice::Epa),
            "wpa" => Ok(ScaleChoice::Wpa),
            "both" => Ok(ScaleChoice::Both),
            _ => Err(format!("unknown scale `{s}` (epa, wpa or both)")),
        }
    }
}

fn log_diagnostics(what: &str, diagnostics: &[String]) {
    for d in diagnostics.iter().take(20) {
        warn!("{what}: {d}");
    }
    if diagnostics.len() > 20 {
        warn!("{what}: {} more diagnostics", diagnostics.len() - 20);
    }
}

fn seasons_of(plays: &[Play]) -> Vec<i32> {
    plays.iter().map(|p| p.season).collect::<BTreeSet<_>>().into_iter().collect()
}

/// Fails when a requested season is absent from the data.
pub fn check_seasons(plays: &[Play], wanted: &SeasonSet) -> Result<()> {
    let have = seasons_of(plays);
    let missing = wanted.missing_from(&have);
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "seasons {missing:?} are not in the data (available: {})",
            SeasonSet::new(have)
        )))
    }
}

fn in_seasons(plays: &[Play], seasons: Option<&SeasonSet>) -> Vec<Play> {
    plays.iter().filter(|p| seasons.is_none_or(|s| s.contains(p.season))).cloned().collect()
}

// ---------------------------------------------------------------------------

pub struct IngestSummary {
    pub rows: usize,
    pub plays: usize,
    pub rejects: usize,
    pub skipped: usize,
}

pub fn ingest(input: &Path, schema: Option<&Path>, threshold: Option<f64>, out: &Path, rejects: &Path) -> Result<IngestSummary> {
    let mut cfg = match schema {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            SchemaConfig::from_toml(&text)?
        }
        None => SchemaConfig::default(),
    };
    if let Some(t) = threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::Invalid(format!("reject threshold {t} outside [0, 1]")));
        }
        cfg.reject_threshold = t;
    }
    let parsed = parse_plays(open(input)?, &cfg)?;
    write_plays(create(out)?, &parsed.plays)?;
    write_rejects(create(rejects)?, &parsed.rejects)?;
    info!(
        "ingested {} plays from {} rows ({} rejected, {} not plays)",
        parsed.plays.len(),
        parsed.rows,
        parsed.rejects.len(),
        parsed.skipped
    );
    Ok(IngestSummary { rows: parsed.rows, plays: parsed.plays.len(), rejects: parsed.rejects.len(), skipped: parsed.skipped })
}

fn labeled_in(plays: &[Play], seasons: Option<&SeasonSet>) -> Result<Vec<LabeledPlay>> {
    if let Some(s) = seasons {
        check_seasons(plays, s)?;
    }
    let out = label_next_score(plays)?;
    log_diagnostics("labels", &out.diagnostics);
    Ok(out.labeled.into_iter().filter(|l| seasons.is_none_or(|s| s.contains(l.play.season))).collect())
}

pub fn fit_ep(plays: &Path, seasons: Option<&SeasonSet>, touchdown_points: f64, out: &Path) -> Result<EpModel> {
    let plays = load_plays(plays)?;
    let labeled = labeled_in(&plays, seasons)?;
    let opts = EpOptions { touchdown_points, ..EpOptions::default() };
    let model = fit_ep_model(&training_set(&labeled), &opts)?;
    info!("expected-points model fitted on {} plays", model.n_train);
    write_json(out, &model)?;
    Ok(model)
}

/// Calibration table row; `bin` is `all` for per-event and overall rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub group: String,
    pub event: String,
    pub bin: String,
    pub n: usize,
    pub predicted: Option<f64>,
    pub observed: Option<f64>,
    pub error: f64,
}

fn calibration_rows(group: &str, rep: &CalibrationReport) -> Vec<CalibrationRow> {
    let mut out: Vec<CalibrationRow> = rep
        .bins
        .iter()
        .map(|b| CalibrationRow {
            group: group.into(),
            event: b.event.clone(),
            bin: format!("{:.2}-{:.2}", b.bin as f64 * rep.bin_width, (b.bin + 1) as f64 * rep.bin_width),
            n: b.n,
            predicted: Some(b.predicted),
            observed: Some(b.observed),
            error: b.error,
        })
        .collect();
    out.extend(rep.events.iter().map(|e| CalibrationRow {
        group: group.into(),
        event: e.event.clone(),
        bin: "all".into(),
        n: e.n,
        predicted: None,
        observed: None,
        error: e.error,
    }));
    out.push(CalibrationRow {
        group: group.into(),
        event: "overall".into(),
        bin: "all".into(),
        n: rep.bins.iter().map(|b| b.n).sum(),
        predicted: None,
        observed: None,
        error: rep.overall,
    });
    out
}

/// Calibration of the expected-points model: held-out by season when
/// `model` is `None`, in-sample otherwise. Returns the overall error.
pub fn calibrate_ep(plays: &Path, seasons: Option<&SeasonSet>, model: Option<&Path>, touchdown_points: f64, report: &Path) -> Result<f64> {
    let plays = load_plays(plays)?;
    let labeled = labeled_in(&plays, seasons)?;
    let (group, rep) = match model {
        Some(m) => {
            let model: EpModel = read_json(m)?;
            ("in_sample", in_sample_calibration(&model, &training_set(&labeled)))
        }
        None => ("leave_one_season_out", loso_cv(&labeled, &EpOptions { touchdown_points, ..EpOptions::default() })?),
    };
    info!("expected-points calibration error ({group}): {:.4}", rep.overall);
    write_csv(report, &calibration_rows(group, &rep))?;
    Ok(rep.overall)
}

pub fn fit_kick(plays: &Path, seasons: Option<&SeasonSet>, out: &Path) -> Result<KickModel> {
    let plays = load_plays(plays)?;
    if let Some(s) = seasons {
        check_seasons(&plays, s)?;
    }
    let model = fit_kick_model(&in_seasons(&plays, seasons), &GamOptions::default())?;
    info!(
        "kick model fitted on {} attempts; two-point rate {:.4} from {} tries",
        model.n_attempts, model.two_point_rate, model.two_point_attempts
    );
    write_json(out, &model)?;
    Ok(model)
}

#[allow(clippy::too_many_arguments)]
pub fn fit_wp(
    plays: &Path,
    games: &Path,
    ep: &Path,
    kick: &Path,
    seasons: Option<&SeasonSet>,
    out: &Path,
    calibration: Option<&Path>,
    loso: bool,
) -> Result<WpModel> {
    let plays = load_plays(plays)?;
    if let Some(s) = seasons {
        check_seasons(&plays, s)?;
    }
    let games = load_games(games)?;
    let ep: EpModel = read_json(ep)?;
    let kick: KickModel = read_json(kick)?;
    let plays = in_seasons(&plays, seasons);
    let eps = pre_snap_ep(&plays, &ep, &kick)?;
    let (rows, diagnostics) = wp_rows(&plays, &eps, &games);
    log_diagnostics("win probability", &diagnostics);
    let opts = GamOptions::default();
    let model = fit_wp_model(&rows, &opts)?;
    info!("win-probability model fitted on {} plays", model.n_train);
    write_json(out, &model)?;
    if let Some(path) = calibration {
        let (group, preds) = if loso {
            ("leave_one_season_out", loso_wp(&rows, &opts)?)
        } else {
            ("in_sample", rows.iter().map(|r| model.predict(&r.features)).collect())
        };
        let mut table = Vec::new();
        for (q, rep) in wp_calibration_by_quarter(&preds, &rows) {
            table.extend(calibration_rows(&format!("{group}_q{q}"), &rep));
        }
        write_csv(path, &table)?;
    }
    Ok(model)
}

pub fn annotate(plays: &Path, games: &Path, ep: &Path, kick: &Path, wp: &Path, seasons: Option<&SeasonSet>, out: &Path) -> Result<usize> {
    let plays = load_plays(plays)?;
    if let Some(s) = seasons {
        check_seasons(&plays, s)?;
    }
    let games = load_games(games)?;
    let ep: EpModel = read_json(ep)?;
    let kick: KickModel = read_json(kick)?;
    let wp: WpModel = read_json(wp)?;
    let plays = in_seasons(&plays, seasons);
    let models = Models { ep: &ep, kick: &kick, wp: &wp };
    let a = annotate_values(&plays, &models, &games)?;
    log_diagnostics("annotate", &a.diagnostics);
    write_annotated(create(out)?, &a.plays)?;
    info!("annotated {} plays", a.plays.len());
    Ok(a.plays.len())
}

pub fn wp_chart(annotated: &Path, game: &str, out: &Path) -> Result<usize> {
    let plays = load_annotated(annotated)?;
    let rows = chart(&plays, game);
    if rows.is_empty() {
        return Err(CliError::Invalid(format!("game {game} is not in {}", annotated.display())));
    }
    write_csv(out, &rows)?;
    Ok(rows.len())
}

fn season_plays(plays: &[AnnotatedPlay], season: i32) -> Result<Vec<AnnotatedPlay>> {
    let v: Vec<AnnotatedPlay> = plays.iter().filter(|a| a.play.season == season).cloned().collect();
    if v.is_empty() {
        return Err(CliError::Invalid(format!("season {season} has no annotated plays")));
    }
    Ok(v)
}

fn raw(plays: &[AnnotatedPlay]) -> Vec<Play> {
    plays.iter().map(|a| a.play.clone()).collect()
}

/// Replacement counts per group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplacementRow {
    pub season: i32,
    pub group: String,
    pub replacement: usize,
    pub total: usize,
}

fn season_effects(season: i32, fit: &gridiron_core::credit::CreditFit) -> Vec<MemberEffect> {
    member_effects(fit)
        .into_iter()
        .map(|mut e| {
            e.model = format!("{season}:{}", e.model);
            e
        })
        .collect()
}

/// Credit-model member effects; the model column is `season:model`.
pub fn fit_credit_cmd(annotated: &Path, rosters: &Path, seasons: &SeasonSet, scale: ScaleChoice, rules: &ReplacementRules, out: &Path) -> Result<usize> {
    let all = load_annotated(annotated)?;
    let rosters = load_rosters(rosters)?;
    let mut effects = Vec::new();
    for &season in seasons.seasons() {
        let plays = season_plays(&all, season)?;
        let d = designate_replacement(&raw(&plays), &rosters, rules);
        log_diagnostics("replacement", &d.diagnostics);
        for s in scale.scales() {
            let data = build_credit_datasets(&plays, &rosters, &d.map, s)?;
            log_diagnostics("credit", &data.diagnostics);
            for ds in &data.datasets {
                effects.extend(season_effects(season, &fit_credit(ds, &MixedOptions::default())?));
            }
        }
    }
    write_csv(out, &effects)?;
    Ok(effects.len())
}

pub struct WarOutputs<'a> {
    pub war: &'a Path,
    pub effects: Option<&'a Path>,
    pub replacement: Option<&'a Path>,
}

pub fn war(
    annotated: &Path,
    rosters: &Path,
    games: &Path,
    seasons: &SeasonSet,
    scale: ScaleChoice,
    rules: &ReplacementRules,
    out: WarOutputs<'_>,
) -> Result<Vec<PlayerRecord>> {
    let all = load_annotated(annotated)?;
    let rosters = load_rosters(rosters)?;
    let games = load_games(games)?;
    let mut records = Vec::new();
    let mut effects: Vec<MemberEffect> = Vec::new();
    let mut repl = Vec::new();
    for &season in seasons.seasons() {
        let plays = season_plays(&all, season)?;
        let d = designate_replacement(&raw(&plays), &rosters, rules);
        log_diagnostics("replacement", &d.diagnostics);
        repl.extend(d.summary.iter().map(|(g, r, t)| ReplacementRow { season, group: g.clone(), replacement: *r, total: *t }));
        let conv = fit_wins_conversion(&games, season)?;
        info!("season {season}: {:.1} points per win", conv.points_per_win);
        for s in scale.scales() {
            let r = compute_war(&plays, &rosters, &d.map, &conv, s, &WarOptions::default())?;
            log_diagnostics("war", &r.diagnostics);
            records.extend(r.players.iter().map(|p| p.record(s)));
            for f in &r.fits {
                effects.extend(season_effects(season, f));
            }
        }
    }
    write_csv(out.war, &records)?;
    if let Some(p) = out.effects {
        write_csv(p, &effects)?;
    }
    if let Some(p) = out.replacement {
        write_csv(p, &repl)?;
    }
    Ok(records)
}

/// Simulation summary per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummaryRow {
    pub season: i32,
    pub scale: String,
    pub player_id: String,
    pub name: String,
    pub position: String,
    pub war: f64,
    pub war_q025: f64,
    pub war_q50: f64,
    pub war_q975: f64,
    pub n_sims: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    annotated: &Path,
    rosters: &Path,
    games: &Path,
    season: i32,
    scale: Scale,
    rules: &ReplacementRules,
    n_sims: usize,
    seed: u64,
    parallel: bool,
    out_dir: &Path,
) -> Result<Vec<SimSummaryRow>> {
    if n_sims == 0 {
        return Err(CliError::Invalid("the number of simulations must be at least 1".into()));
    }
    let all = load_annotated(annotated)?;
    let rosters = load_rosters(rosters)?;
    let games = load_games(games)?;
    let plays = season_plays(&all, season)?;
    let d = designate_replacement(&raw(&plays), &rosters, rules);
    let conv = fit_wins_conversion(&games, season)?;
    let base = compute_war(&plays, &rosters, &d.map, &conv, scale, &WarOptions::default())?;
    let sims = run_sims(&plays, &rosters, &d.map, &conv, scale, n_sims, seed, Resampler::Drives, parallel)?;

    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    clear_simulations(out_dir)?;
    for s in &sims {
        let rows: Vec<PlayerRecord> = s.players.iter().map(|p| p.record(scale)).collect();
        write_csv(&out_dir.join(format!("sim_{:04}.csv", s.index)), &rows)?;
    }
    let dists = war_distributions(&sims, &base.players);
    let summary: Vec<SimSummaryRow> = base
        .players
        .iter()
        .zip(&dists)
        .map(|(p, d)| SimSummaryRow {
            season,
            scale: scale.label().into(),
            player_id: p.player_id.clone(),
            name: p.name.clone(),
            position: p.position.clone(),
            war: p.war,
            war_q025: d.q025,
            war_q50: d.q50,
            war_q975: d.q975,
            n_sims,
        })
        .collect();
    write_csv(&out_dir.join("summary.csv"), &summary)?;
    info!("{n_sims} simulated seasons written to {}", out_dir.display());
    Ok(summary)
}

fn clear_simulations(dir: &Path) -> Result<()> {
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("sim_") && name.ends_with(".csv") {
            std::fs::remove_file(&path).map_err(|e| CliError::io(&path, e))?;
        }
    }
    Ok(())
}

/// Summary files under `dir`: `dir/summary.csv` or `dir/*/summary.csv`.
fn find_summaries(dir: &Path) -> Result<Vec<PathBuf>> {
    let direct = dir.join("summary.csv");
    if direct.exists() {
        return Ok(vec![direct]);
    }
    let mut out = Vec::new();
    if dir.is_dir() {
        for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
            let p = entry.map_err(|e| CliError::io(dir, e))?.path().join("summary.csv");
            if p.exists() {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

pub struct ReportInputs<'a> {
    pub war: &'a Path,
    pub annotated: &'a Path,
    pub effects: Option<&'a Path>,
    pub sims: Option<&'a Path>,
}

fn require(path: &Path, how: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Missing(format!("{} does not exist; produce it with `{how}`", path.display())))
    }
}

/// Writes the report tables into `out_dir` and returns the file names.
pub fn report(
    inputs: ReportInputs<'_>,
    scale: Scale,
    compare: Option<(i32, i32)>,
    top_n: usize,
    out_dir: &Path,
) -> Result<Vec<String>> {
    require(inputs.war, "gridiron war --annotated <annotated.csv> --rosters <rosters.csv> --games <games.csv> --season <S> --out <war.csv>")?;
    require(inputs.annotated, "gridiron annotate --plays <plays.csv> --games <games.csv> --ep-model ... --out <annotated.csv>")?;
    if let Some(e) = inputs.effects {
        require(e, "gridiron war ... --effects <effects.csv>")?;
    }
    let records: Vec<PlayerRecord> = read_csv(inputs.war)?;
    let players: Vec<PlayerSeasonValue> =
        records.iter().filter(|r| r.scale == scale.label()).map(PlayerSeasonValue::from_record).collect();
    if players.is_empty() {
        return Err(CliError::Invalid(format!("{} has no {} rows", inputs.war.display(), scale.label())));
    }
    let seasons: Vec<i32> = players.iter().map(|p| p.season).collect::<BTreeSet<_>>().into_iter().collect();

    let mut summaries: Vec<SimSummaryRow> = Vec::new();
    if let Some(dir) = inputs.sims {
        for p in find_summaries(dir)? {
            summaries.extend(read_csv::<SimSummaryRow>(&p)?);
        }
    }
    summaries.retain(|s| s.scale == scale.label());
    if summaries.is_empty() {
        warn!("no simulation results found; WAR intervals are omitted from the report");
    }

    let mut files = Vec::new();
    let mut leaders = Vec::new();
    for &season in &seasons {
        let ps: Vec<PlayerSeasonValue> = players.iter().filter(|p| p.season == season).cloned().collect();
        let dists: Vec<WarDistribution> = summaries
            .iter()
            .filter(|s| s.season == season)
            .map(|s| WarDistribution {
                player_id: s.player_id.clone(),
                name: s.name.clone(),
                position: s.position.clone(),
                values: Vec::new(),
                q025: s.war_q025,
                q50: s.war_q50,
                q975: s.war_q975,
            })
            .collect();
        leaders.extend(top_by_position(&ps, top_n, (!dists.is_empty()).then_some(dists.as_slice())));
    }
    write_csv(&out_dir.join("top_war.csv"), &leaders)?;
    files.push("top_war.csv".to_string());

    write_csv(&out_dir.join("ipa_scatter.csv"), &ipa_scatter(&players))?;
    files.push("ipa_scatter.csv".into());

    if let Some(e) = inputs.effects {
        let effects: Vec<MemberEffect> = read_csv(e)?;
        let mut rows = Vec::new();
        for &season in &seasons {
            let prefix = format!("{season}:");
            let mine: Vec<MemberEffect> =
                effects.iter().filter(|m| m.scale == scale.label() && m.model.starts_with(&prefix)).cloned().collect();
            rows.extend(line_summary(&mine).into_iter().map(|r| LineReportRow { season, row: r }));
        }
        write_line_rows(&out_dir.join("line_summary.csv"), &rows)?;
        files.push("line_summary.csv".into());
    }

    let annotated = load_annotated(inputs.annotated)?;
    let mut game_ids: Vec<&str> =
        annotated.iter().filter(|a| seasons.contains(&a.play.season)).map(|a| a.play.game_id.as_str()).collect();
    game_ids.dedup();
    let mut points = Vec::new();
    for g in game_ids {
        points.extend(chart(&annotated, g));
    }
    write_csv(&out_dir.join("wp_charts.csv"), &points)?;
    files.push("wp_charts.csv".into());

    if let Some((a, b)) = compare {
        for s in [a, b] {
            if !seasons.contains(&s) {
                return Err(CliError::Missing(format!(
                    "season {s} is not in {}; produce it with `gridiron war --season {a},{b} ...`",
                    inputs.war.display()
                )));
            }
        }
        let pa: Vec<PlayerSeasonValue> = players.iter().filter(|p| p.season == a).cloned().collect();
        let pb: Vec<PlayerSeasonValue> = players.iter().filter(|p| p.season == b).cloned().collect();
        let sa = conventional_stats(&season_plays(&annotated, a)?);
        let sb = conventional_stats(&season_plays(&annotated, b)?);
        let ta = SeasonTable { season: a, players: &pa, stats: &sa };
        let tb = SeasonTable { season: b, players: &pb, stats: &sb };
        let mut rows = Vec::new();
        for pos in ["QB", "RB", "WR", "TE"] {
            match autocorrelation(&ta, &tb, pos) {
                Ok(r) => rows.extend(r),
                Err(e) => warn!("autocorrelation skipped: {e}"),
            }
        }
        if rows.is_empty() {
            return Err(CliError::Core(gridiron_core::CoreError::Data(format!(
                "no position has at least 3 players above replacement level in both {a} and {b}"
            ))));
        }
        write_csv(&out_dir.join("autocorrelation.csv"), &rows)?;
        files.push("autocorrelation.csv".into());
    }
    Ok(files)
}

struct LineReportRow {
    season: i32,
    row: gridiron_core::report::LineRow,
}

fn write_line_rows(path: &Path, rows: &[LineReportRow]) -> Result<()> {
    #[derive(Serialize)]
    struct Flat<'a> {
        season: i32,
        team: &'a str,
        gap: &'a str,
        plays: usize,
        ipa: f64,
    }
    let flat: Vec<Flat<'_>> = rows
        .iter()
        .map(|r| Flat { season: r.season, team: &r.row.team, gap: &r.row.gap, plays: r.row.plays, ipa: r.row.ipa })
        .collect();
    write_csv(path, &flat)
}

pub fn synth(out_dir: &Path, seasons: &SeasonSet, teams: usize, seed: u64) -> Result<usize> {
    let league = generate_league(&SynthConfig { seasons: seasons.seasons().to_vec(), teams, seed })?;
    league.write_pbp(create(&out_dir.join("pbp.csv"))?)?;
    write_games(create(&out_dir.join("games.csv"))?, &league.games)?;
    write_rosters(create(&out_dir.join("rosters.csv"))?, &league.rosters)?;
    info!("{} plays in {} games written to {}", league.rows.len(), league.games.len(), out_dir.display());
    Ok(league.rows.len())
}

/// Games file helper used by the pipeline to validate seasons.
pub fn game_seasons(games: &Games) -> Vec<i32> {
    games.iter().map(|g| g.season).collect::<BTreeSet<_>>().into_iter().collect()
}
