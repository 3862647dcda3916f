//! Wins above replacement: replacement levels, iPAA/iPAR, points-to-wins
//! conversion and drive-resampled distributions.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use gridiron_numerics::{fit_wls, DesignMatrix, MixedOptions};

use crate::constants::{
    QB_INVOLVEMENT_SHARE, RECEIVING_RB_PER_TEAM, RECEIVING_TE_PER_TEAM, RECEIVING_WR_PER_TEAM, RUSHING_RB_PER_TEAM,
    RUSHING_WRTE_PER_TEAM,
};
use crate::credit::{
    build_credit_datasets, fit_credit, qb_set, CreditFit, CreditModel, ReplacementMap, REPLACEMENT_QB,
    REPLACEMENT_RB_RECEIVING, REPLACEMENT_RB_RUSHING, REPLACEMENT_TE_RECEIVING, REPLACEMENT_WRTE_RUSHING,
    REPLACEMENT_WR_RECEIVING,
};
use crate::error::{CoreError, Result};
use crate::league::{Games, Position, Rosters};
use crate::pbp::{Play, PlayType};
use crate::value::{AnnotatedPlay, Scale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QbRule {
    TenPercent,
    OnePerTeam,
}

impl std::str::FromStr for QbRule {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ten_percent" => Ok(QbRule::TenPercent),
            "one_per_team" => Ok(QbRule::OnePerTeam),
            _ => Err(CoreError::Validation(format!("unknown QB rule `{s}` (ten_percent or one_per_team)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplacementRules {
    pub rushing_rb_per_team: usize,
    pub rushing_wrte_per_team: usize,
    pub receiving_rb_per_team: usize,
    pub receiving_wr_per_team: usize,
    pub receiving_te_per_team: usize,
    pub qb_rule: QbRule,
    pub qb_share: f64,
    /// Teams the per-team counts are multiplied by; `None` counts the teams in the data.
    pub teams: Option<usize>,
}

impl Default for ReplacementRules {
    fn default() -> Self {
        Self {
            rushing_rb_per_team: RUSHING_RB_PER_TEAM,
            rushing_wrte_per_team: RUSHING_WRTE_PER_TEAM,
            receiving_rb_per_team: RECEIVING_RB_PER_TEAM,
            receiving_wr_per_team: RECEIVING_WR_PER_TEAM,
            receiving_te_per_team: RECEIVING_TE_PER_TEAM,
            qb_rule: QbRule::TenPercent,
            qb_share: QB_INVOLVEMENT_SHARE,
            teams: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Designation {
    pub map: ReplacementMap,
    /// `(group, replacement, total)` counts, e.g. `("rushing RB", 52, 148)`.
    pub summary: Vec<(String, usize, usize)>,
    pub diagnostics: Vec<String>,
}

fn is_non_qb_rush(p: &Play, qbs: &BTreeSet<String>) -> Option<String> {
    if p.play_type != PlayType::Rush || p.qb_scramble {
        return None;
    }
    let r = p.rusher.as_ref()?;
    (!qbs.contains(r)).then(|| r.clone())
}

fn qb_involved(p: &Play, qbs: &BTreeSet<String>) -> Option<String> {
    match p.play_type {
        PlayType::Pass | PlayType::Sack => p.passer.clone().or_else(|| p.rusher.clone()).filter(|id| qbs.contains(id)),
        PlayType::Rush => {
            let r = p.rusher.clone().or_else(|| if p.qb_scramble { p.passer.clone() } else { None })?;
            (p.qb_scramble || qbs.contains(&r)).then_some(r)
        }
        _ => None,
    }
}

/// Players outside the top `k` by count (ties broken by id) are replacement level.
fn below_top(counts: &BTreeMap<String, usize>, k: usize) -> Vec<String> {
    let mut v: Vec<(&String, usize)> = counts.iter().map(|(p, &c)| (p, c)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    v.into_iter().skip(k).map(|(p, _)| p.clone()).collect()
}

/// Replacement-level designation for one season of plays.
pub fn designate_replacement(plays: &[Play], rosters: &Rosters, rules: &ReplacementRules) -> Designation {
    let mut out = Designation::default();
    let qbs = qb_set(plays, rosters);
    let teams: BTreeSet<&str> = plays.iter().map(|p| p.posteam.as_str()).collect();
    let n_teams = rules.teams.unwrap_or(teams.len());

    let mut rush: BTreeMap<Position, BTreeMap<String, usize>> = BTreeMap::new();
    let mut recv: BTreeMap<Position, BTreeMap<String, usize>> = BTreeMap::new();
    let mut unknown = BTreeSet::new();
    for p in plays {
        if let Some(r) = is_non_qb_rush(p, &qbs) {
            match rosters.position(p.season, &r).map(Position::group) {
                Some(Position::RB) => *rush.entry(Position::RB).or_default().entry(r).or_default() += 1,
                Some(Position::WR | Position::TE) => *rush.entry(Position::WR).or_default().entry(r).or_default() += 1,
                _ => {
                    unknown.insert(r);
                }
            }
        }
        if p.play_type == PlayType::Pass {
            if let Some(r) = &p.receiver {
                match rosters.position(p.season, r).map(Position::group) {
                    Some(g @ (Position::RB | Position::WR | Position::TE)) => {
                        *recv.entry(g).or_default().entry(r.clone()).or_default() += 1
                    }
                    _ => {
                        unknown.insert(r.clone());
                    }
                }
            }
        }
    }
    let groups = [
        ("rushing RB", &rush, Position::RB, rules.rushing_rb_per_team, REPLACEMENT_RB_RUSHING, true),
        ("rushing WR/TE", &rush, Position::WR, rules.rushing_wrte_per_team, REPLACEMENT_WRTE_RUSHING, true),
        ("receiving RB", &recv, Position::RB, rules.receiving_rb_per_team, REPLACEMENT_RB_RECEIVING, false),
        ("receiving WR", &recv, Position::WR, rules.receiving_wr_per_team, REPLACEMENT_WR_RECEIVING, false),
        ("receiving TE", &recv, Position::TE, rules.receiving_te_per_team, REPLACEMENT_TE_RECEIVING, false),
    ];
    for (name, table, pos, per_team, label, rushing) in groups {
        let empty = BTreeMap::new();
        let counts = table.get(&pos).unwrap_or(&empty);
        let repl = below_top(counts, per_team * n_teams);
        out.summary.push((name.to_string(), repl.len(), counts.len()));
        let target = if rushing { &mut out.map.rushing } else { &mut out.map.receiving };
        for p in repl {
            target.insert(p, label.to_string());
        }
    }
    if !unknown.is_empty() {
        out.diagnostics.push(format!(
            "{} rushers/receivers without a usable roster position are never replacement level: {}",
            unknown.len(),
            unknown.iter().take(10).cloned().collect::<Vec<_>>().join(", ")
        ));
    }

    let involved_qbs: BTreeSet<String> = plays.iter().filter_map(|p| qb_involved(p, &qbs)).collect();
    let keep: BTreeSet<String> = match rules.qb_rule {
        QbRule::TenPercent => {
            let mut per_team: BTreeMap<&str, (usize, BTreeMap<String, usize>)> = BTreeMap::new();
            for p in plays {
                if let Some(q) = qb_involved(p, &qbs) {
                    let e = per_team.entry(p.posteam.as_str()).or_default();
                    e.0 += 1;
                    *e.1.entry(q).or_default() += 1;
                }
            }
            let mut best: BTreeMap<String, f64> = BTreeMap::new();
            for (total, by_qb) in per_team.values() {
                for (q, &c) in by_qb {
                    let s = c as f64 / *total as f64;
                    let e = best.entry(q.clone()).or_insert(0.0);
                    *e = e.max(s);
                }
            }
            best.into_iter().filter(|(_, s)| *s >= rules.qb_share).map(|(q, _)| q).collect()
        }
        QbRule::OnePerTeam => {
            // First quarter-one passer of each team's first game.
            let mut first_game: BTreeMap<&str, &str> = BTreeMap::new();
            for p in plays {
                for t in [&p.home_team, &p.away_team] {
                    let e = first_game.entry(t.as_str()).or_insert(p.game_id.as_str());
                    if p.game_id.as_str() < *e {
                        *e = p.game_id.as_str();
                    }
                }
            }
            let mut starters = BTreeMap::new();
            for p in plays {
                if p.quarter != 1 || p.play_type != PlayType::Pass || first_game.get(p.posteam.as_str()) != Some(&p.game_id.as_str()) {
                    continue;
                }
                if let Some(q) = &p.passer {
                    starters.entry(p.posteam.as_str()).or_insert(q.clone());
                }
            }
            starters.into_values().collect()
        }
    };
    for q in &involved_qbs {
        if !keep.contains(q) {
            out.map.qb.insert(q.clone());
        }
    }
    out.summary.push(("QB".into(), out.map.qb.len(), involved_qbs.len()));
    out
}

// ---------------------------------------------------------------------------
// Points to wins

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinsConversion {
    pub season: i32,
    pub intercept: f64,
    pub slope: f64,
    pub points_per_win: f64,
    pub teams: usize,
}

/// Least squares of team wins on season score differential.
pub fn fit_wins_conversion(games: &Games, season: i32) -> Result<WinsConversion> {
    let records = games.team_records(season);
    if records.len() < 3 {
        return Err(CoreError::Data(format!("season {season}: {} teams with results", records.len())));
    }
    let wins: Vec<f64> = records.values().map(|r| r.0).collect();
    let diff: Vec<f64> = records.values().map(|r| r.1).collect();
    let x = DesignMatrix::from_columns(vec![("(intercept)".into(), vec![1.0; wins.len()]), ("score_differential".into(), diff)])
        .map_err(|e| CoreError::numerics("wins conversion", e))?;
    let fit = fit_wls(&x, &wins, &vec![1.0; wins.len()]).map_err(|e| CoreError::numerics("wins conversion", e))?;
    let slope = fit.coefficients[1];
    if !(slope > 0.0) {
        log::warn!("season {season}: wins do not increase with score differential (slope {slope})");
    }
    Ok(WinsConversion {
        season,
        intercept: fit.coefficients[0],
        slope,
        points_per_win: 1.0 / slope,
        teams: wins.len(),
    })
}

// ---------------------------------------------------------------------------
// Player values

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Triple {
    pub air: f64,
    pub yac: f64,
    pub rush: f64,
}

impl Triple {
    pub fn total(&self) -> f64 {
        self.air + self.yac + self.rush
    }
}

/// iPAA per component: `κ_pass·iPA_air`, `κ_pass·iPA_yac`, `κ_rush·iPA_rush`.
pub fn ipaa(kappa_pass: f64, kappa_rush: f64, ipa: &Triple) -> Triple {
    Triple { air: kappa_pass * ipa.air, yac: kappa_pass * ipa.yac, rush: kappa_rush * ipa.rush }
}

/// iPAR per component: iPAA minus the replacement shadow at the same usage.
pub fn ipar(kappa_pass: f64, kappa_rush: f64, ipa: &Triple, replacement: &Triple) -> Triple {
    let a = ipaa(kappa_pass, kappa_rush, ipa);
    let r = ipaa(kappa_pass, kappa_rush, replacement);
    Triple { air: a.air - r.air, yac: a.yac - r.yac, rush: a.rush - r.rush }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSeasonValue {
    pub season: i32,
    pub player_id: String,
    pub name: String,
    pub position: String,
    pub team: String,
    pub replacement: bool,
    pub kappa_pass: usize,
    pub kappa_rush: usize,
    pub ipa: Triple,
    pub ipaa: Triple,
    pub ipar: Triple,
    pub ipar_total: f64,
    pub war: f64,
}

/// Flat record for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerRecord {
    pub season: i32,
    pub scale: String,
    pub player_id: String,
    pub name: String,
    pub position: String,
    pub team: String,
    pub replacement: bool,
    pub kappa_pass: usize,
    pub kappa_rush: usize,
    pub ipa_air: f64,
    pub ipa_yac: f64,
    pub ipa_rush: f64,
    pub ipaa_air: f64,
    pub ipaa_yac: f64,
    pub ipaa_rush: f64,
    pub ipar_air: f64,
    pub ipar_yac: f64,
    pub ipar_rush: f64,
    pub ipar_total: f64,
    pub war: f64,
}

impl PlayerSeasonValue {
    pub fn from_record(r: &PlayerRecord) -> Self {
        Self {
            season: r.season,
            player_id: r.player_id.clone(),
            name: r.name.clone(),
            position: r.position.clone(),
            team: r.team.clone(),
            replacement: r.replacement,
            kappa_pass: r.kappa_pass,
            kappa_rush: r.kappa_rush,
            ipa: Triple { air: r.ipa_air, yac: r.ipa_yac, rush: r.ipa_rush },
            ipaa: Triple { air: r.ipaa_air, yac: r.ipaa_yac, rush: r.ipaa_rush },
            ipar: Triple { air: r.ipar_air, yac: r.ipar_yac, rush: r.ipar_rush },
            ipar_total: r.ipar_total,
            war: r.war,
        }
    }

    pub fn record(&self, scale: Scale) -> PlayerRecord {
        PlayerRecord {
            season: self.season,
            scale: scale.label().into(),
            player_id: self.player_id.clone(),
            name: self.name.clone(),
            position: self.position.clone(),
            team: self.team.clone(),
            replacement: self.replacement,
            kappa_pass: self.kappa_pass,
            kappa_rush: self.kappa_rush,
            ipa_air: self.ipa.air,
            ipa_yac: self.ipa.yac,
            ipa_rush: self.ipa.rush,
            ipaa_air: self.ipaa.air,
            ipaa_yac: self.ipaa.yac,
            ipaa_rush: self.ipaa.rush,
            ipar_air: self.ipar.air,
            ipar_yac: self.ipar.yac,
            ipar_rush: self.ipar.rush,
            ipar_total: self.ipar_total,
            war: self.war,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WarResult {
    pub scale: Scale,
    pub fits: Vec<CreditFit>,
    pub players: Vec<PlayerSeasonValue>,
    pub diagnostics: Vec<String>,
}

impl WarResult {
    pub fn fit(&self, m: CreditModel) -> &CreditFit {
        self.fits.iter().find(|f| f.model == m).expect("all four models are fitted")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WarOptions {
    pub mixed: MixedOptions,
    /// Fit the four credit models concurrently.
    pub parallel: bool,
}

impl Default for WarOptions {
    fn default() -> Self {
        Self { mixed: MixedOptions::default(), parallel: true }
    }
}

#[derive(Default)]
struct Usage {
    pass: usize,
    rush: usize,
    teams: BTreeMap<String, usize>,
}

/// Credit fits and WAR for one season and one scale.
pub fn compute_war(
    plays: &[AnnotatedPlay],
    rosters: &Rosters,
    replacement: &ReplacementMap,
    conversion: &WinsConversion,
    scale: Scale,
    opts: &WarOptions,
) -> Result<WarResult> {
    let season = plays.first().map(|a| a.play.season).ok_or_else(|| CoreError::Data("no plays".into()))?;
    let data = build_credit_datasets(plays, rosters, replacement, scale)?;
    let fits: Vec<Result<CreditFit>> = if opts.parallel {
        data.datasets.par_iter().map(|d| fit_credit(d, &opts.mixed)).collect()
    } else {
        data.datasets.iter().map(|d| fit_credit(d, &opts.mixed)).collect()
    };
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;
    let fit = |m: CreditModel| fits.iter().find(|f| f.model == m).expect("fitted");

    let raw: Vec<Play> = plays.iter().map(|a| a.play.clone()).collect();
    let qbs = qb_set(&raw, rosters);
    let mut qb_use: BTreeMap<String, Usage> = BTreeMap::new();
    let mut other_use: BTreeMap<String, Usage> = BTreeMap::new();
    for row in &data.get(CreditModel::PassAir).rows {
        let u = qb_use.entry(row.raw[0].clone()).or_default();
        u.pass += 1;
        *u.teams.entry(row.posteam.clone()).or_default() += 1;
        let u = other_use.entry(row.raw[1].clone()).or_default();
        u.pass += 1;
        *u.teams.entry(row.posteam.clone()).or_default() += 1;
    }
    for row in &data.get(CreditModel::QbRush).rows {
        let u = qb_use.entry(row.raw[0].clone()).or_default();
        u.rush += 1;
        *u.teams.entry(row.posteam.clone()).or_default() += 1;
    }
    for row in &data.get(CreditModel::NonQbRush).rows {
        let u = other_use.entry(row.raw[0].clone()).or_default();
        u.rush += 1;
        *u.teams.entry(row.posteam.clone()).or_default() += 1;
    }

    let mut diagnostics = data.diagnostics;
    let mut players = Vec::new();
    let team_of = |u: &Usage| {
        u.teams.iter().max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0))).map(|(t, _)| t.clone()).unwrap_or_default()
    };
    let check = |factor: &str, m: CreditModel, label: &str, kappa: usize| -> Result<f64> {
        let f = fit(m);
        match f.fit.factor(factor).and_then(|v| v.intercept(label)) {
            Some(v) => Ok(v),
            None if kappa == 0 => Ok(0.0),
            None => Err(CoreError::Validation(format!(
                "{label} has {kappa} plays but no {factor} intercept in the {} model",
                m.label()
            ))),
        }
    };
    let name_of = |id: &str| rosters.name(season, id).unwrap_or(id).to_string();

    for (id, u) in &qb_use {
        if !qbs.contains(id) {
            continue;
        }
        let label = replacement.passer_label(id);
        let ipa = Triple {
            air: check("passer", CreditModel::PassAir, label, u.pass)?,
            yac: check("passer", CreditModel::PassYac, label, 0)?,
            rush: check("passer", CreditModel::QbRush, label, u.rush)?,
        };
        let repl = Triple {
            air: fit(CreditModel::PassAir).ipa("passer", REPLACEMENT_QB),
            yac: fit(CreditModel::PassYac).ipa("passer", REPLACEMENT_QB),
            rush: fit(CreditModel::QbRush).ipa("passer", REPLACEMENT_QB),
        };
        players.push(player_value(season, id, &name_of(id), "QB", &team_of(u), label != id, u, ipa, repl, conversion, scale));
    }
    for (id, u) in &other_use {
        if qbs.contains(id) {
            continue;
        }
        let Some(pos) = rosters.position(season, id).filter(|p| matches!(p.group(), Position::RB | Position::WR | Position::TE))
        else {
            diagnostics.push(format!("player {id} has no skill position and is left out of WAR"));
            continue;
        };
        let recv_label = replacement.receiver_label(id);
        let rush_label = replacement.rusher_label(id);
        let ipa = Triple {
            air: check("receiver", CreditModel::PassAir, recv_label, u.pass)?,
            yac: check("receiver", CreditModel::PassYac, recv_label, 0)?,
            rush: check("rusher", CreditModel::NonQbRush, rush_label, u.rush)?,
        };
        let (recv_repl, rush_repl) = match pos.group() {
            Position::RB => (REPLACEMENT_RB_RECEIVING, REPLACEMENT_RB_RUSHING),
            Position::WR => (REPLACEMENT_WR_RECEIVING, REPLACEMENT_WRTE_RUSHING),
            _ => (REPLACEMENT_TE_RECEIVING, REPLACEMENT_WRTE_RUSHING),
        };
        let repl = Triple {
            air: fit(CreditModel::PassAir).ipa("receiver", recv_repl),
            yac: fit(CreditModel::PassYac).ipa("receiver", recv_repl),
            rush: fit(CreditModel::NonQbRush).ipa("rusher", rush_repl),
        };
        let is_repl = recv_label != id || rush_label != id;
        players.push(player_value(
            season,
            id,
            &name_of(id),
            pos.group().label(),
            &team_of(u),
            is_repl,
            u,
            ipa,
            repl,
            conversion,
            scale,
        ));
    }
    Ok(WarResult { scale, fits, players, diagnostics })
}

#[allow(clippy::too_many_arguments)]
fn player_value(
    season: i32,
    id: &str,
    name: &str,
    position: &str,
    team: &str,
    replacement: bool,
    u: &Usage,
    ipa: Triple,
    repl: Triple,
    conversion: &WinsConversion,
    scale: Scale,
) -> PlayerSeasonValue {
    let (kp, kr) = (u.pass as f64, u.rush as f64);
    let ipar_t = ipar(kp, kr, &ipa, &repl);
    let total = ipar_t.total();
    PlayerSeasonValue {
        season,
        player_id: id.to_string(),
        name: name.to_string(),
        position: position.to_string(),
        team: team.to_string(),
        replacement,
        kappa_pass: u.pass,
        kappa_rush: u.rush,
        ipa,
        ipaa: ipaa(kp, kr, &ipa),
        ipar: ipar_t,
        ipar_total: total,
        war: match scale {
            Scale::Epa => total * conversion.slope,
            Scale::Wpa => total,
        },
    }
}

// ---------------------------------------------------------------------------
// Resampling

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resampler {
    /// Each team's drives drawn with replacement, count preserving.
    Drives,
    /// Original drives in original order.
    Identity,
}

/// Drives of each offense in input order: runs of plays with the same
/// game, possession team and drive number.
pub fn team_drives(plays: &[AnnotatedPlay]) -> BTreeMap<String, Vec<std::ops::Range<usize>>> {
    let mut out: BTreeMap<String, Vec<std::ops::Range<usize>>> = BTreeMap::new();
    let mut start = 0;
    for i in 1..=plays.len() {
        let split = i == plays.len() || {
            let (a, b) = (&plays[i - 1].play, &plays[i].play);
            a.game_id != b.game_id || a.posteam != b.posteam || a.drive_number != b.drive_number
        };
        if split {
            out.entry(plays[start].play.posteam.clone()).or_default().push(start..i);
            start = i;
        }
    }
    out
}

/// Drive draws of simulation `sim`: per team, indices into that team's
/// drive list. The RNG stream depends only on `(seed, sim)`.
pub fn drive_picks(
    drives: &BTreeMap<String, Vec<std::ops::Range<usize>>>,
    resampler: Resampler,
    seed: u64,
    sim: u64,
) -> Result<BTreeMap<String, Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sim);
    let mut out = BTreeMap::new();
    for (team, d) in drives {
        if d.is_empty() {
            return Err(CoreError::Data(format!("team {team} has no drives")));
        }
        let picks = match resampler {
            Resampler::Identity => (0..d.len()).collect(),
            Resampler::Drives => (0..d.len()).map(|_| rng.random_range(0..d.len())).collect(),
        };
        out.insert(team.clone(), picks);
    }
    Ok(out)
}

/// Plays of simulation `sim`, team by team in drive-draw order.
pub fn resample_plays(plays: &[AnnotatedPlay], resampler: Resampler, seed: u64, sim: u64) -> Result<Vec<AnnotatedPlay>> {
    let drives = team_drives(plays);
    let picks = drive_picks(&drives, resampler, seed, sim)?;
    let mut out = Vec::with_capacity(plays.len());
    for (team, d) in &drives {
        for &k in &picks[team] {
            out.extend_from_slice(&plays[d[k].clone()]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarDistribution {
    pub player_id: String,
    pub name: String,
    pub position: String,
    pub values: Vec<f64>,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub index: u64,
    pub players: Vec<PlayerSeasonValue>,
}

/// Runs `n_sims` resampled seasons. EP/WP values and replacement
/// designations stay fixed; only the credit models and WAR are recomputed.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    plays: &[AnnotatedPlay],
    rosters: &Rosters,
    replacement: &ReplacementMap,
    conversion: &WinsConversion,
    scale: Scale,
    n_sims: usize,
    seed: u64,
    resampler: Resampler,
    parallel: bool,
) -> Result<Vec<Simulation>> {
    if n_sims == 0 {
        return Err(CoreError::Validation("the number of simulations must be at least 1".into()));
    }
    let inner = WarOptions { parallel: false, ..WarOptions::default() };
    let run = |s: u64| -> Result<Simulation> {
        let sample = resample_plays(plays, resampler, seed, s)?;
        let r = compute_war(&sample, rosters, replacement, conversion, scale, &inner)?;
        Ok(Simulation { index: s, players: r.players })
    };
    let sims: Vec<Result<Simulation>> = if parallel {
        (0..n_sims as u64).into_par_iter().map(run).collect()
    } else {
        (0..n_sims as u64).map(run).collect()
    };
    sims.into_iter().collect()
}

/// Per-player WAR distributions; players missing from a simulation (no
/// plays drawn) get 0 there.
pub fn war_distributions(sims: &[Simulation], base: &[PlayerSeasonValue]) -> Vec<WarDistribution> {
    base.iter()
        .map(|p| {
            let values: Vec<f64> = sims
                .iter()
                .map(|s| s.players.iter().find(|q| q.player_id == p.player_id).map_or(0.0, |q| q.war))
                .collect();
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            WarDistribution {
                player_id: p.player_id.clone(),
                name: p.name.clone(),
                position: p.position.clone(),
                q025: quantile(&sorted, 0.025),
                q50: quantile(&sorted, 0.5),
                q975: quantile(&sorted, 0.975),
                values,
            }
        })
        .collect()
}

/// Share of simulations in which `a` has more WAR than `b`.
pub fn share_ahead(dists: &[WarDistribution], a: &str, b: &str) -> Option<f64> {
    let da = dists.iter().find(|d| d.player_id == a)?;
    let db = dists.iter().find(|d| d.player_id == b)?;
    let n = da.values.len();
    Some(da.values.iter().zip(&db.values).filter(|(x, y)| x > y).count() as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ipaa_ipar_arithmetic() {
        let ipa = Triple { air: 0.02, yac: 0.0, rush: 0.0 };
        let repl = Triple { air: -0.01, yac: 0.0, rush: 0.0 };
        let a = ipaa(100.0, 0.0, &ipa);
        let r = ipar(100.0, 0.0, &ipa, &repl);
        assert!((a.air - 2.0).abs() < 1e-12);
        assert!((r.air - 3.0).abs() < 1e-12);
        assert_eq!(ipar(57.0, 12.0, &repl, &repl).total(), 0.0);
    }

    #[test]
    fn top_k_ties_break_by_id() {
        let counts: BTreeMap<String, usize> = [("b", 5), ("a", 5), ("c", 9), ("d", 1)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert_eq!(below_top(&counts, 2), vec!["b".to_string(), "d".to_string()]);
        assert!(below_top(&counts, 10).is_empty());
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert!((quantile(&v, 0.975) - 4.9).abs() < 1e-12);
    }
}
