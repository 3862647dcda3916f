//! Credit division: varying-intercept models that split play value among
//! passers, receivers, rushers, offensive-line gaps and defenses.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use gridiron_numerics::{fit_varying_intercepts, DesignMatrix, GroupFactor, MixedOptions, VaryingInterceptFit};

use crate::error::{CoreError, Result};
use crate::league::{Position, Rosters};
use crate::pbp::{Direction, Play, PlayType, RunGap};
use crate::value::{AnnotatedPlay, Scale};

pub const REPLACEMENT_QB: &str = "Replacement-QB";
pub const REPLACEMENT_RB_RECEIVING: &str = "Replacement-RB-receiving";
pub const REPLACEMENT_WR_RECEIVING: &str = "Replacement-WR-receiving";
pub const REPLACEMENT_TE_RECEIVING: &str = "Replacement-TE-receiving";
pub const REPLACEMENT_RB_RUSHING: &str = "Replacement-RB-rushing";
pub const REPLACEMENT_WRTE_RUSHING: &str = "Replacement-WR/TE-rushing";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CreditModel {
    PassAir,
    PassYac,
    QbRush,
    NonQbRush,
}

impl CreditModel {
    pub const ALL: [CreditModel; 4] = [CreditModel::PassAir, CreditModel::PassYac, CreditModel::QbRush, CreditModel::NonQbRush];

    pub fn label(self) -> &'static str {
        match self {
            CreditModel::PassAir => "pass_air",
            CreditModel::PassYac => "pass_yac",
            CreditModel::QbRush => "qb_rush",
            CreditModel::NonQbRush => "non_qb_rush",
        }
    }

    pub fn factors(self) -> &'static [&'static str] {
        match self {
            CreditModel::PassAir | CreditModel::PassYac => &["passer", "receiver", "defense"],
            CreditModel::QbRush => &["passer", "defense"],
            CreditModel::NonQbRush => &["rusher", "side_gap", "defense"],
        }
    }

    pub fn covariates(self) -> Vec<&'static str> {
        let pass = vec![
            "home",
            "shotgun",
            "no_huddle",
            "qb_hit",
            "pass_location_middle",
            "pass_location_right",
            "rec_position_te",
            "rec_position_fb",
            "rec_position_rb",
            "rush_strength",
        ];
        match self {
            CreditModel::PassAir => pass,
            CreditModel::PassYac => {
                let mut v = pass;
                v.extend(["air_yards", "air_yards:rec_position_te", "air_yards:rec_position_fb", "air_yards:rec_position_rb"]);
                v
            }
            CreditModel::QbRush => vec!["home", "shotgun", "no_huddle", "pass_strength"],
            CreditModel::NonQbRush => vec![
                "home",
                "shotgun",
                "no_huddle",
                "rush_position_fb",
                "rush_position_wr",
                "rush_position_te",
                "pass_strength",
            ],
        }
    }

    /// Replacement labels that are always levels of each factor.
    fn replacement_levels(self, factor: &str) -> &'static [&'static str] {
        match factor {
            "passer" => &[REPLACEMENT_QB],
            "receiver" => &[REPLACEMENT_RB_RECEIVING, REPLACEMENT_WR_RECEIVING, REPLACEMENT_TE_RECEIVING],
            "rusher" => &[REPLACEMENT_RB_RUSHING, REPLACEMENT_WRTE_RUSHING],
            _ => &[],
        }
    }
}

impl std::str::FromStr for CreditModel {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        CreditModel::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| CoreError::Validation(format!("unknown credit model `{s}`")))
    }
}

/// Players pooled into replacement-level pseudo-members, by usage type.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplacementMap {
    pub qb: BTreeSet<String>,
    /// Player → replacement label for rushing.
    pub rushing: BTreeMap<String, String>,
    /// Player → replacement label for receiving.
    pub receiving: BTreeMap<String, String>,
}

impl ReplacementMap {
    pub fn passer_label<'a>(&self, id: &'a str) -> &'a str {
        if self.qb.contains(id) {
            REPLACEMENT_QB
        } else {
            id
        }
    }

    pub fn receiver_label<'a>(&'a self, id: &'a str) -> &'a str {
        self.receiving.get(id).map_or(id, String::as_str)
    }

    pub fn rusher_label<'a>(&'a self, id: &'a str) -> &'a str {
        self.rushing.get(id).map_or(id, String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.qb.is_empty() && self.rushing.is_empty() && self.receiving.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeamStrength {
    pub pass: f64,
    pub rush: f64,
    pub pass_attempts: usize,
    pub rush_attempts: usize,
}

/// Mean EPA per pass attempt and per rush for every offense.
pub fn team_strengths(plays: &[AnnotatedPlay]) -> Result<BTreeMap<String, TeamStrength>> {
    let mut acc: BTreeMap<String, (f64, usize, f64, usize)> = BTreeMap::new();
    for a in plays {
        let e = acc.entry(a.play.posteam.clone()).or_default();
        match a.play.play_type {
            PlayType::Pass => {
                e.0 += a.value.epa;
                e.1 += 1;
            }
            PlayType::Rush => {
                e.2 += a.value.epa;
                e.3 += 1;
            }
            _ => {}
        }
    }
    let mut out = BTreeMap::new();
    for (team, (ps, pn, rs, rn)) in acc {
        if pn == 0 || rn == 0 {
            return Err(CoreError::Data(format!(
                "team {team} has {pn} pass attempts and {rn} rushes; strengths need both"
            )));
        }
        out.insert(
            team,
            TeamStrength { pass: ps / pn as f64, rush: rs / rn as f64, pass_attempts: pn, rush_attempts: rn },
        );
    }
    Ok(out)
}

/// `TEAM-direction-gap`; a missing gap or a middle run is `middle-center`.
pub fn side_gap(team: &str, direction: Option<Direction>, gap: Option<RunGap>) -> String {
    let side = match (direction, gap) {
        (Some(Direction::Left), Some(g @ (RunGap::End | RunGap::Tackle | RunGap::Guard))) => format!("left-{}", gap_label(g)),
        (Some(Direction::Right), Some(g @ (RunGap::End | RunGap::Tackle | RunGap::Guard))) => format!("right-{}", gap_label(g)),
        _ => "middle-center".to_string(),
    };
    format!("{team}-{side}")
}

fn gap_label(g: RunGap) -> &'static str {
    match g {
        RunGap::End => "end",
        RunGap::Tackle => "tackle",
        RunGap::Guard => "guard",
        RunGap::Middle => "center",
    }
}

pub const SIDE_GAPS: [&str; 7] =
    ["left-end", "left-tackle", "left-guard", "middle-center", "right-guard", "right-tackle", "right-end"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreditRow {
    pub game_id: String,
    pub play_id: u64,
    pub posteam: String,
    pub response: f64,
    pub covariates: Vec<f64>,
    /// Member per factor after replacement relabelling.
    pub members: Vec<String>,
    /// Member per factor before relabelling.
    pub raw: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreditDataset {
    pub model: CreditModel,
    pub scale: String,
    pub rows: Vec<CreditRow>,
}

#[derive(Debug, Clone, Default)]
pub struct CreditData {
    pub datasets: Vec<CreditDataset>,
    pub diagnostics: Vec<String>,
}

impl CreditData {
    pub fn get(&self, m: CreditModel) -> &CreditDataset {
        self.datasets.iter().find(|d| d.model == m).expect("all four datasets are built")
    }
}

fn b(x: bool) -> f64 {
    if x {
        1.0
    } else {
        0.0
    }
}

enum Rush<'a> {
    Qb(&'a str),
    NonQb(&'a str),
}

/// Quarterbacks among the players in `plays`: roster quarterbacks, plus
/// players who threw a pass and have no roster position.
pub fn qb_set(plays: &[Play], rosters: &Rosters) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for p in plays {
        if let Some(id) = &p.passer {
            if matches!(rosters.position(p.season, id), None | Some(Position::QB)) {
                out.insert(id.clone());
            }
        }
        if let Some(id) = &p.rusher {
            if rosters.position(p.season, id) == Some(Position::QB) {
                out.insert(id.clone());
            }
        }
    }
    out
}

fn classify_rush<'a>(p: &'a Play, qbs: &BTreeSet<String>) -> Option<Rush<'a>> {
    match p.play_type {
        PlayType::Sack => p.passer.as_deref().or(p.rusher.as_deref()).map(Rush::Qb),
        PlayType::Rush => {
            let r = p.rusher.as_deref().or(if p.qb_scramble { p.passer.as_deref() } else { None })?;
            let is_qb = p.qb_scramble || qbs.contains(r);
            Some(if is_qb { Rush::Qb(r) } else { Rush::NonQb(r) })
        }
        _ => None,
    }
}

/// Builds the four credit datasets for one scale. Rows are in
/// `(game_id, play_id)` order.
pub fn build_credit_datasets(
    plays: &[AnnotatedPlay],
    rosters: &Rosters,
    replacement: &ReplacementMap,
    scale: Scale,
) -> Result<CreditData> {
    let mut sorted = plays.to_vec();
    sorted.sort_by(|a, b| (&a.play.game_id, a.play.play_id).cmp(&(&b.play.game_id, b.play.play_id)));
    let strengths = team_strengths(&sorted)?;
    let raw: Vec<Play> = sorted.iter().map(|a| a.play.clone()).collect();
    let qbs = qb_set(&raw, rosters);
    let order: Vec<&AnnotatedPlay> = sorted.iter().collect();

    let mut unknown = BTreeSet::new();
    let mut position = |p: &Play, id: &str| -> Option<Position> {
        let pos = rosters.position(p.season, id);
        if pos.is_none() {
            unknown.insert(id.to_string());
        }
        pos
    };
    let mut rows: BTreeMap<CreditModel, Vec<CreditRow>> = CreditModel::ALL.iter().map(|&m| (m, Vec::new())).collect();
    let mut skipped_no_air = 0usize;
    for a in order {
        let p = &a.play;
        let st = &strengths[&p.posteam];
        let base = |response: f64, covariates: Vec<f64>, members: Vec<String>, raw: Vec<String>| CreditRow {
            game_id: p.game_id.clone(),
            play_id: p.play_id,
            posteam: p.posteam.clone(),
            response,
            covariates,
            members,
            raw,
        };
        if p.play_type == PlayType::Pass {
            let (Some(qb), Some(rec)) = (p.passer.as_deref(), p.receiver.as_deref()) else { continue };
            let rp = position(p, rec);
            let loc = p.pass_location;
            let (te, fb, rb) = (b(rp == Some(Position::TE)), b(rp == Some(Position::FB)), b(rp == Some(Position::RB)));
            let pass_cov = vec![
                b(p.home_posteam()),
                b(p.shotgun),
                b(p.no_huddle),
                b(p.qb_hit),
                b(loc == Some(Direction::Middle)),
                b(loc == Some(Direction::Right)),
                te,
                fb,
                rb,
                st.rush,
            ];
            let members = vec![
                replacement.passer_label(qb).to_string(),
                replacement.receiver_label(rec).to_string(),
                p.defteam.clone(),
            ];
            let ids = vec![qb.to_string(), rec.to_string(), p.defteam.clone()];
            match a.value.delta_air(p, scale) {
                Some(r) => rows
                    .get_mut(&CreditModel::PassAir)
                    .unwrap()
                    .push(base(r, pass_cov.clone(), members.clone(), ids.clone())),
                None => {
                    skipped_no_air += 1;
                    continue;
                }
            }
            if let (Some(air), Some(r)) = (p.air_yards, a.value.delta_yac(p, scale)) {
                let ay = f64::from(air);
                let mut cov = pass_cov;
                cov.extend([ay, ay * te, ay * fb, ay * rb]);
                rows.get_mut(&CreditModel::PassYac).unwrap().push(base(r, cov, members, ids));
            }
            continue;
        }
        match classify_rush(p, &qbs) {
            Some(Rush::Qb(qb)) => {
                let cov = vec![b(p.home_posteam()), b(p.shotgun), b(p.no_huddle), st.pass];
                let members = vec![replacement.passer_label(qb).to_string(), p.defteam.clone()];
                let ids = vec![qb.to_string(), p.defteam.clone()];
                rows.get_mut(&CreditModel::QbRush).unwrap().push(base(a.value.delta(scale), cov, members, ids));
            }
            Some(Rush::NonQb(r)) => {
                let rp = position(p, r);
                let cov = vec![
                    b(p.home_posteam()),
                    b(p.shotgun),
                    b(p.no_huddle),
                    b(rp == Some(Position::FB)),
                    b(rp == Some(Position::WR)),
                    b(rp == Some(Position::TE)),
                    st.pass,
                ];
                let gap = side_gap(&p.posteam, p.run_direction, p.run_gap);
                let members = vec![replacement.rusher_label(r).to_string(), gap.clone(), p.defteam.clone()];
                let ids = vec![r.to_string(), gap, p.defteam.clone()];
                rows.get_mut(&CreditModel::NonQbRush).unwrap().push(base(a.value.delta(scale), cov, members, ids));
            }
            None => {}
        }
    }
    let mut diagnostics = Vec::new();
    if !unknown.is_empty() {
        diagnostics.push(format!(
            "{} players have no roster position: {}",
            unknown.len(),
            unknown.iter().take(10).cloned().collect::<Vec<_>>().join(", ")
        ));
    }
    if skipped_no_air > 0 {
        diagnostics.push(format!("{skipped_no_air} completions without air yards left out of the passing models"));
    }
    Ok(CreditData {
        datasets: rows
            .into_iter()
            .map(|(model, rows)| CreditDataset { model, scale: scale.label().into(), rows })
            .collect(),
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreditFit {
    pub model: CreditModel,
    pub scale: String,
    pub fit: VaryingInterceptFit,
    /// Covariates dropped as constant or collinear.
    pub dropped: Vec<String>,
    pub n_rows: usize,
}

impl CreditFit {
    /// Intercept of `member` in `factor`; 0 for members the fit never saw.
    pub fn ipa(&self, factor: &str, member: &str) -> f64 {
        self.fit.factor(factor).and_then(|f| f.intercept(member)).unwrap_or(0.0)
    }
}

/// Fits one credit model.
pub fn fit_credit(data: &CreditDataset, opts: &MixedOptions) -> Result<CreditFit> {
    let m = data.model;
    let n = data.rows.len();
    let ctx = format!("{} credit model ({})", m.label(), data.scale);
    if n == 0 {
        return Err(CoreError::Data(format!("{ctx}: no plays")));
    }
    let names = m.covariates();
    let mut cols = vec![("(intercept)".to_string(), vec![1.0; n])];
    for (j, name) in names.iter().enumerate() {
        cols.push((name.to_string(), data.rows.iter().map(|r| r.covariates[j]).collect()));
    }
    let full = DesignMatrix::from_columns(cols.clone()).map_err(|e| CoreError::numerics(ctx.clone(), e))?;
    let dropped = full.collinear_columns(&vec![1.0; n]);
    if dropped.iter().any(|d| d == "(intercept)") {
        return Err(CoreError::Data(format!("{ctx}: empty design")));
    }
    for d in &dropped {
        log::info!("{ctx}: covariate {d} is constant or collinear and was dropped");
    }
    cols.retain(|(nm, _)| !dropped.contains(nm));
    let x = DesignMatrix::from_columns(cols).map_err(|e| CoreError::numerics(ctx.clone(), e))?;
    let groups: Vec<GroupFactor> = m
        .factors()
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let labels: Vec<&str> = data.rows.iter().map(|r| r.members[k].as_str()).collect();
            let mut g = GroupFactor::from_labels(f, &labels);
            for extra in m.replacement_levels(f) {
                if !g.levels.iter().any(|l| l == extra) {
                    g.levels.push(extra.to_string());
                }
            }
            g
        })
        .collect();
    let y: Vec<f64> = data.rows.iter().map(|r| r.response).collect();
    let fit = fit_varying_intercepts(&y, &x, &groups, &vec![1.0; n], opts).map_err(|e| CoreError::numerics(ctx, e))?;
    Ok(CreditFit { model: m, scale: data.scale.clone(), fit, dropped, n_rows: n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberEffect {
    pub model: String,
    pub scale: String,
    pub factor: String,
    pub member: String,
    pub n: usize,
    pub intercept: f64,
}

pub fn member_effects(fit: &CreditFit) -> Vec<MemberEffect> {
    fit.fit
        .factors
        .iter()
        .flat_map(|f| {
            f.levels.iter().zip(&f.intercepts).zip(&f.counts).map(move |((l, &v), &n)| MemberEffect {
                model: fit.model.label().into(),
                scale: fit.scale.clone(),
                factor: f.factor.clone(),
                member: l.clone(),
                n,
                intercept: v,
            })
        })
        .collect()
}
