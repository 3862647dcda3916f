//! Report tables: leaderboards, scatter data, line summaries, WP charts and
//! season-to-season stability of player metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::credit::{MemberEffect, SIDE_GAPS};
use crate::error::{CoreError, Result};
use crate::pbp::PlayType;
use crate::value::AnnotatedPlay;
use crate::war::{PlayerSeasonValue, WarDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderRow {
    pub season: i32,
    pub position: String,
    pub rank: usize,
    pub player_id: String,
    pub name: String,
    pub team: String,
    pub war: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub war_q025: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub war_q975: Option<f64>,
}

/// Top `n` players by WAR at each position. Interval columns are filled
/// when simulation distributions are given.
pub fn top_by_position(players: &[PlayerSeasonValue], n: usize, dists: Option<&[WarDistribution]>) -> Vec<LeaderRow> {
    let mut by_pos: BTreeMap<&str, Vec<&PlayerSeasonValue>> = BTreeMap::new();
    for p in players {
        by_pos.entry(&p.position).or_default().push(p);
    }
    let mut out = Vec::new();
    for (pos, mut v) in by_pos {
        v.sort_by(|a, b| b.war.total_cmp(&a.war).then_with(|| a.player_id.cmp(&b.player_id)));
        for (i, p) in v.into_iter().take(n).enumerate() {
            let d = dists.and_then(|ds| ds.iter().find(|d| d.player_id == p.player_id));
            out.push(LeaderRow {
                season: p.season,
                position: pos.to_string(),
                rank: i + 1,
                player_id: p.player_id.clone(),
                name: p.name.clone(),
                team: p.team.clone(),
                war: p.war,
                war_q025: d.map(|d| d.q025),
                war_q975: d.map(|d| d.q975),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub season: i32,
    pub player_id: String,
    pub name: String,
    pub position: String,
    pub replacement: bool,
    pub kappa_pass: usize,
    pub kappa_rush: usize,
    pub ipa_air: f64,
    pub ipa_yac: f64,
    pub ipa_rush: f64,
    pub war: f64,
}

pub fn ipa_scatter(players: &[PlayerSeasonValue]) -> Vec<ScatterRow> {
    players
        .iter()
        .map(|p| ScatterRow {
            season: p.season,
            player_id: p.player_id.clone(),
            name: p.name.clone(),
            position: p.position.clone(),
            replacement: p.replacement,
            kappa_pass: p.kappa_pass,
            kappa_rush: p.kappa_rush,
            ipa_air: p.ipa.air,
            ipa_yac: p.ipa.yac,
            ipa_rush: p.ipa.rush,
            war: p.war,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRow {
    pub team: String,
    pub gap: String,
    pub plays: usize,
    pub ipa: f64,
}

/// Side-gap intercepts from credit-model member effects, one row per team
/// and gap, then one total row per team.
pub fn line_summary(effects: &[MemberEffect]) -> Vec<LineRow> {
    let mut out: Vec<LineRow> = effects
        .iter()
        .filter(|e| e.factor == "side_gap")
        .filter_map(|e| {
            let gap = SIDE_GAPS.iter().find(|g| e.member.ends_with(&format!("-{g}")))?;
            let team = &e.member[..e.member.len() - gap.len() - 1];
            Some(LineRow { team: team.to_string(), gap: gap.to_string(), plays: e.n, ipa: e.intercept })
        })
        .collect();
    let rank = |g: &str| SIDE_GAPS.iter().position(|s| *s == g).unwrap_or(usize::MAX);
    out.sort_by(|a, b| a.team.cmp(&b.team).then_with(|| rank(&a.gap).cmp(&rank(&b.gap))));
    let mut totals: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for r in &out {
        let t = totals.entry(r.team.clone()).or_default();
        t.0 += r.plays;
        t.1 += r.ipa;
    }
    out.extend(totals.into_iter().map(|(team, (plays, ipa))| LineRow { team, gap: "total".into(), plays, ipa }));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WpPoint {
    pub game_id: String,
    pub play_id: u64,
    pub quarter: u8,
    pub seconds_remaining_game: f64,
    pub home_team: String,
    pub away_team: String,
    pub home_wp: f64,
    pub home_wpa: f64,
}

/// Home-team win probability before every valued play of `game_id`.
pub fn wp_chart(plays: &[AnnotatedPlay], game_id: &str) -> Vec<WpPoint> {
    plays
        .iter()
        .filter(|a| a.play.game_id == game_id)
        .map(|a| {
            let home = a.play.home_posteam();
            WpPoint {
                game_id: a.play.game_id.clone(),
                play_id: a.play.play_id,
                quarter: a.play.quarter,
                seconds_remaining_game: a.play.seconds_remaining_game,
                home_team: a.play.home_team.clone(),
                away_team: a.play.away_team.clone(),
                home_wp: if home { a.value.wp } else { 1.0 - a.value.wp },
                home_wpa: if home { a.value.wpa } else { -a.value.wpa },
            }
        })
        .collect()
}

/// Conventional per-player statistics for one season.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConventionalStats {
    pub attempts: usize,
    pub completions: usize,
    pub pass_yards: i64,
    pub pass_touchdowns: usize,
    pub interceptions: usize,
    pub sacks: usize,
    pub sack_yards: i64,
    pub rushes: usize,
    pub rush_yards: i64,
    pub successful_rushes: usize,
}

impl ConventionalStats {
    /// Passer rating on the usual 0 to 158.3 scale.
    pub fn passer_rating(&self) -> Option<f64> {
        if self.attempts == 0 {
            return None;
        }
        let att = self.attempts as f64;
        let clamp = |v: f64| v.clamp(0.0, 2.375);
        let a = clamp((self.completions as f64 / att - 0.3) * 5.0);
        let b = clamp((self.pass_yards as f64 / att - 3.0) * 0.25);
        let c = clamp(self.pass_touchdowns as f64 / att * 20.0);
        let d = clamp(2.375 - self.interceptions as f64 / att * 25.0);
        Some((a + b + c + d) / 6.0 * 100.0)
    }

    /// Adjusted net yards per attempt.
    pub fn any_a(&self) -> Option<f64> {
        let n = self.attempts + self.sacks;
        if n == 0 {
            return None;
        }
        let y = self.pass_yards as f64 + 20.0 * self.pass_touchdowns as f64 - 45.0 * self.interceptions as f64
            - self.sack_yards as f64;
        Some(y / n as f64)
    }

    /// Share of rushes with positive EPA.
    pub fn success_rate(&self) -> Option<f64> {
        (self.rushes > 0).then(|| self.successful_rushes as f64 / self.rushes as f64)
    }

    pub fn yards_per_rush(&self) -> Option<f64> {
        (self.rushes > 0).then(|| self.rush_yards as f64 / self.rushes as f64)
    }
}

pub fn conventional_stats(plays: &[AnnotatedPlay]) -> BTreeMap<String, ConventionalStats> {
    let mut out: BTreeMap<String, ConventionalStats> = BTreeMap::new();
    for a in plays {
        let p = &a.play;
        let yards = i64::from(p.yards_gained.unwrap_or(0));
        match p.play_type {
            PlayType::Pass => {
                if let Some(id) = &p.passer {
                    let s = out.entry(id.clone()).or_default();
                    s.attempts += 1;
                    if p.complete_pass {
                        s.completions += 1;
                        s.pass_yards += yards;
                        if p.touchdown_team.as_deref() == Some(p.posteam.as_str()) {
                            s.pass_touchdowns += 1;
                        }
                    }
                    s.interceptions += usize::from(p.interception);
                }
            }
            PlayType::Sack => {
                if let Some(id) = p.passer.as_ref().or(p.rusher.as_ref()) {
                    let s = out.entry(id.clone()).or_default();
                    s.sacks += 1;
                    s.sack_yards += (-yards).max(0);
                }
            }
            PlayType::Rush => {
                let id = p.rusher.as_ref().or(if p.qb_scramble { p.passer.as_ref() } else { None });
                if let Some(id) = id {
                    let s = out.entry(id.clone()).or_default();
                    s.rushes += 1;
                    s.rush_yards += yards;
                    s.successful_rushes += usize::from(a.value.epa > 0.0);
                }
            }
            _ => {}
        }
    }
    out
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationRow {
    pub position: String,
    pub statistic: String,
    pub first_season: i32,
    pub second_season: i32,
    pub players: usize,
    pub correlation: Option<f64>,
}

/// One season's players with their conventional statistics.
pub struct SeasonTable<'a> {
    pub season: i32,
    pub players: &'a [PlayerSeasonValue],
    pub stats: &'a BTreeMap<String, ConventionalStats>,
}

type Stat = (&'static str, fn(&PlayerSeasonValue, &ConventionalStats) -> Option<f64>);

fn statistics(position: &str) -> Vec<Stat> {
    let mut v: Vec<Stat> = vec![("WAR", |p, _| Some(p.war)), ("iPAR", |p, _| Some(p.ipar_total))];
    match position {
        "QB" => {
            v.push(("Passer Rating", |_, s| s.passer_rating()));
            v.push(("ANY/A", |_, s| s.any_a()));
        }
        "RB" => {
            v.push(("Success Rate", |_, s| s.success_rate()));
            v.push(("Yards/Attempt", |_, s| s.yards_per_rush()));
        }
        _ => {}
    }
    v
}

/// Pearson correlation of each statistic between two seasons for players
/// (matched by id) who are above replacement level in both.
pub fn autocorrelation(a: &SeasonTable<'_>, b: &SeasonTable<'_>, position: &str) -> Result<Vec<AutocorrelationRow>> {
    let pick = |t: &SeasonTable<'_>| -> BTreeMap<String, PlayerSeasonValue> {
        t.players
            .iter()
            .filter(|p| p.position == position && !p.replacement)
            .map(|p| (p.player_id.clone(), p.clone()))
            .collect()
    };
    let (pa, pb) = (pick(a), pick(b));
    let matched: Vec<&String> = pa.keys().filter(|k| pb.contains_key(*k)).collect();
    if matched.len() < 3 {
        return Err(CoreError::Data(format!(
            "{position}: only {} players above replacement level in both {} and {}",
            matched.len(),
            a.season,
            b.season
        )));
    }
    let empty = ConventionalStats::default();
    let mut out = Vec::new();
    for (name, f) in statistics(position) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for id in &matched {
            let x = f(&pa[*id], a.stats.get(*id).unwrap_or(&empty));
            let y = f(&pb[*id], b.stats.get(*id).unwrap_or(&empty));
            if let (Some(x), Some(y)) = (x, y) {
                xs.push(x);
                ys.push(y);
            }
        }
        out.push(AutocorrelationRow {
            position: position.to_string(),
            statistic: name.to_string(),
            first_season: a.season,
            second_season: b.season,
            players: xs.len(),
            correlation: if xs.len() >= 3 { pearson(&xs, &ys) } else { None },
        });
    }
    Ok(out)
}
