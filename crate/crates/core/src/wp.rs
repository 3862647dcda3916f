//! Win probability: an additive logit model in expected score differential
//! and clock, with no team identities.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use gridiron_numerics::{fit_gam_logit, logistic, FactorCodes, GamFit, GamOptions, GamTerm};

use crate::calibration::{calibration, CalibrationReport};
use crate::constants::UNDER_TWO_MINUTES;
use crate::error::{CoreError, Result};
use crate::league::Games;
use crate::pbp::{Half, Play};

/// Overtime plays needed before overtime gets its own clock smooth.
pub const MIN_OVERTIME_PLAYS: usize = 200;

/// Bound on the linear predictor so predictions never round to 0 or 1.
const MAX_LOGIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WpFeatures {
    pub exp_score_diff: f64,
    pub seconds_game: f64,
    pub exp_score_time_ratio: f64,
    pub half: Half,
    pub seconds_half: f64,
    pub utm: bool,
    pub timeouts_off: u8,
    pub timeouts_def: u8,
}

impl WpFeatures {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ep: f64,
        score_differential: i32,
        seconds_game: f64,
        half: Half,
        seconds_half: f64,
        timeouts_off: u8,
        timeouts_def: u8,
    ) -> Self {
        let es = ep + f64::from(score_differential);
        Self {
            exp_score_diff: es,
            seconds_game,
            exp_score_time_ratio: es / (seconds_game + 1.0),
            half,
            seconds_half,
            utm: seconds_half < UNDER_TWO_MINUTES,
            timeouts_off,
            timeouts_def,
        }
    }

    /// Same state seen from the other team.
    pub fn mirrored(&self) -> Self {
        Self {
            exp_score_diff: -self.exp_score_diff,
            exp_score_time_ratio: -self.exp_score_time_ratio,
            timeouts_off: self.timeouts_def,
            timeouts_def: self.timeouts_off,
            ..*self
        }
    }
}

/// Features of a play given its pre-snap EP.
pub fn encode_wp_features(play: &Play, ep: f64) -> WpFeatures {
    WpFeatures::new(
        ep,
        play.score_differential,
        play.seconds_remaining_game,
        play.half,
        play.seconds_remaining_half,
        play.timeouts_off,
        play.timeouts_def,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WpRow {
    pub game_id: String,
    pub play_id: u64,
    pub season: i32,
    pub quarter: u8,
    pub features: WpFeatures,
    pub won: bool,
}

/// Training rows: plays with a down (kneels included), labelled from the
/// games file. Tied games and games missing from the file are dropped.
pub fn wp_rows(plays: &[Play], ep: &[f64], games: &Games) -> (Vec<WpRow>, Vec<String>) {
    assert_eq!(plays.len(), ep.len(), "one EP per play");
    let mut diagnostics = Vec::new();
    let mut missing = std::collections::BTreeSet::new();
    let mut ties = std::collections::BTreeSet::new();
    let mut rows = Vec::new();
    for (p, &e) in plays.iter().zip(ep) {
        if p.down.is_none() {
            continue;
        }
        let Some(g) = games.get(&p.game_id) else {
            missing.insert(p.game_id.clone());
            continue;
        };
        if g.is_tie() {
            ties.insert(p.game_id.clone());
            continue;
        }
        let Some(r) = g.result_for(&p.posteam) else {
            missing.insert(p.game_id.clone());
            continue;
        };
        rows.push(WpRow {
            game_id: p.game_id.clone(),
            play_id: p.play_id,
            season: p.season,
            quarter: p.quarter,
            features: encode_wp_features(p, e),
            won: r == 1.0,
        });
    }
    if !missing.is_empty() {
        diagnostics.push(format!("{} games without a usable result were skipped", missing.len()));
    }
    if !ties.is_empty() {
        diagnostics.push(format!("{} tied games were dropped from win-probability fitting", ties.len()));
    }
    (rows, diagnostics)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WpModel {
    pub gam: GamFit,
    /// Half levels with their own clock smooth; overtime may be folded into
    /// the second half when it has too little data.
    pub levels: Vec<String>,
    pub overtime_merged: bool,
    pub n_train: usize,
    pub seasons: Vec<i32>,
}

fn level_of(half: Half, merged: bool) -> usize {
    match half {
        Half::First => 0,
        Half::Second => 1,
        Half::Overtime if merged => 1,
        Half::Overtime => 2,
    }
}

fn linear_names(n_levels: usize) -> Vec<String> {
    let labels = ["h1", "h2", "hOT"];
    let mut names = Vec::new();
    for l in &labels[1..n_levels] {
        names.push(format!("half_{l}"));
    }
    for l in &labels[..n_levels] {
        names.push(format!("utm_timeouts_off_{l}"));
    }
    for l in &labels[..n_levels] {
        names.push(format!("utm_timeouts_def_{l}"));
    }
    names
}

fn linear_values(f: &WpFeatures, level: usize, n_levels: usize) -> Vec<f64> {
    let u = if f.utm { 1.0 } else { 0.0 };
    let mut v = Vec::with_capacity(3 * n_levels - 1);
    for l in 1..n_levels {
        v.push(if level == l { 1.0 } else { 0.0 });
    }
    for l in 0..n_levels {
        v.push(if level == l { u * f64::from(f.timeouts_off) } else { 0.0 });
    }
    for l in 0..n_levels {
        v.push(if level == l { u * f64::from(f.timeouts_def) } else { 0.0 });
    }
    v
}

/// Fits the additive logit model
/// `s(E[S]) + s(s_h)·h + s(E[S]/(s_g+1)) + h·u·t_off + h·u·t_def`.
pub fn fit_wp(rows: &[WpRow], opts: &GamOptions) -> Result<WpModel> {
    if rows.is_empty() {
        return Err(CoreError::Data("no plays to fit the win-probability model".into()));
    }
    let mut rows: Vec<&WpRow> = rows.iter().collect();
    rows.sort_by(|a, b| (&a.game_id, a.play_id).cmp(&(&b.game_id, b.play_id)));
    let n_ot = rows.iter().filter(|r| r.features.half == Half::Overtime).count();
    let merged = n_ot < MIN_OVERTIME_PLAYS;
    if merged && n_ot > 0 {
        log::warn!("{n_ot} overtime plays: overtime shares the second-half clock terms");
    }
    let n_levels = if merged { 2 } else { 3 };
    let levels: Vec<String> = ["1", "2", "OT"][..n_levels].iter().map(|s| s.to_string()).collect();
    let codes: Vec<usize> = rows.iter().map(|r| level_of(r.features.half, merged)).collect();
    let mut terms = vec![
        GamTerm::Smooth {
            name: "exp_score_diff".into(),
            values: rows.iter().map(|r| r.features.exp_score_diff).collect(),
            by: None,
        },
        GamTerm::Smooth {
            name: "seconds_half".into(),
            values: rows.iter().map(|r| r.features.seconds_half).collect(),
            by: Some(FactorCodes { name: "half".into(), levels: levels.clone(), codes: codes.clone() }),
        },
        GamTerm::Smooth {
            name: "exp_score_time_ratio".into(),
            values: rows.iter().map(|r| r.features.exp_score_time_ratio).collect(),
            by: None,
        },
    ];
    let lin: Vec<Vec<f64>> = rows
        .iter()
        .zip(&codes)
        .map(|(r, &c)| linear_values(&r.features, c, n_levels))
        .collect();
    for (j, name) in linear_names(n_levels).into_iter().enumerate() {
        terms.push(GamTerm::Linear { name, values: lin.iter().map(|v| v[j]).collect() });
    }
    let y: Vec<f64> = rows.iter().map(|r| if r.won { 1.0 } else { 0.0 }).collect();
    let gam = fit_gam_logit(&terms, &y, &vec![1.0; y.len()], opts)
        .map_err(|e| CoreError::numerics("win-probability model", e))?;
    for d in &gam.dropped {
        log::warn!("win-probability term {d} is constant or collinear and was dropped");
    }
    let mut seasons: Vec<i32> = rows.iter().map(|r| r.season).collect();
    seasons.sort_unstable();
    seasons.dedup();
    Ok(WpModel { gam, levels, overtime_merged: merged, n_train: rows.len(), seasons })
}

impl WpModel {
    pub fn linear_predictor(&self, f: &WpFeatures) -> f64 {
        let n_levels = self.levels.len();
        let level = level_of(f.half, self.overtime_merged);
        let names = linear_names(n_levels);
        let values = linear_values(f, level, n_levels);
        let mut eta = self.gam.intercept;
        for (name, coef) in &self.gam.linear {
            if let Some(j) = names.iter().position(|n| n == name) {
                eta += coef * values[j];
            }
        }
        let s = |name: &str, lvl: Option<usize>, x: f64| self.gam.smooth(name, lvl).map_or(0.0, |s| s.smoother.value(x));
        eta += s("exp_score_diff", None, f.exp_score_diff);
        eta += s("seconds_half", Some(level), f.seconds_half);
        eta += s("exp_score_time_ratio", None, f.exp_score_time_ratio);
        eta
    }

    /// Win probability, kept strictly inside (0, 1).
    pub fn predict(&self, f: &WpFeatures) -> f64 {
        logistic(self.linear_predictor(f).clamp(-MAX_LOGIT, MAX_LOGIT))
    }
}

/// Held-out predictions for every row, one fold per season.
pub fn loso_wp(rows: &[WpRow], opts: &GamOptions) -> Result<Vec<f64>> {
    let mut seasons: Vec<i32> = rows.iter().map(|r| r.season).collect();
    seasons.sort_unstable();
    seasons.dedup();
    if seasons.len() < 2 {
        return Err(CoreError::Validation("leave-one-season-out needs at least two seasons".into()));
    }
    let models: Vec<Result<(i32, WpModel)>> = seasons
        .par_iter()
        .map(|&s| {
            let train: Vec<WpRow> = rows.iter().filter(|r| r.season != s).cloned().collect();
            Ok((s, fit_wp(&train, opts)?))
        })
        .collect();
    let mut by_season = BTreeMap::new();
    for m in models {
        let (s, model) = m?;
        by_season.insert(s, model);
    }
    Ok(rows.iter().map(|r| by_season[&r.season].predict(&r.features)).collect())
}

/// Binary calibration of win predictions, one report per quarter.
pub fn wp_calibration_by_quarter(predictions: &[f64], rows: &[WpRow]) -> Vec<(u8, CalibrationReport)> {
    assert_eq!(predictions.len(), rows.len(), "rows must align");
    let mut quarters: Vec<u8> = rows.iter().map(|r| r.quarter).collect();
    quarters.sort_unstable();
    quarters.dedup();
    quarters
        .into_iter()
        .map(|q| {
            let (p, a): (Vec<Vec<f64>>, Vec<usize>) = predictions
                .iter()
                .zip(rows)
                .filter(|(_, r)| r.quarter == q)
                .map(|(&p, r)| (vec![p], usize::from(!r.won)))
                .unzip();
            (q, calibration(&p, &a, &["win"]))
        })
        .collect()
}
