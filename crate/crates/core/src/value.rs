//! Play values: EPA and WPA, with the air/YAC split for completed passes.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::INCOMPLETE_PASS_SECONDS;
use crate::ep::{play_ep, EpModel, KickModel};
use crate::error::{CoreError, Result};
use crate::league::Games;
use crate::pbp::{game_runs, Play, PlayType, ScoreKind};
use crate::state::State;
use crate::wp::{encode_wp_features, WpFeatures, WpModel};

/// Values of one play, all from the point of view of its possession team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayValue {
    pub ep: f64,
    pub wp: f64,
    pub ep_final: f64,
    pub wp_final: f64,
    pub epa: f64,
    pub wpa: f64,
    pub epa_air: Option<f64>,
    pub epa_yac: Option<f64>,
    pub wpa_air: Option<f64>,
    pub wpa_yac: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Epa,
    Wpa,
}

impl Scale {
    pub fn label(self) -> &'static str {
        match self {
            Scale::Epa => "epa",
            Scale::Wpa => "wpa",
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epa" => Ok(Scale::Epa),
            "wpa" => Ok(Scale::Wpa),
            _ => Err(CoreError::Validation(format!("unknown scale `{s}` (expected epa or wpa)"))),
        }
    }
}

impl PlayValue {
    pub fn delta(&self, scale: Scale) -> f64 {
        match scale {
            Scale::Epa => self.epa,
            Scale::Wpa => self.wpa,
        }
    }

    fn split(&self, scale: Scale) -> (Option<f64>, Option<f64>) {
        match scale {
            Scale::Epa => (self.epa_air, self.epa_yac),
            Scale::Wpa => (self.wpa_air, self.wpa_yac),
        }
    }

    /// Air response: the air part on completions, the whole value otherwise.
    pub fn delta_air(&self, play: &Play, scale: Scale) -> Option<f64> {
        if play.play_type != PlayType::Pass {
            return None;
        }
        if play.complete_pass {
            self.split(scale).0
        } else {
            Some(self.delta(scale))
        }
    }

    /// After-catch response, with the same convention as [`delta_air`](Self::delta_air).
    pub fn delta_yac(&self, play: &Play, scale: Scale) -> Option<f64> {
        if play.play_type != PlayType::Pass {
            return None;
        }
        if play.complete_pass {
            self.split(scale).1
        } else {
            Some(self.delta(scale))
        }
    }
}

pub fn play_delta(v_i: f64, v_f: f64) -> f64 {
    v_f - v_i
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedPlay {
    pub play: Play,
    pub value: PlayValue,
}

pub struct Models<'a> {
    pub ep: &'a EpModel,
    pub kick: &'a KickModel,
    pub wp: &'a WpModel,
}

impl Models<'_> {
    fn wp_state(&self, s: &State, ep: f64) -> f64 {
        self.wp.predict(&WpFeatures::new(
            ep,
            s.score_differential,
            s.seconds_game,
            s.half,
            s.seconds_half,
            s.timeouts_off,
            s.timeouts_def,
        ))
    }
}

/// Catch-point values `(EP, WP)` of a completed pass, or `None` without air yards.
pub fn catch_point_values(models: &Models<'_>, play: &Play, diagnostics: &mut Vec<String>) -> Option<(f64, f64)> {
    let air = play.air_yards?;
    let s = State::from_play(play)?.charge(INCOMPLETE_PASS_SECONDS);
    let raw = i64::from(s.yardline) - i64::from(air);
    let spot = raw.clamp(0, 99);
    if spot != raw {
        diagnostics.push(format!(
            "game {} play {}: catch point {raw} yards from the end zone clamped to {spot}",
            play.game_id, play.play_id
        ));
    }
    let spot = spot as u32;
    let gained_first = i64::from(air) >= i64::from(s.yards_to_go);
    if !gained_first && s.down == 4 {
        // Short of the sticks on fourth down: the opponent would take over.
        let opp = s.opponent_first_down(100 - spot);
        let ep_o = models.ep.ep_state(&opp);
        let wp_o = models.wp_state(&opp, ep_o);
        return Some((-ep_o, 1.0 - wp_o));
    }
    let c = if gained_first {
        State { down: 1, yards_to_go: 10.min(spot.max(1)), yardline: spot, ..s }
    } else {
        let ytg = (i64::from(s.yards_to_go) - i64::from(air)).max(1) as u32;
        State { down: s.down + 1, yards_to_go: ytg, yardline: spot, ..s }
    };
    let ep_c = models.ep.ep_state(&c);
    Some((ep_c, models.wp_state(&c, ep_c)))
}

fn scoring_value(play: &Play, td_points: f64) -> Option<f64> {
    let (team, kind) = play.score()?;
    let pts = match kind {
        ScoreKind::Touchdown => td_points,
        ScoreKind::FieldGoal => 3.0,
        ScoreKind::Safety => 2.0,
    };
    Some(if team == play.posteam { pts } else { -pts })
}

fn signed(from: &Play, to: &Play, v: f64, flip: impl Fn(f64) -> f64) -> f64 {
    if from.posteam == to.posteam {
        v
    } else {
        flip(v)
    }
}

fn annotate_game(models: &Models<'_>, game: &[Play], games: &Games) -> Result<(Vec<Option<PlayValue>>, Vec<String>)> {
    let mut diagnostics = Vec::new();
    let mut pre: Vec<Option<(f64, f64)>> = Vec::with_capacity(game.len());
    for p in game {
        if !p.is_valued() {
            pre.push(None);
            continue;
        }
        let ep = play_ep(models.ep, models.kick, p)?;
        let wp = models.wp.predict(&encode_wp_features(p, ep));
        pre.push(Some((ep, wp)));
    }
    let result = games.get(&game[0].game_id);
    let mut out = vec![None; game.len()];
    for i in 0..game.len() {
        let Some((ep_i, wp_i)) = pre[i] else { continue };
        let p = &game[i];
        let next = (i + 1..game.len()).find(|&j| pre[j].is_some());
        let same_scope = next.filter(|&j| game[j].half == p.half);

        let ep_f = if let Some(pts) = p.pat_points() {
            pts
        } else if let Some(v) = scoring_value(p, models.ep.touchdown_points) {
            v
        } else if let Some(j) = same_scope {
            signed(p, &game[j], pre[j].unwrap().0, |v| -v)
        } else {
            0.0
        };
        let wp_f = match next {
            Some(j) => signed(p, &game[j], pre[j].unwrap().1, |v| 1.0 - v),
            None => match result.and_then(|g| g.result_for(&p.posteam)) {
                Some(r) => r,
                None => {
                    diagnostics.push(format!("game {}: no final result; last play has WPA 0", p.game_id));
                    wp_i
                }
            },
        };

        let mut v = PlayValue {
            ep: ep_i,
            wp: wp_i,
            ep_final: ep_f,
            wp_final: wp_f,
            epa: play_delta(ep_i, ep_f),
            wpa: play_delta(wp_i, wp_f),
            epa_air: None,
            epa_yac: None,
            wpa_air: None,
            wpa_yac: None,
        };
        if p.play_type == PlayType::Pass && p.complete_pass {
            match catch_point_values(models, p, &mut diagnostics) {
                Some((ep_c, wp_c)) => {
                    v.epa_air = Some(ep_c - ep_i);
                    v.epa_yac = Some(ep_f - ep_c);
                    v.wpa_air = Some(wp_c - wp_i);
                    v.wpa_yac = Some(wp_f - wp_c);
                }
                None => diagnostics.push(format!(
                    "game {} play {}: completion without air yards is not split",
                    p.game_id, p.play_id
                )),
            }
        }
        out[i] = Some(v);
    }
    Ok((out, diagnostics))
}

#[derive(Debug, Clone, Default)]
pub struct Annotation {
    pub plays: Vec<AnnotatedPlay>,
    pub diagnostics: Vec<String>,
}

/// Values every valued play. Games are processed in parallel; output keeps
/// the input order.
pub fn annotate_values(plays: &[Play], models: &Models<'_>, games: &Games) -> Result<Annotation> {
    let runs = game_runs(plays)?;
    let per_game: Vec<Result<(Vec<Option<PlayValue>>, Vec<String>)>> = runs
        .par_iter()
        .map(|r| annotate_game(models, &plays[r.clone()], games))
        .collect();
    let mut out = Annotation::default();
    for (r, g) in runs.iter().zip(per_game) {
        let (values, diag) = g?;
        out.diagnostics.extend(diag);
        for (p, v) in plays[r.clone()].iter().zip(values) {
            if let Some(value) = v {
                out.plays.push(AnnotatedPlay { play: p.clone(), value });
            }
        }
    }
    Ok(out)
}

pub fn write_annotated<W: Write>(sink: W, plays: &[AnnotatedPlay]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for a in plays {
        w.serialize((&a.play, &a.value))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_annotated<R: Read>(source: R) -> Result<Vec<AnnotatedPlay>> {
    let mut rdr = csv::Reader::from_reader(source);
    let headers = rdr.headers()?.clone();
    let split = headers
        .iter()
        .position(|h| h == "ep")
        .ok_or_else(|| CoreError::Schema("annotated file has no `ep` column".into()))?;
    let ph: csv::StringRecord = headers.iter().take(split).collect();
    let vh: csv::StringRecord = headers.iter().skip(split).collect();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let pr: csv::StringRecord = rec.iter().take(split).collect();
        let vr: csv::StringRecord = rec.iter().skip(split).collect();
        out.push(AnnotatedPlay { play: pr.deserialize(Some(&ph))?, value: vr.deserialize(Some(&vh))? });
    }
    Ok(out)
}

/// Pre-snap EP per play, 0 for plays without a valued state.
pub fn pre_snap_ep(plays: &[Play], ep: &EpModel, kick: &KickModel) -> Result<Vec<f64>> {
    plays.par_iter().map(|p| if p.is_valued() { play_ep(ep, kick, p) } else { Ok(0.0) }).collect()
}
