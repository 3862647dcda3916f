//! Expected points: feature encoding, the seven-class next-score model,
//! kick models and the conversion/field-goal special cases.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use gridiron_numerics::{fit_gam_logit, fit_multinomial, logistic, GamOptions, GamTerm, MultinomialOptions};
use gridiron_numerics::{DesignMatrix, GamFit, MultinomialFit};

use crate::calibration::{calibration, CalibrationReport};
use crate::constants::{
    KICK_DISTANCE_OFFSET, MISSED_FG_SECONDS, MISSED_FG_YARDS, REFERENCE_TWO_POINT_RATE,
    TOUCHDOWN_POINTS, UNDER_TWO_MINUTES,
};
use crate::error::{CoreError, Result};
use crate::pbp::{compute_weights, KickResult, LabeledPlay, Play, PlayType, ScoringEvent};
use crate::state::State;

pub const FEATURE_NAMES: [&str; 16] = [
    "(intercept)",
    "down2",
    "down3",
    "down4",
    "seconds_in_half",
    "yardline",
    "log_ytg",
    "gtg",
    "utm",
    "log_ytg:down2",
    "log_ytg:down3",
    "log_ytg:down4",
    "yardline:down2",
    "yardline:down3",
    "yardline:down4",
    "log_ytg:gtg",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpFeatures {
    pub down: u8,
    pub seconds_in_half: f64,
    pub yardline: f64,
    pub log_ytg: f64,
    pub gtg: bool,
    pub utm: bool,
}

impl EpFeatures {
    pub fn from_state(s: &State) -> Self {
        Self {
            down: s.down,
            seconds_in_half: s.seconds_half,
            yardline: f64::from(s.yardline),
            log_ytg: f64::from(s.yards_to_go.max(1)).ln(),
            gtg: s.yardline <= s.yards_to_go,
            utm: s.seconds_half < UNDER_TWO_MINUTES,
        }
    }

    pub fn row(&self) -> [f64; 16] {
        let d = |k: u8| if self.down == k { 1.0 } else { 0.0 };
        let g = if self.gtg { 1.0 } else { 0.0 };
        [
            1.0,
            d(2),
            d(3),
            d(4),
            self.seconds_in_half,
            self.yardline,
            self.log_ytg,
            g,
            if self.utm { 1.0 } else { 0.0 },
            self.log_ytg * d(2),
            self.log_ytg * d(3),
            self.log_ytg * d(4),
            self.yardline * d(2),
            self.yardline * d(3),
            self.yardline * d(4),
            self.log_ytg * g,
        ]
    }
}

/// Encodes a play, or `None` when it has no down (kickoffs, conversions).
pub fn encode_ep_features(play: &Play) -> Option<EpFeatures> {
    State::from_play(play).map(|s| EpFeatures::from_state(&s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpModel {
    /// Classes with training data; absent classes get probability 0.
    pub present: Vec<ScoringEvent>,
    pub absent: Vec<ScoringEvent>,
    /// Single-class training data: that class gets probability 1 everywhere.
    pub saturated: bool,
    pub fit: Option<MultinomialFit>,
    pub touchdown_points: f64,
    pub seasons: Vec<i32>,
    pub n_train: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpOptions {
    pub touchdown_points: f64,
    pub multinomial: MultinomialOptions,
}

impl Default for EpOptions {
    fn default() -> Self {
        Self {
            touchdown_points: TOUCHDOWN_POINTS,
            multinomial: MultinomialOptions::default(),
        }
    }
}

/// Plays the EP model trains on: has a down, not a conversion, not a kneel.
pub fn is_ep_training(p: &Play) -> bool {
    p.down.is_some() && !p.play_type.is_pat() && p.play_type != PlayType::Kneel
}

/// Training subset with weights computed over it, in canonical order.
pub fn training_set(labeled: &[LabeledPlay]) -> Vec<LabeledPlay> {
    let mut t: Vec<LabeledPlay> = labeled.iter().filter(|l| is_ep_training(&l.play)).cloned().collect();
    t.sort_by(|a, b| (&a.play.game_id, a.play.play_id).cmp(&(&b.play.game_id, b.play.play_id)));
    compute_weights(&mut t);
    t
}

/// Fits the next-score model on plays whose weights are already set.
/// Rows are put in canonical `(game_id, play_id)` order first.
pub fn fit_ep(labeled: &[LabeledPlay], opts: &EpOptions) -> Result<EpModel> {
    let mut rows: Vec<&LabeledPlay> = labeled.iter().filter(|l| is_ep_training(&l.play)).collect();
    if rows.is_empty() {
        return Err(CoreError::Data("no plays to fit the expected-points model".into()));
    }
    rows.sort_by(|a, b| (&a.play.game_id, a.play.play_id).cmp(&(&b.play.game_id, b.play.play_id)));
    // A class whose rows all carry zero weight contributes nothing and is
    // treated as absent.
    let mut counts = [0.0f64; 7];
    for l in &rows {
        counts[l.next_score.index()] += l.weight;
    }
    rows.retain(|l| counts[l.next_score.index()] > 0.0);
    let present: Vec<ScoringEvent> = ScoringEvent::ALL.iter().copied().filter(|e| counts[e.index()] > 0.0).collect();
    let absent: Vec<ScoringEvent> = ScoringEvent::ALL.iter().copied().filter(|e| counts[e.index()] <= 0.0).collect();
    let mut seasons: Vec<i32> = rows.iter().map(|l| l.play.season).collect();
    seasons.sort_unstable();
    seasons.dedup();
    if !absent.is_empty() {
        log::warn!(
            "expected-points training data has no {}; those events get probability 0",
            absent.iter().map(|e| e.label()).collect::<Vec<_>>().join(", ")
        );
    }
    if present.len() == 1 {
        log::warn!("expected-points training data has a single event; the model is saturated");
        return Ok(EpModel {
            present,
            absent,
            saturated: true,
            fit: None,
            touchdown_points: opts.touchdown_points,
            seasons,
            n_train: rows.len(),
        });
    }
    let x = DesignMatrix::from_rows(
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        &rows
            .iter()
            .map(|l| encode_ep_features(&l.play).expect("training rows have a down").row().to_vec())
            .collect::<Vec<_>>(),
    )
    .map_err(|e| CoreError::numerics("expected-points design", e))?;
    let y: Vec<usize> = rows
        .iter()
        .map(|l| present.iter().position(|&e| e == l.next_score).expect("present"))
        .collect();
    let w: Vec<f64> = rows.iter().map(|l| l.weight).collect();
    let reference = present.iter().position(|&e| e == ScoringEvent::NoScore).unwrap_or(0);
    let fit = fit_multinomial(&x, &y, &w, present.len(), reference, &opts.multinomial)
        .map_err(|e| CoreError::numerics("expected-points model", e))?;
    Ok(EpModel {
        present,
        absent,
        saturated: false,
        fit: Some(fit),
        touchdown_points: opts.touchdown_points,
        seasons,
        n_train: rows.len(),
    })
}

impl EpModel {
    /// Probabilities of the seven events in canonical order.
    pub fn probabilities(&self, f: &EpFeatures) -> [f64; 7] {
        let mut out = [0.0; 7];
        match &self.fit {
            None => out[self.present[0].index()] = 1.0,
            Some(fit) => {
                let p = fit.predict_row(&f.row());
                for (e, v) in self.present.iter().zip(p) {
                    out[e.index()] = v;
                }
            }
        }
        out
    }

    pub fn ep_from_probabilities(&self, p: &[f64; 7]) -> f64 {
        ScoringEvent::ALL
            .iter()
            .zip(p)
            .map(|(e, &q)| q * e.points_with(self.touchdown_points))
            .sum()
    }

    pub fn ep_state(&self, s: &State) -> f64 {
        self.ep_from_probabilities(&self.probabilities(&EpFeatures::from_state(s)))
    }

    /// EP of an ordinary play; kneels are worth 0.
    pub fn expected_points(&self, play: &Play) -> Result<f64> {
        if play.play_type == PlayType::Kneel {
            return Ok(0.0);
        }
        let s = State::from_play(play).ok_or_else(|| {
            CoreError::Data(format!("play {} of game {} has no down", play.play_id, play.game_id))
        })?;
        Ok(self.ep_state(&s))
    }
}

// ---------------------------------------------------------------------------
// Kicks

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickModel {
    pub gam: GamFit,
    pub two_point_rate: f64,
    pub two_point_attempts: usize,
    pub n_attempts: usize,
}

/// Kick distance: recorded, else line of scrimmage plus the offset.
pub fn kick_distance(play: &Play) -> f64 {
    play.kick_distance
        .map(f64::from)
        .unwrap_or(f64::from(play.yardline) + KICK_DISTANCE_OFFSET)
}

pub fn is_kick_attempt(p: &Play) -> bool {
    matches!(p.play_type, PlayType::FieldGoal | PlayType::ExtraPoint)
}

/// Logistic spline of make probability in distance, plus the empirical
/// two-point success rate.
pub fn fit_kick_model(plays: &[Play], opts: &GamOptions) -> Result<KickModel> {
    let kicks: Vec<&Play> = plays.iter().filter(|p| is_kick_attempt(p)).collect();
    let made = |p: &Play| match p.play_type {
        PlayType::FieldGoal => p.field_goal_result == Some(KickResult::Made),
        _ => p.extra_point_result == Some(KickResult::Made),
    };
    let y: Vec<f64> = kicks.iter().map(|p| if made(p) { 1.0 } else { 0.0 }).collect();
    if !y.contains(&1.0) || !y.contains(&0.0) {
        return Err(CoreError::Data("kick model needs both makes and misses".into()));
    }
    let d: Vec<f64> = kicks.iter().map(|p| kick_distance(p)).collect();
    let terms = vec![GamTerm::Smooth { name: "distance".into(), values: d, by: None }];
    let gam = fit_gam_logit(&terms, &y, &vec![1.0; y.len()], opts).map_err(|e| CoreError::numerics("kick model", e))?;
    let two: Vec<&Play> = plays.iter().filter(|p| p.play_type == PlayType::TwoPoint).collect();
    let two_point_rate = if two.is_empty() {
        log::warn!("no two-point attempts; using the reference conversion rate");
        REFERENCE_TWO_POINT_RATE
    } else {
        two.iter().filter(|p| p.two_point_success == Some(true)).count() as f64 / two.len() as f64
    };
    Ok(KickModel {
        gam,
        two_point_rate,
        two_point_attempts: two.len(),
        n_attempts: kicks.len(),
    })
}

impl KickModel {
    pub fn make_probability(&self, distance: f64) -> f64 {
        let s = self.gam.smooth("distance", None).expect("distance smooth");
        logistic(self.gam.intercept + s.smoother.value(distance))
    }

    pub fn two_point_ep(&self) -> f64 {
        2.0 * self.two_point_rate
    }
}

/// Field-goal attempt value from the make probability and the EP of the
/// opponent's state after a miss.
pub fn field_goal_ep(p_make: f64, ep_after_miss: f64) -> f64 {
    p_make * 3.0 + (1.0 - p_make) * (-1.0) * ep_after_miss
}

/// Opponent's state after a missed field goal from `s`.
pub fn missed_fg_state(s: &State) -> State {
    let spot = f64::from(s.yardline) + MISSED_FG_YARDS;
    let opp = (100.0 - spot).round().max(1.0) as u32;
    s.charge(MISSED_FG_SECONDS).opponent_first_down(opp)
}

/// EP of conversions and field-goal attempts.
pub fn ep_special(model: &EpModel, kick: &KickModel, play: &Play) -> Result<f64> {
    match play.play_type {
        PlayType::ExtraPoint => Ok(kick.make_probability(kick_distance(play))),
        PlayType::TwoPoint => Ok(kick.two_point_ep()),
        PlayType::FieldGoal => {
            let s = State::from_play(play).ok_or_else(|| {
                CoreError::Data(format!("field goal {} of game {} has no down", play.play_id, play.game_id))
            })?;
            let p = kick.make_probability(kick_distance(play));
            Ok(field_goal_ep(p, model.ep_state(&missed_fg_state(&s))))
        }
        _ => Err(CoreError::Validation(format!("play {} is not a kick or conversion", play.play_id))),
    }
}

/// Pre-snap EP of any valued play, with the special cases applied.
pub fn play_ep(model: &EpModel, kick: &KickModel, play: &Play) -> Result<f64> {
    match play.play_type {
        PlayType::ExtraPoint | PlayType::TwoPoint | PlayType::FieldGoal => ep_special(model, kick, play),
        _ => model.expected_points(play),
    }
}

// ---------------------------------------------------------------------------
// Cross-validation

pub fn event_labels() -> Vec<&'static str> {
    ScoringEvent::ALL.iter().map(|e| e.label()).collect()
}

/// Leave-one-season-out predictions pooled into one calibration report.
/// Each fold recomputes weights on its own training seasons.
pub fn loso_cv(labeled: &[LabeledPlay], opts: &EpOptions) -> Result<CalibrationReport> {
    let mut seasons: Vec<i32> = labeled.iter().map(|l| l.play.season).collect();
    seasons.sort_unstable();
    seasons.dedup();
    if seasons.len() < 2 {
        return Err(CoreError::Validation("leave-one-season-out needs at least two seasons".into()));
    }
    let folds: Vec<Result<Vec<(Vec<f64>, usize)>>> = seasons
        .par_iter()
        .map(|&s| {
            let train: Vec<LabeledPlay> = labeled.iter().filter(|l| l.play.season != s).cloned().collect();
            let model = fit_ep(&training_set(&train), opts)?;
            let mut held: Vec<&LabeledPlay> =
                labeled.iter().filter(|l| l.play.season == s && is_ep_training(&l.play)).collect();
            held.sort_by(|a, b| (&a.play.game_id, a.play.play_id).cmp(&(&b.play.game_id, b.play.play_id)));
            Ok(held
                .iter()
                .map(|l| {
                    let f = encode_ep_features(&l.play).expect("down");
                    (model.probabilities(&f).to_vec(), l.next_score.index())
                })
                .collect())
        })
        .collect();
    let mut preds = Vec::new();
    let mut actual = Vec::new();
    for f in folds {
        for (p, a) in f? {
            preds.push(p);
            actual.push(a);
        }
    }
    Ok(calibration(&preds, &actual, &event_labels()))
}

/// In-sample calibration of a fitted model.
pub fn in_sample_calibration(model: &EpModel, labeled: &[LabeledPlay]) -> CalibrationReport {
    let rows: Vec<&LabeledPlay> = labeled.iter().filter(|l| is_ep_training(&l.play)).collect();
    let preds: Vec<Vec<f64>> = rows
        .iter()
        .map(|l| model.probabilities(&encode_ep_features(&l.play).expect("down")).to_vec())
        .collect();
    let actual: Vec<usize> = rows.iter().map(|l| l.next_score.index()).collect();
    calibration(&preds, &actual, &event_labels())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(down: u8, ytg: u32, yl: u32, sh: f64) -> State {
        State {
            down,
            yards_to_go: ytg,
            yardline: yl,
            seconds_half: sh,
            seconds_game: sh + 1800.0,
            half: crate::pbp::Half::First,
            score_differential: 0,
            timeouts_off: 3,
            timeouts_def: 3,
        }
    }

    #[test]
    fn encoding_examples() {
        let f = EpFeatures::from_state(&state(3, 2, 45, 900.0));
        assert!((f.log_ytg - 0.6931471805599453).abs() < 1e-12);
        assert!(!f.gtg && !f.utm);
        assert!(EpFeatures::from_state(&state(1, 4, 4, 900.0)).gtg);
        assert!(EpFeatures::from_state(&state(1, 10, 50, 119.0)).utm);
        assert!(!EpFeatures::from_state(&state(1, 10, 50, 120.0)).utm);
    }

    fn placeholder() -> EpModel {
        EpModel {
            present: vec![ScoringEvent::Touchdown],
            absent: vec![],
            saturated: true,
            fit: None,
            touchdown_points: 7.0,
            seasons: vec![],
            n_train: 0,
        }
    }

    #[test]
    fn expectation_examples() {
        let m = placeholder();
        assert_eq!(m.ep_from_probabilities(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 7.0);
        assert!(m.ep_from_probabilities(&[1.0 / 7.0; 7]).abs() < 1e-12);
    }

    #[test]
    fn field_goal_boundaries() {
        assert_eq!(field_goal_ep(1.0, 0.9), 3.0);
        assert_eq!(field_goal_ep(0.0, 0.5), -0.5);
    }

    #[test]
    fn missed_field_goal_state() {
        let s = state(4, 5, 30, 300.0);
        let m = missed_fg_state(&s);
        assert_eq!(m.yardline, 62);
        assert_eq!((m.down, m.yards_to_go), (1, 10));
        assert!((m.seconds_half - (300.0 - 5.07)).abs() < 1e-12);
    }
}
