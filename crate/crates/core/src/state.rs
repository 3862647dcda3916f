//! Pre-snap game state from the possession team's point of view.

use serde::{Deserialize, Serialize};

use crate::pbp::{Half, Play};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub down: u8,
    pub yards_to_go: u32,
    pub yardline: u32,
    pub seconds_half: f64,
    pub seconds_game: f64,
    pub half: Half,
    pub score_differential: i32,
    pub timeouts_off: u8,
    pub timeouts_def: u8,
}

impl State {
    pub fn from_play(p: &Play) -> Option<Self> {
        Some(Self {
            down: p.down?,
            yards_to_go: p.yards_to_go?,
            yardline: p.yardline,
            seconds_half: p.seconds_remaining_half,
            seconds_game: p.seconds_remaining_game,
            half: p.half,
            score_differential: p.score_differential,
            timeouts_off: p.timeouts_off,
            timeouts_def: p.timeouts_def,
        })
    }

    /// Clock context of a play without a down (conversions, kickoffs).
    pub fn clock_of(p: &Play) -> Self {
        Self {
            down: 1,
            yards_to_go: 10,
            yardline: p.yardline,
            seconds_half: p.seconds_remaining_half,
            seconds_game: p.seconds_remaining_game,
            half: p.half,
            score_differential: p.score_differential,
            timeouts_off: p.timeouts_off,
            timeouts_def: p.timeouts_def,
        }
    }

    /// Runs `seconds` off both clocks.
    pub fn charge(mut self, seconds: f64) -> Self {
        self.seconds_half = (self.seconds_half - seconds).max(0.0);
        self.seconds_game = (self.seconds_game - seconds).max(0.0);
        self
    }

    /// First-and-10 for the other team, `opp_yardline` yards from scoring.
    pub fn opponent_first_down(&self, opp_yardline: u32) -> Self {
        let yl = opp_yardline.clamp(1, 99);
        Self {
            down: 1,
            yards_to_go: 10.min(yl),
            yardline: yl,
            seconds_half: self.seconds_half,
            seconds_game: self.seconds_game,
            half: self.half,
            score_differential: -self.score_differential,
            timeouts_off: self.timeouts_def,
            timeouts_def: self.timeouts_off,
        }
    }
}
