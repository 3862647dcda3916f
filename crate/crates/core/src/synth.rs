//! Synthetic data: a small simulated league written in the public
//! play-by-play format, plus generators with known truth for model checks.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::ep::{EpFeatures, FEATURE_NAMES};
use crate::error::Result;
use crate::league::{Game, Games, RosterEntry, Rosters};
use crate::pbp::{parse_plays, Half, LabeledPlay, Play, PlayType, ScoringEvent, SchemaConfig};
use crate::state::State;

const TEAM_CODES: [&str; 16] = [
    "ATL", "BOS", "CHI", "DEN", "ELP", "FRE", "GRN", "HOU", "IND", "JAX", "KCY", "LVG", "MEM", "NSH", "OMA", "PDX",
];

/// One row in the public play-by-play column layout.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PbpRow {
    pub game_id: String,
    pub play_id: u64,
    pub season: i32,
    pub game_half: String,
    pub qtr: u8,
    pub posteam: String,
    pub defteam: String,
    pub home_team: String,
    pub away_team: String,
    pub down: Option<u8>,
    pub ydstogo: Option<u32>,
    pub yardline_100: u32,
    pub half_seconds_remaining: u32,
    pub game_seconds_remaining: u32,
    pub score_differential: i32,
    pub total_home_score: i32,
    pub total_away_score: i32,
    pub drive: u32,
    pub play_type: String,
    pub sack: u8,
    pub qb_kneel: u8,
    pub qb_scramble: u8,
    pub two_point_attempt: u8,
    pub field_goal_result: Option<String>,
    pub extra_point_result: Option<String>,
    pub two_point_conv_result: Option<String>,
    pub kick_distance: Option<u32>,
    pub passer_player_id: Option<String>,
    pub receiver_player_id: Option<String>,
    pub rusher_player_id: Option<String>,
    pub air_yards: Option<i32>,
    pub yards_after_catch: Option<i32>,
    pub yards_gained: Option<i32>,
    pub pass_location: Option<String>,
    pub run_gap: Option<String>,
    pub run_location: Option<String>,
    pub shotgun: u8,
    pub no_huddle: u8,
    pub qb_hit: u8,
    pub complete_pass: u8,
    pub interception: u8,
    pub posteam_timeouts_remaining: u8,
    pub defteam_timeouts_remaining: u8,
    pub touchdown: u8,
    pub td_team: Option<String>,
    pub safety: u8,
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seasons: Vec<i32>,
    /// Even number of teams, at most 16; each season is a single round robin.
    pub teams: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { seasons: vec![2016, 2017], teams: 8, seed: 20170910 }
    }
}

#[derive(Debug, Clone)]
struct Player {
    id: String,
    position: &'static str,
    /// Latent ability: completion/yards boost.
    effect: f64,
    weight: f64,
}

#[derive(Debug, Clone)]
struct Team {
    code: String,
    qbs: Vec<Player>,
    rbs: Vec<Player>,
    fb: Player,
    wrs: Vec<Player>,
    tes: Vec<Player>,
    gaps: [f64; 7],
    defense: f64,
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("finite sd").sample(rng)
}

fn pick<'a>(rng: &mut ChaCha8Rng, players: &'a [Player]) -> &'a Player {
    let total: f64 = players.iter().map(|p| p.weight).sum();
    let mut u = rng.random::<f64>() * total;
    for p in players {
        if u < p.weight {
            return p;
        }
        u -= p.weight;
    }
    players.last().expect("non-empty")
}

fn build_team(rng: &mut ChaCha8Rng, code: &str) -> Team {
    let mk = |rng: &mut ChaCha8Rng, pos: &'static str, k: usize, sd: f64, weight: f64| Player {
        id: format!("{code}-{pos}{k}"),
        position: pos,
        effect: normal(rng, 0.0, sd),
        weight,
    };
    Team {
        code: code.to_string(),
        qbs: (1..=3).map(|k| mk(rng, "QB", k, 0.35, [0.0, 0.9, 0.08, 0.02][k])).collect(),
        rbs: (1..=4).map(|k| mk(rng, "RB", k, 0.5, [0.0, 0.55, 0.3, 0.1, 0.05][k])).collect(),
        fb: mk(rng, "FB", 1, 0.3, 1.0),
        wrs: (1..=6).map(|k| mk(rng, "WR", k, 0.3, [0.0, 0.3, 0.27, 0.2, 0.1, 0.08, 0.05][k])).collect(),
        tes: (1..=3).map(|k| mk(rng, "TE", k, 0.3, [0.0, 0.6, 0.3, 0.1][k])).collect(),
        gaps: std::array::from_fn(|_| normal(rng, 0.0, 0.6)),
        defense: normal(rng, 0.0, 0.25),
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Sim<'a> {
    rng: &'a mut ChaCha8Rng,
    teams: [&'a Team; 2],
    game_id: String,
    season: i32,
    rows: Vec<PbpRow>,
    score: [i32; 2],
    pos: usize,
    yardline: u32,
    down: u8,
    ytg: u32,
    half: Half,
    sec_half: u32,
    drive: u32,
    timeouts: [u8; 2],
    play_id: u64,
    qb: [usize; 2],
    over: bool,
}

enum Outcome {
    /// Offense keeps the ball, gaining yards.
    Gain(i32),
    /// Offense scores a touchdown.
    Touchdown,
    /// Defense scores a touchdown.
    DefensiveTd,
    Safety,
    /// Ball changes hands with the new offense `yl` yards from scoring.
    Turnover(u32),
}

impl<'a> Sim<'a> {
    fn home(&self) -> &'a Team {
        self.teams[0]
    }

    fn sec_game(&self) -> u32 {
        match self.half {
            Half::First => self.sec_half + 1800,
            _ => self.sec_half,
        }
    }

    fn quarter(&self) -> u8 {
        match self.half {
            Half::First if self.sec_half > 900 => 1,
            Half::First => 2,
            Half::Second if self.sec_half > 900 => 3,
            Half::Second => 4,
            Half::Overtime => 5,
        }
    }

    fn diff(&self) -> i32 {
        self.score[self.pos] - self.score[1 - self.pos]
    }

    fn row(&mut self, play_type: &str) -> PbpRow {
        self.play_id += self.rng.random_range(10..40);
        let (o, d) = (self.teams[self.pos], self.teams[1 - self.pos]);
        PbpRow {
            game_id: self.game_id.clone(),
            play_id: self.play_id,
            season: self.season,
            game_half: match self.half {
                Half::First => "Half1",
                Half::Second => "Half2",
                Half::Overtime => "Overtime",
            }
            .into(),
            qtr: self.quarter(),
            posteam: o.code.clone(),
            defteam: d.code.clone(),
            home_team: self.teams[0].code.clone(),
            away_team: self.teams[1].code.clone(),
            yardline_100: self.yardline,
            half_seconds_remaining: self.sec_half,
            game_seconds_remaining: self.sec_game(),
            score_differential: self.diff(),
            total_home_score: self.score[0],
            total_away_score: self.score[1],
            drive: self.drive,
            play_type: play_type.into(),
            posteam_timeouts_remaining: self.timeouts[self.pos],
            defteam_timeouts_remaining: self.timeouts[1 - self.pos],
            ..PbpRow::default()
        }
    }

    fn run_clock(&mut self, secs: u32) {
        self.sec_half = self.sec_half.saturating_sub(secs);
    }

    fn new_possession(&mut self, team: usize, yardline: u32) {
        self.pos = team;
        self.yardline = yardline.clamp(1, 99);
        self.down = 1;
        self.ytg = 10.min(self.yardline);
        self.drive += 1;
    }

    fn kickoff(&mut self, receiving: usize) {
        self.pos = receiving;
        self.drive += 1;
        self.yardline = 35;
        let mut r = self.row("kickoff");
        r.down = None;
        self.rows.push(r);
        let start = if self.rng.random::<f64>() < 0.6 { 75 } else { self.rng.random_range(62..85) };
        self.yardline = start;
        self.down = 1;
        self.ytg = 10;
        self.run_clock(if self.sec_half > 0 && start != 75 { 6 } else { 0 });
    }

    fn free_kick_after_safety(&mut self) {
        // The scored-on team kicks; the scoring team starts near midfield.
        let receiving = 1 - self.pos;
        self.pos = receiving;
        self.drive += 1;
        self.yardline = 80;
        let mut r = self.row("kickoff");
        r.down = None;
        self.rows.push(r);
        self.yardline = self.rng.random_range(45..65);
        self.down = 1;
        self.ytg = 10;
    }

    fn conversion(&mut self) {
        // Overtime touchdowns end the game without a try.
        if self.half == Half::Overtime {
            self.over = true;
            return;
        }
        self.yardline = 15;
        if self.rng.random::<f64>() < 0.08 {
            let ok = self.rng.random::<f64>() < 0.48;
            let pass = self.rng.random::<f64>() < 0.6;
            let mut r = self.row(if pass { "pass" } else { "run" });
            r.two_point_attempt = 1;
            r.two_point_conv_result = Some(if ok { "success" } else { "failure" }.into());
            self.rows.push(r);
            if ok {
                self.score[self.pos] += 2;
            }
        } else {
            let ok = self.rng.random::<f64>() < 0.94;
            let mut r = self.row("extra_point");
            r.extra_point_result = Some(if ok { "good" } else { "failed" }.into());
            r.kick_distance = Some(33);
            self.rows.push(r);
            if ok {
                self.score[self.pos] += 1;
            }
        }
    }

    fn after_touchdown(&mut self, scorer: usize) {
        self.pos = scorer;
        self.score[scorer] += 6;
        self.conversion();
        if !self.over && self.sec_half > 0 {
            self.kickoff(1 - scorer);
        }
    }

    fn simulate_half(&mut self, half: Half, receiving: usize) {
        self.half = half;
        self.sec_half = if half == Half::Overtime { 600 } else { 1800 };
        self.timeouts = if half == Half::Overtime { [2, 2] } else { [3, 3] };
        self.kickoff(receiving);
        while self.sec_half > 0 && !self.over {
            let before = self.score;
            self.snap();
            if half == Half::Overtime && self.score != before {
                self.over = true;
            }
        }
    }

    fn late(&self) -> bool {
        self.half != Half::First && self.sec_half < 300
    }

    fn snap(&mut self) {
        let diff = self.diff();
        let trailing_late = self.late() && diff < 0;
        if self.half != Half::First && self.sec_half < 110 && diff > 0 && self.down < 4 {
            let mut r = self.row("run");
            r.down = Some(self.down);
            r.ydstogo = Some(self.ytg);
            r.qb_kneel = 1;
            r.rusher_player_id = Some(self.teams[self.pos].qbs[self.qb[self.pos]].id.clone());
            r.yards_gained = Some(-1);
            self.rows.push(r);
            self.run_clock(40);
            self.apply(Outcome::Gain(-1));
            return;
        }
        if self.down == 4 {
            let go = (self.ytg <= 2 && self.yardline <= 60 && self.rng.random::<f64>() < 0.4)
                || (trailing_late && self.yardline < 70);
            if !go {
                if self.yardline <= 37 {
                    self.field_goal();
                } else {
                    self.punt();
                }
                return;
            }
        }
        let p_pass = if trailing_late { 0.8 } else { 0.56 };
        let mut r = self.row("pass");
        r.down = Some(self.down);
        r.ydstogo = Some(self.ytg);
        r.no_huddle = u8::from(self.rng.random::<f64>() < if trailing_late { 0.6 } else { 0.08 });
        let outcome = if self.rng.random::<f64>() < p_pass { self.pass(&mut r) } else { self.rush(&mut r) };
        let secs = if r.play_type == "pass" && r.complete_pass == 0 && r.sack == 0 {
            6
        } else if trailing_late {
            self.rng.random_range(8..20)
        } else {
            self.rng.random_range(26..42)
        };
        match &outcome {
            Outcome::Touchdown => {
                r.touchdown = 1;
                r.td_team = Some(self.teams[self.pos].code.clone());
            }
            Outcome::DefensiveTd => {
                r.touchdown = 1;
                r.td_team = Some(self.teams[1 - self.pos].code.clone());
            }
            Outcome::Safety => r.safety = 1,
            _ => {}
        }
        self.rows.push(r);
        self.run_clock(secs);
        // Trailing teams stop the clock late in a half.
        if self.sec_half > 0 && self.sec_half < 120 {
            let def = 1 - self.pos;
            if self.diff() > 0 && self.timeouts[def] > 0 && self.rng.random::<f64>() < 0.6 {
                self.timeouts[def] -= 1;
                self.sec_half += secs.saturating_sub(3).min(30);
            } else if self.diff() <= 0 && self.timeouts[self.pos] > 0 && self.rng.random::<f64>() < 0.4 {
                self.timeouts[self.pos] -= 1;
                self.sec_half += secs.saturating_sub(3).min(30);
            }
        }
        self.apply(outcome);
    }

    fn apply(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Gain(g) => {
                let new = i64::from(self.yardline) - i64::from(g);
                if new >= 100 {
                    return self.apply(Outcome::Safety);
                }
                if new <= 0 {
                    return self.apply(Outcome::Touchdown);
                }
                let new = new as u32;
                if g >= self.ytg as i32 {
                    self.yardline = new;
                    self.down = 1;
                    self.ytg = 10.min(new);
                } else if self.down == 4 {
                    self.new_possession(1 - self.pos, 100 - new);
                } else {
                    self.yardline = new;
                    self.down += 1;
                    self.ytg = (self.ytg as i32 - g) as u32;
                }
            }
            Outcome::Touchdown => {
                let scorer = self.pos;
                self.after_touchdown(scorer);
            }
            Outcome::DefensiveTd => {
                let scorer = 1 - self.pos;
                self.after_touchdown(scorer);
            }
            Outcome::Safety => {
                let scorer = 1 - self.pos;
                self.score[scorer] += 2;
                if self.half == Half::Overtime {
                    self.over = true;
                } else if self.sec_half > 0 {
                    self.free_kick_after_safety();
                }
            }
            Outcome::Turnover(yl) => self.new_possession(1 - self.pos, yl),
        }
    }

    fn pass(&mut self, r: &mut PbpRow) -> Outcome {
        let o = self.teams[self.pos];
        let d = self.teams[1 - self.pos];
        let qb = if self.rng.random::<f64>() < 0.04 { &o.qbs[(self.qb[self.pos] + 1) % 3] } else { &o.qbs[self.qb[self.pos]] };
        r.passer_player_id = Some(qb.id.clone());
        r.shotgun = u8::from(self.rng.random::<f64>() < 0.65);
        let deep_own = self.yardline >= 95;
        let sack_p = 0.065 + 0.03 * d.defense + if deep_own { 0.08 } else { 0.0 };
        if self.rng.random::<f64>() < sack_p {
            r.sack = 1;
            r.qb_hit = 1;
            let loss = self.rng.random_range(2..10);
            r.yards_gained = Some(-loss);
            if deep_own && self.rng.random::<f64>() < 0.3 {
                r.yards_gained = Some(-(100 - self.yardline as i32));
                return Outcome::Safety;
            }
            return Outcome::Gain(-loss);
        }
        if self.rng.random::<f64>() < 0.04 {
            // Scramble, recorded as a run by the quarterback.
            r.play_type = "run".into();
            r.qb_scramble = 1;
            r.rusher_player_id = Some(qb.id.clone());
            r.passer_player_id = None;
            let g = (normal(self.rng, 6.0, 4.0).round() as i32).min(self.yardline as i32);
            r.yards_gained = Some(g);
            r.run_location = Some(["left", "right"][self.rng.random_range(0..2)].into());
            return if g >= self.yardline as i32 { Outcome::Touchdown } else { Outcome::Gain(g) };
        }
        let u = self.rng.random::<f64>();
        let (rec, mean_air, sd_air) = if u < 0.62 {
            (pick(self.rng, &o.wrs), 10.0, 9.0)
        } else if u < 0.82 {
            (pick(self.rng, &o.tes), 7.0, 6.0)
        } else if u < 0.97 {
            (pick(self.rng, &o.rbs), 1.0, 3.0)
        } else {
            (&o.fb, 1.0, 2.0)
        };
        r.receiver_player_id = Some(rec.id.clone());
        let loc = self.rng.random::<f64>();
        r.pass_location = Some(if loc < 0.36 { "left" } else if loc < 0.64 { "middle" } else { "right" }.into());
        let air = (normal(self.rng, mean_air, sd_air).round() as i32).clamp(-5, self.yardline as i32);
        r.air_yards = Some(air);
        let hit = self.rng.random::<f64>() < 0.15;
        r.qb_hit = u8::from(hit);
        let int_p = 0.018 + 0.001 * air.max(0) as f64 - 0.01 * qb.effect;
        if self.rng.random::<f64>() < int_p.max(0.005) {
            r.interception = 1;
            r.yards_gained = Some(0);
            let spot = (self.yardline as i32 - air).clamp(1, 99) as u32;
            let ret = self.rng.random_range(0..25);
            let opp = 100 - spot as i32 - ret;
            if opp <= 0 || self.rng.random::<f64>() < 0.06 {
                return Outcome::DefensiveTd;
            }
            return Outcome::Turnover(opp as u32);
        }
        let p = logistic(1.3 - 0.06 * air as f64 + qb.effect + rec.effect - d.defense - if hit { 0.5 } else { 0.0 });
        if self.rng.random::<f64>() >= p {
            r.yards_gained = Some(0);
            return Outcome::Gain(0);
        }
        r.complete_pass = 1;
        let mean_yac = (4.0 + 3.0 * rec.effect + if rec.position == "RB" { 2.0 } else { 0.0 }).max(0.5);
        let mut yac = (-mean_yac * (1.0 - self.rng.random::<f64>()).ln()).floor() as i32;
        if air + yac >= self.yardline as i32 {
            yac = self.yardline as i32 - air;
            r.yards_after_catch = Some(yac);
            r.yards_gained = Some(air + yac);
            return Outcome::Touchdown;
        }
        r.yards_after_catch = Some(yac);
        r.yards_gained = Some(air + yac);
        if self.rng.random::<f64>() < 0.008 {
            let spot = (self.yardline as i32 - air - yac).clamp(1, 99) as u32;
            return Outcome::Turnover(100 - spot);
        }
        Outcome::Gain(air + yac)
    }

    fn rush(&mut self, r: &mut PbpRow) -> Outcome {
        let o = self.teams[self.pos];
        let d = self.teams[1 - self.pos];
        r.play_type = "run".into();
        r.shotgun = u8::from(self.rng.random::<f64>() < 0.3);
        let u = self.rng.random::<f64>();
        let runner = if u < 0.85 {
            pick(self.rng, &o.rbs)
        } else if u < 0.9 {
            &o.fb
        } else if u < 0.95 {
            pick(self.rng, &o.wrs)
        } else if u < 0.97 {
            pick(self.rng, &o.tes)
        } else {
            &o.qbs[self.qb[self.pos]]
        };
        r.rusher_player_id = Some(runner.id.clone());
        let side = self.rng.random::<f64>();
        let (loc, gap, gi) = if side < 0.3 {
            ("middle", None, 3)
        } else {
            let g = self.rng.random_range(0..3);
            let left = side < 0.65;
            let gi = if left { g } else { 6 - g };
            (if left { "left" } else { "right" }, Some(["end", "tackle", "guard"][g]), gi)
        };
        r.run_location = Some(loc.into());
        r.run_gap = gap.map(str::to_string);
        let mean = 4.0 + 2.0 * runner.effect + 1.5 * o.gaps[gi] - 2.0 * d.defense;
        let g = (normal(self.rng, mean, 5.0).round() as i32).max(-6).min(self.yardline as i32);
        r.yards_gained = Some(g);
        if self.yardline >= 96 && self.rng.random::<f64>() < 0.12 {
            r.yards_gained = Some(-(100 - self.yardline as i32));
            return Outcome::Safety;
        }
        if self.rng.random::<f64>() < 0.012 {
            if self.rng.random::<f64>() < 0.15 {
                return Outcome::DefensiveTd;
            }
            let spot = (self.yardline as i32 - g.max(0)).clamp(1, 99) as u32;
            return Outcome::Turnover(100 - spot);
        }
        if g >= self.yardline as i32 {
            Outcome::Touchdown
        } else {
            Outcome::Gain(g)
        }
    }

    fn field_goal(&mut self) {
        let dist = self.yardline + 18;
        let mut r = self.row("field_goal");
        r.down = Some(self.down);
        r.ydstogo = Some(self.ytg);
        r.kick_distance = Some(dist);
        let made = self.rng.random::<f64>() < logistic(6.2 - 0.115 * dist as f64);
        let blocked = !made && self.rng.random::<f64>() < 0.1;
        r.field_goal_result = Some(if made { "made" } else if blocked { "blocked" } else { "missed" }.into());
        self.rows.push(r);
        self.run_clock(5);
        if made {
            let k = self.pos;
            self.score[k] += 3;
            if self.half == Half::Overtime {
                self.over = true;
            } else if self.sec_half > 0 {
                self.kickoff(1 - k);
            }
        } else {
            let spot = (self.yardline + 8).min(99);
            let opp = (100 - spot).min(80);
            self.new_possession(1 - self.pos, opp);
        }
    }

    fn punt(&mut self) {
        let mut r = self.row("punt");
        r.down = Some(self.down);
        r.ydstogo = Some(self.ytg);
        self.rows.push(r);
        self.run_clock(8);
        let net = normal(self.rng, 42.0, 8.0).round() as i32;
        let landing = self.yardline as i32 - net;
        let opp = if landing <= 0 { 80 } else { 100 - landing };
        self.new_possession(1 - self.pos, opp as u32);
    }
}

fn simulate_game(rng: &mut ChaCha8Rng, home: &Team, away: &Team, game_id: String, season: i32) -> (Vec<PbpRow>, Game) {
    let qb_pick = |rng: &mut ChaCha8Rng| if rng.random::<f64>() < 0.12 { 1 } else { 0 };
    let qb = [qb_pick(rng), qb_pick(rng)];
    let mut s = Sim {
        rng,
        teams: [home, away],
        game_id: game_id.clone(),
        season,
        rows: Vec::new(),
        score: [0, 0],
        pos: 1,
        yardline: 75,
        down: 1,
        ytg: 10,
        half: Half::First,
        sec_half: 1800,
        drive: 0,
        timeouts: [3, 3],
        play_id: 0,
        qb,
        over: false,
    };
    s.simulate_half(Half::First, 1);
    s.simulate_half(Half::Second, 0);
    if s.score[0] == s.score[1] {
        s.simulate_half(Half::Overtime, 0);
    }
    let game = Game {
        game_id,
        season,
        home_team: s.home().code.clone(),
        away_team: s.teams[1].code.clone(),
        home_score: s.score[0],
        away_score: s.score[1],
    };
    (s.rows, game)
}

#[derive(Debug, Clone)]
pub struct SynthLeague {
    pub rows: Vec<PbpRow>,
    pub games: Games,
    pub rosters: Rosters,
}

/// Simulates every season as a single round robin. Player abilities persist
/// across seasons with small drift.
pub fn generate_league(cfg: &SynthConfig) -> Result<SynthLeague> {
    let n = cfg.teams;
    if n < 4 || n % 2 != 0 || n > TEAM_CODES.len() {
        return Err(crate::error::CoreError::Validation(format!(
            "synthetic leagues need an even number of teams between 4 and {}",
            TEAM_CODES.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut teams: Vec<Team> = TEAM_CODES[..n].iter().map(|c| build_team(&mut rng, c)).collect();
    let mut rows = Vec::new();
    let mut games = Vec::new();
    let mut roster = Vec::new();
    for &season in &cfg.seasons {
        for t in &mut teams {
            for p in t.qbs.iter_mut().chain(&mut t.rbs).chain(std::iter::once(&mut t.fb)).chain(&mut t.wrs).chain(&mut t.tes) {
                p.effect += normal(&mut rng, 0.0, 0.05);
                roster.push(RosterEntry {
                    season,
                    player_id: p.id.clone(),
                    name: p.id.replace('-', " "),
                    team: t.code.clone(),
                    position: p.position.to_string(),
                });
            }
        }
        // Circle method: team 0 fixed, the rest rotate.
        let mut order: Vec<usize> = (0..n).collect();
        for week in 0..n - 1 {
            for g in 0..n / 2 {
                let (a, b) = (order[g], order[n - 1 - g]);
                let (h, aw) = if (week + g) % 2 == 0 { (a, b) } else { (b, a) };
                let id = format!("{season}09{:02}{:02}", week + 1, g);
                let (r, game) = simulate_game(&mut rng, &teams[h], &teams[aw], id, season);
                rows.extend(r);
                games.push(game);
            }
            order[1..].rotate_right(1);
        }
    }
    Ok(SynthLeague { rows, games: Games::new(games)?, rosters: Rosters::new(roster) })
}

impl SynthLeague {
    pub fn write_pbp<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plays as the parser sees them.
    pub fn plays(&self) -> Result<Vec<Play>> {
        let mut buf = Vec::new();
        self.write_pbp(&mut buf)?;
        Ok(parse_plays(buf.as_slice(), &SchemaConfig::default())?.plays)
    }
}

// ---------------------------------------------------------------------------
// Known-truth generators

/// Next-score logit coefficients (rows: non-reference events in canonical
/// order without no-score; columns: the sixteen expected-points features).
pub fn reference_ep_coefficients() -> Vec<Vec<f64>> {
    //        int   d2    d3    d4   sec     yl     lytg  gtg  utm   ly:d2 ly:d3 ly:d4 yl:d2  yl:d3  yl:d4  ly:gtg
    vec![
        vec![1.2, -0.1, -0.3, -0.6, 4e-4, -0.035, -0.2, 0.4, -0.6, 0.05, 0.0, -0.1, 0.002, 0.002, 0.0, 0.1],
        vec![0.9, -0.05, -0.1, 0.2, 3e-4, -0.022, -0.1, 0.2, -0.5, 0.0, 0.05, 0.1, 0.0, 0.001, -0.004, 0.0],
        vec![-4.0, 0.0, 0.1, 0.0, 1e-4, 0.02, 0.0, 0.0, -0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![-5.0, 0.0, 0.0, 0.1, 1e-4, -0.01, 0.05, 0.0, -0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![-0.4, 0.05, 0.1, 0.2, 3e-4, 0.012, 0.05, 0.0, -0.4, 0.0, 0.0, 0.0, 0.0, 0.001, 0.003, 0.0],
        vec![-0.5, 0.05, 0.15, 0.3, 4e-4, 0.018, 0.05, 0.0, -0.6, 0.0, 0.0, 0.05, 0.0, 0.001, 0.003, 0.0],
    ]
}

/// True event probabilities in canonical order under the given coefficients.
pub fn true_ep_probabilities(beta: &[Vec<f64>], f: &EpFeatures) -> [f64; 7] {
    let x = f.row();
    let mut eta = [0.0; 7];
    let mut k = 0;
    for (i, e) in eta.iter_mut().enumerate() {
        if i == ScoringEvent::NoScore.index() {
            continue;
        }
        *e = beta[k].iter().zip(&x).map(|(b, v)| b * v).sum();
        k += 1;
    }
    let m = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = eta.iter().map(|e| (e - m).exp()).sum();
    eta.map(|e| (e - m).exp() / z)
}

fn random_state(rng: &mut ChaCha8Rng) -> State {
    let down = [1, 1, 1, 2, 2, 3, 4][rng.random_range(0..7)];
    let yardline = rng.random_range(1..100);
    let ytg = if down == 1 { 10.min(yardline) } else { rng.random_range(1..16).min(yardline) };
    let sh = rng.random_range(0..1800) as f64;
    State {
        down,
        yards_to_go: ytg,
        yardline,
        seconds_half: sh,
        seconds_game: sh + if rng.random::<bool>() { 1800.0 } else { 0.0 },
        half: if sh > 0.0 { Half::First } else { Half::Second },
        score_differential: rng.random_range(-21..22),
        timeouts_off: 3,
        timeouts_def: 3,
    }
}

/// `n` labelled plays with events drawn from the known logit, spread over
/// `seasons`, unit weights.
pub fn synthetic_ep_plays(n: usize, seasons: &[i32], beta: &[Vec<f64>], seed: u64) -> Vec<LabeledPlay> {
    assert_eq!(beta.len(), 6);
    assert!(beta.iter().all(|b| b.len() == FEATURE_NAMES.len()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let s = random_state(&mut rng);
            let p = true_ep_probabilities(beta, &EpFeatures::from_state(&s));
            let mut u = rng.random::<f64>();
            let mut ev = ScoringEvent::NoScore;
            for (k, &q) in p.iter().enumerate() {
                if u < q {
                    ev = ScoringEvent::from_index(k);
                    break;
                }
                u -= q;
            }
            let season = seasons[i % seasons.len()];
            LabeledPlay {
                play: state_play(&s, season, format!("{season}{:06}", i / 150), i as u64),
                next_score: ev,
                drive_gap: rng.random_range(0..4),
                weight: 1.0,
            }
        })
        .collect()
}

/// A bare play carrying the given state.
pub fn state_play(s: &State, season: i32, game_id: String, play_id: u64) -> Play {
    Play {
        game_id,
        play_id,
        season,
        half: s.half,
        quarter: if s.half == Half::First { 1 } else { 3 },
        posteam: "A".into(),
        defteam: "B".into(),
        home_team: "A".into(),
        away_team: "B".into(),
        down: Some(s.down),
        yards_to_go: Some(s.yards_to_go),
        yardline: s.yardline,
        seconds_remaining_half: s.seconds_half,
        seconds_remaining_game: s.seconds_game,
        score_differential: s.score_differential,
        drive_number: Some(1),
        play_type: PlayType::Rush,
        passer: None,
        receiver: None,
        rusher: None,
        air_yards: None,
        yards_after_catch: None,
        yards_gained: None,
        pass_location: None,
        run_gap: None,
        run_direction: None,
        shotgun: false,
        no_huddle: false,
        qb_hit: false,
        qb_scramble: false,
        complete_pass: false,
        interception: false,
        timeouts_off: s.timeouts_off,
        timeouts_def: s.timeouts_def,
        touchdown_team: None,
        safety: false,
        field_goal_result: None,
        extra_point_result: None,
        two_point_success: None,
        kick_distance: None,
    }
}

/// One-factor credit simulation: `members` members with effects drawn from
/// N(0, σ_member²), `plays_each` plays per member, N(0, σ_noise²) noise.
pub struct CreditSimulation {
    pub response: Vec<f64>,
    pub labels: Vec<String>,
    pub truth: Vec<(String, f64)>,
}

pub fn simulate_credit(members: usize, plays_each: usize, sigma_member: f64, sigma_noise: f64, seed: u64) -> CreditSimulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<(String, f64)> =
        (0..members).map(|m| (format!("M{m:03}"), normal(&mut rng, 0.0, sigma_member))).collect();
    let mut response = Vec::with_capacity(members * plays_each);
    let mut labels = Vec::with_capacity(members * plays_each);
    for (name, eff) in &truth {
        for _ in 0..plays_each {
            response.push(eff + normal(&mut rng, 0.0, sigma_noise));
            labels.push(name.clone());
        }
    }
    CreditSimulation { response, labels, truth }
}
