//! Play-by-play ingestion, next-score labels and observation weights.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::constants::DEFAULT_REJECT_THRESHOLD;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Half {
    #[serde(rename = "1")]
    First,
    #[serde(rename = "2")]
    Second,
    #[serde(rename = "OT")]
    Overtime,
}

impl Half {
    pub fn label(self) -> &'static str {
        match self {
            Half::First => "1",
            Half::Second => "2",
            Half::Overtime => "OT",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayType {
    Pass,
    Rush,
    Sack,
    Kneel,
    FieldGoal,
    ExtraPoint,
    TwoPoint,
    Punt,
    Other,
}

impl PlayType {
    pub fn is_pat(self) -> bool {
        matches!(self, PlayType::ExtraPoint | PlayType::TwoPoint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Middle,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunGap {
    Middle,
    Guard,
    Tackle,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KickResult {
    Made,
    Missed,
    Blocked,
}

/// One parsed play. Optional fields are absent when they do not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Play {
    pub game_id: String,
    pub play_id: u64,
    pub season: i32,
    pub half: Half,
    pub quarter: u8,
    pub posteam: String,
    pub defteam: String,
    pub home_team: String,
    pub away_team: String,
    pub down: Option<u8>,
    pub yards_to_go: Option<u32>,
    /// Distance from the opponent's end zone.
    pub yardline: u32,
    pub seconds_remaining_half: f64,
    pub seconds_remaining_game: f64,
    pub score_differential: i32,
    pub drive_number: Option<u32>,
    pub play_type: PlayType,
    pub passer: Option<String>,
    pub receiver: Option<String>,
    pub rusher: Option<String>,
    pub air_yards: Option<i32>,
    pub yards_after_catch: Option<i32>,
    pub yards_gained: Option<i32>,
    pub pass_location: Option<Direction>,
    pub run_gap: Option<RunGap>,
    pub run_direction: Option<Direction>,
    pub shotgun: bool,
    pub no_huddle: bool,
    pub qb_hit: bool,
    pub qb_scramble: bool,
    pub complete_pass: bool,
    pub interception: bool,
    pub timeouts_off: u8,
    pub timeouts_def: u8,
    pub touchdown_team: Option<String>,
    pub safety: bool,
    pub field_goal_result: Option<KickResult>,
    pub extra_point_result: Option<KickResult>,
    pub two_point_success: Option<bool>,
    pub kick_distance: Option<u32>,
}

impl Play {
    pub fn home_posteam(&self) -> bool {
        self.posteam == self.home_team
    }

    /// Plays that have a pre-snap game state the models can value.
    pub fn is_valued(&self) -> bool {
        self.down.is_some() || self.play_type.is_pat()
    }

    /// Scoring event produced by this play, as `(scoring team, event)`.
    pub fn score(&self) -> Option<(&str, ScoreKind)> {
        if let Some(team) = &self.touchdown_team {
            return Some((team, ScoreKind::Touchdown));
        }
        if self.play_type == PlayType::FieldGoal && self.field_goal_result == Some(KickResult::Made) {
            return Some((&self.posteam, ScoreKind::FieldGoal));
        }
        if self.safety {
            return Some((&self.defteam, ScoreKind::Safety));
        }
        None
    }

    /// Points scored on a conversion attempt.
    pub fn pat_points(&self) -> Option<f64> {
        match self.play_type {
            PlayType::ExtraPoint => Some(if self.extra_point_result == Some(KickResult::Made) { 1.0 } else { 0.0 }),
            PlayType::TwoPoint => Some(if self.two_point_success == Some(true) { 2.0 } else { 0.0 }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreKind {
    Touchdown,
    FieldGoal,
    Safety,
}

/// Next scoring event relative to the labelled play's possession team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScoringEvent {
    Touchdown,
    FieldGoal,
    Safety,
    NoScore,
    OppSafety,
    OppFieldGoal,
    OppTouchdown,
}

impl ScoringEvent {
    pub const ALL: [ScoringEvent; 7] = [
        ScoringEvent::Touchdown,
        ScoringEvent::FieldGoal,
        ScoringEvent::Safety,
        ScoringEvent::NoScore,
        ScoringEvent::OppSafety,
        ScoringEvent::OppFieldGoal,
        ScoringEvent::OppTouchdown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    /// Point value with a touchdown worth `td`.
    pub fn points_with(self, td: f64) -> f64 {
        match self {
            ScoringEvent::Touchdown => td,
            ScoringEvent::FieldGoal => 3.0,
            ScoringEvent::Safety => 2.0,
            ScoringEvent::NoScore => 0.0,
            ScoringEvent::OppSafety => -2.0,
            ScoringEvent::OppFieldGoal => -3.0,
            ScoringEvent::OppTouchdown => -td,
        }
    }

    pub fn points(self) -> f64 {
        self.points_with(crate::constants::TOUCHDOWN_POINTS)
    }

    pub fn label(self) -> &'static str {
        match self {
            ScoringEvent::Touchdown => "touchdown",
            ScoringEvent::FieldGoal => "field_goal",
            ScoringEvent::Safety => "safety",
            ScoringEvent::NoScore => "no_score",
            ScoringEvent::OppSafety => "opp_safety",
            ScoringEvent::OppFieldGoal => "opp_field_goal",
            ScoringEvent::OppTouchdown => "opp_touchdown",
        }
    }

    fn from_kind(kind: ScoreKind, own: bool) -> Self {
        match (kind, own) {
            (ScoreKind::Touchdown, true) => ScoringEvent::Touchdown,
            (ScoreKind::FieldGoal, true) => ScoringEvent::FieldGoal,
            (ScoreKind::Safety, true) => ScoringEvent::Safety,
            (ScoreKind::Touchdown, false) => ScoringEvent::OppTouchdown,
            (ScoreKind::FieldGoal, false) => ScoringEvent::OppFieldGoal,
            (ScoreKind::Safety, false) => ScoringEvent::OppSafety,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPlay {
    pub play: Play,
    pub next_score: ScoringEvent,
    pub drive_gap: u32,
    pub weight: f64,
}

// ---------------------------------------------------------------------------
// Schema and parsing

/// Logical field → CSV column. Defaults follow the public nflscrapR files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemaConfig {
    pub columns: BTreeMap<String, String>,
    pub reject_threshold: f64,
}

const REQUIRED: [&str; 13] = [
    "game_id",
    "play_id",
    "qtr",
    "posteam",
    "defteam",
    "home_team",
    "away_team",
    "down",
    "ydstogo",
    "yardline_100",
    "half_seconds_remaining",
    "game_seconds_remaining",
    "play_type",
];

const OPTIONAL: [&str; 33] = [
    "season",
    "game_half",
    "score_differential",
    "drive",
    "sack",
    "qb_kneel",
    "qb_scramble",
    "two_point_attempt",
    "field_goal_result",
    "extra_point_result",
    "two_point_conv_result",
    "kick_distance",
    "passer_player_id",
    "receiver_player_id",
    "rusher_player_id",
    "air_yards",
    "yards_after_catch",
    "yards_gained",
    "pass_location",
    "run_gap",
    "run_location",
    "shotgun",
    "no_huddle",
    "qb_hit",
    "complete_pass",
    "interception",
    "posteam_timeouts_remaining",
    "defteam_timeouts_remaining",
    "touchdown",
    "td_team",
    "safety",
    "total_home_score",
    "total_away_score",
];

impl Default for SchemaConfig {
    fn default() -> Self {
        let columns = REQUIRED
            .iter()
            .chain(OPTIONAL.iter())
            .map(|c| (c.to_string(), c.to_string()))
            .collect();
        Self {
            columns,
            reject_threshold: DEFAULT_REJECT_THRESHOLD,
        }
    }
}

impl SchemaConfig {
    /// Reads a TOML overlay; unspecified columns keep their default names.
    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize, Default)]
        #[serde(default)]
        struct Overlay {
            columns: BTreeMap<String, String>,
            reject_threshold: Option<f64>,
        }
        let overlay: Overlay = toml::from_str(text).map_err(|e| CoreError::Schema(e.to_string()))?;
        let mut cfg = Self::default();
        for (k, v) in overlay.columns {
            if !cfg.columns.contains_key(&k) {
                return Err(CoreError::Schema(format!("unknown logical column `{k}`")));
            }
            cfg.columns.insert(k, v);
        }
        if let Some(t) = overlay.reject_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(CoreError::Validation(format!("reject threshold {t} outside [0, 1]")));
            }
            cfg.reject_threshold = t;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reject {
    /// 1-based data row (header excluded).
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub plays: Vec<Play>,
    pub rejects: Vec<Reject>,
    /// Rows that are not plays (no possession team or no play type).
    pub skipped: usize,
    pub rows: usize,
}

impl ParseOutcome {
    pub fn reject_rate(&self) -> f64 {
        let considered = self.rows - self.skipped;
        if considered == 0 {
            0.0
        } else {
            self.rejects.len() as f64 / considered as f64
        }
    }
}

struct Columns {
    idx: HashMap<&'static str, usize>,
}

impl Columns {
    fn get<'r>(&self, rec: &'r csv::StringRecord, key: &str) -> Option<&'r str> {
        let i = *self.idx.get(key)?;
        let v = rec.get(i)?.trim();
        if v.is_empty() || v == "NA" || v == "NaN" {
            None
        } else {
            Some(v)
        }
    }
}

fn parse_num<T: std::str::FromStr>(v: Option<&str>, field: &str) -> std::result::Result<Option<T>, String> {
    match v {
        None => Ok(None),
        Some(s) => s
            .parse::<T>()
            .map(Some)
            .or_else(|_| {
                // integers are sometimes written as "3.0"
                s.parse::<f64>()
                    .ok()
                    .filter(|f| f.fract() == 0.0)
                    .and_then(|f| format!("{}", f as i64).parse::<T>().ok())
                    .map(Some)
                    .ok_or(())
            })
            .map_err(|_| format!("malformed {field}: `{s}`")),
    }
}

fn flag(v: Option<&str>) -> bool {
    matches!(v, Some("1") | Some("1.0") | Some("TRUE") | Some("true") | Some("True"))
}

fn season_from_game_id(id: &str) -> Option<i32> {
    if id.len() < 6 || !id[..6].bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let year: i32 = id[..4].parse().ok()?;
    let month: i32 = id[4..6].parse().ok()?;
    Some(if month <= 2 { year - 1 } else { year })
}

fn direction(v: Option<&str>) -> std::result::Result<Option<Direction>, String> {
    match v.map(str::to_ascii_lowercase).as_deref() {
        None => Ok(None),
        Some("left") => Ok(Some(Direction::Left)),
        Some("middle") => Ok(Some(Direction::Middle)),
        Some("right") => Ok(Some(Direction::Right)),
        Some(o) => Err(format!("unknown direction `{o}`")),
    }
}

fn gap(v: Option<&str>) -> std::result::Result<Option<RunGap>, String> {
    match v.map(str::to_ascii_lowercase).as_deref() {
        None => Ok(None),
        Some("middle") | Some("center") => Ok(Some(RunGap::Middle)),
        Some("guard") => Ok(Some(RunGap::Guard)),
        Some("tackle") => Ok(Some(RunGap::Tackle)),
        Some("end") => Ok(Some(RunGap::End)),
        Some(o) => Err(format!("unknown run gap `{o}`")),
    }
}

fn kick_result(v: Option<&str>) -> Option<KickResult> {
    match v.map(str::to_ascii_lowercase).as_deref() {
        Some("made") | Some("good") => Some(KickResult::Made),
        Some("blocked") => Some(KickResult::Blocked),
        Some(_) => Some(KickResult::Missed),
        None => None,
    }
}

/// Parses a play-by-play CSV. Rows that are not plays are skipped; rows with
/// malformed mandatory fields are collected as rejects. Fails if the share
/// of rejects exceeds the schema's threshold.
pub fn parse_plays<R: Read>(source: R, schema: &SchemaConfig) -> Result<ParseOutcome> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(source);
    let headers = rdr.headers().map_err(|e| CoreError::Schema(format!("cannot read header: {e}")))?.clone();
    let mut idx = HashMap::new();
    for key in REQUIRED.iter().chain(OPTIONAL.iter()) {
        let col = schema.columns.get(*key).map(String::as_str).unwrap_or(key);
        match headers.iter().position(|h| h == col) {
            Some(i) => {
                idx.insert(*key, i);
            }
            None if REQUIRED.contains(key) => {
                return Err(CoreError::Schema(format!("missing column `{col}` (field {key})")));
            }
            None => {}
        }
    }
    let cols = Columns { idx };
    let mut out = ParseOutcome::default();
    for (r, rec) in rdr.records().enumerate() {
        let row = r + 1;
        out.rows += 1;
        let rec = match rec {
            Ok(rec) => rec,
            Err(e) => {
                out.rejects.push(Reject { row, reason: e.to_string() });
                continue;
            }
        };
        if cols.get(&rec, "posteam").is_none() || cols.get(&rec, "play_type").is_none() {
            out.skipped += 1;
            continue;
        }
        match parse_row(&cols, &rec) {
            Ok(Some(p)) => out.plays.push(p),
            Ok(None) => out.skipped += 1,
            Err(reason) => out.rejects.push(Reject { row, reason }),
        }
    }
    let rate = out.reject_rate();
    if rate > schema.reject_threshold {
        return Err(CoreError::Data(format!(
            "{} of {} play rows rejected ({:.3}%), above the {:.3}% threshold; first: row {} {}",
            out.rejects.len(),
            out.rows - out.skipped,
            100.0 * rate,
            100.0 * schema.reject_threshold,
            out.rejects[0].row,
            out.rejects[0].reason
        )));
    }
    Ok(out)
}

fn parse_row(c: &Columns, rec: &csv::StringRecord) -> std::result::Result<Option<Play>, String> {
    let req = |k: &str| c.get(rec, k).ok_or_else(|| format!("missing {k}"));
    let raw_type = req("play_type")?.to_ascii_lowercase();
    let game_id = req("game_id")?.to_string();
    let play_id: u64 = parse_num(Some(req("play_id")?), "play_id")?.expect("present");
    let quarter: u8 = parse_num(Some(req("qtr")?), "qtr")?.expect("present");
    if !(1..=6).contains(&quarter) {
        return Err(format!("quarter {quarter} out of range"));
    }
    let season = match c.get(rec, "season") {
        Some(s) => parse_num::<i32>(Some(s), "season")?.expect("present"),
        None => season_from_game_id(&game_id).ok_or_else(|| format!("cannot derive season from game_id `{game_id}`"))?,
    };
    let half = match c.get(rec, "game_half") {
        Some("Half1") | Some("1") => Half::First,
        Some("Half2") | Some("2") => Half::Second,
        Some("Overtime") | Some("OT") => Half::Overtime,
        Some(o) => return Err(format!("unknown game_half `{o}`")),
        None => match quarter {
            1 | 2 => Half::First,
            3 | 4 => Half::Second,
            _ => Half::Overtime,
        },
    };
    let is_two_point = flag(c.get(rec, "two_point_attempt"));
    let play_type = if is_two_point {
        PlayType::TwoPoint
    } else {
        match raw_type.as_str() {
            "extra_point" => PlayType::ExtraPoint,
            "pass" if flag(c.get(rec, "sack")) => PlayType::Sack,
            "pass" => PlayType::Pass,
            "run" | "rush" if flag(c.get(rec, "qb_kneel")) => PlayType::Kneel,
            "run" | "rush" => PlayType::Rush,
            "qb_kneel" | "kneel" => PlayType::Kneel,
            "sack" => PlayType::Sack,
            "field_goal" => PlayType::FieldGoal,
            "punt" => PlayType::Punt,
            _ => PlayType::Other,
        }
    };
    let down: Option<u8> = parse_num(c.get(rec, "down"), "down")?;
    if let Some(d) = down {
        if !(1..=4).contains(&d) {
            return Err(format!("down {d} out of range"));
        }
    }
    let ytg: Option<u32> = parse_num(c.get(rec, "ydstogo"), "ydstogo")?;
    let yards_to_go = match (down, ytg) {
        (Some(_), Some(0)) | (Some(_), None) => return Err("down without yards to go".into()),
        (Some(_), y) => y,
        (None, _) => None,
    };
    let yardline: u32 = parse_num(Some(req("yardline_100")?), "yardline_100")?.expect("present");
    if yardline > 100 {
        return Err(format!("yardline {yardline} out of range"));
    }
    let sh: f64 = parse_num(Some(req("half_seconds_remaining")?), "half_seconds_remaining")?.expect("present");
    let sg: f64 = parse_num(Some(req("game_seconds_remaining")?), "game_seconds_remaining")?.expect("present");
    if !(0.0..=3600.0).contains(&sg) || !(0.0..=1800.0).contains(&sh) || sh > sg + 1e-9 {
        return Err(format!("inconsistent clock: half {sh}, game {sg}"));
    }
    let score_differential = match c.get(rec, "score_differential") {
        Some(s) => parse_num::<i32>(Some(s), "score_differential")?.expect("present"),
        None => {
            // PAT and kickoff rows sometimes lack the differential; fall back to running totals.
            let home: Option<i32> = parse_num(c.get(rec, "total_home_score"), "total_home_score")?;
            let away: Option<i32> = parse_num(c.get(rec, "total_away_score"), "total_away_score")?;
            match (home, away) {
                (Some(h), Some(a)) => {
                    if req("posteam")? == req("home_team")? {
                        h - a
                    } else {
                        a - h
                    }
                }
                _ if down.is_none() => 0,
                _ => return Err("missing score_differential".into()),
            }
        }
    };
    let is_rush = play_type == PlayType::Rush;
    let is_pass = play_type == PlayType::Pass;
    let run_gap = if is_rush { gap(c.get(rec, "run_gap"))? } else { None };
    let run_direction = if is_rush { direction(c.get(rec, "run_location"))? } else { None };
    let timeouts = |k: &str| -> std::result::Result<u8, String> {
        Ok(parse_num::<u8>(c.get(rec, k), k)?.unwrap_or(3).min(3))
    };
    let td_team = if flag(c.get(rec, "touchdown")) || c.get(rec, "td_team").is_some() {
        c.get(rec, "td_team").map(str::to_string)
    } else {
        None
    };
    let opt = |k: &str| c.get(rec, k).map(str::to_string);
    Ok(Some(Play {
        game_id,
        play_id,
        season,
        half,
        quarter,
        posteam: req("posteam")?.to_string(),
        defteam: req("defteam")?.to_string(),
        home_team: req("home_team")?.to_string(),
        away_team: req("away_team")?.to_string(),
        down,
        yards_to_go,
        yardline,
        seconds_remaining_half: sh,
        seconds_remaining_game: sg,
        score_differential,
        drive_number: parse_num(c.get(rec, "drive"), "drive")?,
        play_type,
        passer: opt("passer_player_id"),
        receiver: if is_pass { opt("receiver_player_id") } else { None },
        rusher: opt("rusher_player_id"),
        air_yards: if is_pass { parse_num(c.get(rec, "air_yards"), "air_yards")? } else { None },
        yards_after_catch: if is_pass {
            parse_num(c.get(rec, "yards_after_catch"), "yards_after_catch")?
        } else {
            None
        },
        yards_gained: parse_num(c.get(rec, "yards_gained"), "yards_gained")?,
        pass_location: if is_pass { direction(c.get(rec, "pass_location"))? } else { None },
        run_gap,
        run_direction,
        shotgun: flag(c.get(rec, "shotgun")),
        no_huddle: flag(c.get(rec, "no_huddle")),
        qb_hit: flag(c.get(rec, "qb_hit")),
        qb_scramble: flag(c.get(rec, "qb_scramble")),
        complete_pass: is_pass && flag(c.get(rec, "complete_pass")),
        interception: flag(c.get(rec, "interception")),
        timeouts_off: timeouts("posteam_timeouts_remaining")?,
        timeouts_def: timeouts("defteam_timeouts_remaining")?,
        touchdown_team: td_team,
        safety: flag(c.get(rec, "safety")),
        field_goal_result: if play_type == PlayType::FieldGoal {
            kick_result(c.get(rec, "field_goal_result"))
        } else {
            None
        },
        extra_point_result: if play_type == PlayType::ExtraPoint {
            kick_result(c.get(rec, "extra_point_result"))
        } else {
            None
        },
        two_point_success: if play_type == PlayType::TwoPoint {
            Some(matches!(c.get(rec, "two_point_conv_result"), Some("success")))
        } else {
            None
        },
        kick_distance: parse_num(c.get(rec, "kick_distance"), "kick_distance")?,
    }))
}

// ---------------------------------------------------------------------------
// Typed play files

/// Writes plays in the typed columnar format (one column per field).
pub fn write_plays<W: Write>(sink: W, plays: &[Play]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for p in plays {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_plays<R: Read>(source: R) -> Result<Vec<Play>> {
    let mut r = csv::Reader::from_reader(source);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn write_rejects<W: Write>(sink: W, rejects: &[Reject]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for r in rejects {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Labels

#[derive(Debug, Clone, Default)]
pub struct LabelOutcome {
    pub labeled: Vec<LabeledPlay>,
    pub diagnostics: Vec<String>,
}

/// Splits plays into per-game runs in input order, checking that each game
/// is contiguous and ordered.
pub fn game_runs(plays: &[Play]) -> Result<Vec<std::ops::Range<usize>>> {
    let mut runs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut start = 0;
    for i in 1..=plays.len() {
        if i == plays.len() || plays[i].game_id != plays[start].game_id {
            let id = &plays[start].game_id;
            if !seen.insert(id.clone()) {
                return Err(CoreError::Ordering {
                    game_id: id.clone(),
                    detail: "plays of the game are not contiguous".into(),
                });
            }
            for k in start + 1..i {
                let (a, b) = (&plays[k - 1], &plays[k]);
                if b.play_id < a.play_id || b.half < a.half {
                    return Err(CoreError::Ordering {
                        game_id: id.clone(),
                        detail: format!("play {} follows play {}", b.play_id, a.play_id),
                    });
                }
            }
            runs.push(start..i);
            start = i;
        }
    }
    Ok(runs)
}

/// Labels every non-PAT play with the next score in its half (overtime is
/// its own scope) relative to its possession team, plus the drive gap.
pub fn label_next_score(plays: &[Play]) -> Result<LabelOutcome> {
    let mut out = LabelOutcome::default();
    for run in game_runs(plays)? {
        let game = &plays[run];
        let mut last_drive = 0u32;
        let mut bad_drive = false;
        for p in game {
            if let Some(d) = p.drive_number {
                if d < last_drive {
                    bad_drive = true;
                }
                last_drive = d;
            }
        }
        if bad_drive {
            out.diagnostics.push(format!("game {}: drive numbers decrease", game[0].game_id));
        }
        let mut labels: Vec<Option<(ScoringEvent, u32)>> = vec![None; game.len()];
        let mut next: Option<(String, ScoreKind, Option<u32>)> = None;
        let mut scope = None;
        for k in (0..game.len()).rev() {
            let p = &game[k];
            if scope != Some(p.half) {
                scope = Some(p.half);
                next = None;
            }
            if p.play_type.is_pat() {
                continue;
            }
            if let Some((team, kind)) = p.score() {
                next = Some((team.to_string(), kind, p.drive_number));
            }
            let label = match &next {
                None => (ScoringEvent::NoScore, 0),
                Some((team, kind, sd)) => {
                    let ev = ScoringEvent::from_kind(*kind, *team == p.posteam);
                    let gap = match (sd, p.drive_number) {
                        (Some(s), Some(d)) if *s >= d => s - d,
                        _ => 0,
                    };
                    (ev, gap)
                }
            };
            labels[k] = Some(label);
        }
        for (p, l) in game.iter().zip(labels) {
            if let Some((ev, gap)) = l {
                out.labeled.push(LabeledPlay {
                    play: p.clone(),
                    next_score: ev,
                    drive_gap: gap,
                    weight: 1.0,
                });
            }
        }
    }
    Ok(out)
}

fn min_max_down(values: &[f64]) -> Option<Vec<f64>> {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi > lo) {
        return None;
    }
    Some(values.iter().map(|&v| (hi - v) / (hi - lo)).collect())
}

/// Score-differential and drive-gap weights, summed and min–max rescaled to
/// [0, 1]. Degenerate scales give uniform weights and a warning.
pub fn compute_weights(labeled: &mut [LabeledPlay]) -> Vec<String> {
    let mut warnings = Vec::new();
    if labeled.is_empty() {
        return warnings;
    }
    let s: Vec<f64> = labeled.iter().map(|l| f64::from(l.play.score_differential.abs())).collect();
    let d: Vec<f64> = labeled.iter().map(|l| f64::from(l.drive_gap)).collect();
    let sw = min_max_down(&s).unwrap_or_else(|| {
        warnings.push("all |score differential| equal; score weights set to 1".into());
        vec![1.0; s.len()]
    });
    let dw = min_max_down(&d).unwrap_or_else(|| {
        warnings.push("all drive gaps equal; drive weights set to 1".into());
        vec![1.0; d.len()]
    });
    let sum: Vec<f64> = sw.iter().zip(&dw).map(|(a, b)| a + b).collect();
    let (lo, hi) = sum.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    for (l, &v) in labeled.iter_mut().zip(&sum) {
        l.weight = if hi > lo { (v - lo) / (hi - lo) } else { 1.0 };
    }
    if !(hi > lo) {
        warnings.push("combined weights are constant; all weights set to 1".into());
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn blank(game: &str, id: u64, posteam: &str, defteam: &str) -> Play {
        Play {
            game_id: game.into(),
            play_id: id,
            season: 2017,
            half: Half::First,
            quarter: 1,
            posteam: posteam.into(),
            defteam: defteam.into(),
            home_team: "A".into(),
            away_team: "B".into(),
            down: Some(1),
            yards_to_go: Some(10),
            yardline: 75,
            seconds_remaining_half: 1800.0 - id as f64,
            seconds_remaining_game: 3600.0 - id as f64,
            score_differential: 0,
            drive_number: Some(1),
            play_type: PlayType::Rush,
            passer: None,
            receiver: None,
            rusher: None,
            air_yards: None,
            yards_after_catch: None,
            yards_gained: Some(0),
            pass_location: None,
            run_gap: None,
            run_direction: None,
            shotgun: false,
            no_huddle: false,
            qb_hit: false,
            qb_scramble: false,
            complete_pass: false,
            interception: false,
            timeouts_off: 3,
            timeouts_def: 3,
            touchdown_team: None,
            safety: false,
            field_goal_result: None,
            extra_point_result: None,
            two_point_success: None,
            kick_distance: None,
        }
    }

    #[test]
    fn own_and_opponent_scores_are_signed() {
        let mut a = blank("g", 1, "A", "B");
        a.drive_number = Some(1);
        let mut b = blank("g", 2, "B", "A");
        b.drive_number = Some(2);
        b.play_type = PlayType::FieldGoal;
        b.field_goal_result = Some(KickResult::Made);
        let out = label_next_score(&[a, b]).unwrap();
        assert_eq!(out.labeled[0].next_score, ScoringEvent::OppFieldGoal);
        assert_eq!(out.labeled[0].drive_gap, 1);
        assert_eq!(out.labeled[1].next_score, ScoringEvent::FieldGoal);
        assert_eq!(out.labeled[1].drive_gap, 0);
    }

    #[test]
    fn scores_do_not_cross_the_half() {
        let a = blank("g", 1, "A", "B");
        let mut b = blank("g", 2, "A", "B");
        b.half = Half::Second;
        b.quarter = 3;
        b.drive_number = Some(5);
        b.touchdown_team = Some("A".into());
        let out = label_next_score(&[a, b]).unwrap();
        assert_eq!(out.labeled[0].next_score, ScoringEvent::NoScore);
        assert_eq!(out.labeled[0].drive_gap, 0);
        assert_eq!(out.labeled[1].next_score, ScoringEvent::Touchdown);
    }

    #[test]
    fn defensive_scores_belong_to_the_defense() {
        let mut a = blank("g", 1, "A", "B");
        a.touchdown_team = Some("B".into());
        let mut s = blank("g", 3, "A", "B");
        s.safety = true;
        let out = label_next_score(&[a, s]).unwrap();
        assert_eq!(out.labeled[0].next_score, ScoringEvent::OppTouchdown);
        assert_eq!(out.labeled[1].next_score, ScoringEvent::OppSafety);
    }

    #[test]
    fn pats_are_not_labeled() {
        let mut td = blank("g", 1, "A", "B");
        td.touchdown_team = Some("A".into());
        let mut xp = blank("g", 2, "A", "B");
        xp.play_type = PlayType::ExtraPoint;
        xp.down = None;
        xp.yards_to_go = None;
        let out = label_next_score(&[td, xp]).unwrap();
        assert_eq!(out.labeled.len(), 1);
    }

    #[test]
    fn out_of_order_plays_are_rejected() {
        let a = blank("g", 5, "A", "B");
        let b = blank("g", 2, "A", "B");
        assert!(matches!(label_next_score(&[a, b]), Err(CoreError::Ordering { .. })));
    }

    #[test]
    fn toy_weights() {
        let mut v = Vec::new();
        for (k, (s, d)) in [(0, 0), (7, 1), (14, 2)].into_iter().enumerate() {
            let mut p = blank("g", k as u64, "A", "B");
            p.score_differential = if k == 1 { -s } else { s };
            v.push(LabeledPlay { play: p, next_score: ScoringEvent::NoScore, drive_gap: d, weight: 0.0 });
        }
        compute_weights(&mut v);
        let w: Vec<f64> = v.iter().map(|l| l.weight).collect();
        assert_eq!(w, vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn game_id_season() {
        assert_eq!(season_from_game_id("2017091000"), Some(2017));
        assert_eq!(season_from_game_id("2018010700"), Some(2017));
        assert_eq!(season_from_game_id("abc"), None);
    }
}
