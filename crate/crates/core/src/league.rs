//! Game results and rosters.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Game {
    pub game_id: String,
    pub season: i32,
    pub home_team: String,
    pub away_team: String,
    pub home_score: i32,
    pub away_score: i32,
}

impl Game {
    /// 1 for a win, 0 for a loss, 0.5 for a tie; `None` if `team` did not play.
    pub fn result_for(&self, team: &str) -> Option<f64> {
        let (own, opp) = if team == self.home_team {
            (self.home_score, self.away_score)
        } else if team == self.away_team {
            (self.away_score, self.home_score)
        } else {
            return None;
        };
        Some(match own.cmp(&opp) {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => 0.5,
        })
    }

    pub fn is_tie(&self) -> bool {
        self.home_score == self.away_score
    }
}

#[derive(Debug, Clone, Default)]
pub struct Games {
    by_id: BTreeMap<String, Game>,
}

impl Games {
    pub fn new(games: Vec<Game>) -> Result<Self> {
        let mut by_id = BTreeMap::new();
        for g in games {
            if by_id.contains_key(&g.game_id) {
                return Err(CoreError::Data(format!("game {} listed twice", g.game_id)));
            }
            by_id.insert(g.game_id.clone(), g);
        }
        Ok(Self { by_id })
    }

    pub fn get(&self, id: &str) -> Option<&Game> {
        self.by_id.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Game> {
        self.by_id.values()
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    /// Per-team `(wins, points for − points against, games)` in a season.
    pub fn team_records(&self, season: i32) -> BTreeMap<String, (f64, f64, usize)> {
        let mut out: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
        for g in self.iter().filter(|g| g.season == season) {
            for (team, own, opp) in [
                (&g.home_team, g.home_score, g.away_score),
                (&g.away_team, g.away_score, g.home_score),
            ] {
                let e = out.entry(team.clone()).or_default();
                e.0 += g.result_for(team).expect("team played");
                e.1 += f64::from(own - opp);
                e.2 += 1;
            }
        }
        out
    }
}

pub fn read_games<R: Read>(source: R) -> Result<Games> {
    let mut rdr = csv::Reader::from_reader(source);
    let games = rdr.deserialize().collect::<std::result::Result<Vec<Game>, _>>()?;
    Games::new(games)
}

pub fn write_games<W: Write>(sink: W, games: &Games) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for g in games.iter() {
        w.serialize(g)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Position {
    QB,
    RB,
    FB,
    WR,
    TE,
    Other,
}

impl Position {
    pub fn parse(s: &str) -> Self {
        match s.trim().to_ascii_uppercase().as_str() {
            "QB" => Position::QB,
            "RB" | "HB" => Position::RB,
            "FB" => Position::FB,
            "WR" => Position::WR,
            "TE" => Position::TE,
            _ => Position::Other,
        }
    }

    /// Fullbacks are grouped with running backs.
    pub fn group(self) -> Self {
        if self == Position::FB {
            Position::RB
        } else {
            self
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Position::QB => "QB",
            Position::RB => "RB",
            Position::FB => "FB",
            Position::WR => "WR",
            Position::TE => "TE",
            Position::Other => "OTHER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub season: i32,
    pub player_id: String,
    pub name: String,
    pub team: String,
    pub position: String,
}

#[derive(Debug, Clone, Default)]
pub struct Rosters {
    entries: Vec<RosterEntry>,
    by_key: BTreeMap<(i32, String), usize>,
}

impl Rosters {
    pub fn new(entries: Vec<RosterEntry>) -> Self {
        let mut by_key = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_key.entry((e.season, e.player_id.clone())).or_insert(i);
        }
        Self { entries, by_key }
    }

    pub fn position(&self, season: i32, player: &str) -> Option<Position> {
        self.by_key
            .get(&(season, player.to_string()))
            .map(|&i| Position::parse(&self.entries[i].position))
    }

    pub fn name(&self, season: i32, player: &str) -> Option<&str> {
        self.by_key.get(&(season, player.to_string())).map(|&i| self.entries[i].name.as_str())
    }

    pub fn entries(&self) -> &[RosterEntry] {
        &self.entries
    }
}

pub fn read_rosters<R: Read>(source: R) -> Result<Rosters> {
    let mut rdr = csv::Reader::from_reader(source);
    let entries = rdr.deserialize().collect::<std::result::Result<Vec<RosterEntry>, _>>()?;
    Ok(Rosters::new(entries))
}

pub fn write_rosters<W: Write>(sink: W, rosters: &Rosters) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for e in rosters.entries() {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}
