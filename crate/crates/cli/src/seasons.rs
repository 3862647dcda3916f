use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Seasons written as `2017`, `2009-2016` or `2009-2012,2015`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SeasonSet(Vec<i32>);

impl SeasonSet {
    pub fn new(mut seasons: Vec<i32>) -> Self {
        seasons.sort_unstable();
        seasons.dedup();
        Self(seasons)
    }

    pub fn contains(&self, season: i32) -> bool {
        self.0.binary_search(&season).is_ok()
    }

    pub fn seasons(&self) -> &[i32] {
        &self.0
    }

    /// Seasons of this set that are not in `available`.
    pub fn missing_from(&self, available: &[i32]) -> Vec<i32> {
        self.0.iter().copied().filter(|s| !available.contains(s)).collect()
    }
}

impl FromStr for SeasonSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let num = |t: &str| t.trim().parse::<i32>().map_err(|_| format!("bad season `{t}` in `{s}`"));
            match part.split_once('-') {
                Some((a, b)) => {
                    let (a, b) = (num(a)?, num(b)?);
                    if b < a {
                        return Err(format!("empty season range `{part}`"));
                    }
                    out.extend(a..=b);
                }
                None => out.push(num(part)?),
            }
        }
        if out.is_empty() {
            return Err("no seasons given".into());
        }
        Ok(Self::new(out))
    }
}

impl TryFrom<String> for SeasonSet {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<SeasonSet> for String {
    fn from(s: SeasonSet) -> String {
        s.to_string()
    }
}

impl fmt::Display for SeasonSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Collapse runs of consecutive seasons.
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i;
            while j + 1 < self.0.len() && self.0[j + 1] == self.0[j] + 1 {
                j += 1;
            }
            parts.push(if j > i { format!("{}-{}", self.0[i], self.0[j]) } else { self.0[i].to_string() });
            i = j + 1;
        }
        write!(f, "{}", parts.join(","))
    }
}
