//! Fixed football constants used by the models.

/// Yards the ball moves back on a missed field goal before the opponent takes over.
pub const MISSED_FG_YARDS: f64 = 8.0;
/// Clock charge for a missed field goal.
pub const MISSED_FG_SECONDS: f64 = 5.07;
/// Clock charge for the hypothetical catch point of a completed pass
/// (the average duration of an incomplete pass).
pub const INCOMPLETE_PASS_SECONDS: f64 = 5.7;
/// "Under two minutes" means strictly fewer seconds than this in the half.
pub const UNDER_TWO_MINUTES: f64 = 120.0;
/// Distance added to the line of scrimmage to get a kick distance when the
/// data does not record one (end zone depth plus holder spot).
pub const KICK_DISTANCE_OFFSET: f64 = 18.0;
pub const TOUCHDOWN_POINTS: f64 = 7.0;
/// Historical two-point conversion rate, kept as a reference value; fitted
/// kick models recompute the rate from their training window.
pub const REFERENCE_TWO_POINT_RATE: f64 = 0.4735;
pub const LEAGUE_TEAMS: usize = 32;
pub const RUSHING_RB_PER_TEAM: usize = 3;
pub const RUSHING_WRTE_PER_TEAM: usize = 1;
pub const RECEIVING_RB_PER_TEAM: usize = 3;
pub const RECEIVING_WR_PER_TEAM: usize = 4;
pub const RECEIVING_TE_PER_TEAM: usize = 2;
/// Share of a team's QB plays below which a QB is replacement level.
pub const QB_INVOLVEMENT_SHARE: f64 = 0.10;
pub const CALIBRATION_BIN_WIDTH: f64 = 0.05;
pub const DEFAULT_REJECT_THRESHOLD: f64 = 0.005;
pub const REGULATION_HALF_SECONDS: f64 = 1800.0;

/// `(name, value, description)` for every hard-coded constant.
pub fn all_constants() -> Vec<(&'static str, f64, &'static str)> {
    vec![
        ("missed_fg_yards", MISSED_FG_YARDS, "yards added to the spot for the opponent after a missed field goal"),
        ("missed_fg_seconds", MISSED_FG_SECONDS, "seconds charged for a missed field goal"),
        ("incomplete_pass_seconds", INCOMPLETE_PASS_SECONDS, "seconds charged to reach the hypothetical catch point"),
        ("under_two_minutes_seconds", UNDER_TWO_MINUTES, "strict threshold for the under-two-minutes indicator"),
        ("kick_distance_offset", KICK_DISTANCE_OFFSET, "yards added to the yardline when kick distance is missing"),
        ("touchdown_points", TOUCHDOWN_POINTS, "point value of a touchdown in expected points"),
        ("reference_two_point_rate", REFERENCE_TWO_POINT_RATE, "historical two-point conversion rate"),
        ("league_teams", LEAGUE_TEAMS as f64, "teams used to scale replacement thresholds"),
        ("rushing_rb_per_team", RUSHING_RB_PER_TEAM as f64, "NFL-level rushing RBs per team"),
        ("rushing_wrte_per_team", RUSHING_WRTE_PER_TEAM as f64, "NFL-level rushing WR/TEs per team"),
        ("receiving_rb_per_team", RECEIVING_RB_PER_TEAM as f64, "NFL-level receiving RBs per team"),
        ("receiving_wr_per_team", RECEIVING_WR_PER_TEAM as f64, "NFL-level receiving WRs per team"),
        ("receiving_te_per_team", RECEIVING_TE_PER_TEAM as f64, "NFL-level receiving TEs per team"),
        ("qb_involvement_share", QB_INVOLVEMENT_SHARE, "QB play share below which a QB is replacement level"),
        ("calibration_bin_width", CALIBRATION_BIN_WIDTH, "probability bin width for calibration error"),
        ("reject_threshold", DEFAULT_REJECT_THRESHOLD, "largest tolerated share of rejected rows"),
    ]
}
