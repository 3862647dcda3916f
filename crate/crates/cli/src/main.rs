use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridiron_core::constants::TOUCHDOWN_POINTS;
use gridiron_core::value::Scale;
use gridiron_core::war::{QbRule, ReplacementRules};
use gridiron_cli::commands::{self, ReportInputs, ScaleChoice, WarOutputs};
use gridiron_cli::pipeline::{self, PipelineConfig};
use gridiron_cli::seasons::SeasonSet;
use gridiron_cli::spec::{constants_table, version_string};
use gridiron_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "gridiron", about = "Expected points, win probability and WAR from play-by-play data", disable_version_flag = true)]
struct Cli {
    /// Print the version and model-spec hash.
    #[arg(long, short = 'V', global = true)]
    version: bool,
    /// Print every model constant as CSV.
    #[arg(long, global = true)]
    print_constants: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct Replacement {
    /// ten_percent or one_per_team
    #[arg(long, default_value = "ten_percent")]
    qb_rule: QbRule,
    /// Teams the per-team replacement counts multiply; defaults to the teams in the data.
    #[arg(long)]
    teams: Option<usize>,
}

impl Replacement {
    fn rules(&self) -> ReplacementRules {
        ReplacementRules { qb_rule: self.qb_rule, teams: self.teams, ..ReplacementRules::default() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a raw play-by-play export into the play table.
    Ingest {
        #[arg(long)]
        pbp: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Largest tolerated share of rejected rows.
        #[arg(long)]
        reject_threshold: Option<f64>,
        #[arg(long, default_value = "plays.csv")]
        out: PathBuf,
        #[arg(long, default_value = "rejects.csv")]
        rejects: PathBuf,
    },
    /// Fit the expected-points model.
    FitEp {
        #[arg(long)]
        plays: PathBuf,
        #[arg(long)]
        seasons: Option<SeasonSet>,
        #[arg(long, default_value_t = TOUCHDOWN_POINTS)]
        touchdown_points: f64,
        #[arg(long, default_value = "ep_model.json")]
        out: PathBuf,
    },
    /// Calibration table of the expected-points model.
    CalibrateEp {
        /// In-sample calibration of this model; leave-one-season-out without it.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        plays: PathBuf,
        #[arg(long)]
        seasons: Option<SeasonSet>,
        #[arg(long, default_value_t = TOUCHDOWN_POINTS)]
        touchdown_points: f64,
        #[arg(long, default_value = "cal.csv")]
        report: PathBuf,
    },
    /// Fit the field-goal make probability and the two-point rate.
    FitKick {
        #[arg(long)]
        plays: PathBuf,
        #[arg(long)]
        seasons: Option<SeasonSet>,
        #[arg(long, default_value = "kick_model.json")]
        out: PathBuf,
    },
    /// Fit the win-probability model.
    FitWp {
        #[arg(long)]
        plays: PathBuf,
        #[arg(long)]
        games: PathBuf,
        #[arg(long)]
        ep_model: PathBuf,
        #[arg(long)]
        kick_model: PathBuf,
        #[arg(long)]
        seasons: Option<SeasonSet>,
        #[arg(long, default_value = "wp_model.json")]
        out: PathBuf,
        /// Calibration table by quarter.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Hold out each season in turn for the calibration table.
        #[arg(long)]
        loso: bool,
    },
    /// Value every play on both scales.
    Annotate {
        #[arg(long)]
        plays: PathBuf,
        #[arg(long)]
        games: PathBuf,
        #[arg(long)]
        ep_model: PathBuf,
        #[arg(long)]
        kick_model: PathBuf,
        #[arg(long)]
        wp_model: PathBuf,
        #[arg(long)]
        seasons: Option<SeasonSet>,
        #[arg(long, default_value = "annotated.csv")]
        out: PathBuf,
    },
    /// Win-probability series of one game.
    WpChart {
        #[arg(long)]
        annotated: PathBuf,
        #[arg(long)]
        game: String,
        #[arg(long, default_value = "wp_chart.csv")]
        out: PathBuf,
    },
    /// Fit the credit models and write member effects.
    FitCredit {
        #[arg(long)]
        annotated: PathBuf,
        #[arg(long)]
        rosters: PathBuf,
        #[arg(long)]
        season: SeasonSet,
        #[arg(long, default_value = "both")]
        scale: ScaleChoice,
        #[command(flatten)]
        replacement: Replacement,
        #[arg(long, default_value = "effects.csv")]
        out: PathBuf,
    },
    /// Wins above replacement per player-season.
    War {
        #[arg(long)]
        annotated: PathBuf,
        #[arg(long)]
        rosters: PathBuf,
        #[arg(long)]
        games: PathBuf,
        #[arg(long)]
        season: SeasonSet,
        #[arg(long, default_value = "wpa")]
        scale: ScaleChoice,
        #[command(flatten)]
        replacement: Replacement,
        #[arg(long, default_value = "war.csv")]
        out: PathBuf,
        /// Credit-model member effects.
        #[arg(long)]
        effects: Option<PathBuf>,
        /// Replacement-level counts per group.
        #[arg(long)]
        replacement_summary: Option<PathBuf>,
    },
    /// Resample drives and recompute WAR.
    Simulate {
        #[arg(long)]
        annotated: PathBuf,
        #[arg(long)]
        rosters: PathBuf,
        #[arg(long)]
        games: PathBuf,
        #[arg(long)]
        season: i32,
        #[arg(long, default_value = "wpa")]
        scale: Scale,
        #[command(flatten)]
        replacement: Replacement,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Run simulations one at a time.
        #[arg(long)]
        serial: bool,
        #[arg(long, default_value = "sims")]
        out: PathBuf,
    },
    /// Tables and chart series from the WAR outputs.
    Report {
        #[arg(long, default_value = "war.csv")]
        war: PathBuf,
        #[arg(long, default_value = "annotated.csv")]
        annotated: PathBuf,
        #[arg(long)]
        effects: Option<PathBuf>,
        #[arg(long)]
        sims: Option<PathBuf>,
        #[arg(long, default_value = "wpa")]
        scale: Scale,
        #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
        compare_seasons: Option<Vec<i32>>,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
    /// Every stage from a config file, reusing cached artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a simulated league (play-by-play, games, rosters).
    Synth {
        #[arg(long, default_value = "2016-2017")]
        seasons: SeasonSet,
        #[arg(long, default_value_t = 8)]
        teams: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest { pbp, schema, reject_threshold, out, rejects } => {
            let s = commands::ingest(&pbp, schema.as_deref(), reject_threshold, &out, &rejects)?;
            println!("{} plays, {} rejected, {} skipped of {} rows", s.plays, s.rejects, s.skipped, s.rows);
        }
        Command::FitEp { plays, seasons, touchdown_points, out } => {
            let m = commands::fit_ep(&plays, seasons.as_ref(), touchdown_points, &out)?;
            println!("expected-points model on {} plays written to {}", m.n_train, out.display());
        }
        Command::CalibrateEp { model, plays, seasons, touchdown_points, report } => {
            let e = commands::calibrate_ep(&plays, seasons.as_ref(), model.as_deref(), touchdown_points, &report)?;
            println!("calibration error {e:.4}");
        }
        Command::FitKick { plays, seasons, out } => {
            let m = commands::fit_kick(&plays, seasons.as_ref(), &out)?;
            println!("kick model on {} attempts written to {}", m.n_attempts, out.display());
        }
        Command::FitWp { plays, games, ep_model, kick_model, seasons, out, calibration, loso } => {
            let m = commands::fit_wp(&plays, &games, &ep_model, &kick_model, seasons.as_ref(), &out, calibration.as_deref(), loso)?;
            println!("win-probability model on {} plays written to {}", m.n_train, out.display());
        }
        Command::Annotate { plays, games, ep_model, kick_model, wp_model, seasons, out } => {
            let n = commands::annotate(&plays, &games, &ep_model, &kick_model, &wp_model, seasons.as_ref(), &out)?;
            println!("{n} plays written to {}", out.display());
        }
        Command::WpChart { annotated, game, out } => {
            commands::wp_chart(&annotated, &game, &out)?;
        }
        Command::FitCredit { annotated, rosters, season, scale, replacement, out } => {
            commands::fit_credit_cmd(&annotated, &rosters, &season, scale, &replacement.rules(), &out)?;
        }
        Command::War { annotated, rosters, games, season, scale, replacement, out, effects, replacement_summary } => {
            let outputs = WarOutputs { war: &out, effects: effects.as_deref(), replacement: replacement_summary.as_deref() };
            let r = commands::war(&annotated, &rosters, &games, &season, scale, &replacement.rules(), outputs)?;
            println!("{} player-seasons written to {}", r.len(), out.display());
        }
        Command::Simulate { annotated, rosters, games, season, scale, replacement, n, seed, serial, out } => {
            commands::simulate(&annotated, &rosters, &games, season, scale, &replacement.rules(), n, seed, !serial, &out)?;
        }
        Command::Report { war, annotated, effects, sims, scale, compare_seasons, top, out } => {
            let compare = compare_seasons.map(|v| (v[0], v[1]));
            let inputs = ReportInputs { war: &war, annotated: &annotated, effects: effects.as_deref(), sims: sims.as_deref() };
            for f in commands::report(inputs, scale, compare, top, &out)? {
                println!("{}", out.join(f).display());
            }
        }
        Command::Run { config } => {
            pipeline::run(&PipelineConfig::load(&config)?)?;
        }
        Command::Synth { seasons, teams, seed, out } => {
            let n = commands::synth(&out, &seasons, teams, seed)?;
            println!("{n} rows written to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.version {
        println!("{}", version_string());
        return ExitCode::SUCCESS;
    }
    if cli.print_constants {
        print!("{}", constants_table());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no command given; see `gridiron --help`");
        return ExitCode::from(2);
    };
    match dispatch(command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code: CliError = e;
            ExitCode::from(code.exit_code() as u8)
        }
    }
}
