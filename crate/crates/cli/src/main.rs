//! `thermap`: simulate sessions, build thermal wall maps, compare sessions and
//! track concrete maturity.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use thermal_slam::io::{self, config, report};
use thermal_slam::monitor::{compare_maps, track_series, IcpConfig, MATCH_RADIUS};
use thermal_slam::sim::{presets, simulate_session, SiteModel};
use thermal_slam::{build_map, Error, RigidTransform3, ThermalPoint, ThermalPointCloud};

#[derive(Parser)]
#[command(name = "thermap", version, about = "2.5D thermal wall mapping toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a session directory with ground-truth sidecars.
    Simulate {
        /// Preset name (two_room, square_room) or site file.
        #[arg(long)]
        site: String,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        noise: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the thermal wall map of a session.
    Map {
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Align two maps and report per-point temperature change.
    Compare {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        moving: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accumulate maturity over a series of session maps.
    Maturity {
        /// Directory holding `series.csv` and the maps it lists.
        #[arg(long)]
        series: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        datum: f64,
        #[arg(long)]
        max_rate: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

const SERIES_FILE: &str = "series.csv";
const DELTA_REPORT_FILE: &str = "delta.txt";
const DELTA_CLOUD_FILE: &str = "delta.ply";

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

fn load_site(arg: &str) -> Result<SiteModel, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        config::parse_site(&file_name(path), &io::read_text(path)?)
    } else {
        presets::site_by_name(arg)
    }
}

fn simulate(site: &str, traj: &Path, noise: &Path, seed: u64, out: &Path) -> Result<(), Error> {
    let site = load_site(site)?;
    let traj = config::parse_trajectory(&file_name(traj), &io::read_text(traj)?)?;
    let noise = config::parse_noise(&file_name(noise), &io::read_text(noise)?)?;
    let data = simulate_session(&site, &traj, &noise, seed)?;
    io::write_session(&data, out)
}

fn map(session: &Path, cfg: &Path, out: &Path) -> Result<(), Error> {
    let cfg = config::parse_pipeline_config(&file_name(cfg), &io::read_text(cfg)?)?;
    let data = io::load_session(session)?;
    let result = build_map(&data, &cfg)?;
    io::write_map_outputs(&result, out, io::DEFAULT_T_MIN, io::DEFAULT_T_MAX)
}

fn compare(reference: &Path, moving: &Path, out: &Path) -> Result<(), Error> {
    let reference = io::load_ply(reference)?;
    let moving = io::load_ply(moving)?;
    let delta = compare_maps(&reference, &moving, &RigidTransform3::identity(), &IcpConfig::default(), MATCH_RADIUS)?;
    io::create_dir(out)?;
    io::write_atomic(&out.join(DELTA_REPORT_FILE), report::delta_report(&delta).format().as_bytes())?;
    if !delta.per_point.is_empty() {
        let cloud = ThermalPointCloud::new(
            delta
                .per_point
                .iter()
                .map(|&(position, dt)| ThermalPoint {
                    position,
                    temperature: Some(dt),
                })
                .collect(),
        );
        io::export_ply(&cloud, &out.join(DELTA_CLOUD_FILE))?;
    }
    Ok(())
}

fn maturity(series: &Path, datum: f64, max_rate: f64, out: &Path) -> Result<(), Error> {
    if !(max_rate.is_finite() && max_rate > 0.0) {
        return Err(Error::InvalidArgument(format!("--max-rate must be positive, got {max_rate}")));
    }
    let index = series.join(SERIES_FILE);
    let entries = config::parse_series(&file_name(&index), &io::read_text(&index)?)?;
    let maps = entries
        .iter()
        .map(|(name, t)| Ok((*t, io::load_ply(&series.join(name))?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let tracked = track_series(&maps, datum, &IcpConfig::default(), MATCH_RADIUS)?;
    let text = report::maturity_report(&tracked, datum, max_rate).format();
    io::write_atomic(out, text.as_bytes())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate {
            site,
            traj,
            noise,
            seed,
            out,
        } => simulate(site, traj, noise, *seed, out),
        Command::Map { session, config, out } => map(session, config, out),
        Command::Compare { reference, moving, out } => compare(reference, moving, out),
        Command::Maturity {
            series,
            datum,
            max_rate,
            out,
        } => maturity(series, *datum, *max_rate, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("thermap: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
