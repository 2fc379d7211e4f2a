//! Batch command-line surface over the fusion library: each subcommand
//! reads flat files, computes deterministically under the loaded config
//! and seed, and writes plot-ready CSV/JSON-lines artifacts into a
//! content-addressed run directory.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cmds;
mod config;
mod out;

use config::RunConfig;

/// Input problems exit 1; broken internal invariants exit 2.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "uciwatch",
    version,
    about = "Fuses AIS tracks, satellite ship detections and subsea-infrastructure geometry into anomaly and threat reports"
)]
struct Cli {
    /// TOML config file; built-in defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// override the config seed (controls every stochastic component)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate AIS CSV into a normalized track store
    Ingest {
        /// AIS CSV (mmsi,timestamp,lat,lon,sog,cog,heading,nav_status)
        #[arg(long)]
        ais: PathBuf,
        /// vessel attributes CSV (mmsi,name,ship_type,length_m,ownership_risk)
        #[arg(long)]
        vessel_info: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build traffic / stationary density grids and stationary areas
    Density {
        #[arg(long)]
        ais: PathBuf,
        /// lat_min,lat_max,lon_min,lon_max (defaults to the data hull)
        #[arg(long)]
        bbox: Option<String>,
        /// ISO-8601 interval start (defaults to the first report)
        #[arg(long)]
        from: Option<String>,
        /// ISO-8601 interval end (defaults to the last report)
        #[arg(long)]
        to: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select candidate-of-interest tracks near infrastructure
    Filter {
        #[arg(long)]
        ais: PathBuf,
        #[arg(long)]
        vessel_info: Option<PathBuf>,
        /// UCI routes GeoJSON
        #[arg(long)]
        uci: PathBuf,
        /// bathymetry lattice CSV (lat,lon,depth_m)
        #[arg(long)]
        bathymetry: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pair SAR detections with AIS tracks scene by scene
    Associate {
        #[arg(long)]
        ais: PathBuf,
        /// detections CSV (id,image_id,timestamp,lat,lon)
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the drift model to a vessel and predict ahead with uncertainty
    Predict {
        #[arg(long)]
        ais: PathBuf,
        #[arg(long)]
        mmsi: u32,
        /// prediction time(s), ISO-8601, repeatable
        #[arg(long, required = true)]
        at: Vec<String>,
        /// fit window start (defaults to the first report)
        #[arg(long)]
        fit_from: Option<String>,
        /// fit window end (defaults to the last report before the
        /// earliest prediction time)
        #[arg(long)]
        fit_to: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the anomaly detectors over every track
    Anomalies {
        #[arg(long)]
        ais: PathBuf,
        #[arg(long)]
        vessel_info: Option<PathBuf>,
        #[arg(long)]
        uci: PathBuf,
        /// optional SAR detections to fold in unmatched-contact indicators
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuse anomaly indicators into per-vessel threat assessments
    Assess {
        /// events JSON-lines (from `anomalies`)
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        vessel_info: Option<PathBuf>,
        /// rule file (defaults to assess.rule_file from the config)
        #[arg(long)]
        rules: Option<PathBuf>,
        /// intel flags, `mmsi=flag`, repeatable
        #[arg(long)]
        intel: Vec<String>,
        /// AIS CSV for the status-consistency side report
        #[arg(long)]
        ais: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Graph robustness, cascading failure and choke-point analysis
    Netrisk {
        /// edge list CSV (src,dst,kind,capacity)
        #[arg(long)]
        edges: PathBuf,
        /// node list CSV (id,lat,lon)
        #[arg(long)]
        nodes: Option<PathBuf>,
        /// random | targeted | cascade | chokepoints
        #[arg(long)]
        mode: String,
        /// seed edges for cascade mode: `srcId:dstId`, repeatable
        #[arg(long)]
        fail: Vec<String>,
        /// how many choke points to report
        #[arg(short, long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate one of the bundled synthetic scenarios
    Scenario {
        /// baltic | shetland | adriatic
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref(), cli.seed)?;
    match cli.command {
        Command::Ingest {
            ais,
            vessel_info,
            out,
        } => cmds::ingest::run(&cfg, &ais, vessel_info.as_deref(), &out),
        Command::Density {
            ais,
            bbox,
            from,
            to,
            out,
        } => cmds::density::run(&cfg, &ais, bbox.as_deref(), from.as_deref(), to.as_deref(), &out),
        Command::Filter {
            ais,
            vessel_info,
            uci,
            bathymetry,
            out,
        } => cmds::filter::run(
            &cfg,
            &ais,
            vessel_info.as_deref(),
            &uci,
            bathymetry.as_deref(),
            &out,
        ),
        Command::Associate {
            ais,
            detections,
            out,
        } => cmds::associate::run(&cfg, &ais, &detections, &out),
        Command::Predict {
            ais,
            mmsi,
            at,
            fit_from,
            fit_to,
            out,
        } => cmds::predict::run(
            &cfg,
            &ais,
            mmsi,
            &at,
            fit_from.as_deref(),
            fit_to.as_deref(),
            &out,
        ),
        Command::Anomalies {
            ais,
            vessel_info,
            uci,
            detections,
            out,
        } => cmds::anomalies::run(
            &cfg,
            &ais,
            vessel_info.as_deref(),
            &uci,
            detections.as_deref(),
            &out,
        ),
        Command::Assess {
            events,
            vessel_info,
            rules,
            intel,
            ais,
            out,
        } => cmds::assess::run(
            &cfg,
            &events,
            vessel_info.as_deref(),
            rules.as_deref(),
            &intel,
            ais.as_deref(),
            &out,
        ),
        Command::Netrisk {
            edges,
            nodes,
            mode,
            fail,
            k,
            out,
        } => cmds::netrisk::run(&cfg, &edges, nodes.as_deref(), &mode, &fail, k, &out),
        Command::Scenario { name, out } => cmds::scenario::run(&cfg, &name, &out),
    }
}
