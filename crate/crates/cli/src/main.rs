//! `nlproj`: command-line front end for nonlinear projection experiments.

mod commands;
mod demo;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(name = "nlproj", version, about = "Metric projection, reach and skeleton experiments on parametrized manifolds")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Comma-separated list of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

impl FromStr for Coords {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("`{t}` is not a finite number"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Coords)
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Manifold manifest: a JSON file, or `catalog:<key>` for a built-in entry.
    #[arg(long, global = true)]
    pub manifest: Option<String>,
    /// JSON object of parameters for a `catalog:` manifest.
    #[arg(long, global = true)]
    pub params: Option<String>,
    /// Directory for CSV and SVG artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Bisection tolerance for frontier estimates.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest radius probed along a normal ray.
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
    /// Grid size: cells per axis for sweeps, feet per chart axis for reach.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Sampling box `lo0,lo1,...,hi0,hi1,...`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub region: Option<Coords>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Offset into the quasi-random start sequence.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

/// A normal ray given by chart coordinates of its foot and a direction.
#[derive(Args, Debug, Clone)]
pub struct RaySpec {
    /// Chart index of the foot.
    #[arg(long, default_value_t = 0)]
    pub chart: usize,
    /// Chart coordinates of the foot.
    #[arg(long, allow_hyphen_values = true)]
    pub at: Coords,
    /// Ambient direction, normal to M at the foot (default: first normal frame vector).
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<Coords>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nearest point(s) of a query point.
    Project {
        #[arg(long, allow_hyphen_values = true)]
        point: Coords,
    },
    /// Frontier bracket along one normal ray.
    Frontier(RaySpec),
    /// Reach estimate from a grid of normal rays.
    Reach {
        /// Normal directions per foot when the codimension is 3.
        #[arg(long, default_value_t = 16)]
        sphere_points: usize,
        /// Fraction of each interval chart axis used for feet.
        #[arg(long, default_value_t = 1.0)]
        inner_fraction: f64,
    },
    /// Shape operator, principal curvatures and radius of curvature.
    Curvature(RaySpec),
    /// Closed-form derivative of the projection against finite differences.
    Dpcheck {
        #[arg(long, allow_hyphen_values = true)]
        point: Coords,
        /// Finite-difference step (default 1e-5 (1 + |x|)).
        #[arg(long)]
        h: Option<f64>,
        /// Tube radius for the norm bound.
        #[arg(long)]
        eps0: Option<f64>,
    },
    /// Maximal-ball sample of the skeleton over a region.
    Skeleton {
        /// Also list nodes whose foot changes when pushed 1% outwards.
        #[arg(long)]
        extension_scan: bool,
    },
    /// Medial-axis recovery of the complement of M.
    Recover {
        /// Single query point; without it the indicator is written for the region grid.
        #[arg(long, allow_hyphen_values = true)]
        query: Option<Coords>,
        /// Manifold samples for the hull half-spaces.
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Complement of the projection domain against skeleton and no-nearest-point set.
    Ecomp,
    /// Frontier estimates along a segment of feet in one chart.
    ThetaProfile {
        #[arg(long, default_value_t = 0)]
        chart: usize,
        /// First foot (chart coordinates).
        #[arg(long, allow_hyphen_values = true)]
        from: Coords,
        /// Last foot (chart coordinates).
        #[arg(long, allow_hyphen_values = true)]
        to: Coords,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Common ambient direction (default: first normal frame vector at each foot).
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<Coords>,
    },
    /// End-to-end reproductions of the worked examples.
    Demo {
        #[arg(value_enum)]
        which: DemoKind,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum DemoKind {
    HalfParabola,
    Lip1Theta,
    Voronoi,
}

/// Everything that makes a command fail, with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] nlproj::Error),
    #[error(transparent)]
    Output(#[from] output::OutputError),
    #[error("{0}")]
    Usage(String),
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use nlproj::Error as E;
        match self {
            CliError::Core(E::SolverFailure { .. } | E::NonMonotone(_) | E::FootMismatchAtZero { .. }) => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::Output(_) | CliError::Check(_) => 1,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(j) = cli.common.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let c = &cli.common;
    match cli.command {
        Command::Project { point } => commands::project(c, &point),
        Command::Frontier(ray) => commands::frontier(c, &ray),
        Command::Reach { sphere_points, inner_fraction } => commands::reach(c, sphere_points, inner_fraction),
        Command::Curvature(ray) => commands::curvature(c, &ray),
        Command::Dpcheck { point, h, eps0 } => commands::dpcheck(c, &point, h, eps0),
        Command::Skeleton { extension_scan } => commands::skeleton(c, extension_scan),
        Command::Recover { query, samples } => commands::recover(c, query.as_ref(), samples),
        Command::Ecomp => commands::ecomp(c),
        Command::ThetaProfile { chart, from, to, count, direction } => {
            commands::theta_profile(c, chart, &from, &to, count, direction.as_ref())
        }
        Command::Demo { which } => match which {
            DemoKind::HalfParabola => demo::half_parabola(c),
            DemoKind::Lip1Theta => demo::lip1_theta(c),
            DemoKind::Voronoi => demo::voronoi(c),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
