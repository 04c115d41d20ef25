use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use majoflow::channel::PairMode;
use majoflow_cli::commands::{self, Format, SpinRequest, Status};
use majoflow_cli::scenario::{self, Scenario};
use majoflow_cli::{tolerance_multiplier, CliError};

#[derive(Parser)]
#[command(name = "majoflow", version, about = "Majorization checks for Lindblad dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Grid {
    /// Overrides the grid end time.
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of grid points when `--horizon` is given.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairsArg {
    Adjacent,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Check every object in a scenario.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Integrate the master equation and write the trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Certify majorization monotonicity along the time grid.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_enum, default_value = "adjacent")]
        pairs: PairsArg,
    },
    /// Kraus operators of the channel from t1 to t2.
    Kraus {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long)]
        t2: Option<f64>,
    },
    /// Reachable eigenvalue gaps of a qubit under fast control.
    ReachableSpin {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        horizon: Option<f64>,
        /// Number of random control schedules.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

fn load(common: &Common, mult: f64) -> Result<Scenario, CliError> {
    let mut s = scenario::load(&common.scenario)?.with_tolerance_multiplier(mult);
    if common.seed.is_some() {
        s.seed = common.seed;
    }
    Ok(s)
}

fn apply_grid(s: &mut Scenario, grid: &Grid) -> Result<(), CliError> {
    match (grid.horizon, grid.samples) {
        (None, None) => Ok(()),
        (Some(h), samples) => {
            let samples = samples
                .or_else(|| s.times.as_ref().map(Vec::len))
                .unwrap_or(2);
            s.times = Some(scenario::uniform_grid(h, samples, "--horizon/--samples")?);
            Ok(())
        }
        (None, Some(n)) => {
            let end = s
                .times
                .as_ref()
                .and_then(|t| t.last().copied())
                .ok_or_else(|| CliError::Usage("--samples needs --horizon or scenario times".into()))?;
            s.times = Some(scenario::uniform_grid(end, n, "--samples")?);
            Ok(())
        }
    }
}

fn spin_request(s: &Scenario, horizon: Option<f64>, samples: usize) -> Result<SpinRequest, CliError> {
    let seed = s.seed.ok_or_else(|| {
        CliError::Usage("reachable-spin is randomized: pass --seed or set \"seed\" in the scenario".into())
    })?;
    let horizon = horizon
        .or(s.horizon)
        .or_else(|| s.times.as_ref().and_then(|t| t.last().copied()))
        .ok_or_else(|| CliError::Usage("reachable-spin needs --horizon".into()))?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(CliError::Usage(format!("--horizon must be positive, got {horizon}")));
    }
    let lambda0 = match (s.lambda0, &s.initial_state) {
        (Some(l), _) => l,
        (None, Some(_)) => {
            let e = s.initial_density()?.eigenvalues().to_vec();
            0.5 * (e[0] - e[e.len() - 1])
        }
        (None, None) => 0.5,
    };
    Ok(SpinRequest {
        horizon,
        lambda0,
        samples,
        seed,
    })
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let mult = tolerance_multiplier()?;
    let out = |c: &Common| c.out.clone();
    match cli.command {
        Command::Validate { common } => {
            let s = load(&common, mult)?;
            commands::validate(&s, mult, out(&common).as_deref())
        }
        Command::Simulate { common, grid, format } => {
            let mut s = load(&common, mult)?;
            apply_grid(&mut s, &grid)?;
            let format = match format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
            commands::simulate(&s, format, out(&common).as_deref())
        }
        Command::Verify { common, grid, pairs } => {
            let mut s = load(&common, mult)?;
            apply_grid(&mut s, &grid)?;
            let pairs = match pairs {
                PairsArg::Adjacent => PairMode::Adjacent,
                PairsArg::All => PairMode::All,
            };
            commands::verify(&s, pairs, mult, out(&common).as_deref())
        }
        Command::Kraus { common, t1, t2 } => {
            let s = load(&common, mult)?;
            let (t1, t2) = match (t1.or(s.t1), t2.or(s.t2)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(CliError::Usage("kraus needs --t1 and --t2".into())),
            };
            if !(t1 >= 0.0 && t2 > t1 && t2.is_finite()) {
                return Err(CliError::Usage(format!("need 0 <= t1 < t2, got t1={t1}, t2={t2}")));
            }
            commands::kraus(&s, t1, t2, mult, out(&common).as_deref())
        }
        Command::ReachableSpin { common, horizon, samples } => {
            let s = load(&common, mult)?;
            let req = spin_request(&s, horizon, samples)?;
            commands::reachable_spin(&s, &req, mult, common.out.as_deref().map(Path::new))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Failure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("majoflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
