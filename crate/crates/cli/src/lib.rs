//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 input parse or validation error,
//! 3 simulation or output error. Nothing is written unless the whole command
//! succeeds.

mod commands;
mod output;
mod overrides;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::{OutputSet, PlotSpec};

#[derive(Debug, Parser)]
#[command(
    name = "meminductor",
    version,
    about = "Coil-core meminductor simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transient simulation of a series-loop netlist.
    Simulate(SimulateArgs),
    /// m-H loop of a coil-core device under a sine or step drive.
    Hysteresis(HysteresisArgs),
    /// Flux-time integral and meminductance along a constant-current drive.
    #[command(name = "rho-q")]
    RhoQ(RhoQArgs),
    /// Stimulus-anticipation experiment on a staircase loop.
    Amoeba(AmoebaArgs),
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    netlist: PathBuf,
    #[command(flatten)]
    out: OutArgs,
    /// Override a circuit value after parsing, e.g. `--set resistance=4.7`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Lower bound on R + phi'(q) for coil-core loops, ohms.
    #[arg(long, default_value_t = meminductor::engine::DEFAULT_STIFFNESS_FLOOR)]
    floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Drive {
    Sine,
    Step,
}

#[derive(Debug, Args)]
struct DeviceArgs {
    /// mu0 * S * M_s, webers.
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    flux_scale: f64,
    /// Effective switching coefficient, ampere-seconds.
    #[arg(long, default_value_t = meminductor::device::CoilCoreParams::DEFAULT_SW_EFF, allow_hyphen_values = true)]
    sw: f64,
    /// Initial magnetization in (-1, 1).
    #[arg(long, default_value_t = meminductor::device::CoilCoreParams::DEFAULT_M0, allow_hyphen_values = true)]
    m0: f64,
}

#[derive(Debug, Args)]
struct HysteresisArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long, value_enum, default_value_t = Drive::Sine)]
    drive: Drive,
    /// Sine frequency, hertz.
    #[arg(long, default_value_t = 1e3)]
    freq: f64,
    /// Drive amplitude, amperes. Defaults to the matched sine amplitude, or
    /// 1 A for a step.
    #[arg(long, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    #[arg(long, default_value_t = 2)]
    cycles: usize,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Observation window for the step drive, seconds.
    #[arg(long)]
    window: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct RhoQArgs {
    #[command(flatten)]
    device: DeviceArgs,
    /// Constant drive current, amperes.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    i0: f64,
    /// Largest charge, coulombs. Defaults to 10 sw.
    #[arg(long)]
    q_max: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    points: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct AmoebaArgs {
    /// Optional netlist whose R, C and staircase element replace the defaults.
    template: Option<PathBuf>,
    /// Override a configuration field, e.g. `--set f_sti=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    out: OutArgs,
}

/// Failure classes, one per nonzero exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Simulation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Simulation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Simulation(m) => m,
        }
    }
}

/// Runs one invocation; `argv[0]` is the program name. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(written) => {
            let mut stdout = std::io::stdout().lock();
            for path in written {
                let _ = writeln!(stdout, "{}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (outputs, dir) = match cli.command {
        Command::Simulate(a) => (commands::simulate(&a)?, a.out.out),
        Command::Hysteresis(a) => (commands::hysteresis(&a)?, a.out.out),
        Command::RhoQ(a) => (commands::rho_q(&a)?, a.out.out),
        Command::Amoeba(a) => (commands::amoeba(&a)?, a.out.out),
    };
    outputs
        .commit(&dir)
        .map_err(|e| CliError::Simulation(format!("cannot write to {}: {e}", dir.display())))
}
