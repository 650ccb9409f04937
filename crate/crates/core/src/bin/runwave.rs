use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use runwave::cli::{self, config::parse_window, Command, Overrides};

#[derive(Parser)]
#[command(name = "runwave", version, about = "Closed-loop atom localization")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// R(Φ) and dR/dΦ over one period (CSV)
    RatioCurve(Common),
    /// Candidate positions against the ratio (CSV)
    PositionCurve(Common),
    /// Candidate intervals for one measurement (JSON)
    Invert(Common),
    /// Coarse-to-fine localization of a simulated atom (JSON)
    Protocol(Common),
    /// Relative phase maximizing the slope at an estimated position (JSON)
    OptimizePhi0(Common),
    /// Numerical steady state of the diamond (JSON)
    SteadyState(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi0: Option<f64>,
    /// Measured ratio
    #[arg(long = "R")]
    ratio: Option<f64>,
    #[arg(long)]
    rel_err: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z_true: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Search window LO:HI in wavelengths
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<(f64, f64)>,
    #[arg(long)]
    seed: Option<u64>,
    /// Loop phase for steady-state
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    /// Position estimate for optimize-phi0
    #[arg(long, allow_hyphen_values = true)]
    z_est: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, c) = match cli.command {
        Cmd::RatioCurve(c) => (Command::RatioCurve, c),
        Cmd::PositionCurve(c) => (Command::PositionCurve, c),
        Cmd::Invert(c) => (Command::Invert, c),
        Cmd::Protocol(c) => (Command::Protocol, c),
        Cmd::OptimizePhi0(c) => (Command::OptimizePhi0, c),
        Cmd::SteadyState(c) => (Command::SteadyState, c),
    };
    let overrides = Overrides {
        x: c.x,
        xi: c.xi,
        phi0: c.phi0,
        ratio: c.ratio,
        rel_err: c.rel_err,
        z_true: c.z_true,
        points: c.points,
        window: c.window,
        seed: c.seed,
        phi: c.phi,
        z_est: c.z_est,
    };
    let result = cli::load_config(c.config.as_deref(), &overrides).and_then(|cfg| cli::run(cmd, &cfg));
    match result {
        Ok(text) => {
            let written = match &c.out {
                Some(path) => std::fs::write(path, text),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(text.as_bytes())
                }
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(cli::exit::OTHER as u8);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
