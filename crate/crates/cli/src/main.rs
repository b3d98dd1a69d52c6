use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use toa_core::engine::{GridPolicy, TimeGrid};
use toa_core::io::{load_scenario, run, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Arrival-time densities at every detector
    Distribution,
    /// Barrier height or width sweep of the mean arrival time
    Sweep,
    /// Classical equation-of-time tables
    Classical,
    /// Invariant checks
    Validate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Distribution => Command::Distribution,
            Cmd::Sweep => Command::Sweep,
            Cmd::Classical => Command::Classical,
            Cmd::Validate => Command::Validate,
        }
    }
}

/// Quantum time-of-arrival distributions for 1-D wave packets.
///
/// Set TOA_THREADS to cap the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "toa", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Scenario file
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (overrides the scenario)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render SVG plots
    #[arg(long)]
    svg: bool,
    /// Relative tolerance of the momentum quadratures
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed time grid as t_min,t_max,n
    #[arg(long, value_parser = parse_grid)]
    grid: Option<TimeGrid>,
}

fn parse_grid(s: &str) -> Result<TimeGrid, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("expected t_min,t_max,n, got '{s}'"));
    };
    let f = |v: &str| v.parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    let n = n.parse::<usize>().map_err(|e| format!("'{n}': {e}"))?;
    TimeGrid::new(f(a)?, f(b)?, n).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    toa_core::par::init_from_env();
    let mut cfg = match load_scenario(&args.scenario) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(dir) = args.out {
        cfg.output.dir = dir;
    }
    cfg.output.svg |= args.svg;
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol < 1.0) {
            eprintln!("error: --tol must lie in (0, 1), got {tol}");
            return ExitCode::from(2);
        }
        cfg.options.rel_tol = tol;
    }
    if let Some(g) = args.grid {
        cfg.grid = GridPolicy::Fixed(g);
    }
    match run(&cfg, args.command.into()) {
        Ok(report) => {
            for m in &report.messages {
                println!("{m}");
            }
            for a in &report.artifacts {
                println!("wrote {}", a.display());
            }
            if report.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
