use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use syncvar::rational::{self, Rational};
use syncvar::variation::{DEFAULT_KMAX, DEPTH_CAP};
use syncvar::Gamma;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "syncvar", version, about = "Sync functions of piecewise affine Markov maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Print exact rationals where available instead of decimals.
    #[arg(long, global = true)]
    exact: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the Markov, expanding and transitivity conditions.
    Validate { map: PathBuf },
    /// Regime thresholds 1/K, exp(-h_top), exp(-lyap) and exceptional gamma values.
    Regimes { map: PathBuf },
    /// Sample phi on a uniform grid plus one-sided limits at breakpoints.
    Graph {
        map: PathBuf,
        #[arg(long, value_parser = parse_gamma)]
        gamma: Gamma,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(2..))]
        points: u64,
        #[arg(long, default_value_t = 1e-10, value_parser = parse_tol)]
        tol: f64,
    },
    /// Upper bound, lower bounds by depth, verdict and divergence certificate.
    Variation {
        map: PathBuf,
        #[arg(long, value_parser = parse_gamma)]
        gamma: Gamma,
        #[arg(long, default_value_t = 12, value_parser = parse_depth)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_KMAX)]
        kmax: usize,
    },
    /// Classify every gamma of a grid `lo:hi:step`.
    Scan {
        map: PathBuf,
        #[arg(long = "gamma", value_parser = parse_grid)]
        grid: Grid,
        #[arg(long, default_value_t = 12, value_parser = parse_depth)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_KMAX)]
        kmax: usize,
    },
    /// Witnesses, exceptional polynomials and their roots above exp(-h_top).
    Exceptional {
        map: PathBuf,
        /// Pullback depth for the witness search.
        #[arg(long, default_value_t = 16)]
        depth: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Grid {
    lo: Rational,
    hi: Rational,
    step: Rational,
}

fn parse_gamma(s: &str) -> Result<Gamma, String> {
    Gamma::parse(s).map_err(|e| e.to_string())
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("tolerance must be a positive number, got `{s}`")),
    }
}

fn parse_depth(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(d) if d <= DEPTH_CAP => Ok(d),
        _ => Err(format!("depth must be an integer in 0..={DEPTH_CAP}")),
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err("grid must be lo:hi:step".into());
    };
    let p = |x: &str| rational::parse_rational_or_decimal(x).map_err(|e| e.to_string());
    let grid = Grid {
        lo: p(lo)?,
        hi: p(hi)?,
        step: p(step)?,
    };
    syncvar::analysis::gamma_grid(&grid.lo, &grid.hi, &grid.step).map_err(|e| e.to_string())?;
    Ok(grid)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = commands::Options {
        format: cli.format,
        exact: cli.exact,
    };
    let result = match &cli.command {
        Command::Validate { map } => commands::validate(map, &opts),
        Command::Regimes { map } => commands::regimes(map, &opts),
        Command::Graph {
            map,
            gamma,
            points,
            tol,
        } => commands::graph(map, gamma, *points as usize, *tol, &opts),
        Command::Variation {
            map,
            gamma,
            depth,
            kmax,
        } => commands::variation(map, gamma, *depth, *kmax, &opts),
        Command::Scan {
            map,
            grid,
            depth,
            kmax,
        } => commands::scan(map, (&grid.lo, &grid.hi, &grid.step), *depth, *kmax, &opts),
        Command::Exceptional { map, depth } => commands::exceptional(map, *depth, &opts),
    };
    match result {
        Ok(text) => match &cli.out {
            Some(path) => match std::fs::write(path, text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    ExitCode::from(1)
                }
            },
            None => {
                let mut out = std::io::stdout().lock();
                match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
                    Err(e) => {
                        eprintln!("error: cannot write output: {e}");
                        ExitCode::from(1)
                    }
                }
            }
        },
        Err(e) => {
            if !e.partial.is_empty() {
                print!("{}", e.partial);
            }
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
