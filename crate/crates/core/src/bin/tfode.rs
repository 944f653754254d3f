use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tfode::harness::{run_sweep, table_sweep, trace_csv, ConfigError, ProblemDef, Sweep};
use tfode::solver::{solve, DerivativeKind, SolverConfig, SolverError, StartMode};
use tfode::Error;

#[derive(Parser)]
#[command(name = "tfode", version, about = "Tempered fractional ODE solver and convergence harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Caputo,
    Rl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Start {
    Adams,
    Exact,
}

impl Start {
    fn name(self) -> &'static str {
        match self {
            Start::Adams => "adams",
            Start::Exact => "exact",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write the trajectory as CSV.
    Solve {
        #[arg(long, value_enum, default_value = "caputo")]
        kind: Kind,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda: f64,
        /// Initial data c0[,c1]; defaults to zeros (or the built-in's own data).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        init: Option<Vec<f64>>,
        /// Expression in t, u, alpha, lambda, or builtin:NAME.
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        b: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long = "N", default_value_t = 20)]
        quad_degree: usize,
        #[arg(long = "NI", default_value_t = 2)]
        interp_points: usize,
        #[arg(long)]
        split_t0: Option<f64>,
        #[arg(long, default_value_t = 40)]
        ntilde: usize,
        /// Exact solution: expression in t, alpha, lambda, or builtin:NAME.
        #[arg(long, allow_hyphen_values = true)]
        exact: Option<String>,
        /// Parameter of the example3/relax built-in.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, value_enum, default_value = "adams")]
        start: Start,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a step-halving sweep described by a JSON file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        start: Option<Start>,
        #[arg(long = "NI")]
        interp_points: Option<usize>,
        #[arg(long = "N")]
        quad_degree: Option<usize>,
        /// Fill the wall_ms column.
        #[arg(long)]
        timing: bool,
    },
    /// Reproduce one of the five canned error tables.
    Tables {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        which: u8,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "adams")]
        start: Start,
        #[arg(long)]
        timing: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 4,
        Error::Solver(SolverError::BlowUp { .. }) => 3,
        _ => 2,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|source| Error::Io { context: format!("writing {}", path.display()), source })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes the report and returns whether any row blew up.
fn report(sweep: &Sweep, out: Option<&Path>) -> Result<bool, Error> {
    let report = run_sweep(sweep)?;
    emit(out, &report.to_csv())?;
    let mut blew_up = false;
    for r in report.failures() {
        blew_up = true;
        eprintln!("alpha={} lambda={} tau={}: {}", r.alpha, r.lambda, r.tau, r.failure.as_deref().unwrap_or_default());
    }
    Ok(blew_up)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Solve {
            kind,
            alpha,
            lambda,
            init,
            rhs,
            a,
            b,
            steps,
            quad_degree,
            interp_points,
            split_t0,
            ntilde,
            exact,
            mu,
            start,
            out,
        } => {
            let kind = match kind {
                Kind::Caputo => DerivativeKind::Caputo,
                Kind::Rl => DerivativeKind::RiemannLiouville,
            };
            let def = ProblemDef { kind, rhs, init, exact, mu, a, b };
            let problem = def.build(alpha, lambda)?;
            let cfg = SolverConfig {
                quad_degree,
                split_t0,
                ntilde,
                start: match start {
                    Start::Adams => StartMode::Adams,
                    Start::Exact => StartMode::Exact,
                },
                ..SolverConfig::new(steps, interp_points)
            };
            let trace = solve(&problem, &cfg)?;
            emit(out.as_deref(), &trace_csv(&trace))?;
            if let Some(e) = trace.max_error() {
                eprintln!("max error {e:.6e}");
            }
            Ok(0)
        }
        Command::Sweep { config, out, start, interp_points, quad_degree, timing } => {
            let text = fs::read_to_string(&config)
                .map_err(|source| Error::Io { context: format!("reading {}", config.display()), source })?;
            let mut sweep = Sweep::from_json(&text)?;
            if let Some(start) = start {
                sweep.start = start.name().into();
            }
            if let Some(ni) = interp_points {
                sweep.interp_points = ni;
            }
            if let Some(n) = quad_degree {
                sweep.quad_degree = n;
            }
            sweep.timing |= timing;
            let out = out.or_else(|| sweep.out.as_ref().map(PathBuf::from));
            Ok(if report(&sweep, out.as_deref())? { 3 } else { 0 })
        }
        Command::Tables { which, out, start, timing } => {
            let mut sweep = table_sweep(which).ok_or_else(|| ConfigError::Invalid(format!("no table {which}")))?;
            sweep.start = start.name().into();
            sweep.timing = timing;
            Ok(if report(&sweep, out.as_deref())? { 3 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
