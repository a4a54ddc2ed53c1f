//! `relphase` — batch experiments over the phase-averaging and
//! relative-phase constructions, with deterministic CSV/JSON reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relphase_cli::report::Format;
use relphase_cli::{acceptance, commands, parse, CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "relphase",
    about = "Phase-averaged states, displacement averaging on a ring, and relative-phase factorization experiments",
    long_about = "Runs the library's constructions as named experiments and writes \
machine-readable reports (CSV with '#' metadata lines, or a JSON mirror with \
'meta' and 'rows' keys). Complex amplitudes are written as a plain real \
('1.0') or modulus@phase-radians ('1.0@0.7'). Exit codes: 0 success, \
2 configuration error, 3 numeric tolerance breach."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Parallelism bound for sweep points.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Seed for the randomized subcommands (selftest).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Average a coherent state's phase over a prior and tabulate the
    /// number-basis weights.
    PhaseAverage {
        /// Coherent amplitude (real or modulus@phase).
        #[arg(long)]
        alpha: String,
        /// Prior: flat | delta:<phi0> | vonmises:<mu>,<kappa> | grid:<path>.
        #[arg(long, default_value = "flat")]
        prior: String,
        /// Photon-number cutoff (default: mean + 8·sqrt(mean) + 10).
        #[arg(long)]
        cutoff: Option<usize>,
        /// Quadrature resolution for smooth priors (default: max(256, 2·dim)).
        #[arg(long)]
        resolution: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Displacement averaging of two particles on the ring Z_d: invariance
    /// table, factorization residuals, and SUM-gate diagnostics.
    WayDemo {
        /// Number of lattice sites (odd, >= 7).
        #[arg(long)]
        d: usize,
        /// Comma-separated priors over shifts (sites in place of angles).
        #[arg(long, default_value = "flat,delta:0,delta:5")]
        priors: String,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Factorization quality of the relative-phase state for one (alpha, beta).
    RelphaseFidelity {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        /// Per-mode two-mode cutoff (default: auto from |alpha|, |beta|).
        #[arg(long)]
        cutoff: Option<usize>,
        /// Relative Fock-space cutoff (default: auto from |alpha|).
        #[arg(long)]
        rel_cutoff: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Factorization reports over a range of |beta|, one row per point.
    Sweep {
        #[arg(long)]
        alpha: String,
        /// Range of |beta|: '4', '2,4,8', '2:16:x2' (geometric), '1:3:+0.5'.
        #[arg(long)]
        beta: String,
        /// Phase applied to every beta in the range (radians).
        #[arg(long, default_value_t = 0.0)]
        beta_phase: f64,
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long)]
        rel_cutoff: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Run the acceptance suite and write its report.
    Selftest {
        #[command(flatten)]
        io: IoArgs,
    },
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let (report, io, ok) = match cli.command {
        Command::PhaseAverage {
            alpha,
            prior,
            cutoff,
            resolution,
            io,
        } => {
            let alpha = parse::parse_complex(&alpha)?;
            (
                commands::phase_average_report(alpha, &prior, cutoff, resolution)?,
                io,
                true,
            )
        }
        Command::WayDemo { d, priors, io } => (commands::way_demo_report(d, &priors)?, io, true),
        Command::RelphaseFidelity {
            alpha,
            beta,
            cutoff,
            rel_cutoff,
            io,
        } => {
            let alpha = parse::parse_complex(&alpha)?;
            let beta = parse::parse_complex(&beta)?;
            (
                commands::relphase_report(alpha, beta, cutoff, rel_cutoff)?,
                io,
                true,
            )
        }
        Command::Sweep {
            alpha,
            beta,
            beta_phase,
            cutoff,
            rel_cutoff,
            io,
        } => {
            let alpha = parse::parse_complex(&alpha)?;
            let betas = parse::parse_range(&beta)?;
            if !beta_phase.is_finite() {
                return Err(CliError::Config("beta phase must be finite".to_string()));
            }
            (
                commands::sweep_report(alpha, &betas, beta_phase, cutoff, rel_cutoff, io.jobs)?,
                io,
                true,
            )
        }
        Command::Selftest { io } => {
            let (report, outcomes, all_passed) = acceptance::run_selftest(io.seed);
            for o in &outcomes {
                eprintln!(
                    "criterion {:>2} {}: {} ({:.2}s)",
                    o.id,
                    if o.passed { "PASS" } else { "FAIL" },
                    o.name,
                    o.seconds
                );
            }
            (report, io, all_passed)
        }
    };
    report.write(io.out.as_deref(), io.format.into())?;
    if ok {
        Ok(ExitCode::SUCCESS)
    } else {
        // Criterion failures are numeric breaches, not config mistakes.
        Ok(ExitCode::from(3))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("relphase: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
