use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::{emit_curve, emit_rows, parse_curve_csv, parse_db, parse_spec, Format};
use crate::baselines::{
    analog_point, beta_bar, one_bit_slacks, prop1_gap, separation_point, AnalogAllocation,
};
use crate::checks::{run_suite, Suite};
use crate::error::{Error, Result};
use crate::frontier::{hull_with_timesharing, pareto_filter};
use crate::mcsim::{
    simulate_general_chain, simulate_strong_opt_chain, simulate_uncoded_broadcast,
    simulate_weak_opt_chain, McConfig,
};
use crate::mismatch::{mismatch_frontier, mismatch_point, MismatchGrid};
use crate::model::{
    BroadcastChannel, MismatchParams, ProblemSpec, SeparationParams, Theorem3Params, User,
};
use crate::ratedist::{point_to_point_optimum, reverse_waterfill};
use crate::schemes::{strong_user_optimal, theorem3_optimize, weak_user_optimal, OptimizeGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "hda",
    version,
    about = "Distortion trade-offs for hybrid digital-analog broadcast"
)]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineKind {
    Separation,
    Analog,
    BetaBar,
    Prop1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimScheme {
    Uncoded,
    Weak,
    Strong,
    General,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Analytic,
    Montecarlo,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Point-to-point reverse water-filling (JSON).
    Waterfill {
        /// Problem spec (JSON); stdin when omitted or `-`.
        spec: Option<PathBuf>,
        /// Total rate in nats; defaults to both users' channel capacities.
        #[arg(long)]
        rate: Option<f64>,
    },
    /// One extreme point of the hybrid scheme.
    Extreme {
        #[arg(long, value_enum)]
        which: Which,
        spec: Option<PathBuf>,
    },
    /// Search the general scheme for a weighted objective.
    Tradeoff {
        spec: Option<PathBuf>,
        /// Weight on D_s; 1 - weight goes on D_w.
        #[arg(long, default_value_t = 0.5)]
        weight: f64,
        /// Grid points per continuous axis.
        #[arg(long, default_value_t = 33)]
        grid: usize,
        /// Report only the time-sharing hull.
        #[arg(long)]
        hull: bool,
    },
    /// Closed-form trade-off for white sources with bandwidth mismatch.
    Mismatch {
        #[arg(long)]
        alpha: f64,
        /// P / N_s, linear or with a dB suffix.
        #[arg(long)]
        snr_s: String,
        /// P / N_w, linear or with a dB suffix.
        #[arg(long)]
        snr_w: String,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        /// Evaluate a single point (requires --gamma).
        #[arg(long, requires = "gamma")]
        lambda: Option<f64>,
        #[arg(long, requires = "lambda")]
        gamma: Option<f64>,
        /// Skip the exact extreme points and keep only grid points.
        #[arg(long)]
        grid_only: bool,
    },
    /// Pareto-filter (or hull) a curve read from CSV.
    Frontier {
        /// CSV in the emitted curve format; stdin when omitted or `-`.
        input: Option<PathBuf>,
        #[arg(long)]
        hull: bool,
    },
    /// Reference schemes.
    Baseline {
        #[arg(long, value_enum)]
        kind: BaselineKind,
        spec: Option<PathBuf>,
        /// Strong-only power fraction for separation; sweeps when omitted.
        #[arg(long)]
        beta: Option<f64>,
        /// Points in the separation sweep.
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Monte-Carlo validation of a coding chain (JSON report).
    Simulate {
        #[arg(long, value_enum)]
        scheme: SimScheme,
        spec: Option<PathBuf>,
        /// General-scheme parameters (JSON), for `--scheme general`.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the built-in acceptance checks.
    Check {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
}

fn read_source(path: Option<&PathBuf>) -> Result<String> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            File::open(p)
                .and_then(|mut f| f.read_to_string(&mut text))
                .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
        }
        _ => {
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Error::Parse(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn load_spec(path: Option<&PathBuf>) -> Result<ProblemSpec> {
    parse_spec(&read_source(path)?)
}

fn write_json<T: Serialize>(value: &T, sink: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *sink, value)
        .map_err(|e| Error::SinkWriteError(e.to_string()))?;
    writeln!(sink)?;
    Ok(())
}

/// Outcome of a subcommand that ran to completion.
enum Status {
    Done,
    CheckFailed,
}

fn dispatch(cli: &Cli, sink: &mut dyn Write) -> Result<Status> {
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    match &cli.command {
        Command::Waterfill { spec, rate } => {
            let spec = load_spec(spec.as_ref())?;
            match rate {
                Some(r) => write_json(&reverse_waterfill(spec.variances(), *r)?, sink)?,
                None => {
                    #[derive(Serialize)]
                    struct Both {
                        strong: crate::ratedist::WaterfillResult,
                        weak: crate::ratedist::WaterfillResult,
                    }
                    let both = Both {
                        strong: point_to_point_optimum(&spec, User::Strong),
                        weak: point_to_point_optimum(&spec, User::Weak),
                    };
                    write_json(&both, sink)?;
                }
            }
        }
        Command::Extreme { which, spec } => {
            let spec = load_spec(spec.as_ref())?;
            let pt = match which {
                Which::Weak => weak_user_optimal(&spec),
                Which::Strong => strong_user_optimal(&spec),
            };
            emit_curve(&[pt], format, sink)?;
        }
        Command::Tradeoff {
            spec,
            weight,
            grid,
            hull,
        } => {
            let spec = load_spec(spec.as_ref())?;
            let grid = OptimizeGrid {
                points_per_axis: *grid,
                ..OptimizeGrid::default()
            };
            let mut points = theorem3_optimize(&spec, *weight, &grid)?;
            if *hull {
                points = hull_with_timesharing(&points);
            }
            emit_curve(&points, format, sink)?;
        }
        Command::Mismatch {
            alpha,
            snr_s,
            snr_w,
            sigma2,
            grid,
            lambda,
            gamma,
            grid_only,
        } => {
            let ch = BroadcastChannel::from_snr(parse_db(snr_s)?, parse_db(snr_w)?)?;
            let points = match (lambda, gamma) {
                (Some(l), Some(g)) => {
                    vec![mismatch_point(
                        &MismatchParams::new(*sigma2, *alpha, *l, *g)?,
                        &ch,
                    )?]
                }
                _ => {
                    if *alpha == 1.0 {
                        return Err(Error::AlphaOutOfRange {
                            alpha: 1.0,
                            expected: "alpha != 1",
                        });
                    }
                    crate::error::positive("sigma2", *sigma2)?;
                    let g = MismatchGrid {
                        points: *grid,
                        include_extremes: !grid_only,
                    };
                    mismatch_frontier(*sigma2, *alpha, &ch, &g)?
                }
            };
            emit_curve(&points, format, sink)?;
        }
        Command::Frontier { input, hull } => {
            let rows = parse_curve_csv(read_source(input.as_ref())?.as_bytes())?;
            let rows = if *hull {
                hull_with_timesharing(&rows)
            } else {
                pareto_filter(&rows)
            };
            emit_rows(&rows, format, sink)?;
        }
        Command::Baseline {
            kind,
            spec,
            beta,
            grid,
        } => {
            let spec = load_spec(spec.as_ref())?;
            match kind {
                BaselineKind::Separation => {
                    let betas: Vec<f64> = match beta {
                        Some(b) => vec![*b],
                        None if *grid >= 2 => {
                            (0..*grid).map(|i| i as f64 / (*grid - 1) as f64).collect()
                        }
                        None => return Err(Error::GridTooCoarse(*grid)),
                    };
                    let points = betas
                        .into_iter()
                        .map(|b| Ok(separation_point(&spec, &SeparationParams::new(b)?)))
                        .collect::<Result<Vec<_>>>()?;
                    emit_curve(&points, format, sink)?;
                }
                BaselineKind::Analog => {
                    emit_curve(
                        &[analog_point(&spec, &AnalogAllocation::Optimal)?],
                        format,
                        sink,
                    )?;
                }
                BaselineKind::BetaBar => {
                    let b = beta_bar(&spec);
                    let slacks = one_bit_slacks(&spec, b);
                    write_json(
                        &serde_json::json!({ "beta_bar": b, "one_bit_slacks_bits": slacks }),
                        sink,
                    )?;
                }
                BaselineKind::Prop1 => write_json(&prop1_gap(&spec)?, sink)?,
            }
        }
        Command::Simulate {
            scheme,
            spec,
            params,
            samples,
            seed,
        } => {
            let spec = load_spec(spec.as_ref())?;
            let cfg = McConfig::new(*samples, *seed);
            let report = match scheme {
                SimScheme::Uncoded => {
                    simulate_uncoded_broadcast(spec.variances()[0], spec.channel(), &cfg)?
                }
                SimScheme::Weak => simulate_weak_opt_chain(&spec, &cfg)?,
                SimScheme::Strong => simulate_strong_opt_chain(&spec, &cfg)?,
                SimScheme::General => {
                    let path = params.as_ref().ok_or_else(|| {
                        Error::InvalidArgument("--scheme general needs --params".into())
                    })?;
                    let params: Theorem3Params = serde_json::from_str(&read_source(Some(path))?)
                        .map_err(|e| Error::Parse(e.to_string()))?;
                    simulate_general_chain(&spec, &params, &cfg)?
                }
            };
            write_json(&report, sink)?;
            if !report.pass {
                return Ok(Status::CheckFailed);
            }
        }
        Command::Check { suite, samples } => {
            let suite = match suite {
                SuiteArg::Analytic => Suite::Analytic,
                SuiteArg::Montecarlo => Suite::MonteCarlo,
                SuiteArg::All => Suite::All,
            };
            let results = run_suite(suite, *samples);
            for r in &results {
                writeln!(sink, "{r}")?;
            }
            if results.iter().any(|r| !r.passed) {
                return Ok(Status::CheckFailed);
            }
        }
    }
    Ok(Status::Done)
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InfeasibleParams(_) => EXIT_INFEASIBLE,
        _ => EXIT_VALIDATION,
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.out {
        Some(path) => File::create(path)
            .map_err(|e| Error::SinkWriteError(format!("{}: {e}", path.display())))
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                let status = dispatch(&cli, &mut w)?;
                w.flush()?;
                Ok(status)
            }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            dispatch(&cli, &mut lock)
        }
    };
    match result {
        Ok(Status::Done) => EXIT_OK,
        Ok(Status::CheckFailed) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
