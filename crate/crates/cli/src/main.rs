//! `semidot`: compare two grayscale images by semi-discrete optimal transport.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semidot::laguerre::assign_cells;
use semidot::measure::{image_to_density, image_to_discrete, DiscreteMeasure, GridDensity};
use semidot::multiscale::{solve_multiscale, MultiscaleOptions};
use semidot::objective::{evaluate_from_assignment, grad_l1_norm};
use semidot::optimizer::{write_trace_csv, OptimStatus, OptimizerConfig};
use semidot::pgm::read_pgm_file;
use semidot::render::{write_svg, RenderOptions};
use semidot::selftest::{self, Fault};
use semidot::transport::TransportReport;
use semidot::{Error, WeightVector};

const EXIT_OK: u8 = 0;
const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_ZERO_MASS: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "semidot", version, about = "Semi-discrete optimal transport between images")]
struct Cli {
    /// Worker threads for cell assignment (default: all cores).
    #[arg(long, global = true, env = "SEMIDOT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve and print a JSON report on stdout.
    Compare(RunArgs),
    /// Solve (or take --weights) and draw the diagram to --render.
    Render(RunArgs),
    /// Run the built-in consistency checks.
    Selftest {
        /// Negate this gradient component in every evaluation.
        #[arg(long, hide = true)]
        inject_fault: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Source image (PGM), treated as a density.
    source: PathBuf,
    /// Target image (PGM); every positive pixel becomes a site.
    target: PathBuf,
    /// Stop once the gradient's l1 norm is at most this.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Site reduction factor between levels.
    #[arg(long, default_value_t = 5)]
    factor: usize,
    /// Stop coarsening at this many sites.
    #[arg(long, default_value_t = 10)]
    coarsest: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Block-average the source grid by this factor before solving.
    #[arg(long, default_value_t = 1)]
    grid_divisor: usize,
    /// Write an SVG of the final diagram here.
    #[arg(long)]
    render: Option<PathBuf>,
    /// Write per-iteration optimizer records (CSV) here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Use these weights (whitespace separated, one per site) instead of solving.
    #[arg(long)]
    weights: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(path: &Path, e: Error) -> Self {
        let code = match e {
            Error::ZeroMassImage => EXIT_ZERO_MASS,
            _ => EXIT_BAD_INPUT,
        };
        let message = match e {
            Error::Io { .. } => e.to_string(),
            e => format!("{}: {e}", path.display()),
        };
        Failure { code, message }
    }

    fn other(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_BAD_INPUT,
            message: e.to_string(),
        }
    }
}

fn load_inputs(args: &RunArgs) -> Result<(GridDensity, DiscreteMeasure), Failure> {
    let src = read_pgm_file(&args.source).map_err(|e| Failure::input(&args.source, e))?;
    let dst = read_pgm_file(&args.target).map_err(|e| Failure::input(&args.target, e))?;
    let mut density = image_to_density(&src).map_err(|e| Failure::input(&args.source, e))?;
    let nu = image_to_discrete(&dst).map_err(|e| Failure::input(&args.target, e))?;
    if args.grid_divisor == 0 {
        return Err(Failure::other("--grid-divisor must be positive"));
    }
    if args.grid_divisor > 1 {
        density = density.coarsen(args.grid_divisor).map_err(Failure::other)?;
    }
    Ok((density, nu))
}

fn read_weights(path: &Path, n: usize) -> Result<WeightVector, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(path, Error::Io { path: path.to_path_buf(), source: e }))?;
    let mut w = Vec::new();
    for tok in text.split_whitespace() {
        let v: f64 = tok.parse().map_err(|_| Failure {
            code: EXIT_BAD_INPUT,
            message: format!("{}: not a number: {tok:?}", path.display()),
        })?;
        w.push(v);
    }
    if w.len() != n {
        return Err(Failure::input(path, Error::DimensionMismatch { expected: n, found: w.len() }));
    }
    WeightVector::new(w).map_err(|e| Failure::input(path, e))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
    let io = |e| Failure::input(path, Error::Io { path: path.to_path_buf(), source: e });
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    body(&mut out).map_err(io)?;
    out.flush().map_err(io)
}

fn run(args: &RunArgs, require_render: bool) -> Result<u8, Failure> {
    if require_render && args.render.is_none() {
        return Err(Failure::other("render: --render <PATH> is required"));
    }
    let cfg = OptimizerConfig::with_eps(args.eps);
    cfg.validate().map_err(Failure::other)?;
    if args.factor < 2 {
        return Err(Failure::other(format!("--factor must be at least 2, got {}", args.factor)));
    }
    let (density, nu) = load_inputs(args)?;

    let (w, levels, iterations, status) = match &args.weights {
        Some(path) => {
            let w = read_weights(path, nu.len())?;
            (w, vec![nu.len()], 0, None)
        }
        None => {
            let ms = MultiscaleOptions {
                factor: args.factor,
                coarsest: args.coarsest,
                seed: args.seed,
                ..Default::default()
            };
            let report = solve_multiscale(&density, &nu, &cfg, &ms).map_err(Failure::other)?;
            if let Some(path) = &args.trace {
                let top = report.per_level.len() - 1;
                let runs: Vec<_> = report
                    .per_level
                    .iter()
                    .enumerate()
                    .map(|(k, r)| (top - k, r))
                    .collect();
                write_file(path, |out| write_trace_csv(out, &runs))?;
            }
            let status = report.status();
            (
                report.final_w.clone(),
                report.level_sizes(),
                report.iterations_total(),
                Some(status),
            )
        }
    };

    let assignment = assign_cells(&density, &nu, &w).map_err(Failure::other)?;
    let grad_l1 = grad_l1_norm(&evaluate_from_assignment(&w, &nu, &assignment));

    if let Some(path) = &args.render {
        write_svg(path, &density, &nu, &w, &assignment, &RenderOptions::default())
            .map_err(|e| Failure::input(path, e))?;
    }
    if !require_render {
        let report = TransportReport::new(&assignment, &density, &nu, grad_l1, levels, iterations, args.seed);
        println!("{}", report.to_json());
    }

    let converged = match status {
        Some(s) => s == OptimStatus::Converged,
        None => require_render || grad_l1 <= args.eps,
    };
    if converged {
        Ok(EXIT_OK)
    } else {
        if let Some(s) = status {
            eprintln!("semidot: solver stopped without converging ({s:?}, gradient l1 {grad_l1:e})");
        }
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn selftest_cmd(fault: Option<usize>) -> u8 {
    let outcomes = selftest::run(fault.map(Fault::NegateGradient));
    for o in &outcomes {
        println!("{}", o.line());
    }
    if outcomes.iter().all(|o| o.passed) {
        EXIT_OK
    } else {
        EXIT_FAILED_CHECK
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("semidot: --threads must be positive");
            return ExitCode::from(EXIT_BAD_INPUT);
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let code = match &cli.command {
        Command::Compare(args) => run(args, false),
        Command::Render(args) => run(args, true),
        Command::Selftest { inject_fault } => Ok(selftest_cmd(*inject_fault)),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(f) => {
            eprintln!("semidot: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
