//! Command-line front end for filter-forge.

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use filter_forge::design::{design_weight, DesignConfig, ParametricWeight, DESIGN_LOG_HEADER};
use filter_forge::io::{csv_table, curve_csv, read_filter, read_weight, write_filter, write_weight};
use filter_forge::optim::{fit_filter, OptimizerConfig, Termination};
use filter_forge::report::{benchmark, rate_table, BENCHMARK_HEADER, RATE_HEADER};
use filter_forge::sim::{generate_problem, standard_problem, SimulationConfig};
use filter_forge::{
    gauss_legendre_filter, BuiltinFilter, BuiltinWeight, Error, Filter, FilterFamily, Gap, Objective, Problem, Weight,
};

#[derive(Parser)]
#[command(
    name = "filter-forge",
    version,
    about = "Design, optimize and test rational filters for interior eigenproblems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a filter to a weighted least-squares objective.
    Optimize(OptimizeArgs),
    /// Sample a filter on an interval.
    Eval(EvalArgs),
    /// Tabulate worst-case rates over gaps and pole counts.
    Rates(RatesArgs),
    /// Search for a step weight whose fitted filter has a small worst-case rate.
    DesignWeight(DesignArgs),
    /// Run subspace iteration on synthetic problems.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct OptimizeArgs {
    /// Builtin weight name or weight JSON file.
    #[arg(long)]
    weight: String,
    /// Builtin filter name, `gauss-legendre` (sized by --poles) or filter JSON file.
    #[arg(long, default_value = "gauss-legendre16")]
    start: String,
    /// Lower bound on the imaginary parts of the poles.
    #[arg(long)]
    lb: Option<f64>,
    #[arg(long, default_value_t = 16)]
    poles: usize,
    /// Maximum number of objective evaluations.
    #[arg(long, default_value_t = 5000)]
    budget: usize,
    /// Gradient tolerance (infinity norm).
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output filter file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional CSV trace of the iterations.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Builtin filter name, `gauss-legendre` (sized by --poles) or filter JSON file.
    filter: String,
    #[arg(long, default_value_t = 16)]
    poles: usize,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = 401)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatesArgs {
    /// Filter families (default: all).
    families: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.925, 0.95])]
    gap: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [8, 12, 16, 20])]
    poles: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    /// Starting parameters: `gamma-slise` or `enhanced-gamma-slise`.
    #[arg(long, default_value = "gamma-slise")]
    start: String,
    #[arg(long, default_value_t = 0.95)]
    gap: f64,
    #[arg(long, default_value_t = 16)]
    poles: usize,
    /// Maximum number of weight candidates evaluated.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    /// Output weight file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional CSV log of every evaluated candidate.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    /// Synthetic 200x200 problems with 20 interior eigenvalues.
    Standard,
    /// Diagonal 8x8 problem with four interior eigenvalues.
    Smoke,
}

#[derive(Args)]
struct SimulateArgs {
    /// Filters to compare (default: the three 16-pole reference filters).
    filters: Vec<String>,
    #[arg(long, value_enum, default_value = "standard")]
    suite: Suite,
    /// Number of problems drawn from the standard suite.
    #[arg(long, default_value_t = 4)]
    problems: usize,
    /// Block size as a multiple of the interior eigenvalue count.
    #[arg(long, default_value_t = 1.1)]
    multiplier: f64,
    /// Relative eigentrace tolerance.
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iterations: usize,
    /// Seed of the random starting block.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    poles: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Whether the command reached its goal; `false` maps to exit code 1.
type Outcome = Result<bool, Error>;

fn pole_groups(poles: usize) -> Result<usize, Error> {
    if poles == 0 || poles % 4 != 0 {
        return Err(Error::Domain(format!("--poles must be a positive multiple of 4, got {poles}")));
    }
    Ok(poles / 4)
}

fn resolve_filter(arg: &str, poles: usize) -> Result<Filter, Error> {
    if let Ok(builtin) = arg.parse::<BuiltinFilter>() {
        return Ok(builtin.filter());
    }
    if arg.eq_ignore_ascii_case("gauss-legendre") {
        return gauss_legendre_filter(pole_groups(poles)?);
    }
    read_filter(Path::new(arg))
}

fn resolve_weight(arg: &str) -> Result<Weight, Error> {
    match arg.parse::<BuiltinWeight>() {
        Ok(builtin) => Ok(builtin.weight()),
        Err(_) => read_weight(Path::new(arg)),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("cannot write {}: {e}", path.display())))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(Error::Io(e)),
                _ => Ok(()),
            }
        }
    }
}

fn optimize(args: &OptimizeArgs) -> Outcome {
    let weight = resolve_weight(&args.weight)?;
    let start = resolve_filter(&args.start, args.poles)?;
    let objective = Objective::new(weight, start.m())?;
    let config = OptimizerConfig::default().with_max_evaluations(args.budget).with_gradient_tolerance(args.tol);
    let fit = fit_filter(&objective, &start, args.lb, &config)?;
    let report = &fit.report;
    eprintln!(
        "residual {:.6e} after {} iterations, {} evaluations ({})",
        fit.loss, report.iterations, report.loss_evaluations, report.termination
    );
    if let Some(path) = &args.trace {
        let rows = report.trace.iter().map(|r| {
            vec![r.iteration.to_string(), r.loss.to_string(), r.grad_norm.to_string(), r.evaluations.to_string()]
        });
        emit(Some(path), &csv_table("iteration,loss,grad_norm,evaluations", rows))?;
    }
    match &args.out {
        Some(path) => write_filter(path, &fit.filter)?,
        None => emit(None, &format!("{}\n", filter_forge::io::filter_to_json(&fit.filter)))?,
    }
    let stalled = matches!(report.termination, Termination::MaxIter | Termination::MaxEval)
        || (report.termination == Termination::LineSearchFail && report.iterations == 0);
    Ok(!stalled)
}

fn eval(args: &EvalArgs) -> Outcome {
    let filter = resolve_filter(&args.filter, args.poles)?;
    emit(args.out.as_deref(), &curve_csv(&filter, args.from, args.to, args.samples)?)?;
    Ok(true)
}

fn rates(args: &RatesArgs) -> Outcome {
    let families = if args.families.is_empty() {
        FilterFamily::ALL.to_vec()
    } else {
        args.families.iter().map(|f| f.parse()).collect::<Result<Vec<FilterFamily>, _>>()?
    };
    let rows = rate_table(&families, &args.gap, &args.poles)?;
    emit(args.out.as_deref(), &csv_table(RATE_HEADER, rows.iter().map(|r| r.cells())))?;
    Ok(true)
}

fn design(args: &DesignArgs) -> Outcome {
    let start = match args.start.to_ascii_lowercase().as_str() {
        "gamma-slise" => ParametricWeight::gamma_slise(),
        "enhanced-gamma-slise" => ParametricWeight::enhanced_gamma_slise(),
        other => {
            return Err(Error::Lookup { kind: "parametric weight", name: other.to_string() });
        }
    };
    let m = pole_groups(args.poles)?;
    let gap = Gap::new(args.gap)?;
    let config = DesignConfig::default().with_budget(args.budget);
    let outcome = design_weight(&start, gap, m, &config)?;
    if let Some(first) = outcome.log.first() {
        eprintln!(
            "worst-case rate {:.6e} -> {:.6e} over {} candidates",
            first.objective,
            outcome.objective,
            outcome.log.len()
        );
    }
    if let Some(path) = &args.trace {
        emit(Some(path), &csv_table(DESIGN_LOG_HEADER, outcome.log.iter().map(|r| r.cells())))?;
    }
    let weight = outcome.weight.realize();
    match &args.out {
        Some(path) => write_weight(path, &weight)?,
        None => emit(None, &format!("{}\n", filter_forge::io::weight_to_json(&weight)))?,
    }
    Ok(outcome.objective.is_finite() || outcome.log.is_empty())
}

fn simulate(args: &SimulateArgs) -> Outcome {
    let names: Vec<String> = if args.filters.is_empty() {
        [BuiltinFilter::GaussLegendre16, BuiltinFilter::GammaSlise16, BuiltinFilter::EnhancedGammaSlise16]
            .iter()
            .map(|b| b.name().to_string())
            .collect()
    } else {
        args.filters.clone()
    };
    let filters =
        names.iter().map(|n| Ok((n.clone(), resolve_filter(n, args.poles)?))).collect::<Result<Vec<_>, Error>>()?;
    let problems: Vec<Problem> = match args.suite {
        Suite::Standard => (0..args.problems as u64).map(standard_problem).collect::<Result<_, _>>()?,
        Suite::Smoke => vec![generate_problem(&[-3.0, -1.5, -0.7, -0.3, 0.3, 0.7, 1.5, 3.0], 0)?],
    };
    let config = SimulationConfig {
        tolerance: args.tol,
        max_iterations: args.max_iterations,
        seed: args.seed,
        ..SimulationConfig::default()
    };
    let rows = benchmark(&problems, &filters, args.multiplier, &config)?;
    emit(args.out.as_deref(), &csv_table(BENCHMARK_HEADER, rows.iter().map(|r| r.cells())))?;
    let failed = rows.iter().filter(|r| !r.converged).count();
    if failed > 0 {
        warn!("{failed} of {} runs did not converge", rows.len());
    }
    Ok(failed == 0)
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("FILTER_FORGE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("FILTER_FORGE_THREADS must be a non-negative integer, got '{value}'")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Domain(format!("cannot configure thread pool: {e}")))?;
        info!("using {threads} worker threads");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Optimize(a) => optimize(a),
        Command::Eval(a) => eval(a),
        Command::Rates(a) => rates(a),
        Command::DesignWeight(a) => design(a),
        Command::Simulate(a) => simulate(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Numeric(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
