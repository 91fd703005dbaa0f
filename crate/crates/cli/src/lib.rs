//! Library surface of the command line tool, split out so integration tests
//! can drive the same code paths as the binary.
//!
//! Exit codes: 0 on success (and on passing suites), 1 when a verification
//! suite ran but has failing cases, 2 on configuration, parse, or usage
//! errors.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use grandmorrey::constants::{
    admissible_sigma, cz_constant, dominance_constant, maximal_constant, reduction_constant,
};
use grandmorrey::dsl;
use grandmorrey::grid::GridFunction;
use grandmorrey::norms::{
    eps_grid, grand_grand_norm, lebesgue_norm, morrey_norm, BallFamily, SweepGrids,
};
use grandmorrey::operators::{maximal, singular, OperatorKind};
use grandmorrey::verify::{
    default_corpus, run_dominance_suite, run_embedding_suite, run_operator_oracle_suite,
    run_reduction_suite, Report, SuiteOptions,
};

use config::Config;

#[derive(Debug, Parser)]
#[command(
    name = "grandmorrey",
    about = "Grand grand Morrey norms, maximal and singular operators, and \
             verification suites on explicit grids"
)]
struct Cli {
    /// JSON configuration file; a built-in baseline is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Report effective settings on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    /// Override space.p.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Override space.lambda.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Override space.theta.
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Override space.alpha.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Override suite.sigma.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the configured norm of the configured function.
    Norm,
    /// Apply the configured operator and emit the result as CSV.
    Operator,
    /// Evaluate one explicit constant.
    Constants {
        #[arg(value_enum)]
        which: ConstantKind,
    },
    /// Run a verification suite and write its report.
    Verify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConstantKind {
    /// Cap-domination constant of the term sweep.
    Dominance,
    /// Fixed-exponent maximal operator constant.
    Maximal,
    /// Fixed-exponent singular operator constant.
    Singular,
    /// Admissible sigma interval for the configured operator.
    SigmaRange,
    /// Full reduction constant at suite.sigma.
    Reduction,
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if help { ExitCode::SUCCESS } else { ExitCode::from(2) };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, String> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("config {}: {e}", path.display()))?;
            config::load_config(&text)?
        }
        None => Config::baseline(),
    };
    if let Some(p) = cli.p {
        config.space.p = p;
    }
    if let Some(lambda) = cli.lambda {
        config.space.lambda = lambda;
    }
    if let Some(theta) = cli.theta {
        config.space.theta = theta;
    }
    if let Some(alpha) = cli.alpha {
        config.space.alpha = alpha;
    }
    if let Some(sigma) = cli.sigma {
        config.suite.sigma = sigma;
    }
    config::revalidate(&config)?;
    if let Some(format) = &cli.format {
        if format != "json" && format != "csv" {
            return Err(format!("--format must be json or csv, got \"{format}\""));
        }
    }
    if cli.verbose {
        let effective =
            serde_json::to_string(&config).map_err(|e| format!("config serialization: {e}"))?;
        eprintln!("effective config: {effective}");
    }

    match cli.command {
        Command::Norm => run_norm(&cli, &config),
        Command::Operator => run_operator(&cli, &config),
        Command::Constants { which } => run_constants(which, &config),
        Command::Verify => run_verify(&cli, &config),
    }
}

fn sampled_function(config: &Config) -> Result<GridFunction, String> {
    let grid = config.to_grid()?;
    let ast = config.function.to_ast(grid.dim())?;
    dsl::sample(&ast, &grid).map_err(|e| format!("function: {e}"))
}

fn run_norm(cli: &Cli, config: &Config) -> Result<ExitCode, String> {
    let f = sampled_function(config)?;
    let grid = Arc::clone(f.grid());
    let space = config.space.to_space()?;
    let sweeps = config.sweeps.to_options();
    let kind = config.norm.kind.as_str();
    let value = match kind {
        "lebesgue" => lebesgue_norm(&f, space.p()),
        "morrey" => {
            let family = BallFamily::for_grid(&grid, &sweeps.balls);
            morrey_norm(&f, space.p(), space.lambda(), &family)
        }
        "grand_lebesgue" => {
            if space.lambda() != 0.0 || space.alpha() != 0.0 {
                return Err(
                    "norm.kind grand_lebesgue needs space.lambda = 0 and space.alpha = 0".into(),
                );
            }
            grand_grand_norm(&f, &space, &SweepGrids::new(&grid, &space, &sweeps))
        }
        "grand_grand" => grand_grand_norm(&f, &space, &SweepGrids::new(&grid, &space, &sweeps)),
        other => unreachable!("validated norm kind {other}"),
    }
    .map_err(|e| format!("norm: {e}"))?;
    let text = format!(
        "{kind} = {value:.16e}  cells = {}  dim = {}\n",
        grid.n_cells(),
        grid.dim()
    );
    emit(cli, config, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn run_operator(cli: &Cli, config: &Config) -> Result<ExitCode, String> {
    let f = sampled_function(config)?;
    let kind = config.operator.to_kind()?;
    let applied = match kind {
        OperatorKind::Maximal => maximal(&f),
        OperatorKind::Singular(kernel) => singular(&f, kernel, config.operator.delta_factor)
            .map_err(|e| format!("operator: {e}"))?,
    };
    emit(cli, config, &grid_function_csv(&applied))?;
    Ok(ExitCode::SUCCESS)
}

fn run_constants(which: ConstantKind, config: &Config) -> Result<ExitCode, String> {
    let space = config.space.to_space()?;
    let domain = config.domain.to_domain()?;
    let dim = config.domain.dim();
    let cfg = config.constants.to_config();
    let kind = config.operator.to_kind()?;
    let text = match which {
        ConstantKind::Dominance => {
            format!("dominance = {}", dominance_constant(dim, domain.diameter()))
        }
        ConstantKind::Maximal => {
            let v = maximal_constant(space.p(), space.lambda(), dim, cfg.c0)
                .map_err(|e| format!("constants: {e}"))?;
            format!("maximal = {v}")
        }
        ConstantKind::Singular => {
            let v = cz_constant(space.p(), space.lambda(), cfg.c)
                .map_err(|e| format!("constants: {e}"))?;
            format!("singular = {v}")
        }
        ConstantKind::SigmaRange => {
            let range =
                admissible_sigma(&space, kind).map_err(|e| format!("constants: {e}"))?;
            format!("sigma range = ({}, {})", range.lo, range.hi)
        }
        ConstantKind::Reduction => {
            let eps = eps_grid(space.s_max(), &config.sweeps.to_options().eps);
            let v = reduction_constant(&space, config.suite.sigma, kind, &cfg, dim, &eps)
                .map_err(|e| format!("constants: {e}"))?;
            format!("reduction = {v}")
        }
    };
    println!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn suite_options(config: &Config) -> SuiteOptions {
    SuiteOptions {
        resolution: config.grid.cells[0],
        levels: config.suite.max_levels,
        sweep: config.sweeps.to_options(),
        rel_tol: config.suite.rel_tol,
        seed: config.suite.seed,
        calibrate: config.constants.calibrate,
        constants: config.constants.to_config(),
        delta_factor: config.operator.delta_factor,
    }
}

fn run_verify(cli: &Cli, config: &Config) -> Result<ExitCode, String> {
    let space = config.space.to_space()?;
    let corpus = default_corpus(&space);
    let opts = suite_options(config);
    let report = match config.suite.name.as_str() {
        "embedding" => run_embedding_suite(&corpus, &space, &opts),
        "dominance" => {
            run_dominance_suite(&corpus, &space, config.suite.s, config.suite.sigma, &opts)
        }
        "reduction" => {
            let kind = config.operator.to_kind()?;
            run_reduction_suite(kind, &corpus, &space, config.suite.sigma, &opts)
        }
        "operator-oracle" => run_operator_oracle_suite(&opts),
        other => unreachable!("validated suite name {other}"),
    }
    .map_err(|e| format!("suite: {e}"))?;
    let text = match output_format(cli, config)? {
        "csv" => report_csv(&report),
        _ => {
            let mut json = serde_json::to_string_pretty(&report)
                .map_err(|e| format!("report serialization: {e}"))?;
            json.push('\n');
            json
        }
    };
    emit(cli, config, &text)?;
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn output_format<'a>(cli: &'a Cli, config: &'a Config) -> Result<&'a str, String> {
    Ok(cli
        .format
        .as_deref()
        .or(config.output.format.as_deref())
        .unwrap_or("json"))
}

/// Write `text` to the selected output target: `--out`, then the config's
/// output path, then stdout.
fn emit(cli: &Cli, config: &Config, text: &str) -> Result<(), String> {
    let path = cli
        .out
        .clone()
        .or_else(|| config.output.path.clone().map(PathBuf::from));
    match path {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Decimal CSV with 17 significant digits: values reload bit-exactly.
fn grid_function_csv(f: &GridFunction) -> String {
    let grid = f.grid();
    let dim = grid.dim();
    let mut out = String::with_capacity(grid.n_cells() * 32);
    out.push_str(if dim == 1 { "x1,value\n" } else { "x1,x2,value\n" });
    for (center, value) in grid.centers().iter().zip(f.values()) {
        if dim == 1 {
            let _ = writeln!(out, "{:.16e},{value:.16e}", center[0]);
        } else {
            let _ = writeln!(out, "{:.16e},{:.16e},{value:.16e}", center[0], center[1]);
        }
    }
    out
}

fn report_csv(report: &Report) -> String {
    let mut out = String::new();
    out.push_str("id,lhs,rhs,ratio,pass,cells,levels\n");
    for case in &report.cases {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{},{},{}",
            case.id, case.lhs, case.rhs, case.ratio, case.pass, case.grid.cells, case.grid.levels
        );
    }
    out
}
