use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use cellform::{
    brute_force_families, build_network, build_report, dissimilarity_matrix, render_table,
    run_heuristic, solve_family_formation_with, solve_qap, usage_factors, CellConfig, CellError,
    CellSolution, FamilyError, Instance, ReportFormat, RouteId, SolveOptions,
};
use cellform_cli::instance_file::parse_instance;
use clap::{Parser, Subcommand, ValueEnum};

/// Route selection, family formation, and machine-cell formation for
/// cellular manufacturing instances with alternative process routes.
#[derive(Parser)]
#[command(name = "cellform", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pick one route per part, group the routes into families, and
    /// place machines and families into cells.
    Solve(SolveArgs),
    /// Write the family-formation flow network in DIMACS min-cost-flow
    /// format (side constraints follow as comments).
    ExportNetwork(ExportArgs),
    /// Solve family formation by exhaustive enumeration. Only feasible
    /// for small instances; useful as an independent check.
    Oracle(OracleArgs),
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Instance file to solve.
    #[arg(long)]
    instance: PathBuf,
    /// Number of cells available (default: one per family).
    #[arg(long)]
    cells: Option<usize>,
    /// Machine capacity of each cell (default: machines divided evenly
    /// across the cells, rounded up).
    #[arg(long)]
    cell_cap: Option<usize>,
    /// Cell-formation method.
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Cross-check family formation against exhaustive enumeration
    /// (small instances only).
    #[arg(long)]
    seed_check: bool,
    /// Branch-and-bound node budget for family formation.
    #[arg(long)]
    node_limit: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Qap,
    Heuristic,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(clap::Args)]
struct ExportArgs {
    /// Instance file to read.
    #[arg(long)]
    instance: PathBuf,
    /// File to write the DIMACS network to.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct OracleArgs {
    /// Instance file to enumerate.
    #[arg(long)]
    instance: PathBuf,
    /// Also run the regular solver and report EQUAL or UNEQUAL.
    #[arg(long)]
    compare: bool,
}

/// A failure to report on stderr, with the process exit code: 2 for bad
/// input (file, syntax, model, or configuration), 3 for a search that hit
/// its budget, 1 for everything that indicates a bug or a disagreement.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }

    fn timeout(message: impl ToString) -> Self {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }

    fn internal(message: impl ToString) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::ExportNetwork(args) => export_network(args),
        Command::Oracle(args) => oracle(args),
    };
    if let Err(failure) = result {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}

fn load_instance(path: &PathBuf) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("io: {}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Failure::input(format!("instance: {e}")))
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let d = dissimilarity_matrix(&instance);
    let mut options = SolveOptions::default();
    if let Some(limit) = args.node_limit {
        options.node_limit = limit;
    }
    let formation =
        solve_family_formation_with(&instance, &d, options).map_err(|e| match e {
            FamilyError::Timeout { .. } => Failure::timeout(format!("family formation: {e}")),
            FamilyError::MalformedFlow(_) => Failure::internal(format!("family formation: {e}")),
        })?;
    let families = formation.families;

    // Everything destined for stdout is buffered so that a late failure
    // leaves stdout untouched.
    let mut out = String::new();

    if args.seed_check {
        let reference = brute_force_families(&instance, &d)
            .map_err(|e| Failure::input(format!("oracle: {e}")))?;
        let verdict = if reference == families { "EQUAL" } else { "UNEQUAL" };
        match args.format {
            Format::Table => writeln!(out, "oracle: {verdict}").unwrap(),
            Format::Json => eprintln!("oracle: {verdict}"),
        }
        if reference != families {
            print!("{out}");
            return Err(Failure::internal(
                "solver and exhaustive enumeration disagree on the family solution",
            ));
        }
    }

    let cell_count = args.cells.unwrap_or(families.families.len());
    let machine_count = instance.machine_count();
    let cell_cap = args
        .cell_cap
        .unwrap_or_else(|| machine_count.div_ceil(cell_count.max(1)));
    let config = CellConfig {
        max_cells: cell_count,
        max_per_cell: cell_cap,
    };
    let usage = usage_factors(&instance, &families);

    let qap_cells = match args.method {
        Method::Qap | Method::Both => Some(
            solve_qap(&usage, config).map_err(|e| cell_failure("cell formation (qap)", e))?,
        ),
        Method::Heuristic => None,
    };
    let heuristic_cells = match args.method {
        Method::Heuristic => {
            Some(run_heuristic(&instance, &families, config)
                .map_err(|e| cell_failure("cell formation (heuristic)", e))?)
        }
        // With both methods requested the exact answer is already in
        // hand, so a heuristic that cannot fit the cells is reported as
        // a warning rather than a failure.
        Method::Both => match run_heuristic(&instance, &families, config) {
            Ok(cells) => Some(cells),
            Err(e) => {
                eprintln!("warning: cell formation (heuristic): {e}");
                None
            }
        },
        Method::Qap => None,
    };

    let render = |cells: &CellSolution| -> Result<String, Failure> {
        let report = build_report(&instance, &families, cells)
            .map_err(|e| Failure::internal(format!("report: {e}")))?;
        let format = match args.format {
            Format::Table => ReportFormat::Table,
            Format::Json => ReportFormat::Json,
        };
        Ok(render_table(&report, format))
    };

    match (args.method, &qap_cells, &heuristic_cells) {
        (Method::Qap, Some(cells), None) | (Method::Heuristic, None, Some(cells)) => {
            writeln!(out, "{}", render(cells)?).unwrap();
        }
        (Method::Both, Some(qap), heuristic) => match args.format {
            Format::Table => {
                writeln!(out, "== qap ==\n{}\n", render(qap)?).unwrap();
                if let Some(heuristic) = heuristic {
                    writeln!(out, "== heuristic ==\n{}\n", render(heuristic)?).unwrap();
                    writeln!(out, "{}", match_verdict(qap, heuristic)).unwrap();
                }
            }
            Format::Json => {
                // JSON mode keeps stdout to exactly one document; the
                // method comparison goes to stderr.
                writeln!(out, "{}", render(qap)?).unwrap();
                if let Some(heuristic) = heuristic {
                    eprintln!("{}", match_verdict(qap, heuristic));
                }
            }
        },
        _ => unreachable!("method dispatch covered above"),
    }

    print!("{out}");
    Ok(())
}

fn match_verdict(qap: &CellSolution, heuristic: &CellSolution) -> &'static str {
    if qap.canonical_groups() == heuristic.canonical_groups() {
        "MATCH"
    } else {
        "MISMATCH"
    }
}

fn cell_failure(stage: &str, error: CellError) -> Failure {
    match error {
        CellError::InfeasibleConfig { .. } => Failure::input(format!("{stage}: {error}")),
        CellError::Timeout { .. } => Failure::timeout(format!("{stage}: {error}")),
        CellError::CellCapExceeded { .. } | CellError::TooManyCells { .. } => {
            Failure::internal(format!("{stage}: {error}"))
        }
    }
}

fn export_network(args: ExportArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let d = dissimilarity_matrix(&instance);
    let network = build_network(&instance, &d);
    std::fs::write(&args.out, network.to_dimacs())
        .map_err(|e| Failure::input(format!("io: {}: {e}", args.out.display())))?;
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let d = dissimilarity_matrix(&instance);
    let reference =
        brute_force_families(&instance, &d).map_err(|e| Failure::input(format!("oracle: {e}")))?;

    let mut out = String::new();
    writeln!(out, "objective: {}", reference.objective).unwrap();
    for (index, family) in reference.families.iter().enumerate() {
        writeln!(out, "family {}: routes {{{}}}", index + 1, join_routes(family)).unwrap();
    }

    if args.compare {
        let solved = solve_family_formation_with(&instance, &d, SolveOptions::default())
            .map_err(|e| match e {
                FamilyError::Timeout { .. } => Failure::timeout(format!("family formation: {e}")),
                FamilyError::MalformedFlow(_) => {
                    Failure::internal(format!("family formation: {e}"))
                }
            })?;
        let verdict = if solved.families == reference { "EQUAL" } else { "UNEQUAL" };
        writeln!(out, "{verdict}").unwrap();
        if solved.families != reference {
            print!("{out}");
            return Err(Failure::internal(
                "solver and exhaustive enumeration disagree on the family solution",
            ));
        }
    }

    print!("{out}");
    Ok(())
}

fn join_routes(routes: &BTreeSet<RouteId>) -> String {
    let mut text = String::new();
    for (i, route) in routes.iter().enumerate() {
        if i > 0 {
            text.push_str(", ");
        }
        write!(text, "{route}").unwrap();
    }
    text
}
