use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chebfd::bench::{builtin_problem, run_suite, ExampleId, SuiteOptions, SuiteReport};
use chebfd::bvp::{solve_bvp, BvpError, Solution};
use chebfd::cheb::diff_matrix;
use chebfd::config::ProblemConfig;
use chebfd::report::{
    diff_matrix_csv, error_table_csv, parse_grid, sample_solution, samples_csv, SolutionJson,
};
use clap::{Parser, Subcommand, ValueEnum};

const DEFAULT_DEGREE: usize = 16;

/// Chebyshev finite difference solver for nonlinear two-point boundary value problems.
#[derive(Debug, Parser)]
#[command(name = "chebfd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the built-in examples and compare against their exact solutions.
    Bench {
        /// ex1..ex5, or all.
        #[arg(long, default_value = "all")]
        example: String,
        /// Polynomial degree N, overriding each example's default.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output file; for CSV over several examples, a directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the example as a solve config instead of running it.
        #[arg(long)]
        dump_config: bool,
    },
    /// Solve a problem described by a JSON config file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        /// Where to write the solution JSON (default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include monomial coefficients of the solution in x.
        #[arg(long)]
        emit_poly: bool,
        /// Sample the solution on start:stop:step.
        #[arg(long)]
        grid: Option<String>,
        /// Where to write the sample CSV (default stdout).
        #[arg(long, requires = "grid")]
        grid_out: Option<PathBuf>,
    },
    /// Print the m-th order differentiation matrix on N+1 Gauss-Lobatto nodes.
    Diffmat {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
enum Failure {
    /// Bad flags or input files.
    Usage(String),
    /// The solver ran but did not produce an acceptable result.
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Numerical(_) => ExitCode::from(1),
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => m,
        }
    }
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn write_output(path: Option<&Path>, content: &str) -> CmdResult {
    match path {
        Some(p) => {
            fs::write(p, content).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_ids(example: &str) -> Result<Vec<ExampleId>, Failure> {
    if example == "all" {
        Ok(ExampleId::ALL.to_vec())
    } else {
        Ok(vec![example.parse().map_err(usage)?])
    }
}

fn summarize(report: &SuiteReport) {
    for e in &report.examples {
        let status = if e.passed { "PASS" } else { "FAIL" };
        let err = e
            .max_abs_error
            .map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"));
        eprint!(
            "{status} {} N={} max error {err} (threshold {:.0e})",
            e.id, e.degree, e.threshold
        );
        match &e.message {
            Some(m) => eprintln!(": {m}"),
            None => eprintln!(),
        }
    }
    eprintln!("{}/{} examples passed", report.passed, report.total);
}

fn bench(
    example: &str,
    n: Option<usize>,
    format: Format,
    out: Option<&Path>,
    dump_config: bool,
) -> CmdResult {
    let ids = parse_ids(example)?;
    if dump_config {
        let [id] = ids[..] else {
            return Err(usage("--dump-config needs a single --example"));
        };
        let mut cfg = ProblemConfig::from_builtin(&builtin_problem(id));
        if n.is_some() {
            cfg.degree = n;
        }
        return write_output(out, &(cfg.to_json() + "\n"));
    }
    if let Some(n) = n {
        let max_order = ids
            .iter()
            .map(|&id| builtin_problem(id).problem.order())
            .max();
        if max_order.is_some_and(|order| n <= order) {
            return Err(usage(format!(
                "--n {n} is too small for the selected examples"
            )));
        }
    }

    let opts = SuiteOptions {
        degree: n,
        ..SuiteOptions::default()
    };
    let report = run_suite(&ids, &opts);
    summarize(&report);

    match format {
        Format::Json => {
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            write_output(out, &(json + "\n"))?;
        }
        Format::Csv if report.examples.len() == 1 => {
            let csv = report.examples[0]
                .table
                .as_ref()
                .map(error_table_csv)
                .unwrap_or_default();
            write_output(out, &csv)?;
        }
        Format::Csv => match out {
            Some(dir) => {
                fs::create_dir_all(dir)
                    .map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
                for e in &report.examples {
                    if let Some(table) = &e.table {
                        write_output(
                            Some(&dir.join(format!("{}.csv", e.id))),
                            &error_table_csv(table),
                        )?;
                    }
                }
                let json = serde_json::to_string_pretty(&report).expect("report serializes");
                write_output(Some(&dir.join("report.json")), &(json + "\n"))?;
            }
            None => {
                for e in &report.examples {
                    println!("# {}", e.id);
                    if let Some(table) = &e.table {
                        print!("{}", error_table_csv(table));
                    }
                }
            }
        },
    }

    if report.all_passed {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "{} of {} examples failed",
            report.total - report.passed,
            report.total
        )))
    }
}

fn solve(
    config: &Path,
    n: Option<usize>,
    out: Option<&Path>,
    emit_poly: bool,
    grid: Option<&str>,
    grid_out: Option<&Path>,
) -> CmdResult {
    let src = fs::read_to_string(config)
        .map_err(|e| usage(format!("cannot read {}: {e}", config.display())))?;
    let cfg = ProblemConfig::from_json(&src).map_err(usage)?;
    let problem = cfg.to_problem().map_err(usage)?;
    let grid = grid.map(parse_grid).transpose().map_err(usage)?;
    let degree = n.or(cfg.degree).unwrap_or(DEFAULT_DEGREE);

    let (solution, failure): (Solution, Option<Failure>) =
        match solve_bvp(&problem, degree, &cfg.solver_options()) {
            Ok(sol) => (sol, None),
            Err(e @ (BvpError::NotConverged(_) | BvpError::JacobianSingular(_))) => {
                let sol = e.solution().expect("carries a solution").clone();
                (sol, Some(Failure::Numerical(e.to_string())))
            }
            Err(e @ (BvpError::Evaluation { .. } | BvpError::Solver(_))) => {
                return Err(Failure::Numerical(e.to_string()))
            }
            Err(e) => return Err(usage(e)),
        };

    let json = SolutionJson::new(&solution, emit_poly).map_err(usage)?;
    let samples = grid
        .map(|g| sample_solution(&solution, &g))
        .transpose()
        .map_err(usage)?;

    // Sample CSV takes stdout when it has no file of its own.
    let json_to_stdout = out.is_some() || samples.is_none() || grid_out.is_some();
    if json_to_stdout {
        write_output(out, &(json.to_json() + "\n"))?;
    }
    if let Some(samples) = samples {
        write_output(grid_out, &samples_csv(&samples))?;
    }
    eprintln!(
        "{} after {} iterations, residual {:.3e} ({:?})",
        if solution.converged() {
            "converged"
        } else {
            "NOT converged"
        },
        solution.report.iterations,
        solution.report.final_residual_norm,
        solution.report.stop_reason
    );
    failure.map_or(Ok(()), Err)
}

fn diffmat(n: usize, order: usize, format: Format) -> CmdResult {
    if order == 0 || order > n {
        return Err(usage(format!(
            "--order must be between 1 and --n ({n}), got {order}"
        )));
    }
    let d = diff_matrix(n, order).map_err(usage)?;
    match format {
        Format::Csv => write_output(None, &diff_matrix_csv(&d)),
        Format::Json => {
            let rows: Vec<&[f64]> = d.rows().collect();
            write_output(
                None,
                &(serde_json::to_string(&rows).expect("matrix serializes") + "\n"),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bench {
            example,
            n,
            format,
            out,
            dump_config,
        } => bench(example, *n, *format, out.as_deref(), *dump_config),
        Command::Solve {
            config,
            n,
            out,
            emit_poly,
            grid,
            grid_out,
        } => solve(
            config,
            *n,
            out.as_deref(),
            *emit_poly,
            grid.as_deref(),
            grid_out.as_deref(),
        ),
        Command::Diffmat { n, order, format } => diffmat(*n, *order, *format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}
