//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string; the plain `*_json` functions hold the
//! logic so it can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use chebfd::bench::{builtin_problem, error_table, ExampleId};
use chebfd::bvp::{solve_bvp, BvpError, Solution};
use chebfd::cheb::diff_matrix;
use chebfd::config::ProblemConfig;
use chebfd::newton::{NewtonOptions, NewtonReport};

const CURVE_POINTS: usize = 201;
const MAX_DEGREE: usize = 64;

#[derive(Serialize)]
struct Curve {
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct SolveView {
    degree: usize,
    converged: bool,
    message: Option<String>,
    report: NewtonReport,
    nodes_x: Vec<f64>,
    nodes_y: Vec<f64>,
    curve: Curve,
}

#[derive(Serialize)]
struct ExampleView {
    id: ExampleId,
    order: usize,
    residual: &'static str,
    threshold: f64,
    max_abs_error: f64,
    passed: bool,
    table: Vec<(f64, f64, f64)>,
    published_errors: Vec<(f64, f64)>,
    #[serde(flatten)]
    solve: SolveView,
}

fn check_degree(n: usize) -> Result<(), String> {
    if n > MAX_DEGREE {
        return Err(format!("N is limited to {MAX_DEGREE} in the demo"));
    }
    Ok(())
}

/// Converged solutions and ones that stopped early both get plotted.
fn solve_any(
    problem: &chebfd::bvp::BvpProblem,
    n: usize,
    opts: &NewtonOptions,
) -> Result<(Solution, Option<String>), String> {
    match solve_bvp(problem, n, opts) {
        Ok(sol) => Ok((sol, None)),
        Err(e @ (BvpError::NotConverged(_) | BvpError::JacobianSingular(_))) => {
            let sol = e.solution().expect("carries a solution").clone();
            Ok((sol, Some(e.to_string())))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn view(
    sol: &Solution,
    message: Option<String>,
    exact: Option<&dyn Fn(f64) -> f64>,
) -> Result<SolveView, String> {
    let (a, b) = sol.problem().domain();
    let x: Vec<f64> = (0..CURVE_POINTS)
        .map(|i| a + (b - a) * i as f64 / (CURVE_POINTS - 1) as f64)
        .collect();
    let y = x
        .iter()
        .map(|&x| sol.eval(x))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let exact = exact.map(|f| x.iter().map(|&x| f(x)).collect());
    Ok(SolveView {
        degree: sol.degree(),
        converged: sol.converged(),
        message,
        report: sol.report,
        nodes_x: sol.x_nodes(),
        nodes_y: sol.node_values().to_vec(),
        curve: Curve { x, y, exact },
    })
}

pub fn solve_example_json(id: &str, n: usize) -> Result<String, String> {
    let id: ExampleId = id
        .parse()
        .map_err(|e: chebfd::bench::BenchError| e.to_string())?;
    check_degree(n)?;
    let ex = builtin_problem(id);
    let (sol, message) = solve_any(&ex.problem, n, &NewtonOptions::default())?;
    let exact = |x: f64| ex.exact(x);
    let table = error_table(&sol, &exact, &ex.grid).map_err(|e| e.to_string())?;
    let max_abs_error = table.max_abs_error();
    let out = ExampleView {
        id,
        order: ex.problem.order(),
        residual: ex.residual_expr,
        threshold: ex.threshold,
        max_abs_error,
        passed: sol.converged() && max_abs_error <= ex.threshold,
        table: table
            .rows
            .iter()
            .map(|r| (r.x, r.computed, r.abs_error))
            .collect(),
        published_errors: ex.published_errors.clone(),
        solve: view(&sol, message, Some(&exact))?,
    };
    Ok(serde_json::to_string(&out).expect("view serializes"))
}

pub fn solve_config_json(config: &str, n: usize) -> Result<String, String> {
    let cfg = ProblemConfig::from_json(config).map_err(|e| e.to_string())?;
    let problem = cfg.to_problem().map_err(|e| e.to_string())?;
    let n = if n == 0 { cfg.degree.unwrap_or(16) } else { n };
    check_degree(n)?;
    let (sol, message) = solve_any(&problem, n, &cfg.solver_options())?;
    Ok(serde_json::to_string(&view(&sol, message, None)?).expect("view serializes"))
}

pub fn example_config_json(id: &str) -> Result<String, String> {
    let id: ExampleId = id
        .parse()
        .map_err(|e: chebfd::bench::BenchError| e.to_string())?;
    Ok(ProblemConfig::from_builtin(&builtin_problem(id)).to_json())
}

pub fn diff_matrix_json(n: usize, order: usize) -> Result<String, String> {
    check_degree(n)?;
    let d = diff_matrix(n, order).map_err(|e| e.to_string())?;
    let rows: Vec<&[f64]> = d.rows().collect();
    Ok(serde_json::to_string(&rows).expect("matrix serializes"))
}

fn js<T>(r: Result<T, String>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Solve built-in example `id` (ex1..ex5) at degree `n`.
#[wasm_bindgen(js_name = solveExample)]
pub fn solve_example(id: &str, n: usize) -> Result<String, JsValue> {
    js(solve_example_json(id, n))
}

/// Solve a JSON problem config; `n = 0` uses the config's own `N`.
#[wasm_bindgen(js_name = solveConfig)]
pub fn solve_config(config: &str, n: usize) -> Result<String, JsValue> {
    js(solve_config_json(config, n))
}

#[wasm_bindgen(js_name = exampleConfig)]
pub fn example_config(id: &str) -> Result<String, JsValue> {
    js(example_config_json(id))
}

#[wasm_bindgen(js_name = diffMatrix)]
pub fn diff_matrix_js(n: usize, order: usize) -> Result<String, JsValue> {
    js(diff_matrix_json(n, order))
}
