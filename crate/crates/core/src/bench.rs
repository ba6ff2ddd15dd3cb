//! Built-in nonlinear test problems of orders 4 through 10 with known exact
//! solutions, error tables, and a pass/fail suite runner.
//!
//! Residuals are written in the original variable `x ∈ [0, 1]`; the engine
//! does the mapping to `[-1, 1]`. Each problem also carries its residual and
//! boundary values as expression strings so it can be round-tripped through
//! a config file.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvp::{solve_bvp, BoundaryCondition, BvpError, BvpProblem, Endpoint, Solution};
use crate::expr::{eval_constant, ipow};
use crate::newton::{NewtonOptions, NewtonReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("unknown example '{0}' (expected ex1..ex5 or all)")]
    UnknownExample(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExampleId {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
    Ex5,
}

impl ExampleId {
    pub const ALL: [ExampleId; 5] = [
        ExampleId::Ex1,
        ExampleId::Ex2,
        ExampleId::Ex3,
        ExampleId::Ex4,
        ExampleId::Ex5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleId::Ex1 => "ex1",
            ExampleId::Ex2 => "ex2",
            ExampleId::Ex3 => "ex3",
            ExampleId::Ex4 => "ex4",
            ExampleId::Ex5 => "ex5",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| BenchError::UnknownExample(s.to_string()))
    }
}

/// Absolute errors reported for one method on the example's table grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceColumn {
    pub method: &'static str,
    pub errors: Vec<f64>,
}

/// Boundary condition in source form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcSource {
    pub endpoint: Endpoint,
    pub deriv_order: usize,
    pub value: &'static str,
}

#[derive(Clone)]
pub struct BuiltinExample {
    pub id: ExampleId,
    pub problem: BvpProblem,
    pub residual_expr: &'static str,
    pub bc_sources: Vec<BcSource>,
    /// `exact_deriv(x, m)` is the `m`-th derivative of the exact solution.
    pub exact_deriv: fn(f64, usize) -> f64,
    /// Grid of the published comparison table.
    pub grid: Vec<f64>,
    /// `(x, absolute error)` published for the Chebyshev finite difference solution.
    pub published_errors: Vec<(f64, f64)>,
    /// Other methods' published errors, aligned with `grid`.
    pub other_methods: Vec<ReferenceColumn>,
    pub default_n: usize,
    /// Pass threshold on the maximum absolute error over `grid`.
    pub threshold: f64,
    /// Extra `(x, threshold)` pointwise checks.
    pub point_thresholds: Vec<(f64, f64)>,
}

impl fmt::Debug for BuiltinExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BuiltinExample")
            .field("id", &self.id)
            .field("problem", &self.problem)
            .field("residual_expr", &self.residual_expr)
            .field("default_n", &self.default_n)
            .finish_non_exhaustive()
    }
}

impl BuiltinExample {
    pub fn exact(&self, x: f64) -> f64 {
        (self.exact_deriv)(x, 0)
    }
}

fn decimal_grid(from: usize, to: usize, denom: f64) -> Vec<f64> {
    (from..=to).map(|i| i as f64 / denom).collect()
}

fn bc(endpoint: Endpoint, deriv_order: usize, value: &'static str) -> BcSource {
    BcSource {
        endpoint,
        deriv_order,
        value,
    }
}

fn column(method: &'static str, errors: &[f64]) -> ReferenceColumn {
    ReferenceColumn {
        method,
        errors: errors.to_vec(),
    }
}

// Exact solutions and all their derivatives.

fn sin_deriv(x: f64, m: usize) -> f64 {
    match m % 4 {
        0 => x.sin(),
        1 => x.cos(),
        2 => -x.sin(),
        _ => -x.cos(),
    }
}

/// `(1/6) ln(1 + x)`
fn log_deriv(x: f64, m: usize) -> f64 {
    if m == 0 {
        return (1.0 + x).ln() / 6.0;
    }
    let factorial: f64 = (1..m).map(|k| k as f64).product();
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    sign * factorial / (6.0 * ipow(1.0 + x, m as i64))
}

/// `e^{-x}`
fn decay_deriv(x: f64, m: usize) -> f64 {
    let v = (-x).exp();
    if m.is_multiple_of(2) {
        v
    } else {
        -v
    }
}

/// `e^x (1 - x) cos x`, via `Re[(1 - x) e^{(1+i)x}]`.
fn damped_cos_deriv(x: f64, m: usize) -> f64 {
    use std::f64::consts::FRAC_PI_4;
    let g = |k: usize| 2f64.powf(k as f64 / 2.0) * (x + k as f64 * FRAC_PI_4).cos();
    let lead = (1.0 - x) * g(m);
    let tail = if m == 0 { 0.0 } else { m as f64 * g(m - 1) };
    x.exp() * (lead - tail)
}

/// `2/(2 - x) - x - 1`
fn rational_deriv(x: f64, m: usize) -> f64 {
    let factorial: f64 = (1..=m).map(|k| k as f64).product();
    let head = 2.0 * factorial / ipow(2.0 - x, m as i64 + 1);
    match m {
        0 => head - x - 1.0,
        1 => head - 1.0,
        _ => head,
    }
}

fn residual_ex1(x: f64, y: &[f64]) -> f64 {
    y[4] - x.sin() - ipow(x.sin(), 2) + ipow(y[2], 2)
}

fn residual_ex2(x: f64, y: &[f64]) -> f64 {
    y[6] - 20.0 * (-36.0 * y[0]).exp() + 40.0 * ipow(1.0 + x, -6)
}

fn residual_ex3(x: f64, y: &[f64]) -> f64 {
    y[6] - x.exp() * ipow(y[0], 2)
}

fn residual_ex4(x: f64, y: &[f64]) -> f64 {
    y[7] + y[4]
        - y[0].exp() * y[0]
        - x.exp()
            * ((12.0 - 4.0 * x + (x - 1.0) * (-x.exp() * (x - 1.0) * x.cos()).exp()) * x.cos()
                - 8.0 * (5.0 + x) * x.sin())
}

fn residual_ex5(x: f64, y: &[f64]) -> f64 {
    y[10] - 14175.0 / 4.0 * ipow(x + y[0] + 1.0, 11)
}

struct ExampleData {
    order: usize,
    residual: fn(f64, &[f64]) -> f64,
    residual_expr: &'static str,
    bcs: Vec<BcSource>,
    exact_deriv: fn(f64, usize) -> f64,
    grid: Vec<f64>,
    published: Vec<f64>,
    other_methods: Vec<ReferenceColumn>,
    default_n: usize,
    threshold: f64,
    point_thresholds: Vec<(f64, f64)>,
}

fn example_data(id: ExampleId) -> ExampleData {
    use Endpoint::{Left as L, Right as R};
    match id {
        ExampleId::Ex1 => ExampleData {
            order: 4,
            residual: residual_ex1,
            residual_expr: "y4 - sin(x) - sin(x)^2 + y2^2",
            bcs: vec![bc(L, 0, "0"), bc(L, 1, "1"), bc(R, 0, "sin(1)"), bc(R, 1, "cos(1)")],
            exact_deriv: sin_deriv,
            grid: decimal_grid(0, 10, 10.0),
            published: vec![
                1.2669e-13, 7.7729e-14, 6.2561e-14, 2.5512e-13, 1.3716e-13, 1.5559e-13,
                1.6986e-13, 3.5693e-13, 4.5319e-13, 5.8797e-13, 4.916e-13,
            ],
            other_methods: vec![column(
                "VIM",
                &[
                    9.5923e-14, 7.7856e-08, 2.7231e-07, 5.2489e-07, 7.7730e-07, 9.7145e-07,
                    1.0502e-06, 9.6286e-07, 6.8407e-07, 2.7069e-07, 1.5676e-13,
                ],
            )],
            default_n: 14,
            threshold: 1e-9,
            point_thresholds: vec![],
        },
        ExampleId::Ex2 => ExampleData {
            order: 6,
            residual: residual_ex2,
            residual_expr: "y6 - 20*exp(-36*y0) + 40*(1 + x)^-6",
            bcs: vec![
                bc(L, 0, "0"),
                bc(L, 1, "1/6"),
                bc(L, 2, "-1/6"),
                bc(R, 0, "ln(2)/6"),
                bc(R, 1, "1/12"),
                bc(R, 2, "-1/24"),
            ],
            exact_deriv: log_deriv,
            grid: decimal_grid(1, 9, 10.0),
            published: vec![
                7.235878e-14, 2.065990e-13, 2.936120e-13, 2.937860e-13, 2.183110e-13,
                1.075670e-13, 1.088020e-14, 3.384792e-14, 2.166322e-14,
            ],
            other_methods: vec![column(
                "QBSCM",
                &[
                    1.303852e-07, 5.215406e-07, 9.723008e-07, 1.329929e-06, 1.259148e-06,
                    8.419156e-07, 4.023314e-07, 8.195639e-08, 1.713634e-07,
                ],
            )],
            default_n: 16,
            threshold: 1e-9,
            point_thresholds: vec![],
        },
        ExampleId::Ex3 => ExampleData {
            order: 6,
            residual: residual_ex3,
            residual_expr: "y6 - exp(x)*y0^2",
            bcs: vec![
                bc(L, 0, "1"),
                bc(L, 1, "-1"),
                bc(L, 2, "1"),
                bc(R, 0, "exp(-1)"),
                bc(R, 1, "-exp(-1)"),
                bc(R, 2, "exp(-1)"),
            ],
            exact_deriv: decay_deriv,
            grid: decimal_grid(1, 10, 10.0),
            published: vec![
                3.3e-15, 2.0e-14, 5.4e-14, 9.1e-14, 1.2e-13, 1.2e-13, 1.0e-13, 6.3e-14, 1.6e-14, 0.0,
            ],
            other_methods: vec![
                // The published ADM, HPM, VIM and ITM columns are identical.
                column(
                    "ADM/HPM/VIM/ITM",
                    &[
                        2.4e-7, 1.4e-6, 3.3e-6, 5.2e-6, 6.2e-6, 5.8e-6, 4.1e-6, 1.9e-6, 3.6e-7, 5.0e-10,
                    ],
                ),
                column(
                    "DJM",
                    &[
                        3.1e-14, 1.9e-13, 4.8e-13, 8.0e-13, 1.0e-12, 1.0e-12, 8.1e-13, 4.3e-13,
                        9.2e-13, 5.6e-14,
                    ],
                ),
            ],
            default_n: 16,
            threshold: 1e-9,
            point_thresholds: vec![(1.0, 1e-11)],
        },
        ExampleId::Ex4 => ExampleData {
            order: 7,
            residual: residual_ex4,
            residual_expr: "y7 + y4 - exp(y0)*y0 - exp(x)*((12 - 4*x + (x - 1)*exp(-exp(x)*(x - 1)*cos(x)))*cos(x) - 8*(5 + x)*sin(x))",
            bcs: vec![
                bc(L, 0, "1"),
                bc(L, 1, "0"),
                bc(L, 2, "-2"),
                bc(L, 3, "-2"),
                bc(R, 0, "0"),
                bc(R, 1, "-e*cos(1)"),
                bc(R, 2, "-2*e*cos(1) + 2*e*sin(1)"),
            ],
            exact_deriv: damped_cos_deriv,
            grid: decimal_grid(0, 8, 8.0),
            published: vec![
                1.04949e-12, 2.06599e-12, 1.10497e-11, 2.36455e-11, 2.11277e-11, 1.13554e-12,
                1.15951e-11, 4.8044e-12, 5.05727e-13,
            ],
            other_methods: vec![
                column(
                    "RKS n=30",
                    &[
                        6.4278e-11, 4.7378e-10, 5.2047e-09, 1.5281e-08, 2.4509e-08, 2.5265e-08,
                        1.5563e-08, 3.2941e-09, 5.6254e-11,
                    ],
                ),
                column(
                    "RKS n=50",
                    &[
                        6.4113e-11, 1.4645e-10, 1.9111e-09, 5.6158e-09, 8.8518e-09, 9.1373e-09,
                        5.6666e-09, 1.0112e-09, 5.6239e-11,
                    ],
                ),
            ],
            default_n: 16,
            threshold: 1e-8,
            point_thresholds: vec![],
        },
        ExampleId::Ex5 => ExampleData {
            order: 10,
            residual: residual_ex5,
            residual_expr: "y10 - 14175/4*(x + y0 + 1)^11",
            bcs: vec![
                bc(L, 0, "0"),
                bc(L, 1, "-1/2"),
                bc(L, 2, "1/2"),
                bc(L, 3, "3/4"),
                bc(L, 4, "3/2"),
                bc(R, 0, "0"),
                bc(R, 1, "1"),
                bc(R, 2, "4"),
                bc(R, 3, "12"),
                bc(R, 4, "48"),
            ],
            exact_deriv: rational_deriv,
            grid: decimal_grid(1, 9, 10.0),
            published: vec![
                1.335263e-11, 2.468730e-10, 8.750325e-10, 1.393045e-09, 1.202488e-09,
                5.293163e-10, 5.506837e-11, 2.995830e-11, 4.110150e-12,
            ],
            other_methods: vec![
                column(
                    "QBSCM",
                    &[
                        1.322478e-06, 4.231930e-06, 1.676381e-05, 4.245341e-05, 6.662799e-05,
                        6.940961e-05, 4.750490e-05, 1.643598e-05, 2.607703e-07,
                    ],
                ),
                column(
                    "HAM",
                    &[
                        3.95413e-11, 7.33317e-10, 7.33317e-09, 6.06524e-09, 7.74775e-09,
                        6.56402e-09, 3.48667e-09, 9.23198e-10, 5.33521e-11,
                    ],
                ),
            ],
            default_n: 16,
            threshold: 1e-6,
            point_thresholds: vec![],
        },
    }
}

pub fn builtin_problem(id: ExampleId) -> BuiltinExample {
    let s = example_data(id);
    let bcs = s
        .bcs
        .iter()
        .map(|b| BoundaryCondition {
            endpoint: b.endpoint,
            deriv_order: b.deriv_order,
            value: eval_constant(b.value).expect("built-in boundary value parses"),
        })
        .collect();
    let residual = s.residual;
    let problem = BvpProblem::new(s.order, (0.0, 1.0), Arc::new(residual), bcs)
        .expect("built-in problem is well formed");
    BuiltinExample {
        id,
        problem,
        residual_expr: s.residual_expr,
        bc_sources: s.bcs,
        exact_deriv: s.exact_deriv,
        published_errors: s.grid.iter().copied().zip(s.published).collect(),
        grid: s.grid,
        other_methods: s.other_methods,
        default_n: s.default_n,
        threshold: s.threshold,
        point_thresholds: s.point_thresholds,
    }
}

pub fn builtin_by_name(name: &str) -> Result<BuiltinExample, BenchError> {
    Ok(builtin_problem(name.parse()?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub x: f64,
    pub exact: f64,
    pub computed: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTable {
    pub example: Option<ExampleId>,
    pub degree: usize,
    pub report: NewtonReport,
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn max_abs_error(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_error).fold(0.0, f64::max)
    }

    pub fn error_at(&self, x: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.x == x).map(|r| r.abs_error)
    }
}

/// `0.0, 0.1, ..., 1.0`.
pub fn default_grid() -> Vec<f64> {
    decimal_grid(0, 10, 10.0)
}

pub fn error_table(
    solution: &Solution,
    exact: &dyn Fn(f64) -> f64,
    grid: &[f64],
) -> Result<ErrorTable, BvpError> {
    let rows = grid
        .iter()
        .map(|&x| {
            let computed = solution.eval(x)?;
            let exact = exact(x);
            Ok(ErrorRow {
                x,
                exact,
                computed,
                abs_error: (exact - computed).abs(),
            })
        })
        .collect::<Result<Vec<_>, BvpError>>()?;
    Ok(ErrorTable {
        example: None,
        degree: solution.degree(),
        report: solution.report,
        rows,
    })
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    /// Degree used for every example instead of its default.
    pub degree: Option<usize>,
    /// Replaces every example's pass threshold.
    pub threshold: Option<f64>,
    pub newton: NewtonOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointCheck {
    pub x: f64,
    pub abs_error: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleReport {
    pub id: ExampleId,
    pub degree: usize,
    pub passed: bool,
    pub converged: bool,
    pub max_abs_error: Option<f64>,
    pub threshold: f64,
    pub point_checks: Vec<PointCheck>,
    pub runtime_ms: f64,
    pub message: Option<String>,
    pub table: Option<ErrorTable>,
    pub published_errors: Vec<(f64, f64)>,
    pub other_methods: Vec<ReferenceColumn>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub passed: usize,
    pub total: usize,
    pub all_passed: bool,
    pub examples: Vec<ExampleReport>,
}

pub fn run_example(id: ExampleId, opts: &SuiteOptions) -> ExampleReport {
    let ex = builtin_problem(id);
    let degree = opts.degree.unwrap_or(ex.default_n);
    let threshold = opts.threshold.unwrap_or(ex.threshold);
    let start = Instant::now();
    let outcome = solve_bvp(&ex.problem, degree, &opts.newton);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut report = ExampleReport {
        id,
        degree,
        passed: false,
        converged: false,
        max_abs_error: None,
        threshold,
        point_checks: Vec::new(),
        runtime_ms,
        message: None,
        table: None,
        published_errors: ex.published_errors.clone(),
        other_methods: ex.other_methods.clone(),
    };

    let (solution, failure) = match outcome {
        Ok(sol) => (sol, None),
        Err(e) => match e.solution() {
            Some(sol) => (sol.clone(), Some(e.to_string())),
            None => {
                report.message = Some(e.to_string());
                return report;
            }
        },
    };
    report.converged = solution.converged();

    let exact = |x: f64| ex.exact(x);
    let mut table = match error_table(&solution, &exact, &ex.grid) {
        Ok(t) => t,
        Err(e) => {
            report.message = Some(e.to_string());
            return report;
        }
    };
    table.example = Some(id);
    let max = table.max_abs_error();

    for &(x, limit) in &ex.point_thresholds {
        let err = table
            .error_at(x)
            .or_else(|| solution.eval(x).ok().map(|v| (v - ex.exact(x)).abs()))
            .unwrap_or(f64::INFINITY);
        report.point_checks.push(PointCheck {
            x,
            abs_error: err,
            threshold: limit,
            passed: err <= limit,
        });
    }

    report.max_abs_error = Some(max);
    report.passed = failure.is_none()
        && report.converged
        && max <= threshold
        && report.point_checks.iter().all(|c| c.passed);
    report.message = failure.or_else(|| {
        (!report.passed).then(|| format!("max error {max:e} exceeds threshold {threshold:e}"))
    });
    report.table = Some(table);
    report
}

/// Solve each example on its own thread; the report is ordered by id.
pub fn run_suite(ids: &[ExampleId], opts: &SuiteOptions) -> SuiteReport {
    let mut ordered: Vec<ExampleId> = ids.to_vec();
    ordered.sort();
    ordered.dedup();
    let examples: Vec<ExampleReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = ordered
            .iter()
            .map(|&id| scope.spawn(move || run_example(id, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("example thread panicked"))
            .collect()
    });
    let passed = examples.iter().filter(|e| e.passed).count();
    SuiteReport {
        passed,
        total: examples.len(),
        all_passed: passed == examples.len(),
        examples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_str, PointEnv};

    fn tuple(ex: &BuiltinExample, x: f64) -> Vec<f64> {
        (0..=ex.problem.order())
            .map(|m| (ex.exact_deriv)(x, m))
            .collect()
    }

    #[test]
    fn ids_parse() {
        assert_eq!("ex3".parse::<ExampleId>().unwrap(), ExampleId::Ex3);
        assert_eq!(
            "nope".parse::<ExampleId>(),
            Err(BenchError::UnknownExample("nope".into()))
        );
    }

    #[test]
    fn shapes_match_published_problems() {
        let ex1 = builtin_problem(ExampleId::Ex1);
        assert_eq!(ex1.problem.order(), 4);
        assert_eq!(ex1.problem.domain(), (0.0, 1.0));
        let bcs = ex1.problem.bcs();
        assert_eq!(bcs[0], BoundaryCondition::left(0, 0.0));
        assert_eq!(bcs[1], BoundaryCondition::left(1, 1.0));
        assert_eq!(bcs[2], BoundaryCondition::right(0, 1f64.sin()));
        assert_eq!(bcs[3], BoundaryCondition::right(1, 1f64.cos()));

        let ex4 = builtin_problem(ExampleId::Ex4);
        assert_eq!(ex4.problem.count_at(Endpoint::Left), 4);
        assert_eq!(ex4.problem.count_at(Endpoint::Right), 3);

        let ex5 = builtin_problem(ExampleId::Ex5);
        assert_eq!(ex5.problem.count_at(Endpoint::Left), 5);
        assert_eq!(ex5.problem.count_at(Endpoint::Right), 5);
        assert!(ex5.problem.bcs().contains(&BoundaryCondition::left(4, 1.5)));
    }

    #[test]
    fn exact_solutions_meet_boundary_conditions() {
        for id in ExampleId::ALL {
            let ex = builtin_problem(id);
            for bc in ex.problem.bcs() {
                let x = match bc.endpoint {
                    Endpoint::Left => 0.0,
                    Endpoint::Right => 1.0,
                };
                let v = (ex.exact_deriv)(x, bc.deriv_order);
                assert!((v - bc.value).abs() <= 1e-12, "{id} {bc:?}: {v}");
            }
        }
    }

    #[test]
    fn mapped_ex5_left_targets() {
        // On [-1, 1] both the third and fourth left targets are 3/32.
        let ex5 = builtin_problem(ExampleId::Ex5);
        let r = crate::bvp::to_reference_domain(&ex5.problem);
        let left = |m: usize| {
            r.bcs
                .iter()
                .find(|b| b.endpoint == Endpoint::Left && b.deriv_order == m)
                .unwrap()
                .target
        };
        assert_eq!(left(3), 3.0 / 32.0);
        assert_eq!(left(4), 3.0 / 32.0);
    }

    #[test]
    fn exact_solutions_satisfy_residuals() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for id in ExampleId::ALL {
            let ex = builtin_problem(id);
            let ast = parse_str(ex.residual_expr).unwrap();
            for _ in 0..20 {
                let x: f64 = rng.gen_range(0.0..1.0);
                let y = tuple(&ex, x);
                let native = ex.problem.residual(x, &y);
                let parsed = ast.eval(&PointEnv { x, derivs: &y }).unwrap();
                let scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
                assert!(native.abs() <= 1e-10 * scale, "{id} at {x}: {native:e}");
                assert!(parsed.abs() <= 1e-10 * scale, "{id} at {x}: {parsed:e}");
                assert_eq!(native.to_bits(), parsed.to_bits(), "{id} at {x}");
            }
        }
    }

    #[test]
    fn exact_derivatives_match_finite_differences() {
        for id in ExampleId::ALL {
            let ex = builtin_problem(id);
            let h = 1e-5;
            for m in 0..4 {
                for &x in &[0.2, 0.5, 0.8] {
                    let fd = ((ex.exact_deriv)(x + h, m) - (ex.exact_deriv)(x - h, m)) / (2.0 * h);
                    let exact = (ex.exact_deriv)(x, m + 1);
                    assert!(
                        (fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()),
                        "{id} m={m} x={x}"
                    );
                }
            }
        }
    }

    #[test]
    fn grids_match_tables() {
        assert_eq!(builtin_problem(ExampleId::Ex1).grid.len(), 11);
        assert_eq!(builtin_problem(ExampleId::Ex2).grid.len(), 9);
        assert_eq!(builtin_problem(ExampleId::Ex3).grid.len(), 10);
        assert_eq!(builtin_problem(ExampleId::Ex4).grid[1], 0.125);
        assert_eq!(default_grid()[3], 0.3);
        for id in ExampleId::ALL {
            let ex = builtin_problem(id);
            assert_eq!(ex.published_errors.len(), ex.grid.len());
            for col in &ex.other_methods {
                assert_eq!(col.errors.len(), ex.grid.len(), "{id} {}", col.method);
            }
        }
    }

    #[test]
    fn error_table_of_exact_fit_is_zero() {
        // y'' = 0 with y(0) = 1, y(1) = 3: the computed solution is the exact line.
        let p = BvpProblem::new(
            2,
            (0.0, 1.0),
            Arc::new(|_: f64, y: &[f64]| y[2]),
            vec![
                BoundaryCondition::left(0, 1.0),
                BoundaryCondition::right(0, 3.0),
            ],
        )
        .unwrap();
        let sol = solve_bvp(&p, 4, &NewtonOptions::default()).unwrap();
        let computed = |x: f64| sol.eval(x).unwrap();
        let table = error_table(&sol, &computed, &default_grid()).unwrap();
        assert!(table.rows.iter().all(|r| r.abs_error == 0.0));
        assert_eq!(table.rows.first().unwrap().x, 0.0);
        assert_eq!(table.rows.last().unwrap().x, 1.0);
        assert!(matches!(
            error_table(&sol, &computed, &[1.5]),
            Err(BvpError::Domain(_))
        ));
    }

    #[test]
    fn single_example_suite() {
        let report = run_suite(&[ExampleId::Ex3], &SuiteOptions::default());
        assert_eq!(report.total, 1);
        assert_eq!(report.examples[0].id, ExampleId::Ex3);
        assert!(report.all_passed, "{:?}", report.examples[0].message);
    }

    #[test]
    fn zero_threshold_fails() {
        let opts = SuiteOptions {
            threshold: Some(0.0),
            ..SuiteOptions::default()
        };
        let report = run_suite(&[ExampleId::Ex1], &opts);
        assert!(!report.all_passed);
        assert!(report.examples[0].message.is_some());
    }
}
