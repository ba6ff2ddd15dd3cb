//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chebfd::bench::{run_example, ExampleId, ExampleReport, SuiteOptions};
use chebfd::bvp::{solve_bvp, BoundaryCondition, BvpProblem, Endpoint};
use chebfd::cheb::{
    c_weight, cheb_coeffs, cheb_deriv_series, cheb_t, diff_matrix, series_eval, theta,
};
use chebfd::config::ProblemConfig;
use chebfd::newton::NewtonOptions;
use rand::{Rng, SeedableRng};

type Check = fn() -> Result<String, String>;

fn example(id: ExampleId, limit: Option<Duration>) -> Result<String, String> {
    let r: ExampleReport = run_example(id, &SuiteOptions::default());
    let max = r.max_abs_error.ok_or_else(|| format!("{:?}", r.message))?;
    let mut detail = format!(
        "N={} max error {max:.3e} (threshold {:.0e}), {:.1} ms",
        r.degree, r.threshold, r.runtime_ms
    );
    for c in &r.point_checks {
        detail.push_str(&format!(
            "; error at x={} {:.3e} (threshold {:.0e})",
            c.x, c.abs_error, c.threshold
        ));
    }
    if let Some(limit) = limit {
        if r.runtime_ms > limit.as_secs_f64() * 1e3 {
            return Err(format!("{detail}; slower than {limit:?}"));
        }
    }
    if r.passed {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ex1() -> Result<String, String> {
    example(ExampleId::Ex1, Some(Duration::from_secs(1)))
}

fn ex2() -> Result<String, String> {
    example(ExampleId::Ex2, Some(Duration::from_secs(1)))
}

fn ex3() -> Result<String, String> {
    example(ExampleId::Ex3, None)
}

fn ex4() -> Result<String, String> {
    example(ExampleId::Ex4, None)
}

fn ex5() -> Result<String, String> {
    example(ExampleId::Ex5, None)
}

fn falling_factorial(q: usize, m: usize) -> f64 {
    (q - m + 1..=q).map(|k| k as f64).product()
}

fn polynomial_exactness() -> Result<String, String> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 1..=20 {
        let nodes: Vec<f64> = (0..=n).map(|k| (k as f64 * PI / n as f64).cos()).collect();
        for m in 1..=n.min(10) {
            let d = diff_matrix(n, m).map_err(|e| e.to_string())?;
            for q in 0..=n {
                let samples: Vec<f64> = nodes.iter().map(|&x| x.powi(q as i32)).collect();
                let scale = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let got = d.apply(&samples).map_err(|e| e.to_string())?;
                for (k, &x) in nodes.iter().enumerate() {
                    let want = if q < m {
                        0.0
                    } else {
                        falling_factorial(q, m) * x.powi((q - m) as i32)
                    };
                    let row_sum: f64 = d.row(k).iter().map(|v| v.abs()).sum();
                    let ratio = (got[k] - want).abs() / (row_sum * scale);
                    worst = worst.max(ratio);
                    if ratio > 1e-12 {
                        return Err(format!("N={n} m={m} q={q} node {k}: ratio {ratio:e}"));
                    }
                }
                cases += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{cases} (N, m, q) cases, worst scaled error {worst:.2e}, {:.0} ms",
        elapsed.as_secs_f64() * 1e3
    ))
}

/// First- and second-derivative matrices from their dedicated double-sum formulas.
fn reference_matrix(n: usize, m: usize) -> Vec<Vec<f64>> {
    let nodes: Vec<f64> = (0..=n).map(|k| (k as f64 * PI / n as f64).cos()).collect();
    let t = |deg: usize, x: f64| cheb_t(deg, x).unwrap();
    let mut out = vec![vec![0.0; n + 1]; n + 1];
    for (k, &xk) in nodes.iter().enumerate() {
        for (j, &xj) in nodes.iter().enumerate() {
            let mut sum = 0.0;
            for deg in 0..=n {
                let nf = deg as f64;
                for l in 0..deg {
                    let term = match m {
                        1 if (deg + l) % 2 == 1 => nf / c_weight(l),
                        2 if (deg + l) % 2 == 0 && l + 2 <= deg => {
                            nf * (nf * nf - (l * l) as f64) / c_weight(l)
                        }
                        _ => continue,
                    };
                    sum += term * theta(deg, n) * t(deg, xj) * t(l, xk);
                }
            }
            let lead = if m == 1 { 4.0 } else { 2.0 };
            out[k][j] = lead * theta(j, n) / n as f64 * sum;
        }
    }
    out
}

fn explicit_series(n: usize, l: usize, m: usize) -> f64 {
    if l + m > n || (n + l + m) % 2 == 1 {
        return 0.0;
    }
    let (nf, lf) = (n as f64, l as i64);
    let f = |s: i64| nf * nf - (s * s) as f64;
    let c = c_weight(l);
    match m {
        3 => nf * f(lf + 1) * f(lf - 1) / (4.0 * c),
        4 => nf * f(lf - 2) * f(lf) * f(lf + 2) / (24.0 * c),
        5 => nf * f(lf - 3) * f(lf - 1) * f(lf + 1) * f(lf + 3) / (192.0 * c),
        _ => unreachable!(),
    }
}

fn formula_cross_checks() -> Result<String, String> {
    let mut worst_matrix = 0.0f64;
    for n in 1..=20 {
        for m in 1..=2.min(n) {
            let d = diff_matrix(n, m).map_err(|e| e.to_string())?;
            let reference = reference_matrix(n, m);
            let norm = reference
                .iter()
                .flatten()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            for k in 0..=n {
                for j in 0..=n {
                    let (a, b) = (d.get(k, j), reference[k][j]);
                    let rel = (a - b).abs() / b.abs().max(a.abs()).max(1e-3 * norm);
                    worst_matrix = worst_matrix.max(rel);
                    if rel > 1e-12 {
                        return Err(format!("N={n} m={m} ({k},{j}): {a} vs {b}"));
                    }
                }
            }
        }
    }

    let mut worst_series = 0.0f64;
    for n in 0..=20 {
        for m in 3..=5 {
            if m > n {
                continue;
            }
            let s = cheb_deriv_series(n, m).map_err(|e| e.to_string())?;
            for (l, &c) in s.coeffs.iter().enumerate() {
                let want = explicit_series(n, l, m);
                let rel = (c - want).abs() / want.abs().max(1.0);
                worst_series = worst_series.max(rel);
                if rel > 1e-12 {
                    return Err(format!("T_{n}^({m}) coefficient {l}: {c} vs {want}"));
                }
            }
        }
    }

    let mut worst_identity = 0.0f64;
    for n in 2..=20 {
        let up = cheb_deriv_series(n + 1, 1).map_err(|e| e.to_string())?;
        let down = cheb_deriv_series(n - 1, 1).map_err(|e| e.to_string())?;
        for l in 0..=n + 1 {
            let hi = up.coeffs.get(l).copied().unwrap_or(0.0) / (2.0 * (n + 1) as f64);
            let lo = down.coeffs.get(l).copied().unwrap_or(0.0) / (2.0 * (n - 1) as f64);
            let want = if l == n { 1.0 } else { 0.0 };
            let err = (hi - lo - want).abs();
            worst_identity = worst_identity.max(err);
            if err > 1e-12 {
                return Err(format!("T_{n} three-term identity at T_{l}: error {err:e}"));
            }
        }
    }
    Ok(format!(
        "m=1,2 matrices {worst_matrix:.1e}, m=3..5 series {worst_series:.1e}, identity {worst_identity:.1e}"
    ))
}

fn power_law() -> Result<String, String> {
    let mut worst = 0.0f64;
    for n in 1..=16 {
        let d1 = diff_matrix(n, 1).map_err(|e| e.to_string())?;
        let size = n + 1;
        let mut product: Vec<Vec<f64>> = (0..size).map(|k| d1.row(k).to_vec()).collect();
        for m in 2..=6.min(n) {
            product = (0..size)
                .map(|i| {
                    (0..size)
                        .map(|j| (0..size).map(|k| product[i][k] * d1.get(k, j)).sum())
                        .collect()
                })
                .collect();
            let norm = product
                .iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0f64, f64::max);
            let dm = diff_matrix(n, m).map_err(|e| e.to_string())?;
            for i in 0..size {
                for j in 0..size {
                    let ratio = (dm.get(i, j) - product[i][j]).abs() / norm;
                    worst = worst.max(ratio);
                    if ratio > 1e-10 {
                        return Err(format!("N={n} m={m} ({i},{j}): ratio {ratio:e}"));
                    }
                }
            }
        }
    }
    Ok(format!("N<=16, m<=6, worst {worst:.1e} of product norm"))
}

fn dsl_equivalence() -> Result<String, String> {
    let src = r#"{
        "order": 4,
        "domain": [0, 1],
        "residual": "y4 - sin(x) - sin(x)^2 + y2^2",
        "bcs": [
            {"at": "left", "deriv": 0, "value": "0"},
            {"at": "left", "deriv": 1, "value": "1"},
            {"at": "right", "deriv": 0, "value": "sin(1)"},
            {"at": "right", "deriv": 1, "value": "cos(1)"}
        ],
        "N": 14
    }"#;
    let cfg = ProblemConfig::from_json(src).map_err(|e| e.to_string())?;
    let problem = cfg.to_problem().map_err(|e| e.to_string())?;
    let opts = NewtonOptions::default();
    let parsed = solve_bvp(&problem, 14, &opts).map_err(|e| e.to_string())?;
    let builtin = chebfd::bench::builtin_problem(ExampleId::Ex1);
    let native = solve_bvp(&builtin.problem, 14, &opts).map_err(|e| e.to_string())?;
    let same = parsed
        .node_values()
        .iter()
        .zip(native.node_values())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    if same {
        Ok(format!(
            "{} node values bit-identical",
            parsed.node_values().len()
        ))
    } else {
        Err("node values differ".into())
    }
}

fn random_problem(rng: &mut impl Rng) -> (BvpProblem, usize) {
    let order = rng.gen_range(2..=6);
    let left = rng.gen_range(1..order);
    let a: f64 = rng.gen_range(-1.0..0.0);
    let b = a + rng.gen_range(0.5..2.0);
    let c: f64 = rng.gen_range(0.0..1.0);
    let mut bcs = Vec::new();
    for m in 0..left {
        bcs.push(BoundaryCondition::left(m, rng.gen_range(-1.0..1.0)));
    }
    for m in 0..order - left {
        bcs.push(BoundaryCondition::right(m, rng.gen_range(-1.0..1.0)));
    }
    let residual = move |x: f64, y: &[f64]| y[order] - c * (y[0] + 0.1 * y[0].sin()) - x.sin();
    let problem = BvpProblem::new(order, (a, b), Arc::new(residual), bcs).unwrap();
    let degree = rng.gen_range(order + 4..=order + 12);
    (problem, degree)
}

fn randomized_invariants() -> Result<String, String> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(20_240_101);
    let mut worst_roundtrip = 0.0f64;
    let mut worst_bc = 0.0f64;
    for trial in 0..100 {
        let n = rng.gen_range(2..=32);
        let values: Vec<f64> = (0..=n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let series = cheb_coeffs(&values).map_err(|e| e.to_string())?;
        for (k, &v) in values.iter().enumerate() {
            let x = (k as f64 * PI / n as f64).cos();
            let err = (series_eval(&series, x).map_err(|e| e.to_string())? - v).abs();
            worst_roundtrip = worst_roundtrip.max(err);
            if err > 1e-12 {
                return Err(format!(
                    "trial {trial}: roundtrip error {err:e} at node {k}"
                ));
            }
        }

        let (problem, degree) = random_problem(&mut rng);
        let sol = solve_bvp(&problem, degree, &NewtonOptions::default())
            .map_err(|e| format!("trial {trial}: {e}"))?;
        let (a, b) = problem.domain();
        let y_max = sol.node_values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for bc in problem.bcs() {
            let (x, row) = match bc.endpoint {
                Endpoint::Left => (a, degree),
                Endpoint::Right => (b, 0),
            };
            // Rounding floor of evaluating the m-th derivative at an endpoint:
            // it grows like N^(2m) and dominates 1e-9 for third and higher orders.
            let m = bc.deriv_order;
            let floor = if m == 0 {
                0.0
            } else {
                let d = diff_matrix(degree, m).map_err(|e| e.to_string())?;
                let row_sum: f64 = d.row(row).iter().map(|v| v.abs()).sum();
                f64::EPSILON * sol.map().scale_pow(m) * row_sum * y_max
            };
            let got = sol.eval_deriv(x, m).map_err(|e| e.to_string())?;
            let err = (got - bc.value).abs();
            if m <= 1 {
                worst_bc = worst_bc.max(err);
            }
            if err > 1e-9 + 1e3 * floor {
                return Err(format!(
                    "trial {trial}: {bc:?} off by {err:e} (floor {floor:e})"
                ));
            }
        }
    }
    Ok(format!(
        "100 trials, worst roundtrip {worst_roundtrip:.1e}, worst value/slope BC residual {worst_bc:.1e}"
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("example 1 (order 4, sin x)", ex1),
        ("example 2 (order 6, ln(1+x)/6)", ex2),
        ("example 3 (order 6, e^-x)", ex3),
        ("example 4 (order 7, e^x (1-x) cos x)", ex4),
        ("example 5 (order 10, 2/(2-x) - x - 1)", ex5),
        (
            "differentiation matrices are exact on polynomials",
            polynomial_exactness,
        ),
        (
            "general formula matches low-order special cases",
            formula_cross_checks,
        ),
        ("D^(m) agrees with (D^(1))^m", power_law),
        (
            "expression residual reproduces built-in solve",
            dsl_equivalence,
        ),
        (
            "randomized roundtrip and boundary conditions",
            randomized_invariants,
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
