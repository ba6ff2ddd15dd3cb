//! CSV and JSON output.
//!
//! Floats in CSV are written with 17 significant digits so they round-trip.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::bench::ErrorTable;
use crate::bvp::{BvpError, Solution};
use crate::cheb::DiffMatrix;
use crate::newton::NewtonReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid must look like start:stop:step, got '{0}'")]
    Format(String),
    #[error("grid step must be positive and stop >= start")]
    Range,
    #[error("grid has more than {0} points")]
    TooLarge(usize),
}

pub const MAX_GRID_POINTS: usize = 1_000_000;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn error_table_csv(table: &ErrorTable) -> String {
    let mut out = String::from("x,exact,computed,abs_error\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.x),
            fmt_f64(r.exact),
            fmt_f64(r.computed),
            fmt_f64(r.abs_error)
        );
    }
    out
}

/// `x,computed` rows, for solutions without a known exact solution.
pub fn samples_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("x,computed\n");
    for &(x, y) in samples {
        let _ = writeln!(out, "{},{}", fmt_f64(x), fmt_f64(y));
    }
    out
}

pub fn diff_matrix_csv(matrix: &DiffMatrix) -> String {
    let mut out = String::new();
    for row in matrix.rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Parses `start:stop:step` into `start, start + step, ...` up to `stop`.
pub fn parse_grid(src: &str) -> Result<Vec<f64>, GridError> {
    let parts: Vec<&str> = src.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(GridError::Format(src.to_string()));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| GridError::Format(src.to_string()))
    };
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if step <= 0.0 || stop < start {
        return Err(GridError::Range);
    }
    let count = ((stop - start) / step * (1.0 + 1e-12)).floor();
    if count >= MAX_GRID_POINTS as f64 {
        return Err(GridError::TooLarge(MAX_GRID_POINTS));
    }
    Ok((0..=count as usize)
        .map(|i| (start + i as f64 * step).min(stop))
        .collect())
}

pub fn sample_solution(solution: &Solution, grid: &[f64]) -> Result<Vec<(f64, f64)>, BvpError> {
    grid.iter().map(|&x| Ok((x, solution.eval(x)?))).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionJson {
    pub domain: [f64; 2],
    #[serde(rename = "N")]
    pub degree: usize,
    pub x_nodes: Vec<f64>,
    pub node_values: Vec<f64>,
    /// Coefficients in the variable on `[-1, 1]`, endpoints not halved.
    pub cheb_coeffs: Vec<f64>,
    pub report: NewtonReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monomial_coeffs: Option<Vec<f64>>,
}

impl SolutionJson {
    pub fn new(solution: &Solution, with_monomials: bool) -> Result<Self, BvpError> {
        let (a, b) = solution.problem().domain();
        let monomial_coeffs = if with_monomials {
            Some(solution.monomial_in_x()?)
        } else {
            None
        };
        Ok(SolutionJson {
            domain: [a, b],
            degree: solution.degree(),
            x_nodes: solution.x_nodes(),
            node_values: solution.node_values().to_vec(),
            cheb_coeffs: solution.series().coeffs().to_vec(),
            report: solution.report,
            monomial_coeffs,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }
}
