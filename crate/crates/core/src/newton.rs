//! Damped Newton iteration with forward-difference Jacobians.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{lu_solve, norm_inf, DenseMatrix, LinalgError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Convergence threshold on `‖F(y)‖∞`.
    pub residual_tol: f64,
    /// Convergence threshold on the accepted step, relative to `1 + ‖y‖∞`.
    pub step_tol: f64,
    pub fd_step_scale: f64,
    pub max_backtracks: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            residual_tol: 1e-12,
            step_tol: 1e-14,
            fd_step_scale: f64::EPSILON.sqrt(),
            max_backtracks: 30,
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<(), NewtonError> {
        let positive = [self.residual_tol, self.step_tol, self.fd_step_scale]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive || self.max_iter == 0 {
            return Err(NewtonError::InvalidOptions);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ResidualTol,
    StepTol,
    /// No step length reduced the residual.
    Stagnated,
    MaxIter,
    SingularJacobian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub last_step_norm: f64,
    pub converged: bool,
    pub backtrack_total: usize,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub solution: Vec<f64>,
    pub report: NewtonReport,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NewtonError {
    #[error("invalid solver options")]
    InvalidOptions,
    #[error("residual component {index} is not finite")]
    Evaluation { index: usize },
    #[error("residual has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("Jacobian is singular after {} iterations", .0.report.iterations)]
    JacobianSingular(Box<NewtonOutcome>),
    #[error("no convergence after {} iterations (residual {:e})", .0.report.iterations, .0.report.final_residual_norm)]
    NotConverged(Box<NewtonOutcome>),
}

impl NewtonError {
    /// Best iterate carried by a failed solve, if any.
    pub fn outcome(&self) -> Option<&NewtonOutcome> {
        match self {
            NewtonError::JacobianSingular(o) | NewtonError::NotConverged(o) => Some(o),
            _ => None,
        }
    }
}

fn first_non_finite(v: &[f64]) -> Option<usize> {
    v.iter().position(|x| !x.is_finite())
}

fn evaluate<F>(f: &mut F, y: &[f64], expected: usize) -> Result<Vec<f64>, NewtonError>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let out = f(y);
    if out.len() != expected {
        return Err(NewtonError::Dimension {
            expected,
            got: out.len(),
        });
    }
    match first_non_finite(&out) {
        Some(index) => Err(NewtonError::Evaluation { index }),
        None => Ok(out),
    }
}

/// Forward-difference Jacobian; column `j` uses `h_j = step_scale · (1 + |y_j|)`.
pub fn fd_jacobian<F>(f: &mut F, y: &[f64], step_scale: f64) -> Result<DenseMatrix, NewtonError>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let f0 = f(y);
    if let Some(index) = first_non_finite(&f0) {
        return Err(NewtonError::Evaluation { index });
    }
    fd_jacobian_at(f, y, &f0, step_scale)
}

fn fd_jacobian_at<F>(
    f: &mut F,
    y: &[f64],
    f0: &[f64],
    step_scale: f64,
) -> Result<DenseMatrix, NewtonError>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut jac = DenseMatrix::zeros(f0.len(), y.len());
    let mut probe = y.to_vec();
    let mut column = vec![0.0; f0.len()];
    for j in 0..y.len() {
        let h = step_scale * (1.0 + y[j].abs());
        probe[j] = y[j] + h;
        let fj = evaluate(f, &probe, f0.len())?;
        probe[j] = y[j];
        for ((c, a), b) in column.iter_mut().zip(&fj).zip(f0) {
            *c = (a - b) / h;
        }
        jac.set_column(j, &column);
    }
    Ok(jac)
}

/// Solve `F(y) = 0` from `y0`.
///
/// Each iteration solves `J Δ = -F(y)` and halves the step length until the
/// residual norm strictly decreases. A failed solve still hands back the best
/// iterate through the error value.
pub fn newton_solve<F>(
    mut f: F,
    y0: &[f64],
    opts: &NewtonOptions,
) -> Result<NewtonOutcome, NewtonError>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    opts.validate()?;
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut fy = evaluate(&mut f, &y, dim)?;
    let mut norm = norm_inf(&fy);
    let mut report = NewtonReport {
        iterations: 0,
        final_residual_norm: norm,
        last_step_norm: 0.0,
        converged: false,
        backtrack_total: 0,
        stop_reason: StopReason::MaxIter,
    };

    let finish = |y: Vec<f64>, mut report: NewtonReport, reason: StopReason| {
        report.stop_reason = reason;
        report.converged = matches!(reason, StopReason::ResidualTol | StopReason::StepTol);
        let outcome = NewtonOutcome {
            solution: y,
            report,
        };
        match reason {
            StopReason::ResidualTol | StopReason::StepTol => Ok(outcome),
            StopReason::SingularJacobian => Err(NewtonError::JacobianSingular(Box::new(outcome))),
            StopReason::Stagnated | StopReason::MaxIter => {
                Err(NewtonError::NotConverged(Box::new(outcome)))
            }
        }
    };

    loop {
        if norm <= opts.residual_tol {
            return finish(y, report, StopReason::ResidualTol);
        }
        if report.iterations >= opts.max_iter {
            return finish(y, report, StopReason::MaxIter);
        }

        let jac = fd_jacobian_at(&mut f, &y, &fy, opts.fd_step_scale)?;
        let rhs: Vec<f64> = fy.iter().map(|v| -v).collect();
        let delta = match lu_solve(&jac, &rhs) {
            Ok(d) => d,
            Err(LinalgError::SingularMatrix(_)) => {
                return finish(y, report, StopReason::SingularJacobian)
            }
            Err(LinalgError::Shape { .. }) => {
                return Err(NewtonError::Dimension {
                    expected: dim,
                    got: fy.len(),
                })
            }
        };
        report.iterations += 1;
        let delta_norm = norm_inf(&delta);

        let mut alpha = 1.0;
        let mut accepted = None;
        for attempt in 0..=opts.max_backtracks {
            let trial: Vec<f64> = y.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            let f_trial = f(&trial);
            if f_trial.len() != dim {
                return Err(NewtonError::Dimension {
                    expected: dim,
                    got: f_trial.len(),
                });
            }
            if first_non_finite(&f_trial).is_none() {
                let trial_norm = norm_inf(&f_trial);
                if trial_norm < norm {
                    report.backtrack_total += attempt;
                    accepted = Some((trial, f_trial, trial_norm));
                    break;
                }
            }
            alpha *= 0.5;
        }

        match accepted {
            Some((trial, f_trial, trial_norm)) => {
                y = trial;
                fy = f_trial;
                norm = trial_norm;
                report.final_residual_norm = norm;
                report.last_step_norm = alpha * delta_norm;
                if report.last_step_norm <= opts.step_tol * (1.0 + norm_inf(&y)) {
                    return finish(y, report, StopReason::StepTol);
                }
            }
            None => {
                report.backtrack_total += opts.max_backtracks + 1;
                report.last_step_norm = delta_norm;
                // The full Newton correction is already below the step
                // tolerance: the residual sits at its rounding floor.
                if delta_norm <= opts.step_tol * (1.0 + norm_inf(&y)) {
                    return finish(y, report, StopReason::StepTol);
                }
                return finish(y, report, StopReason::Stagnated);
            }
        }
    }
}
