//! Two-point boundary value problems of order `n` solved by collocation on a
//! Gauss–Lobatto grid.
//!
//! The unknowns are the values `y(t_k)` at the `N+1` nodes of the reference
//! interval `t ∈ [-1, 1]`. Rows of the nonlinear system follow the node
//! order: boundary conditions at the right end (`x = b`, node 0) first,
//! then the residual of the equation at interior nodes, then boundary
//! conditions at the left end (`x = a`, node `N`).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cheb::{self, cheb_coeffs, ChebError, ChebSeries, DiffMatrix, GaussLobattoGrid};
use crate::linalg::{lu_solve, DenseMatrix};
use crate::newton::{newton_solve, NewtonError, NewtonOptions, NewtonReport};

pub const MAX_ORDER: usize = 10;

/// `R(x, [y, y', ..., y^(n)])`, zero along solutions.
pub type ResidualFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    /// `x = a`, node index `N`.
    Left,
    /// `x = b`, node index 0.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub endpoint: Endpoint,
    /// Derivative order with respect to the original variable `x`.
    pub deriv_order: usize,
    pub value: f64,
}

impl BoundaryCondition {
    pub fn left(deriv_order: usize, value: f64) -> Self {
        Self {
            endpoint: Endpoint::Left,
            deriv_order,
            value,
        }
    }

    pub fn right(deriv_order: usize, value: f64) -> Self {
        Self {
            endpoint: Endpoint::Right,
            deriv_order,
            value,
        }
    }
}

#[derive(Debug, Error)]
pub enum BvpError {
    #[error("order {0} outside 1..={MAX_ORDER}")]
    InvalidOrder(usize),
    #[error("invalid domain [{0}, {1}]")]
    InvalidDomain(f64, f64),
    #[error("expected {expected} boundary conditions, got {got}")]
    BcCount { expected: usize, got: usize },
    #[error("boundary condition on derivative {deriv} is not below the order {order}")]
    BcOrder { deriv: usize, order: usize },
    #[error("duplicate boundary condition on derivative {deriv} at the {endpoint:?} end")]
    DuplicateBc { endpoint: Endpoint, deriv: usize },
    #[error("boundary condition value {0} is not finite")]
    BcValue(f64),
    #[error("degree {degree} too small: need at least {needed}")]
    DegreeTooSmall { degree: usize, needed: usize },
    #[error("residual does not depend on the highest derivative y{0}")]
    MissingHighestDerivative(usize),
    #[error("residual is not finite at node {node}")]
    Evaluation { node: usize },
    #[error("x = {0} lies outside the problem domain")]
    Domain(f64),
    #[error("derivative order {order} exceeds the problem order {max}")]
    DerivOrder { order: usize, max: usize },
    #[error(transparent)]
    Cheb(#[from] ChebError),
    #[error(transparent)]
    Solver(NewtonError),
    #[error("Jacobian became singular; best iterate returned")]
    JacobianSingular(Box<Solution>),
    #[error(
        "Newton iteration did not converge (residual {:e}); best iterate returned",
        .0.report.final_residual_norm
    )]
    NotConverged(Box<Solution>),
}

impl BvpError {
    /// Best-effort solution carried by a failed solve.
    pub fn solution(&self) -> Option<&Solution> {
        match self {
            BvpError::JacobianSingular(s) | BvpError::NotConverged(s) => Some(s),
            _ => None,
        }
    }
}

/// Affine map between `x ∈ [a, b]` and `t ∈ [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainMap {
    pub a: f64,
    pub b: f64,
}

impl DomainMap {
    pub fn new(a: f64, b: f64) -> Result<Self, BvpError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(BvpError::InvalidDomain(a, b));
        }
        Ok(Self { a, b })
    }

    pub fn to_t(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    pub fn to_x(&self, t: f64) -> f64 {
        self.a + (self.b - self.a) * (t + 1.0) / 2.0
    }

    /// `dt/dx = 2/(b-a)`.
    pub fn scale(&self) -> f64 {
        2.0 / (self.b - self.a)
    }

    /// `(dt/dx)^m`, the factor turning a `t`-derivative into an `x`-derivative.
    pub fn scale_pow(&self, m: usize) -> f64 {
        crate::expr::ipow(self.scale(), m as i64)
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * (self.b - self.a);
        x >= self.a - slack && x <= self.b + slack
    }
}

#[derive(Clone)]
pub struct BvpProblem {
    order: usize,
    map: DomainMap,
    residual: ResidualFn,
    bcs: Vec<BoundaryCondition>,
}

impl fmt::Debug for BvpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BvpProblem")
            .field("order", &self.order)
            .field("domain", &(self.map.a, self.map.b))
            .field("bcs", &self.bcs)
            .finish_non_exhaustive()
    }
}

impl BvpProblem {
    pub fn new(
        order: usize,
        domain: (f64, f64),
        residual: ResidualFn,
        bcs: Vec<BoundaryCondition>,
    ) -> Result<Self, BvpError> {
        if order == 0 || order > MAX_ORDER {
            return Err(BvpError::InvalidOrder(order));
        }
        let map = DomainMap::new(domain.0, domain.1)?;
        if bcs.len() != order {
            return Err(BvpError::BcCount {
                expected: order,
                got: bcs.len(),
            });
        }
        for (i, bc) in bcs.iter().enumerate() {
            if bc.deriv_order >= order {
                return Err(BvpError::BcOrder {
                    deriv: bc.deriv_order,
                    order,
                });
            }
            if !bc.value.is_finite() {
                return Err(BvpError::BcValue(bc.value));
            }
            if bcs[..i]
                .iter()
                .any(|o| o.endpoint == bc.endpoint && o.deriv_order == bc.deriv_order)
            {
                return Err(BvpError::DuplicateBc {
                    endpoint: bc.endpoint,
                    deriv: bc.deriv_order,
                });
            }
        }
        Ok(Self {
            order,
            map,
            residual,
            bcs,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.map.a, self.map.b)
    }

    pub fn map(&self) -> DomainMap {
        self.map
    }

    pub fn bcs(&self) -> &[BoundaryCondition] {
        &self.bcs
    }

    pub fn residual(&self, x: f64, derivs: &[f64]) -> f64 {
        (self.residual)(x, derivs)
    }

    pub fn count_at(&self, endpoint: Endpoint) -> usize {
        self.bcs.iter().filter(|b| b.endpoint == endpoint).count()
    }
}

/// A boundary condition restated on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedBc {
    pub endpoint: Endpoint,
    pub deriv_order: usize,
    /// Target for the `t`-derivative: the `x` value divided by `(2/(b-a))^m`.
    pub target: f64,
}

/// The problem restated for `t ∈ [-1, 1]`.
#[derive(Clone)]
pub struct ReferenceProblem {
    problem: BvpProblem,
    scale_pows: Vec<f64>,
    pub bcs: Vec<MappedBc>,
}

impl ReferenceProblem {
    /// Residual given `t`-derivatives; rescales to `x`-derivatives before
    /// calling the user residual.
    pub fn residual_t(&self, t: f64, t_derivs: &[f64]) -> f64 {
        let x_derivs: Vec<f64> = t_derivs
            .iter()
            .zip(&self.scale_pows)
            .map(|(d, s)| s * d)
            .collect();
        self.problem.residual(self.problem.map.to_x(t), &x_derivs)
    }

    /// `(2/(b-a))^m` for `m = 0..=n`.
    pub fn scale_pows(&self) -> &[f64] {
        &self.scale_pows
    }
}

pub fn to_reference_domain(problem: &BvpProblem) -> ReferenceProblem {
    let map = problem.map;
    let scale_pows: Vec<f64> = (0..=problem.order).map(|m| map.scale_pow(m)).collect();
    let bcs = problem
        .bcs
        .iter()
        .map(|bc| MappedBc {
            endpoint: bc.endpoint,
            deriv_order: bc.deriv_order,
            target: bc.value / scale_pows[bc.deriv_order],
        })
        .collect();
    ReferenceProblem {
        problem: problem.clone(),
        scale_pows,
        bcs,
    }
}

/// Interior nodes where the equation is enforced: `k = n_R ..= N - n_L`.
pub fn collocation_set(degree: usize, bcs: &[BoundaryCondition]) -> Result<Vec<usize>, BvpError> {
    let n_right = bcs.iter().filter(|b| b.endpoint == Endpoint::Right).count();
    let n_left = bcs.len() - n_right;
    if degree + 1 < bcs.len() + 1 || n_right > degree - n_left {
        return Err(BvpError::DegreeTooSmall {
            degree,
            needed: bcs.len(),
        });
    }
    Ok((n_right..=degree - n_left).collect())
}

/// Everything needed to evaluate the collocation residual for one `(problem, N)`.
#[derive(Clone)]
pub struct Discretization {
    reference: ReferenceProblem,
    grid: GaussLobattoGrid,
    /// `matrices[m - 1]` is the order-`m` differentiation matrix.
    matrices: Vec<DiffMatrix>,
    collocation: Vec<usize>,
    right_bcs: Vec<MappedBc>,
    left_bcs: Vec<MappedBc>,
}

impl Discretization {
    pub fn new(problem: &BvpProblem, degree: usize) -> Result<Self, BvpError> {
        let order = problem.order;
        if degree < order + 1 {
            return Err(BvpError::DegreeTooSmall {
                degree,
                needed: order + 1,
            });
        }
        let collocation = collocation_set(degree, &problem.bcs)?;
        let grid = GaussLobattoGrid::new(degree)?;
        let matrices = (1..=order)
            .map(|m| DiffMatrix::new(degree, m))
            .collect::<Result<Vec<_>, _>>()?;
        let reference = to_reference_domain(problem);
        let sorted = |end: Endpoint| {
            let mut v: Vec<MappedBc> = reference
                .bcs
                .iter()
                .copied()
                .filter(|b| b.endpoint == end)
                .collect();
            v.sort_by_key(|b| b.deriv_order);
            v
        };
        let right_bcs = sorted(Endpoint::Right);
        let left_bcs = sorted(Endpoint::Left);
        Ok(Self {
            reference,
            grid,
            matrices,
            collocation,
            right_bcs,
            left_bcs,
        })
    }

    pub fn degree(&self) -> usize {
        self.grid.degree()
    }

    pub fn grid(&self) -> &GaussLobattoGrid {
        &self.grid
    }

    pub fn collocation(&self) -> &[usize] {
        &self.collocation
    }

    pub fn problem(&self) -> &BvpProblem {
        &self.reference.problem
    }

    pub fn reference(&self) -> &ReferenceProblem {
        &self.reference
    }

    pub fn matrix(&self, m: usize) -> &DiffMatrix {
        &self.matrices[m - 1]
    }

    /// Node positions in the original variable.
    pub fn x_nodes(&self) -> Vec<f64> {
        let map = self.reference.problem.map;
        self.grid.nodes().iter().map(|&t| map.to_x(t)).collect()
    }

    /// `t`-derivative of order `m` of the interpolant at node `k`.
    fn t_deriv(&self, m: usize, k: usize, y: &[f64]) -> f64 {
        if m == 0 {
            y[k]
        } else {
            self.matrices[m - 1].apply_row(k, y)
        }
    }

    fn bc_row(&self, bc: &MappedBc, y: &[f64]) -> f64 {
        let node = match bc.endpoint {
            Endpoint::Right => 0,
            Endpoint::Left => self.degree(),
        };
        self.t_deriv(bc.deriv_order, node, y) - bc.target
    }

    fn collocation_row(&self, k: usize, y: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend((0..=self.reference.problem.order).map(|m| self.t_deriv(m, k, y)));
        self.reference.residual_t(self.grid.nodes()[k], scratch)
    }

    /// Residual vector of length `N+1`; non-finite entries are passed through.
    pub fn residual_raw(&self, y: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree() + 1);
        let mut scratch = Vec::with_capacity(self.reference.problem.order + 1);
        out.extend(self.right_bcs.iter().map(|bc| self.bc_row(bc, y)));
        out.extend(
            self.collocation
                .iter()
                .map(|&k| self.collocation_row(k, y, &mut scratch)),
        );
        out.extend(self.left_bcs.iter().map(|bc| self.bc_row(bc, y)));
        out
    }

    /// Residual vector, or the node index of the first non-finite entry.
    pub fn residual(&self, y: &[f64]) -> Result<Vec<f64>, BvpError> {
        let size = self.degree() + 1;
        if y.len() != size {
            return Err(ChebError::Shape {
                expected: size,
                got: y.len(),
            }
            .into());
        }
        let out = self.residual_raw(y);
        match out.iter().position(|v| !v.is_finite()) {
            Some(row) => Err(BvpError::Evaluation {
                node: self.row_node(row),
            }),
            None => Ok(out),
        }
    }

    /// Grid node that row `row` of the residual refers to.
    pub fn row_node(&self, row: usize) -> usize {
        let n_right = self.right_bcs.len();
        let n_colloc = self.collocation.len();
        if row < n_right {
            0
        } else if row < n_right + n_colloc {
            self.collocation[row - n_right]
        } else {
            self.degree()
        }
    }

    /// Polynomial of degree `n-1` meeting every boundary condition, sampled at the nodes.
    pub fn initial_guess(&self) -> Vec<f64> {
        let nodes = self.grid.nodes();
        let bcs = &self.reference.bcs;
        let n = bcs.len();
        let mut system = DenseMatrix::zeros(n, n);
        let mut rhs = vec![0.0; n];
        for (row, bc) in bcs.iter().enumerate() {
            let t = match bc.endpoint {
                Endpoint::Right => 1.0,
                Endpoint::Left => -1.0,
            };
            for p in bc.deriv_order..n {
                // d^m/dt^m t^p = p!/(p-m)! t^(p-m)
                let falling: f64 = ((p - bc.deriv_order + 1)..=p).map(|v| v as f64).product();
                system[(row, p)] = falling * crate::expr::ipow(t, (p - bc.deriv_order) as i64);
            }
            rhs[row] = bc.target;
        }
        if let Ok(c) = lu_solve(&system, &rhs) {
            return nodes
                .iter()
                .map(|&t| c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci))
                .collect();
        }

        let value_at = |end: Endpoint| {
            bcs.iter()
                .find(|b| b.endpoint == end && b.deriv_order == 0)
                .map(|b| b.target)
        };
        match (value_at(Endpoint::Left), value_at(Endpoint::Right)) {
            (Some(l), Some(r)) => nodes
                .iter()
                .map(|&t| l + (r - l) * (t + 1.0) / 2.0)
                .collect(),
            (Some(v), None) | (None, Some(v)) => vec![v; nodes.len()],
            (None, None) => vec![0.0; nodes.len()],
        }
    }

    /// Fails when the residual is insensitive to the highest derivative at
    /// the first collocation node of the given iterate.
    pub fn check_highest_derivative(&self, y: &[f64]) -> Result<(), BvpError> {
        let order = self.reference.problem.order;
        let k = self.collocation[0];
        let t = self.grid.nodes()[k];
        let mut derivs: Vec<f64> = (0..=order).map(|m| self.t_deriv(m, k, y)).collect();
        let base = self.reference.residual_t(t, &derivs);
        let bump = 1.0 + derivs[order].abs() + base.abs();
        derivs[order] += bump;
        let bumped = self.reference.residual_t(t, &derivs);
        if base.is_finite() && bumped.is_finite() && base == bumped {
            return Err(BvpError::MissingHighestDerivative(order));
        }
        Ok(())
    }
}

pub fn assemble_residual(
    problem: &BvpProblem,
    degree: usize,
    y: &[f64],
) -> Result<Vec<f64>, BvpError> {
    Discretization::new(problem, degree)?.residual(y)
}

#[derive(Debug, Clone)]
pub struct Solution {
    problem: BvpProblem,
    degree: usize,
    node_values: Vec<f64>,
    series: ChebSeries,
    pub report: NewtonReport,
}

impl Solution {
    fn from_nodes(
        problem: &BvpProblem,
        node_values: Vec<f64>,
        report: NewtonReport,
    ) -> Result<Self, BvpError> {
        let series = cheb_coeffs(&node_values)?;
        Ok(Self {
            problem: problem.clone(),
            degree: node_values.len() - 1,
            node_values,
            series,
            report,
        })
    }

    pub fn problem(&self) -> &BvpProblem {
        &self.problem
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    /// Series in the reference variable `t`.
    pub fn series(&self) -> &ChebSeries {
        &self.series
    }

    pub fn map(&self) -> DomainMap {
        self.problem.map
    }

    pub fn converged(&self) -> bool {
        self.report.converged
    }

    /// Node positions in `x`, in grid order (`x = b` first).
    pub fn x_nodes(&self) -> Vec<f64> {
        let map = self.problem.map;
        GaussLobattoGrid::new(self.degree)
            .map(|g| g.nodes().iter().map(|&t| map.to_x(t)).collect())
            .unwrap_or_default()
    }

    pub fn eval(&self, x: f64) -> Result<f64, BvpError> {
        self.eval_deriv(x, 0)
    }

    /// `m`-th `x`-derivative of the solution polynomial.
    pub fn eval_deriv(&self, x: f64, m: usize) -> Result<f64, BvpError> {
        let map = self.problem.map;
        if !x.is_finite() || !map.contains(x) {
            return Err(BvpError::Domain(x));
        }
        if m > self.problem.order {
            return Err(BvpError::DerivOrder {
                order: m,
                max: self.problem.order,
            });
        }
        let t = map.to_t(x).clamp(-1.0, 1.0);
        let value = if m == 0 {
            self.series.eval(t)?
        } else {
            self.series.eval_derivative(t, m)? * map.scale_pow(m)
        };
        Ok(value)
    }

    /// Monomial coefficients of the solution polynomial in the original variable `x`.
    pub fn monomial_in_x(&self) -> Result<Vec<f64>, BvpError> {
        let in_t = cheb::series_to_monomial(&self.series)?;
        // t = alpha x + beta
        let map = self.problem.map;
        let alpha = map.scale();
        let beta = -(map.a + map.b) / (map.b - map.a);
        let mut out = vec![0.0; in_t.len()];
        let mut len = 0;
        for &c in in_t.iter().rev() {
            // out <- out * (alpha x + beta) + c
            let mut next = vec![0.0; in_t.len()];
            for p in 0..len {
                next[p] += beta * out[p];
                next[p + 1] += alpha * out[p];
            }
            next[0] += c;
            out = next;
            len = (len + 1).min(in_t.len());
        }
        Ok(out)
    }
}

pub fn eval_solution(solution: &Solution, x: f64) -> Result<f64, BvpError> {
    solution.eval(x)
}

pub fn eval_solution_deriv(solution: &Solution, x: f64, m: usize) -> Result<f64, BvpError> {
    solution.eval_deriv(x, m)
}

/// Collocate `problem` on `N+1` Gauss–Lobatto nodes and solve with damped Newton,
/// starting from the lowest-degree polynomial that meets the boundary conditions.
pub fn solve_bvp(
    problem: &BvpProblem,
    degree: usize,
    opts: &NewtonOptions,
) -> Result<Solution, BvpError> {
    let disc = Discretization::new(problem, degree)?;
    let y0 = disc.initial_guess();
    disc.check_highest_derivative(&y0)?;
    disc.residual(&y0)?;

    match newton_solve(|y: &[f64]| disc.residual_raw(y), &y0, opts) {
        Ok(outcome) => Solution::from_nodes(problem, outcome.solution, outcome.report),
        Err(NewtonError::NotConverged(o)) => Err(BvpError::NotConverged(Box::new(
            Solution::from_nodes(problem, o.solution, o.report)?,
        ))),
        Err(NewtonError::JacobianSingular(o)) => Err(BvpError::JacobianSingular(Box::new(
            Solution::from_nodes(problem, o.solution, o.report)?,
        ))),
        Err(NewtonError::Evaluation { index }) => Err(BvpError::Evaluation {
            node: disc.row_node(index),
        }),
        Err(e @ (NewtonError::InvalidOptions | NewtonError::Dimension { .. })) => {
            Err(BvpError::Solver(e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> ResidualFn {
        Arc::new(f)
    }

    fn linear_problem() -> BvpProblem {
        // y'' = 0, y(-1) = 0, y(1) = 1
        BvpProblem::new(
            2,
            (-1.0, 1.0),
            residual(|_, y| y[2]),
            vec![
                BoundaryCondition::left(0, 0.0),
                BoundaryCondition::right(0, 1.0),
            ],
        )
        .unwrap()
    }

    fn ex1_like() -> BvpProblem {
        BvpProblem::new(
            4,
            (0.0, 1.0),
            residual(|x, y| y[4] - x.sin() - x.sin() * x.sin() + y[2] * y[2]),
            vec![
                BoundaryCondition::left(0, 0.0),
                BoundaryCondition::left(1, 1.0),
                BoundaryCondition::right(0, 1f64.sin()),
                BoundaryCondition::right(1, 1f64.cos()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn domain_map_scaling() {
        let p = ex1_like();
        let r = to_reference_domain(&p);
        assert_eq!(r.scale_pows()[4], 16.0);
        let slope = r
            .bcs
            .iter()
            .find(|b| b.endpoint == Endpoint::Left && b.deriv_order == 1)
            .unwrap();
        assert_eq!(slope.target, 0.5);

        let id = to_reference_domain(&linear_problem());
        assert!(id.scale_pows().iter().all(|&s| s == 1.0));
        assert!(matches!(
            DomainMap::new(1.0, 1.0),
            Err(BvpError::InvalidDomain(..))
        ));
        assert!(matches!(
            DomainMap::new(2.0, 1.0),
            Err(BvpError::InvalidDomain(..))
        ));
    }

    #[test]
    fn reference_residual_rescales() {
        // R = y'' - 2 on [0, 1]; t-space second derivative 0.5 maps to 2.
        let p = BvpProblem::new(
            2,
            (0.0, 1.0),
            residual(|_, y| y[2] - 2.0),
            vec![
                BoundaryCondition::left(0, 0.0),
                BoundaryCondition::right(0, 1.0),
            ],
        )
        .unwrap();
        let r = to_reference_domain(&p);
        assert_eq!(r.residual_t(0.0, &[0.0, 0.0, 0.5]), 0.0);
    }

    #[test]
    fn collocation_examples() {
        let ex1 = ex1_like();
        let set = collocation_set(14, ex1.bcs()).unwrap();
        assert_eq!(set, (2..=12).collect::<Vec<_>>());
        assert_eq!(set.len() + 4, 15);

        let mut ex4 = (0..4)
            .map(|d| BoundaryCondition::left(d, 0.0))
            .collect::<Vec<_>>();
        ex4.extend((0..3).map(|d| BoundaryCondition::right(d, 0.0)));
        let set = collocation_set(16, &ex4).unwrap();
        assert_eq!(set, (3..=12).collect::<Vec<_>>());
        assert_eq!(set.len() + 7, 17);

        let second = linear_problem();
        assert_eq!(
            collocation_set(9, second.bcs()).unwrap(),
            (1..=8).collect::<Vec<_>>()
        );

        assert!(matches!(
            collocation_set(3, ex1.bcs()),
            Err(BvpError::DegreeTooSmall { .. })
        ));
    }

    #[test]
    fn problem_validation() {
        let r = residual(|_, y| y[2]);
        let err = BvpProblem::new(
            4,
            (0.0, 1.0),
            r.clone(),
            vec![BoundaryCondition::left(0, 0.0); 3],
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "expected 4 boundary conditions, got 3");
        assert!(matches!(
            BvpProblem::new(
                2,
                (0.0, 1.0),
                r.clone(),
                vec![BoundaryCondition::left(0, 0.0); 2]
            ),
            Err(BvpError::DuplicateBc { .. })
        ));
        assert!(matches!(
            BvpProblem::new(
                2,
                (0.0, 1.0),
                r.clone(),
                vec![
                    BoundaryCondition::left(0, 0.0),
                    BoundaryCondition::left(2, 0.0)
                ]
            ),
            Err(BvpError::BcOrder { .. })
        ));
        assert!(matches!(
            BvpProblem::new(11, (0.0, 1.0), r.clone(), vec![]),
            Err(BvpError::InvalidOrder(11))
        ));
        assert!(matches!(
            BvpProblem::new(1, (0.0, 1.0), r, vec![BoundaryCondition::left(0, f64::NAN)]),
            Err(BvpError::BcValue(_))
        ));
    }

    #[test]
    fn residual_is_square() {
        let p = ex1_like();
        for n in 5..20 {
            let y = vec![0.1; n + 1];
            assert_eq!(assemble_residual(&p, n, &y).unwrap().len(), n + 1);
        }
    }

    #[test]
    fn residual_of_exact_sin_is_small() {
        let p = ex1_like();
        let disc = Discretization::new(&p, 14).unwrap();
        let y: Vec<f64> = disc.x_nodes().iter().map(|x| x.sin()).collect();
        let r = disc.residual(&y).unwrap();
        assert!(crate::linalg::norm_inf(&r) <= 1e-8, "{r:?}");
    }

    #[test]
    fn residual_of_polynomial_solution_is_roundoff() {
        // y'' = 2 on [0, 2], exact y = x^2 - x, y(0) = 0, y(2) = 2
        let p = BvpProblem::new(
            2,
            (0.0, 2.0),
            residual(|_, y| y[2] - 2.0),
            vec![
                BoundaryCondition::left(0, 0.0),
                BoundaryCondition::right(0, 2.0),
            ],
        )
        .unwrap();
        let disc = Discretization::new(&p, 6).unwrap();
        let y: Vec<f64> = disc.x_nodes().iter().map(|x| x * x - x).collect();
        let r = disc.residual(&y).unwrap();
        assert!(crate::linalg::norm_inf(&r) <= 1e-12, "{r:?}");
    }

    #[test]
    fn residual_reports_node_of_non_finite_value() {
        let p = BvpProblem::new(
            2,
            (0.0, 1.0),
            residual(|x, y| if x > 0.6 && x < 0.9 { f64::NAN } else { y[2] }),
            vec![
                BoundaryCondition::left(0, 0.0),
                BoundaryCondition::right(0, 1.0),
            ],
        )
        .unwrap();
        let disc = Discretization::new(&p, 8).unwrap();
        match disc.residual(&[0.0; 9]) {
            Err(BvpError::Evaluation { node }) => {
                let x = disc.x_nodes()[node];
                assert!(x > 0.6 && x < 0.9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn straight_line_exact() {
        let sol = solve_bvp(&linear_problem(), 4, &NewtonOptions::default()).unwrap();
        let g = GaussLobattoGrid::new(4).unwrap();
        for (v, t) in sol.node_values().iter().zip(g.nodes()) {
            assert!((v - (t + 1.0) / 2.0).abs() <= 1e-13);
        }
        assert!(sol.converged());
    }

    #[test]
    fn ex1_like_solution() {
        let sol = solve_bvp(&ex1_like(), 14, &NewtonOptions::default()).unwrap();
        let max_err = (0..=10)
            .map(|i| i as f64 / 10.0)
            .map(|x| (sol.eval(x).unwrap() - x.sin()).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 1e-9, "{max_err:e}");
        assert!((sol.eval(0.5).unwrap() - 0.479425538604203).abs() <= 1e-9);
        assert!(sol.eval(0.0).unwrap().abs() <= 1e-9);
        assert!((sol.eval_deriv(0.0, 1).unwrap() - 1.0).abs() <= 1e-9);
        assert!(matches!(sol.eval(1.5), Err(BvpError::Domain(_))));
        assert!(matches!(
            sol.eval_deriv(0.5, 5),
            Err(BvpError::DerivOrder { .. })
        ));

        for (x, v) in sol.x_nodes().iter().zip(sol.node_values()) {
            assert!((sol.eval(*x).unwrap() - v).abs() <= 1e-12);
        }

        let mono = sol.monomial_in_x().unwrap();
        // Taylor coefficients of sin: 0, 1, 0, -1/6, 0, 1/120
        assert!(mono[0].abs() < 1e-6);
        assert!((mono[1] - 1.0).abs() < 1e-6);
        assert!(mono[2].abs() < 1e-6);
        assert!((mono[3] + 0.16666671897218904).abs() < 1e-6);
    }

    #[test]
    fn missing_highest_derivative_rejected() {
        let p = BvpProblem::new(
            2,
            (0.0, 1.0),
            residual(|_, y| y[1] - 1.0),
            vec![
                BoundaryCondition::left(0, 0.0),
                BoundaryCondition::right(0, 1.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            solve_bvp(&p, 8, &NewtonOptions::default()),
            Err(BvpError::MissingHighestDerivative(2))
        ));
    }

    #[test]
    fn degree_too_small() {
        assert!(matches!(
            solve_bvp(&ex1_like(), 4, &NewtonOptions::default()),
            Err(BvpError::DegreeTooSmall { .. })
        ));
    }

    #[test]
    fn initial_guess_meets_bcs() {
        let p = ex1_like();
        let disc = Discretization::new(&p, 12).unwrap();
        let y0 = disc.initial_guess();
        let r = disc.residual(&y0).unwrap();
        let n_colloc = disc.collocation().len();
        for (row, v) in r.iter().enumerate() {
            let is_bc = row < 2 || row >= 2 + n_colloc;
            if is_bc {
                assert!(v.abs() < 1e-13, "row {row}: {v}");
            }
        }
    }

    #[test]
    fn initial_guess_fallbacks() {
        // y'(a) and y'(b) only: the degree-1 Hermite system is singular, no value BCs.
        let p = BvpProblem::new(
            2,
            (0.0, 1.0),
            residual(|_, y| y[2] + y[0]),
            vec![
                BoundaryCondition::left(1, 1.0),
                BoundaryCondition::right(1, 0.0),
            ],
        )
        .unwrap();
        let disc = Discretization::new(&p, 6).unwrap();
        assert_eq!(disc.initial_guess(), vec![0.0; 7]);
    }

    #[test]
    fn not_converged_carries_solution() {
        // Stiff exponential nonlinearity; two iterations are not enough.
        let p = BvpProblem::new(
            2,
            (0.0, 1.0),
            residual(|_, y| y[2] - (y[0] * 50.0).exp()),
            vec![
                BoundaryCondition::left(0, 0.0),
                BoundaryCondition::right(0, 1.0),
            ],
        )
        .unwrap();
        let opts = NewtonOptions {
            max_iter: 2,
            ..NewtonOptions::default()
        };
        match solve_bvp(&p, 10, &opts) {
            Err(BvpError::NotConverged(sol)) => {
                assert!(!sol.converged());
                assert_eq!(sol.node_values().len(), 11);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
