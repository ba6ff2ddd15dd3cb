//! JSON problem description with expression-valued residual and boundary values.
//!
//! ```json
//! {
//!   "order": 4,
//!   "domain": [0, 1],
//!   "residual": "y4 - sin(x) - sin(x)^2 + y2^2",
//!   "bcs": [
//!     {"at": "left", "deriv": 0, "value": 0},
//!     {"at": "right", "deriv": 1, "value": "cos(1)"}
//!   ],
//!   "N": 14,
//!   "solver": {"max_iter": 50}
//! }
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::BuiltinExample;
use crate::bvp::{BoundaryCondition, BvpError, BvpProblem, Endpoint};
use crate::expr::{eval_constant, parse_str, ExprAst, ExprError, PointEnv};
use crate::newton::NewtonOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in {field}: {source}")]
    Expr {
        field: String,
        #[source]
        source: ExprError,
    },
    #[error("residual uses y{found} but the problem order is {order}")]
    ResidualOrder { found: usize, order: usize },
    #[error(transparent)]
    Problem(#[from] BvpError),
}

/// A boundary value given either as a number or as a constant expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BcValue {
    Number(f64),
    Expr(String),
}

impl BcValue {
    pub fn resolve(&self) -> Result<f64, ExprError> {
        match self {
            BcValue::Number(v) => Ok(*v),
            BcValue::Expr(src) => eval_constant(src),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    pub at: Endpoint,
    pub deriv: usize,
    pub value: BcValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub order: usize,
    pub domain: [f64; 2],
    pub residual: String,
    pub bcs: Vec<BcConfig>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<NewtonOptions>,
}

impl ProblemConfig {
    pub fn from_json(src: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Config reproducing a built-in example through the expression path.
    pub fn from_builtin(ex: &BuiltinExample) -> Self {
        let (a, b) = ex.problem.domain();
        ProblemConfig {
            order: ex.problem.order(),
            domain: [a, b],
            residual: ex.residual_expr.to_string(),
            bcs: ex
                .bc_sources
                .iter()
                .map(|s| BcConfig {
                    at: s.endpoint,
                    deriv: s.deriv_order,
                    value: BcValue::Expr(s.value.to_string()),
                })
                .collect(),
            degree: Some(ex.default_n),
            solver: None,
        }
    }

    pub fn solver_options(&self) -> NewtonOptions {
        self.solver.unwrap_or_default()
    }

    pub fn residual_ast(&self) -> Result<ExprAst, ConfigError> {
        let ast = parse_str(&self.residual).map_err(|source| ConfigError::Expr {
            field: "residual".into(),
            source,
        })?;
        if let Some(found) = ast.max_deriv() {
            if found > self.order {
                return Err(ConfigError::ResidualOrder {
                    found,
                    order: self.order,
                });
            }
        }
        Ok(ast)
    }

    /// Residual evaluation errors (e.g. `ln` of a negative value) become NaN,
    /// which the solver reports as an evaluation failure at that node.
    pub fn to_problem(&self) -> Result<BvpProblem, ConfigError> {
        let ast = self.residual_ast()?;
        let bcs = self
            .bcs
            .iter()
            .enumerate()
            .map(|(i, bc)| {
                let value = bc.value.resolve().map_err(|source| ConfigError::Expr {
                    field: format!("bcs[{i}].value"),
                    source,
                })?;
                Ok(BoundaryCondition {
                    endpoint: bc.at,
                    deriv_order: bc.deriv,
                    value,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let residual =
            move |x: f64, derivs: &[f64]| ast.eval(&PointEnv { x, derivs }).unwrap_or(f64::NAN);
        Ok(BvpProblem::new(
            self.order,
            (self.domain[0], self.domain[1]),
            Arc::new(residual),
            bcs,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{builtin_problem, ExampleId};

    const EX1: &str = r#"{
        "order": 4,
        "domain": [0, 1],
        "residual": "y4 - sin(x) - sin(x)^2 + y2^2",
        "bcs": [
            {"at": "left", "deriv": 0, "value": "0"},
            {"at": "left", "deriv": 1, "value": 1},
            {"at": "right", "deriv": 0, "value": "sin(1)"},
            {"at": "right", "deriv": 1, "value": "cos(1)"}
        ],
        "N": 14
    }"#;

    #[test]
    fn parses_numbers_and_expressions() {
        let cfg = ProblemConfig::from_json(EX1).unwrap();
        assert_eq!(cfg.degree, Some(14));
        assert_eq!(cfg.bcs[1].value, BcValue::Number(1.0));
        let p = cfg.to_problem().unwrap();
        assert_eq!(p.bcs()[2].value, 1f64.sin());
        assert_eq!(cfg.solver_options(), NewtonOptions::default());
    }

    #[test]
    fn missing_bc_is_a_problem_error() {
        let mut cfg = ProblemConfig::from_json(EX1).unwrap();
        cfg.bcs.pop();
        let err = cfg.to_problem().unwrap_err();
        assert!(
            err.to_string().contains("expected 4 boundary conditions"),
            "{err}"
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut cfg = ProblemConfig::from_json(EX1).unwrap();
        cfg.residual = "y5 + x".into();
        assert!(matches!(
            cfg.to_problem(),
            Err(ConfigError::ResidualOrder { found: 5, order: 4 })
        ));
        cfg.residual = "y4 +".into();
        assert!(matches!(cfg.to_problem(), Err(ConfigError::Expr { .. })));
        cfg.residual = "y4".into();
        cfg.bcs[0].value = BcValue::Expr("x".into());
        let err = cfg.to_problem().unwrap_err();
        assert!(err.to_string().starts_with("in bcs[0].value"), "{err}");
        assert!(ProblemConfig::from_json("{\"order\": 4}").is_err());
        assert!(ProblemConfig::from_json(&EX1.replace("\"N\"", "\"M\"")).is_err());
    }

    #[test]
    fn builtin_round_trip() {
        for id in ExampleId::ALL {
            let ex = builtin_problem(id);
            let cfg = ProblemConfig::from_builtin(&ex);
            let back = ProblemConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg);
            let p = back.to_problem().unwrap();
            assert_eq!(p.bcs(), ex.problem.bcs());
        }
    }
}
