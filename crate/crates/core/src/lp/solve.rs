use minilp::{ComparisonOp, OptimizationDirection, Problem, Solution, Variable};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::exact::{rational, solve_exact};
use super::{LpError, LpModel, RowKind, Sense};

/// Variable count up to which `Solver::Auto` uses exact arithmetic.
pub const AUTO_EXACT_LIMIT: usize = 120;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Solver {
    Exact,
    Float,
    #[default]
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
}

#[derive(Clone, Debug, Serialize)]
pub struct LpSolution {
    pub status: SolveStatus,
    pub solver: Solver,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Largest row or bound violation of `values`.
    pub max_residual: f64,
}

impl LpSolution {
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }
}

/// Largest absolute violation over rows and variable bounds.
pub fn residuals(model: &LpModel, values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for row in &model.rows {
        let lhs: f64 = row.terms.iter().map(|&(v, c)| c as f64 * values[v]).sum();
        let r = match row.sense {
            Sense::Eq => (lhs - row.rhs).abs(),
            Sense::Ge => (row.rhs - lhs).max(0.0),
        };
        worst = worst.max(r);
    }
    for (i, &x) in values.iter().enumerate() {
        worst = worst.max(-x);
        if let Some(u) = model.upper(i) {
            worst = worst.max(x - u);
        }
    }
    worst
}

/// Indices of violated rows (exact arithmetic), with bound violations reported as
/// `rows.len() + variable`.
pub fn residuals_exact(model: &LpModel, values: &[BigRational]) -> Vec<usize> {
    let mut bad = Vec::new();
    for (k, row) in model.rows.iter().enumerate() {
        let lhs = row
            .terms
            .iter()
            .map(|&(v, c)| &values[v] * BigRational::from_integer(c.into()))
            .fold(BigRational::zero(), |s, x| s + x);
        let rhs = rational(row.rhs);
        let ok = match row.sense {
            Sense::Eq => lhs == rhs,
            Sense::Ge => lhs >= rhs,
        };
        if !ok {
            bad.push(k);
        }
    }
    for (i, x) in values.iter().enumerate() {
        let over = model.upper(i).is_some_and(|u| *x > rational(u));
        if *x < BigRational::zero() || over {
            bad.push(model.rows.len() + i);
        }
    }
    bad
}

fn float_problem(model: &LpModel) -> (Problem, Vec<Variable>) {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..model.num_vars())
        .map(|i| {
            let hi = model.upper(i).unwrap_or(f64::INFINITY);
            problem.add_var(model.objective[i] as f64, (0.0, hi))
        })
        .collect();
    for row in &model.rows {
        let expr: Vec<_> = row.terms.iter().map(|&(v, c)| (vars[v], c as f64)).collect();
        let op = match row.sense {
            Sense::Eq => ComparisonOp::Eq,
            Sense::Ge => ComparisonOp::Ge,
        };
        problem.add_constraint(expr.as_slice(), op, row.rhs);
    }
    (problem, vars)
}

fn guarded<T>(f: impl FnOnce() -> Result<T, minilp::Error>) -> Result<T, LpError> {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Err(_) => Err(LpError::NumericalFailure("solver panicked".into())),
        Ok(Ok(x)) => Ok(x),
        Ok(Err(minilp::Error::Infeasible)) => Err(LpError::Infeasible),
        Ok(Err(minilp::Error::Unbounded)) => Err(LpError::Unbounded),
    }
}

fn extract(sol: &Solution, vars: &[Variable]) -> (Vec<f64>, f64) {
    (vars.iter().map(|&v| *sol.var_value(v)).collect(), sol.objective())
}

fn solve_float(model: &LpModel) -> Result<(Vec<f64>, f64), LpError> {
    let (problem, vars) = float_problem(model);
    let sol = guarded(|| problem.solve())?;
    Ok(extract(&sol, &vars))
}

fn checked(model: &LpModel, values: Vec<f64>, objective: f64, used: Solver, tolerance: f64) -> Result<LpSolution, LpError> {
    let max_residual = residuals(model, &values);
    if !(max_residual <= tolerance) {
        return Err(LpError::NumericalFailure(format!(
            "residual {max_residual:e} above tolerance {tolerance:e}"
        )));
    }
    Ok(LpSolution {
        status: SolveStatus::Optimal,
        solver: used,
        objective,
        values,
        max_residual,
    })
}

/// Solves `base` at every `alpha` of an increasing grid. The float backend solves once
/// and re-optimises after tightening the alpha row, instead of starting over per value.
pub fn solve_alpha_sweep(
    base: &LpModel,
    alphas: &[f64],
    solver: Solver,
    tolerance: f64,
) -> Vec<(LpModel, Result<LpSolution, LpError>)> {
    let exact = match solver {
        Solver::Exact => true,
        Solver::Float => false,
        Solver::Auto => base.num_vars() <= AUTO_EXACT_LIMIT,
    };
    if exact {
        return alphas
            .iter()
            .map(|&a| {
                let m = base.with_alpha(a);
                let r = solve_lp(&m, solver, tolerance);
                (m, r)
            })
            .collect();
    }
    let start = base.with_alpha(alphas.first().copied().unwrap_or(0.0));
    let (problem, vars) = float_problem(&start);
    let alpha_terms: Vec<(Variable, f64)> = base
        .rows
        .iter()
        .filter(|r| r.kind == RowKind::Alpha)
        .flat_map(|r| r.terms.iter().map(|&(v, c)| (vars[v], c as f64)))
        .collect();
    let mut current = guarded(|| problem.solve());
    let mut out = Vec::with_capacity(alphas.len());
    for (i, &a) in alphas.iter().enumerate() {
        let m = base.with_alpha(a);
        if i > 0 {
            current = match current {
                Ok(sol) => guarded(|| sol.add_constraint(alpha_terms.as_slice(), ComparisonOp::Ge, a)),
                Err(e) => Err(e),
            };
        }
        let r = match &current {
            Ok(sol) => {
                let (values, obj) = extract(sol, &vars);
                checked(&m, values, obj, Solver::Float, tolerance)
            }
            Err(LpError::Infeasible) => Err(LpError::Infeasible),
            Err(LpError::Unbounded) => Err(LpError::Unbounded),
            Err(e) => Err(LpError::NumericalFailure(e.to_string())),
        };
        out.push((m, r));
    }
    out
}

/// Solves the model; optimal solutions have residuals within `tolerance`.
pub fn solve_lp(model: &LpModel, solver: Solver, tolerance: f64) -> Result<LpSolution, LpError> {
    let use_exact = match solver {
        Solver::Exact => true,
        Solver::Float => false,
        Solver::Auto => model.num_vars() <= AUTO_EXACT_LIMIT,
    };
    let (values, objective, used) = if use_exact {
        let (x, obj) = solve_exact(model)?;
        let values = x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
        (values, obj.to_f64().unwrap_or(f64::NAN), Solver::Exact)
    } else {
        let (values, obj) = solve_float(model)?;
        (values, obj, Solver::Float)
    };
    checked(model, values, objective, used, tolerance)
}
