//! Small linear-programming front end over `minilp`.
//!
//! Every query is phrased with L1 slack on the equality constraints so the
//! answer is a residual that callers compare against their own tolerance,
//! rather than a brittle exact feasible/infeasible verdict.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DVector;

/// Residual of the best nonnegative combination of `generators` matching
/// `target`. With `convex` the coefficients must also sum to one.
pub fn combination_residual(generators: &[DVector<f64>], target: &DVector<f64>, convex: bool) -> f64 {
    let dim = target.len();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let lambdas: Vec<_> = generators
        .iter()
        .map(|_| problem.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let slack_pos: Vec<_> = (0..dim)
        .map(|_| problem.add_var(1.0, (0.0, f64::INFINITY)))
        .collect();
    let slack_neg: Vec<_> = (0..dim)
        .map(|_| problem.add_var(1.0, (0.0, f64::INFINITY)))
        .collect();
    for r in 0..dim {
        let mut row: Vec<_> = generators
            .iter()
            .zip(&lambdas)
            .filter(|(g, _)| g[r] != 0.0)
            .map(|(g, &v)| (v, g[r]))
            .collect();
        row.push((slack_pos[r], 1.0));
        row.push((slack_neg[r], -1.0));
        problem.add_constraint(row.as_slice(), ComparisonOp::Eq, target[r]);
    }
    if convex {
        let row: Vec<_> = lambdas.iter().map(|&v| (v, 1.0)).collect();
        problem.add_constraint(row.as_slice(), ComparisonOp::Eq, 1.0);
    }
    match problem.solve() {
        Ok(solution) => solution.objective().max(0.0),
        // With convex=true and no generators the program is infeasible.
        Err(_) => f64::INFINITY,
    }
}

/// One feasibility query for a perfectly discriminating observable.
///
/// Looks for `m` covectors `l_j` with `0 <= l_j . v <= 1` on every extreme
/// state `v`, `sum_j l_j = unit` and `l_j . states[k] = delta_jk`. Returns the
/// effects when the slack residual is below `tol`.
pub fn discriminating_effects(
    extremes: &[DVector<f64>],
    unit: &DVector<f64>,
    states: &[DVector<f64>],
    tol: f64,
) -> Option<Vec<DVector<f64>>> {
    let n = unit.len();
    let m = states.len();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<_>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| problem.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
                .collect()
        })
        .collect();
    for effect in &vars {
        for v in extremes {
            let row: Vec<_> = effect.iter().zip(v.iter()).map(|(&x, &c)| (x, c)).collect();
            problem.add_constraint(row.as_slice(), ComparisonOp::Ge, 0.0);
            problem.add_constraint(row.as_slice(), ComparisonOp::Le, 1.0);
        }
    }
    for i in 0..n {
        let row: Vec<_> = vars.iter().map(|effect| (effect[i], 1.0)).collect();
        problem.add_constraint(row.as_slice(), ComparisonOp::Eq, unit[i]);
    }
    // Discrimination equalities carry slack so near-feasible points are
    // reported with their residual.
    let mut slack_total = 0usize;
    for (j, effect) in vars.iter().enumerate() {
        for (k, s) in states.iter().enumerate() {
            let sp = problem.add_var(1.0, (0.0, f64::INFINITY));
            let sn = problem.add_var(1.0, (0.0, f64::INFINITY));
            slack_total += 2;
            let mut row: Vec<_> = effect.iter().zip(s.iter()).map(|(&x, &c)| (x, c)).collect();
            row.push((sp, 1.0));
            row.push((sn, -1.0));
            problem.add_constraint(row.as_slice(), ComparisonOp::Eq, if j == k { 1.0 } else { 0.0 });
        }
    }
    debug_assert_eq!(slack_total, 2 * m * m);
    let solution = problem.solve().ok()?;
    if solution.objective() > tol {
        return None;
    }
    Some(
        vars.iter()
            .map(|effect| DVector::from_iterator(n, effect.iter().map(|&v| solution[v])))
            .collect(),
    )
}

/// Base-norm value `min sum |c_i|` over decompositions
/// `target = sum_i c_i generators[i]`.
pub fn base_norm(generators: &[DVector<f64>], target: &DVector<f64>) -> Option<f64> {
    let dim = target.len();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let pos: Vec<_> = generators
        .iter()
        .map(|_| problem.add_var(1.0, (0.0, f64::INFINITY)))
        .collect();
    let neg: Vec<_> = generators
        .iter()
        .map(|_| problem.add_var(1.0, (0.0, f64::INFINITY)))
        .collect();
    for r in 0..dim {
        let mut row = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            if g[r] != 0.0 {
                row.push((pos[i], g[r]));
                row.push((neg[i], -g[r]));
            }
        }
        problem.add_constraint(row.as_slice(), ComparisonOp::Eq, target[r]);
    }
    problem.solve().ok().map(|s| s.objective())
}
