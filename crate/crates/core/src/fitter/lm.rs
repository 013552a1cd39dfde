//! Levenberg-Marquardt for small dense curve-fitting problems.
//!
//! Each iteration solves the damped normal equations
//!
//! ```text
//! (JᵀJ + λ·diag(JᵀJ)) δ = Jᵀ(y - f(p))
//! ```
//!
//! and accepts `p + δ` only if it is feasible and lowers the sum of squared
//! residuals. Rejected steps raise `λ`, accepted ones lower it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// A least-squares problem `min Σ (y_i - f_i(p))²`.
pub trait LeastSquaresProblem {
    fn num_params(&self) -> usize;

    fn targets(&self) -> &[f64];

    /// Writes `f_i(p)` into `out`. Returns `false` when `p` is infeasible.
    fn predict(&self, params: &[f64], out: &mut [f64]) -> bool;

    /// Writes the row-major `m × n` Jacobian `∂f_i/∂p_j` into `out`.
    fn jacobian(&self, params: &[f64], out: &mut [f64]) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    Tolerance,
    MaxIterations,
    RejectedSingular,
    ClosedForm,
    Epochs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub max_iterations: usize,
    pub cost_tolerance: f64,
    pub step_tolerance: f64,
    pub initial_damping: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            cost_tolerance: 1e-10,
            step_tolerance: 1e-12,
            initial_damping: 1e-3,
            damping_increase: 10.0,
            damping_decrease: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub reason: Convergence,
    /// Cost after the start and after every accepted step.
    pub cost_history: Vec<f64>,
}

const MAX_DAMPING: f64 = 1e20;
const MIN_DAMPING: f64 = 1e-20;

fn ssr(targets: &[f64], pred: &[f64]) -> f64 {
    targets
        .iter()
        .zip(pred)
        .map(|(y, f)| (y - f) * (y - f))
        .sum()
}

pub fn minimize<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    start: &[f64],
    settings: &LmSettings,
) -> LmOutcome {
    let n = problem.num_params();
    let y = problem.targets();
    let m = y.len();
    let mut p = start.to_vec();
    let mut pred = vec![0.0; m];
    let mut jac = vec![0.0; m * n];

    if !problem.predict(&p, &mut pred) || !problem.jacobian(&p, &mut jac) {
        return LmOutcome {
            params: p,
            initial_cost: f64::INFINITY,
            final_cost: f64::INFINITY,
            iterations: 0,
            reason: Convergence::RejectedSingular,
            cost_history: vec![],
        };
    }
    let mut cost = ssr(y, &pred);
    if !cost.is_finite() {
        return LmOutcome {
            params: p,
            initial_cost: cost,
            final_cost: cost,
            iterations: 0,
            reason: Convergence::RejectedSingular,
            cost_history: vec![],
        };
    }
    let initial_cost = cost;
    let mut history = vec![cost];
    let mut lambda = settings.initial_damping;
    let (mut jtj, mut jtr) = normal_equations(&jac, y, &pred, n);
    let mut trial = vec![0.0; n];
    let mut trial_pred = vec![0.0; m];
    let mut reason = Convergence::MaxIterations;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        if cost == 0.0 {
            reason = Convergence::Tolerance;
            break;
        }
        iterations += 1;
        let max_diag = (0..n).map(|i| jtj[(i, i)]).fold(0.0, f64::max);
        let floor = (max_diag * 1e-12).max(1e-300);
        let mut a = jtj.clone();
        for i in 0..n {
            a[(i, i)] += lambda * jtj[(i, i)].max(floor);
        }
        let Some(chol) = a.cholesky() else {
            lambda *= settings.damping_increase;
            if lambda > MAX_DAMPING {
                reason = Convergence::Tolerance;
                break;
            }
            continue;
        };
        let step = chol.solve(&jtr);
        let step_norm = step.norm();
        let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (t, (pi, si)) in trial.iter_mut().zip(p.iter().zip(step.iter())) {
            *t = pi + si;
        }
        let feasible = step.iter().all(|s| s.is_finite()) && problem.predict(&trial, &mut trial_pred);
        let trial_cost = if feasible {
            ssr(y, &trial_pred)
        } else {
            f64::INFINITY
        };

        if trial_cost.is_finite() && trial_cost < cost {
            let rel = (cost - trial_cost) / cost;
            std::mem::swap(&mut p, &mut trial);
            std::mem::swap(&mut pred, &mut trial_pred);
            cost = trial_cost;
            history.push(cost);
            if !problem.jacobian(&p, &mut jac) {
                reason = Convergence::Tolerance;
                break;
            }
            (jtj, jtr) = normal_equations(&jac, y, &pred, n);
            lambda = (lambda / settings.damping_decrease).max(MIN_DAMPING);
            if rel < settings.cost_tolerance
                || step_norm <= settings.step_tolerance * (p_norm + settings.step_tolerance)
            {
                reason = Convergence::Tolerance;
                break;
            }
        } else {
            if step_norm <= settings.step_tolerance * (p_norm + settings.step_tolerance) {
                reason = Convergence::Tolerance;
                break;
            }
            lambda *= settings.damping_increase;
            if lambda > MAX_DAMPING {
                reason = Convergence::Tolerance;
                break;
            }
        }
    }

    LmOutcome {
        params: p,
        initial_cost,
        final_cost: cost,
        iterations,
        reason,
        cost_history: history,
    }
}

fn normal_equations(
    jac: &[f64],
    y: &[f64],
    pred: &[f64],
    n: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    let mut jtj = vec![0.0; n * n];
    let mut jtr = vec![0.0; n];
    for (row, (yi, fi)) in jac.chunks_exact(n).zip(y.iter().zip(pred)) {
        let r = yi - fi;
        for i in 0..n {
            let ji = row[i];
            if ji == 0.0 {
                continue;
            }
            jtr[i] += ji * r;
            for j in i..n {
                jtj[i * n + j] += ji * row[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            jtj[i * n + j] = jtj[j * n + i];
        }
    }
    (DMatrix::from_row_slice(n, n, &jtj), DVector::from_vec(jtr))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// y = a·exp(b·t)
    struct ExpDecay {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquaresProblem for ExpDecay {
        fn num_params(&self) -> usize {
            2
        }
        fn targets(&self) -> &[f64] {
            &self.y
        }
        fn predict(&self, p: &[f64], out: &mut [f64]) -> bool {
            for (o, t) in out.iter_mut().zip(&self.t) {
                *o = p[0] * (p[1] * t).exp();
            }
            true
        }
        fn jacobian(&self, p: &[f64], out: &mut [f64]) -> bool {
            for (row, t) in out.chunks_exact_mut(2).zip(&self.t) {
                let e = (p[1] * t).exp();
                row[0] = e;
                row[1] = p[0] * t * e;
            }
            true
        }
    }

    fn decay() -> ExpDecay {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let y = t.iter().map(|t| 2.5 * (-0.8 * t).exp()).collect();
        ExpDecay { t, y }
    }

    #[test]
    fn recovers_exponential_decay() {
        let out = minimize(&decay(), &[1.0, 0.0], &LmSettings::default());
        assert!(out.final_cost < 1e-20, "cost {}", out.final_cost);
        assert!((out.params[0] - 2.5).abs() < 1e-8);
        assert!((out.params[1] + 0.8).abs() < 1e-8);
        assert_eq!(out.reason, Convergence::Tolerance);
    }

    #[test]
    fn accepted_costs_strictly_decrease() {
        let out = minimize(&decay(), &[0.1, 1.0], &LmSettings::default());
        for w in out.cost_history.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(out.final_cost <= out.initial_cost);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let settings = LmSettings {
            max_iterations: 1,
            ..LmSettings::default()
        };
        let out = minimize(&decay(), &[0.1, 1.0], &settings);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.reason, Convergence::MaxIterations);
    }

    struct Infeasible;
    impl LeastSquaresProblem for Infeasible {
        fn num_params(&self) -> usize {
            1
        }
        fn targets(&self) -> &[f64] {
            &[1.0]
        }
        fn predict(&self, _: &[f64], _: &mut [f64]) -> bool {
            false
        }
        fn jacobian(&self, _: &[f64], _: &mut [f64]) -> bool {
            false
        }
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let out = minimize(&Infeasible, &[0.0], &LmSettings::default());
        assert_eq!(out.reason, Convergence::RejectedSingular);
        assert!(out.final_cost.is_infinite());
    }
}
