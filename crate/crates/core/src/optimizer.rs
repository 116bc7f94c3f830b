//! Limited-memory BFGS with a bracketing weak-Wolfe line search.
//!
//! The objective is any `FnMut(&[f64]) -> ObjectiveEvaluation`; for the
//! transport problem it is [`crate::objective::Phi`], which is convex and
//! piecewise linear on a fixed grid. Iteration stops once the ℓ1 norm of the
//! gradient drops to `eps`.

use std::collections::VecDeque;
use std::io::Write;

use serde::Serialize;

use crate::fmt::sig17;
use crate::laguerre::WeightVector;
use crate::objective::{grad_l1_norm, ObjectiveEvaluation};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    /// Stop once `‖∇f‖₁ ≤ eps`.
    pub eps: f64,
    /// Number of curvature pairs kept.
    pub memory: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_iters: usize,
    /// Trial points per line search.
    pub max_linesearch: usize,
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            eps: 1e-3,
            memory: 10,
            c1: 1e-4,
            c2: 0.9,
            max_iters: 1000,
            max_linesearch: 40,
            initial_step: 1.0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_eps(eps: f64) -> Self {
        OptimizerConfig {
            eps,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidConfig(format!("eps must be positive, got {}", self.eps)));
        }
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "Wolfe constants must satisfy 0 < c1 < c2 < 1, got c1={} c2={}",
                self.c1, self.c2
            )));
        }
        if self.memory == 0 || self.max_iters == 0 || self.max_linesearch == 0 {
            return Err(Error::InvalidConfig(
                "memory, max_iters and max_linesearch must be positive".into(),
            ));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::InvalidConfig("initial_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OptimStatus {
    Converged,
    MaxIters,
    LineSearchFailed,
}

/// One accepted step, with everything needed to re-check the Wolfe
/// conditions after the fact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub iter: usize,
    /// Objective before and after the step.
    pub phi_before: f64,
    pub phi: f64,
    pub grad_l1: f64,
    pub step: f64,
    /// Directional derivative `∇f(w)·d` at the start of the step.
    pub slope_before: f64,
    /// Directional derivative `∇f(w + t·d)·d` at the accepted point.
    pub slope_after: f64,
    /// Objective evaluations spent in this iteration's line search.
    pub n_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub w: WeightVector,
    pub iterations: usize,
    pub initial_grad_l1: f64,
    pub final_grad_l1: f64,
    /// Objective at the start point followed by every accepted iterate.
    pub phi_trace: Vec<f64>,
    pub steps: Vec<StepRecord>,
    pub status: OptimStatus,
    pub n_evals: usize,
}

/// Result of a successful line search.
#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    pub t: f64,
    pub eval: ObjectiveEvaluation,
    pub n_evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineSearchFailed {
    pub n_evals: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `−H·grad` for the inverse-Hessian approximation implied by `history`
/// (oldest pair first). Pairs with non-positive curvature `Δw·Δg` are
/// skipped. The initial matrix is `γI` with `γ = Δw·Δg / Δg·Δg` of the newest
/// usable pair, or the identity without history.
pub fn two_loop_direction(history: &[(Vec<f64>, Vec<f64>)], grad: &[f64]) -> Vec<f64> {
    let usable: Vec<(&[f64], &[f64], f64)> = history
        .iter()
        .filter_map(|(s, y)| {
            let sy = dot(s, y);
            (sy > 0.0 && sy.is_finite()).then(|| (s.as_slice(), y.as_slice(), 1.0 / sy))
        })
        .collect();

    let mut q = grad.to_vec();
    let mut alphas = vec![0.0; usable.len()];
    for (k, (s, y, rho)) in usable.iter().enumerate().rev() {
        let a = rho * dot(s, &q);
        alphas[k] = a;
        q.iter_mut().zip(*y).for_each(|(qi, yi)| *qi -= a * yi);
    }
    let gamma = usable.last().map_or(1.0, |(_, y, rho)| 1.0 / (rho * dot(y, y)));
    q.iter_mut().for_each(|qi| *qi *= gamma);
    for (k, (s, y, rho)) in usable.iter().enumerate() {
        let b = rho * dot(y, &q);
        let a = alphas[k];
        q.iter_mut().zip(*s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

/// Finds `t` satisfying the weak Wolfe conditions
///
/// ```text
/// f(w + t·d) ≤ f(w) + c1·t·∇f(w)·d
/// ∇f(w + t·d)·d ≥ c2·∇f(w)·d
/// ```
///
/// starting from `cfg.initial_step`, doubling until the sufficient-decrease
/// test fails and bisecting the resulting bracket afterwards.
pub fn wolfe_line_search<F>(
    objective: &mut F,
    w: &[f64],
    at_w: &ObjectiveEvaluation,
    direction: &[f64],
    cfg: &OptimizerConfig,
) -> std::result::Result<LineSearchOutcome, LineSearchFailed>
where
    F: FnMut(&[f64]) -> ObjectiveEvaluation,
{
    let slope0 = dot(&at_w.gradient, direction);
    if !(slope0 < 0.0) {
        return Err(LineSearchFailed { n_evals: 0 });
    }
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut t = cfg.initial_step;
    let mut trial = vec![0.0; w.len()];
    for k in 0..cfg.max_linesearch {
        trial
            .iter_mut()
            .zip(w.iter().zip(direction))
            .for_each(|(x, (wi, di))| *x = wi + t * di);
        let eval = objective(&trial);
        if !(eval.value <= at_w.value + cfg.c1 * t * slope0) {
            hi = t;
        } else if dot(&eval.gradient, direction) < cfg.c2 * slope0 {
            lo = t;
        } else {
            return Ok(LineSearchOutcome {
                t,
                eval,
                n_evals: k + 1,
            });
        }
        t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * t };
    }
    Err(LineSearchFailed {
        n_evals: cfg.max_linesearch,
    })
}

/// Minimizes `objective` from `w0`.
///
/// If a line search along the quasi-Newton direction fails, the history is
/// dropped and one steepest-descent search is tried before giving up with
/// [`OptimStatus::LineSearchFailed`].
pub fn minimize<F>(mut objective: F, w0: &WeightVector, cfg: &OptimizerConfig) -> OptimResult
where
    F: FnMut(&[f64]) -> ObjectiveEvaluation,
{
    let mut w = w0.as_slice().to_vec();
    let mut current = objective(&w);
    let mut n_evals = 1;
    let initial_grad_l1 = grad_l1_norm(&current);
    let mut phi_trace = vec![current.value];
    let mut steps = Vec::new();
    let mut history: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::with_capacity(cfg.memory);
    let mut iterations = 0;

    let status = loop {
        let grad_l1 = grad_l1_norm(&current);
        if grad_l1 <= cfg.eps {
            break OptimStatus::Converged;
        }
        if iterations >= cfg.max_iters {
            break OptimStatus::MaxIters;
        }

        let hist: Vec<_> = history.iter().cloned().collect();
        let mut direction = two_loop_direction(&hist, &current.gradient);
        if !(dot(&direction, &current.gradient) < 0.0) {
            history.clear();
            direction = current.gradient.iter().map(|g| -g).collect();
        }
        let mut spent = 0;
        let outcome = match wolfe_line_search(&mut objective, &w, &current, &direction, cfg) {
            Ok(o) => Ok(o),
            Err(LineSearchFailed { n_evals: k }) if !history.is_empty() => {
                spent += k;
                history.clear();
                direction = current.gradient.iter().map(|g| -g).collect();
                wolfe_line_search(&mut objective, &w, &current, &direction, cfg)
            }
            Err(e) => Err(e),
        };
        let outcome = match outcome {
            Ok(o) => o,
            Err(LineSearchFailed { n_evals: k }) => {
                n_evals += spent + k;
                break OptimStatus::LineSearchFailed;
            }
        };
        spent += outcome.n_evals;
        n_evals += spent;

        let s: Vec<f64> = direction.iter().map(|d| outcome.t * d).collect();
        let y: Vec<f64> = outcome
            .eval
            .gradient
            .iter()
            .zip(&current.gradient)
            .map(|(a, b)| a - b)
            .collect();
        if dot(&s, &y) > 0.0 {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s.clone(), y));
        }
        w.iter_mut().zip(&s).for_each(|(wi, si)| *wi += si);

        iterations += 1;
        steps.push(StepRecord {
            iter: iterations,
            phi_before: current.value,
            phi: outcome.eval.value,
            grad_l1: grad_l1_norm(&outcome.eval),
            step: outcome.t,
            slope_before: dot(&current.gradient, &direction),
            slope_after: dot(&outcome.eval.gradient, &direction),
            n_evals: spent,
        });
        phi_trace.push(outcome.eval.value);
        current = outcome.eval;
    };

    OptimResult {
        w: WeightVector::from(w),
        iterations,
        initial_grad_l1,
        final_grad_l1: grad_l1_norm(&current),
        phi_trace,
        steps,
        status,
        n_evals,
    }
}

impl OptimResult {
    /// True when every accepted step satisfies both Wolfe inequalities for
    /// the given constants.
    pub fn steps_satisfy_wolfe(&self, c1: f64, c2: f64) -> bool {
        self.steps.iter().all(|s| {
            s.phi <= s.phi_before + c1 * s.step * s.slope_before
                && s.slope_after >= c2 * s.slope_before
        })
    }
}

/// Writes `level,iter,phi,grad_l1,step,n_evals` rows for each run; row 0 of a
/// run is its starting point.
pub fn write_trace_csv<W: Write>(out: &mut W, runs: &[(usize, &OptimResult)]) -> std::io::Result<()> {
    writeln!(out, "level,iter,phi,grad_l1,step,n_evals")?;
    for (level, run) in runs {
        writeln!(
            out,
            "{level},0,{},{},{},1",
            sig17(run.phi_trace[0]),
            sig17(run.initial_grad_l1),
            sig17(0.0)
        )?;
        for s in &run.steps {
            writeln!(
                out,
                "{level},{},{},{},{},{}",
                s.iter,
                sig17(s.phi),
                sig17(s.grad_l1),
                sig17(s.step),
                s.n_evals
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(w: &[f64]) -> ObjectiveEvaluation {
        // Σ (w_j − (j+1))²
        let value = w.iter().enumerate().map(|(j, x)| (x - (j + 1) as f64).powi(2)).sum();
        let gradient = w.iter().enumerate().map(|(j, x)| 2.0 * (x - (j + 1) as f64)).collect();
        ObjectiveEvaluation { value, gradient }
    }

    #[test]
    fn strongly_convex_quadratic() {
        let cfg = OptimizerConfig::with_eps(1e-8);
        let r = minimize(quadratic, &WeightVector::zeros(6), &cfg);
        assert_eq!(r.status, OptimStatus::Converged);
        for (j, x) in r.w.iter().enumerate() {
            assert!((x - (j + 1) as f64).abs() < 1e-6);
        }
        assert!(r.final_grad_l1 <= 1e-8);
        assert!(r.phi_trace.windows(2).all(|p| p[1] <= p[0]));
        assert!(r.steps_satisfy_wolfe(cfg.c1, cfg.c2));
    }

    #[test]
    fn ill_conditioned_quadratic() {
        let scales = [1.0, 10.0, 100.0, 1000.0];
        let f = |w: &[f64]| {
            let value = w.iter().zip(&scales).map(|(x, a)| 0.5 * a * (x - 1.0).powi(2)).sum();
            let gradient = w.iter().zip(&scales).map(|(x, a)| a * (x - 1.0)).collect();
            ObjectiveEvaluation { value, gradient }
        };
        let r = minimize(f, &WeightVector::zeros(4), &OptimizerConfig::with_eps(1e-9));
        assert_eq!(r.status, OptimStatus::Converged);
        assert!(r.iterations < 100);
    }

    #[test]
    fn zero_gradient_returns_start() {
        let flat = |_: &[f64]| ObjectiveEvaluation {
            value: 1.0,
            gradient: vec![0.0],
        };
        let w0 = WeightVector::new(vec![3.5]).unwrap();
        let r = minimize(flat, &w0, &OptimizerConfig::default());
        assert_eq!(r.status, OptimStatus::Converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.w, w0);
    }

    #[test]
    fn empty_history_is_steepest_descent() {
        let g = [0.3, -1.2, 2.0];
        assert_eq!(two_loop_direction(&[], &g), vec![-0.3, 1.2, -2.0]);
    }

    #[test]
    fn one_pair_on_1d_quadratic_gives_newton_step() {
        // f = ½·a·w², s = 0.7, y = a·s
        let a = 3.7;
        let s = 0.7;
        let hist = vec![(vec![s], vec![a * s])];
        let g = 2.3;
        let d = two_loop_direction(&hist, &[g]);
        assert!((d[0] + g / a).abs() < 1e-15);
    }

    #[test]
    fn negative_curvature_pairs_are_skipped() {
        let hist = vec![(vec![1.0, 0.0], vec![-1.0, 0.0])];
        assert_eq!(two_loop_direction(&hist, &[1.0, 2.0]), vec![-1.0, -2.0]);
    }

    #[test]
    fn line_search_accepts_unit_step_on_parabola() {
        let mut f = |w: &[f64]| ObjectiveEvaluation {
            value: (w[0] - 1.0).powi(2),
            gradient: vec![2.0 * (w[0] - 1.0)],
        };
        let at = f(&[0.0]);
        let cfg = OptimizerConfig::default();
        let out = wolfe_line_search(&mut f, &[0.0], &at, &[1.0], &cfg).unwrap();
        assert_eq!(out.t, 1.0);
        assert_eq!(out.n_evals, 1);
    }

    #[test]
    fn line_search_fails_without_curvature() {
        let mut f = |w: &[f64]| ObjectiveEvaluation {
            value: -w[0],
            gradient: vec![-1.0],
        };
        let at = f(&[0.0]);
        let cfg = OptimizerConfig::default();
        let err = wolfe_line_search(&mut f, &[0.0], &at, &[1.0], &cfg).unwrap_err();
        assert_eq!(err.n_evals, cfg.max_linesearch);
    }

    #[test]
    fn line_search_rejects_ascent_direction() {
        let mut f = |w: &[f64]| ObjectiveEvaluation {
            value: w[0] * w[0],
            gradient: vec![2.0 * w[0]],
        };
        let at = f(&[1.0]);
        assert!(wolfe_line_search(&mut f, &[1.0], &at, &[1.0], &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            c1: 0.9,
            c2: 0.1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(OptimizerConfig::with_eps(0.0).validate().is_err());
    }

    #[test]
    fn trace_csv_layout() {
        let r = minimize(quadratic, &WeightVector::zeros(2), &OptimizerConfig::with_eps(1e-8));
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &[(0, &r)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "level,iter,phi,grad_l1,step,n_evals");
        assert_eq!(lines.len(), 2 + r.iterations);
        assert!(lines[1].starts_with("0,0,"));
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn two_loop_is_a_descent_direction(
            pairs in prop::collection::vec(
                (prop::collection::vec(-1.0f64..1.0, 4), prop::collection::vec(-1.0f64..1.0, 4)), 0..6),
            g in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            prop_assume!(g.iter().any(|x| x.abs() > 1e-6));
            let d = two_loop_direction(&pairs, &g);
            prop_assert!(dot(&d, &g) < 0.0);
        }
    }
}
