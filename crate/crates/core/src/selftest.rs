//! Small built-in consistency suite run by `semidot selftest`.
//!
//! Every check uses fixed seeds and desk-sized grids so the whole suite runs
//! in well under a second on a release build.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::laguerre::{assign_cells, WeightVector};
use crate::measure::{DiscreteMeasure, GridDensity};
use crate::objective::{evaluate, ObjectiveEvaluation};
use crate::optimizer::{minimize, OptimStatus, OptimizerConfig};
use crate::oracle::{density_to_discrete, exact_ot_cost, FlowProblem};
use crate::transport::transport_cost;
use crate::Result;

/// Deliberate corruption of the objective, used to check that the suite
/// notices broken gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign of this gradient component (taken modulo n).
    NegateGradient(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn objective<'a>(
    density: &'a GridDensity,
    nu: &'a DiscreteMeasure,
    fault: Option<Fault>,
) -> impl Fn(&[f64]) -> ObjectiveEvaluation + 'a {
    move |w: &[f64]| {
        let mut e = evaluate(&WeightVector::from(w.to_vec()), density, nu)
            .expect("weight dimension matches the measure");
        if let Some(Fault::NegateGradient(i)) = fault {
            let i = i % e.gradient.len();
            e.gradient[i] = -e.gradient[i];
        }
        e
    }
}

/// Random target measure with `n` distinct sites in the unit square and
/// masses bounded away from zero.
pub fn random_measure(rng: &mut impl Rng, n: usize) -> DiscreteMeasure {
    loop {
        let sites: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let masses: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
        if let Ok(m) = DiscreteMeasure::from_unnormalized(sites, masses) {
            return m;
        }
    }
}

/// Largest deviation between ∇Φ and central differences with step `h`.
///
/// Each component is checked at a weight vector for which the labels at
/// `w ± h·e_i` equal those at `w`; weights are redrawn until that holds.
/// Φ is affine in `w` while the labels are fixed, so the difference
/// quotient is then exact up to rounding.
pub fn fd_gradient_error(
    f: &dyn Fn(&[f64]) -> ObjectiveEvaluation,
    density: &GridDensity,
    nu: &DiscreteMeasure,
    h: f64,
    rng: &mut impl Rng,
) -> Result<f64> {
    let n = nu.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for attempt in 0.. {
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(-0.1..0.1)).collect();
            let base = assign_cells(density, nu, &WeightVector::from(w.clone()))?;
            let mut wp = w.clone();
            wp[i] += h;
            let mut wm = w.clone();
            wm[i] -= h;
            let lp = assign_cells(density, nu, &WeightVector::from(wp.clone()))?;
            let lm = assign_cells(density, nu, &WeightVector::from(wm.clone()))?;
            if (lp.labels != base.labels || lm.labels != base.labels) && attempt < 1000 {
                continue;
            }
            let fd = (f(&wp).value - f(&wm).value) / (2.0 * h);
            worst = worst.max((fd - f(&w).gradient[i]).abs());
            break;
        }
    }
    Ok(worst)
}

fn check<F: FnOnce() -> Result<(bool, String)>>(name: &'static str, body: F) -> CheckOutcome {
    match body() {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Runs the suite; `fault` corrupts every objective evaluation.
pub fn run(fault: Option<Fault>) -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    out.push(check("gradient-fd", || {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let density = GridDensity::uniform(32, 32)?;
        let mut worst: f64 = 0.0;
        for n in [3, 7] {
            let nu = random_measure(&mut rng, n);
            let f = objective(&density, &nu, fault);
            worst = worst.max(fd_gradient_error(&f, &density, &nu, 1e-3, &mut rng)?);
        }
        Ok((worst <= 1e-6, format!("max |fd - grad| = {worst:.3e}")))
    }));

    out.push(check("shift-invariance", || {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let density = GridDensity::uniform(32, 32)?;
        let nu = random_measure(&mut rng, 6);
        let f = objective(&density, &nu, fault);
        let w: Vec<f64> = (0..6).map(|_| rng.random_range(-0.2..0.2)).collect();
        let base = f(&w);
        let labels = assign_cells(&density, &nu, &WeightVector::from(w.clone()))?.labels;
        let mut worst: f64 = 0.0;
        let mut same_labels = true;
        for r in [-3.0, 0.7, 100.0] {
            let shifted: Vec<f64> = w.iter().map(|x| x + r).collect();
            let e = f(&shifted);
            worst = worst.max((e.value - base.value).abs() / base.value.abs().max(1e-300));
            let l = assign_cells(&density, &nu, &WeightVector::from(shifted))?.labels;
            same_labels &= l == labels;
        }
        Ok((
            worst <= 1e-10 && same_labels,
            format!("max relative change = {worst:.3e}, labels identical = {same_labels}"),
        ))
    }));

    out.push(check("two-site-symmetry", || {
        let density = GridDensity::uniform(16, 16)?;
        let nu = DiscreteMeasure::new(
            vec![Point::new(0.3, 0.5), Point::new(0.7, 0.5)],
            vec![0.5, 0.5],
        )?;
        let f = objective(&density, &nu, fault);
        let res = minimize(f, &WeightVector::new(vec![0.05, -0.05])?, &OptimizerConfig::default());
        let a = assign_cells(&density, &nu, &res.w)?;
        let mass_gap = (a.masses[0] - a.masses[1]).abs();
        let cost_gap = (a.cost_integrals[0] - a.cost_integrals[1]).abs();
        let ok = res.status == OptimStatus::Converged && mass_gap <= 1e-12 && cost_gap <= 1e-12;
        Ok((
            ok,
            format!(
                "status = {:?}, mass gap = {mass_gap:.3e}, cost gap = {cost_gap:.3e}",
                res.status
            ),
        ))
    }));

    out.push(check("oracle-8x8", || {
        let density = GridDensity::uniform(8, 8)?;
        // masses are multiples of the square mass, so exact adaptation exists
        let nu = DiscreteMeasure::new(
            vec![
                Point::new(0.2, 0.3),
                Point::new(0.8, 0.25),
                Point::new(0.55, 0.8),
                Point::new(0.1, 0.9),
            ],
            vec![20.0 / 64.0, 16.0 / 64.0, 18.0 / 64.0, 10.0 / 64.0],
        )?;
        let cfg = OptimizerConfig::default();
        let f = objective(&density, &nu, fault);
        let res = minimize(f, &WeightVector::zeros(nu.len()), &cfg);
        let cost = transport_cost(&assign_cells(&density, &nu, &res.w)?);
        let exact = exact_ot_cost(&FlowProblem::new(density_to_discrete(&density), nu.clone()))?;
        let tol = 0.5 * 2f64.sqrt() * density.cell_side() + 2.0 * cfg.eps;
        let gap = (cost - exact).abs();
        Ok((
            res.status == OptimStatus::Converged && gap <= tol,
            format!("status = {:?}, |cost - exact| = {gap:.3e} (tol {tol:.3e})", res.status),
        ))
    }));

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes() {
        for c in run(None) {
            assert!(c.passed, "{}", c.line());
        }
    }

    #[test]
    fn negated_gradient_is_caught() {
        let r = run(Some(Fault::NegateGradient(0)));
        assert!(r.iter().any(|c| !c.passed));
        assert!(!r[0].passed, "{}", r[0].line());
    }
}
