//! The convex functional whose minimizers are the adapted weight vectors.
//!
//! ```text
//! Φ(w) = Σ_i ( −λ_i·w_i − ∫_{Vor_i} (‖x − s_i‖ − w_i) μ(dx) )
//! ∂Φ/∂w_i = −λ_i + μ(Vor_i)
//! ```

use crate::geometry::pairwise_sum;
use crate::laguerre::{assign_cells, CellAssignment, WeightVector};
use crate::measure::{DiscreteMeasure, GridDensity};
use crate::Result;

/// Value and gradient of Φ at one weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEvaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Evaluates Φ and ∇Φ from a single cell assignment.
pub fn evaluate(
    w: &WeightVector,
    density: &GridDensity,
    nu: &DiscreteMeasure,
) -> Result<ObjectiveEvaluation> {
    let assignment = assign_cells(density, nu, w)?;
    Ok(evaluate_from_assignment(w, nu, &assignment))
}

/// Φ and ∇Φ for an assignment already computed at `w`.
pub fn evaluate_from_assignment(
    w: &WeightVector,
    nu: &DiscreteMeasure,
    assignment: &CellAssignment,
) -> ObjectiveEvaluation {
    let lambda = nu.masses();
    let terms: Vec<f64> = (0..nu.len())
        .map(|i| -lambda[i] * w[i] - assignment.cost_integrals[i] + w[i] * assignment.masses[i])
        .collect();
    let gradient = (0..nu.len())
        .map(|i| assignment.masses[i] - lambda[i])
        .collect();
    ObjectiveEvaluation {
        value: pairwise_sum(&terms),
        gradient,
    }
}

/// `Σ_i |∂Φ/∂w_i|`, twice the mass sent to the wrong sites.
pub fn grad_l1_norm(eval: &ObjectiveEvaluation) -> f64 {
    eval.gradient.iter().map(|g| g.abs()).sum()
}

/// Φ bound to a fixed pair of measures, usable as an optimizer objective.
#[derive(Debug, Clone, Copy)]
pub struct Phi<'a> {
    pub density: &'a GridDensity,
    pub nu: &'a DiscreteMeasure,
}

impl<'a> Phi<'a> {
    pub fn new(density: &'a GridDensity, nu: &'a DiscreteMeasure) -> Self {
        Phi { density, nu }
    }

    /// Evaluates at `w`, which must have one entry per site.
    pub fn eval(&self, w: &[f64]) -> ObjectiveEvaluation {
        let w = WeightVector::from(w.to_vec());
        evaluate(&w, self.density, self.nu).expect("weight dimension fixed by the optimizer")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> DiscreteMeasure {
        let sites = (0..n).map(|_| Point::new(rng.random(), rng.random())).collect();
        let masses = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
        DiscreteMeasure::from_unnormalized(sites, masses).unwrap()
    }

    #[test]
    fn single_site_value_is_constant() {
        let d = GridDensity::uniform(8, 8).unwrap();
        let nu = DiscreteMeasure::new(vec![Point::new(0.3, 0.6)], vec![1.0]).unwrap();
        let base = assign_cells(&d, &nu, &WeightVector::zeros(1)).unwrap();
        for t in [-5.0, 0.0, 0.25, 13.0] {
            let e = evaluate(&WeightVector::new(vec![t]).unwrap(), &d, &nu).unwrap();
            assert!((e.value + base.cost_integrals[0]).abs() < 1e-14);
            assert_eq!(e.gradient, vec![0.0]);
        }
    }

    #[test]
    fn l1_norm_arithmetic() {
        let e = |g: Vec<f64>| ObjectiveEvaluation { value: 0.0, gradient: g };
        assert_eq!(grad_l1_norm(&e(vec![0.0, 0.0, 0.0])), 0.0);
        assert_eq!(grad_l1_norm(&e(vec![-0.25, 0.25])), 0.5);
    }

    #[test]
    fn gradient_zero_sum_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = GridDensity::uniform(16, 16).unwrap();
        for _ in 0..20 {
            let n = rng.random_range(2..10);
            let nu = random_instance(&mut rng, n);
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
            let e = evaluate(&WeightVector::new(w).unwrap(), &d, &nu).unwrap();
            assert!(e.gradient.iter().sum::<f64>().abs() <= 1e-10);
            for (g, l) in e.gradient.iter().zip(nu.masses()) {
                assert!(*g >= -l - 1e-15 && *g <= 1.0 - l + 1e-15);
            }
        }
    }

    #[test]
    fn shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = GridDensity::uniform(16, 16).unwrap();
        let nu = random_instance(&mut rng, 5);
        let w: Vec<f64> = (0..5).map(|_| rng.random_range(-0.2..0.2)).collect();
        let e0 = evaluate(&WeightVector::new(w.clone()).unwrap(), &d, &nu).unwrap();
        for r in [-3.0, 0.7] {
            let shifted: Vec<f64> = w.iter().map(|v| v + r).collect();
            let e1 = evaluate(&WeightVector::new(shifted).unwrap(), &d, &nu).unwrap();
            assert!((e1.value - e0.value).abs() <= 1e-10 * e0.value.abs());
            assert_eq!(e1.gradient, e0.gradient);
        }
    }

    #[test]
    fn sampled_convexity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = GridDensity::uniform(16, 16).unwrap();
        for _ in 0..10 {
            let n = rng.random_range(2..8);
            let nu = random_instance(&mut rng, n);
            let phi = Phi::new(&d, &nu);
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
            let (fw, fv) = (phi.eval(&w).value, phi.eval(&v).value);
            for a in [0.25, 0.5, 0.75] {
                let mix: Vec<f64> = w.iter().zip(&v).map(|(x, y)| a * x + (1.0 - a) * y).collect();
                assert!(phi.eval(&mix).value <= a * fw + (1.0 - a) * fv + 1e-9);
            }
        }
    }
}
