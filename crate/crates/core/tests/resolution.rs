use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semidot::{assign_cells, DiscreteMeasure, GridDensity, Point, WeightVector};

/// Mass of squares whose center is within `reach` of a cell boundary, judged
/// by the gap between the best and second-best weighted distance (the gap
/// changes by at most 2 per unit of movement).
fn boundary_band_mass(d: &GridDensity, nu: &DiscreteMeasure, w: &[f64], reach: f64) -> f64 {
    (0..d.len())
        .filter(|&q| {
            let c = d.center(q);
            let mut scores: Vec<f64> = nu.sites().iter().zip(w).map(|(s, wi)| c.dist(*s) - wi).collect();
            scores.sort_by(f64::total_cmp);
            scores[1] - scores[0] <= 2.0 * reach
        })
        .map(|q| d.cell_mass()[q])
        .sum()
}

#[test]
fn doubling_resolution_moves_little_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..4 {
        let n = rng.random_range(3..=10);
        let sites: Vec<Point> = (0..n).map(|_| Point::new(rng.random(), rng.random())).collect();
        let nu = DiscreteMeasure::from_unnormalized(sites, vec![1.0; n]).unwrap();
        let w = WeightVector::new((0..n).map(|_| rng.random_range(-0.1..0.1)).collect()).unwrap();
        let mut prev_change = f64::INFINITY;
        for side in [16, 32, 64, 128] {
            let coarse = GridDensity::uniform(side, side).unwrap();
            let fine = GridDensity::uniform(2 * side, 2 * side).unwrap();
            let a = assign_cells(&coarse, &nu, &w).unwrap();
            let b = assign_cells(&fine, &nu, &w).unwrap();
            let band = boundary_band_mass(&coarse, &nu, &w, 2f64.sqrt() * coarse.cell_side());
            let change: f64 = (0..n).map(|i| (a.masses[i] - b.masses[i]).abs()).fold(0.0, f64::max);
            assert!(change <= band + 1e-12, "side {side}: change {change} > band {band}");
            // refinement should not make things worse by more than one coarse square
            assert!(change <= prev_change + 1.0 / (side * side) as f64, "side {side}");
            prev_change = change;
        }
    }
}
