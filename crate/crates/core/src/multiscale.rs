//! Coarse-to-fine solving over a Lloyd-clustered hierarchy of target measures.
//!
//! Each level `ν_{l+1}` is obtained from `ν_l` by weighted k-means (Lloyd's
//! algorithm) with `|S_l| / factor` clusters; the cluster map `τ_l` pushes
//! `ν_l` forward onto `ν_{l+1}`. The coarsest level is solved from zero
//! weights and every finer level starts from its clusters' weights.

use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::Point;
use crate::laguerre::WeightVector;
use crate::measure::{DiscreteMeasure, GridDensity};
use crate::objective::Phi;
use crate::optimizer::{minimize, OptimResult, OptimStatus, OptimizerConfig};
use crate::{Error, Result};

/// Round limit for one Lloyd clustering.
pub const MAX_LLOYD_ROUNDS: usize = 500;

/// One coarsening step: the coarse measure and the fine → coarse site map.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionLevel {
    pub measure: DiscreteMeasure,
    /// `tau[p]` is the coarse site that fine site `p` was clustered into.
    pub tau: Vec<usize>,
    /// Lloyd rounds performed.
    pub rounds: usize,
    /// `Σ_p λ_p ‖p − q^p‖²` after every round; this is what the centroid
    /// step minimizes.
    pub sq_distortion_trace: Vec<f64>,
    /// `Σ_p λ_p ‖p − q^p‖` at the final clustering (reported, not minimized).
    pub distortion: f64,
}

fn nearest_center(p: Point, centers: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = p.dist2(centers[0]);
    for (k, c) in centers.iter().enumerate().skip(1) {
        let d = p.dist2(*c);
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    best
}

/// Clusters `nu` into `clusters` weighted centroids using Lloyd's algorithm.
///
/// Initial centers are drawn without replacement from the sites using a
/// ChaCha8 stream seeded with `seed`. Rounds repeat until the centers stop
/// moving or [`MAX_LLOYD_ROUNDS`] is reached. A cluster left empty by an
/// assignment round takes over the point farthest from its own center
/// (lowest index on ties) among clusters with at least two members.
pub fn lloyd_cluster(nu: &DiscreteMeasure, clusters: usize, seed: u64) -> Result<DecompositionLevel> {
    let n = nu.len();
    if clusters == 0 || clusters > n {
        return Err(Error::InvalidConfig(format!(
            "cluster count must be in 1..={n}, got {clusters}"
        )));
    }
    let points = nu.sites();
    let lambda = nu.masses();
    if clusters == n {
        return Ok(DecompositionLevel {
            measure: nu.clone(),
            tau: (0..n).collect(),
            rounds: 0,
            sq_distortion_trace: vec![0.0],
            distortion: 0.0,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Point> = sample(&mut rng, n, clusters)
        .into_iter()
        .map(|i| points[i])
        .collect();
    let mut tau = vec![0usize; n];
    let mut masses = vec![0.0; clusters];
    let mut trace = Vec::new();
    let mut rounds = 0;

    loop {
        rounds += 1;
        for (p, t) in points.iter().zip(tau.iter_mut()) {
            *t = nearest_center(*p, &centers);
        }
        let mut sizes = vec![0usize; clusters];
        tau.iter().for_each(|&k| sizes[k] += 1);
        for k in 0..clusters {
            if sizes[k] > 0 {
                continue;
            }
            let mut far: Option<(usize, f64)> = None;
            for (p, &t) in tau.iter().enumerate() {
                if sizes[t] < 2 {
                    continue;
                }
                let d = points[p].dist2(centers[t]);
                if far.is_none_or(|(_, fd)| d > fd) {
                    far = Some((p, d));
                }
            }
            let (p, _) = far.expect("fewer clusters than points leaves a cluster with two members");
            sizes[tau[p]] -= 1;
            tau[p] = k;
            sizes[k] = 1;
        }

        let mut sums = vec![Point::ORIGIN; clusters];
        masses.iter_mut().for_each(|m| *m = 0.0);
        for (p, &k) in tau.iter().enumerate() {
            sums[k] = sums[k] + lambda[p] * points[p];
            masses[k] += lambda[p];
        }
        let updated: Vec<Point> = sums
            .iter()
            .zip(&masses)
            .map(|(s, &a)| (1.0 / a) * *s)
            .collect();
        trace.push(
            tau.iter()
                .enumerate()
                .map(|(p, &k)| lambda[p] * points[p].dist2(updated[k]))
                .sum(),
        );
        let unchanged = updated == centers;
        centers = updated;
        if unchanged || rounds >= MAX_LLOYD_ROUNDS {
            break;
        }
    }

    let distortion = tau
        .iter()
        .enumerate()
        .map(|(p, &k)| lambda[p] * points[p].dist(centers[k]))
        .sum();
    Ok(DecompositionLevel {
        measure: DiscreteMeasure::new_allow_coincident(centers, masses)?,
        tau,
        rounds,
        sq_distortion_trace: trace,
        distortion,
    })
}

/// Builds the hierarchy `ν_1, ν_2, …` (fine to coarse). Level `l` uses seed
/// `seed + l`. Coarsening stops once `⌊|S|/factor⌋ < 2` or `|S| ≤ coarsest`.
pub fn decompose(
    nu: &DiscreteMeasure,
    factor: usize,
    coarsest: usize,
    seed: u64,
) -> Result<Vec<DecompositionLevel>> {
    if factor < 2 {
        return Err(Error::InvalidConfig(format!("factor must be at least 2, got {factor}")));
    }
    if coarsest == 0 {
        return Err(Error::InvalidConfig("coarsest level size must be positive".into()));
    }
    let mut levels: Vec<DecompositionLevel> = Vec::new();
    loop {
        let current = levels.last().map_or(nu, |l| &l.measure);
        let size = current.len();
        let target = size / factor;
        if target < 2 || size <= coarsest {
            break;
        }
        let level = lloyd_cluster(current, target, seed.wrapping_add(levels.len() as u64))?;
        levels.push(level);
    }
    Ok(levels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiscaleOptions {
    /// Cluster-count divisor between consecutive levels.
    pub factor: usize,
    /// Stop coarsening once a level has at most this many sites.
    pub coarsest: usize,
    pub seed: u64,
    /// When above 1, coarse levels (not level 0) are solved on the density
    /// block-summed by this factor.
    pub coarse_grid_divisor: usize,
}

impl Default for MultiscaleOptions {
    fn default() -> Self {
        MultiscaleOptions {
            factor: 5,
            coarsest: 10,
            seed: 0,
            coarse_grid_divisor: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleReport {
    /// Decomposition, fine to coarse.
    pub levels: Vec<DecompositionLevel>,
    /// Optimizer runs, coarsest first; the last entry is level 0.
    pub per_level: Vec<OptimResult>,
    /// Level-0 weights with mean zero.
    pub final_w: WeightVector,
    /// Wall time per optimizer run in seconds, aligned with `per_level`.
    pub wall_times: Vec<f64>,
}

/// Per-level digest of a [`MultiscaleReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub n_sites: usize,
    pub iterations: usize,
    pub grad_l1: f64,
    pub status: OptimStatus,
    pub wall_time_s: f64,
}

impl MultiscaleReport {
    pub fn status(&self) -> OptimStatus {
        self.finest().status
    }

    pub fn finest(&self) -> &OptimResult {
        self.per_level.last().expect("level 0 is always solved")
    }

    pub fn iterations_total(&self) -> usize {
        self.per_level.iter().map(|r| r.iterations).sum()
    }

    /// Site counts from level 0 to the coarsest level.
    pub fn level_sizes(&self) -> Vec<usize> {
        std::iter::once(self.finest().w.len())
            .chain(self.levels.iter().map(|l| l.measure.len()))
            .collect()
    }

    /// Summaries ordered coarsest first, as solved.
    pub fn summary(&self) -> Vec<LevelSummary> {
        let sizes = self.level_sizes();
        let top = self.per_level.len() - 1;
        self.per_level
            .iter()
            .zip(&self.wall_times)
            .enumerate()
            .map(|(k, (r, &t))| LevelSummary {
                level: top - k,
                n_sites: sizes[top - k],
                iterations: r.iterations,
                grad_l1: r.final_grad_l1,
                status: r.status,
                wall_time_s: t,
            })
            .collect()
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("summary is plain data")
    }
}

/// Plain single-level solve from zero weights; the returned weights are
/// re-centered to mean zero.
pub fn solve_single_scale(
    density: &GridDensity,
    nu: &DiscreteMeasure,
    cfg: &OptimizerConfig,
) -> Result<OptimResult> {
    cfg.validate()?;
    let phi = Phi::new(density, nu);
    let mut res = minimize(|w| phi.eval(w), &WeightVector::zeros(nu.len()), cfg);
    res.w = res.w.recentered();
    Ok(res)
}

/// Solves the coarsest level from zero weights, then each finer level
/// starting from the weights of the clusters its sites belong to.
pub fn solve_multiscale(
    density: &GridDensity,
    nu: &DiscreteMeasure,
    cfg: &OptimizerConfig,
    ms: &MultiscaleOptions,
) -> Result<MultiscaleReport> {
    cfg.validate()?;
    if ms.coarse_grid_divisor == 0 {
        return Err(Error::InvalidConfig("grid divisor must be positive".into()));
    }
    let levels = decompose(nu, ms.factor, ms.coarsest, ms.seed)?;
    let coarse_density = if ms.coarse_grid_divisor > 1 && !levels.is_empty() {
        Some(density.coarsen(ms.coarse_grid_divisor)?)
    } else {
        None
    };

    let mut per_level = Vec::with_capacity(levels.len() + 1);
    let mut wall_times = Vec::with_capacity(levels.len() + 1);
    let mut w: Option<WeightVector> = None;
    for l in (0..=levels.len()).rev() {
        let measure = if l == 0 { nu } else { &levels[l - 1].measure };
        let start = match &w {
            None => WeightVector::zeros(measure.len()),
            Some(coarse) => {
                let tau = &levels[l].tau;
                WeightVector::from(tau.iter().map(|&k| coarse[k]).collect::<Vec<_>>())
            }
        };
        let dens = match (&coarse_density, l) {
            (Some(c), l) if l > 0 => c,
            _ => density,
        };
        let phi = Phi::new(dens, measure);
        let clock = Instant::now();
        let res = minimize(|x| phi.eval(x), &start, cfg);
        wall_times.push(clock.elapsed().as_secs_f64());
        w = Some(res.w.clone());
        per_level.push(res);
    }
    let final_w = per_level.last().expect("level 0 solved").w.recentered();
    Ok(MultiscaleReport {
        levels,
        per_level,
        final_w,
        wall_times,
    })
}
