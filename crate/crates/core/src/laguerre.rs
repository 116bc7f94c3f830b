//! Additively weighted Voronoi cells evaluated on the density grid.
//!
//! A point `x` belongs to cell `i` when `‖x − s_i‖ − w_i ≤ ‖x − s_j‖ − w_j`
//! for every `j`. Each grid square is assigned to the cell containing its
//! center, so a cell is approximated by a union of squares and integrals
//! over cells become sums over squares.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::ops::Deref;

use rayon::prelude::*;

use crate::geometry::{pairwise_sum, Point};
use crate::measure::{DiscreteMeasure, GridDensity};
use crate::pgm::write_pgm_p2;
use crate::{Error, Result};

/// One real weight per target site.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(i) = w.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("weight {i} is not finite")));
        }
        Ok(WeightVector(w))
    }

    pub fn zeros(n: usize) -> Self {
        WeightVector(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// The same diagram with mean weight zero.
    pub fn recentered(&self) -> WeightVector {
        if self.0.is_empty() {
            return self.clone();
        }
        let mean = pairwise_sum(&self.0) / self.0.len() as f64;
        WeightVector(self.0.iter().map(|w| w - mean).collect())
    }
}

impl Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for WeightVector {
    fn from(w: Vec<f64>) -> Self {
        WeightVector(w)
    }
}

/// Labels of every grid square plus per-site aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAssignment {
    pub cols: usize,
    pub rows: usize,
    pub cell_side: f64,
    pub origin: Point,
    /// Site index per square, row-major, top row first.
    pub labels: Vec<usize>,
    /// `μ(Vor_i)` per site.
    pub masses: Vec<f64>,
    /// `∫_{Vor_i} ‖x − s_i‖ μ(dx)` per site (midpoint rule per square).
    pub cost_integrals: Vec<f64>,
}

impl CellAssignment {
    pub fn n_sites(&self) -> usize {
        self.masses.len()
    }

    /// World coordinates of lattice vertex `(i, j)`; `j` counts from the top.
    fn lattice_point(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + i as f64 * self.cell_side,
            self.origin.y + (self.rows as f64 - j as f64) * self.cell_side,
        )
    }

    /// Debug dump of the label raster as a plain PGM, one gray level per site
    /// index modulo 256.
    pub fn write_label_pgm<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let samples: Vec<u16> = self.labels.iter().map(|&l| (l % 256) as u16).collect();
        write_pgm_p2(out, self.cols, self.rows, 255, &samples)
    }
}

/// Index of the site minimizing `‖x − s_i‖ − w_i`; ties go to the lowest index.
/// Returns the index and the unweighted distance to that site.
#[inline]
fn nearest_weighted(x: Point, sites: &[Point], w: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut best_dist = x.dist(sites[0]);
    let mut best_score = best_dist - w[0];
    for (i, (s, wi)) in sites.iter().zip(w).enumerate().skip(1) {
        let d = x.dist(*s);
        let score = d - wi;
        if score < best_score {
            best = i;
            best_dist = d;
            best_score = score;
        }
    }
    (best, best_dist)
}

/// Labels every square by the weighted Voronoi cell containing its center and
/// accumulates per-site mass and cost.
///
/// Aggregates are summed pairwise over squares grouped by label in row-major
/// order, so results do not depend on the number of worker threads.
pub fn assign_cells(
    density: &GridDensity,
    nu: &DiscreteMeasure,
    w: &WeightVector,
) -> Result<CellAssignment> {
    let n = nu.len();
    if w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: w.len(),
        });
    }
    let cols = density.cols();
    let sites = nu.sites();
    let weights = w.as_slice();

    let mut labels = vec![0usize; density.len()];
    let mut dists = vec![0.0f64; density.len()];
    labels
        .par_chunks_mut(cols)
        .zip(dists.par_chunks_mut(cols))
        .enumerate()
        .for_each(|(r, (lrow, drow))| {
            for c in 0..cols {
                let (l, d) = nearest_weighted(density.center_of(c, r), sites, weights);
                lrow[c] = l;
                drow[c] = d;
            }
        });

    // counting sort of the squares by label
    let mut offsets = vec![0usize; n + 1];
    for &l in &labels {
        offsets[l + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut grouped_mass = vec![0.0; labels.len()];
    let mut grouped_cost = vec![0.0; labels.len()];
    for (q, &l) in labels.iter().enumerate() {
        let m = density.cell_mass()[q];
        grouped_mass[fill[l]] = m;
        grouped_cost[fill[l]] = m * dists[q];
        fill[l] += 1;
    }
    let (masses, cost_integrals): (Vec<f64>, Vec<f64>) = (0..n)
        .into_par_iter()
        .map(|i| {
            let range = offsets[i]..offsets[i + 1];
            (
                pairwise_sum(&grouped_mass[range.clone()]),
                pairwise_sum(&grouped_cost[range]),
            )
        })
        .unzip();

    Ok(CellAssignment {
        cols,
        rows: density.rows(),
        cell_side: density.cell_side(),
        origin: density.origin(),
        labels,
        masses,
        cost_integrals,
    })
}

/// A maximal run of raster edges separating the cells of one site pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryChain {
    /// Site pair `(i, j)` with `i < j`.
    pub sites: (usize, usize),
    /// Midpoints of the consecutive raster edges, in world coordinates.
    pub points: Vec<Point>,
}

impl BoundaryChain {
    pub fn first(&self) -> Point {
        self.points[0]
    }

    pub fn last(&self) -> Point {
        *self.points.last().expect("chains are never empty")
    }
}

type Vertex = (usize, usize);

/// Chains the raster edges between differently labelled neighbouring squares
/// into maximal polylines, one list per site pair. Chains break where more
/// than two edges of the same pair meet.
pub fn cell_boundary_chains(assignment: &CellAssignment) -> Vec<BoundaryChain> {
    let (cols, rows) = (assignment.cols, assignment.rows);
    let labels = &assignment.labels;
    let mut by_pair: BTreeMap<(usize, usize), Vec<(Vertex, Vertex)>> = BTreeMap::new();
    let mut push = |a: usize, b: usize, seg: (Vertex, Vertex)| {
        if a != b {
            by_pair.entry((a.min(b), a.max(b))).or_default().push(seg);
        }
    };
    for r in 0..rows {
        for c in 0..cols {
            let here = labels[r * cols + c];
            if c + 1 < cols {
                push(here, labels[r * cols + c + 1], ((c + 1, r), (c + 1, r + 1)));
            }
            if r + 1 < rows {
                push(here, labels[(r + 1) * cols + c], ((c, r + 1), (c + 1, r + 1)));
            }
        }
    }

    let mut chains = Vec::new();
    for (pair, edges) in by_pair {
        let mut incident: HashMap<Vertex, Vec<usize>> = HashMap::new();
        for (k, (a, b)) in edges.iter().enumerate() {
            incident.entry(*a).or_default().push(k);
            incident.entry(*b).or_default().push(k);
        }
        let degree = |v: &Vertex| incident[v].len();
        let mut used = vec![false; edges.len()];
        let midpoint = |k: usize| {
            let (a, b) = edges[k];
            assignment
                .lattice_point(a.0, a.1)
                .midpoint(assignment.lattice_point(b.0, b.1))
        };

        let walk = |start_edge: usize, from: Vertex, used: &mut Vec<bool>| {
            let mut points = vec![midpoint(start_edge)];
            used[start_edge] = true;
            let (a, b) = edges[start_edge];
            let mut at = if a == from { b } else { a };
            while degree(&at) == 2 {
                let Some(&next) = incident[&at].iter().find(|&&e| !used[e]) else {
                    break;
                };
                used[next] = true;
                points.push(midpoint(next));
                let (a, b) = edges[next];
                at = if a == at { b } else { a };
            }
            points
        };

        // open chains start at vertices where the pair's boundary ends or branches
        for k in 0..edges.len() {
            if used[k] {
                continue;
            }
            let (a, b) = edges[k];
            let start = if degree(&a) != 2 {
                Some(a)
            } else if degree(&b) != 2 {
                Some(b)
            } else {
                None
            };
            if let Some(v) = start {
                let points = walk(k, v, &mut used);
                chains.push(BoundaryChain { sites: pair, points });
            }
        }
        // what remains are closed loops
        for k in 0..edges.len() {
            if !used[k] {
                let points = walk(k, edges[k].0, &mut used);
                chains.push(BoundaryChain { sites: pair, points });
            }
        }
    }
    chains
}
