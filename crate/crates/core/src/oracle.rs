//! Exact discrete–discrete optimal transport for small problems.
//!
//! Masses are scaled to integers (10⁹ by default, largest-remainder rounding
//! so totals match exactly) and the transportation problem is solved as a
//! min-cost flow by successive shortest paths with node potentials. Used by
//! tests as an independent check on the semi-discrete solver.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::geometry::pairwise_sum;
use crate::measure::{DiscreteMeasure, GridDensity};
use crate::{Error, Result};

pub const DEFAULT_MASS_SCALE: u64 = 1_000_000_000;

/// Balanced transportation problem with Euclidean costs.
#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub sources: DiscreteMeasure,
    pub sinks: DiscreteMeasure,
    /// `costs[i][j] = ‖a_i − b_j‖`.
    pub costs: Vec<Vec<f64>>,
}

impl FlowProblem {
    pub fn new(sources: DiscreteMeasure, sinks: DiscreteMeasure) -> Self {
        let costs = sources
            .sites()
            .iter()
            .map(|a| sinks.sites().iter().map(|b| a.dist(*b)).collect())
            .collect();
        FlowProblem {
            sources,
            sinks,
            costs,
        }
    }

    /// The same problem with sources and sinks exchanged.
    pub fn transposed(&self) -> Self {
        FlowProblem::new(self.sinks.clone(), self.sources.clone())
    }
}

/// One site per positive-mass square, at the square center.
pub fn density_to_discrete(density: &GridDensity) -> DiscreteMeasure {
    let (sites, masses): (Vec<_>, Vec<_>) = (0..density.len())
        .filter(|&q| density.cell_mass()[q] > 0.0)
        .map(|q| (density.center(q), density.cell_mass()[q]))
        .unzip();
    DiscreteMeasure::new(sites, masses).expect("a valid density has positive total mass")
}

/// Scales masses to integers summing exactly to `scale` (largest remainder).
pub fn integer_masses(masses: &[f64], scale: u64) -> Vec<u64> {
    let total = pairwise_sum(masses);
    let exact: Vec<f64> = masses.iter().map(|m| m / total * scale as f64).collect();
    let mut out: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let missing = scale.saturating_sub(assigned) as usize;
    for &k in order.iter().cycle().take(missing) {
        out[k] += 1;
    }
    out
}

struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
}

struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
    }

    /// Shortest-path distances over residual edges (queue-based Bellman–Ford).
    fn bellman_ford(&self, source: usize) -> Vec<f64> {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut queued = vec![false; n];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0.0;
        queued[source] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &e in &self.adj[u] {
                let edge = &self.edges[e];
                if edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] {
                    dist[edge.to] = dist[u] + edge.cost;
                    if !queued[edge.to] {
                        queued[edge.to] = true;
                        queue.push_back(edge.to);
                    }
                }
            }
        }
        dist
    }

    /// Pushes all flow from `source` to `sink` along successive shortest
    /// paths; returns `(flow, cost)`.
    fn min_cost_flow(&mut self, source: usize, sink: usize) -> (i64, f64) {
        let n = self.adj.len();
        let mut potential: Vec<f64> = self
            .bellman_ford(source)
            .into_iter()
            .map(|d| if d.is_finite() { d } else { 0.0 })
            .collect();
        let mut flow = 0;
        let mut cost = 0.0;
        loop {
            let mut dist = vec![f64::INFINITY; n];
            let mut via = vec![usize::MAX; n];
            let mut heap = BinaryHeap::new();
            dist[source] = 0.0;
            heap.push(State { dist: 0.0, node: source });
            while let Some(State { dist: d, node: u }) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap <= 0 {
                        continue;
                    }
                    // reduced costs are non-negative up to rounding
                    let reduced = (edge.cost + potential[u] - potential[edge.to]).max(0.0);
                    let nd = d + reduced;
                    if nd < dist[edge.to] {
                        dist[edge.to] = nd;
                        via[edge.to] = e;
                        heap.push(State { dist: nd, node: edge.to });
                    }
                }
            }
            if !dist[sink].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    potential[v] += dist[v];
                }
            }
            let mut push = i64::MAX;
            let mut v = sink;
            while v != source {
                let e = via[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let e = via[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                cost += push as f64 * self.edges[e].cost;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
        }
        (flow, cost)
    }
}

#[derive(PartialEq)]
struct State {
    dist: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum of `Σ γ_ij·costs_ij` over transport plans, at the default mass
/// scale.
pub fn exact_ot_cost(problem: &FlowProblem) -> Result<f64> {
    exact_ot_cost_scaled(problem, DEFAULT_MASS_SCALE)
}

/// [`exact_ot_cost`] with masses discretized to multiples of `1/scale`.
pub fn exact_ot_cost_scaled(problem: &FlowProblem, scale: u64) -> Result<f64> {
    let source_mass = pairwise_sum(problem.sources.masses());
    let sink_mass = pairwise_sum(problem.sinks.masses());
    if (source_mass - sink_mass).abs() > 1e-9 {
        return Err(Error::Unbalanced {
            source_mass,
            sink_mass,
        });
    }
    if scale == 0 || scale > (i64::MAX / 4) as u64 {
        return Err(Error::InvalidConfig(format!("mass scale {scale} out of range")));
    }
    let supply = integer_masses(problem.sources.masses(), scale);
    let demand = integer_masses(problem.sinks.masses(), scale);
    let (m, k) = (supply.len(), demand.len());
    let source = m + k;
    let sink = m + k + 1;
    let mut net = Network::new(m + k + 2);
    for (i, &a) in supply.iter().enumerate() {
        net.add_edge(source, i, a as i64, 0.0);
    }
    for (j, &b) in demand.iter().enumerate() {
        net.add_edge(m + j, sink, b as i64, 0.0);
    }
    for (i, row) in problem.costs.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            net.add_edge(i, m + j, scale as i64, c);
        }
    }
    let (flow, cost) = net.min_cost_flow(source, sink);
    debug_assert_eq!(flow as u64, scale);
    Ok(cost / scale as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(pts: &[(f64, f64)], masses: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect(), masses.to_vec()).unwrap()
    }

    fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> DiscreteMeasure {
        DiscreteMeasure::from_unnormalized(
            (0..n).map(|_| Point::new(rng.random(), rng.random())).collect(),
            (0..n).map(|_| rng.random_range(0.1..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn dirac_to_dirac() {
        let p = FlowProblem::new(m(&[(0.0, 0.0)], &[1.0]), m(&[(3.0, 4.0)], &[1.0]));
        assert!((exact_ot_cost(&p).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn identical_measures_cost_zero() {
        let a = m(&[(0.0, 0.0), (1.0, 0.5), (0.2, 0.9)], &[0.2, 0.3, 0.5]);
        let p = FlowProblem::new(a.clone(), a);
        assert!(exact_ot_cost(&p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn crossing_pairs_cost_one() {
        let p = FlowProblem::new(
            m(&[(0.0, 0.0), (1.0, 1.0)], &[0.5, 0.5]),
            m(&[(1.0, 0.0), (0.0, 1.0)], &[0.5, 0.5]),
        );
        // brute force over plans γ = [[t, ½−t], [½−t, t]]
        let brute = (0..=1000)
            .map(|k| {
                let t = 0.5 * k as f64 / 1000.0;
                t * 1.0 + (0.5 - t) * 1.0 + (0.5 - t) * 1.0 + t * 1.0
            })
            .fold(f64::INFINITY, f64::min);
        assert!((brute - 1.0).abs() < 1e-12);
        assert!((exact_ot_cost(&p).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unbalanced_rejected() {
        // both measures pass validation individually but differ by 1.8e-9
        let a = DiscreteMeasure::new(vec![Point::new(0.0, 0.0)], vec![1.0 - 9e-10]).unwrap();
        let b = DiscreteMeasure::new(vec![Point::new(1.0, 0.0)], vec![1.0 + 9e-10]).unwrap();
        assert!(matches!(
            exact_ot_cost(&FlowProblem::new(a, b)),
            Err(Error::Unbalanced { .. })
        ));
    }

    #[test]
    fn integer_masses_are_exact() {
        let got = integer_masses(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 10);
        assert_eq!(got.iter().sum::<u64>(), 10);
        assert_eq!(got, vec![4, 3, 3]);
    }

    #[test]
    fn symmetric_under_transposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let p = FlowProblem::new(random_measure(&mut rng, 7), random_measure(&mut rng, 4));
            let a = exact_ot_cost(&p).unwrap();
            let b = exact_ot_cost(&p.transposed()).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn bounded_by_feasible_plans() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let src = random_measure(&mut rng, 8);
            let dst = random_measure(&mut rng, 5);
            let p = FlowProblem::new(src.clone(), dst.clone());
            let exact = exact_ot_cost(&p).unwrap();
            // product plan
            let product: f64 = (0..8)
                .flat_map(|i| (0..5).map(move |j| (i, j)))
                .map(|(i, j)| src.masses()[i] * dst.masses()[j] * p.costs[i][j])
                .sum();
            assert!(exact <= product + 1e-12);
            // north-west corner plan
            let (mut a, mut b) = (src.masses().to_vec(), dst.masses().to_vec());
            let (mut i, mut j, mut nw) = (0, 0, 0.0);
            while i < 8 && j < 5 {
                let t = a[i].min(b[j]);
                nw += t * p.costs[i][j];
                a[i] -= t;
                b[j] -= t;
                if a[i] <= 1e-15 {
                    i += 1;
                } else {
                    j += 1;
                }
            }
            assert!(exact <= nw + 1e-12);
        }
    }

    #[test]
    fn scaling_error_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = FlowProblem::new(random_measure(&mut rng, 10), random_measure(&mut rng, 6));
        let diam = p.costs.iter().flatten().copied().fold(0.0, f64::max);
        let fine = exact_ot_cost_scaled(&p, 1_000_000_000).unwrap();
        let coarse = exact_ot_cost_scaled(&p, 1_000_000).unwrap();
        assert!((fine - coarse).abs() <= 1e-6 * diam, "{fine} {coarse}");
    }

    #[test]
    fn density_discretization() {
        let one = GridDensity::uniform(1, 1).unwrap();
        let s = density_to_discrete(&one);
        assert_eq!(s.sites(), &[Point::new(0.5, 0.5)]);
        assert_eq!(s.masses(), &[1.0]);
        let four = density_to_discrete(&GridDensity::uniform(2, 2).unwrap());
        assert_eq!(four.masses(), &[0.25; 4]);
        let sparse = GridDensity::new(3, 1, 1.0 / 3.0, Point::ORIGIN, vec![0.5, 0.0, 0.5]).unwrap();
        let s = density_to_discrete(&sparse);
        assert_eq!(s.len(), 2);
        assert!((s.masses().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
