//! Drawing weighted Voronoi diagrams.
//!
//! The boundary between two cells with different weights is one branch of a
//! hyperbola with the two sites as foci. [`bisector_map`] builds the affine
//! map `B = A·G + M` that carries the graph `G` of `x ↦ 1/x` (x > 0) onto that
//! branch, so a boundary arc is drawn by sampling `1/x` between the
//! transformed endpoints and mapping back. Equal weights give a straight
//! perpendicular bisector instead.
//!
//! Arc endpoints come from the raster boundary chains of
//! [`crate::laguerre::cell_boundary_chains`], snapped onto the exact curve.

use std::fmt::Write as _;
use std::path::Path;

use crate::fmt::coord;
use crate::geometry::Point;
use crate::laguerre::{cell_boundary_chains, CellAssignment, WeightVector};
use crate::measure::{DiscreteMeasure, GridDensity};
use crate::{Error, Result};

/// Row-major 2×2 matrix.
pub type Mat2 = [[f64; 2]; 2];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn apply(m: &Mat2, p: Point) -> Point {
    Point::new(m[0][0] * p.x + m[0][1] * p.y, m[1][0] * p.x + m[1][1] * p.y)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BisectorShape {
    Hyperbola {
        /// Maps `1/x` coordinates to the plane.
        a: Mat2,
        /// Inverse of `a`, in closed form.
        a_inv: Mat2,
        /// Midpoint of the two sites.
        center: Point,
    },
    Line {
        point: Point,
        /// Unit direction.
        direction: Point,
    },
}

/// Boundary between two weighted cells, normalized so that the first site
/// carries the larger weight (equal weights: the lexicographically smaller
/// site comes first).
#[derive(Debug, Clone, PartialEq)]
pub struct BisectorMap {
    pub shape: BisectorShape,
    /// Half the weight difference, `(w_i − w_j)/2 ≥ 0` after normalization.
    pub a: f64,
    /// Half the site distance.
    pub b: f64,
    /// Angle of the focal axis `s_j − s_i`.
    pub gamma: f64,
    pub sites: (Point, Point),
    pub weights: (f64, f64),
}

impl BisectorMap {
    /// `(‖p − s_i‖ − w_i) − (‖p − s_j‖ − w_j)`; zero exactly on the boundary.
    pub fn residual(&self, p: Point) -> f64 {
        bisector_residual(p, self.sites.0, self.weights.0, self.sites.1, self.weights.1)
    }

    /// `G = A⁻¹(p − M)`; for lines, the coordinate along the line.
    pub fn to_curve_coords(&self, p: Point) -> Point {
        match &self.shape {
            BisectorShape::Hyperbola { a_inv, center, .. } => apply(a_inv, p - *center),
            BisectorShape::Line { point, direction } => Point::new((p - *point).dot(*direction), 0.0),
        }
    }

    /// `B = A·G + M`.
    pub fn from_curve_coords(&self, g: Point) -> Point {
        match &self.shape {
            BisectorShape::Hyperbola { a, center, .. } => apply(a, g) + *center,
            BisectorShape::Line { point, direction } => *point + g.x * *direction,
        }
    }
}

pub fn bisector_residual(p: Point, si: Point, wi: f64, sj: Point, wj: f64) -> f64 {
    (p.dist(si) - wi) - (p.dist(sj) - wj)
}

/// Builds the transform for the boundary between `(s_i, w_i)` and `(s_j, w_j)`.
pub fn bisector_map(si: Point, sj: Point, wi: f64, wj: f64) -> Result<BisectorMap> {
    if si == sj {
        return Err(Error::CoincidentSites);
    }
    let b = 0.5 * si.dist(sj);
    if (wi - wj).abs() >= 2.0 * b {
        return Err(Error::EmptyBisector);
    }
    // larger weight first; for equal weights a fixed lexicographic order
    let swap = if wi == wj {
        (sj.x, sj.y) < (si.x, si.y)
    } else {
        wi < wj
    };
    let ((si, wi), (sj, wj)) = if swap { ((sj, wj), (si, wi)) } else { ((si, wi), (sj, wj)) };
    let axis = sj - si;
    let gamma = axis.y.atan2(axis.x);
    let center = si.midpoint(sj);
    let a = 0.5 * (wi - wj);

    let shape = if a == 0.0 {
        let u = (1.0 / axis.norm()) * axis;
        BisectorShape::Line {
            point: center,
            direction: Point::new(-u.y, u.x),
        }
    } else {
        let c = (b * b - a * a).sqrt();
        let (sin, cos) = gamma.sin_cos();
        let fwd = [
            [0.5 * (a * cos + c * sin), 0.5 * (a * cos - c * sin)],
            [0.5 * (a * sin - c * cos), 0.5 * (a * sin + c * cos)],
        ];
        let inv = [
            [cos / a + sin / c, sin / a - cos / c],
            [cos / a - sin / c, sin / a + cos / c],
        ];
        BisectorShape::Hyperbola {
            a: fwd,
            a_inv: inv,
            center,
        }
    };
    Ok(BisectorMap {
        shape,
        a,
        b,
        gamma,
        sites: (si, sj),
        weights: (wi, wj),
    })
}

/// `k` points along the boundary from `e1` to `e2`.
///
/// Hyperbolic arcs are sampled log-uniformly in the `x` coordinate of the
/// `1/x` graph between the transformed endpoints; the endpoints themselves
/// are re-projected through that coordinate. Lines are interpolated linearly
/// between the orthogonal projections of the endpoints.
pub fn sample_bisector(map: &BisectorMap, e1: Point, e2: Point, k: usize) -> Result<Vec<Point>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 samples, got {k}")));
    }
    let last = (k - 1) as f64;
    match &map.shape {
        BisectorShape::Line { .. } => {
            let t1 = map.to_curve_coords(e1).x;
            let t2 = map.to_curve_coords(e2).x;
            Ok((0..k)
                .map(|s| {
                    let f = s as f64 / last;
                    map.from_curve_coords(Point::new(t1 + (t2 - t1) * f, 0.0))
                })
                .collect())
        }
        BisectorShape::Hyperbola { .. } => {
            let x1 = map.to_curve_coords(e1).x;
            let x2 = map.to_curve_coords(e2).x;
            for x in [x1, x2] {
                if !(x > 0.0) {
                    return Err(Error::EndpointOffCurve { x });
                }
            }
            let (l1, l2) = (x1.ln(), x2.ln());
            Ok((0..k)
                .map(|s| {
                    let x = match s {
                        0 => x1,
                        s if s == k - 1 => x2,
                        s => (l1 + (l2 - l1) * (s as f64 / last)).exp(),
                    };
                    map.from_curve_coords(Point::new(x, 1.0 / x))
                })
                .collect())
        }
    }
}

/// Moves `p` along the residual's gradient onto the boundary between the two
/// weighted sites, searching within `reach` and bisecting to convergence.
/// Returns `p` unchanged when no sign change is found.
pub fn snap_to_bisector(p: Point, si: Point, wi: f64, sj: Point, wj: f64, reach: f64) -> Point {
    let f = |q: Point| bisector_residual(q, si, wi, sj, wj);
    let ui = p - si;
    let uj = p - sj;
    if ui.norm() == 0.0 || uj.norm() == 0.0 {
        return p;
    }
    let g = (1.0 / ui.norm()) * ui - (1.0 / uj.norm()) * uj;
    if g.norm() < 1e-12 {
        return p;
    }
    let u = (1.0 / g.norm()) * g;
    let f0 = f(p);
    if f0 == 0.0 {
        return p;
    }
    // the residual grows along +u, so look backwards when it is positive
    let sign = if f0 > 0.0 { -1.0 } else { 1.0 };
    let mut span = reach;
    let mut far = None;
    for _ in 0..8 {
        let q = p + (sign * span) * u;
        if f(q).signum() != f0.signum() {
            far = Some(span);
            break;
        }
        span *= 2.0;
    }
    let Some(span) = far else { return p };
    let (mut lo, mut hi) = (0.0, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(p + (sign * mid) * u).signum() == f0.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = p + (sign * lo) * u;
    let b = p + (sign * hi) * u;
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Pixels per world unit.
    pub scale: f64,
    pub stroke_width: f64,
    /// Samples per arc half (see [`sample_bisector`]).
    pub samples: usize,
    pub show_raster: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            scale: 512.0,
            stroke_width: 1.0,
            samples: 64,
            show_raster: false,
        }
    }
}

fn label_color(l: usize) -> String {
    // golden-angle hue walk
    let hue = (l as f64 * 137.507_764_050_037_85) % 360.0;
    format!("hsl({:.1},55%,75%)", hue)
}

/// Site pair and sampled points of one drawn boundary.
pub type BoundaryCurve = ((usize, usize), Vec<Point>);

/// Analytic boundary arcs for every raster chain, in chain order. Each chain
/// is drawn as two arcs, first point → middle point → last point, after
/// snapping those three points onto the exact curve. Chains between cells
/// with no valid bisector, or whose snapped ends coincide, are skipped.
pub fn boundary_curves(
    nu: &DiscreteMeasure,
    w: &WeightVector,
    assignment: &CellAssignment,
    samples: usize,
) -> Result<Vec<BoundaryCurve>> {
    let sites = nu.sites();
    let reach = 2.0 * assignment.cell_side;
    let mut curves = Vec::new();
    for chain in cell_boundary_chains(assignment) {
        let (i, j) = chain.sites;
        let Ok(map) = bisector_map(sites[i], sites[j], w[i], w[j]) else {
            continue;
        };
        let snap = |p: Point| snap_to_bisector(p, sites[i], w[i], sites[j], w[j], reach);
        let first = snap(chain.first());
        let mid = snap(chain.points[chain.points.len() / 2]);
        let last = snap(chain.last());
        if first.dist(last) < 1e-12 && first.dist(mid) < 1e-12 {
            continue;
        }
        let mut pts = Vec::new();
        for (a, b) in [(first, mid), (mid, last)] {
            if a.dist(b) < 1e-12 {
                continue;
            }
            let Ok(seg) = sample_bisector(&map, a, b, samples) else {
                continue;
            };
            let skip = usize::from(!pts.is_empty());
            pts.extend(seg.into_iter().skip(skip));
        }
        if pts.len() >= 2 {
            curves.push(((i, j), pts));
        }
    }
    Ok(curves)
}

/// SVG 1.1 document of the diagram. Output is deterministic: fixed float
/// format and element order (raster squares, boundary paths, sites).
pub fn render_svg(
    density: &GridDensity,
    nu: &DiscreteMeasure,
    w: &WeightVector,
    assignment: &CellAssignment,
    options: &RenderOptions,
) -> Result<String> {
    if w.len() != nu.len() || assignment.n_sites() != nu.len() {
        return Err(Error::DimensionMismatch {
            expected: nu.len(),
            found: w.len().max(assignment.n_sites()),
        });
    }
    if assignment.labels.len() != density.len() {
        return Err(Error::DimensionMismatch {
            expected: density.len(),
            found: assignment.labels.len(),
        });
    }
    let (lo, hi) = density.bounds();
    let (mut xmin, mut ymin, mut xmax, mut ymax) = (lo.x, lo.y, hi.x, hi.y);
    for s in nu.sites() {
        xmin = xmin.min(s.x);
        xmax = xmax.max(s.x);
        ymin = ymin.min(s.y);
        ymax = ymax.max(s.y);
    }
    let margin = 0.02 * (xmax - xmin).max(ymax - ymin).max(f64::MIN_POSITIVE);
    let (xmin, ymin, xmax, ymax) = (xmin - margin, ymin - margin, xmax + margin, ymax + margin);
    let sc = options.scale;
    let px = |p: Point| (coord((p.x - xmin) * sc), coord((ymax - p.y) * sc));

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        coord((xmax - xmin) * sc),
        coord((ymax - ymin) * sc),
        coord((xmax - xmin) * sc),
        coord((ymax - ymin) * sc)
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="100%" height="100%" fill="white"/>"#);

    if options.show_raster {
        let _ = writeln!(svg, r#"<g id="raster" stroke="none">"#);
        let h = density.cell_side();
        for q in 0..density.len() {
            let c = density.center(q);
            let (x, y) = px(Point::new(c.x - 0.5 * h, c.y + 0.5 * h));
            let _ = writeln!(
                svg,
                r#"<rect x="{x}" y="{y}" width="{s}" height="{s}" fill="{}"/>"#,
                label_color(assignment.labels[q]),
                s = coord(h * sc)
            );
        }
        let _ = writeln!(svg, "</g>");
    }

    let _ = writeln!(
        svg,
        r#"<g id="boundaries" fill="none" stroke="black" stroke-width="{}">"#,
        coord(options.stroke_width)
    );
    for ((i, j), pts) in boundary_curves(nu, w, assignment, options.samples)? {
        let mut d = String::new();
        for (k, p) in pts.iter().enumerate() {
            let (x, y) = px(*p);
            let _ = write!(d, "{}{x} {y}", if k == 0 { "M" } else { " L" });
        }
        let _ = writeln!(svg, r#"<path class="bisector" data-sites="{i} {j}" d="{d}"/>"#);
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(
        svg,
        r#"<g id="sites" fill="none" stroke="crimson" stroke-width="{}">"#,
        coord(options.stroke_width)
    );
    for (i, s) in nu.sites().iter().enumerate() {
        let (x, y) = px(*s);
        let r = (w[i].abs() * sc).max(1.5 * options.stroke_width);
        let dash = if w[i] < 0.0 {
            r#" stroke-dasharray="4 3""#
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            r#"<circle class="site" data-index="{i}" cx="{x}" cy="{y}" r="{}"{dash}/>"#,
            coord(r)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

/// Writes [`render_svg`] output to `path`.
pub fn write_svg(
    path: impl AsRef<Path>,
    density: &GridDensity,
    nu: &DiscreteMeasure,
    w: &WeightVector,
    assignment: &CellAssignment,
    options: &RenderOptions,
) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(density, nu, w, assignment, options)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laguerre::assign_cells;

    #[test]
    fn equal_weights_give_perpendicular_line() {
        let m = bisector_map(Point::new(0.0, 0.0), Point::new(1.0, 0.0), 0.0, 0.0).unwrap();
        match m.shape {
            BisectorShape::Line { point, direction } => {
                assert_eq!(point, Point::new(0.5, 0.0));
                assert_eq!(direction, Point::new(0.0, 1.0));
            }
            _ => panic!("expected a line"),
        }
    }

    #[test]
    fn swallowed_cell_has_no_bisector() {
        let (s, t) = (Point::new(0.0, 0.0), Point::new(3.0, 4.0));
        assert!(matches!(bisector_map(s, t, 5.0, 0.0), Err(Error::EmptyBisector)));
        assert!(matches!(bisector_map(s, t, 0.0, 6.0), Err(Error::EmptyBisector)));
        assert!(matches!(bisector_map(s, s, 0.0, 0.0), Err(Error::CoincidentSites)));
    }

    #[test]
    fn worked_example_roundtrip() {
        let m = bisector_map(Point::new(0.0, 0.0), Point::new(2.0, 0.0), 1.0, 0.0).unwrap();
        assert_eq!(m.a, 0.5);
        assert_eq!(m.b, 1.0);
        let BisectorShape::Hyperbola { a, a_inv, .. } = &m.shape else {
            panic!("expected a hyperbola")
        };
        let c = 0.75f64.sqrt();
        assert!((a[0][0] - 0.25).abs() < 1e-15);
        assert!((a[1][0] + 0.5 * c).abs() < 1e-15);
        let id = mat_mul(a, a_inv);
        for (r, row) in id.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let want = if r == k { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
        for p in [Point::new(0.3, -1.2), Point::new(5.0, 7.0), Point::new(-2.0, 0.1)] {
            let back = m.from_curve_coords(m.to_curve_coords(p));
            assert!(back.dist(p) < 1e-12);
        }
        // vertex of the branch: on the axis, closer to the lighter site
        let vertex = m.from_curve_coords(Point::new(1.0, 1.0));
        assert!((vertex.x - 1.5).abs() < 1e-12 && vertex.y.abs() < 1e-12);
        assert!(m.residual(vertex).abs() < 1e-12);
    }

    #[test]
    fn line_sampling() {
        let m = bisector_map(Point::new(0.0, 0.0), Point::new(1.0, 0.0), 0.0, 0.0).unwrap();
        let pts = sample_bisector(&m, Point::new(0.5, 0.0), Point::new(0.5, 1.0), 3).unwrap();
        assert_eq!(pts, vec![Point::new(0.5, 0.0), Point::new(0.5, 0.5), Point::new(0.5, 1.0)]);
        assert!(sample_bisector(&m, Point::ORIGIN, Point::ORIGIN, 1).is_err());
    }

    #[test]
    fn hyperbola_samples_satisfy_the_defining_equation() {
        let (si, sj) = (Point::new(0.1, 0.2), Point::new(0.9, 0.7));
        let m = bisector_map(si, sj, 0.05, 0.3).unwrap();
        let e1 = m.from_curve_coords(Point::new(0.2, 5.0));
        let e2 = m.from_curve_coords(Point::new(3.0, 1.0 / 3.0));
        let pts = sample_bisector(&m, e1, e2, 50).unwrap();
        assert_eq!(pts.len(), 50);
        for p in &pts {
            let r = bisector_residual(*p, si, 0.05, sj, 0.3);
            assert!(r.abs() < 1e-9, "{r}");
        }
        assert!(pts[0].dist(e1) < 1e-12 && pts[49].dist(e2) < 1e-12);
        let two = sample_bisector(&m, e1, e2, 2).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two[0].dist(e1) < 1e-12 && two[1].dist(e2) < 1e-12);
    }

    #[test]
    fn endpoint_on_wrong_branch() {
        let m = bisector_map(Point::new(0.0, 0.0), Point::new(2.0, 0.0), 1.0, 0.0).unwrap();
        // mirror image of the vertex lies on the other branch
        let err = sample_bisector(&m, Point::new(0.5, 0.0), Point::new(1.5, 0.0), 4).unwrap_err();
        assert!(matches!(err, Error::EndpointOffCurve { .. }));
    }

    #[test]
    fn snapping_lands_on_curve() {
        let (si, sj) = (Point::new(0.2, 0.5), Point::new(0.8, 0.45));
        let p = snap_to_bisector(Point::new(0.6, 0.6), si, 0.1, sj, 0.0, 0.05);
        assert!(bisector_residual(p, si, 0.1, sj, 0.0).abs() < 1e-12);
    }

    fn two_site_setup(w: [f64; 2]) -> (GridDensity, DiscreteMeasure, WeightVector, CellAssignment) {
        let d = GridDensity::uniform(16, 16).unwrap();
        let nu = DiscreteMeasure::new(
            vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let w = WeightVector::new(w.to_vec()).unwrap();
        let a = assign_cells(&d, &nu, &w).unwrap();
        (d, nu, w, a)
    }

    #[test]
    fn single_site_svg() {
        let d = GridDensity::uniform(8, 8).unwrap();
        let nu = DiscreteMeasure::new(vec![Point::new(0.5, 0.5)], vec![1.0]).unwrap();
        let w = WeightVector::zeros(1);
        let a = assign_cells(&d, &nu, &w).unwrap();
        let svg = render_svg(&d, &nu, &w, &a, &RenderOptions::default()).unwrap();
        assert_eq!(svg.matches("class=\"site\"").count(), 1);
        assert_eq!(svg.matches("<path").count(), 0);
    }

    #[test]
    fn equal_weight_pair_gives_one_straight_path() {
        let (d, nu, w, a) = two_site_setup([0.0, 0.0]);
        let svg = render_svg(&d, &nu, &w, &a, &RenderOptions::default()).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        let curves = boundary_curves(&nu, &w, &a, 16).unwrap();
        assert!(curves[0].1.iter().all(|p| (p.x - 0.5).abs() < 1e-12));
    }

    #[test]
    fn negative_weights_are_dashed_and_output_is_stable() {
        let (d, nu, w, a) = two_site_setup([0.1, -0.05]);
        let opts = RenderOptions {
            show_raster: true,
            ..Default::default()
        };
        let s1 = render_svg(&d, &nu, &w, &a, &opts).unwrap();
        let s2 = render_svg(&d, &nu, &w, &a, &opts).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.matches("stroke-dasharray").count(), 1);
        assert_eq!(s1.matches("<rect").count(), 1 + 256);
    }

    #[test]
    fn raster_endpoints_snap_within_bound() {
        let (d, nu, w, a) = two_site_setup([0.12, 0.0]);
        let curves = boundary_curves(&nu, &w, &a, 32).unwrap();
        assert_eq!(curves.len(), 1);
        for p in &curves[0].1 {
            let r = bisector_residual(*p, nu.sites()[0], w[0], nu.sites()[1], w[1]);
            assert!(r.abs() <= 2.0 * 2f64.sqrt() * d.cell_side());
            assert!(r.abs() < 1e-9);
        }
    }

    #[test]
    fn orientation_invariance() {
        let (si, sj) = (Point::new(0.2, 0.1), Point::new(0.6, 0.9));
        let m1 = bisector_map(si, sj, 0.3, 0.1).unwrap();
        let m2 = bisector_map(sj, si, 0.1, 0.3).unwrap();
        let e1 = m1.from_curve_coords(Point::new(0.5, 2.0));
        let e2 = m1.from_curve_coords(Point::new(4.0, 0.25));
        let a = sample_bisector(&m1, e1, e2, 40).unwrap();
        let b = sample_bisector(&m2, e2, e1, 40).unwrap();
        for p in &a {
            assert!(b.iter().any(|q| q.dist(*p) < 1e-9));
        }
        for p in &b {
            assert!(a.iter().any(|q| q.dist(*p) < 1e-9));
        }
    }

    #[test]
    fn nearly_equal_weights_approach_the_line() {
        let (si, sj) = (Point::new(0.25, 0.4), Point::new(0.75, 0.6));
        let line = bisector_map(si, sj, 0.0, 0.0).unwrap();
        let hyp = bisector_map(si, sj, 1e-6, 0.0).unwrap();
        assert!(matches!(hyp.shape, BisectorShape::Hyperbola { .. }));
        let BisectorShape::Line { point, direction } = line.shape else {
            panic!("expected a line")
        };
        let e1 = snap_to_bisector(point + (-0.4) * direction, si, 1e-6, sj, 0.0, 0.01);
        let e2 = snap_to_bisector(point + 0.4 * direction, si, 1e-6, sj, 0.0, 0.01);
        for p in sample_bisector(&hyp, e1, e2, 64).unwrap() {
            let off = p - point;
            let normal = Point::new(-direction.y, direction.x);
            assert!(off.dot(normal).abs() <= 1e-4);
        }
    }
}
