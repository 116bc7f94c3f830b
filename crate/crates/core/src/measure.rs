//! Source and target measures.
//!
//! The source is a [`GridDensity`]: a probability density that is constant on
//! each square of an axis-aligned grid. The target is a [`DiscreteMeasure`]:
//! finitely many sites carrying positive masses.
//!
//! Grid squares are stored row-major with row 0 at the *top* (file order of
//! an image), while world coordinates have `y` pointing up. Square `(c, r)`
//! therefore covers `x ∈ [c·h, (c+1)·h)` and `y ∈ [(rows-1-r)·h, (rows-r)·h)`
//! relative to the grid origin, `h` being the side length.

use std::collections::HashSet;

use crate::geometry::{pairwise_sum, Point};
use crate::{Error, Result};

/// Tolerance accepted by the constructors on the total mass.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// A grayscale image as read from disk, before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub values: Vec<f64>,
    /// Format scale; informational only.
    pub maxval: u32,
}

impl RawImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let img = RawImage {
            width,
            height,
            values,
            maxval: 255,
        };
        img.validate()?;
        Ok(img)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidMeasure("image dimensions must be positive".into()));
        }
        if self.values.len() != self.width * self.height {
            return Err(Error::DimensionMismatch {
                expected: self.width * self.height,
                found: self.values.len(),
            });
        }
        if let Some(v) = self.values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("pixel value {v} is not a finite non-negative number")));
        }
        Ok(())
    }

    fn total(&self) -> Result<f64> {
        self.validate()?;
        let total = pairwise_sum(&self.values);
        if total <= 0.0 {
            return Err(Error::ZeroMassImage);
        }
        Ok(total)
    }

    fn cell_side(&self) -> f64 {
        1.0 / self.width.max(self.height) as f64
    }
}

/// Piecewise-constant probability density on a square grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    cols: usize,
    rows: usize,
    cell_side: f64,
    origin: Point,
    cell_mass: Vec<f64>,
}

impl GridDensity {
    pub fn new(
        cols: usize,
        rows: usize,
        cell_side: f64,
        origin: Point,
        cell_mass: Vec<f64>,
    ) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(Error::InvalidMeasure("grid dimensions must be positive".into()));
        }
        if !(cell_side.is_finite() && cell_side > 0.0) {
            return Err(Error::InvalidMeasure(format!("cell side {cell_side} must be positive")));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidMeasure("origin must be finite".into()));
        }
        if cell_mass.len() != cols * rows {
            return Err(Error::DimensionMismatch {
                expected: cols * rows,
                found: cell_mass.len(),
            });
        }
        if cell_mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidMeasure("cell masses must be finite and non-negative".into()));
        }
        let total = pairwise_sum(&cell_mass);
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("cell masses sum to {total}, not 1")));
        }
        Ok(GridDensity {
            cols,
            rows,
            cell_side,
            origin,
            cell_mass,
        })
    }

    /// Uniform density on `[0, cols·h] × [0, rows·h]` with `h = 1/max(cols, rows)`.
    pub fn uniform(cols: usize, rows: usize) -> Result<Self> {
        let n = cols * rows;
        let side = 1.0 / cols.max(rows).max(1) as f64;
        GridDensity::new(cols, rows, side, Point::ORIGIN, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }

    pub fn len(&self) -> usize {
        self.cell_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_mass.is_empty()
    }

    /// Density value on square `q`: its mass divided by its area.
    pub fn density_value(&self, q: usize) -> f64 {
        self.cell_mass[q] / (self.cell_side * self.cell_side)
    }

    /// World-coordinate center of square `q` (row-major index).
    pub fn center(&self, q: usize) -> Point {
        let c = q % self.cols;
        let r = q / self.cols;
        self.center_of(c, r)
    }

    pub fn center_of(&self, col: usize, row: usize) -> Point {
        let h = self.cell_side;
        Point::new(
            self.origin.x + (col as f64 + 0.5) * h,
            self.origin.y + ((self.rows - 1 - row) as f64 + 0.5) * h,
        )
    }

    /// World coordinates of lattice vertex `(i, j)`, where `i ∈ 0..=cols`
    /// runs left to right and `j ∈ 0..=rows` runs top to bottom.
    pub fn lattice_point(&self, i: usize, j: usize) -> Point {
        let h = self.cell_side;
        Point::new(
            self.origin.x + i as f64 * h,
            self.origin.y + (self.rows as f64 - j as f64) * h,
        )
    }

    /// Lower-left and upper-right corners of the grid's support rectangle.
    pub fn bounds(&self) -> (Point, Point) {
        let h = self.cell_side;
        (
            self.origin,
            Point::new(
                self.origin.x + self.cols as f64 * h,
                self.origin.y + self.rows as f64 * h,
            ),
        )
    }

    /// Block-sums `divisor × divisor` squares into one. Partial blocks at the
    /// right and bottom edges keep their (smaller) mass; the support rectangle
    /// grows downward and rightward to whole blocks.
    pub fn coarsen(&self, divisor: usize) -> Result<GridDensity> {
        if divisor == 0 {
            return Err(Error::InvalidConfig("grid divisor must be positive".into()));
        }
        if divisor == 1 {
            return Ok(self.clone());
        }
        let cols = self.cols.div_ceil(divisor);
        let rows = self.rows.div_ceil(divisor);
        let mut mass = vec![0.0; cols * rows];
        for r in 0..self.rows {
            for c in 0..self.cols {
                mass[(r / divisor) * cols + c / divisor] += self.cell_mass[r * self.cols + c];
            }
        }
        let origin = Point::new(
            self.origin.x,
            self.origin.y + (self.rows as f64 - (rows * divisor) as f64) * self.cell_side,
        );
        // re-normalize away the accumulated rounding
        let total = pairwise_sum(&mass);
        mass.iter_mut().for_each(|m| *m /= total);
        GridDensity::new(cols, rows, self.cell_side * divisor as f64, origin, mass)
    }
}

/// Finitely supported probability measure `Σ λ_i δ_{s_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    sites: Vec<Point>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validated constructor: equal lengths, at least one site, positive
    /// masses summing to one, pairwise distinct finite sites.
    pub fn new(sites: Vec<Point>, masses: Vec<f64>) -> Result<Self> {
        let m = Self::new_allow_coincident(sites, masses)?;
        let mut seen = HashSet::with_capacity(m.sites.len());
        for (i, s) in m.sites.iter().enumerate() {
            // +0.0 folds -0.0 onto 0.0
            if !seen.insert(((s.x + 0.0).to_bits(), (s.y + 0.0).to_bits())) {
                return Err(Error::InvalidMeasure(format!("site {i} at ({}, {}) is duplicated", s.x, s.y)));
            }
        }
        Ok(m)
    }

    /// Like [`DiscreteMeasure::new`] but tolerates coincident sites. Useful
    /// for clustering inputs; solving over coincident sites leaves all but
    /// the lowest-indexed one with an empty cell.
    pub fn new_allow_coincident(sites: Vec<Point>, masses: Vec<f64>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidMeasure("at least one site is required".into()));
        }
        if sites.len() != masses.len() {
            return Err(Error::DimensionMismatch {
                expected: sites.len(),
                found: masses.len(),
            });
        }
        if sites.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidMeasure("sites must be finite".into()));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidMeasure("masses must be finite and positive".into()));
        }
        let total = pairwise_sum(&masses);
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("masses sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure { sites, masses })
    }

    /// Normalizes arbitrary positive masses to sum to one.
    pub fn from_unnormalized(sites: Vec<Point>, masses: Vec<f64>) -> Result<Self> {
        let total = pairwise_sum(&masses);
        if !(total > 0.0) {
            return Err(Error::InvalidMeasure("total mass must be positive".into()));
        }
        Self::new(sites, masses.iter().map(|m| m / total).collect())
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Normalizes an image into a grid density on (a sub-rectangle of) the unit
/// square.
pub fn image_to_density(img: &RawImage) -> Result<GridDensity> {
    let total = img.total()?;
    let cell_mass = img.values.iter().map(|v| v / total).collect();
    GridDensity::new(img.width, img.height, img.cell_side(), Point::ORIGIN, cell_mass)
}

/// One site per positive pixel, at the pixel center, in the same coordinates
/// as [`image_to_density`]. Zero pixels carry no site.
pub fn image_to_discrete(img: &RawImage) -> Result<DiscreteMeasure> {
    let total = img.total()?;
    let h = img.cell_side();
    let mut sites = Vec::new();
    let mut masses = Vec::new();
    for (k, &v) in img.values.iter().enumerate() {
        if v > 0.0 {
            let c = k % img.width;
            let r = k / img.width;
            sites.push(Point::new(
                (c as f64 + 0.5) * h,
                ((img.height - 1 - r) as f64 + 0.5) * h,
            ));
            masses.push(v / total);
        }
    }
    DiscreteMeasure::new(sites, masses)
}
