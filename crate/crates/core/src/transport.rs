//! Transport cost, its a-priori bound, reports and assignment export.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::fmt::sig17;
use crate::geometry::{pairwise_sum, Point};
use crate::laguerre::CellAssignment;
use crate::measure::{DiscreteMeasure, GridDensity};
use crate::{Error, Result};

/// `c(T) = Σ_i ∫_{T⁻¹(s_i)} ‖x − s_i‖ μ(dx)` for the map read off the labels.
pub fn transport_cost(assignment: &CellAssignment) -> f64 {
    pairwise_sum(&assignment.cost_integrals)
}

/// `∫‖x‖ μ(dx) + max_i ‖s_i‖`, an upper bound on the cost of any transport
/// map between the two measures. Independent of the weights.
pub fn upper_bound_c(density: &GridDensity, nu: &DiscreteMeasure) -> f64 {
    let moments: Vec<f64> = (0..density.len())
        .map(|q| density.center(q).norm() * density.cell_mass()[q])
        .collect();
    let far = nu
        .sites()
        .iter()
        .map(|s| s.norm())
        .fold(0.0, f64::max);
    pairwise_sum(&moments) + far
}

/// Summary of a solved transport problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub cost: f64,
    /// `√cost`.
    pub wasserstein_paper: f64,
    pub upper_bound_c: f64,
    pub grad_l1: f64,
    pub n_sites: usize,
    pub grid: (usize, usize),
    /// Site counts per level, finest first.
    pub levels: Vec<usize>,
    pub iterations_total: usize,
    pub seed: u64,
}

impl TransportReport {
    pub fn new(
        assignment: &CellAssignment,
        density: &GridDensity,
        nu: &DiscreteMeasure,
        grad_l1: f64,
        levels: Vec<usize>,
        iterations_total: usize,
        seed: u64,
    ) -> Self {
        let cost = transport_cost(assignment);
        TransportReport {
            cost,
            wasserstein_paper: cost.sqrt(),
            upper_bound_c: upper_bound_c(density, nu),
            grad_l1,
            n_sites: nu.len(),
            grid: (density.cols(), density.rows()),
            levels,
            iterations_total,
            seed,
        }
    }

    /// Single-line JSON with a fixed key order and 17-significant-digit reals.
    pub fn to_json(&self) -> String {
        let levels: Vec<String> = self.levels.iter().map(|l| l.to_string()).collect();
        format!(
            "{{\"cost\":{},\"wasserstein_paper\":{},\"grad_l1\":{},\"n_sites\":{},\"grid\":[{},{}],\"levels\":[{}],\"iterations_total\":{},\"upper_bound_C\":{},\"seed\":{}}}",
            sig17(self.cost),
            sig17(self.wasserstein_paper),
            sig17(self.grad_l1),
            self.n_sites,
            self.grid.0,
            self.grid.1,
            levels.join(","),
            self.iterations_total,
            sig17(self.upper_bound_c),
            self.seed
        )
    }
}

const EXPORT_HEADER: &str = "semidot-assignment 1";

/// Renders an assignment in the text exchange format:
///
/// ```text
/// semidot-assignment 1
/// grid <cols> <rows> <cell_side> <origin_x> <origin_y>
/// sites <n>
/// labels
/// <cols labels per line, rows lines, top row first>
/// table
/// <i> <mass> <lambda> <cost_integral>     (n lines)
/// ```
///
/// Reals use 17 significant digits.
pub fn format_assignment(assignment: &CellAssignment, nu: &DiscreteMeasure) -> Result<String> {
    if nu.len() != assignment.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: assignment.n_sites(),
            found: nu.len(),
        });
    }
    let mut s = String::new();
    let _ = writeln!(s, "{EXPORT_HEADER}");
    let _ = writeln!(
        s,
        "grid {} {} {} {} {}",
        assignment.cols,
        assignment.rows,
        sig17(assignment.cell_side),
        sig17(assignment.origin.x),
        sig17(assignment.origin.y)
    );
    let _ = writeln!(s, "sites {}", assignment.n_sites());
    let _ = writeln!(s, "labels");
    for row in assignment.labels.chunks(assignment.cols) {
        let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    let _ = writeln!(s, "table");
    for i in 0..assignment.n_sites() {
        let _ = writeln!(
            s,
            "{i} {} {} {}",
            sig17(assignment.masses[i]),
            sig17(nu.masses()[i]),
            sig17(assignment.cost_integrals[i])
        );
    }
    Ok(s)
}

/// Writes [`format_assignment`] output to `path`.
pub fn export_assignment(
    assignment: &CellAssignment,
    nu: &DiscreteMeasure,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let text = format_assignment(assignment, nu)?;
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Assignment read back from the exchange format, with the per-site target
/// masses alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportedAssignment {
    pub assignment: CellAssignment,
    pub lambda: Vec<f64>,
}

/// Parses the exchange format written by [`export_assignment`].
pub fn parse_assignment<R: BufRead>(input: R) -> Result<ExportedAssignment> {
    let mut lines = input.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((k, Ok(l))) => Ok((k + 1, l)),
            Some((k, Err(e))) => Err(Error::Parse {
                line: k + 1,
                reason: e.to_string(),
            }),
            None => Err(Error::Parse {
                line: 0,
                reason: format!("unexpected end of input, expected {what}"),
            }),
        }
    };
    let bad = |line: usize, reason: &str| Error::Parse {
        line,
        reason: reason.to_string(),
    };
    fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
        tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
            line,
            reason: "expected a number".into(),
        })
    }

    let (k, header) = next("header")?;
    if header.trim() != EXPORT_HEADER {
        return Err(bad(k, "missing header"));
    }
    let (k, grid) = next("grid line")?;
    let mut t = grid.split_whitespace();
    if t.next() != Some("grid") {
        return Err(bad(k, "expected grid line"));
    }
    let cols: usize = num(t.next(), k)?;
    let rows: usize = num(t.next(), k)?;
    let cell_side: f64 = num(t.next(), k)?;
    let origin = Point::new(num(t.next(), k)?, num(t.next(), k)?);
    let (k, sites) = next("sites line")?;
    let mut t = sites.split_whitespace();
    if t.next() != Some("sites") {
        return Err(bad(k, "expected sites line"));
    }
    let n: usize = num(t.next(), k)?;
    let (k, l) = next("labels")?;
    if l.trim() != "labels" {
        return Err(bad(k, "expected labels"));
    }
    let mut labels = Vec::with_capacity(cols * rows);
    for _ in 0..rows {
        let (k, row) = next("label row")?;
        let before = labels.len();
        for tok in row.split_whitespace() {
            let v: usize = num(Some(tok), k)?;
            if v >= n {
                return Err(bad(k, "label out of range"));
            }
            labels.push(v);
        }
        if labels.len() - before != cols {
            return Err(bad(k, "wrong number of labels in row"));
        }
    }
    let (k, l) = next("table")?;
    if l.trim() != "table" {
        return Err(bad(k, "expected table"));
    }
    let mut masses = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    let mut cost_integrals = Vec::with_capacity(n);
    for i in 0..n {
        let (k, row) = next("table row")?;
        let mut t = row.split_whitespace();
        let idx: usize = num(t.next(), k)?;
        if idx != i {
            return Err(bad(k, "table rows out of order"));
        }
        masses.push(num(t.next(), k)?);
        lambda.push(num(t.next(), k)?);
        cost_integrals.push(num(t.next(), k)?);
    }
    Ok(ExportedAssignment {
        assignment: CellAssignment {
            cols,
            rows,
            cell_side,
            origin,
            labels,
            masses,
            cost_integrals,
        },
        lambda,
    })
}

/// Reads an exported assignment from `path`.
pub fn read_assignment(path: impl AsRef<Path>) -> Result<ExportedAssignment> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_assignment(BufReader::new(file))
}
