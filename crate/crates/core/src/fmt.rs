//! Fixed float formatting shared by every text output.
//!
//! All reals are written with 17 significant digits in scientific notation so
//! that outputs round-trip exactly and diff cleanly.

/// Format `x` with 17 significant digits (`d.dddddddddddddddde±x`).
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        // normalizes -0.0 too
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// Same as [`sig17`] but with a fixed short precision for SVG coordinates.
pub fn coord(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_roundtrips() {
        for &x in &[1.0, 0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(sig17(-0.0), sig17(0.0));
    }

    #[test]
    fn coord_has_no_negative_zero() {
        assert_eq!(coord(-1e-9), "0.000000");
        assert_eq!(coord(0.5), "0.500000");
    }
}
