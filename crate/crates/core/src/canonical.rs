//! Canonical text formatting for machine-readable output.
//!
//! Floats are always written in scientific notation with 17 significant
//! digits (`5.0000000000000000e-1`), enough to round-trip any f64 exactly,
//! so that re-serializing parsed output reproduces the bytes and other
//! implementations can match files byte for byte.

/// Canonical float rendering: 17 significant digits, lowercase exponent
/// without leading zeros.
pub fn canonical_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for &x in &[0.5, 1.0 / 3.0, 0.04550026389635842, 1e-300, -2.25, 0.0] {
            let s = canonical_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
            assert_eq!(canonical_float(back), s);
        }
    }

    #[test]
    fn known_renderings() {
        assert_eq!(canonical_float(0.5), "5.0000000000000000e-1");
        assert_eq!(canonical_float(1.0), "1.0000000000000000e0");
    }
}
