//! Shared output formatting helpers.

/// Formats a float with 9 significant digits, the precision used by every
/// CSV artifact this crate writes.
pub(crate) fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_has_nine_significant_digits() {
        assert_eq!(sig9(0.5), "5.00000000e-1");
        assert_eq!(sig9(0.0), "0.00000000e0");
        assert_eq!(sig9(123.456789123), "1.23456789e2");
        assert_eq!(sig9(-1.0 / 3.0), "-3.33333333e-1");
    }
}
