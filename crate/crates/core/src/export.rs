//! Fixed text formatting for data files: 17 significant digits, `.` decimal
//! separator, LF newlines. Identical inputs produce byte-identical files.

/// Formats with 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    #[test]
    fn round_trips_f64() {
        for v in [0.0, 1.0, -0.125, std::f64::consts::PI, 27.0 / 128.0, 1e-300] {
            let s = super::fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }
}
