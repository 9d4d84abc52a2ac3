//! Deterministic text output: floats are printed with the shortest digit
//! string that round-trips, so identical runs produce byte-identical files.

use std::fmt::Write as _;

/// Shortest decimal representation that parses back to the same f64.
/// `-0.0` is folded to `0` so that sign noise from rounding never shows up.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    // Display gives the shortest digit string but never switches to
    // scientific notation; take whichever spelling is shorter.
    let plain = format!("{v}");
    let sci = format!("{v:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

/// One CSV line from already-formatted cells.
pub fn csv_line(cells: &[String]) -> String {
    cells.join(",")
}

/// Assemble a CSV document with the given header and float rows.
pub fn csv_document(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        let _ = writeln!(out, "{}", csv_line(&cells));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(1.0 / 3.0), "0.3333333333333333");
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(1e300), "1e300");
        assert_eq!(format_float(-1.5e-8), "-1.5e-8");
        for &v in &[0.1, 1.0 / 3.0, 6.02e23, -7.25, f64::MIN_POSITIVE] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s} does not round-trip");
        }
    }

    #[test]
    fn negative_zero_folded() {
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(0.0), "0");
    }

    #[test]
    fn csv_assembly() {
        let doc = csv_document(&["a", "b"], vec![vec![1.0, 0.5], vec![-0.0, 2.25]]);
        assert_eq!(doc, "a,b\n1,0.5\n0,2.25\n");
    }
}
