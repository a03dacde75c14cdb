//! CSV formatting shared by every exporter: comma separated, header row, LF line
//! endings, floats with 17 significant digits.

use std::fmt::Write as _;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header and rows of floats.
pub fn csv_table<S: AsRef<str>>(header: &[S], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.iter().map(|h| h.as_ref().replace(',', ";")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
    }
    out
}

/// Parses a comma separated list of floats such as `"0.5,1,2"`.
pub fn parse_float_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_roundtrip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn table_layout() {
        let t = csv_table(&["a", "b"], vec![vec![1.0, 2.0]]);
        assert_eq!(t, "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
        assert_eq!(parse_float_list("1, 2.5,").unwrap(), vec![1.0, 2.5]);
        assert!(parse_float_list("1,x").is_err());
    }
}
