//! Number formatting and the sweep CSV.

use std::io::Write;

use nalgebra::DMatrix;

/// 12 significant digits in plain decimal, switching to exponent form for
/// very large or small magnitudes. Non-finite values print as an empty field.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return trim_exponent(&format!("{x:.11e}"));
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(format!("{x:.decimals$}"))
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

fn trim_exponent(s: &str) -> String {
    match s.split_once('e') {
        Some((mantissa, exp)) => format!("{}e{exp}", trim_zeros(mantissa.to_string())),
        None => s.to_string(),
    }
}

pub fn list(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
}

pub fn matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| num(m[(r, c)])).collect();
        out.push_str("  ");
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub const CSV_HEADER: [&str; 9] = [
    "theta",
    "qfi",
    "qfi_first_moment",
    "qfi_second_moment",
    "wigner_fisher",
    "homodyne_opt",
    "ratio",
    "method",
    "warnings",
];

/// One sweep row; `None` fields print empty.
#[derive(Clone, Debug, Default)]
pub struct Row {
    pub theta: f64,
    pub qfi: Option<f64>,
    pub qfi_first_moment: Option<f64>,
    pub qfi_second_moment: Option<f64>,
    pub wigner_fisher: Option<f64>,
    pub homodyne_opt: Option<f64>,
    pub ratio: Option<f64>,
    pub method: String,
    pub warnings: Vec<String>,
    pub oracle_qfi: Option<f64>,
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes header and rows sorted by θ.
pub fn emit_csv<W: Write>(rows: &[Row], with_oracle: bool, dest: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(dest);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if with_oracle {
        header.push("oracle_qfi");
    }
    w.write_record(&header)?;
    let mut sorted: Vec<&Row> = rows.iter().collect();
    sorted.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    for r in sorted {
        let mut rec = vec![
            num(r.theta),
            opt(r.qfi),
            opt(r.qfi_first_moment),
            opt(r.qfi_second_moment),
            opt(r.wigner_fisher),
            opt(r.homodyne_opt),
            opt(r.ratio),
            r.method.clone(),
            r.warnings.join(";"),
        ];
        if with_oracle {
            rec.push(opt(r.oracle_qfi));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(2.0), "2");
        assert_eq!(num(26.308503), "26.308503");
        assert_eq!(num(4.0 / 3.0), "1.33333333333");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(1.5e-9), "1.5e-9");
        assert_eq!(num(f64::NAN), "");
        assert_eq!(num(123_456_789.123_456_79), "123456789.123");
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let mut buf = Vec::new();
        emit_csv(&[], false, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn rows_sorted_and_optional_column() {
        let rows = vec![
            Row { theta: 1.0, qfi: Some(0.5), method: "general".into(), ..Default::default() },
            Row { theta: 0.0, qfi: Some(2.0), method: "general".into(), warnings: vec!["kernel-overlap".into()], ..Default::default() },
        ];
        let mut buf = Vec::new();
        emit_csv(&rows, true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].ends_with(",oracle_qfi"));
        assert_eq!(lines[1], "0,2,,,,,,general,kernel-overlap,");
        assert_eq!(lines[2], "1,0.5,,,,,,general,,");
    }
}
