//! Sample ingestion: bundled datasets by name, or a one-column CSV file.

use std::path::Path;

use caltol_core::datasets;
use caltol_core::distributions::Sample;

use crate::error::CliError;

/// Loads `source` as a bundled dataset name (`air-lead`, `potency`) or a
/// CSV path. A bundled name wins over a file of the same name.
pub fn load_data(source: &str) -> Result<Sample, CliError> {
    if let Some(values) = datasets::by_name(source) {
        return Ok(Sample::new(values.to_vec())?);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(CliError::Data(format!(
            "'{source}' is neither a file nor a bundled dataset (air-lead, potency)"
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_column(&text).map_err(|msg| CliError::Data(format!("{}: {msg}", path.display())))
}

/// Parses one numeric column. A non-numeric first row is taken as a header.
pub fn parse_column(text: &str) -> Result<Sample, String> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("row {}: {e}", i + 1))?;
        let row = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 1 {
            return Err(format!("row {row}: expected one column, found {}", record.len()));
        }
        let field = &record[0];
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => return Err(format!("row {row}: non-finite value '{field}'")),
            Err(_) if values.is_empty() && i == 0 => {} // header
            Err(_) => return Err(format!("row {row}: '{field}' is not a number")),
        }
    }
    if values.is_empty() {
        return Err("no numeric values found".into());
    }
    Sample::new(values).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_datasets() {
        let lead = load_data("air-lead").unwrap();
        assert_eq!(lead.len(), 15);
        assert_eq!(lead.max(), 1400.0);
        let potency = load_data("potency").unwrap();
        assert_eq!(potency.len(), 25);
        assert_eq!(potency.min(), 92.589);
    }

    #[test]
    fn single_value() {
        let s = parse_column("2.5\n").unwrap();
        assert_eq!(s.values(), &[2.5]);
    }

    #[test]
    fn header_crlf_and_blank_lines() {
        let s = parse_column("value\r\n1.5\r\n\r\n-2\r\n3e2\r\n").unwrap();
        assert_eq!(s.values(), &[1.5, -2.0, 300.0]);
        let bom = parse_column("\u{feff}x\n4\n").unwrap();
        assert_eq!(bom.values(), &[4.0]);
    }

    #[test]
    fn errors_carry_row_numbers() {
        let e = parse_column("x\n1\n2\nabc\n").unwrap_err();
        assert!(e.contains("row 4"), "{e}");
        let e = parse_column("1\n2,3\n").unwrap_err();
        assert!(e.contains("row 2") && e.contains("one column"), "{e}");
        let e = parse_column("1\nNaN\n").unwrap_err();
        assert!(e.contains("row 2"), "{e}");
        assert!(parse_column("").is_err());
        assert!(parse_column("header only\n").is_err());
    }

    #[test]
    fn missing_file() {
        let e = load_data("/no/such/file.csv").unwrap_err();
        assert!(e.to_string().contains("neither a file"));
    }
}
