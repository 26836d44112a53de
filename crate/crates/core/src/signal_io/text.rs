use super::{RawRecord, DEFAULT_SAMPLE_RATE_HZ};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CsvRecordError {
    #[error("line {line}: {token:?} is not a number")]
    NotANumber { line: usize, token: String },
    #[error("no samples")]
    Empty,
}

/// Parse a record stored as text: one value per line, or comma-separated
/// values on one or more lines. Blank lines are skipped.
pub fn parse_csv_record(text: &str, id: &str) -> Result<RawRecord, CsvRecordError> {
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        for token in line.split(',') {
            let token = token.trim();
            let value: f64 = token.parse().map_err(|_| CsvRecordError::NotANumber {
                line: idx + 1,
                token: token.to_string(),
            })?;
            if !value.is_finite() {
                return Err(CsvRecordError::NotANumber {
                    line: idx + 1,
                    token: token.to_string(),
                });
            }
            samples.push(value);
        }
    }
    RawRecord::new(id, samples, DEFAULT_SAMPLE_RATE_HZ).map_err(|_| CsvRecordError::Empty)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines_and_commas() {
        assert_eq!(parse_csv_record("1\n2\n3\n", "r").unwrap().samples(), &[1.0, 2.0, 3.0]);
        assert_eq!(parse_csv_record("1,2,3", "r").unwrap().samples(), &[1.0, 2.0, 3.0]);
        assert_eq!(parse_csv_record("\n1\n\n 2 \n", "r").unwrap().samples(), &[1.0, 2.0]);
    }

    #[test]
    fn reports_bad_line() {
        assert_eq!(
            parse_csv_record("1\nx\n", "r").unwrap_err(),
            CsvRecordError::NotANumber { line: 2, token: "x".into() }
        );
        assert!(matches!(
            parse_csv_record("1,NaN", "r"),
            Err(CsvRecordError::NotANumber { line: 1, .. })
        ));
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_csv_record("", "r").unwrap_err(), CsvRecordError::Empty);
        assert_eq!(parse_csv_record("\n \n", "r").unwrap_err(), CsvRecordError::Empty);
    }
}
