//! Text artifacts: feature CSV, report tables, timing sidecars.

use super::CliError;
use crate::metrics::{format_hms, MetricReport};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub positive: bool,
    pub values: Vec<f64>,
}

/// Header `id,label,f0,...`; floats in shortest round-trip form.
pub fn format_feature_csv(rows: &[FeatureRow]) -> String {
    let width = rows.first().map_or(0, |r| r.values.len());
    let mut out = String::from("id,label");
    for j in 0..width {
        write!(out, ",f{j}").unwrap();
    }
    out.push('\n');
    for r in rows {
        write!(out, "{},{}", r.id, r.positive as u8).unwrap();
        for v in &r.values {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_feature_csv(text: &str) -> Result<Vec<FeatureRow>, CliError> {
    let bad = |line: usize, msg: &str| CliError::Parse(format!("feature file line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 || cols[0] != "id" || cols[1] != "label" {
        return Err(bad(1, "header must start with id,label"));
    }
    let width = cols.len() - 2;
    if cols[2..].iter().enumerate().any(|(j, c)| *c != format!("f{j}")) {
        return Err(bad(1, "feature columns must be f0..fN"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let id = fields.next().unwrap_or_default().to_string();
        let positive = match fields.next() {
            Some("1") => true,
            Some("0") => false,
            _ => return Err(bad(i + 1, "label must be 0 or 1")),
        };
        let values = fields
            .map(|t| t.parse::<f64>().map_err(|_| bad(i + 1, &format!("not a number: {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != width {
            return Err(bad(i + 1, &format!("{} values, header has {width}", values.len())));
        }
        rows.push(FeatureRow { id, positive, values });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub input: String,
    pub metrics: MetricReport,
}

/// Table columns in the order model, input, sensitivity, accuracy,
/// precision, f1, ttt. Only the last column varies between identical runs.
pub fn format_report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("model,input,sensitivity,accuracy,precision,f1,ttt\n");
    for r in rows {
        let m = &r.metrics;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.model,
            r.input,
            m.sensitivity,
            m.accuracy,
            m.precision,
            m.f1,
            ttt_cell(m.total_training_time_s)
        )
        .unwrap();
    }
    out
}

/// Long format for plotting: one `model,metric,value` line per cell.
pub fn format_plot_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("model,metric,value\n");
    for r in rows {
        let m = &r.metrics;
        for (name, v) in [
            ("sensitivity", m.sensitivity),
            ("accuracy", m.accuracy),
            ("precision", m.precision),
            ("f1", m.f1),
        ] {
            writeln!(out, "{},{name},{v}", r.model).unwrap();
        }
    }
    out
}

pub fn format_timing_csv(rows: &[ReportRow], dcae_seconds: Option<f64>) -> String {
    let mut out = String::from("model,ttt_s\n");
    if let Some(s) = dcae_seconds {
        writeln!(out, "dcae,{s}").unwrap();
    }
    for r in rows {
        if let Some(s) = r.metrics.total_training_time_s {
            writeln!(out, "{},{s}", r.model).unwrap();
        }
    }
    out
}

fn ttt_cell(s: Option<f64>) -> String {
    s.map_or_else(|| "-".to_string(), format_hms)
}

/// Human-readable table in the order Sensitivity, Accuracy, Precision,
/// F1, TTT.
pub fn format_report_text(rows: &[ReportRow], dcae_seconds: Option<f64>) -> String {
    let mut out = format!(
        "{:<16} {:<6} {:>11} {:>9} {:>9} {:>9} {:>9}\n",
        "Model", "Input", "Sensitivity", "Accuracy", "Precision", "F1_score", "TTT"
    );
    for r in rows {
        let m = &r.metrics;
        writeln!(
            out,
            "{:<16} {:<6} {:>11.4} {:>9.4} {:>9.4} {:>9.4} {:>9}",
            r.model,
            r.input,
            m.sensitivity,
            m.accuracy,
            m.precision,
            m.f1,
            ttt_cell(m.total_training_time_s)
        )
        .unwrap();
    }
    if let Some(s) = dcae_seconds {
        writeln!(out, "\nDCAE training time: {}", format_hms(s)).unwrap();
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path, what: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            CliError::MissingInput(format!("{what} not found: {}", path.display()))
        }
        _ => CliError::io(path, e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, positive: bool, values: Vec<f64>) -> FeatureRow {
        FeatureRow { id: id.into(), positive, values }
    }

    #[test]
    fn feature_csv_roundtrip_is_exact() {
        let rows = vec![
            row("A1", true, vec![0.1, 1.0 / 3.0, -0.0, 5e-324]),
            row("A2", false, vec![1.0, 2.5, 0.0, f64::MAX]),
        ];
        let text = format_feature_csv(&rows);
        assert!(text.starts_with("id,label,f0,f1,f2,f3\n"));
        assert_eq!(parse_feature_csv(&text).unwrap(), rows);
    }

    #[test]
    fn feature_csv_errors() {
        assert!(parse_feature_csv("").is_err());
        assert!(parse_feature_csv("label,id\n").is_err());
        assert!(parse_feature_csv("id,label,f0\nA,2,1\n").is_err());
        assert!(parse_feature_csv("id,label,f0\nA,1,x\n").is_err());
        assert!(parse_feature_csv("id,label,f0\nA,1,1,2\n").is_err());
    }

    #[test]
    fn text_report_layout() {
        let rows = vec![ReportRow {
            model: "d-gbdt-leaf".into(),
            input: "dcae".into(),
            metrics: MetricReport {
                accuracy: 0.9085,
                sensitivity: 0.9999,
                precision: 0.9085,
                f1: 0.952,
                total_training_time_s: Some(244.0),
            },
        }];
        let text = format_report_text(&rows, Some(7340.0));
        assert!(text.contains("0.9999"));
        assert!(text.contains("0:04:04"));
        assert!(text.contains("2:02:20"));
        let csv = format_report_csv(&rows);
        assert_eq!(csv.lines().nth(1).unwrap(), "d-gbdt-leaf,dcae,0.9999,0.9085,0.9085,0.952,0:04:04");
        assert_eq!(format_plot_csv(&rows).lines().count(), 5);
    }
}
