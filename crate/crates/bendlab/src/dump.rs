//! Feature dump: one CSV row per labeled event.
//!
//! Columns are `track_id, event_index, synthetic, label` followed by the 33
//! registry names. Labels use the codes `N U H D`; values are written in the
//! shortest form that parses back to the same `f64`.

use std::io::{Read, Write};

use bendlab_core::featex::{FeatureRecord, FeatureRegistry};
use bendlab_core::Label;

const LEADING: [&str; 4] = ["track_id", "event_index", "synthetic", "label"];

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("feature dump: {0}")]
    Csv(#[from] csv::Error),
    #[error("feature dump header does not match the feature registry (column {column}: found \"{found}\", expected \"{expected}\")")]
    Header {
        column: usize,
        found: String,
        expected: String,
    },
    #[error("feature dump row {row}, column \"{column}\": invalid value \"{value}\"")]
    Value { row: usize, column: String, value: String },
    #[error("feature dump row {row}: {found} fields, expected {expected}")]
    Width { row: usize, found: usize, expected: usize },
}

pub fn header() -> Vec<String> {
    LEADING
        .iter()
        .map(|s| s.to_string())
        .chain(FeatureRegistry.names().map(str::to_string))
        .collect()
}

pub fn write_dump<W: Write>(records: &[FeatureRecord], out: W) -> Result<(), DumpError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header())?;
    for r in records {
        let mut row = vec![
            r.track_id.clone().unwrap_or_default(),
            r.event_index.to_string(),
            (r.synthetic as u8).to_string(),
            r.label.code().to_string(),
        ];
        row.extend(r.values.iter().map(|v| format_value(*v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string() // also folds -0
    } else {
        format!("{v}")
    }
}

pub fn read_dump<R: Read>(input: R) -> Result<Vec<FeatureRecord>, DumpError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let expected = header();
    let found = rd.headers()?.clone();
    for (column, exp) in expected.iter().enumerate() {
        let got = found.get(column).unwrap_or("");
        if got != exp {
            return Err(DumpError::Header {
                column: column + 1,
                found: got.to_string(),
                expected: exp.clone(),
            });
        }
    }
    if found.len() != expected.len() {
        return Err(DumpError::Header {
            column: expected.len() + 1,
            found: found.get(expected.len()).unwrap_or("").to_string(),
            expected: "end of header".to_string(),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        let line = i + 2;
        if row.len() != expected.len() {
            return Err(DumpError::Width {
                row: line,
                found: row.len(),
                expected: expected.len(),
            });
        }
        let bad = |c: usize| DumpError::Value {
            row: line,
            column: expected[c].clone(),
            value: row[c].to_string(),
        };
        let track_id = (!row[0].is_empty()).then(|| row[0].to_string());
        let event_index = row[1].parse().map_err(|_| bad(1))?;
        let synthetic = match &row[2] {
            "0" => false,
            "1" => true,
            _ => return Err(bad(2)),
        };
        let mut code = row[3].chars();
        let label = match (code.next(), code.next()) {
            (Some(c), None) => Label::from_code(c).ok_or_else(|| bad(3))?,
            _ => return Err(bad(3)),
        };
        let mut values = Vec::with_capacity(expected.len() - LEADING.len());
        for c in LEADING.len()..expected.len() {
            values.push(row[c].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(c))?);
        }
        out.push(FeatureRecord {
            track_id,
            event_index,
            values,
            label,
            synthetic,
        });
    }
    Ok(out)
}
