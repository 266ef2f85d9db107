//! CSV input and output for tables and time series.
//!
//! Numbers are written in `{:.12e}` format so files are byte-stable across
//! runs; lines starting with `#` are comments (used for config echoes) and
//! are skipped on input.

use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("row {row}: could not parse `{value}` as a number")]
    Parse { row: usize, value: String },
}

/// Read a two-column numeric table whose header must be exactly `names`.
pub fn read_two_columns<R: Read>(reader: R, names: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.len() != 2 || header[0] != names[0] || header[1] != names[1] {
        return Err(IoError::Header { expected: names.join(","), found: header.join(",") });
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (field, out) in rec.iter().zip([&mut a, &mut b]) {
            let v: f64 = field.parse().map_err(|_| IoError::Parse { row: row + 1, value: field.to_owned() })?;
            out.push(v);
        }
    }
    Ok((a, b))
}

/// Write `#`-prefixed comment lines, a header and equal-length columns.
pub fn write_columns<W: Write>(
    mut writer: W,
    comments: &[String],
    names: &[&str],
    columns: &[&[f64]],
) -> Result<(), IoError> {
    for c in comments {
        writeln!(writer, "# {c}")?;
    }
    let mut wtr = csv::WriterBuilder::new().from_writer(writer);
    wtr.write_record(names)?;
    let rows = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    for i in 0..rows {
        wtr.write_record(columns.iter().map(|c| format!("{:.12e}", c[i])))?;
    }
    wtr.flush()?;
    Ok(())
}
