//! Headerless dense CSV: one sample per line, comma separated, `.` decimal
//! point. Lines starting with `#` are comments.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

pub fn read_csv<R: Read>(reader: R) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut dim = None;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match dim {
            None => dim = Some(record.len()),
            Some(d) if d != record.len() => {
                return Err(Error::Csv {
                    line,
                    message: format!("expected {d} fields, found {}", record.len()),
                })
            }
            Some(_) => {}
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| Error::Csv {
                line,
                message: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv { line, message: format!("non-finite value {field:?}") });
            }
            values.push(v);
        }
        rows += 1;
    }
    let dim = dim.ok_or_else(|| Error::Csv { line: 0, message: "no data rows".into() })?;
    DataMatrix::new(rows, dim, values)
}

pub fn read_csv_file(path: &std::path::Path) -> Result<DataMatrix> {
    read_csv(std::fs::File::open(path)?)
}

/// Formats a float with 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes rows of numbers as CSV, optionally preceded by a `#` comment line.
pub fn write_rows<'a, W: Write>(
    mut w: W,
    header_comment: Option<&str>,
    rows: impl IntoIterator<Item = &'a [f64]>,
) -> Result<()> {
    if let Some(c) = header_comment {
        writeln!(w, "# {c}")?;
    }
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&fmt_f64(*v));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv<W: Write>(w: W, header_comment: Option<&str>, x: &DataMatrix) -> Result<()> {
    write_rows(w, header_comment, x.iter_rows())
}
