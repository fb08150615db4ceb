//! Matrix files and report output.
//!
//! JSON matrices look like `{"field": "real", "n": 2, "rows": [[1, 2], [3, 4]]}`;
//! complex entries are `[re, im]` pairs. A bare numeric CSV grid is accepted
//! for real matrices. Floats are written in shortest round-trip form, so
//! `write_matrix` followed by `read_matrix` reproduces every bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{Field, Matrix, Scalar};

fn parse_entry(v: &Value, i: usize, j: usize) -> Result<Scalar> {
    let num = |x: &Value| {
        x.as_f64()
            .ok_or_else(|| Error::Parse(format!("entry ({i}, {j}) is not a number: {x}")))
    };
    match v {
        Value::Number(_) => Ok(Complex64::new(num(v)?, 0.0)),
        Value::Array(pair) if pair.len() == 2 => Ok(Complex64::new(num(&pair[0])?, num(&pair[1])?)),
        _ => Err(Error::Parse(format!(
            "entry ({i}, {j}) must be a number or a [re, im] pair, got {v}"
        ))),
    }
}

pub fn parse_matrix_json(text: &str) -> Result<Matrix> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Parse("matrix file must hold a JSON object".into()))?;
    let field = match obj.get("field").and_then(Value::as_str) {
        Some("real") => Field::Real,
        Some("complex") => Field::Complex,
        other => {
            return Err(Error::Parse(format!(
                "\"field\" must be \"real\" or \"complex\", got {other:?}"
            )))
        }
    };
    let rows = obj
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"rows\" array".into()))?;
    let n = rows.len();
    if let Some(declared) = obj.get("n") {
        let declared = declared.as_u64().ok_or_else(|| {
            Error::Parse(format!(
                "\"n\" must be a non-negative integer, got {declared}"
            ))
        })?;
        if declared as usize != n {
            return Err(Error::Parse(format!(
                "\"n\" is {declared} but {n} rows are present"
            )));
        }
    }
    if n == 0 {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let mut entries = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse(format!("row {i} is not an array")))?;
        if row.len() != n {
            return Err(Error::Parse(format!(
                "row {i} has {} entries; a square matrix needs {n}",
                row.len()
            )));
        }
        for (j, v) in row.iter().enumerate() {
            entries.push(parse_entry(v, i, j)?);
        }
    }
    Matrix::new(field, n, entries)
}

pub fn parse_matrix_csv(text: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, s)| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("entry ({i}, {j}) is not a number: {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Parse(format!(
            "row {i} has {} entries; a square matrix needs {n}",
            r.len()
        )));
    }
    Matrix::from_real_rows(&rows)
}

/// Reads a matrix, choosing CSV for a `.csv` extension and JSON otherwise.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        parse_matrix_csv(&text)
    } else {
        parse_matrix_json(&text)
    }
}

pub fn matrix_to_json(a: &Matrix) -> Value {
    let rows: Vec<Value> = a
        .rows()
        .map(|r| {
            r.iter()
                .map(|z| match a.field() {
                    Field::Real => json!(z.re),
                    Field::Complex => json!([z.re, z.im]),
                })
                .collect()
        })
        .collect();
    json!({ "field": a.field(), "n": a.n(), "rows": rows })
}

pub fn write_matrix(path: &Path, a: &Matrix) -> Result<()> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        if a.field() != Field::Real {
            return Err(Error::Field("CSV output holds real matrices only".into()));
        }
        let mut w = csv::Writer::from_path(path)?;
        for row in a.rows() {
            w.write_record(row.iter().map(|z| z.re.to_string()))?;
        }
        w.flush()?;
        Ok(())
    } else {
        write_json(path, &matrix_to_json(a))
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(to_json_string(value)?.as_bytes())?;
    Ok(())
}
