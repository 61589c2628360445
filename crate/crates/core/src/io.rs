//! Plain-text matrix and vector formats.
//!
//! Matrices: a header line `rows,cols,label` followed by one line per row of
//! comma-separated values with 17 significant digits, which round-trips every
//! `f64` exactly. Vectors: a single comma-separated line.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_matrix<W: Write>(mut w: W, m: &Matrix, label: &str) -> Result<()> {
    if label.contains(',') || label.contains('\n') {
        return Err(Error::param("matrix label may not contain ',' or newlines"));
    }
    writeln!(w, "{},{},{}", m.nrows(), m.ncols(), label)?;
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&x| fmt_value(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

fn parse_values(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad number {tok:?}: {e}"),
            })
        })
        .collect()
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<(Matrix, String)> {
    let mut lines = r.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })??;
    let mut parts = header.splitn(3, ',');
    let mut dim = |name: &str| -> Result<usize> {
        parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("header needs integer {name}"),
            })
    };
    let rows = dim("rows")?;
    let cols = dim("cols")?;
    let label = parts.next().unwrap_or("").trim().to_string();
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let lineno = i + 2;
        let line = lines.next().ok_or(Error::Parse {
            line: lineno,
            message: format!("expected {rows} data rows"),
        })??;
        let values = parse_values(&line, lineno)?;
        if values.len() != cols {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {cols} values, found {}", values.len()),
            });
        }
        data.extend(values);
    }
    Ok((Matrix::from_row_slice(rows, cols, &data), label))
}

pub fn write_vector_line<W: Write>(mut w: W, v: &Vector) -> Result<()> {
    let line: Vec<String> = v.iter().map(|&x| fmt_value(x)).collect();
    writeln!(w, "{}", line.join(","))?;
    Ok(())
}

pub fn read_vector_line<R: BufRead>(r: R) -> Result<Vector> {
    let line = r.lines().next().ok_or(Error::Parse {
        line: 1,
        message: "empty input".into(),
    })??;
    Ok(Vector::from_vec(parse_values(&line, 1)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = Matrix::from_row_slice(2, 2, &[0.1, -1.0 / 3.0, 1e-300, 7.0]);
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m, "demo").unwrap();
        let (back, label) = read_matrix(&buf[..]).unwrap();
        assert_eq!(back, m);
        assert_eq!(label, "demo");
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let text = "2,2,x\n1,2\n3\n";
        match read_matrix(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_matrix("2,2,x\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn vector_round_trip() {
        let v = Vector::from_vec(vec![1.5, -2.0, std::f64::consts::PI]);
        let mut buf = Vec::new();
        write_vector_line(&mut buf, &v).unwrap();
        assert_eq!(read_vector_line(&buf[..]).unwrap(), v);
    }
}
