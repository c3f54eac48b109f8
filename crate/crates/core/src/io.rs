//! Matrix and vector file formats.
//!
//! Matrices are headerless CSV, row-major, one row per line, values printed
//! with 17 significant digits so a write/read round trip is bit-exact for
//! `f64`. Vectors are single-column matrices. Solver metrics go to JSON
//! sidecar files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },

    #[error("{path}:{line}: parse error in field {field}: {value:?}")]
    Parse {
        path: String,
        line: usize,
        field: usize,
        value: String,
    },

    #[error("{path}:{line}: expected {expected} fields, got {got}")]
    RaggedRow {
        path: String,
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("{path}: file is empty")]
    Empty { path: String },

    #[error("{path}: expected a single column, got {got} columns")]
    NotAVector { path: String, got: usize },
}

/// Write a matrix as headerless CSV with 17 significant digits.
pub fn write_matrix(path: &Path, m: &Array2<f64>) -> Result<(), IoError> {
    let file = File::create(path).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    let mut line = String::new();
    for row in m.rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            format_value(&mut line, *v);
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(|source| IoError::Write {
            path: path.display().to_string(),
            source,
        })?;
    }
    w.flush().map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Write a vector as a p×1 CSV.
pub fn write_vector(path: &Path, v: &Array1<f64>) -> Result<(), IoError> {
    let m = v.view().insert_axis(ndarray::Axis(1)).to_owned();
    write_matrix(path, &m)
}

/// 17 significant digits: lossless for f64, still plain decimal text.
fn format_value(out: &mut String, v: f64) {
    use std::fmt::Write as _;
    let _ = write!(out, "{v:.16e}");
}

/// Read a headerless CSV matrix. Ragged rows are rejected so silently
/// truncated files do not parse.
pub fn read_matrix(path: &Path) -> Result<Array2<f64>, IoError> {
    let file = File::open(path).map_err(|source| IoError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut data: Vec<f64> = Vec::new();
    let mut ncols = None;
    let mut nrows = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| IoError::Open {
            path: path.display().to_string(),
            source,
        })?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.is_empty() {
            continue; // tolerate blank/trailing lines
        }
        let mut got = 0usize;
        for (field, tok) in trimmed.split(',').enumerate() {
            let v: f64 = tok.trim().parse().map_err(|_| IoError::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                field: field + 1,
                value: tok.to_string(),
            })?;
            data.push(v);
            got += 1;
        }
        match ncols {
            None => ncols = Some(got),
            Some(expected) if expected != got => {
                return Err(IoError::RaggedRow {
                    path: path.display().to_string(),
                    line: idx + 1,
                    expected,
                    got,
                })
            }
            _ => {}
        }
        nrows += 1;
    }
    let ncols = ncols.ok_or_else(|| IoError::Empty {
        path: path.display().to_string(),
    })?;
    Ok(Array2::from_shape_vec((nrows, ncols), data).expect("shape consistent by construction"))
}

/// Read a p×1 CSV as a vector.
pub fn read_vector(path: &Path) -> Result<Array1<f64>, IoError> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 {
        return Err(IoError::NotAVector {
            path: path.display().to_string(),
            got: m.ncols(),
        });
    }
    Ok(m.column(0).to_owned())
}

/// Write feature indices, one per line (0-based).
pub fn write_indices(path: &Path, indices: &[usize]) -> Result<(), IoError> {
    let file = File::create(path).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    for i in indices {
        writeln!(w, "{i}").map_err(|source| IoError::Write {
            path: path.display().to_string(),
            source,
        })?;
    }
    w.flush().map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Read indices written by [`write_indices`].
pub fn read_indices(path: &Path) -> Result<Vec<usize>, IoError> {
    let file = File::open(path).map_err(|source| IoError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| IoError::Open {
            path: path.display().to_string(),
            source,
        })?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: usize = t.parse().map_err(|_| IoError::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            field: 1,
            value: t.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// JSON sidecar written next to solver outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveMetrics {
    pub objective: f64,
    pub feasibility_margin: f64,
    pub cycles: usize,
    pub wall_seconds: f64,
    pub solver: String,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).expect("serializable metrics");
    std::fs::write(path, text + "\n").map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn round_trip_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = array![
            [1.0, -2.5e-17, std::f64::consts::PI],
            [1.0 / 3.0, 6.02214076e23, -0.0]
        ];
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn parse_error_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1.0,2.0\n3.0,oops\n").unwrap();
        let err = read_matrix(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2:"), "{msg}");
        assert!(msg.contains("oops"), "{msg}");
    }

    #[test]
    fn ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "1.0,2.0\n3.0\n").unwrap();
        assert!(matches!(
            read_matrix(&path).unwrap_err(),
            IoError::RaggedRow { line: 2, .. }
        ));
    }

    #[test]
    fn vector_round_trip_and_shape_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        let v = array![1.5, -2.5, 0.0];
        write_vector(&path, &v).unwrap();
        assert_eq!(read_vector(&path).unwrap(), v);

        let wide = dir.path().join("wide.csv");
        write_matrix(&wide, &array![[1.0, 2.0]]).unwrap();
        assert!(matches!(
            read_vector(&wide).unwrap_err(),
            IoError::NotAVector { got: 2, .. }
        ));
    }

    proptest! {
        #[test]
        fn float_round_trip_is_lossless(values in proptest::collection::vec(-1e100..1e100f64, 1..40)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.csv");
            let v = Array1::from_vec(values);
            write_vector(&path, &v).unwrap();
            let back = read_vector(&path).unwrap();
            prop_assert_eq!(v, back);
        }
    }
}
