//! Trajectory container and its CSV serialization.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered finite sequence of points in d-dimensional real space with a
/// uniform time step (dt = 1 for maps). Immutable after construction;
/// every coordinate is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    dt: f64,
    data: Vec<f64>, // row-major, len = n * dim
}

impl Trajectory {
    pub fn new(dim: usize, dt: f64, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::InvalidInput(format!(
                "time step must be a positive finite real, got {dt}"
            )));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "coordinate buffer length {} is not a positive multiple of dim {}",
                data.len(),
                dim
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite coordinate at sample {}, component {}",
                bad / dim,
                bad % dim
            )));
        }
        Ok(Trajectory { dim, dt, data })
    }

    pub fn from_rows(rows: &[Vec<f64>], dt: f64) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::InvalidInput("ragged rows".into()));
            }
            data.extend_from_slice(row);
        }
        Trajectory::new(dim, dt, data)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // N >= 1 by construction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.data
    }

    /// Same points under a different time step.
    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::InvalidInput(format!(
                "time step must be a positive finite real, got {dt}"
            )));
        }
        self.dt = dt;
        Ok(self)
    }

    /// Writes the trajectory as CSV: '#' comment lines carrying key=value
    /// metadata, then one comma-separated sample per row. Floats are printed
    /// in the shortest form that parses back to the identical bits.
    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.save_csv_with_comments(path, &[])
    }

    pub fn save_csv_with_comments<P: AsRef<Path>>(
        &self,
        path: P,
        comments: &[(&str, String)],
    ) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# dt={}", self.dt)?;
        for (key, value) in comments {
            writeln!(w, "# {key}={value}")?;
        }
        for p in self.points() {
            let mut first = true;
            for v in p {
                if !first {
                    write!(w, ",")?;
                }
                write!(w, "{v}")?;
                first = false;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV format written by `save_csv`. The dimension is inferred
    /// from the first data row; a `# dt=` comment restores the time step
    /// (default 1). Errors carry the offending 1-based line number.
    pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut dt = 1.0f64;
        let mut dim = 0usize;
        let mut data = Vec::new();
        let mut rows = 0usize;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once('=') {
                    if key.trim() == "dt" {
                        dt = value.trim().parse::<f64>().map_err(|_| Error::Parse {
                            line: lineno,
                            message: format!("invalid dt value '{}'", value.trim()),
                        })?;
                    }
                }
                continue;
            }
            let mut row = Vec::new();
            for cell in trimmed.split(',') {
                let cell = cell.trim();
                let v = cell.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid number '{cell}'"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("non-finite value '{cell}'"),
                    });
                }
                row.push(v);
            }
            if dim == 0 {
                dim = row.len();
            } else if row.len() != dim {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("ragged row: expected {} columns, found {}", dim, row.len()),
                });
            }
            data.extend_from_slice(&row);
            rows += 1;
        }
        if rows == 0 {
            return Err(Error::Parse {
                line: 1,
                message: "no data rows".into(),
            });
        }
        Trajectory::new(dim, dt, data)
    }
}
