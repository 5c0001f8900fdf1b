//! Binary recurrence matrix: packed-bit storage, binary file format, PGM export.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::metric::Metric;

const MAGIC: &[u8; 4] = b"RQM1";

/// Symmetric binary N x N matrix with its generating threshold and metric.
/// Entry (i, j) is 1 exactly when d(x_i, x_j) < epsilon, so the diagonal is
/// all ones. Rows are stored as 64-bit words, least significant bit first;
/// padding bits beyond column n-1 are always zero, which makes whole-row
/// word comparisons valid column-equality tests.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceMatrix {
    n: usize,
    epsilon: f64,
    metric: Metric,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl RecurrenceMatrix {
    pub(crate) fn zeroed(n: usize, epsilon: f64, metric: Metric) -> Self {
        let words_per_row = n.div_ceil(64);
        RecurrenceMatrix {
            n,
            epsilon,
            metric,
            words_per_row,
            bits: vec![0u64; n * words_per_row],
        }
    }

    /// Low-level constructor from explicit rows; validates the type
    /// invariants (square, symmetric, unit diagonal, positive epsilon).
    pub fn from_bits(n: usize, epsilon: f64, metric: Metric, rows: &[Vec<bool>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("matrix size must be positive".into()));
        }
        if epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "epsilon must be a positive finite real, got {epsilon}"
            )));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("rows do not form an n x n matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if !row[i] {
                return Err(Error::InvalidInput(format!("diagonal entry ({i},{i}) is 0")));
            }
            for (j, other) in rows.iter().enumerate().skip(i + 1) {
                if row[j] != other[i] {
                    return Err(Error::InvalidInput(format!(
                        "asymmetric entries at ({i},{j})"
                    )));
                }
            }
        }
        let mut m = RecurrenceMatrix::zeroed(n, epsilon, metric);
        for (i, row) in rows.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                if b {
                    m.set(i, j);
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        let w = self.bits[i * self.words_per_row + j / 64];
        (w >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words_per_row + j / 64] |= 1u64 << (j % 64);
    }

    pub(crate) fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub(crate) fn bits_mut(&mut self) -> &mut [u64] {
        &mut self.bits
    }

    /// Number of ones in row i.
    pub fn row_ones(&self, i: usize) -> u64 {
        self.row_words(i).iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Total number of ones, diagonal included.
    pub fn ones(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Ones above and below the main diagonal.
    pub fn off_diagonal_ones(&self) -> u64 {
        self.ones() - self.n as u64
    }

    /// Indices j with entry (i, j) set, ascending.
    pub fn row_indices(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.row_ones(i) as usize);
        for (w_idx, &word) in self.row_words(i).iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(w_idx * 64 + b);
                w &= w - 1;
            }
        }
        out
    }

    /// Writes the binary format: magic "RQM1", u64 n, f64 epsilon, u8 metric
    /// id (all little-endian), then ceil(n^2/8) payload bytes holding the
    /// row-major bit stream, least significant bit first within each byte.
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&self.epsilon.to_le_bytes())?;
        w.write_all(&[self.metric.id()])?;
        w.write_all(&self.packed_payload())?;
        w.flush()?;
        Ok(())
    }

    fn packed_payload(&self) -> Vec<u8> {
        let nbits = self.n * self.n;
        let mut payload = vec![0u8; nbits.div_ceil(8)];
        let mut k = 0usize;
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    payload[k >> 3] |= 1 << (k & 7);
                }
                k += 1;
            }
        }
        payload
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_file_bytes(&bytes)
    }

    fn from_file_bytes(bytes: &[u8]) -> Result<Self> {
        const HEADER: usize = 4 + 8 + 8 + 1;
        if bytes.len() < HEADER {
            return Err(Error::Format("truncated header".into()));
        }
        if &bytes[0..4] != MAGIC {
            return Err(Error::Format("bad magic (expected RQM1)".into()));
        }
        let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
        let epsilon = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let metric = Metric::from_id(bytes[20])
            .ok_or_else(|| Error::Format(format!("unknown metric id {}", bytes[20])))?;
        if n == 0 {
            return Err(Error::Format("n must be positive".into()));
        }
        if n > (1u64 << 24) {
            return Err(Error::Format(format!("n={n} exceeds the supported size")));
        }
        if epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(Error::Format(format!("invalid epsilon {epsilon}")));
        }
        let n = n as usize;
        let expected = (n * n).div_ceil(8);
        let payload = &bytes[HEADER..];
        if payload.len() != expected {
            return Err(Error::Format(format!(
                "payload of {} bytes is inconsistent with n={} (expected {})",
                payload.len(),
                n,
                expected
            )));
        }
        let mut m = RecurrenceMatrix::zeroed(n, epsilon, metric);
        let mut k = 0usize;
        for i in 0..n {
            for j in 0..n {
                if (payload[k >> 3] >> (k & 7)) & 1 == 1 {
                    m.set(i, j);
                }
                k += 1;
            }
        }
        for i in 0..n {
            if !m.get(i, i) {
                return Err(Error::Format(format!("diagonal entry ({i},{i}) is 0")));
            }
            for j in (i + 1)..n {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::Format(format!("asymmetric entries at ({i},{j})")));
                }
            }
        }
        Ok(m)
    }

    /// Writes a binary PGM (P5) image, one pixel per matrix entry:
    /// black (0) where the entry is 1, white (255) where it is 0.
    pub fn export_pgm<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        write!(w, "P5\n{} {}\n255\n", self.n, self.n)?;
        let mut row = vec![0u8; self.n];
        for i in 0..self.n {
            for (j, px) in row.iter_mut().enumerate() {
                *px = if self.get(i, j) { 0 } else { 255 };
            }
            w.write_all(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
