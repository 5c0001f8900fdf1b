//! Synchronization analysis: similarity of two recurrence matrices through
//! the correlation of their simultaneous recurrences.

use crate::error::{Error, Result};
use crate::matrix::RecurrenceMatrix;

/// Pearson correlation between the off-diagonal bit sequences of two
/// matrices of equal size. Identical matrices give exactly 1.
///
/// All sums are integer bit counts, so the result is exact up to the final
/// division and identical across runs and thread counts.
pub fn sync_index(rx: &RecurrenceMatrix, ry: &RecurrenceMatrix) -> Result<f64> {
    let n = rx.n();
    if ry.n() != n {
        return Err(Error::InvalidInput(format!(
            "matrix sizes differ: {} vs {}",
            n,
            ry.n()
        )));
    }
    if n < 2 {
        return Err(Error::Degenerate(
            "synchronization index needs at least 2 points".into(),
        ));
    }
    let m = (n as u64) * (n as u64 - 1);
    let sx = rx.off_diagonal_ones();
    let sy = ry.off_diagonal_ones();
    if sx == 0 || sx == m || sy == 0 || sy == m {
        return Err(Error::Degenerate(
            "a matrix with constant off-diagonal bits has no variance to correlate".into(),
        ));
    }
    let mut identical = true;
    let mut sxy: u64 = 0;
    for i in 0..n {
        let a = rx.row_words(i);
        let b = ry.row_words(i);
        if identical && a != b {
            identical = false;
        }
        sxy += a
            .iter()
            .zip(b)
            .map(|(x, y)| (x & y).count_ones() as u64)
            .sum::<u64>();
    }
    if identical {
        return Ok(1.0);
    }
    // The diagonal is 1 in both matrices; remove its contribution.
    let sxy = sxy - n as u64;
    let m = m as i128;
    let (sx, sy, sxy) = (sx as i128, sy as i128, sxy as i128);
    let num = m * sxy - sx * sy;
    let den_x = m * sx - sx * sx;
    let den_y = m * sy - sy * sy;
    Ok(num as f64 / ((den_x as f64) * (den_y as f64)).sqrt())
}
