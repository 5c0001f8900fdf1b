//! Invariant estimation from the recurrence matrix: recurrence rate,
//! diagonal-segment statistics, the correlation entropy K2, and the
//! correlation sum underlying D2 estimates.

use crate::error::{Error, Result};
use crate::matrix::RecurrenceMatrix;
use crate::metric::Metric;
use crate::recmat::count_neighbor_pairs;
use crate::trajectory::Trajectory;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;

/// Density of recurrent pairs, excluding the main diagonal.
pub fn recurrence_rate(r: &RecurrenceMatrix) -> Result<f64> {
    let n = r.n();
    if n < 2 {
        return Err(Error::InvalidInput(
            "recurrence rate needs at least 2 points".into(),
        ));
    }
    Ok(r.off_diagonal_ones() as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// Counts of maximal diagonal segments of recurrent entries, excluding the
/// main diagonal. Both triangles are counted, so every length appears an
/// even number of times.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHistogram {
    counts: BTreeMap<usize, u64>,
    epsilon: f64,
    n: usize,
}

impl DiagonalHistogram {
    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of segments.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Number of segments of length >= l.
    pub fn cumulative(&self, l: usize) -> u64 {
        self.counts.range(l..).map(|(_, &c)| c).sum()
    }

    /// Two-column CSV: length,count in increasing length order.
    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "# epsilon={}", self.epsilon)?;
        writeln!(out, "length,count")?;
        for (l, c) in &self.counts {
            writeln!(out, "{l},{c}")?;
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Histogram of maximal runs of 1s along every off-main diagonal, keeping
/// lengths >= lmin. Runs in the upper triangle are counted twice since the
/// matrix is symmetric.
pub fn diagonal_histogram(r: &RecurrenceMatrix, lmin: usize) -> Result<DiagonalHistogram> {
    if lmin == 0 {
        return Err(Error::InvalidInput("lmin must be >= 1".into()));
    }
    let n = r.n();
    let per_offset: Vec<Vec<usize>> = (1..n)
        .into_par_iter()
        .map(|k| {
            let mut runs = Vec::new();
            let mut len = 0usize;
            for i in 0..(n - k) {
                if r.get(i, i + k) {
                    len += 1;
                } else if len > 0 {
                    if len >= lmin {
                        runs.push(len);
                    }
                    len = 0;
                }
            }
            if len >= lmin {
                runs.push(len);
            }
            runs
        })
        .collect();
    let mut counts = BTreeMap::new();
    for runs in per_offset {
        for l in runs {
            *counts.entry(l).or_insert(0u64) += 2;
        }
    }
    Ok(DiagonalHistogram {
        counts,
        epsilon: r.epsilon(),
        n,
    })
}

/// Minimum cumulative segment count required at every length used in the
/// K2 fit.
pub const K2_MIN_SEGMENTS: u64 = 100;

/// Correlation entropy K2 from the decay of diagonal-segment statistics:
/// the least-squares slope of -ln P(length >= l) against l*dt over the
/// given length range.
pub fn estimate_k2(
    traj: &Trajectory,
    epsilon: f64,
    metric: Metric,
    lrange: RangeInclusive<usize>,
) -> Result<f64> {
    let (lo, hi) = (*lrange.start(), *lrange.end());
    if lo < 1 || hi < lo + 1 {
        return Err(Error::InvalidInput(format!(
            "length range {lo}..={hi} must start at 1 or above and span at least two lengths"
        )));
    }
    let r = crate::recmat::build_matrix(traj, epsilon, metric)?;
    let hist = diagonal_histogram(&r, 1)?;
    let total = hist.total();
    let mut deficient = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for l in lo..=hi {
        let cum = hist.cumulative(l);
        if cum < K2_MIN_SEGMENTS {
            deficient.push(l.to_string());
            continue;
        }
        xs.push(l as f64 * traj.dt());
        ys.push(-((cum as f64 / total as f64).ln()));
    }
    if !deficient.is_empty() {
        return Err(Error::InsufficientData(format!(
            "fewer than {K2_MIN_SEGMENTS} diagonal segments at lengths {}",
            deficient.join(", ")
        )));
    }
    let (slope, _, _) = least_squares(&xs, &ys);
    Ok(slope)
}

/// Correlation sum at each threshold: the fraction of off-diagonal pairs
/// closer than epsilon. Thresholds must be positive and strictly ascending.
pub fn correlation_sum(
    traj: &Trajectory,
    epsilons: &[f64],
    metric: Metric,
) -> Result<Vec<(f64, f64)>> {
    let n = traj.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "correlation sum needs at least 2 points".into(),
        ));
    }
    if epsilons.is_empty() {
        return Err(Error::InvalidInput("no thresholds given".into()));
    }
    for w in epsilons.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidInput(
                "thresholds must be strictly ascending".into(),
            ));
        }
    }
    if !epsilons[0].is_finite() || epsilons[0] <= 0.0 {
        return Err(Error::InvalidInput("thresholds must be positive".into()));
    }
    let pairs_total = n as f64 * (n as f64 - 1.0) / 2.0;
    Ok(epsilons
        .iter()
        .map(|&eps| {
            let pairs = count_neighbor_pairs(traj, eps, metric);
            (eps, pairs as f64 / pairs_total)
        })
        .collect())
}

/// Log-log least-squares fit of a correlation-sum curve: returns the slope
/// (a D2 estimate) and the RMS residual of the fit. Points with zero C are
/// skipped; at least two usable points are required.
pub fn d2_slope(curve: &[(f64, f64)]) -> Result<(f64, f64)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(eps, c) in curve {
        if c > 0.0 {
            xs.push(eps.ln());
            ys.push(c.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "log-log fit needs at least 2 nonzero points, have {}",
            xs.len()
        )));
    }
    let (slope, _intercept, rms) = least_squares(&xs, &ys);
    Ok((slope, rms))
}

/// Ordinary least squares of y on x: (slope, intercept, rms residual).
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    debug_assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - (slope * x + intercept);
        ss += e * e;
    }
    (slope, intercept, (ss / n).sqrt())
}
