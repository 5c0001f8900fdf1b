//! Recurrence matrix construction and threshold calibration.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::RecurrenceMatrix;
use crate::metric::Metric;
use crate::trajectory::Trajectory;

/// Pair-subsample budget for calibration; below this many pairs the exact
/// distance multiset is used directly.
const MAX_EXACT_PAIRS: u64 = 2_000_000;
/// Internal calibration seed. The operation takes no seed argument but must
/// be deterministic, so the subsample stream is fixed.
const CALIBRATION_SEED: u64 = 0x5eed_0001;

/// Builds the recurrence matrix: entry (i, j) = 1 iff d(x_i, x_j) < epsilon,
/// with a strict inequality, so pairs at distance exactly epsilon stay 0.
/// Uses uniform grid binning when profitable; the result is bit-identical
/// to the direct double loop.
pub fn build_matrix(
    traj: &Trajectory,
    epsilon: f64,
    metric: Metric,
) -> Result<RecurrenceMatrix> {
    validate_epsilon(epsilon)?;
    if grid_applicable(traj, epsilon) {
        Ok(build_grid(traj, epsilon, metric))
    } else {
        Ok(build_naive_inner(traj, epsilon, metric))
    }
}

/// Direct O(N^2) double-loop construction, kept public as the oracle the
/// accelerated path is tested against.
pub fn build_matrix_naive(
    traj: &Trajectory,
    epsilon: f64,
    metric: Metric,
) -> Result<RecurrenceMatrix> {
    validate_epsilon(epsilon)?;
    Ok(build_naive_inner(traj, epsilon, metric))
}

fn validate_epsilon(epsilon: f64) -> Result<()> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidInput(format!(
            "epsilon must be a positive finite real, got {epsilon}"
        )));
    }
    Ok(())
}

fn build_naive_inner(traj: &Trajectory, epsilon: f64, metric: Metric) -> RecurrenceMatrix {
    let n = traj.len();
    let mut m = RecurrenceMatrix::zeroed(n, epsilon, metric);
    let wpr = m.words_per_row();
    // Each worker fills one row with its above-diagonal neighbors; the lower
    // triangle is mirrored afterwards, so no shared mutable state exists.
    m.bits_mut()
        .par_chunks_mut(wpr)
        .enumerate()
        .for_each(|(i, row)| {
            row[i / 64] |= 1u64 << (i % 64);
            let pi = traj.point(i);
            for j in (i + 1)..n {
                if metric.dist(pi, traj.point(j)) < epsilon {
                    row[j / 64] |= 1u64 << (j % 64);
                }
            }
        });
    mirror_upper(&mut m);
    m
}

/// Copies every above-diagonal bit to its transposed position.
fn mirror_upper(m: &mut RecurrenceMatrix) {
    let n = m.n();
    for i in 0..n {
        for j in upper_indices(m, i) {
            m.set(j, i);
        }
    }
}

fn upper_indices(m: &RecurrenceMatrix, i: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let row = m.row_words(i);
    let first_word = (i + 1) / 64;
    for (w_idx, &word) in row.iter().enumerate().skip(first_word) {
        let mut w = word;
        if w_idx == first_word {
            let shift = (i + 1) % 64;
            if shift != 0 {
                w &= !0u64 << shift;
            }
        }
        while w != 0 {
            out.push(w_idx * 64 + w.trailing_zeros() as usize);
            w &= w - 1;
        }
    }
    out
}

const GRID_MAX_DIM: usize = 4;
/// Above this coordinate-to-epsilon ratio the floor-division cell mapping
/// loses the one-cell adjacency guarantee to rounding, so fall back.
const GRID_MAX_RATIO: f64 = 1e6;

fn grid_applicable(traj: &Trajectory, epsilon: f64) -> bool {
    if traj.dim() > GRID_MAX_DIM || traj.len() < 128 {
        return false;
    }
    traj.coords().iter().all(|v| v.abs() / epsilon <= GRID_MAX_RATIO)
}

struct Grid {
    side: f64,
    cells: HashMap<[i64; GRID_MAX_DIM], Vec<u32>>,
    offsets: Vec<[i64; GRID_MAX_DIM]>,
    dim: usize,
}

impl Grid {
    fn build(traj: &Trajectory, epsilon: f64) -> Grid {
        // A hair over epsilon: points within epsilon then differ by strictly
        // less than one cell side per coordinate even after rounding.
        let side = epsilon * (1.0 + 1e-9);
        let dim = traj.dim();
        let mut cells: HashMap<[i64; GRID_MAX_DIM], Vec<u32>> = HashMap::new();
        for (i, p) in traj.points().enumerate() {
            cells.entry(Self::key(p, side)).or_default().push(i as u32);
        }
        let mut offsets = vec![[0i64; GRID_MAX_DIM]];
        for d in 0..dim {
            let mut next = Vec::with_capacity(offsets.len() * 3);
            for off in &offsets {
                for delta in [-1i64, 0, 1] {
                    let mut o = *off;
                    o[d] = delta;
                    next.push(o);
                }
            }
            offsets = next;
        }
        Grid { side, cells, offsets, dim }
    }

    fn key(p: &[f64], side: f64) -> [i64; GRID_MAX_DIM] {
        let mut k = [0i64; GRID_MAX_DIM];
        for (d, &x) in p.iter().enumerate() {
            k[d] = (x / side).floor() as i64;
        }
        k
    }

    /// Calls `visit` for every candidate index in the 3^dim neighborhood.
    /// Candidates form a superset of the true epsilon-neighbors under every
    /// supported metric (all dominate the maximum norm).
    fn for_candidates<F: FnMut(u32)>(&self, p: &[f64], mut visit: F) {
        let base = Self::key(p, self.side);
        for off in &self.offsets {
            let mut k = base;
            for d in 0..self.dim {
                k[d] += off[d];
            }
            if let Some(list) = self.cells.get(&k) {
                for &j in list {
                    visit(j);
                }
            }
        }
    }
}

fn build_grid(traj: &Trajectory, epsilon: f64, metric: Metric) -> RecurrenceMatrix {
    let n = traj.len();
    let grid = Grid::build(traj, epsilon);
    let mut m = RecurrenceMatrix::zeroed(n, epsilon, metric);
    let wpr = m.words_per_row();
    m.bits_mut()
        .par_chunks_mut(wpr)
        .enumerate()
        .for_each(|(i, row)| {
            row[i / 64] |= 1u64 << (i % 64);
            let pi = traj.point(i);
            grid.for_candidates(pi, |j| {
                let j = j as usize;
                if j > i && metric.dist(pi, traj.point(j)) < epsilon {
                    row[j / 64] |= 1u64 << (j % 64);
                }
            });
        });
    mirror_upper(&mut m);
    m
}

/// Number of unordered pairs (i, j), i < j, with d(x_i, x_j) < epsilon.
pub(crate) fn count_neighbor_pairs(traj: &Trajectory, epsilon: f64, metric: Metric) -> u64 {
    let n = traj.len();
    if grid_applicable(traj, epsilon) {
        let grid = Grid::build(traj, epsilon);
        (0..n)
            .into_par_iter()
            .map(|i| {
                let pi = traj.point(i);
                let mut count = 0u64;
                grid.for_candidates(pi, |j| {
                    let j = j as usize;
                    if j > i && metric.dist(pi, traj.point(j)) < epsilon {
                        count += 1;
                    }
                });
                count
            })
            .sum()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let pi = traj.point(i);
                ((i + 1)..n)
                    .filter(|&j| metric.dist(pi, traj.point(j)) < epsilon)
                    .count() as u64
            })
            .sum()
    }
}

/// Calibration outcome: the threshold whose off-diagonal recurrence rate is
/// nearest the target among the candidates examined, with the exact rate it
/// achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonCalibration {
    pub target_rate: f64,
    pub achieved_rate: f64,
    pub epsilon: f64,
}

/// Smallest f64 strictly greater than x (x finite, nonnegative here).
pub(crate) fn next_after_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::MIN_POSITIVE
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

/// Finds epsilon whose off-diagonal recurrence rate best matches the target.
/// Up to `MAX_EXACT_PAIRS` pairs the full distance multiset decides exactly;
/// beyond that a seeded subsample quantile is refined by bisection on the
/// exactly counted rate.
pub fn calibrate_epsilon(
    traj: &Trajectory,
    target_rate: f64,
    metric: Metric,
) -> Result<EpsilonCalibration> {
    let n = traj.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "calibration needs at least 2 points".into(),
        ));
    }
    if !(target_rate > 0.0 && target_rate <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "target rate must lie in (0, 1], got {target_rate}"
        )));
    }
    let first = traj.point(0);
    if (1..n).all(|i| traj.point(i) == first) {
        return Err(Error::Calibration(
            "all points identical: the recurrence rate is 1 for every positive threshold".into(),
        ));
    }
    let pairs = (n as u64) * (n as u64 - 1) / 2;
    if pairs <= MAX_EXACT_PAIRS {
        calibrate_exact(traj, target_rate, metric, pairs)
    } else {
        calibrate_sampled(traj, target_rate, metric, pairs)
    }
}

fn calibrate_exact(
    traj: &Trajectory,
    target: f64,
    metric: Metric,
    pairs: u64,
) -> Result<EpsilonCalibration> {
    let n = traj.len();
    let mut dists = Vec::with_capacity(pairs as usize);
    for i in 0..n {
        let pi = traj.point(i);
        for j in (i + 1)..n {
            dists.push(metric.dist(pi, traj.point(j)));
        }
    }
    dists.sort_unstable_by(f64::total_cmp);
    let total = pairs as f64;
    let mut best: Option<(f64, f64)> = None; // (epsilon, achieved)
    let mut consider = |eps: f64, below: u64| {
        if eps <= 0.0 {
            return;
        }
        let achieved = below as f64 / total;
        let better = match best {
            None => true,
            Some((_, a)) => (achieved - target).abs() < (a - target).abs(),
        };
        if better {
            best = Some((eps, achieved));
        }
    };
    let mut idx = 0usize;
    while idx < dists.len() {
        let v = dists[idx];
        consider(v, idx as u64); // strict threshold: counts distances < v
        let mut end = idx + 1;
        while end < dists.len() && dists[end] == v {
            end += 1;
        }
        idx = end;
    }
    consider(next_after_up(*dists.last().unwrap()), pairs);
    let (epsilon, achieved_rate) = best.expect("non-degenerate input has candidates");
    Ok(EpsilonCalibration {
        target_rate: target,
        achieved_rate,
        epsilon,
    })
}

fn calibrate_sampled(
    traj: &Trajectory,
    target: f64,
    metric: Metric,
    pairs: u64,
) -> Result<EpsilonCalibration> {
    let n = traj.len();
    let mut rng = ChaCha8Rng::seed_from_u64(CALIBRATION_SEED);
    let mut sample = Vec::with_capacity(MAX_EXACT_PAIRS as usize);
    while sample.len() < MAX_EXACT_PAIRS as usize {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            sample.push(metric.dist(traj.point(i), traj.point(j)));
        }
    }
    sample.sort_unstable_by(f64::total_cmp);
    let guess_idx = ((target * sample.len() as f64) as usize).min(sample.len() - 1);
    let total = pairs as f64;
    let rate_at = |eps: f64| count_neighbor_pairs(traj, eps, metric) as f64 / total;

    let mut best = (f64::NAN, f64::INFINITY); // (epsilon, |achieved - target|)
    let mut best_rate = 0.0;
    let consider = |eps: f64, rate: f64, best: &mut (f64, f64), best_rate: &mut f64| {
        let diff = (rate - target).abs();
        if diff < best.1 {
            *best = (eps, diff);
            *best_rate = rate;
        }
    };

    let guess = sample[guess_idx].max(f64::MIN_POSITIVE);
    let r_guess = rate_at(guess);
    consider(guess, r_guess, &mut best, &mut best_rate);

    // Bracket the target, then bisect on the exact counted rate.
    let mut hi = next_after_up(*sample.last().unwrap());
    let mut r_hi = rate_at(hi);
    let mut grow = 0;
    while r_hi < target && grow < 64 {
        hi *= 2.0;
        r_hi = rate_at(hi);
        grow += 1;
    }
    consider(hi, r_hi, &mut best, &mut best_rate);
    let mut lo = 0.0f64;
    for _ in 0..40 {
        if best.1 == 0.0 || (hi - lo) <= hi * 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = rate_at(mid);
        consider(mid, r, &mut best, &mut best_rate);
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EpsilonCalibration {
        target_rate: target,
        achieved_rate: best_rate,
        epsilon: best.0,
    })
}
