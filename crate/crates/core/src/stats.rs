//! Return-time statistics: extraction of recurrence times from a matrix row
//! and tests of the three limit-law properties (exponential interarrival
//! distribution, independence of successive times, Poisson visit counts).

use crate::error::{Error, Result};
use crate::matrix::RecurrenceMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::io::Write;
use std::path::Path;

/// Minimum sample size for the exponential and independence tests.
pub const MIN_SAMPLE: usize = 50;
/// Minimum number of disjoint windows for the count test.
pub const MIN_WINDOWS: usize = 30;
const PERMUTATIONS: usize = 1000;

/// Successive recurrence times of the reference point's neighborhood.
///
/// Consecutive recurrent samples count as a single visit (the orbit lingers
/// inside the ball); each time is the gap in samples between one visit start
/// and the next.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTimeSample {
    pub reference_index: usize,
    pub epsilon: f64,
    pub times: Vec<u64>,
}

impl ReturnTimeSample {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Write the raw times as single-column CSV with a small comment header.
    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "# reference_index={}", self.reference_index)?;
        writeln!(out, "# epsilon={}", self.epsilon)?;
        for t in &self.times {
            writeln!(out, "{t}")?;
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Indices j > i where a visit to point i's neighborhood begins: the bit is
/// set and the previous suffix bit is not. The first recurrent sample after
/// i always starts a visit.
pub(crate) fn visit_starts(r: &RecurrenceMatrix, i: usize) -> Vec<usize> {
    let n = r.n();
    let mut out = Vec::new();
    let mut prev = false;
    for j in (i + 1)..n {
        let cur = r.get(i, j);
        if cur && !prev {
            out.push(j);
        }
        prev = cur;
    }
    out
}

/// Smallest n >= 1 with R[i][i+n] = 1, or None when the observed window
/// holds no later recurrence.
pub fn first_return_time(r: &RecurrenceMatrix, i: usize) -> Result<Option<u64>> {
    check_index(r, i)?;
    for j in (i + 1)..r.n() {
        if r.get(i, j) {
            return Ok(Some((j - i) as u64));
        }
    }
    Ok(None)
}

/// Gaps between successive visit starts in row i. Fewer than two visits
/// give an empty sample, not an error.
pub fn return_times(r: &RecurrenceMatrix, i: usize) -> Result<ReturnTimeSample> {
    check_index(r, i)?;
    let starts = visit_starts(r, i);
    let times = starts.windows(2).map(|w| (w[1] - w[0]) as u64).collect();
    Ok(ReturnTimeSample {
        reference_index: i,
        epsilon: r.epsilon(),
        times,
    })
}

fn check_index(r: &RecurrenceMatrix, i: usize) -> Result<()> {
    if i >= r.n() {
        return Err(Error::InvalidInput(format!(
            "reference index {} out of range for a matrix of size {}",
            i,
            r.n()
        )));
    }
    Ok(())
}

/// Kolmogorov-Smirnov test of the return times against an exponential law.
#[derive(Debug, Clone)]
pub struct ExponentialTest {
    /// KS statistic D of the normalized sample.
    pub statistic: f64,
    /// Asymptotic two-sided p-value.
    pub p_value: f64,
    /// Mean of the raw integer times.
    pub mean: f64,
}

/// Test the times against a unit exponential after normalizing by the
/// sample mean. Integer times are dequantized by subtracting a seeded
/// uniform offset in [0,1), spreading each t over (t-1, t]; without this the
/// lattice alone would reject even perfectly geometric samples.
pub fn test_exponential(sample: &ReturnTimeSample, seed: u64) -> Result<ExponentialTest> {
    let n = sample.times.len();
    if n < MIN_SAMPLE {
        return Err(Error::InsufficientData(format!(
            "exponential test needs at least {MIN_SAMPLE} return times, have {n}"
        )));
    }
    let mean_raw = sample.times.iter().map(|&t| t as f64).sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deq: Vec<f64> = sample
        .times
        .iter()
        .map(|&t| t as f64 - rng.gen::<f64>())
        .collect();
    let mean_deq = deq.iter().sum::<f64>() / n as f64;
    for z in deq.iter_mut() {
        *z /= mean_deq;
    }
    deq.sort_unstable_by(f64::total_cmp);
    let nf = n as f64;
    let mut d = 0.0f64;
    for (k, &z) in deq.iter().enumerate() {
        let f = 1.0 - (-z).exp();
        let hi = (k + 1) as f64 / nf - f;
        let lo = f - k as f64 / nf;
        d = d.max(hi).max(lo);
    }
    Ok(ExponentialTest {
        statistic: d,
        p_value: kolmogorov_sf(nf.sqrt() * d),
        mean: mean_raw,
    })
}

/// Survival function of the Kolmogorov distribution,
/// P(K > lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
pub(crate) fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0f64;
    for j in 1..=100u32 {
        let term = (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        if j % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Lag-1 autocorrelation with a permutation-test p-value.
///
/// Both fields are None when the sequence (or its lag-1 slice) has no
/// variance, in which case the autocorrelation is undefined.
#[derive(Debug, Clone)]
pub struct IndependenceTest {
    pub autocorrelation: Option<f64>,
    pub p_value: Option<f64>,
}

/// Permutation test of the lag-1 Pearson autocorrelation: the observed
/// |r| is ranked against 1000 seeded shuffles of the sequence.
pub fn test_independence(sample: &ReturnTimeSample, seed: u64) -> Result<IndependenceTest> {
    let n = sample.times.len();
    if n < MIN_SAMPLE {
        return Err(Error::InsufficientData(format!(
            "independence test needs at least {MIN_SAMPLE} return times, have {n}"
        )));
    }
    let x: Vec<f64> = sample.times.iter().map(|&t| t as f64).collect();
    let r_obs = match lag1_autocorrelation(&x) {
        Some(r) => r,
        None => {
            return Ok(IndependenceTest {
                autocorrelation: None,
                p_value: None,
            })
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm = x.clone();
    let mut exceed = 0usize;
    for _ in 0..PERMUTATIONS {
        perm.shuffle(&mut rng);
        // An undefined permuted correlation counts against independence,
        // which is the conservative direction.
        match lag1_autocorrelation(&perm) {
            Some(rp) if rp.abs() >= r_obs.abs() => exceed += 1,
            None => exceed += 1,
            _ => {}
        }
    }
    let p = (1 + exceed) as f64 / (PERMUTATIONS + 1) as f64;
    Ok(IndependenceTest {
        autocorrelation: Some(r_obs),
        p_value: Some(p),
    })
}

fn lag1_autocorrelation(x: &[f64]) -> Option<f64> {
    let m = x.len() - 1;
    let lead = &x[..m];
    let lag = &x[1..];
    if is_constant(lead) || is_constant(lag) {
        return None;
    }
    let mf = m as f64;
    let ma = lead.iter().sum::<f64>() / mf;
    let mb = lag.iter().sum::<f64>() / mf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in lead.iter().zip(lag) {
        let da = a - ma;
        let db = b - mb;
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// Dispersion and goodness-of-fit of per-window visit counts.
#[derive(Debug, Clone)]
pub struct PoissonTest {
    /// Sample variance over mean of the per-window counts; 1 under Poisson.
    pub dispersion: f64,
    /// Chi-square goodness-of-fit p-value against Poisson(empirical mean).
    pub p_value: f64,
    pub windows: usize,
    pub mean_count: f64,
}

/// Count visit starts in disjoint windows after the reference index and
/// compare the counts to a Poisson law with the empirical mean.
pub fn test_poisson_counts(r: &RecurrenceMatrix, i: usize, window: usize) -> Result<PoissonTest> {
    check_index(r, i)?;
    if window == 0 {
        return Err(Error::InvalidInput("window length must be >= 1".into()));
    }
    let suffix_len = r.n() - i - 1;
    let n_windows = suffix_len / window;
    if n_windows < MIN_WINDOWS {
        return Err(Error::InsufficientData(format!(
            "count test needs at least {MIN_WINDOWS} disjoint windows, have {n_windows}"
        )));
    }
    let mut counts = vec![0u64; n_windows];
    for s in visit_starts(r, i) {
        let offset = s - (i + 1);
        let w = offset / window;
        if w < n_windows {
            counts[w] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InsufficientData(
            "no visits after the reference index".into(),
        ));
    }
    let wf = n_windows as f64;
    let mean = total as f64 / wf;
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / (wf - 1.0);
    let p_value = poisson_gof(&counts, mean)?;
    Ok(PoissonTest {
        dispersion: var / mean,
        p_value,
        windows: n_windows,
        mean_count: mean,
    })
}

/// Chi-square goodness of fit of observed counts against Poisson(lambda),
/// pooling adjacent count values until each bin expects at least 5, with
/// one degree of freedom charged for the estimated mean.
fn poisson_gof(counts: &[u64], lambda: f64) -> Result<f64> {
    let w = counts.len() as f64;
    let kmax = *counts.iter().max().expect("nonempty") as usize;
    let mut obs = vec![0u64; kmax + 1];
    for &c in counts {
        obs[c as usize] += 1;
    }
    let mut pmf = Vec::with_capacity(kmax + 1);
    let mut p = (-lambda).exp();
    pmf.push(p);
    for k in 1..=kmax {
        p *= lambda / k as f64;
        pmf.push(p);
    }
    let tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc_e = 0.0f64;
    let mut acc_o = 0.0f64;
    for k in 0..=kmax {
        acc_e += pmf[k] * w;
        acc_o += obs[k] as f64;
        if acc_e >= 5.0 {
            bins.push((acc_e, acc_o));
            acc_e = 0.0;
            acc_o = 0.0;
        }
    }
    acc_e += tail * w;
    if acc_e > 0.0 || acc_o > 0.0 {
        if acc_e >= 5.0 || bins.is_empty() {
            bins.push((acc_e, acc_o));
        } else if let Some(last) = bins.last_mut() {
            last.0 += acc_e;
            last.1 += acc_o;
        }
    }
    if bins.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "chi-square needs at least 3 pooled count bins, have {}",
            bins.len()
        )));
    }
    let stat: f64 = bins.iter().map(|&(e, o)| (o - e) * (o - e) / e).sum();
    let dof = (bins.len() - 2) as f64;
    let dist = ChiSquared::new(dof).expect("dof >= 1");
    Ok((1.0 - dist.cdf(stat)).clamp(0.0, 1.0))
}
