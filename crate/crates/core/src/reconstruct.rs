//! Trajectory reconstruction from a binary recurrence matrix.
//!
//! The matrix alone fixes each point's recurrence neighborhood, and those
//! neighborhoods carry enough geometry to rebuild the trajectory up to a
//! homeomorphism. The pipeline here goes: collapse twin columns, turn
//! neighborhood overlap into a dissimilarity (Jaccard), complete saturated
//! pairs through shortest paths, embed with classical scaling plus stress
//! majorization, and re-expand twins onto coincident points.

use crate::error::{Error, Result};
use crate::matrix::RecurrenceMatrix;
use crate::mds;
use crate::recmat::{build_matrix, next_after_up};
use crate::separation::collapse_twins;
use crate::trajectory::Trajectory;
use rayon::prelude::*;

/// Dense symmetric matrix of pairwise dissimilarities with a zero diagonal.
#[derive(Debug, Clone)]
pub struct ProxyDistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl ProxyDistanceMatrix {
    /// Build from a row-major n x n value matrix. The values must be finite
    /// and nonnegative with a zero diagonal and exact symmetry.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} values for a {n} x {n} matrix, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry {i} is {}, not zero",
                    values[i * n + i]
                )));
            }
            for j in (i + 1)..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "dissimilarity ({i},{j}) = {v} is not finite and nonnegative"
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidInput(format!(
                        "dissimilarities ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        Ok(ProxyDistanceMatrix { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Row-major flat view, length n*n.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Upper-triangle values (i < j) in row-major pair order.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.values[i * n + j]);
            }
        }
        out
    }
}

/// Jaccard dissimilarity between recurrence neighborhoods:
/// 1 - |N_i intersect N_j| / |N_i union N_j|. Identical columns give exactly
/// zero; disjoint neighborhoods give exactly one. The union is never empty
/// because every neighborhood contains its own index.
pub fn proxy_distances(r: &RecurrenceMatrix) -> ProxyDistanceMatrix {
    let n = r.n();
    let ones: Vec<u32> = (0..n).map(|i| r.row_ones(i) as u32).collect();
    let mut values = vec![0.0f64; n * n];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row_out)| {
            let wi = r.row_words(i);
            for j in (i + 1)..n {
                let wj = r.row_words(j);
                let inter: u32 = wi
                    .iter()
                    .zip(wj)
                    .map(|(a, b)| (a & b).count_ones())
                    .sum();
                let union = ones[i] + ones[j] - inter;
                row_out[j] = 1.0 - inter as f64 / union as f64;
            }
        });
    for i in 0..n {
        for j in (i + 1)..n {
            values[j * n + i] = values[i * n + j];
        }
    }
    ProxyDistanceMatrix { n, values }
}

/// Replace each saturated dissimilarity (value 1, disjoint neighborhoods)
/// with the shortest-path distance through unsaturated edges, then rescale
/// so the largest value is 1. Pairs left unreachable get 1.5 times the
/// largest finite path length. This turns the locally faithful Jaccard
/// values into a globally usable dissimilarity.
pub fn geodesic_completion(proxy: &ProxyDistanceMatrix) -> ProxyDistanceMatrix {
    let n = proxy.n;
    let delta = &proxy.values;
    let mut completed = vec![0.0f64; n * n];
    completed
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(src, row_out)| {
            dijkstra_row(delta, n, src, row_out);
        });
    // Shortest paths are symmetric in exact arithmetic but the summation
    // order differs per direction; take the upper-triangle value for both.
    for i in 0..n {
        for j in (i + 1)..n {
            completed[j * n + i] = completed[i * n + j];
        }
    }
    let mut max_finite = 0.0f64;
    let mut any_infinite = false;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = completed[i * n + j];
            if v.is_finite() {
                max_finite = max_finite.max(v);
            } else {
                any_infinite = true;
            }
        }
    }
    if any_infinite {
        let fill = if max_finite > 0.0 { 1.5 * max_finite } else { 1.0 };
        for v in completed.iter_mut() {
            if !v.is_finite() {
                *v = fill;
            }
        }
    }
    let max_all = if any_infinite {
        if max_finite > 0.0 {
            1.5 * max_finite
        } else {
            1.0
        }
    } else {
        max_finite
    };
    if max_all > 0.0 {
        for v in completed.iter_mut() {
            *v /= max_all;
        }
    }
    ProxyDistanceMatrix {
        n,
        values: completed,
    }
}

/// Dense Dijkstra from `src` over edges with weight delta < 1.
fn dijkstra_row(delta: &[f64], n: usize, src: usize, dist: &mut [f64]) {
    dist.fill(f64::INFINITY);
    dist[src] = 0.0;
    let mut visited = vec![false; n];
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut du = f64::INFINITY;
        for (v, (&d, &vis)) in dist.iter().zip(&visited).enumerate() {
            if !vis && d < du {
                du = d;
                u = v;
            }
        }
        if u == usize::MAX {
            break;
        }
        visited[u] = true;
        let row_u = &delta[u * n..(u + 1) * n];
        for ((d, &vis), &w) in dist.iter_mut().zip(&visited).zip(row_u) {
            if !vis && w < 1.0 {
                let cand = du + w;
                if cand < *d {
                    *d = cand;
                }
            }
        }
    }
}

/// An embedded configuration plus the majorization diagnostics.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub trajectory: Trajectory,
    /// Normalized stress of the final configuration:
    /// sqrt(sum (delta - d)^2 / sum delta^2) over pairs i < j.
    pub stress: f64,
    /// Normalized stress after the initial configuration and after each
    /// majorization update; nonincreasing.
    pub stress_trace: Vec<f64>,
}

/// Embed a dissimilarity matrix into `dim` coordinates.
pub fn embed(proxy: &ProxyDistanceMatrix, dim: usize, seed: u64) -> Result<Trajectory> {
    Ok(embed_with_diagnostics(proxy, dim, seed)?.trajectory)
}

pub fn embed_with_diagnostics(
    proxy: &ProxyDistanceMatrix,
    dim: usize,
    seed: u64,
) -> Result<Embedding> {
    if dim == 0 {
        return Err(Error::InvalidInput("embedding dimension must be >= 1".into()));
    }
    let n = proxy.n;
    let mut sum_sq = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = proxy.values[i * n + j];
            sum_sq += d * d;
        }
    }
    if n < 2 || sum_sq == 0.0 {
        return Err(Error::Degenerate(
            "all pairwise dissimilarities are zero; nothing to embed".into(),
        ));
    }
    let init = mds::classical_scaling(&proxy.values, n, dim, seed);
    let out = mds::smacof(&proxy.values, n, dim, init, 500, 1e-9);
    let trace: Vec<f64> = out
        .stress_trace
        .iter()
        .map(|s| (s / sum_sq).sqrt())
        .collect();
    let stress = *trace.last().expect("trace never empty");
    Ok(Embedding {
        trajectory: Trajectory::new(dim, 1.0, out.coords)?,
        stress,
        stress_trace: trace,
    })
}

/// Quality metrics comparing a reconstruction against the matrix it came from.
#[derive(Debug, Clone)]
pub struct ValidationMetrics {
    /// Threshold whose recurrence count on the reconstruction matches the
    /// original matrix's count as closely as possible.
    pub matched_epsilon: f64,
    /// Fraction of off-diagonal entries that agree after rebuilding the
    /// matrix from the reconstruction at `matched_epsilon`.
    pub bit_agreement: f64,
    /// Spearman rank correlation between the completed neighborhood
    /// dissimilarities and the reconstructed pairwise distances.
    pub distance_rank_correlation: f64,
}

/// Rebuild a matrix from `reconstructed` at a rate-matched threshold and
/// measure how well it reproduces `r`.
pub fn validate(r: &RecurrenceMatrix, reconstructed: &Trajectory) -> Result<ValidationMetrics> {
    let n = r.n();
    if reconstructed.len() != n {
        return Err(Error::InvalidInput(format!(
            "reconstruction has {} points but the matrix has {}",
            reconstructed.len(),
            n
        )));
    }
    if n < 2 {
        return Err(Error::Degenerate(
            "validation needs at least two points".into(),
        ));
    }
    let metric = r.metric();
    let m_pairs = n * (n - 1) / 2;
    let mut recon_d = Vec::with_capacity(m_pairs);
    for i in 0..n {
        let pi = reconstructed.point(i);
        for j in (i + 1)..n {
            recon_d.push(metric.dist(pi, reconstructed.point(j)));
        }
    }

    let matched_epsilon = matched_threshold(&recon_d, r.off_diagonal_ones() / 2);
    let rebuilt = build_matrix(reconstructed, matched_epsilon, metric)?;
    let mut disagreements: u64 = 0;
    for i in 0..n {
        let a = r.row_words(i);
        let b = rebuilt.row_words(i);
        disagreements += a
            .iter()
            .zip(b)
            .map(|(x, y)| (x ^ y).count_ones() as u64)
            .sum::<u64>();
    }
    let bit_agreement = 1.0 - disagreements as f64 / (n as f64 * (n as f64 - 1.0));

    let proxy = geodesic_completion(&proxy_distances(r));
    let rho = spearman(&proxy.upper_triangle(), &recon_d);

    Ok(ValidationMetrics {
        matched_epsilon,
        bit_agreement,
        distance_rank_correlation: rho,
    })
}

/// Smallest threshold reproducing `k_half` recurrent pairs on the given
/// pairwise distances: the (k_half)-th order statistic, since d < eps is
/// strict. Guarded so the result is always positive and usable.
fn matched_threshold(pair_distances: &[f64], k_half: u64) -> f64 {
    let mut sorted = pair_distances.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let k = k_half as usize;
    let eps = if k >= sorted.len() {
        next_after_up(*sorted.last().expect("at least one pair"))
    } else {
        sorted[k]
    };
    if eps > 0.0 {
        eps
    } else {
        match sorted.iter().find(|&&d| d > 0.0) {
            Some(&d) => d,
            None => f64::MIN_POSITIVE,
        }
    }
}

/// Full reconstruction output.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    /// One reconstructed point per matrix column, twins mapped to
    /// coincident points.
    pub embedded: Trajectory,
    pub stress: f64,
    pub stress_trace: Vec<f64>,
    pub matched_epsilon: f64,
    pub bit_agreement: f64,
    pub distance_rank_correlation: f64,
}

/// Reconstruct a trajectory from the binary matrix alone.
pub fn reconstruct(r: &RecurrenceMatrix, dim: usize, seed: u64) -> Result<ReconstructionResult> {
    let (quotient, class_of) = collapse_twins(r);
    if quotient.n() < 2 {
        return Err(Error::Degenerate(
            "matrix has a single twin class; geometry is unrecoverable".into(),
        ));
    }
    let proxy = geodesic_completion(&proxy_distances(&quotient));
    let emb = embed_with_diagnostics(&proxy, dim, seed)?;
    let n = r.n();
    let mut data = Vec::with_capacity(n * dim);
    for &class in class_of.iter().take(n) {
        data.extend_from_slice(emb.trajectory.point(class));
    }
    let embedded = Trajectory::new(dim, 1.0, data)?;
    let metrics = validate(r, &embedded)?;
    Ok(ReconstructionResult {
        embedded,
        stress: emb.stress,
        stress_trace: emb.stress_trace,
        matched_epsilon: metrics.matched_epsilon,
        bit_agreement: metrics.bit_agreement,
        distance_rank_correlation: metrics.distance_rank_correlation,
    })
}

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either side has zero rank variance.
pub(crate) fn spearman(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    pearson_f64(&ra, &rb)
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<u32> = (0..v.len() as u32).collect();
    idx.sort_unstable_by(|&a, &b| v[a as usize].total_cmp(&v[b as usize]));
    let mut ranks = vec![0.0f64; v.len()];
    let mut start = 0usize;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end] as usize] == v[idx[start] as usize] {
            end += 1;
        }
        let avg = (start + end - 1) as f64 / 2.0 + 1.0;
        for k in start..end {
            ranks[idx[k] as usize] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson_f64(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    if a.is_empty() {
        return 0.0;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;
    use crate::recmat::calibrate_epsilon;
    use crate::systems::{delay_embed, SystemKind, SystemSpec};

    fn matrix_from_rows(rows: &[&[u8]], epsilon: f64) -> RecurrenceMatrix {
        let n = rows.len();
        let rows: Vec<Vec<bool>> = rows.iter().map(|r| r.iter().map(|&b| b != 0).collect()).collect();
        RecurrenceMatrix::from_bits(n, epsilon, Metric::Euclidean, &rows).unwrap()
    }

    #[test]
    fn jaccard_overlap_and_disjoint_oracles() {
        // Rows 0 and 3 share two of four neighborhood members: 1 - 2/4 = 0.5.
        let r = matrix_from_rows(
            &[
                &[1, 1, 1, 0],
                &[1, 1, 1, 1],
                &[1, 1, 1, 1],
                &[0, 1, 1, 1],
            ],
            0.5,
        );
        let p = proxy_distances(&r);
        assert!((p.get(0, 3) - 0.5).abs() < 1e-15);
        assert_eq!(p.get(1, 2), 0.0); // identical columns
        assert_eq!(p.get(0, 0), 0.0);
        assert_eq!(p.get(0, 3), p.get(3, 0));

        // Identity matrix: every pair of neighborhoods is disjoint.
        let id = matrix_from_rows(
            &[
                &[1, 0, 0, 0],
                &[0, 1, 0, 0],
                &[0, 0, 1, 0],
                &[0, 0, 0, 1],
            ],
            0.5,
        );
        let q = proxy_distances(&id);
        assert_eq!(q.get(0, 1), 1.0);
        assert_eq!(q.get(2, 3), 1.0);
    }

    #[test]
    fn proxy_is_permutation_equivariant() {
        let spec = SystemSpec::new(SystemKind::Logistic).with_n(40).with_seed(3);
        let traj = spec.generate().unwrap();
        let r = build_matrix(&traj, 0.2, Metric::Euclidean).unwrap();
        let p = proxy_distances(&r);

        // Reverse the points; the matrix and proxy must permute identically.
        let n = traj.len();
        let rev_pts: Vec<f64> = (0..n).rev().flat_map(|i| traj.point(i).to_vec()).collect();
        let rev = Trajectory::new(traj.dim(), traj.dt(), rev_pts).unwrap();
        let r2 = build_matrix(&rev, 0.2, Metric::Euclidean).unwrap();
        let p2 = proxy_distances(&r2);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(p.get(i, j), p2.get(n - 1 - i, n - 1 - j));
            }
        }
    }

    #[test]
    fn geodesic_completion_routes_saturated_pairs() {
        // Chain 0 - 1 - 2 with direct edges 0.4 and a saturated end pair.
        let values = vec![
            0.0, 0.4, 1.0, //
            0.4, 0.0, 0.4, //
            1.0, 0.4, 0.0,
        ];
        let p = ProxyDistanceMatrix::from_values(3, values).unwrap();
        let g = geodesic_completion(&p);
        // Path 0->1->2 costs 0.8, which becomes the maximum and rescales to 1.
        assert!((g.get(0, 2) - 1.0).abs() < 1e-12);
        assert!((g.get(0, 1) - 0.5).abs() < 1e-12);
        assert!((g.get(1, 2) - 0.5).abs() < 1e-12);
        assert_eq!(g.get(0, 0), 0.0);
        assert_eq!(g.get(0, 2), g.get(2, 0));
    }

    #[test]
    fn geodesic_completion_fills_unreachable_pairs() {
        // Two components: {0,1} linked at 0.5, {2} isolated.
        let values = vec![
            0.0, 0.5, 1.0, //
            0.5, 0.0, 1.0, //
            1.0, 1.0, 0.0,
        ];
        let p = ProxyDistanceMatrix::from_values(3, values).unwrap();
        let g = geodesic_completion(&p);
        // Unreachable pairs get 1.5 * max finite = 0.75, then rescale to 1.
        assert_eq!(g.get(0, 2), 1.0);
        assert_eq!(g.get(1, 2), 1.0);
        assert!((g.get(0, 1) - 0.5 / 0.75).abs() < 1e-12);
    }

    #[test]
    fn embed_three_collinear_points() {
        let values = vec![
            0.0, 0.5, 1.0, //
            0.5, 0.0, 0.5, //
            1.0, 0.5, 0.0,
        ];
        let p = ProxyDistanceMatrix::from_values(3, values).unwrap();
        let t = embed(&p, 1, 7).unwrap();
        let d01 = (t.point(0)[0] - t.point(1)[0]).abs();
        let d12 = (t.point(1)[0] - t.point(2)[0]).abs();
        let d02 = (t.point(0)[0] - t.point(2)[0]).abs();
        assert!((d01 - d12).abs() < 1e-6 * d01.max(d12));
        assert!((d02 - (d01 + d12)).abs() < 1e-6 * d02);
        assert!((d02 / d01 - 2.0).abs() < 1e-5);
    }

    #[test]
    fn embed_exact_configuration_has_negligible_stress() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 12;
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
        let mut values = vec![0.0; n * n];
        let mut dmax = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt();
                values[i * n + j] = d;
                dmax = dmax.max(d);
            }
        }
        for v in values.iter_mut() {
            *v /= dmax;
        }
        let p = ProxyDistanceMatrix::from_values(n, values).unwrap();
        let e = embed_with_diagnostics(&p, 2, 3).unwrap();
        assert!(e.stress < 1e-10, "stress = {}", e.stress);
    }

    #[test]
    fn embed_square_into_line_keeps_positive_stress() {
        let s = 1.0 / std::f64::consts::SQRT_2;
        let values = vec![
            0.0, s, 1.0, s, //
            s, 0.0, s, 1.0, //
            1.0, s, 0.0, s, //
            s, 1.0, s, 0.0,
        ];
        let p = ProxyDistanceMatrix::from_values(4, values).unwrap();
        let e = embed_with_diagnostics(&p, 1, 9).unwrap();
        assert!(e.stress > 1e-6, "a square cannot flatten: {}", e.stress);
        for w in e.stress_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn embed_rejects_all_zero_dissimilarities() {
        let p = ProxyDistanceMatrix::from_values(3, vec![0.0; 9]).unwrap();
        assert!(matches!(embed(&p, 2, 0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn validate_identity_reconstruction_is_perfect() {
        let series = SystemSpec::new(SystemKind::Logistic)
            .with_n(120)
            .with_seed(2)
            .generate()
            .unwrap();
        let traj = delay_embed(series.coords(), 2, 1).unwrap();
        let cal = calibrate_epsilon(&traj, 0.1, Metric::Euclidean).unwrap();
        let r = build_matrix(&traj, cal.epsilon, Metric::Euclidean).unwrap();
        let m = validate(&r, &traj).unwrap();
        assert_eq!(m.bit_agreement, 1.0);
        assert!(m.matched_epsilon > 0.0);
        assert!(m.distance_rank_correlation > 0.6);
    }

    #[test]
    fn validate_is_invariant_under_rigid_rotation() {
        let series = SystemSpec::new(SystemKind::Logistic)
            .with_n(150)
            .with_seed(4)
            .generate()
            .unwrap();
        let traj = delay_embed(series.coords(), 2, 1).unwrap();
        let cal = calibrate_epsilon(&traj, 0.1, Metric::Euclidean).unwrap();
        let r = build_matrix(&traj, cal.epsilon, Metric::Euclidean).unwrap();

        let (sin, cos) = 0.73f64.sin_cos();
        let rotated: Vec<f64> = (0..traj.len())
            .flat_map(|i| {
                let p = traj.point(i);
                vec![cos * p[0] - sin * p[1] + 0.2, sin * p[0] + cos * p[1] - 0.1]
            })
            .collect();
        let rot = Trajectory::new(2, 1.0, rotated).unwrap();
        let m = validate(&r, &rot).unwrap();
        assert_eq!(m.bit_agreement, 1.0);
    }

    #[test]
    fn matched_threshold_reproduces_pair_count() {
        let d = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        // Want 3 recurrent pairs: threshold is the 4th smallest, 0.4 (strict <).
        let eps = matched_threshold(&d, 3);
        assert_eq!(eps, 0.4);
        assert_eq!(d.iter().filter(|&&x| x < eps).count(), 3);
        // All pairs recurrent: threshold just above the maximum.
        let eps_all = matched_threshold(&d, 6);
        assert!(eps_all > 0.6);
        assert_eq!(d.iter().filter(|&&x| x < eps_all).count(), 6);
        // Zero pairs wanted but smallest distance is 0: stay positive.
        let dz = vec![0.0, 0.0, 0.7];
        let eps_z = matched_threshold(&dz, 0);
        assert!(eps_z > 0.0);
    }

    #[test]
    fn reconstruct_roundtrip_on_a_small_chaotic_series() {
        let series = SystemSpec::new(SystemKind::Logistic)
            .with_n(160)
            .with_seed(6)
            .generate()
            .unwrap();
        let traj = delay_embed(series.coords(), 2, 1).unwrap();
        let cal = calibrate_epsilon(&traj, 0.12, Metric::Euclidean).unwrap();
        let r = build_matrix(&traj, cal.epsilon, Metric::Euclidean).unwrap();
        let out = reconstruct(&r, 2, 0).unwrap();
        assert_eq!(out.embedded.len(), r.n());
        assert_eq!(out.embedded.dim(), 2);
        assert!(out.stress.is_finite() && out.stress >= 0.0);
        assert!(out.bit_agreement > 0.8, "agreement {}", out.bit_agreement);
        assert!(out.distance_rank_correlation > 0.8);
        for w in out.stress_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        // Twins land on coincident points.
        let (_, class_of) = collapse_twins(&r);
        for i in 0..r.n() {
            for j in (i + 1)..r.n() {
                if class_of[i] == class_of[j] {
                    assert_eq!(out.embedded.point(i), out.embedded.point(j));
                }
            }
        }
    }

    #[test]
    fn spearman_oracles() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        // Monotone but nonlinear is still a perfect rank correlation.
        assert!((spearman(&[1.0, 2.0, 3.0], &[1.0, 8.0, 27.0]) - 1.0).abs() < 1e-12);
        // Ties averaged on both sides.
        assert!((spearman(&[1.0, 2.0, 2.0, 3.0], &[5.0, 6.0, 6.0, 7.0]) - 1.0).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }
}
