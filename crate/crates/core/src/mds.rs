//! Multidimensional scaling: classical (Torgerson) initialization and
//! SMACOF stress majorization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Result of a majorization run. `coords` is row-major n x m; the trace
/// holds the raw stress of every visited configuration, starting with the
/// initial one, and is nonincreasing by construction of the update.
#[derive(Debug, Clone)]
pub struct MajorizationOutcome {
    pub coords: Vec<f64>,
    pub stress_trace: Vec<f64>,
}

/// Classical scaling: double-center -delta^2/2 and take the top-m spectral
/// coordinates, computed by seeded orthogonal subspace iteration. Columns
/// whose eigenvalue is not meaningfully positive are filled with tiny seeded
/// noise so a follow-up majorization can still move them.
pub fn classical_scaling(delta: &[f64], n: usize, m: usize, seed: u64) -> Vec<f64> {
    assert_eq!(delta.len(), n * n);
    let nf = n as f64;
    let mut row_mean = vec![0.0f64; n];
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            let d = delta[i * n + j];
            s += d * d;
        }
        row_mean[i] = s / nf;
    }
    let grand = row_mean.iter().sum::<f64>() / nf;
    let mut b = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = delta[i * n + j];
            b[i * n + j] = -0.5 * (d * d - row_mean[i] - row_mean[j] + grand);
        }
    }

    // Orthogonal subspace iteration with a Rayleigh-Ritz projection per
    // step: the projection resolves directions inside the subspace even
    // when the leading eigenvalues are nearly equal.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut x: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut x);
    let mut lambda = vec![0.0f64; m];
    for iter in 0..300 {
        let mut q: Vec<Vec<f64>> = x.iter().map(|xk| mat_vec(&b, n, xk)).collect();
        orthonormalize(&mut q);
        let bq: Vec<Vec<f64>> = q.iter().map(|qk| mat_vec(&b, n, qk)).collect();
        let mut small = vec![0.0f64; m * m];
        for r in 0..m {
            for c in 0..m {
                small[r * m + c] = dot(&q[r], &bq[c]);
            }
        }
        for r in 0..m {
            for c in (r + 1)..m {
                let avg = 0.5 * (small[r * m + c] + small[c * m + r]);
                small[r * m + c] = avg;
                small[c * m + r] = avg;
            }
        }
        let (new_lambda, vecs) = jacobi_eigen(&small, m);
        // Ritz vectors: columns of Q rotated by the small eigenbasis.
        let mut ritz: Vec<Vec<f64>> = vec![vec![0.0; n]; m];
        for (k, rk) in ritz.iter_mut().enumerate() {
            for (r, qr) in q.iter().enumerate() {
                let w = vecs[r * m + k];
                for (o, &qv) in rk.iter_mut().zip(qr) {
                    *o += w * qv;
                }
            }
        }
        let settled = lambda
            .iter()
            .zip(&new_lambda)
            .all(|(&old, &new)| (old - new).abs() <= 1e-13 * new.abs().max(1e-13));
        lambda = new_lambda;
        x = ritz;
        if settled && iter > 2 {
            break;
        }
    }

    let lam_max = lambda.iter().cloned().fold(0.0f64, f64::max);
    let jitter = 1e-6 * lam_max.max(1e-12).sqrt();
    let mut coords = vec![0.0f64; n * m];
    for (col, lam) in lambda.iter().enumerate() {
        if *lam > 0.0 && *lam > 1e-12 * lam_max {
            let s = lam.sqrt();
            for i in 0..n {
                coords[i * m + col] = x[col][i] * s;
            }
        } else {
            for i in 0..n {
                coords[i * m + col] = rng.gen_range(-1.0..1.0) * jitter;
            }
        }
    }
    coords
}

/// Cyclic Jacobi eigendecomposition of a symmetric m x m matrix (row-major).
/// Returns eigenvalues in descending order with the matching eigenvectors
/// as columns of a row-major m x m matrix.
fn jacobi_eigen(a: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0f64; m * m];
    for k in 0..m {
        v[k * m + k] = 1.0;
    }
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..m {
            for q in (p + 1)..m {
                off += a[p * m + q] * a[p * m + q];
            }
        }
        if off <= 1e-28 * (1.0 + frobenius_sq(&a, m)) {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                for k in 0..m {
                    let vkp = v[k * m + p];
                    let vkq = v[k * m + q];
                    v[k * m + p] = c * vkp - s * vkq;
                    v[k * m + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| a[j * m + j].total_cmp(&a[i * m + i]));
    let values: Vec<f64> = order.iter().map(|&k| a[k * m + k]).collect();
    let mut vectors = vec![0.0f64; m * m];
    for (out_col, &in_col) in order.iter().enumerate() {
        for r in 0..m {
            vectors[r * m + out_col] = v[r * m + in_col];
        }
    }
    (values, vectors)
}

fn frobenius_sq(a: &[f64], m: usize) -> f64 {
    a.iter().take(m * m).map(|&x| x * x).sum()
}

fn mat_vec(b: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0f64; n];
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        let row = &b[i * n..(i + 1) * n];
        *o = dot(row, v);
    });
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthonormalize(cols: &mut [Vec<f64>]) {
    let m = cols.len();
    for k in 0..m {
        for prev in 0..k {
            let (head, tail) = cols.split_at_mut(k);
            let proj = dot(&head[prev], &tail[0]);
            for (t, &h) in tail[0].iter_mut().zip(&head[prev]) {
                *t -= proj * h;
            }
        }
        let norm = dot(&cols[k], &cols[k]).sqrt();
        if norm > 1e-300 {
            for v in cols[k].iter_mut() {
                *v /= norm;
            }
        } else {
            // Degenerate direction: restart from a basis vector and keep going.
            let n = cols[k].len();
            for (i, v) in cols[k].iter_mut().enumerate() {
                *v = if i == k % n { 1.0 } else { 0.0 };
            }
        }
    }
}

/// Iterative stress majorization (Guttman transform). Minimizes the raw
/// stress sum over i<j of (delta_ij - d_ij)^2, stopping when the relative
/// improvement drops below `rel_tol` or after `max_iters` updates.
pub fn smacof(
    delta: &[f64],
    n: usize,
    m: usize,
    init: Vec<f64>,
    max_iters: usize,
    rel_tol: f64,
) -> MajorizationOutcome {
    assert_eq!(delta.len(), n * n);
    assert_eq!(init.len(), n * m);
    let mut x = init;
    let mut x_next = vec![0.0f64; n * m];
    let mut trace: Vec<f64> = Vec::new();
    for it in 0..=max_iters {
        let stress = guttman_pass(delta, n, m, &x, &mut x_next);
        trace.push(stress);
        let no_more = match trace.len().checked_sub(2).map(|k| trace[k]) {
            Some(prev) => prev - stress < rel_tol * prev.max(f64::MIN_POSITIVE),
            None => false,
        };
        if stress == 0.0 || no_more || it == max_iters {
            break;
        }
        std::mem::swap(&mut x, &mut x_next);
    }
    MajorizationOutcome {
        coords: x,
        stress_trace: trace,
    }
}

/// One fused pass: returns the raw stress of `x` and writes the Guttman
/// update into `x_next`. Parallel over points; all floating accumulation
/// happens in a fixed per-row order so results are thread-count independent.
fn guttman_pass(delta: &[f64], n: usize, m: usize, x: &[f64], x_next: &mut [f64]) -> f64 {
    let nf = n as f64;
    let stress_parts: Vec<f64> = x_next
        .par_chunks_mut(m)
        .enumerate()
        .map(|(i, out)| {
            let xi = &x[i * m..(i + 1) * m];
            out.fill(0.0);
            let mut coeff_sum = 0.0f64;
            let mut s_i = 0.0f64;
            let drow = &delta[i * n..(i + 1) * n];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let xj = &x[j * m..(j + 1) * m];
                let mut d2 = 0.0;
                for t in 0..m {
                    let dd = xi[t] - xj[t];
                    d2 += dd * dd;
                }
                let d = d2.sqrt();
                let del = drow[j];
                if j > i {
                    let r = del - d;
                    s_i += r * r;
                }
                if d > 0.0 {
                    let ratio = del / d;
                    coeff_sum += ratio;
                    for t in 0..m {
                        out[t] -= ratio * xj[t];
                    }
                }
            }
            for (t, o) in out.iter_mut().enumerate() {
                *o = (*o + coeff_sum * xi[t]) / nf;
            }
            s_i
        })
        .collect();
    stress_parts.iter().sum()
}
