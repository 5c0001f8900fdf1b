//! Twin surrogates: resampled trajectories that preserve the recurrence
//! structure of the original by exploiting twin columns of the matrix.

use crate::error::{Error, Result};
use crate::matrix::RecurrenceMatrix;
use crate::separation::twin_partition;
use crate::trajectory::Trajectory;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parameters for surrogate generation.
#[derive(Debug, Clone)]
pub struct SurrogateSpec {
    /// Number of surrogates to generate.
    pub count: usize,
    pub seed: u64,
    /// Warn when fewer twin classes than this are available: with few twins
    /// the surrogates are close to plain rotations of the original.
    pub min_twin_classes: usize,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        SurrogateSpec {
            count: 1,
            seed: 0,
            min_twin_classes: 1,
        }
    }
}

/// Surrogate trajectories plus a twin-availability diagnostic.
#[derive(Debug, Clone)]
pub struct SurrogateSet {
    pub surrogates: Vec<Trajectory>,
    /// Number of twin classes with at least two members.
    pub nontrivial_twin_classes: usize,
    pub warning: Option<String>,
}

/// Generate twin surrogates by running the twin-jump dynamics on the index
/// set: from index c, pick a uniform member t of c's twin class (c itself
/// when it has no twins) and step to (t+1) mod n. A twin-free matrix makes
/// every surrogate an exact cyclic rotation; an all-ones matrix makes every
/// step an independent uniform draw.
///
/// Surrogate s uses an independent, reproducible random stream derived from
/// `spec.seed` and s, so the set is identical across thread counts and runs.
pub fn twin_surrogate(
    traj: &Trajectory,
    r: &RecurrenceMatrix,
    spec: &SurrogateSpec,
) -> Result<SurrogateSet> {
    let n = r.n();
    if traj.len() != n {
        return Err(Error::InvalidInput(format!(
            "trajectory has {} points but the matrix has {}",
            traj.len(),
            n
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput(
            "surrogate generation needs at least 2 points".into(),
        ));
    }
    if spec.count == 0 {
        return Err(Error::InvalidInput("surrogate count must be >= 1".into()));
    }

    let (class_of, members) = twin_partition(r);
    let nontrivial = members.iter().filter(|m| m.len() > 1).count();

    let mut surrogates = Vec::with_capacity(spec.count);
    for s in 0..spec.count {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(s as u64);
        let mut idx = rng.gen_range(0..n);
        let mut data = Vec::with_capacity(n * traj.dim());
        for _ in 0..n {
            data.extend_from_slice(traj.point(idx));
            let class = &members[class_of[idx]];
            let t = if class.len() == 1 {
                idx
            } else {
                class[rng.gen_range(0..class.len())]
            };
            idx = (t + 1) % n;
        }
        surrogates.push(Trajectory::new(traj.dim(), traj.dt(), data)?);
    }

    let warning = if nontrivial < spec.min_twin_classes {
        Some(format!(
            "only {} nontrivial twin classes (wanted {}); surrogates stay close to rotations",
            nontrivial, spec.min_twin_classes
        ))
    } else {
        None
    };
    Ok(SurrogateSet {
        surrogates,
        nontrivial_twin_classes: nontrivial,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;
    use crate::recmat::{build_matrix, calibrate_epsilon};
    use crate::rqa::recurrence_rate;
    use crate::systems::{SystemKind, SystemSpec};

    fn spec(count: usize, seed: u64) -> SurrogateSpec {
        SurrogateSpec {
            count,
            seed,
            min_twin_classes: 1,
        }
    }

    #[test]
    fn twin_free_matrix_gives_cyclic_rotations() {
        // Strictly increasing 1-D points with a small threshold: no twins.
        let data: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let traj = Trajectory::new(1, 1.0, data).unwrap();
        let r = build_matrix(&traj, 1.5, Metric::Euclidean).unwrap();
        let set = twin_surrogate(&traj, &r, &spec(3, 11)).unwrap();
        assert_eq!(set.nontrivial_twin_classes, 0);
        assert!(set.warning.is_some());
        for s in &set.surrogates {
            let start = traj
                .points()
                .position(|p| p == s.point(0))
                .expect("surrogate starts at an original point");
            for k in 0..traj.len() {
                assert_eq!(s.point(k), traj.point((start + k) % traj.len()));
            }
        }
    }

    #[test]
    fn all_ones_matrix_gives_iid_resampling() {
        // All points within epsilon: a single twin class, every step jumps
        // to a uniform index. Check the sampled start distribution is broad
        // and that all surrogate points come from the original set.
        let data: Vec<f64> = (0..50).map(|i| (i as f64) * 1e-6).collect();
        let traj = Trajectory::new(1, 1.0, data).unwrap();
        let r = build_matrix(&traj, 1.0, Metric::Euclidean).unwrap();
        let set = twin_surrogate(&traj, &r, &spec(2, 5)).unwrap();
        assert_eq!(set.nontrivial_twin_classes, 1);
        for s in &set.surrogates {
            let mut seen = std::collections::HashSet::new();
            for k in 0..s.len() {
                let p = s.point(k)[0];
                assert!(traj.points().any(|q| q[0] == p));
                seen.insert(p.to_bits());
            }
            // An i.i.d. draw of 50 from 50 values hits well over half of them.
            assert!(seen.len() > 25, "only {} distinct points", seen.len());
        }
        // Consecutive surrogate points are mostly not consecutive originals.
        let s = &set.surrogates[0];
        let idx_of = |v: f64| (0..50).find(|&i| traj.point(i)[0] == v).unwrap();
        let mut successor_steps = 0;
        for k in 1..s.len() {
            if idx_of(s.point(k)[0]) == (idx_of(s.point(k - 1)[0]) + 1) % 50 {
                successor_steps += 1;
            }
        }
        assert!(successor_steps < 10, "{successor_steps} successor steps");
    }

    #[test]
    fn surrogates_preserve_the_point_set_and_rate() {
        let traj = SystemSpec::new(SystemKind::Logistic)
            .with_n(400)
            .with_seed(21)
            .generate()
            .unwrap();
        let cal = calibrate_epsilon(&traj, 0.1, Metric::Euclidean).unwrap();
        let r = build_matrix(&traj, cal.epsilon, Metric::Euclidean).unwrap();
        let original_rate = recurrence_rate(&r).unwrap();
        let set = twin_surrogate(&traj, &r, &spec(5, 3)).unwrap();
        assert_eq!(set.surrogates.len(), 5);
        for s in &set.surrogates {
            assert_eq!(s.len(), traj.len());
            for k in 0..s.len() {
                assert!(traj.points().any(|q| q == s.point(k)));
            }
            let rs = build_matrix(s, cal.epsilon, Metric::Euclidean).unwrap();
            let rate = recurrence_rate(&rs).unwrap();
            assert!(
                (rate - original_rate).abs() < 0.05,
                "surrogate rate {rate} vs original {original_rate}"
            );
        }
    }

    #[test]
    fn surrogates_are_seed_deterministic_and_distinct_per_stream() {
        let traj = SystemSpec::new(SystemKind::Logistic)
            .with_n(120)
            .with_seed(2)
            .generate()
            .unwrap();
        let cal = calibrate_epsilon(&traj, 0.15, Metric::Euclidean).unwrap();
        let r = build_matrix(&traj, cal.epsilon, Metric::Euclidean).unwrap();
        let a = twin_surrogate(&traj, &r, &spec(3, 7)).unwrap();
        let b = twin_surrogate(&traj, &r, &spec(3, 7)).unwrap();
        for (x, y) in a.surrogates.iter().zip(&b.surrogates) {
            assert_eq!(x.coords(), y.coords());
        }
        // Different streams: the first two surrogates differ somewhere.
        assert_ne!(a.surrogates[0].coords(), a.surrogates[1].coords());
        // Different seed changes the output.
        let c = twin_surrogate(&traj, &r, &spec(1, 8)).unwrap();
        assert_ne!(a.surrogates[0].coords(), c.surrogates[0].coords());
    }

    #[test]
    fn surrogate_input_validation() {
        let traj = SystemSpec::new(SystemKind::Logistic).with_n(30).generate().unwrap();
        let r = build_matrix(&traj, 0.2, Metric::Euclidean).unwrap();
        let short = SystemSpec::new(SystemKind::Logistic).with_n(10).generate().unwrap();
        assert!(twin_surrogate(&short, &r, &spec(1, 0)).is_err());
        assert!(twin_surrogate(&traj, &r, &spec(0, 0)).is_err());
    }
}
