//! Cross-module consistency checks with fixed seeds: identities that tie
//! the histogram to the matrix, the correlation sum to the recurrence rate,
//! invariance of dynamical estimates under isometries, and statistical
//! behaviour of the reconstruction and surrogate pipelines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recur_core::*;

// The maps are deterministic, so distinct runs come from seeding the
// initial condition; the transient settles each orbit onto the attractor.
fn logistic(n: usize, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SystemSpec::new(SystemKind::Logistic)
        .with_n(n)
        .with_seed(seed)
        .with_x0(vec![rng.gen_range(0.01..0.99)])
        .generate()
        .unwrap()
}

fn henon(n: usize, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SystemSpec::new(SystemKind::Henon)
        .with_n(n)
        .with_seed(seed)
        .with_x0(vec![rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)])
        .generate()
        .unwrap()
}

#[test]
fn diagonal_mass_equals_off_diagonal_ones() {
    for seed in [11u64, 29, 407] {
        let traj = logistic(300, seed);
        let cal = calibrate_epsilon(&traj, 0.15, Metric::Euclidean).unwrap();
        let r = build_matrix(&traj, cal.epsilon, Metric::Euclidean).unwrap();
        let hist = diagonal_histogram(&r, 1).unwrap();
        let mass: u64 = hist.counts().iter().map(|(&l, &c)| l as u64 * c).sum();
        assert_eq!(mass, r.off_diagonal_ones(), "seed {seed}");
    }
}

#[test]
fn correlation_sum_matches_recurrence_rate_at_a_single_threshold() {
    let traj = logistic(500, 7);
    for epsilon in [0.02, 0.1, 0.3] {
        let r = build_matrix(&traj, epsilon, Metric::Maximum).unwrap();
        let curve = correlation_sum(&traj, &[epsilon], Metric::Maximum).unwrap();
        assert_eq!(curve.len(), 1);
        assert_eq!(curve[0].1, recurrence_rate(&r).unwrap());
    }
}

/// Rotate about the z axis and translate. Applied pointwise to a 3-d series.
fn rigid_motion(traj: &Trajectory, angle: f64, shift: [f64; 3]) -> Trajectory {
    let (c, s) = (angle.cos(), angle.sin());
    let mut data = Vec::with_capacity(traj.coords().len());
    for p in traj.points() {
        data.push(c * p[0] - s * p[1] + shift[0]);
        data.push(s * p[0] + c * p[1] + shift[1]);
        data.push(p[2] + shift[2]);
    }
    Trajectory::new(3, traj.dt(), data).unwrap()
}

#[test]
fn entropy_rate_estimate_survives_a_rigid_motion() {
    let traj = SystemSpec::new(SystemKind::Lorenz)
        .with_n(800)
        .with_seed(3)
        .generate()
        .unwrap();
    let moved = rigid_motion(&traj, 0.61, [4.0, -2.0, 7.5]);

    let cal = calibrate_epsilon(&traj, 0.10, Metric::Euclidean).unwrap();
    let a = estimate_k2(&traj, cal.epsilon, Metric::Euclidean, 2..=5).unwrap();
    let b = estimate_k2(&moved, cal.epsilon, Metric::Euclidean, 2..=5).unwrap();
    // Euclidean distances are preserved, so the histograms and the fitted
    // slopes agree up to floating-point noise in the rotated coordinates.
    assert!(
        (a - b).abs() <= 1e-6 * (1.0 + a.abs()),
        "estimates diverged: {a} vs {b}"
    );
}

#[test]
fn reconstruction_accuracy_improves_with_series_length() {
    let mut averages = Vec::new();
    for n in [250usize, 500, 1000] {
        let mut total = 0.0;
        for seed in 0..5u64 {
            let traj = henon(n, 1000 + seed);
            let cal = calibrate_epsilon(&traj, 0.05, Metric::Euclidean).unwrap();
            let r = build_matrix(&traj, cal.epsilon, Metric::Euclidean).unwrap();
            let result = reconstruct(&r, 2, seed).unwrap();
            total += result.bit_agreement;
        }
        averages.push(total / 5.0);
    }
    assert!(
        averages[0] <= averages[1] && averages[1] <= averages[2],
        "average bit agreement not monotone over N: {averages:?}"
    );
    assert!(averages[2] > 0.9, "longest series should agree well: {averages:?}");
}

#[test]
fn reconstruction_of_a_logistic_matrix_reaches_high_agreement() {
    let traj = logistic(1000, 5);
    let cal = calibrate_epsilon(&traj, 0.10, Metric::Euclidean).unwrap();
    let r = build_matrix(&traj, cal.epsilon, Metric::Euclidean).unwrap();
    let result = reconstruct(&r, 2, 5).unwrap();
    assert!(
        result.bit_agreement >= 0.95,
        "bit agreement {}",
        result.bit_agreement
    );
}

#[test]
fn surrogates_preserve_the_recurrence_rate() {
    let traj = logistic(400, 21);
    let cal = calibrate_epsilon(&traj, 0.10, Metric::Euclidean).unwrap();
    let r = build_matrix(&traj, cal.epsilon, Metric::Euclidean).unwrap();
    let base = recurrence_rate(&r).unwrap();
    for seed in 0..10u64 {
        let set = twin_surrogate(
            &traj,
            &r,
            &SurrogateSpec { count: 1, seed, min_twin_classes: 0 },
        )
        .unwrap();
        let sr = build_matrix(&set.surrogates[0], cal.epsilon, Metric::Euclidean).unwrap();
        let rate = recurrence_rate(&sr).unwrap();
        assert!(
            (rate - base).abs() < 0.05,
            "seed {seed}: surrogate rate {rate} vs original {base}"
        );
    }
}

#[test]
fn quotient_matrix_after_twin_collapse_is_twin_free() {
    for seed in [2u64, 13, 99] {
        let traj = logistic(600, seed);
        let cal = calibrate_epsilon(&traj, 0.10, Metric::Euclidean).unwrap();
        let r = build_matrix(&traj, cal.epsilon, Metric::Euclidean).unwrap();
        let (q, classes) = collapse_twins(&r);
        assert_eq!(classes.len(), r.n());
        let report = check_separation(&q);
        assert!(
            report.satisfied,
            "seed {seed}: quotient still has {} twin pairs",
            report.violating_pairs.len()
        );
    }
}

#[test]
fn sync_index_is_symmetric_and_normalized() {
    let a = logistic(500, 31);
    let b = logistic(500, 32);
    let ca = calibrate_epsilon(&a, 0.12, Metric::Euclidean).unwrap();
    let cb = calibrate_epsilon(&b, 0.12, Metric::Euclidean).unwrap();
    let ra = build_matrix(&a, ca.epsilon, Metric::Euclidean).unwrap();
    let rb = build_matrix(&b, cb.epsilon, Metric::Euclidean).unwrap();
    let xy = sync_index(&ra, &rb).unwrap();
    let yx = sync_index(&rb, &ra).unwrap();
    assert_eq!(xy, yx);
    assert!((-1.0..=1.0).contains(&xy));
    assert_eq!(sync_index(&ra, &ra).unwrap(), 1.0);
}
