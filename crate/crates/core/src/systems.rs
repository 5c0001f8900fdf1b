//! Built-in map and flow generators plus Takens delay embedding.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Bernoulli,
    Logistic,
    Henon,
    Lorenz,
    Roessler,
}

impl SystemKind {
    pub fn dim(self) -> usize {
        match self {
            SystemKind::Bernoulli | SystemKind::Logistic => 1,
            SystemKind::Henon => 2,
            SystemKind::Lorenz | SystemKind::Roessler => 3,
        }
    }

    pub fn is_flow(self) -> bool {
        matches!(self, SystemKind::Lorenz | SystemKind::Roessler)
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Bernoulli => "bernoulli",
            SystemKind::Logistic => "logistic",
            SystemKind::Henon => "henon",
            SystemKind::Lorenz => "lorenz",
            SystemKind::Roessler => "roessler",
        }
    }

    /// Canonical chaotic-regime parameters, overridable per name.
    fn default_params(self) -> &'static [(&'static str, f64)] {
        match self {
            SystemKind::Bernoulli => &[("jitter", 1e-12)],
            SystemKind::Logistic => &[("r", 4.0)],
            SystemKind::Henon => &[("a", 1.4), ("b", 0.3)],
            SystemKind::Lorenz => &[("sigma", 10.0), ("rho", 28.0), ("beta", 8.0 / 3.0)],
            SystemKind::Roessler => &[("a", 0.15), ("b", 0.2), ("c", 10.0)],
        }
    }

    pub fn default_x0(self) -> Vec<f64> {
        match self {
            SystemKind::Bernoulli => vec![0.3],
            SystemKind::Logistic => vec![0.4],
            SystemKind::Henon => vec![0.1, 0.1],
            SystemKind::Lorenz => vec![1.0, 1.0, 1.0],
            SystemKind::Roessler => vec![1.0, 1.0, 1.0],
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(SystemKind::Bernoulli),
            "logistic" => Ok(SystemKind::Logistic),
            "henon" => Ok(SystemKind::Henon),
            "lorenz" => Ok(SystemKind::Lorenz),
            "roessler" => Ok(SystemKind::Roessler),
            other => Err(Error::InvalidInput(format!(
                "unknown system '{other}' (expected bernoulli, logistic, henon, lorenz or roessler)"
            ))),
        }
    }
}

/// Full description of a generation run. `dt` only matters for flows; maps
/// always produce trajectories with dt = 1. The seed drives the Bernoulli
/// map's tiny anti-collapse perturbation and is ignored by the other systems.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub params: Vec<(String, f64)>,
    pub x0: Vec<f64>,
    pub n: usize,
    pub dt: f64,
    pub transient: usize,
    pub seed: u64,
}

impl SystemSpec {
    pub fn new(kind: SystemKind) -> Self {
        SystemSpec {
            kind,
            params: Vec::new(),
            x0: kind.default_x0(),
            n: 1000,
            dt: if kind.is_flow() { 0.01 } else { 1.0 },
            transient: 0,
            seed: 0,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_transient(mut self, transient: usize) -> Self {
        self.transient = transient;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.push((name.to_string(), value));
        self
    }

    /// Convenience method form of [`generate`].
    pub fn generate(&self) -> Result<Trajectory> {
        generate(self)
    }

    /// Defaults overlaid with the user-supplied values; unknown names error.
    fn resolved_params(&self) -> Result<Vec<f64>> {
        let defaults = self.kind.default_params();
        let mut values: Vec<f64> = defaults.iter().map(|&(_, v)| v).collect();
        for (name, value) in &self.params {
            let idx = defaults
                .iter()
                .position(|&(n, _)| n == name)
                .ok_or_else(|| {
                    let expected: Vec<&str> = defaults.iter().map(|&(n, _)| n).collect();
                    Error::InvalidInput(format!(
                        "unknown parameter '{}' for system {} (expected one of: {})",
                        name,
                        self.kind,
                        expected.join(", ")
                    ))
                })?;
            if !value.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "parameter '{name}' must be finite"
                )));
            }
            values[idx] = *value;
        }
        Ok(values)
    }
}

/// Iterates the requested system, discards `transient` samples, then records
/// `n` samples starting with the post-transient state. Maps are evaluated
/// exactly; flows use fixed-step 4th-order Runge-Kutta, one step per sample.
pub fn generate(spec: &SystemSpec) -> Result<Trajectory> {
    if spec.n == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    let dim = spec.kind.dim();
    if spec.x0.len() != dim {
        return Err(Error::InvalidInput(format!(
            "initial condition for {} must have dimension {}, got {}",
            spec.kind,
            dim,
            spec.x0.len()
        )));
    }
    if spec.x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite initial condition".into()));
    }
    if spec.kind.is_flow() && (spec.dt <= 0.0 || !spec.dt.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integration step must be a positive finite real, got {}",
            spec.dt
        )));
    }
    let p = spec.resolved_params()?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut state = spec.x0.clone();
    let total = spec.transient + spec.n;
    let mut data = Vec::with_capacity(spec.n * dim);
    for k in 0..total {
        if k >= spec.transient {
            data.extend_from_slice(&state);
        }
        if k + 1 == total {
            break;
        }
        step_system(spec.kind, &p, &mut state, spec.dt, &mut rng);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Generation {
                step: k + 1,
                message: format!("state became non-finite while iterating {}", spec.kind),
            });
        }
    }
    let dt = if spec.kind.is_flow() { spec.dt } else { 1.0 };
    Trajectory::new(dim, dt, data)
}

fn step_system(kind: SystemKind, p: &[f64], state: &mut [f64], dt: f64, rng: &mut ChaCha8Rng) {
    match kind {
        SystemKind::Bernoulli => {
            // 2x mod 1 erodes one mantissa bit per step and collapses to 0;
            // a seeded perturbation of scale `jitter` keeps the orbit aperiodic.
            let jitter = p[0];
            let u: f64 = rng.gen();
            state[0] = (2.0 * state[0] + u * jitter).rem_euclid(1.0);
        }
        SystemKind::Logistic => {
            let r = p[0];
            state[0] = r * state[0] * (1.0 - state[0]);
        }
        SystemKind::Henon => {
            let (a, b) = (p[0], p[1]);
            let (x, y) = (state[0], state[1]);
            state[0] = 1.0 - a * x * x + y;
            state[1] = b * x;
        }
        SystemKind::Lorenz => rk4_step(state, dt, |s, d| {
            let (sigma, rho, beta) = (p[0], p[1], p[2]);
            d[0] = sigma * (s[1] - s[0]);
            d[1] = s[0] * (rho - s[2]) - s[1];
            d[2] = s[0] * s[1] - beta * s[2];
        }),
        SystemKind::Roessler => rk4_step(state, dt, |s, d| {
            let (a, b, c) = (p[0], p[1], p[2]);
            d[0] = -s[1] - s[2];
            d[1] = s[0] + a * s[1];
            d[2] = b + s[2] * (s[0] - c);
        }),
    }
}

fn rk4_step<F: Fn(&[f64; 3], &mut [f64; 3])>(state: &mut [f64], dt: f64, f: F) {
    let y: [f64; 3] = [state[0], state[1], state[2]];
    let mut k1 = [0.0; 3];
    let mut k2 = [0.0; 3];
    let mut k3 = [0.0; 3];
    let mut k4 = [0.0; 3];
    let mut tmp = [0.0; 3];
    f(&y, &mut k1);
    for i in 0..3 {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    f(&tmp, &mut k2);
    for i in 0..3 {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    f(&tmp, &mut k3);
    for i in 0..3 {
        tmp[i] = y[i] + dt * k3[i];
    }
    f(&tmp, &mut k4);
    for i in 0..3 {
        state[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Takens delay embedding of a scalar series: point k is
/// (s_k, s_{k+lag}, ..., s_{k+(m-1) lag}), giving len - (m-1) lag points.
pub fn delay_embed(series: &[f64], m: usize, lag: usize) -> Result<Trajectory> {
    if m == 0 || lag == 0 {
        return Err(Error::InvalidInput(
            "embedding dimension and lag must be positive".into(),
        ));
    }
    let min_len = (m - 1) * lag + 1;
    if series.len() < min_len {
        return Err(Error::InvalidInput(format!(
            "series too short: need at least {} samples for m={} and lag={}, got {}",
            min_len,
            m,
            lag,
            series.len()
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in series".into()));
    }
    let n = series.len() - (m - 1) * lag;
    let mut data = Vec::with_capacity(n * m);
    for k in 0..n {
        for t in 0..m {
            data.push(series[k + t * lag]);
        }
    }
    Trajectory::new(m, 1.0, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_direct_evaluation() {
        let spec = SystemSpec::new(SystemKind::Bernoulli).with_n(4).with_x0(vec![0.3]);
        let t = generate(&spec).unwrap();
        let expect = [0.3, 0.6, 0.2, 0.4];
        for (p, e) in t.points().zip(expect) {
            assert!((p[0] - e).abs() < 1e-9, "{} vs {}", p[0], e);
        }
        // Default jitter is tiny but real: the orbit must not collapse to 0.
        let long = generate(&spec.clone().with_n(200)).unwrap();
        assert!(long.points().skip(100).any(|p| p[0] != 0.0));
    }

    #[test]
    fn bernoulli_is_seed_deterministic() {
        let spec = SystemSpec::new(SystemKind::Bernoulli).with_n(64).with_seed(9);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate(&spec.clone().with_seed(10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn logistic_direct_evaluation() {
        let spec = SystemSpec::new(SystemKind::Logistic).with_n(3).with_x0(vec![0.5]);
        let t = generate(&spec).unwrap();
        let got: Vec<f64> = t.points().map(|p| p[0]).collect();
        assert_eq!(got, vec![0.5, 1.0, 0.0]);
    }

    #[test]
    fn map_outputs_stay_in_unit_interval() {
        for kind in [SystemKind::Bernoulli, SystemKind::Logistic] {
            let t = generate(&SystemSpec::new(kind).with_n(2000)).unwrap();
            assert!(t.points().all(|p| (0.0..=1.0).contains(&p[0])), "{kind}");
        }
    }

    #[test]
    fn henon_hand_iteration() {
        let spec = SystemSpec::new(SystemKind::Henon).with_n(3).with_x0(vec![0.0, 0.0]);
        let t = generate(&spec).unwrap();
        assert_eq!(t.point(0), &[0.0, 0.0]);
        assert_eq!(t.point(1), &[1.0, 0.0]);
        // x2 = 1 - 1.4 * 1 + 0 = -0.4, y2 = 0.3
        assert!((t.point(2)[0] + 0.4).abs() < 1e-15);
        assert!((t.point(2)[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn transient_discards_leading_samples() {
        let full = generate(&SystemSpec::new(SystemKind::Logistic).with_n(10)).unwrap();
        let cut = generate(&SystemSpec::new(SystemKind::Logistic).with_n(7).with_transient(3))
            .unwrap();
        for k in 0..7 {
            assert_eq!(cut.point(k), full.point(k + 3));
        }
    }

    #[test]
    fn unknown_parameter_name_is_rejected() {
        let spec = SystemSpec::new(SystemKind::Logistic).with_param("mu", 3.9);
        match generate(&spec).unwrap_err() {
            Error::InvalidInput(msg) => assert!(msg.contains("mu") && msg.contains('r')),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn wrong_x0_dimension_is_rejected() {
        let spec = SystemSpec::new(SystemKind::Lorenz).with_x0(vec![1.0]);
        assert!(matches!(generate(&spec), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn blow_up_names_the_failing_step() {
        // x0 far outside [0,1] makes the logistic iteration diverge in a few steps.
        let spec = SystemSpec::new(SystemKind::Logistic).with_n(100).with_x0(vec![3.0]);
        match generate(&spec).unwrap_err() {
            Error::Generation { step, .. } => assert!(step > 0 && step < 20),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn roessler_stays_finite_at_desk_scale() {
        let spec = SystemSpec::new(SystemKind::Roessler)
            .with_n(5000)
            .with_dt(0.05)
            .with_transient(500);
        let t = generate(&spec).unwrap();
        assert_eq!(t.len(), 5000);
        assert!(t.coords().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn delay_embed_direct_construction() {
        let t = delay_embed(&[1.0, 2.0, 3.0, 4.0, 5.0], 3, 1).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 3);
        assert_eq!(t.point(0), &[1.0, 2.0, 3.0]);
        assert_eq!(t.point(1), &[2.0, 3.0, 4.0]);
        assert_eq!(t.point(2), &[3.0, 4.0, 5.0]);

        let lag2 = delay_embed(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2, 2).unwrap();
        assert_eq!(lag2.len(), 4);
        assert_eq!(lag2.point(0), &[1.0, 3.0]);
        assert_eq!(lag2.point(3), &[4.0, 6.0]);
    }

    #[test]
    fn delay_embed_identity_and_length() {
        let series = [0.5, 0.25, 0.75, 0.1];
        let t = delay_embed(&series, 1, 1).unwrap();
        assert_eq!(t.dim(), 1);
        let got: Vec<f64> = t.points().map(|p| p[0]).collect();
        assert_eq!(got, series);

        for (m, lag) in [(2, 1), (2, 3), (3, 1)] {
            let t = delay_embed(&series, m, lag).unwrap_or_else(|_| {
                panic!("embedding m={m} lag={lag} should fit 4 samples")
            });
            assert_eq!(t.len(), series.len() - (m - 1) * lag);
        }
    }

    #[test]
    fn delay_embed_too_short_states_minimum() {
        match delay_embed(&[1.0, 2.0, 3.0], 3, 2).unwrap_err() {
            Error::InvalidInput(msg) => assert!(msg.contains("at least 5")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    /// Adaptive Runge-Kutta-Fehlberg 4(5) reference integrator, used only as
    /// an independent oracle for the fixed-step RK4 path.
    fn rkf45<F: Fn(&[f64; 3], &mut [f64; 3])>(
        f: &F,
        mut y: [f64; 3],
        t_end: f64,
        tol: f64,
    ) -> [f64; 3] {
        let mut t = 0.0;
        let mut h = 1e-3;
        let mut k = [[0.0f64; 3]; 6];
        while t < t_end {
            if t + h > t_end {
                h = t_end - t;
            }
            let a: [&[f64]; 5] = [
                &[0.25],
                &[3.0 / 32.0, 9.0 / 32.0],
                &[1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0],
                &[439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0],
                &[-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
            ];
            f(&y, &mut k[0]);
            for stage in 1..6 {
                let mut tmp = y;
                for (j, &c) in a[stage - 1].iter().enumerate() {
                    for d in 0..3 {
                        tmp[d] += h * c * k[j][d];
                    }
                }
                let kin = tmp;
                f(&kin, &mut k[stage]);
            }
            let b5 = [
                16.0 / 135.0,
                0.0,
                6656.0 / 12825.0,
                28561.0 / 56430.0,
                -9.0 / 50.0,
                2.0 / 55.0,
            ];
            let b4 = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];
            let mut y5 = y;
            let mut y4 = y;
            for (j, (c5, c4)) in b5.iter().zip(&b4).enumerate() {
                for d in 0..3 {
                    y5[d] += h * c5 * k[j][d];
                    y4[d] += h * c4 * k[j][d];
                }
            }
            let err = (0..3)
                .map(|d| (y5[d] - y4[d]).abs())
                .fold(0.0f64, f64::max)
                .max(1e-300);
            if err <= tol {
                t += h;
                y = y5;
            }
            h *= (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0);
        }
        y
    }

    #[test]
    fn lorenz_matches_adaptive_reference_integrator() {
        // At this step size the fixed-step integrator's truncation error is
        // well below the tolerance; a wrong tableau would miss by orders of
        // magnitude.
        let dt = 0.002;
        let spec = SystemSpec::new(SystemKind::Lorenz).with_n(101).with_dt(dt);
        let t = generate(&spec).unwrap();
        let f = |s: &[f64; 3], d: &mut [f64; 3]| {
            d[0] = 10.0 * (s[1] - s[0]);
            d[1] = s[0] * (28.0 - s[2]) - s[1];
            d[2] = s[0] * s[1] - 8.0 / 3.0 * s[2];
        };
        for step in [1usize, 10, 50, 100] {
            let reference = rkf45(&f, [1.0, 1.0, 1.0], dt * step as f64, 1e-12);
            for (d, &want) in reference.iter().enumerate() {
                let got = t.point(step)[d];
                assert!(
                    (got - want).abs() < 1e-6,
                    "step {step} coord {d}: {got} vs {want}"
                );
            }
        }
    }
}
