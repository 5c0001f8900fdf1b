//! Distance metrics over points in d-dimensional real space.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Supported norms. Euclidean is the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    Maximum,
    Manhattan,
}

impl Metric {
    /// Stable id used by the binary matrix format.
    pub fn id(self) -> u8 {
        match self {
            Metric::Euclidean => 0,
            Metric::Maximum => 1,
            Metric::Manhattan => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(Metric::Euclidean),
            1 => Some(Metric::Maximum),
            2 => Some(Metric::Manhattan),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Maximum => "maximum",
            Metric::Manhattan => "manhattan",
        }
    }

    /// Distance without the length check, for hot loops over validated data.
    #[inline]
    pub(crate) fn dist(self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Metric::Maximum => p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            Metric::Manhattan => p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "maximum" => Ok(Metric::Maximum),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::InvalidInput(format!(
                "unknown metric '{other}' (expected euclidean, maximum or manhattan)"
            ))),
        }
    }
}

/// d(p, q) under the chosen metric; zero exactly when p equals q.
pub fn metric_distance(p: &[f64], q: &[f64], metric: Metric) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(metric.dist(p, q))
}
