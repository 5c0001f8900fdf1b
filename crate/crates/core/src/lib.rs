//! Recurrence-matrix analysis of dynamical systems.
//!
//! A recurrence matrix records, for every pair of samples of a trajectory,
//! whether the two states lie within a threshold distance of each other.
//! This crate builds such matrices from trajectories, checks the structural
//! conditions under which the binary matrix determines the trajectory's
//! geometry, reconstructs a topologically equivalent trajectory from the
//! matrix alone, and estimates return-time statistics and dynamical
//! invariants from it.
//!
//! The main entry points:
//!
//! - [`SystemSpec::generate`] and [`delay_embed`] produce test trajectories;
//! - [`build_matrix`] and [`calibrate_epsilon`] build and tune matrices;
//! - [`check_separation`] verifies the conditions for reconstructibility;
//! - [`reconstruct`] and [`validate`] rebuild a trajectory from bits and
//!   score the result;
//! - [`return_times`] with the `test_*` functions cover return-time laws;
//! - [`recurrence_rate`], [`estimate_k2`], [`correlation_sum`] estimate
//!   invariants;
//! - [`twin_surrogate`] and [`sync_index`] support surrogate testing and
//!   synchronization analysis.
//!
//! Every randomized computation takes an explicit seed and is deterministic
//! across runs and thread counts.

pub mod error;
mod mds;
pub mod matrix;
pub mod metric;
pub mod reconstruct;
pub mod recmat;
pub mod rqa;
pub mod separation;
pub mod stats;
pub mod surrogate;
pub mod sync;
pub mod systems;
pub mod trajectory;

pub use error::{Error, Result};
pub use matrix::RecurrenceMatrix;
pub use metric::{metric_distance, Metric};
pub use reconstruct::{
    embed, embed_with_diagnostics, geodesic_completion, proxy_distances, reconstruct, validate,
    Embedding, ProxyDistanceMatrix, ReconstructionResult, ValidationMetrics,
};
pub use recmat::{build_matrix, build_matrix_naive, calibrate_epsilon, EpsilonCalibration};
pub use rqa::{
    correlation_sum, d2_slope, diagonal_histogram, estimate_k2, recurrence_rate,
    DiagonalHistogram,
};
pub use separation::{check_separation, collapse_twins, SeparationReport};
pub use stats::{
    first_return_time, return_times, test_exponential, test_independence, test_poisson_counts,
    ExponentialTest, IndependenceTest, PoissonTest, ReturnTimeSample,
};
pub use surrogate::{twin_surrogate, SurrogateSet, SurrogateSpec};
pub use sync::sync_index;
pub use systems::{delay_embed, generate, SystemKind, SystemSpec};
pub use trajectory::Trajectory;
