//! Numerical tolerances and algorithm knobs, collected in one place.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Tolerances {
    /// Relative accuracy of tridiagonal eigenvalues (times the spectral radius).
    pub eigen_rel: f64,
    /// Iteration cap for the implicit QL sweep, per eigenvalue.
    pub ql_max_iter: usize,
    /// Relative spread allowed among J eigenvalues inside one block.
    pub block_j_rel: f64,
    /// Bound on the commutator norm checked by the dense oracle.
    pub commutator: f64,
    /// Radius of the parallel-transport search, relative to the local step.
    pub transport_radius: f64,
    /// Separation below which two synthetic lattice points count as colliding.
    pub collision: f64,
    /// Minimum number of points a labelling region must hold.
    pub min_region_points: usize,
    /// Condition-number ceiling for the log-expansion and Taylor fits.
    pub max_condition: f64,
    /// Values of sigma_1(0) this close below an integer are rounded up to it.
    pub twisting_snap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eigen_rel: 1e-12,
            ql_max_iter: 60,
            block_j_rel: 1e-12,
            commutator: 1e-10,
            transport_radius: 0.4,
            collision: 1e-9,
            min_region_points: 10,
            max_condition: 1e12,
            twisting_snap: 1e-6,
        }
    }
}
