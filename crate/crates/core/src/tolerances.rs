//! Numerical thresholds shared by the pointwise and field-level routines.

use serde::{Deserialize, Serialize};

/// Scale-relative eigenvalue margin for the semidefinite test.
pub const EPS_EIG: f64 = 1e-12;
/// Determinant threshold below which a cell counts as deflated.
pub const EPS_DET: f64 = 1e-8;
/// Margin kept inside the range of the exponential map.
pub const EPS_RANGE: f64 = 1e-9;
/// Relative exp/log round-trip tolerance.
pub const EPS_RT: f64 = 1e-8;
/// Relative threshold for calling a tangent pure trace.
pub const EPS_LIN: f64 = 1e-12;

/// Bundle of the thresholds above, passed to calls that need several of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_eig: f64,
    pub eps_det: f64,
    pub eps_range: f64,
    pub eps_rt: f64,
    pub eps_lin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_eig: EPS_EIG,
            eps_det: EPS_DET,
            eps_range: EPS_RANGE,
            eps_rt: EPS_RT,
            eps_lin: EPS_LIN,
        }
    }
}
