//! Numerical tolerances shared by every module.
//!
//! Each constant is the default; analyses that accept a [`Tolerances`]
//! block may override them per run.

use serde::{Deserialize, Serialize};

/// Round-trip residual allowed for numerically inverted maps.
pub const TAU_INV: f64 = 1e-10;
/// Value mismatch allowed at piecewise breakpoints.
pub const TAU_CONT: f64 = 1e-9;
/// One-sided derivative mismatch allowed at smooth junctions.
pub const TAU_DERIV: f64 = 1e-5;
/// A displacement `|f(x) - x|` at or below this is "numerically fixed".
pub const EPS_FIX: f64 = 1e-9;
/// Invariance residual accepted for measures.
pub const TAU_MEAS: f64 = 1e-6;
/// Deepest ladder piece reachable by literal conjugation-word evaluation.
pub const N_PIECE_CAP: u64 = 10_000;
/// Largest Cantor-Bendixson rank the derived-set iteration will compute.
pub const RANK_CAP: usize = 32;
/// Junctions per side checked by the counterexample verifier.
pub const N_CHECK: u64 = 40;
/// Width below which fixed points of a stage map are reported as a cluster.
pub const FIX_RESOLUTION: f64 = 1e-4;
/// Minimum separation of orbit points for a discrete orbit.
pub const EPS_SEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tau_inv: f64,
    pub tau_cont: f64,
    pub tau_deriv: f64,
    pub eps_fix: f64,
    pub tau_meas: f64,
    pub eps_sep: f64,
    pub fix_resolution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tau_inv: TAU_INV,
            tau_cont: TAU_CONT,
            tau_deriv: TAU_DERIV,
            eps_fix: EPS_FIX,
            tau_meas: TAU_MEAS,
            eps_sep: EPS_SEP,
            fix_resolution: FIX_RESOLUTION,
        }
    }
}
