//! Machine-readable estimation reports.

use serde::{Deserialize, Serialize};

use crate::budget::LedgerEntry;
use crate::mech::SamplerRun;
use crate::rng::RngSeed;

/// Per-coordinate diagnostics of the coordinate-wise coarse phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoordDiag {
    pub coordinate: usize,
    pub chosen: f64,
    pub grid_bins: u128,
    pub epsilon_spent: f64,
}

/// Per-round diagnostics of the direct (degree-4 scored) coarse phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SosRoundDiag {
    pub round: usize,
    pub radius: f64,
    pub score_at_output: f64,
    pub epsilon_spent: f64,
    pub sampler: Option<SamplerRun>,
}

/// Per-round diagnostics of the fine phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FineRoundDiag {
    pub round: usize,
    pub halted: bool,
    pub noisy_halt_value: f64,
    pub distance: Option<f64>,
    pub step_norm: Option<f64>,
    pub gradient_flipped: Option<bool>,
    pub epsilon_spent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum PhaseDiag {
    CoarseCoordinatewise { r_star: f64, coordinates: Vec<CoordDiag> },
    CoarseSos { rounds: Vec<SosRoundDiag> },
    Fine {
        bucket_count: usize,
        bucket_size: usize,
        r_star: f64,
        halted: bool,
        rounds: Vec<FineRoundDiag>,
    },
}

/// The full output of a private estimation run: the estimate, per-phase
/// diagnostics, the budget ledger, and the seed and configuration that
/// reproduce it byte-for-byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimationReport {
    pub estimate: Vec<f64>,
    pub phases: Vec<PhaseDiag>,
    pub ledger: Vec<LedgerEntry>,
    pub epsilon_total: f64,
    pub seed: RngSeed,
    pub config: serde_json::Value,
}

impl EstimationReport {
    pub fn to_json(&self) -> crate::error::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn spent(&self) -> f64 {
        self.ledger.iter().map(|e| e.epsilon).sum()
    }
}
