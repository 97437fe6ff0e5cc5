use serde::Serialize;
use sha2::{Digest, Sha256};

use gpcq_core::{channel, coding, quantum, schur};

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    pub eigen: f64,
    pub support: f64,
    pub commutator: f64,
    pub projector: f64,
    pub povm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: quantum::TOL_HERMITIAN,
            trace: quantum::TOL_TRACE,
            eigen: quantum::TOL_EIGEN,
            support: quantum::TOL_SUPPORT,
            commutator: channel::TOL_COMMUTATOR,
            projector: schur::TOL_PROJECTOR,
            povm: coding::TOL_POVM,
        }
    }
}

/// Reproducibility record written to standard error after every run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub channel_sha256: Option<String>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub tolerances: Tolerances,
    pub version: &'static str,
    pub wall_time_s: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
