use crate::error::{Error, Result};

/// Environment variable that overrides the default memory budget.
pub const BUDGET_ENV: &str = "GPCQ_BUDGET_BYTES";

/// Default budget for dense operator storage: 4 GiB.
pub const DEFAULT_BUDGET_BYTES: u128 = 4 << 30;

/// Upper bound on the bytes a single construction may allocate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    bytes: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            bytes: DEFAULT_BUDGET_BYTES,
        }
    }
}

impl Budget {
    pub fn bytes(bytes: u128) -> Self {
        Self { bytes }
    }

    /// Reads `GPCQ_BUDGET_BYTES`, falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => v
                .trim()
                .parse::<u128>()
                .map(Self::bytes)
                .map_err(|_| Error::Parse(format!("{BUDGET_ENV} must be a byte count, got `{v}`"))),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn limit(&self) -> u128 {
        self.bytes
    }

    pub fn check(&self, required: u128) -> Result<()> {
        if required > self.bytes {
            return Err(Error::BudgetExceeded {
                required,
                budget: self.bytes,
            });
        }
        Ok(())
    }

    /// Bytes of one dense complex `dim x dim` matrix.
    pub fn matrix_bytes(dim: usize) -> u128 {
        (dim as u128) * (dim as u128) * 16
    }
}
