//! Privacy-budget accounting under basic composition.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A single recorded spend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    pub epsilon: f64,
}

/// Tracks ε spent against a fixed total. Basic composition: the ledger sum
/// may never exceed `epsilon_total`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon_total: f64,
    pub ledger: Vec<LedgerEntry>,
}

impl PrivacyBudget {
    pub fn new(epsilon_total: f64) -> Result<Self> {
        if !(epsilon_total > 0.0) {
            return Err(Error::invalid(format!(
                "epsilon_total must be positive, got {epsilon_total}"
            )));
        }
        Ok(PrivacyBudget { epsilon_total, ledger: Vec::new() })
    }

    pub fn spent(&self) -> f64 {
        self.ledger.iter().map(|e| e.epsilon).sum()
    }

    pub fn remaining(&self) -> f64 {
        (self.epsilon_total - self.spent()).max(0.0)
    }

    /// Records a spend with a label; fails without recording when the spend
    /// would exceed the total (beyond a rounding slop).
    pub fn spend(&mut self, label: impl Into<String>, epsilon: f64) -> Result<()> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid(format!("spend must be finite and >= 0, got {epsilon}")));
        }
        let slop = 1e-9 * self.epsilon_total.max(1.0);
        if self.spent() + epsilon > self.epsilon_total + slop {
            return Err(Error::BudgetExhausted { requested: epsilon, remaining: self.remaining() });
        }
        self.ledger.push(LedgerEntry { label: label.into(), epsilon });
        Ok(())
    }
}
