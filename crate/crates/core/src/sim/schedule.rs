use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phase parameters for one phase-then-mix step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub rho: f64,
    pub tau: f64,
}

/// Per-step parameters for a fixed number of steps.
///
/// Multi-step runs are normally configured through the linear rule
/// `rho_h = rho_a + h rho_b`, `tau_h = tau_a + h tau_b` for `h = 1..=steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub steps: Vec<Step>,
    /// Extra phase per uniquely assigned variable (partial-assignment search).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearRule {
    pub rho_a: f64,
    pub rho_b: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    pub steps: usize,
}

impl PhaseSchedule {
    pub fn single(rho: f64, tau: f64) -> Self {
        PhaseSchedule {
            steps: vec![Step { rho, tau }],
            sigma: None,
        }
    }

    pub fn from_steps(steps: Vec<Step>) -> Result<Self> {
        let s = PhaseSchedule { steps, sigma: None };
        s.validate()?;
        Ok(s)
    }

    pub fn linear(rule: LinearRule) -> Result<Self> {
        let steps = (1..=rule.steps)
            .map(|h| Step {
                rho: rule.rho_a + h as f64 * rule.rho_b,
                tau: rule.tau_a + h as f64 * rule.tau_b,
            })
            .collect();
        Self::from_steps(steps)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Both phase slopes must lie in `[-1, 1]`; integer shifts only add
    /// global phases, and negating both conjugates the final state.
    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::usage("phase schedule has no steps"));
        }
        for (h, s) in self.steps.iter().enumerate() {
            if !(-1.0..=1.0).contains(&s.rho) || !(-1.0..=1.0).contains(&s.tau) {
                return Err(Error::domain(format!(
                    "step {}: (rho, tau) = ({}, {}) outside [-1, 1]",
                    h + 1,
                    s.rho,
                    s.tau
                )));
            }
        }
        Ok(())
    }
}
