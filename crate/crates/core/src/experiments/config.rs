use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ExperimentKind;
use crate::{Error, Result};

/// Inputs of every experiment. `None` fields take per-experiment defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub paths: Option<usize>,
    pub steps: usize,
    pub grid: usize,
    pub trunc: Option<usize>,
    pub kl_terms: usize,
    pub dim: usize,
    pub alpha: f64,
    /// Scales paths, steps and KL terms down 10x.
    pub quick: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            paths: None,
            steps: 4096,
            grid: 64,
            trunc: None,
            kl_terms: 1000,
            dim: 3,
            alpha: 0.01,
            quick: false,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("paths", self.paths.unwrap_or(1)),
            ("steps", self.steps),
            ("grid", self.grid),
            ("kl-terms", self.kl_terms),
            ("dim", self.dim),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::arg(format!("{name} must be positive")));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::arg(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    fn scale(&self, n: usize, min: usize) -> usize {
        if self.quick {
            (n / 10).max(min)
        } else {
            n
        }
    }

    pub fn paths_for(&self, kind: ExperimentKind) -> usize {
        let default = match kind {
            ExperimentKind::SignDds | ExperimentKind::Bessel | ExperimentKind::Counterexample | ExperimentKind::Gx => {
                10_000
            }
            ExperimentKind::KlReconstruct => 1_000,
            ExperimentKind::SignChaos | ExperimentKind::FourthMoment | ExperimentKind::ItoIdentities => 100_000,
        };
        self.scale(self.paths.unwrap_or(default), 20)
    }

    /// Time steps, rounded to an even number in quick mode.
    pub fn steps_eff(&self) -> usize {
        if self.quick {
            ((self.steps / 10).max(2) + 1) & !1
        } else {
            self.steps
        }
    }

    pub fn trunc_for(&self, kind: ExperimentKind) -> usize {
        self.trunc.unwrap_or(match kind {
            ExperimentKind::Counterexample => 12,
            _ => 5,
        })
    }

    pub fn kl_terms_eff(&self) -> usize {
        self.scale(self.kl_terms, 10)
    }
}
