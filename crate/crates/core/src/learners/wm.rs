use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{Label, MistakeVector};
use crate::learners::Prediction;

/// How the learning rate is derived from `d` and the horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaVariant {
    /// `sqrt(8 ln d / T)`, the rate under which the `sqrt(0.5 ln(d) T)` regret bound holds.
    #[default]
    Sqrt8,
    /// `sqrt(2 ln d / T)`, the rate written in the algorithm listings.
    Sqrt2,
}

impl EtaVariant {
    pub fn eta(self, d: usize, horizon: usize) -> f64 {
        if horizon == 0 || d <= 1 {
            return 0.0;
        }
        let c = match self {
            EtaVariant::Sqrt8 => 8.0,
            EtaVariant::Sqrt2 => 2.0,
        };
        (c * (d as f64).ln() / horizon as f64).sqrt()
    }
}

impl std::str::FromStr for EtaVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sqrt8" => Ok(EtaVariant::Sqrt8),
            "sqrt2" => Ok(EtaVariant::Sqrt2),
            other => Err(format!(
                "unknown eta variant `{other}` (expected sqrt8 or sqrt2)"
            )),
        }
    }
}

impl std::fmt::Display for EtaVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EtaVariant::Sqrt8 => "sqrt8",
            EtaVariant::Sqrt2 => "sqrt2",
        })
    }
}

/// Weighted Majority over `d` experts: mistake counts plus a fixed learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct WmState {
    eta: f64,
    mistakes: MistakeVector,
}

impl WmState {
    pub fn new(d: usize, horizon: usize, variant: EtaVariant) -> Self {
        Self::with_eta(MistakeVector::zeros(d), variant.eta(d, horizon))
    }

    pub fn with_eta(mistakes: MistakeVector, eta: f64) -> Self {
        WmState { eta, mistakes }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn mistakes(&self) -> &MistakeVector {
        &self.mistakes
    }

    pub fn experts(&self) -> usize {
        self.mistakes.len()
    }

    /// Normalized weights `exp(-eta M_i) / sum_j exp(-eta M_j)`.
    pub fn weights(&self) -> Vec<f64> {
        let counts = self.mistakes.counts();
        let floor = self.mistakes.min().unwrap_or(0);
        // shifting by the minimum count leaves the normalized weights unchanged
        let raw: Vec<f64> = counts
            .iter()
            .map(|&m| (-self.eta * (m - floor) as f64).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    fn check(&self, advice: &[Label]) -> Result<()> {
        if advice.len() != self.experts() {
            return Err(Error::DimensionMismatch {
                expected: self.experts(),
                actual: advice.len(),
            });
        }
        Ok(())
    }

    /// Randomized prediction: `p_hat` is the total weight of experts advising 1.
    pub fn step(&self, advice: &[Label]) -> Result<Prediction> {
        self.check(advice)?;
        let p_hat: f64 = self
            .weights()
            .iter()
            .zip(advice)
            .filter(|(_, a)| a.is_one())
            .map(|(w, _)| w)
            .sum();
        Ok(Prediction::Randomized {
            p_hat: p_hat.clamp(0.0, 1.0),
        })
    }

    /// Probability of a mistake this round: the weight of the experts that are wrong on `y`.
    pub fn expected_error(&self, advice: &[Label], y: Label) -> Result<f64> {
        self.check(advice)?;
        let err: f64 = self
            .weights()
            .iter()
            .zip(advice)
            .filter(|(_, &a)| a != y)
            .map(|(w, _)| w)
            .sum();
        Ok(err.clamp(0.0, 1.0))
    }

    pub fn update(&mut self, advice: &[Label], y: Label) -> Result<()> {
        self.mistakes.record_advice(advice, y)
    }
}
