use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the logarithm of the temporal distance enters the bias factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasForm {
    /// `1 + δ · ln(n − i) / ln(n)`, bounded by `1 + δ`.
    #[default]
    Normalized,
    /// `1 + δ · ln(n − i)`, unbounded.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasParams {
    pub delta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub form: BiasForm,
}

impl Default for BiasParams {
    fn default() -> Self {
        BiasParams {
            delta: 0.036,
            gamma: 0.61,
            form: BiasForm::Normalized,
        }
    }
}

impl BiasParams {
    pub fn new(delta: f64, gamma: f64) -> Self {
        BiasParams {
            delta,
            gamma,
            form: BiasForm::Normalized,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "delta must be ≥ 0, got {}",
                self.delta
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Factor for `n > i ≥ 1`; callers guarantee the ordering.
    #[inline]
    pub(crate) fn factor(&self, sim: f64, n: u64, i: u64) -> f64 {
        if sim < self.gamma {
            return 1.0;
        }
        let gap = ((n - i) as f64).ln();
        match self.form {
            BiasForm::Normalized => 1.0 + self.delta * gap / (n as f64).ln(),
            BiasForm::Literal => 1.0 + self.delta * gap,
        }
    }
}

/// Multiplier applied to the similarity between document `n` and an earlier
/// document `i`. Only similarities of at least `γ` are boosted.
pub fn distance_bias(sim: f64, n: u64, i: u64, params: &BiasParams) -> Result<f64> {
    if i == 0 || n <= i {
        return Err(Error::InvalidPositions(format!(
            "distance bias needs n > i ≥ 1, got n={n}, i={i}"
        )));
    }
    Ok(params.factor(sim, n, i))
}
