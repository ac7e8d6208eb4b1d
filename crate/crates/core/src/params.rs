use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign of the power nonlinearity `f(u) = sign * |u|^(2k) u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Defocusing,
    Focusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Fourth-order dispersion coefficient, `|beta| < 2`.
    pub beta: f64,
    /// Power index of the nonlinearity, `k >= 2`.
    pub k: u32,
    pub sign: Sign,
    /// Target regularity of the I-method, `s <= 2`.
    pub s: f64,
    /// I-method frequency cutoff, `N >= 1`.
    pub cutoff: f64,
}

impl ModelParams {
    pub fn new(beta: f64, k: u32, sign: Sign, s: f64, cutoff: f64) -> Result<Self> {
        let p = Self { beta, k, sign, s, cutoff };
        p.validate()?;
        Ok(p)
    }

    /// Defocusing, `beta = 1`, `k = 2`, with `I` switched off (`s = 2`).
    pub fn defocusing_quintic() -> Self {
        Self { beta: 1.0, k: 2, sign: Sign::Defocusing, s: 2.0, cutoff: 1.0 }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = k;
        self
    }

    pub fn with_smoothing(mut self, s: f64, cutoff: f64) -> Self {
        self.s = s;
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidParameter { name: "k", reason: format!("k >= 2 is required, got {}", self.k) });
        }
        if !(self.beta.is_finite() && self.beta.abs() < 2.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("|beta| < 2 is required, got {}", self.beta),
            });
        }
        if !(self.s.is_finite() && self.s <= 2.0) {
            return Err(Error::InvalidParameter { name: "s", reason: format!("s <= 2 is required, got {}", self.s) });
        }
        if !(self.cutoff.is_finite() && self.cutoff >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "N",
                reason: format!("N >= 1 is required, got {}", self.cutoff),
            });
        }
        Ok(())
    }

    /// Order of the smoothing operator, `sigma = 2 - s`.
    pub fn sigma(&self) -> f64 {
        2.0 - self.s
    }
}
