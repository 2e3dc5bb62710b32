use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Covering radius `ε > 0`, stored as `log₂(1/ε)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Epsilon {
    log2_inv: f64,
}

impl Epsilon {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::domain("epsilon", epsilon, "finite and > 0"));
        }
        Ok(Epsilon {
            log2_inv: -epsilon.log2(),
        })
    }

    /// `ε = 2^{−bits}`.
    pub fn from_log2_inv(bits: f64) -> Result<Self> {
        if !bits.is_finite() {
            return Err(Error::domain("log2(1/epsilon)", bits, "finite"));
        }
        Ok(Epsilon { log2_inv: bits })
    }

    /// The radius itself; underflows to `0.0` below `2^{−1074}`.
    pub fn value(self) -> f64 {
        (-self.log2_inv).exp2()
    }

    pub fn log2_inv(self) -> f64 {
        self.log2_inv
    }

    pub fn ln_inv(self) -> f64 {
        self.log2_inv * LN_2
    }

    /// `log₂ log₂ (1/ε)`; requires `ε < 1`.
    pub(crate) fn log2_log2_inv(self) -> Result<f64> {
        if self.log2_inv <= 0.0 {
            return Err(Error::domain("epsilon", self.value(), "epsilon < 1"));
        }
        Ok(self.log2_inv.log2())
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^-{}", self.log2_inv)
    }
}
