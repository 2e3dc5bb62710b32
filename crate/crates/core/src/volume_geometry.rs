//! Log₂-volumes of unit `p`-balls over ℝ and ℂ, and their ratios.

use std::f64::consts::PI;
use std::fmt;

use libm::lgamma as ln_gamma;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

impl FieldTag {
    /// Real dimension of `K^d`.
    pub fn sigma(self, d: u64) -> u64 {
        match self {
            FieldTag::Real => d,
            FieldTag::Complex => 2 * d,
        }
    }

    /// 1 over ℝ, 2 over ℂ.
    pub fn alpha(self) -> f64 {
        match self {
            FieldTag::Real => 1.0,
            FieldTag::Complex => 2.0,
        }
    }
}

/// A norm exponent `p ∈ [1, ∞]`. Serializes as a number or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(Exponent(p))
        } else {
            Err(Error::domain("exponent", p, "in [1, inf]"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        1.0 / self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "∞" => Ok(Exponent::INFINITY),
            other => other
                .parse::<f64>()
                .map_err(|e| Error::config("exponent", e.to_string()))
                .and_then(Exponent::new),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p),
            Raw::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

fn log2_gamma(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        0.0
    } else {
        ln_gamma(x) / std::f64::consts::LN_2
    }
}

/// `log₂ vol(B_p)` in `K^d`, with ℂ^d identified with ℝ^{2d}.
pub fn log_unit_ball_volume(p: Exponent, d: u64, field: FieldTag) -> Result<f64> {
    if d < 1 {
        return Err(Error::domain("d", d as f64, ">= 1"));
    }
    let r = p.recip();
    let d = d as f64;
    Ok(match field {
        FieldTag::Real => d * (1.0 + log2_gamma(r + 1.0)) - log2_gamma(d * r + 1.0),
        FieldTag::Complex => {
            d * (PI.log2() + log2_gamma(2.0 * r + 1.0)) - log2_gamma(2.0 * d * r + 1.0)
        }
    })
}

/// `log₂(vol(B_p)/vol(B_q))`; exactly zero when `p = q`.
pub fn log_volume_ratio(p: Exponent, q: Exponent, d: u64, field: FieldTag) -> Result<f64> {
    if p == q {
        if d < 1 {
            return Err(Error::domain("d", d as f64, ">= 1"));
        }
        return Ok(0.0);
    }
    Ok(log_unit_ball_volume(p, d, field)? - log_unit_ball_volume(q, d, field)?)
}

/// Splits the per-dimension log-ratio into `(1/q − 1/p)·log₂σ(d)` and
/// a residual that stays bounded in `d`.
pub fn volume_ratio_normal_form(
    p: Exponent,
    q: Exponent,
    d: u64,
    field: FieldTag,
) -> Result<(f64, f64)> {
    let sigma = field.sigma(d) as f64;
    let slope = (q.recip() - p.recip()) * sigma.log2();
    let residual = log_volume_ratio(p, q, d, field)? / sigma - slope;
    Ok((slope, residual))
}
