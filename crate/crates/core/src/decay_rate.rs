//! Decay-rate functions ψ and the sequences they generate.
//!
//! Semi-axes are `μ_n = c₀·2^{−ψ(n)}`; ψ is carried in bits. The built-in
//! families extend naturally to all of `(0, ∞)` (with `0·log 0 = 0`), which
//! is what the ψ-average uses for indices at or below `t*`.

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::special_functions::lambert_w;
use crate::{Error, Result};

/// User-supplied ψ. Must be strictly increasing on `(t*, ∞)` with
/// `ψ(t)/t` non-decreasing; [`DecayRateSpec::check_decay_rate`] samples
/// both conditions.
pub type PsiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const CUSTOM_BRACKET_LIMIT: f64 = (1u64 << 60) as f64;
const CUSTOM_MAX_BISECTIONS: usize = 200;

#[derive(Clone)]
pub enum DecayFamily {
    /// `ψ(t) = c·t`.
    Linear {
        c: f64,
    },
    /// `ψ(t) = c·t·(log₂ t − c′)`.
    SuperLinear {
        c: f64,
        c_prime: f64,
    },
    Custom(PsiFn),
}

impl fmt::Debug for DecayFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayFamily::Linear { c } => f.debug_struct("Linear").field("c", c).finish(),
            DecayFamily::SuperLinear { c, c_prime } => f
                .debug_struct("SuperLinear")
                .field("c", c)
                .field("c_prime", c_prime)
                .finish(),
            DecayFamily::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A decay-rate function together with its threshold `t*` and scale `c₀`.
#[derive(Clone, Debug)]
pub struct DecayRateSpec {
    family: DecayFamily,
    t_star: f64,
    c0: f64,
}

/// ψ-average and ψ-difference at one dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PsiStatistics {
    pub d: u64,
    pub delta: f64,
    /// `None` for `d = 1`.
    pub zeta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecayViolation {
    NonPositive {
        t: f64,
        psi: f64,
    },
    NotIncreasing {
        t0: f64,
        t1: f64,
    },
    RatioDecreasing {
        t0: f64,
        t1: f64,
        ratio0: f64,
        ratio1: f64,
    },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecayRateReport {
    pub violations: Vec<DecayViolation>,
    /// Integer indices `1 ≤ n ≤ t*` that the ψ-average evaluates through
    /// the family's natural extension rather than through ψ proper.
    pub extended_indices: Vec<u64>,
}

impl DecayRateReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn positive(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(what, v, "finite and > 0"))
    }
}

impl DecayRateSpec {
    pub fn linear(c: f64, c0: f64) -> Result<Self> {
        positive("c", c)?;
        positive("c0", c0)?;
        Ok(DecayRateSpec {
            family: DecayFamily::Linear { c },
            t_star: 0.0,
            c0,
        })
    }

    /// `t* = 2^{c′}`. Any finite `c′` is accepted.
    pub fn superlinear(c: f64, c_prime: f64, c0: f64) -> Result<Self> {
        positive("c", c)?;
        positive("c0", c0)?;
        if !c_prime.is_finite() {
            return Err(Error::domain("c_prime", c_prime, "finite"));
        }
        Ok(DecayRateSpec {
            family: DecayFamily::SuperLinear { c, c_prime },
            t_star: c_prime.exp2(),
            c0,
        })
    }

    pub fn custom(psi: PsiFn, t_star: f64, c0: f64) -> Result<Self> {
        if !(t_star.is_finite() && t_star >= 0.0) {
            return Err(Error::domain("t_star", t_star, "finite and >= 0"));
        }
        positive("c0", c0)?;
        Ok(DecayRateSpec {
            family: DecayFamily::Custom(psi),
            t_star,
            c0,
        })
    }

    pub fn family(&self) -> &DecayFamily {
        &self.family
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn with_c0(&self, c0: f64) -> Result<Self> {
        positive("c0", c0)?;
        Ok(DecayRateSpec { c0, ..self.clone() })
    }

    /// ψ(t) for `t > t*`.
    pub fn eval_psi(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t > self.t_star) {
            return Err(Error::domain(
                "psi argument",
                t,
                format!("finite and > t* = {}", self.t_star),
            ));
        }
        Ok(self.raw_psi(t))
    }

    /// ψ on its natural extension: all `t ≥ 0` for the built-in families,
    /// `t > t*` for custom ones.
    pub fn psi_extended(&self, t: f64) -> Result<f64> {
        match self.family {
            DecayFamily::Custom(_) => self.eval_psi(t),
            _ if t.is_finite() && t >= 0.0 => Ok(self.raw_psi(t)),
            _ => Err(Error::domain("psi argument", t, "finite and >= 0")),
        }
    }

    fn raw_psi(&self, t: f64) -> f64 {
        match &self.family {
            DecayFamily::Linear { c } => c * t,
            DecayFamily::SuperLinear { c, c_prime } => {
                if t == 0.0 {
                    0.0
                } else {
                    c * t * (t * (-c_prime).exp2()).log2()
                }
            }
            DecayFamily::Custom(f) => f(t),
        }
    }

    /// ψ⁻¹(u) for `u > 0`; the result lies in `(t*, ∞)`.
    pub fn invert_psi(&self, u: f64) -> Result<f64> {
        positive("psi inverse argument", u)?;
        match &self.family {
            DecayFamily::Linear { c } => Ok(u / c),
            DecayFamily::SuperLinear { c, .. } => {
                let w = lambert_w(u * LN_2 / (c * self.t_star))?.value;
                Ok(self.t_star * w.exp())
            }
            DecayFamily::Custom(f) => self.invert_custom(f.as_ref(), u),
        }
    }

    fn invert_custom(&self, f: &(dyn Fn(f64) -> f64 + Send + Sync), u: f64) -> Result<f64> {
        let t0 = self.t_star;
        let mut lo = t0;
        let mut width = 1.0;
        let mut iterations = 0;
        while !(f(t0 + width) >= u) {
            lo = t0 + width;
            width *= 2.0;
            iterations += 1;
            if width > CUSTOM_BRACKET_LIMIT {
                return Err(Error::Convergence {
                    what: "psi inverse bracketing",
                    iterations,
                });
            }
        }
        let mut hi = t0 + width;
        for _ in 0..CUSTOM_MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-12 * mid.max(1.0) || mid <= lo || mid >= hi {
                break;
            }
            if f(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// δ(d) = (1/d)·Σ_{n=1}^{d} (ψ(d) − ψ(n)).
    ///
    /// Indices `n ≤ t*` go through [`Self::psi_extended`].
    pub fn psi_average(&self, d: u64) -> Result<f64> {
        if d < 1 {
            return Err(Error::domain("d", d as f64, ">= 1"));
        }
        let top = self.psi_extended(d as f64)?;
        let mut sum = 0.0;
        let mut comp = 0.0;
        for n in 1..d {
            // Kahan summation: d reaches 10⁶ in sweeps.
            let y = (top - self.psi_extended(n as f64)?) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        Ok(sum / d as f64)
    }

    /// ζ(d) = ψ(d) − ψ(d−1) for `d ≥ 2`.
    pub fn psi_difference(&self, d: u64) -> Result<f64> {
        if d < 2 {
            return Err(Error::domain("d", d as f64, ">= 2"));
        }
        Ok(self.psi_extended(d as f64)? - self.psi_extended((d - 1) as f64)?)
    }

    pub fn psi_statistics(&self, d: u64) -> Result<PsiStatistics> {
        Ok(PsiStatistics {
            d,
            delta: self.psi_average(d)?,
            zeta: if d >= 2 {
                Some(self.psi_difference(d)?)
            } else {
                None
            },
        })
    }

    /// `μ_n = c₀·2^{−ψ(n)}` for `n ≥ 1`.
    ///
    /// Custom families need `n > t*`. The super-linear natural extension
    /// is not monotone below `t*/e`, so prefixes reaching there need not be
    /// non-increasing.
    pub fn semi_axis(&self, n: u64) -> Result<f64> {
        if n < 1 {
            return Err(Error::domain("semi-axis index", n as f64, ">= 1"));
        }
        Ok(self.c0 * (-self.psi_extended(n as f64)?).exp2())
    }

    pub fn semi_axes(&self, n_max: u64) -> Result<Vec<f64>> {
        if n_max < 1 {
            return Err(Error::domain("n_max", n_max as f64, ">= 1"));
        }
        (1..=n_max).map(|n| self.semi_axis(n)).collect()
    }

    /// Samples ψ > 0, strict increase, and non-decreasing `ψ(t)/t` on `grid`.
    pub fn check_decay_rate(&self, grid: &[f64]) -> Result<DecayRateReport> {
        if grid.is_empty() {
            return Err(Error::domain("grid length", 0.0, "non-empty"));
        }
        for w in grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::domain("grid", w[1], "strictly increasing"));
            }
        }
        let values = grid
            .iter()
            .map(|&t| self.eval_psi(t))
            .collect::<Result<Vec<_>>>()?;

        let mut report = DecayRateReport::default();
        for (&t, &psi) in grid.iter().zip(&values) {
            if !(psi > 0.0) {
                report
                    .violations
                    .push(DecayViolation::NonPositive { t, psi });
            }
        }
        for i in 1..grid.len() {
            let (t0, t1) = (grid[i - 1], grid[i]);
            let (p0, p1) = (values[i - 1], values[i]);
            if !(p1 > p0) {
                report
                    .violations
                    .push(DecayViolation::NotIncreasing { t0, t1 });
            }
            let (ratio0, ratio1) = (p0 / t0, p1 / t1);
            if ratio1 < ratio0 - 1e-12 * ratio0.abs() {
                report.violations.push(DecayViolation::RatioDecreasing {
                    t0,
                    t1,
                    ratio0,
                    ratio1,
                });
            }
        }
        let top = self.t_star.floor() as u64;
        report.extended_indices = (1..=top).collect();
        Ok(report)
    }

    /// `(ψ(n*)/n*, n*)` with `n* = ⌈t*⌉ + 1`, so that
    /// `μ_n/μ_m ≤ 2^{c(m−n)}` for `n ≥ m ≥ n*`.
    pub fn semi_axis_ratio_constant(&self) -> Result<(f64, u64)> {
        let n_star = self.t_star.ceil() as u64 + 1;
        let c = self.eval_psi(n_star as f64)? / n_star as f64;
        Ok((c, n_star))
    }

    pub(crate) fn to_record(&self) -> Option<DecayRateRecord> {
        match self.family {
            DecayFamily::Linear { c } => Some(DecayRateRecord {
                family: FamilyName::Linear,
                c,
                c_prime: None,
                t_star: Some(self.t_star),
                c0: self.c0,
            }),
            DecayFamily::SuperLinear { c, c_prime } => Some(DecayRateRecord {
                family: FamilyName::Superlinear,
                c,
                c_prime: Some(c_prime),
                t_star: Some(self.t_star),
                c0: self.c0,
            }),
            DecayFamily::Custom(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub(crate) enum FamilyName {
    Linear,
    Superlinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct DecayRateRecord {
    family: FamilyName,
    c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_prime: Option<f64>,
    #[serde(default)]
    t_star: Option<f64>,
    c0: f64,
}

impl TryFrom<DecayRateRecord> for DecayRateSpec {
    type Error = Error;

    fn try_from(r: DecayRateRecord) -> Result<Self> {
        let spec = match r.family {
            FamilyName::Linear => {
                if r.c_prime.is_some() {
                    return Err(Error::config("c_prime", "not used by the linear family"));
                }
                DecayRateSpec::linear(r.c, r.c0)?
            }
            FamilyName::Superlinear => {
                let cp = r
                    .c_prime
                    .ok_or_else(|| Error::config("c_prime", "required for superlinear"))?;
                DecayRateSpec::superlinear(r.c, cp, r.c0)?
            }
        };
        if let Some(t) = r.t_star {
            if (t - spec.t_star).abs() > 1e-12 * spec.t_star.max(1.0) {
                return Err(Error::config(
                    "t_star",
                    format!("{t} disagrees with the family value {}", spec.t_star),
                ));
            }
        }
        Ok(spec)
    }
}

impl Serialize for DecayRateSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.to_record() {
            Some(r) => r.serialize(s),
            None => Err(serde::ser::Error::custom(
                "custom decay rates cannot be serialized",
            )),
        }
    }
}

impl<'de> Deserialize<'de> for DecayRateSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let record = DecayRateRecord::deserialize(d)?;
        DecayRateSpec::try_from(record).map_err(serde::de::Error::custom)
    }
}
