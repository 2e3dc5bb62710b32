//! Covering-entropy bounds for finite ellipsoids and asymptotic estimates
//! for infinite ones. Everything is in bits.

use std::f64::consts::LN_2;

use serde::{Deserialize, Deserializer, Serialize};

use crate::decay_rate::DecayRateSpec;
use crate::special_functions::lambert_w;
use crate::volume_geometry::{log_volume_ratio, Exponent, FieldTag};
use crate::{Epsilon, Error, Result};

/// Configurable constants for the non-constructive parts of the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConstants {
    /// Multiplier of `σ(d)·ζ(d)` in the remainder bracket.
    pub kappa_rem: f64,
    /// Constant in the `p < q` upper bound, whose value is not known.
    pub schuett_c0: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            kappa_rem: 1.0,
            schuett_c0: 1.0,
        }
    }
}

impl BoundConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_rem.is_finite() && self.kappa_rem >= 0.0) {
            return Err(Error::config(
                "constants.kappa_rem",
                format!("{} must be finite and >= 0", self.kappa_rem),
            ));
        }
        if !(self.schuett_c0.is_finite() && self.schuett_c0 > 0.0) {
            return Err(Error::config(
                "constants.schuett_c0",
                format!("{} must be finite and > 0", self.schuett_c0),
            ));
        }
        Ok(())
    }
}

/// `{x ∈ K^d : ‖x‖_{p,μ} ≤ 1}` with `μ₁ ≥ … ≥ μ_d > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteEllipsoid {
    p: Exponent,
    field: FieldTag,
    semi_axes: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FiniteEllipsoidRecord {
    p: Exponent,
    #[serde(default = "real")]
    field: FieldTag,
    semi_axes: Vec<f64>,
}

fn real() -> FieldTag {
    FieldTag::Real
}

impl<'de> Deserialize<'de> for FiniteEllipsoid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FiniteEllipsoidRecord::deserialize(d)?;
        FiniteEllipsoid::new(r.p, r.field, r.semi_axes).map_err(serde::de::Error::custom)
    }
}

/// Upper bound on `log₂ N` with the conditions under which it is proven.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteUpperBound {
    pub bits: f64,
    /// `ε ≤ 2μ_d`.
    pub epsilon_in_range: bool,
    /// `p ≥ q` and `ε ≤ 2μ_d`; otherwise the value rests on `schuett_c0`
    /// or is outside the proven range.
    pub rigorous: bool,
}

impl FiniteEllipsoid {
    pub fn new(p: Exponent, field: FieldTag, semi_axes: Vec<f64>) -> Result<Self> {
        if semi_axes.is_empty() {
            return Err(Error::domain("semi-axis count", 0.0, ">= 1"));
        }
        for (i, &mu) in semi_axes.iter().enumerate() {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::domain("semi-axis", mu, "finite and > 0"));
            }
            if i > 0 && mu > semi_axes[i - 1] {
                return Err(Error::domain(
                    "semi-axis",
                    mu,
                    format!("<= previous semi-axis {}", semi_axes[i - 1]),
                ));
            }
        }
        Ok(FiniteEllipsoid {
            p,
            field,
            semi_axes,
        })
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes
    }

    pub fn dim(&self) -> usize {
        self.semi_axes.len()
    }

    /// `‖x‖_{p,μ}`. Entries are coordinate magnitudes for the complex field.
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(weighted_norm(
            self.p,
            x.iter().zip(&self.semi_axes).map(|(&x, &m)| x / m),
        ))
    }

    pub fn membership(&self, x: &[f64]) -> Result<bool> {
        Ok(self.norm(x)? <= 1.0)
    }

    /// `(μ₁⋯μ_d)^{1/d}` over the first `d` semi-axes.
    pub fn geometric_mean(&self, d: usize) -> Result<f64> {
        Ok(self.log2_geometric_mean(d)?.exp2())
    }

    fn log2_geometric_mean(&self, d: usize) -> Result<f64> {
        if d < 1 || d > self.dim() {
            return Err(Error::domain(
                "d",
                d as f64,
                format!("in [1, {}]", self.dim()),
            ));
        }
        Ok(self.semi_axes[..d].iter().map(|m| m.log2()).sum::<f64>() / d as f64)
    }

    fn sigma(&self) -> u64 {
        self.field.sigma(self.dim() as u64)
    }

    /// Volume lower bound `σ·(log₂ μ̄ + log₂(1/ε)) + log₂ V_{p,q}`, floored at 0.
    pub fn finite_entropy_lower_bound(&self, q: Exponent, eps: Epsilon) -> Result<f64> {
        let d = self.dim();
        let sigma = self.sigma() as f64;
        let bits = sigma * (self.log2_geometric_mean(d)? + eps.log2_inv())
            + log_volume_ratio(self.p, q, d as u64, self.field)?;
        Ok(bits.max(0.0))
    }

    /// Volume upper bound for `p ≥ q`; for `p < q` the bound with the
    /// configured constant, flagged non-rigorous. Floored at 0.
    pub fn finite_entropy_upper_bound(
        &self,
        q: Exponent,
        eps: Epsilon,
        constants: &BoundConstants,
    ) -> Result<FiniteUpperBound> {
        constants.validate()?;
        let d = self.dim();
        let sigma = self.sigma() as f64;
        let log_mean = self.log2_geometric_mean(d)?;
        let p_ge_q = self.p >= q;
        let bits = if p_ge_q {
            sigma * (2.0 + log_mean + eps.log2_inv())
                + log_volume_ratio(self.p, q, d as u64, self.field)?
        } else {
            sigma
                * (constants.schuett_c0.log2()
                    + (q.recip() - self.p.recip()) * sigma.log2()
                    + log_mean
                    + eps.log2_inv())
        };
        // ε ≤ 2μ_d, compared in log₂ with a relative guard.
        let log_mu_d = self.semi_axes[d - 1].log2();
        let in_range = -eps.log2_inv() <= 1.0 + log_mu_d + 1e-12 * (1.0 + log_mu_d).abs().max(1.0);
        Ok(FiniteUpperBound {
            bits: bits.max(0.0),
            epsilon_in_range: in_range,
            rigorous: p_ge_q && in_range,
        })
    }
}

fn weighted_norm(p: Exponent, scaled: impl Iterator<Item = f64>) -> f64 {
    if p.is_infinite() {
        scaled.fold(0.0, |m, v| m.max(v.abs()))
    } else if p.value() == 1.0 {
        scaled.map(f64::abs).sum()
    } else if p.value() == 2.0 {
        scaled.map(|v| v * v).sum::<f64>().sqrt()
    } else {
        let p = p.value();
        scaled.map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Unit ball of an ℓ^p-weighted sequence space with semi-axes from a
/// decay rate. With `index0` set, the sequence is `(μ₀, μ₁, μ₂, …)`;
/// otherwise `(μ₁, μ₂, …)`.
#[derive(Clone, Debug, Serialize)]
pub struct InfiniteEllipsoid {
    p: Exponent,
    field: FieldTag,
    rate: DecayRateSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    index0: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InfiniteEllipsoidRecord {
    p: Exponent,
    #[serde(default = "real")]
    field: FieldTag,
    rate: DecayRateSpec,
    #[serde(default)]
    index0: Option<f64>,
}

impl<'de> Deserialize<'de> for InfiniteEllipsoid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = InfiniteEllipsoidRecord::deserialize(d)?;
        let e = InfiniteEllipsoid::new(r.p, r.field, r.rate);
        match r.index0 {
            Some(mu0) => e.with_index0(mu0),
            None => Ok(e),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Validity flags attached to an [`EntropyEstimate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateFlags {
    /// `d_ε > t* + 2`, where the ψ-difference lower bound applies.
    pub epsilon_small_enough: bool,
    /// `p ≥ q`, the regime with a constructive upper bound.
    pub p_ge_q_rigorous: bool,
}

/// `H(ε) ≈ σ(d_ε)·{δ(d_ε) + (1/q − 1/p)·log₂σ(d_ε)} ± κ·σ(d_ε)·ζ(d_ε)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub epsilon: Epsilon,
    pub effective_dim: u64,
    pub main_term: f64,
    pub second_order: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub valid: EstimateFlags,
}

impl EntropyEstimate {
    pub fn total(&self) -> f64 {
        self.main_term + self.second_order
    }
}

impl InfiniteEllipsoid {
    pub fn new(p: Exponent, field: FieldTag, rate: DecayRateSpec) -> Self {
        InfiniteEllipsoid {
            p,
            field,
            rate,
            index0: None,
        }
    }

    /// Prepends a coordinate with semi-axis `mu0` ahead of `μ₁`.
    pub fn with_index0(mut self, mu0: f64) -> Result<Self> {
        if !(mu0.is_finite() && mu0 > 0.0) {
            return Err(Error::domain("index-0 semi-axis", mu0, "finite and > 0"));
        }
        self.index0 = Some(mu0);
        Ok(self)
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn rate(&self) -> &DecayRateSpec {
        &self.rate
    }

    pub fn index0(&self) -> Option<f64> {
        self.index0
    }

    /// Decay-rate index of the coordinate at `position` (0-based).
    fn rate_index(&self, position: usize) -> Option<u64> {
        match self.index0 {
            Some(_) if position == 0 => None,
            Some(_) => Some(position as u64),
            None => Some(position as u64 + 1),
        }
    }

    /// Semi-axis of the coordinate at `position` (0-based).
    pub fn semi_axis_at(&self, position: usize) -> Result<f64> {
        match self.rate_index(position) {
            None => Ok(self.index0.unwrap_or_default()),
            Some(n) => self.rate.semi_axis(n),
        }
    }

    pub fn semi_axes(&self, count: usize) -> Result<Vec<f64>> {
        (0..count).map(|i| self.semi_axis_at(i)).collect()
    }

    /// `‖x‖_{p,μ}` for a finitely supported `x` (magnitudes for ℂ).
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        let axes = self.semi_axes(x.len())?;
        Ok(weighted_norm(
            self.p,
            x.iter().zip(&axes).map(|(&x, &m)| x / m),
        ))
    }

    pub fn membership(&self, x: &[f64]) -> Result<bool> {
        Ok(self.norm(x)? <= 1.0)
    }

    /// The first `d` coordinates as a finite ellipsoid.
    pub fn truncate(&self, d: usize) -> Result<FiniteEllipsoid> {
        if d < 1 {
            return Err(Error::domain("d", d as f64, ">= 1"));
        }
        FiniteEllipsoid::new(self.p, self.field, self.semi_axes(d)?)
    }

    /// `d_ε = ⌈ψ⁻¹(log₂(1/ε) + log₂ c₀)⌉`, at least 1.
    pub fn effective_dimension(&self, eps: Epsilon) -> Result<u64> {
        let c0 = self.rate.c0();
        let u = eps.log2_inv() + c0.log2();
        if !(u > 0.0) {
            return Err(Error::domain(
                "epsilon",
                eps.value(),
                format!("epsilon < c0 = {c0}"),
            ));
        }
        let t = self.rate.invert_psi(u)?;
        let nearest = t.round();
        let t = if (t - nearest).abs() <= 1e-9 * t {
            nearest
        } else {
            t
        };
        Ok((t.ceil() as u64).max(1))
    }

    /// Main term, second-order term and remainder bracket at `ε`.
    ///
    /// The estimate depends only on the decay rate; an index-0 coordinate
    /// changes the entropy by `O(log(1/ε))`, below the remainder.
    pub fn infinite_entropy_estimate(
        &self,
        q: Exponent,
        eps: Epsilon,
        kappa_rem: f64,
    ) -> Result<EntropyEstimate> {
        if !(kappa_rem.is_finite() && kappa_rem >= 0.0) {
            return Err(Error::domain("kappa_rem", kappa_rem, "finite and >= 0"));
        }
        let d = self.effective_dimension(eps)?;
        let sigma = self.field.sigma(d) as f64;
        let delta = self.rate.psi_average(d)?;
        // ζ needs d ≥ 2; at d = 1 the next difference stands in.
        let zeta = self.rate.psi_difference(d.max(2))?;
        let main = sigma * delta;
        let second = sigma * (q.recip() - self.p.recip()) * sigma.log2();
        let spread = kappa_rem * sigma * zeta.abs();
        Ok(EntropyEstimate {
            epsilon: eps,
            effective_dim: d,
            main_term: main,
            second_order: second,
            bracket_lo: main + second - spread,
            bracket_hi: main + second + spread,
            valid: EstimateFlags {
                epsilon_small_enough: d as f64 > self.rate.t_star() + 2.0,
                p_ge_q_rigorous: self.p >= q,
            },
        })
    }

    /// First omitted rate index after keeping `d` coordinates, checked
    /// against the semi-axis ratio threshold. Returns `(μ, c)`.
    fn omitted(&self, d: usize) -> Result<(f64, f64)> {
        let (c, n_star) = self.rate.semi_axis_ratio_constant()?;
        let next = self.rate_index(d).unwrap_or(0);
        if next < n_star {
            return Err(Error::domain(
                "truncation dimension",
                d as f64,
                format!("first omitted index >= n* = {n_star}"),
            ));
        }
        Ok((self.rate.semi_axis(next)?, c))
    }

    /// Additive radius lost by covering the `d`-truncation instead of the
    /// whole ellipsoid: `K^{1/q}·μ_{next}` with `K = 2^{cq}/(2^{cq} − 1)`,
    /// or `μ_{next}` for `q = ∞`.
    pub fn truncation_tail(&self, d: usize, q: Exponent) -> Result<f64> {
        let (mu, c) = self.omitted(d)?;
        if q.is_infinite() {
            return Ok(mu);
        }
        let k = tail_constant(c, q.value());
        Ok(k.powf(q.recip()) * mu)
    }

    /// `ρ̄ = (ρ^q + K·μ_{next}^q)^{1/q}`, or `max(ρ, μ_{next})` for `q = ∞`.
    pub fn inflated_radius(&self, rho: f64, d: usize, q: Exponent) -> Result<f64> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::domain("rho", rho, "finite and >= 0"));
        }
        let (mu, c) = self.omitted(d)?;
        if q.is_infinite() {
            return Ok(rho.max(mu));
        }
        let q = q.value();
        Ok((rho.powf(q) + tail_constant(c, q) * mu.powf(q)).powf(1.0 / q))
    }
}

fn tail_constant(c: f64, q: f64) -> f64 {
    let g = (c * q).exp2();
    g / (g - 1.0)
}

/// `((α/2c)·L², (α/c)·(1/q − 1/p)·L·log₂L)` with `L = log₂(1/ε)`.
pub fn entropy_linear_closed_form(
    c: f64,
    p: Exponent,
    q: Exponent,
    field: FieldTag,
    eps: Epsilon,
) -> Result<(f64, f64)> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain("c", c, "finite and > 0"));
    }
    let l = eps.log2_inv();
    let ll = eps.log2_log2_inv()?;
    let alpha = field.alpha();
    Ok((
        alpha / (2.0 * c) * l * l,
        alpha / c * (q.recip() - p.recip()) * l * ll,
    ))
}

/// Closed form for `ψ(t) = c·t·(log₂t − c′)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperLinearClosedForm {
    pub value: f64,
    pub beta: f64,
    /// Size of the unresolved `O(e^{−β})` relative correction.
    pub relative_uncertainty: f64,
}

/// `(α·c·2^{2c′−1}/ln2)·e^{2β}·(β + ½)` with `β = W(ln(1/ε)/(2^{c′}·c))`.
pub fn entropy_superlinear_closed_form(
    c: f64,
    c_prime: f64,
    field: FieldTag,
    eps: Epsilon,
) -> Result<SuperLinearClosedForm> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain("c", c, "finite and > 0"));
    }
    if !c_prime.is_finite() {
        return Err(Error::domain("c_prime", c_prime, "finite"));
    }
    let arg = eps.ln_inv() / (c_prime.exp2() * c);
    if !(arg > 0.0) {
        return Err(Error::domain("epsilon", eps.value(), "epsilon < 1"));
    }
    let beta = lambert_w(arg)?.value;
    let value =
        field.alpha() * c * (2.0 * c_prime - 1.0).exp2() / LN_2 * (2.0 * beta).exp() * (beta + 0.5);
    Ok(SuperLinearClosedForm {
        value,
        beta,
        relative_uncertainty: (-beta).exp(),
    })
}

/// `(α·L²/(2c·log₂L))·(1 + log₂log₂L/log₂L)` with `L = log₂(1/ε)`.
pub fn entropy_second_order_form(c: f64, field: FieldTag, eps: Epsilon) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain("c", c, "finite and > 0"));
    }
    Ok(field.alpha() / (2.0 * c) * second_order_core(eps)?)
}

/// `L²/log₂L·(1 + log₂log₂L/log₂L)`; needs `ε < 1/4`.
pub(crate) fn second_order_core(eps: Epsilon) -> Result<f64> {
    let l = eps.log2_inv();
    if !(l > 2.0) {
        return Err(Error::domain("epsilon", eps.value(), "epsilon < 1/4"));
    }
    let ll = l.log2();
    let lll = ll.log2();
    Ok(l * l / ll * (1.0 + lll / ll))
}
