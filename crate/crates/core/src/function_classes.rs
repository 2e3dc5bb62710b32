//! Analytic function classes as sandwiches of ellipsoids: periodic
//! functions analytic on a strip, functions analytic on a disk, and entire
//! functions of exponential type.

use std::collections::BTreeMap;
use std::f64::consts::{E, LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decay_rate::DecayRateSpec;
use crate::ellipsoid_entropy::{entropy_linear_closed_form, second_order_core, InfiniteEllipsoid};
use crate::special_functions::{lambert_w, stirling_supremum};
use crate::volume_geometry::{Exponent, FieldTag};
use crate::{Epsilon, Error, Result};

/// Number of boundary samples used when none is specified.
pub const DEFAULT_SUP_SAMPLES: usize = 1 << 16;

fn positive(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(what, v, "finite and > 0"))
    }
}

/// Entropy bracket for a function class, in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassBracket {
    pub lo: f64,
    pub hi: f64,
    /// Coefficient multiplying the unknown `γ(ε) ∈ [−1, 1]` in the
    /// second-order term, where the class has one.
    pub gamma_band: Option<f64>,
}

/// 2π-periodic functions analytic on `|Im z| < s` and bounded there by `M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripClass {
    pub s: f64,
    #[serde(rename = "M", alias = "m")]
    pub m: f64,
}

impl StripClass {
    pub fn new(s: f64, m: f64) -> Result<Self> {
        let cls = StripClass { s, m };
        cls.validate()?;
        Ok(cls)
    }

    pub fn validate(&self) -> Result<()> {
        positive("s", self.s)?;
        positive("M", self.m)
    }

    /// ψ slope `c = s/(2 ln 2)`.
    pub fn rate_constant(&self) -> f64 {
        self.s / (2.0 * LN_2)
    }

    /// `(inner ℓ¹, outer ℓ²)` ellipsoids over ℂ with `μ_n = M·e^{−sn/2}` and
    /// `μ_n = √2·M·e^{−s(n−1)/2}`.
    pub fn strip_ellipsoids(&self) -> Result<(InfiniteEllipsoid, InfiniteEllipsoid)> {
        self.validate()?;
        let c = self.rate_constant();
        let inner = DecayRateSpec::linear(c, self.m)?;
        let outer = DecayRateSpec::linear(c, 2f64.sqrt() * self.m * (self.s / 2.0).exp())?;
        Ok((
            InfiniteEllipsoid::new(Exponent::ONE, FieldTag::Complex, inner),
            InfiniteEllipsoid::new(Exponent::TWO, FieldTag::Complex, outer),
        ))
    }

    /// `lo` from the inner ellipsoid in ℓ², `hi` from the outer one in ℓ¹.
    pub fn strip_entropy_bracket(&self, eps: Epsilon) -> Result<ClassBracket> {
        self.validate()?;
        let c = self.rate_constant();
        let (lo, hi) = linear_bracket(c, eps)?;
        Ok(ClassBracket {
            lo,
            hi,
            gamma_band: Some(2.0 * LN_2 / self.s * eps.log2_inv() * eps.log2_log2_inv()?),
        })
    }
}

fn linear_bracket(c: f64, eps: Epsilon) -> Result<(f64, f64)> {
    let (lead_lo, second_lo) =
        entropy_linear_closed_form(c, Exponent::ONE, Exponent::TWO, FieldTag::Complex, eps)?;
    let (lead_hi, second_hi) =
        entropy_linear_closed_form(c, Exponent::TWO, Exponent::ONE, FieldTag::Complex, eps)?;
    Ok((lead_lo + second_lo, lead_hi + second_hi))
}

/// Functions analytic on the open disk of radius `r′` and bounded there by
/// `M`, measured in the sup-metric on the circle of radius `r < r′`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskClass {
    pub r: f64,
    pub r_prime: f64,
    #[serde(rename = "M", alias = "m")]
    pub m: f64,
}

impl DiskClass {
    pub fn new(r: f64, r_prime: f64, m: f64) -> Result<Self> {
        let cls = DiskClass { r, r_prime, m };
        cls.validate()?;
        Ok(cls)
    }

    pub fn validate(&self) -> Result<()> {
        positive("r", self.r)?;
        positive("M", self.m)?;
        if !(self.r_prime.is_finite() && self.r_prime > self.r) {
            return Err(Error::domain(
                "r_prime",
                self.r_prime,
                format!("finite and > r = {}", self.r),
            ));
        }
        Ok(())
    }

    /// `log₂(r′/r)`.
    pub fn rate_constant(&self) -> f64 {
        (self.r_prime / self.r).log2()
    }

    /// `(inner ℓ¹, outer ℓ²)` ellipsoids over ℂ with `μ_k = M·(r/r′)^k`,
    /// `k ≥ 0`.
    pub fn disk_ellipsoid(&self) -> Result<(InfiniteEllipsoid, InfiniteEllipsoid)> {
        self.validate()?;
        let rate = DecayRateSpec::linear(self.rate_constant(), self.m)?;
        Ok((
            InfiniteEllipsoid::new(Exponent::ONE, FieldTag::Complex, rate.clone())
                .with_index0(self.m)?,
            InfiniteEllipsoid::new(Exponent::TWO, FieldTag::Complex, rate).with_index0(self.m)?,
        ))
    }

    pub fn disk_entropy_bracket(&self, eps: Epsilon) -> Result<ClassBracket> {
        self.validate()?;
        let c = self.rate_constant();
        let (lo, hi) = linear_bracket(c, eps)?;
        Ok(ClassBracket {
            lo,
            hi,
            gamma_band: Some(eps.log2_inv() * eps.log2_log2_inv()? / c),
        })
    }
}

/// Entire functions with `|f(z)| ≤ C·e^{A|z|}`, measured on the unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpTypeClass {
    #[serde(rename = "A", alias = "a")]
    pub a: f64,
    #[serde(rename = "C", alias = "c")]
    pub c: f64,
}

impl ExpTypeClass {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        let cls = ExpTypeClass { a, c };
        cls.validate()?;
        Ok(cls)
    }

    pub fn validate(&self) -> Result<()> {
        positive("A", self.a)?;
        positive("C", self.c)
    }

    /// Amplitude of the inner ellipsoid, `C / sup_k √(2πk)e^{1/(12k)}/2^k`.
    pub fn inner_amplitude(&self) -> f64 {
        self.c / stirling_supremum()
    }

    /// `(inner, outer)` ℓ^∞ ellipsoids over ℂ with
    /// `μ_k = C·e^{−k(ln k − 1 − ln A)}` (outer) and the same with `A/2` and
    /// the inner amplitude (inner), `k ≥ 0`.
    pub fn exptype_ellipsoids(&self) -> Result<(InfiniteEllipsoid, InfiniteEllipsoid)> {
        self.validate()?;
        let c_tilde = self.inner_amplitude();
        let inner = DecayRateSpec::superlinear(1.0, (E * self.a / 2.0).log2(), c_tilde)?;
        let outer = DecayRateSpec::superlinear(1.0, (E * self.a).log2(), self.c)?;
        Ok((
            InfiniteEllipsoid::new(Exponent::INFINITY, FieldTag::Complex, inner)
                .with_index0(c_tilde)?,
            InfiniteEllipsoid::new(Exponent::INFINITY, FieldTag::Complex, outer)
                .with_index0(self.c)?,
        ))
    }

    pub fn exptype_entropy_bracket(&self, eps: Epsilon) -> Result<ClassBracket> {
        self.validate()?;
        let ln_inv = eps.ln_inv();
        if !(ln_inv > 0.0) {
            return Err(Error::domain("epsilon", eps.value(), "epsilon < 1"));
        }
        let ea = E * self.a;
        let part = |scale: f64, beta: f64| scale * scale * (2.0 * beta).exp() * (beta + 0.5) / LN_2;
        let beta1 = lambert_w(2.0 * ln_inv / ea)?.value;
        let beta2 = lambert_w(ln_inv / ea)?.value;
        Ok(ClassBracket {
            lo: part(ea / 2.0, beta1),
            hi: part(ea, beta2),
            gamma_band: None,
        })
    }
}

/// `L²/log₂L·(1 + log₂log₂L/log₂L)` with `L = log₂(1/ε)`; the second-order
/// entropy of every exponential-type class, independent of `A` and `C`.
pub fn exptype_second_order(eps: Epsilon) -> Result<f64> {
    second_order_core(eps)
}

/// A function class as it appears in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum ClassSpec {
    Strip(StripClass),
    Disk(DiskClass),
    Exptype(ExpTypeClass),
}

impl ClassSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ClassSpec::Strip(c) => c.validate(),
            ClassSpec::Disk(c) => c.validate(),
            ClassSpec::Exptype(c) => c.validate(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassSpec::Strip(_) => "strip",
            ClassSpec::Disk(_) => "disk",
            ClassSpec::Exptype(_) => "exptype",
        }
    }

    pub fn bracket(&self, eps: Epsilon) -> Result<ClassBracket> {
        match self {
            ClassSpec::Strip(c) => c.strip_entropy_bracket(eps),
            ClassSpec::Disk(c) => c.disk_entropy_bracket(eps),
            ClassSpec::Exptype(c) => c.exptype_entropy_bracket(eps),
        }
    }

    pub fn ellipsoids(&self) -> Result<(InfiniteEllipsoid, InfiniteEllipsoid)> {
        match self {
            ClassSpec::Strip(c) => c.strip_ellipsoids(),
            ClassSpec::Disk(c) => c.disk_ellipsoid(),
            ClassSpec::Exptype(c) => c.exptype_ellipsoids(),
        }
    }
}

/// One-sided index of the two-sided Fourier index `k`:
/// `k ≥ 1 ↦ 2k`, `0 ↦ 1`, `−k ↦ 2k + 1`.
pub fn fourier_index(k: i64) -> u64 {
    match k {
        0 => 1,
        k if k > 0 => 2 * k as u64,
        k => 2 * k.unsigned_abs() + 1,
    }
}

/// Inverse of [`fourier_index`]; `None` for `n = 0`.
pub fn fourier_index_inverse(n: u64) -> Option<i64> {
    match n {
        0 => None,
        1 => Some(0),
        n if n % 2 == 0 => Some((n / 2) as i64),
        n => Some(-(((n - 1) / 2) as i64)),
    }
}

pub fn fourier_reindex<T: Clone>(two_sided: &BTreeMap<i64, T>) -> BTreeMap<u64, T> {
    two_sided
        .iter()
        .map(|(&k, v)| (fourier_index(k), v.clone()))
        .collect()
}

/// Inverse of [`fourier_reindex`]; fails on index 0, which has no preimage.
pub fn fourier_unreindex<T: Clone>(one_sided: &BTreeMap<u64, T>) -> Result<BTreeMap<i64, T>> {
    one_sided
        .iter()
        .map(|(&n, v)| {
            fourier_index_inverse(n)
                .map(|k| (k, v.clone()))
                .ok_or_else(|| Error::domain("one-sided index", 0.0, ">= 1"))
        })
        .collect()
}

/// `ã_k = a_k·r^k`.
pub fn embed_disk_function(taylor: &[Complex64], r: f64) -> Result<Vec<Complex64>> {
    positive("r", r)?;
    let mut scale = 1.0;
    Ok(taylor
        .iter()
        .map(|&a| {
            let v = a * scale;
            scale *= r;
            v
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CauchyViolation {
    pub k: usize,
    pub magnitude: f64,
    pub bound: f64,
}

/// Coefficients breaking Cauchy's estimate `|a_k| ≤ M/r′^k`.
pub fn cauchy_violations(
    taylor: &[Complex64],
    m: f64,
    r_prime: f64,
) -> Result<Vec<CauchyViolation>> {
    positive("M", m)?;
    positive("r_prime", r_prime)?;
    let mut out = Vec::new();
    let mut bound = m;
    for (k, a) in taylor.iter().enumerate() {
        let magnitude = a.norm();
        if magnitude > bound * (1.0 + 1e-12) {
            out.push(CauchyViolation {
                k,
                magnitude,
                bound,
            });
        }
        bound /= r_prime;
    }
    Ok(out)
}

/// `ℓ²`, sampled sup-norm and `ℓ¹` of a coefficient difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormSandwich {
    pub l2: f64,
    pub sampled_sup: f64,
    pub l1: f64,
    pub samples: usize,
    /// `ℓ² ≤ sup ≤ ℓ¹ + slack`, with a relative rounding guard on the left.
    pub holds: bool,
}

const SANDWICH_SLACK: f64 = 1e-6;

/// Sandwich for trigonometric polynomials `Σ d_k e^{ikθ}` sampled at
/// `samples` equispaced points.
pub fn trig_norm_sandwich(diff: &[(i64, Complex64)], samples: usize) -> Result<NormSandwich> {
    if samples == 0 {
        return Err(Error::domain("samples", 0.0, ">= 1"));
    }
    let l1: f64 = diff.iter().map(|(_, d)| d.norm()).sum();
    let l2 = diff.iter().map(|(_, d)| d.norm_sqr()).sum::<f64>().sqrt();
    if diff.iter().all(|(_, d)| *d == Complex64::new(0.0, 0.0)) {
        return Ok(NormSandwich {
            l2: 0.0,
            sampled_sup: 0.0,
            l1: 0.0,
            samples,
            holds: true,
        });
    }

    let n = samples as i64;
    let roots: Vec<Complex64> = (0..samples)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / samples as f64))
        .collect();
    let freqs: Vec<(u64, Complex64)> = diff
        .iter()
        .map(|&(k, d)| (k.rem_euclid(n) as u64, d))
        .collect();
    let mut sup = 0.0_f64;
    for j in 0..samples as u64 {
        let v: Complex64 = freqs
            .iter()
            .map(|&(k, d)| d * roots[((k * j) % samples as u64) as usize])
            .sum();
        sup = sup.max(v.norm());
    }
    let holds = l2 <= sup * (1.0 + 1e-12) && sup <= l1 + SANDWICH_SLACK;
    Ok(NormSandwich {
        l2,
        sampled_sup: sup,
        l1,
        samples,
        holds,
    })
}

/// Sandwich for the difference of two coefficient sequences indexed from 0
/// (Taylor coefficients after embedding, or one-sided Fourier data).
pub fn coefficient_norm_sandwich(
    c1: &[Complex64],
    c2: &[Complex64],
    samples: usize,
) -> Result<NormSandwich> {
    let zero = Complex64::new(0.0, 0.0);
    let len = c1.len().max(c2.len());
    let diff: Vec<(i64, Complex64)> = (0..len)
        .map(|k| {
            let a = c1.get(k).copied().unwrap_or(zero);
            let b = c2.get(k).copied().unwrap_or(zero);
            (k as i64, a - b)
        })
        .filter(|(_, d)| *d != zero)
        .collect();
    trig_norm_sandwich(&diff, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(bits: f64) -> Epsilon {
        Epsilon::from_log2_inv(bits).unwrap()
    }

    #[test]
    fn strip_ellipsoid_examples() {
        let cls = StripClass::new(2.0 * LN_2, 1.0).unwrap();
        let (inner, outer) = cls.strip_ellipsoids().unwrap();
        let axes = inner.semi_axes(4).unwrap();
        for (n, mu) in axes.iter().enumerate() {
            assert!((mu - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15);
        }
        let oaxes = outer.semi_axes(20).unwrap();
        let iaxes = inner.semi_axes(20).unwrap();
        assert!(iaxes.iter().zip(&oaxes).all(|(i, o)| i <= o));
        let ratio = outer.rate().c0() / inner.rate().c0();
        assert!((ratio - 2f64.sqrt() * (cls.s / 2.0).exp()).abs() < 1e-14);
        assert_eq!(inner.field(), FieldTag::Complex);
        assert_eq!((inner.p(), outer.p()), (Exponent::ONE, Exponent::TWO));
    }

    #[test]
    fn strip_bracket_examples() {
        let cls = StripClass::new(1.0, 1.0).unwrap();
        let b = cls.strip_entropy_bracket(eps(1000.0)).unwrap();
        assert!(b.lo <= b.hi);
        let band = b.gamma_band.unwrap();
        assert!(((b.hi - b.lo) / band - 2.0).abs() < 1e-12);
        let doubled = StripClass::new(2.0, 1.0)
            .unwrap()
            .strip_entropy_bracket(eps(1000.0))
            .unwrap();
        assert!((doubled.lo - b.lo / 2.0).abs() < 1e-9 * b.lo);
    }

    #[test]
    fn reindex_examples() {
        let one: BTreeMap<i64, f64> = [(0, 1.0)].into();
        assert_eq!(fourier_reindex(&one), [(1u64, 1.0)].into());
        let neg: BTreeMap<i64, f64> = [(-3, 1.0)].into();
        assert_eq!(fourier_reindex(&neg), [(7u64, 1.0)].into());
        let pos: BTreeMap<i64, f64> = [(2, 1.0)].into();
        assert_eq!(fourier_reindex(&pos), [(4u64, 1.0)].into());
        for k in -50..=50 {
            assert_eq!(fourier_index_inverse(fourier_index(k)), Some(k));
        }
        assert!(fourier_unreindex(&BTreeMap::from([(0u64, 1.0)])).is_err());
    }

    #[test]
    fn disk_examples() {
        let cls = DiskClass::new(1.0, 2.0, 1.0).unwrap();
        let (inner, outer) = cls.disk_ellipsoid().unwrap();
        assert_eq!(inner.semi_axes(4).unwrap(), vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(outer.semi_axis_at(0).unwrap(), 1.0);
        let m7 = DiskClass::new(1.0, 2.0, 7.0)
            .unwrap()
            .disk_ellipsoid()
            .unwrap()
            .0;
        assert_eq!(m7.semi_axis_at(0).unwrap(), 7.0);
        assert!(DiskClass::new(1.0, 3.0, 1.0).unwrap().rate_constant() > cls.rate_constant());
        let b = cls.disk_entropy_bracket(eps(100.0)).unwrap();
        assert!(b.lo <= b.hi);
        assert!(((b.lo + b.hi) / 2.0 - 10_000.0).abs() < 1e-9);
        assert!(DiskClass::new(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn embedding_and_cauchy() {
        let a = vec![Complex64::new(1.0, 0.0); 3];
        assert_eq!(embed_disk_function(&a, 1.0).unwrap(), a);
        let e = embed_disk_function(&a, 0.5).unwrap();
        assert_eq!(
            e.iter().map(|z| z.re).collect::<Vec<_>>(),
            vec![1.0, 0.5, 0.25]
        );
        let constant = [Complex64::new(3.0, 0.0)];
        assert!(cauchy_violations(&constant, 3.0, 2.0).unwrap().is_empty());
        let v = cauchy_violations(&a, 1.0, 2.0).unwrap();
        assert_eq!(v.iter().map(|v| v.k).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn sandwich_examples() {
        let c = vec![Complex64::new(0.3, -0.2), Complex64::new(1.0, 0.0)];
        let s = coefficient_norm_sandwich(&c, &c, 64).unwrap();
        assert_eq!((s.l2, s.sampled_sup, s.l1), (0.0, 0.0, 0.0));
        assert!(s.holds);
        let d = vec![Complex64::new(0.0, 0.0), Complex64::new(0.6, 0.8)];
        let s = coefficient_norm_sandwich(&d, &[], 1024).unwrap();
        assert!((s.l2 - 1.0).abs() < 1e-15 && (s.l1 - 1.0).abs() < 1e-15);
        assert!((s.sampled_sup - 1.0).abs() < 1e-12);
        assert!(s.holds);
        // 1 + e^{iθ} peaks at θ = 0 with value 2 = ℓ¹
        let two = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let s = coefficient_norm_sandwich(&two, &[], 16).unwrap();
        assert!((s.sampled_sup - 2.0).abs() < 1e-15);
        let s = trig_norm_sandwich(
            &[
                (-2, Complex64::new(1.0, 0.0)),
                (5, Complex64::new(0.0, 1.0)),
            ],
            256,
        )
        .unwrap();
        assert!(s.holds);
    }

    #[test]
    fn exptype_examples() {
        let cls = ExpTypeClass::new(1.0, 2.0).unwrap();
        let (inner, outer) = cls.exptype_ellipsoids().unwrap();
        assert_eq!(outer.semi_axis_at(0).unwrap(), 2.0);
        for k in 1..40usize {
            assert!(inner.semi_axis_at(k).unwrap() <= outer.semi_axis_at(k).unwrap());
        }
        // μ_k = C when k = eA
        let root = ExpTypeClass::new(3.0 / E, 5.0)
            .unwrap()
            .exptype_ellipsoids()
            .unwrap()
            .1;
        assert!((root.semi_axis_at(3).unwrap() - 5.0).abs() < 1e-12);
        assert!((cls.inner_amplitude() - 2.0 / 1.362_232_211_170_422_7).abs() < 1e-14);

        let b = cls.exptype_entropy_bracket(eps(1000.0)).unwrap();
        assert!(b.lo <= b.hi && b.gamma_band.is_none());
        let v = exptype_second_order(eps(65536.0)).unwrap();
        assert_eq!(v, 4_294_967_296.0 / 16.0 * 1.25);
    }

    #[test]
    fn class_spec_serde() {
        let s: ClassSpec = serde_json::from_str(r#"{"class":"strip","s":1,"M":2}"#).unwrap();
        assert_eq!(s, ClassSpec::Strip(StripClass { s: 1.0, m: 2.0 }));
        let d: ClassSpec =
            serde_json::from_str(r#"{"class":"disk","r":1,"r_prime":2,"M":1}"#).unwrap();
        assert_eq!(d.name(), "disk");
        let e: ClassSpec = serde_json::from_str(r#"{"class":"exptype","A":1,"C":1}"#).unwrap();
        assert!(e.validate().is_ok());
        let bad: ClassSpec = serde_json::from_str(r#"{"class":"strip","s":-1,"M":2}"#).unwrap();
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<ClassSpec>(r#"{"class":"annulus"}"#).is_err());
    }
}
