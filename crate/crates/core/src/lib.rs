//! Metric-entropy estimation for ellipsoids with exponentially decaying
//! semi-axes and for the analytic function classes they model.
//!
//! All entropies are reported in bits. Accuracies `ε` are carried as
//! [`Epsilon`], which stores `log₂(1/ε)` so that scales far below the
//! smallest positive `f64` remain representable.
//!
//! Module map:
//!
//! * [`special_functions`]: Lambert W on `[0, ∞)`, its asymptotic
//!   expansion, the `x = a·e^{−x} + b` solver and the Stirling supremum.
//! * [`decay_rate`]: decay-rate functions ψ, their inverses, ψ-average and
//!   ψ-difference, semi-axis generation.
//! * [`volume_geometry`]: log-volumes of unit `p`-balls and volume ratios.
//! * [`ellipsoid_entropy`]: finite-dimensional bounds, infinite-dimensional
//!   estimates and their closed forms.
//! * [`function_classes`]: strip, disk and exponential-type classes.
//! * [`oracle`]: brute-force coverings and packings in dimension ≤ 3.
//! * [`sweep`]: batch sweeps and fixture verification used by the CLI.

// `!(x > 0.0)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decay_rate;
pub mod ellipsoid_entropy;
mod epsilon;
mod error;
pub mod function_classes;
pub mod oracle;
pub mod special_functions;
pub mod sweep;
pub mod volume_geometry;

pub use decay_rate::{DecayFamily, DecayRateSpec};
pub use ellipsoid_entropy::{BoundConstants, EntropyEstimate, FiniteEllipsoid, InfiniteEllipsoid};
pub use epsilon::Epsilon;
pub use error::{Error, Result};
pub use volume_geometry::{Exponent, FieldTag};
