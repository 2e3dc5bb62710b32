//! Brute-force coverings and packings of small real ellipsoids, used as
//! ground truth for the volume bounds.
//!
//! The cover is built on a grid of cells of side `h`: every cell meeting
//! the ellipsoid must have its center within `ε − h·√dim` of a chosen
//! center, which makes the cover valid for the continuous set. The packing
//! uses grid points inside the ellipsoid with pairwise distance `> 2ε`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ellipsoid_entropy::{BoundConstants, FiniteEllipsoid};
use crate::volume_geometry::{Exponent, FieldTag};
use crate::{Epsilon, Error, Result};

const PACKING_GUARD: f64 = 1e-12;
const MAX_GRID_CELLS: usize = 20_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringResult {
    pub epsilon: f64,
    /// Size of a packing with pairwise distance `> 2ε`.
    pub lower_count: u64,
    /// Size of a valid `ε`-cover.
    pub upper_count: u64,
    /// Grid pitch; 0 for exact constructions.
    pub resolution: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<f64>>>,
}

/// Optimal cover of `[0, 1]` by `N = ⌈1/(2ε)⌉` intervals of radius `ε`
/// centered at `2(i − ½)ε`.
pub fn interval_covering(eps: f64) -> Result<CoveringResult> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain("epsilon", eps, "in (0, 1]"));
    }
    let ratio = 1.0 / (2.0 * eps);
    // snap ratios within rounding of an integer (e.g. ε = 0.05)
    let snapped = if (ratio - ratio.round()).abs() <= 1e-9 * ratio {
        ratio.round()
    } else {
        ratio
    };
    let n = (snapped.ceil() as u64).max(1);
    let centers = (1..=n)
        .map(|i| vec![2.0 * (i as f64 - 0.5) * eps])
        .collect();
    Ok(CoveringResult {
        epsilon: eps,
        lower_count: n,
        upper_count: n,
        resolution: 0.0,
        centers: Some(centers),
    })
}

/// Center of the depth-`k` dyadic interval containing `x`: the first `k`
/// binary digits of `x` followed by a 1.
///
/// A dyadic point `m/2^k` is assigned to the interval on its left (it is
/// read through its expansion ending in repeated ones), except `x = 0`.
pub fn binary_expansion_center(x: f64, k: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("x", x, "in [0, 1]"));
    }
    if k > 1000 {
        return Err(Error::domain("k", k as f64, "<= 1000"));
    }
    let scale = (k as f64).exp2();
    let m = ((x * scale).ceil() - 1.0).max(0.0);
    Ok((m + 0.5) / scale)
}

fn q_norm(q: Exponent, v: impl Iterator<Item = f64>) -> f64 {
    if q.is_infinite() {
        v.fold(0.0, |m, x| m.max(x.abs()))
    } else if q.value() == 1.0 {
        v.map(f64::abs).sum()
    } else if q.value() == 2.0 {
        v.map(|x| x * x).sum::<f64>().sqrt()
    } else {
        let p = q.value();
        v.map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

struct Grid {
    dim: usize,
    half: Vec<i64>,
    h: f64,
    len: usize,
}

impl Grid {
    fn new(axes: &[f64], h: f64) -> Result<Self> {
        let half: Vec<i64> = axes.iter().map(|&m| (m / h).ceil() as i64 + 1).collect();
        let len = half
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul((2 * n + 1) as usize))
            .filter(|&l| l <= MAX_GRID_CELLS)
            .ok_or_else(|| {
                Error::Unsupported("oracle grid too large; coarsen the resolution".into())
            })?;
        Ok(Grid {
            dim: axes.len(),
            half,
            h,
            len,
        })
    }

    fn coords(&self, mut flat: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim];
        for j in (0..self.dim).rev() {
            let w = (2 * self.half[j] + 1) as usize;
            out[j] = (flat % w) as i64 - self.half[j];
            flat /= w;
        }
        out
    }

    fn flat(&self, c: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        #[allow(clippy::needless_range_loop)]
        for j in 0..self.dim {
            let w = 2 * self.half[j] + 1;
            let shifted = c[j] + self.half[j];
            if shifted < 0 || shifted >= w {
                return None;
            }
            idx = idx * w as usize + shifted as usize;
        }
        Some(idx)
    }

    fn point(&self, c: &[i64]) -> Vec<f64> {
        c.iter().map(|&i| i as f64 * self.h).collect()
    }
}

/// Integer offsets `o` with `‖h·o‖_q ≤ r`.
fn ball_offsets(dim: usize, h: f64, r: f64, q: Exponent) -> Vec<Vec<i64>> {
    let reach = (r / h).floor() as i64;
    let mut out = Vec::new();
    let mut cur = vec![-reach; dim];
    loop {
        if q_norm(q, cur.iter().map(|&i| i as f64 * h)) <= r {
            out.push(cur.clone());
        }
        let mut j = 0;
        loop {
            if j == dim {
                return out;
            }
            cur[j] += 1;
            if cur[j] <= reach {
                break;
            }
            cur[j] = -reach;
            j += 1;
        }
    }
}

/// Largest `‖x‖_q` over the ellipsoid, or an upper estimate of it.
fn q_radius_bound(e: &FiniteEllipsoid, q: Exponent) -> f64 {
    if q >= e.p() {
        e.semi_axes()[0]
    } else {
        q_norm(q, e.semi_axes().iter().copied())
    }
}

/// Greedy cover and packing counts for a real ellipsoid of dimension ≤ 3.
pub fn brute_force_covering(
    e: &FiniteEllipsoid,
    q: Exponent,
    eps: f64,
    resolution: f64,
) -> Result<CoveringResult> {
    let dim = e.dim();
    if dim > 3 {
        return Err(Error::Unsupported(format!("oracle dimension {dim} > 3")));
    }
    if e.field() != FieldTag::Real {
        return Err(Error::Unsupported(
            "oracle supports the real field only".into(),
        ));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain("epsilon", eps, "finite and > 0"));
    }
    if !(resolution > 0.0 && resolution <= eps / 4.0) {
        return Err(Error::domain(
            "resolution",
            resolution,
            format!("in (0, epsilon/4 = {}]", eps / 4.0),
        ));
    }

    let grid = Grid::new(e.semi_axes(), resolution)?;
    let h = resolution;
    let mut in_cover_set = vec![false; grid.len];
    let mut inside = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for flat in 0..grid.len {
        let c = grid.coords(flat);
        let nearest: Vec<f64> = c
            .iter()
            .map(|&i| ((i as f64).abs() - 0.5).max(0.0) * h)
            .collect();
        if e.membership(&nearest)? {
            in_cover_set[flat] = true;
            let p = grid.point(&c);
            if e.membership(&p)? {
                inside.push(p);
            }
        }
    }

    let lower_count = packing_count(&inside, q, eps);

    if q_radius_bound(e, q) <= eps {
        return Ok(CoveringResult {
            epsilon: eps,
            lower_count,
            upper_count: 1,
            resolution,
            centers: Some(vec![vec![0.0; dim]]),
        });
    }

    let radius = eps - h * (dim as f64).sqrt();
    let offsets = ball_offsets(dim, h, radius, q);
    // Candidate centers sit on a sublattice so scoring stays near
    // O(offsets) per chosen center at fine resolutions.
    let reach = (radius / h).floor() as i64;
    let stride = ((reach + 5) / 6).max(if dim >= 3 { 2 } else { 1 });
    let candidates: Vec<&Vec<i64>> = offsets
        .iter()
        .filter(|o| o.iter().all(|&i| i % stride == 0))
        .collect();

    let mut uncovered = in_cover_set;
    let mut centers = Vec::new();
    for flat in 0..grid.len {
        if !uncovered[flat] {
            continue;
        }
        let base = grid.coords(flat);
        let mut best: Option<(usize, Vec<i64>)> = None;
        for o in &candidates {
            let center: Vec<i64> = base.iter().zip(o.iter()).map(|(a, b)| a + b).collect();
            let score = offsets
                .iter()
                .filter(|o2| {
                    let p: Vec<i64> = center.iter().zip(o2.iter()).map(|(a, b)| a + b).collect();
                    grid.flat(&p).is_some_and(|i| uncovered[i])
                })
                .count();
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, center));
            }
        }
        let (_, center) = best.expect("offsets contain the origin");
        for o2 in &offsets {
            let p: Vec<i64> = center.iter().zip(o2.iter()).map(|(a, b)| a + b).collect();
            if let Some(i) = grid.flat(&p) {
                uncovered[i] = false;
            }
        }
        centers.push(grid.point(&center));
    }

    Ok(CoveringResult {
        epsilon: eps,
        lower_count,
        upper_count: centers.len() as u64,
        resolution,
        centers: Some(centers),
    })
}

/// Larger of a farthest-point packing and a scan-order packing.
fn packing_count(points: &[Vec<f64>], q: Exponent, eps: f64) -> u64 {
    if points.is_empty() {
        return 0;
    }
    let sep = 2.0 * eps + PACKING_GUARD;
    let dist = |a: &[f64], b: &[f64]| q_norm(q, a.iter().zip(b).map(|(x, y)| x - y));

    let mut scan: Vec<&[f64]> = Vec::new();
    for p in points {
        if scan.iter().all(|s| dist(s, p) > sep) {
            scan.push(p);
        }
    }

    let mut min_dist: Vec<f64> = points.iter().map(|p| dist(p, &points[0])).collect();
    let mut farthest = 1u64;
    loop {
        let (i, &d) = min_dist
            .iter()
            .enumerate()
            .fold(
                (0, &f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        if d <= sep {
            break;
        }
        farthest += 1;
        let chosen = points[i].clone();
        for (m, p) in min_dist.iter_mut().zip(points) {
            *m = m.min(dist(p, &chosen));
        }
    }

    (scan.len() as u64).max(farthest)
}

/// One row of a sandwich check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub epsilon: f64,
    pub lower_bound_bits: f64,
    pub upper_bound_bits: f64,
    pub upper_rigorous: bool,
    pub lower_count: u64,
    pub upper_count: u64,
    /// `log₂(upper_count) − lower bound`.
    pub lower_margin: f64,
    /// `upper bound − log₂(lower_count)`; `None` when the upper bound is
    /// not rigorous at this `ε`.
    pub upper_margin: Option<f64>,
}

impl SandwichRow {
    pub fn passed(&self) -> bool {
        self.lower_margin >= 0.0 && self.upper_margin.is_none_or(|m| m >= 0.0)
    }

    /// Compares given counts with the volume bounds at `eps`.
    pub fn from_counts(
        e: &FiniteEllipsoid,
        q: Exponent,
        eps: f64,
        lower_count: u64,
        upper_count: u64,
    ) -> Result<Self> {
        let eps_t = Epsilon::new(eps)?;
        let lower_bound = e.finite_entropy_lower_bound(q, eps_t)?;
        let upper = e.finite_entropy_upper_bound(q, eps_t, &BoundConstants::default())?;
        let lower_margin = (upper_count as f64).log2() - lower_bound;
        let upper_margin = upper
            .rigorous
            .then(|| upper.bits - (lower_count as f64).log2());
        Ok(SandwichRow {
            epsilon: eps,
            lower_bound_bits: lower_bound,
            upper_bound_bits: upper.bits,
            upper_rigorous: upper.rigorous,
            lower_count,
            upper_count,
            lower_margin,
            upper_margin,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(SandwichRow::passed)
    }
}

/// Runs the oracle at each `ε` (resolution `ε/resolution_divisor`) and
/// compares its counts with the volume bounds.
pub fn verify_sandwich(
    e: &FiniteEllipsoid,
    q: Exponent,
    eps_grid: &[f64],
    resolution_divisor: f64,
) -> Result<SandwichReport> {
    if !(resolution_divisor >= 4.0) {
        return Err(Error::domain(
            "resolution divisor",
            resolution_divisor,
            ">= 4",
        ));
    }
    let rows = eps_grid
        .iter()
        .map(|&eps| {
            let r = brute_force_covering(e, q, eps, eps / resolution_divisor)?;
            SandwichRow::from_counts(e, q, eps, r.lower_count, r.upper_count)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SandwichReport { rows })
}

/// Golden oracle output checked into the repository.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleFixture {
    pub ellipsoid: FiniteEllipsoid,
    pub q: Exponent,
    pub epsilon: f64,
    pub resolution: f64,
    pub lower_count: u64,
    pub upper_count: u64,
}

impl OracleFixture {
    pub fn generate(e: &FiniteEllipsoid, q: Exponent, eps: f64, resolution: f64) -> Result<Self> {
        let r = brute_force_covering(e, q, eps, resolution)?;
        Ok(OracleFixture {
            ellipsoid: e.clone(),
            q,
            epsilon: eps,
            resolution,
            lower_count: r.lower_count,
            upper_count: r.upper_count,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureCheck {
    pub source: String,
    pub row: SandwichRow,
    /// Counts from re-running the oracle, when it differs from the file.
    pub recomputed: Option<(u64, u64)>,
    /// Names of the failed conditions.
    pub failures: Vec<String>,
}

impl FixtureCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks a fixture's counts against the bounds and against a fresh
/// oracle run.
pub fn check_fixture(source: &str, f: &OracleFixture) -> Result<FixtureCheck> {
    let row = SandwichRow::from_counts(&f.ellipsoid, f.q, f.epsilon, f.lower_count, f.upper_count)?;
    let mut failures = Vec::new();
    if !(row.lower_margin >= 0.0) {
        failures.push(format!("lower_margin = {}", row.lower_margin));
    }
    if let Some(m) = row.upper_margin {
        if !(m >= 0.0) {
            failures.push(format!("upper_margin = {m}"));
        }
    }
    if f.lower_count > f.upper_count {
        failures.push(format!(
            "count_order: lower_count {} > upper_count {}",
            f.lower_count, f.upper_count
        ));
    }
    let fresh = brute_force_covering(&f.ellipsoid, f.q, f.epsilon, f.resolution)?;
    let recomputed = (fresh.lower_count != f.lower_count || fresh.upper_count != f.upper_count)
        .then_some((fresh.lower_count, fresh.upper_count));
    if let Some((l, u)) = recomputed {
        failures.push(format!("golden_counts: recomputed ({l}, {u})"));
    }
    Ok(FixtureCheck {
        source: source.to_string(),
        row,
        recomputed,
        failures,
    })
}

/// Reads every `*.json` file in `dir`, each holding one fixture or an
/// array of them, in file-name order.
pub fn load_fixtures(dir: &Path) -> Result<Vec<(String, OracleFixture)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "json"));
    paths.sort();

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(OracleFixture),
        Many(Vec<OracleFixture>),
    }

    let mut out = Vec::new();
    for path in paths {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = std::fs::read_to_string(&path)?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let parsed: OneOrMany = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::config(format!("{name}:{}", e.path()), e.inner().to_string()))?;
        match parsed {
            OneOrMany::One(f) => out.push((name, f)),
            OneOrMany::Many(fs) => out.extend(
                fs.into_iter()
                    .enumerate()
                    .map(|(i, f)| (format!("{name}[{i}]"), f)),
            ),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(p: Exponent, axes: &[f64]) -> FiniteEllipsoid {
        FiniteEllipsoid::new(p, FieldTag::Real, axes.to_vec()).unwrap()
    }

    #[test]
    fn interval_examples() {
        let r = interval_covering(0.125).unwrap();
        assert_eq!(r.upper_count, 4);
        assert_eq!(
            r.centers.unwrap(),
            vec![vec![0.125], vec![0.375], vec![0.625], vec![0.875]]
        );
        assert_eq!(interval_covering(0.5).unwrap().upper_count, 1);
        assert_eq!(interval_covering(0.3).unwrap().upper_count, 2);
        assert_eq!(interval_covering(0.05).unwrap().upper_count, 10);
        assert!(interval_covering(0.0).is_err());
        assert!(interval_covering(1.5).is_err());
    }

    #[test]
    fn binary_center_examples() {
        assert_eq!(binary_expansion_center(9.0 / 16.0, 2).unwrap(), 0.625);
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(binary_expansion_center(x, 0).unwrap(), 0.5);
        }
        assert_eq!(binary_expansion_center(0.5, 1).unwrap(), 0.25);
        assert_eq!(binary_expansion_center(1.0, 3).unwrap(), 0.9375);
        assert!(binary_expansion_center(1.1, 3).is_err());
        assert!(binary_expansion_center(0.5, 1001).is_err());
    }

    #[test]
    fn one_dimensional_oracle_brackets_exact_count() {
        for p in [Exponent::ONE, Exponent::TWO, Exponent::INFINITY] {
            let e = real(p, &[1.0]);
            let r = brute_force_covering(&e, Exponent::TWO, 0.125, 0.125 / 8.0).unwrap();
            assert!(r.lower_count <= 8 && 8 <= r.upper_count, "{r:?}");
        }
    }

    #[test]
    fn single_ball_when_radius_dominates() {
        let e = real(Exponent::TWO, &[0.5, 0.3]);
        let r = brute_force_covering(&e, Exponent::TWO, 0.5, 0.5 / 8.0).unwrap();
        assert_eq!((r.lower_count, r.upper_count), (1, 1));
    }

    #[test]
    fn precondition_errors() {
        let e = real(Exponent::TWO, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            brute_force_covering(&e, Exponent::TWO, 0.5, 0.1),
            Err(Error::Unsupported(_))
        ));
        let e = real(Exponent::TWO, &[1.0]);
        assert!(brute_force_covering(&e, Exponent::TWO, 0.5, 0.2).is_err());
        let c = FiniteEllipsoid::new(Exponent::TWO, FieldTag::Complex, vec![1.0]).unwrap();
        assert!(brute_force_covering(&c, Exponent::TWO, 0.5, 0.1).is_err());
    }

    #[test]
    fn centers_cover_sampled_points() {
        let e = real(Exponent::TWO, &[1.0, 0.5]);
        let eps = 0.25;
        let r = brute_force_covering(&e, Exponent::INFINITY, eps, eps / 8.0).unwrap();
        let centers = r.centers.unwrap();
        let n = 97;
        for i in 0..=n {
            for j in 0..=n {
                let x = [-1.0 + 2.0 * i as f64 / n as f64, -0.5 + j as f64 / n as f64];
                if !e.membership(&x).unwrap() {
                    continue;
                }
                let near = centers.iter().any(|c| {
                    q_norm(Exponent::INFINITY, c.iter().zip(&x).map(|(a, b)| a - b)) <= eps
                });
                assert!(near, "{x:?} uncovered");
            }
        }
    }
}
