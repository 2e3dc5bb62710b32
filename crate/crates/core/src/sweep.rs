//! Batch evaluation over `ε` grids and fixture verification.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ellipsoid_entropy::{BoundConstants, InfiniteEllipsoid};
use crate::function_classes::ClassSpec;
use crate::oracle::{check_fixture, load_fixtures, FixtureCheck};
use crate::volume_geometry::Exponent;
use crate::{Epsilon, Error, Result};

pub const CSV_SCHEMA: &str = "# metric-entropy sweep schema 1";
pub const JSON_SCHEMA: &str = "metric-entropy-sweep/1";
pub const CSV_COLUMNS: [&str; 11] = [
    "target",
    "epsilon",
    "log2_inv_epsilon",
    "d_eff",
    "main",
    "second",
    "lo",
    "hi",
    "gamma_band",
    "flags",
    "error",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Ellipsoid(InfiniteEllipsoid),
    FunctionClass(ClassSpec),
}

/// Geometric grid, given either in `ε` or in `log₂(1/ε)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonGrid {
    Epsilon {
        start: f64,
        stop: f64,
        points: usize,
    },
    Log2Inv {
        log2_inv_start: f64,
        log2_inv_stop: f64,
        points: usize,
    },
}

impl EpsilonGrid {
    fn endpoints(&self) -> Result<(f64, f64, usize)> {
        match *self {
            EpsilonGrid::Epsilon {
                start,
                stop,
                points,
            } => {
                let a = Epsilon::new(start)
                    .map_err(|e| Error::config("epsilon_grid.start", e.to_string()))?;
                let b = Epsilon::new(stop)
                    .map_err(|e| Error::config("epsilon_grid.stop", e.to_string()))?;
                Ok((a.log2_inv(), b.log2_inv(), points))
            }
            EpsilonGrid::Log2Inv {
                log2_inv_start,
                log2_inv_stop,
                points,
            } => Ok((log2_inv_start, log2_inv_stop, points)),
        }
    }

    /// Grid points in decreasing `ε`.
    pub fn points(&self) -> Result<Vec<Epsilon>> {
        let (a, b, n) = self.endpoints()?;
        if n < 1 {
            return Err(Error::config("epsilon_grid.points", "must be >= 1"));
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::config("epsilon_grid", "endpoints must be finite"));
        }
        if n > 1 && !(b > a) {
            return Err(Error::config(
                "epsilon_grid.stop",
                "epsilon must decrease from start to stop",
            ));
        }
        (0..n)
            .map(|i| {
                let bits = if n == 1 {
                    a
                } else if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                };
                Epsilon::from_log2_inv(bits)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub target: Target,
    /// Covering norm; required for ellipsoid targets.
    #[serde(default)]
    pub q: Option<Exponent>,
    pub epsilon_grid: EpsilonGrid,
    #[serde(default)]
    pub output: OutputFormat,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub constants: BoundConstants,
}

impl SweepConfig {
    /// Parses and validates; errors carry the JSON path of the bad field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: SweepConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.epsilon_grid.points()?;
        match &self.target {
            Target::Ellipsoid(_) if self.q.is_none() => {
                Err(Error::config("q", "required for ellipsoid targets"))
            }
            Target::FunctionClass(c) => c
                .validate()
                .map_err(|e| Error::config("target.function_class", e.to_string())),
            _ => Ok(()),
        }
    }
}

/// One output row. Absent values are empty in CSV and `null` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub target: String,
    /// `None` once `ε` underflows `f64`; `log2_inv_epsilon` is always set.
    pub epsilon: Option<f64>,
    pub log2_inv_epsilon: f64,
    pub d_eff: Option<u64>,
    pub main: Option<f64>,
    pub second: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub gamma_band: Option<f64>,
    pub flags: String,
    pub error: Option<String>,
}

impl SweepRow {
    fn empty(target: &str, eps: Epsilon) -> Self {
        SweepRow {
            target: target.to_string(),
            epsilon: Some(eps.value()).filter(|&v| v > 0.0),
            log2_inv_epsilon: eps.log2_inv(),
            d_eff: None,
            main: None,
            second: None,
            lo: None,
            hi: None,
            gamma_band: None,
            flags: String::new(),
            error: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub schema: String,
    pub rows: Vec<SweepRow>,
}

fn num(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialize")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl SweepTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(CSV_COLUMNS).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.target.clone(),
                opt(r.epsilon),
                num(r.log2_inv_epsilon),
                r.d_eff.map(|d| d.to_string()).unwrap_or_default(),
                opt(r.main),
                opt(r.second),
                opt(r.lo),
                opt(r.hi),
                opt(r.gamma_band),
                r.flags.clone(),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let body = String::from_utf8(body).expect("csv output is utf-8");
        Ok(format!("{CSV_SCHEMA}\n{body}"))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

fn flag_string(pairs: &[(&str, bool)]) -> String {
    pairs
        .iter()
        .filter(|(_, on)| *on)
        .map(|(n, _)| *n)
        .collect::<Vec<_>>()
        .join(";")
}

fn ellipsoid_row(e: &InfiniteEllipsoid, q: Exponent, eps: Epsilon, k: &BoundConstants) -> SweepRow {
    let mut row = SweepRow::empty("ellipsoid", eps);
    match e.infinite_entropy_estimate(q, eps, k.kappa_rem) {
        Ok(est) => {
            row.d_eff = Some(est.effective_dim);
            row.main = Some(est.main_term);
            row.second = Some(est.second_order);
            row.lo = Some(est.bracket_lo);
            row.hi = Some(est.bracket_hi);
            row.flags = flag_string(&[
                ("epsilon_small_enough", est.valid.epsilon_small_enough),
                ("p_ge_q_rigorous", est.valid.p_ge_q_rigorous),
            ]);
        }
        Err(err) => row.error = Some(err.to_string()),
    }
    row
}

fn class_row(c: &ClassSpec, eps: Epsilon) -> SweepRow {
    let mut row = SweepRow::empty(c.name(), eps);
    match c.bracket(eps) {
        Ok(b) => {
            row.lo = Some(b.lo);
            row.hi = Some(b.hi);
            row.gamma_band = b.gamma_band;
        }
        Err(err) => row.error = Some(err.to_string()),
    }
    row
}

/// Evaluates the target at every grid point; per-point failures land in the
/// `error` column.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepTable> {
    config.validate()?;
    let grid = config.epsilon_grid.points()?;
    let rows = grid
        .into_iter()
        .map(|eps| match &config.target {
            Target::Ellipsoid(e) => {
                ellipsoid_row(e, config.q.expect("validated"), eps, &config.constants)
            }
            Target::FunctionClass(c) => class_row(c, eps),
        })
        .collect();
    Ok(SweepTable {
        schema: JSON_SCHEMA.to_string(),
        rows,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<FixtureCheck>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(FixtureCheck::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        for c in &self.checks {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            let upper = c
                .row
                .upper_margin
                .map(|m| format!("{m:.4}"))
                .unwrap_or_else(|| "n/a".into());
            out.push_str(&format!(
                "{status} {} eps={} lower={} upper={} lower_margin={:.4} upper_margin={upper}",
                c.source, c.row.epsilon, c.row.lower_count, c.row.upper_count, c.row.lower_margin,
            ));
            if !c.failures.is_empty() {
                out.push_str(&format!(" [{}]", c.failures.join(", ")));
            }
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        out.push_str(&format!(
            "{} fixtures, {} failed\n",
            self.checks.len(),
            failed
        ));
        out
    }
}

/// Checks every fixture in `dir`.
pub fn run_verify(dir: &Path) -> Result<VerifyReport> {
    let fixtures = load_fixtures(dir)?;
    let mut report = VerifyReport::default();
    if fixtures.is_empty() {
        report
            .warnings
            .push(format!("no fixtures found in {}", dir.display()));
    }
    for (name, f) in &fixtures {
        report.checks.push(check_fixture(name, f)?);
    }
    Ok(report)
}
