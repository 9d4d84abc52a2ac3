//! Run configuration: a TOML file with one section per pipeline stage.
//! Everything the file references is opened and parsed here, before any
//! numerics start; paths are resolved relative to the config file itself.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use polared::{
    assemble_reduced, build_change_of_variables, builtin_measure, measure_from_profile,
    scalar_map, BuiltinMeasure, ChangeOfVariables, GeodesicMeasure, HypothesisConfig,
    Nonlinearity, ProfileCurve, ReducedProblem, ScalarMap,
};

use crate::commands::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub r0: f64,
    pub measure: MeasureSpec,
    pub b: BSpec,
    pub f: FSpec,
    pub solver: SolverSpec,
    pub reduce: Option<ReduceSpec>,
    pub output: OutputSpec,
    pub hypotheses: Option<HypothesesSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Euclidean { dim: u32, #[serde(default)] normalize: bool },
    Sphere { dim: u32, #[serde(default)] normalize: bool },
    Hyperbolic { dim: u32, #[serde(default)] normalize: bool },
    FlatCylinder {},
    Profile { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BSpec {
    Constant { value: f64 },
    Gaussian { sigma: f64, #[serde(default)] center: f64 },
    Power { p: f64 },
    Table { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FSpec {
    Power { p: f64 },
    LogPower { p: f64 },
    Table { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub method: MethodSpec,
    pub half_length: f64,
    pub interior_nodes: usize,
    pub bc: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub init: InitSpec,
    pub flat_value: Option<f64>,
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    Green,
    Shooting,
    Collocation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitSpec {
    #[default]
    Default,
    Flat,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesSpec {
    pub truncations: Option<Vec<f64>>,
    pub nodes_per_unit: Option<usize>,
    pub stabilization_tol: Option<f64>,
}

/// Everything a command needs, assembled and validated.
pub struct Pipeline {
    pub config: RunConfig,
    pub measure: GeodesicMeasure,
    pub cv: Arc<ChangeOfVariables>,
    pub b: ScalarMap,
    pub f: Nonlinearity,
    pub problem: ReducedProblem,
    pub out_dir: PathBuf,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn load(path: &Path) -> Result<Pipeline, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
    let config: RunConfig = toml::from_str(&text)
        .map_err(|e| bad(format!("cannot parse config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));

    validate(&config)?;

    let measure = build_measure(&config.measure, base)?;
    let cv = Arc::new(
        build_change_of_variables(&measure, config.r0, 1e-10)
            .map_err(|e| bad(format!("change of variables at r0 = {}: {e}", config.r0)))?,
    );
    let b = build_b(&config.b, base)?;
    let f = build_f(&config.f, base)?;
    let problem = assemble_reduced(cv.clone(), b.clone(), f.clone())
        .map_err(|e| bad(format!("cannot assemble the reduced problem: {e}")))?;
    let out_dir = base.join(&config.output.dir);

    Ok(Pipeline { config, measure, cv, b, f, problem, out_dir })
}

fn validate(config: &RunConfig) -> Result<(), CliError> {
    if !config.r0.is_finite() {
        return Err(bad(format!("r0 = {} is not finite", config.r0)));
    }
    let s = &config.solver;
    if !(s.half_length.is_finite() && s.half_length > 0.0) {
        return Err(bad(format!("solver.half_length must be positive, got {}", s.half_length)));
    }
    if s.interior_nodes < 16 {
        return Err(bad(format!("solver.interior_nodes must be >= 16, got {}", s.interior_nodes)));
    }
    if !(s.bc.is_finite() && s.bc >= 0.0) {
        return Err(bad(format!("solver.bc must be nonnegative, got {}", s.bc)));
    }
    if !(s.tol.is_finite() && s.tol > 0.0) {
        return Err(bad(format!("solver.tol must be positive, got {}", s.tol)));
    }
    if let Some(v) = s.flat_value {
        if !(v.is_finite() && v > 0.0) {
            return Err(bad(format!("solver.flat_value must be positive, got {v}")));
        }
        if s.init != InitSpec::Flat {
            return Err(bad("solver.flat_value is only meaningful with init = \"flat\""));
        }
    }
    if let Some(r) = &config.reduce {
        if !(r.r_min.is_finite() && r.r_max.is_finite() && r.r_min < r.r_max) {
            return Err(bad(format!(
                "[reduce] needs r_min < r_max, got {} and {}",
                r.r_min, r.r_max
            )));
        }
        if r.count < 2 {
            return Err(bad(format!("[reduce] count must be >= 2, got {}", r.count)));
        }
    }
    if let Some(h) = &config.hypotheses {
        if let Some(ts) = &h.truncations {
            if ts.len() < 3 {
                return Err(bad(format!(
                    "[hypotheses] truncations needs at least 3 entries, got {}",
                    ts.len()
                )));
            }
            if ts[0] <= 0.0 || ts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad("[hypotheses] truncations must be positive and increasing"));
            }
        }
        if h.nodes_per_unit == Some(0) {
            return Err(bad("[hypotheses] nodes_per_unit must be positive"));
        }
        if let Some(t) = h.stabilization_tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(bad(format!("[hypotheses] stabilization_tol must be positive, got {t}")));
            }
        }
    }
    Ok(())
}

fn build_measure(spec: &MeasureSpec, base: &Path) -> Result<GeodesicMeasure, CliError> {
    let built = |kind, dim, normalize| {
        builtin_measure(kind, dim, normalize).map_err(|e| bad(format!("[measure]: {e}")))
    };
    match spec {
        MeasureSpec::Euclidean { dim, normalize } => built(BuiltinMeasure::Euclidean, *dim, *normalize),
        MeasureSpec::Sphere { dim, normalize } => built(BuiltinMeasure::Sphere, *dim, *normalize),
        MeasureSpec::Hyperbolic { dim, normalize } => built(BuiltinMeasure::Hyperbolic, *dim, *normalize),
        MeasureSpec::FlatCylinder {} => built(BuiltinMeasure::FlatCylinder, 2, false),
        MeasureSpec::Profile { path } => {
            let rows = read_table(&base.join(path), &["t", "x", "z"])?;
            let samples: Vec<(f64, f64, f64)> =
                rows.iter().map(|row| (row[0], row[1], row[2])).collect();
            let curve = ProfileCurve::new(&samples)
                .map_err(|e| bad(format!("profile curve {}: {e}", path.display())))?;
            measure_from_profile(&curve)
                .map_err(|e| bad(format!("profile measure {}: {e}", path.display())))
        }
    }
}

fn build_b(spec: &BSpec, base: &Path) -> Result<ScalarMap, CliError> {
    match spec {
        BSpec::Constant { value } => {
            if !(value.is_finite() && *value > 0.0) {
                return Err(bad(format!("[b] constant value must be positive, got {value}")));
            }
            let c = *value;
            Ok(scalar_map(move |_| c))
        }
        BSpec::Gaussian { sigma, center } => {
            if !(sigma.is_finite() && *sigma > 0.0) {
                return Err(bad(format!("[b] gaussian sigma must be positive, got {sigma}")));
            }
            let (s, c) = (*sigma, *center);
            Ok(scalar_map(move |r: f64| (-((r - c) / s).powi(2)).exp()))
        }
        BSpec::Power { p } => {
            if !p.is_finite() {
                return Err(bad(format!("[b] power exponent must be finite, got {p}")));
            }
            let p = *p;
            Ok(scalar_map(move |r: f64| r.powf(p)))
        }
        BSpec::Table { path } => {
            let rows = read_table(&base.join(path), &["r", "b"])?;
            let (mut rs, mut bs) = (Vec::new(), Vec::new());
            for row in &rows {
                if row[1] <= 0.0 {
                    return Err(bad(format!(
                        "[b] table {} must be strictly positive, got {} at r = {}",
                        path.display(),
                        row[1],
                        row[0]
                    )));
                }
                rs.push(row[0]);
                bs.push(row[1]);
            }
            let spline = polared::interp::CubicSpline::new(rs.clone(), bs)
                .map_err(|e| bad(format!("[b] table {}: {e}", path.display())))?;
            // hold the end values outside the sampled window instead of
            // extrapolating the end cubics, which can cross zero
            let (lo, hi) = (rs[0], rs[rs.len() - 1]);
            Ok(scalar_map(move |r: f64| spline.eval(r.clamp(lo, hi))))
        }
    }
}

fn build_f(spec: &FSpec, base: &Path) -> Result<Nonlinearity, CliError> {
    match spec {
        FSpec::Power { p } => {
            if !(p.is_finite() && *p > 0.0) {
                return Err(bad(format!("[f] power exponent must be positive, got {p}")));
            }
            Ok(Nonlinearity::power(*p))
        }
        FSpec::LogPower { p } => {
            if !(p.is_finite() && *p > 0.0) {
                return Err(bad(format!("[f] log_power exponent must be positive, got {p}")));
            }
            Ok(Nonlinearity::log_power(*p))
        }
        FSpec::Table { path } => {
            let rows = read_table(&base.join(path), &["z", "f"])?;
            let samples: Vec<(f64, f64)> = rows.iter().map(|row| (row[0], row[1])).collect();
            Nonlinearity::tabulated(&samples)
                .map_err(|e| bad(format!("[f] table {}: {e}", path.display())))
        }
    }
}

/// CSV with an exact header and float-only rows.
fn read_table(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read table {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let expect = header.join(",");
    match lines.next() {
        Some((_, first)) if first.trim() == expect => {}
        other => {
            return Err(bad(format!(
                "table {} must start with the header `{expect}`, got {:?}",
                path.display(),
                other.map(|(_, l)| l.trim()).unwrap_or("an empty file")
            )));
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let mut row = Vec::with_capacity(header.len());
        for cell in line.trim().split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                bad(format!("table {} line {}: `{cell}` is not a number", path.display(), i + 1))
            })?;
            row.push(v);
        }
        if row.len() != header.len() {
            return Err(bad(format!(
                "table {} line {}: expected {} columns, got {}",
                path.display(),
                i + 1,
                header.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(bad(format!("table {} has a header but no rows", path.display())));
    }
    Ok(rows)
}

impl Pipeline {
    pub fn hypothesis_config(&self) -> HypothesisConfig {
        let mut hc = HypothesisConfig::default();
        if let Some(h) = &self.config.hypotheses {
            if let Some(ts) = &h.truncations {
                hc.truncations = ts.clone();
            }
            if let Some(n) = h.nodes_per_unit {
                hc.nodes_per_unit = n;
            }
            if let Some(t) = h.stabilization_tol {
                hc.stabilization_tol = t;
            }
        }
        hc
    }
}
