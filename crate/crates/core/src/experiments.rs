//! Experiment driver: configuration files, h-sweeps, rate fitting, declared
//! targets and CSV artifacts with a provenance header.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::composite::{error_norms, CompositeRegime, ErrorReport, Ingredients, PipelineOptions};
use crate::cross_section::{compatibility_integrals, flux_identity_check, log_potential, stretched_controls, Truncation};
use crate::error::{Error, Result};
use crate::geometry::{mesh_plate, JunctionConfig, LateralBc};
use crate::matching::MatchingConvention;
use crate::poisson2d::{green_functions, GreenBc};
use crate::reference_axisym::{solve_reference, MeshControls};

/// Least-squares line through (ln h, ln err).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    /// Half-width of the 95% confidence interval of the slope; infinite with
    /// fewer than three points.
    pub slope_ci95: f64,
}

/// Fits err ≈ C h^slope. Needs at least three points with positive errors.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::InvalidInput(format!("rate fit needs at least 3 points, got {}", pairs.len())));
    }
    if pairs.iter().any(|&(h, e)| !(h > 0.0) || !(e > 0.0)) {
        return Err(Error::InvalidInput("exact: nonpositive error or step in rate fit".into()));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("rate fit needs distinct steps".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let residual = (ssr / n).sqrt();
    let dof = n - 2.0;
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::InvalidInput(e.to_string()))?.inverse_cdf(0.975);
    let slope_ci95 = t * (ssr / dof / sxx).sqrt();
    Ok(RateFit { slope, intercept, residual, slope_ci95 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    GreenSymmetry,
    Capacity,
    MatchSweep,
    ConvergeAlpha1,
    ConvergeAlpha0,
    ConvergeDirichlet,
    CorollaryLimits,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::GreenSymmetry,
        ExperimentName::Capacity,
        ExperimentName::MatchSweep,
        ExperimentName::ConvergeAlpha1,
        ExperimentName::ConvergeAlpha0,
        ExperimentName::ConvergeDirichlet,
        ExperimentName::CorollaryLimits,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::GreenSymmetry => "green-symmetry",
            ExperimentName::Capacity => "capacity",
            ExperimentName::MatchSweep => "match-sweep",
            ExperimentName::ConvergeAlpha1 => "converge-alpha1",
            ExperimentName::ConvergeAlpha0 => "converge-alpha0",
            ExperimentName::ConvergeDirichlet => "converge-dirichlet",
            ExperimentName::CorollaryLimits => "corollary-limits",
        }
    }

    /// Experiments whose rows are error reports against reference solves.
    pub fn needs_reference(self) -> bool {
        matches!(
            self,
            ExperimentName::ConvergeAlpha1
                | ExperimentName::ConvergeAlpha0
                | ExperimentName::ConvergeDirichlet
                | ExperimentName::CorollaryLimits
        )
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Settings of the asymptotic pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSettings {
    pub green_mesh_size: f64,
    pub grade: bool,
    pub convention: MatchingConvention,
    /// Refinement level of the junction-problem mesh (homogeneous regime).
    pub layer_level: Option<u32>,
    pub a0_const: Option<f64>,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        let d = PipelineOptions::default();
        Self { green_mesh_size: d.green_mesh_size, grade: d.grade, convention: d.convention, layer_level: None, a0_const: None }
    }
}

impl PipelineSettings {
    pub fn options(&self, cfg: &JunctionConfig) -> PipelineOptions {
        let truncation = self.layer_level.map(|level| {
            let a = cfg.rods.iter().map(|r| r.shape.circumradius()).fold(0.0, f64::max);
            let mut t = Truncation::default_for(a);
            t.controls = MeshControls { level, ..stretched_controls() };
            t
        });
        PipelineOptions {
            green_mesh_size: self.green_mesh_size,
            grade: self.grade,
            convention: self.convention,
            truncation,
            a0_const: self.a0_const,
        }
    }
}

/// Mesh of the axisymmetric reference solves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSettings {
    pub controls: MeshControls,
    pub level: u32,
}

impl Default for ReferenceSettings {
    fn default() -> Self {
        Self { controls: MeshControls::default(), level: 2 }
    }
}

impl ReferenceSettings {
    pub fn controls(&self) -> MeshControls {
        self.controls.refined(self.level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    /// Steps h, strictly decreasing.
    pub h: Vec<f64>,
    /// Plate mesh levels for the Green-function study: size / 2^level.
    pub mesh_levels: Vec<u32>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { h: vec![0.05, 0.025, 0.0125], mesh_levels: vec![0, 1] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSettings {
    pub n: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self { n: 21 }
    }
}

/// Kind of a pass/fail check on a table column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Fitted log-log slope against h at least `threshold`.
    MinSlope,
    /// |value| at most `threshold`.
    MaxAbs,
    /// value strictly above `threshold`.
    MinValue,
    /// |value - reference| at most `threshold`.
    MaxDeviation,
    /// |value - reference| / |reference| at most `threshold`.
    MaxRelDeviation,
    /// Strictly decreasing along the rows.
    Decreasing,
    /// (max - min) / |mean| at most `threshold`.
    MaxDrift,
}

/// Declared target of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub experiment: ExperimentName,
    pub column: String,
    pub check: CheckKind,
    #[serde(default)]
    pub threshold: f64,
    #[serde(default)]
    pub reference: Option<f64>,
    /// Restricts the check to one row; negative values count from the end.
    #[serde(default)]
    pub row: Option<i64>,
    #[serde(default)]
    pub label: Option<String>,
}

impl Target {
    pub fn describe(&self) -> String {
        let mut s = format!("{} {} {:?} threshold={}", self.experiment, self.column, self.check, self.threshold);
        if let Some(r) = self.reference {
            s += &format!(" reference={r}");
        }
        if let Some(r) = self.row {
            s += &format!(" row={r}");
        }
        s
    }
}

/// Parsed experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub junction: JunctionConfig,
    #[serde(default)]
    pub pipeline: PipelineSettings,
    #[serde(default)]
    pub reference: ReferenceSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub probe: ProbeSettings,
    #[serde(default)]
    pub experiments: Vec<ExperimentName>,
    #[serde(default)]
    pub targets: Vec<Target>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn options(&self) -> PipelineOptions {
        self.pipeline.options(&self.junction)
    }
}

/// A configuration file with its text hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub config: ExperimentConfig,
    pub sha256: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_text(path, &text)
    }

    pub fn from_text(path: &Path, text: &str) -> Result<Self> {
        let config = ExperimentConfig::from_toml(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let sha256 = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self { path: path.to_path_buf(), config, sha256 })
    }

    /// File stem used to name the output subdirectory.
    pub fn stem(&self) -> String {
        self.path.file_stem().map_or_else(|| "config".into(), |s| s.to_string_lossy().into_owned())
    }
}

/// One experiment of one configuration.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub config: Arc<LoadedConfig>,
    pub experiment: ExperimentName,
    pub h: Vec<f64>,
    pub mesh_levels: Vec<u32>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentPlan {
    pub fn new(config: Arc<LoadedConfig>, experiment: ExperimentName, out_dir: Option<PathBuf>) -> Self {
        let sweep = &config.config.sweep;
        Self { h: sweep.h.clone(), mesh_levels: sweep.mesh_levels.clone(), config, experiment, out_dir }
    }

    /// Checks that the step list is strictly decreasing and non-empty.
    pub fn validate(&self) -> Result<()> {
        let ctx = |m: String| Error::Config(format!("{}: {}: {m}", self.config.path.display(), self.experiment));
        if self.experiment != ExperimentName::GreenSymmetry && self.experiment != ExperimentName::Capacity {
            if self.h.is_empty() {
                return Err(ctx("empty h list".into()));
            }
            if self.h.iter().any(|&h| !(h > 0.0)) {
                return Err(ctx("h values must be positive".into()));
            }
            if self.h.windows(2).any(|w| w[1] >= w[0]) {
                return Err(ctx("h list must be strictly decreasing".into()));
            }
        }
        if self.experiment == ExperimentName::GreenSymmetry && self.mesh_levels.is_empty() {
            return Err(ctx("empty mesh level list".into()));
        }
        Ok(())
    }

    fn junction(&self) -> &JunctionConfig {
        &self.config.config.junction
    }
}

/// Numeric table; the first column is the sweep variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.columns)?;
        for r in &self.rows {
            wr.write_record(r.iter().map(|v| if v.is_nan() { String::new() } else { format!("{v:.12e}") }))?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnFit {
    pub column: String,
    pub fit: RateFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub target: Target,
    pub value: f64,
    pub passed: bool,
    pub note: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.target.label.clone().unwrap_or_else(|| self.target.describe());
        write!(f, "{} {name}: {}", if self.passed { "PASS" } else { "FAIL" }, self.note)
    }
}

/// Result of one experiment: the table, slopes of error columns and the
/// declared checks.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub experiment: ExperimentName,
    pub config: PathBuf,
    pub table: Table,
    /// Error reports behind the table for experiments against reference
    /// solves.
    #[serde(skip)]
    pub rows: Vec<ErrorReport>,
    pub fits: Vec<ColumnFit>,
    pub checks: Vec<CheckOutcome>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn fit(&self, column: &str) -> Option<RateFit> {
        self.fits.iter().find(|f| f.column == column).map(|f| f.fit)
    }
}

fn select_rows(values: &[f64], row: Option<i64>) -> Result<Vec<f64>> {
    match row {
        None => Ok(values.to_vec()),
        Some(r) => {
            let n = values.len() as i64;
            let k = if r < 0 { n + r } else { r };
            if k < 0 || k >= n {
                return Err(Error::Config(format!("row {r} out of range for {n} rows")));
            }
            Ok(vec![values[k as usize]])
        }
    }
}

/// Evaluates one target on a table whose first column is the sweep variable.
pub fn evaluate_target(table: &Table, target: &Target) -> Result<CheckOutcome> {
    let col = table
        .column(&target.column)
        .ok_or_else(|| Error::Config(format!("{}: no column {:?}", target.experiment, target.column)))?;
    let xs = table.column(&table.columns[0]).unwrap_or_default();
    let vals = select_rows(&col, target.row)?;
    let thr = target.threshold;
    let need_ref = || target.reference.ok_or_else(|| Error::Config(format!("{:?} needs a reference value", target.check)));
    let max_by = |f: &dyn Fn(f64) -> f64| vals.iter().map(|&v| f(v)).fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    let (value, passed, note) = match target.check {
        CheckKind::MinSlope => {
            if col.iter().all(|&v| v == 0.0) {
                (f64::INFINITY, true, "exact".to_string())
            } else {
                let pairs: Vec<(f64, f64)> = xs.iter().copied().zip(col.iter().copied()).collect();
                let fit = fit_rate(&pairs)?;
                (fit.slope, fit.slope >= thr, format!("slope {:.3} (ci95 ±{:.3}) vs >= {thr}", fit.slope, fit.slope_ci95))
            }
        }
        CheckKind::MaxAbs => {
            let m = max_by(&|v| v.abs());
            (m, m <= thr, format!("max |value| {m:.3e} vs <= {thr:e}"))
        }
        CheckKind::MinValue => {
            let m = vals.iter().copied().fold(f64::INFINITY, f64::min);
            (m, m > thr, format!("min value {m:.6e} vs > {thr:e}"))
        }
        CheckKind::MaxDeviation => {
            let r = need_ref()?;
            let m = max_by(&|v| (v - r).abs());
            (m, m <= thr, format!("max |value - {r}| {m:.3e} vs <= {thr:e}"))
        }
        CheckKind::MaxRelDeviation => {
            let r = need_ref()?;
            let m = max_by(&|v| (v - r).abs() / r.abs());
            (m, m <= thr, format!("max relative deviation from {r} {m:.3e} vs <= {thr:e}"))
        }
        CheckKind::Decreasing => {
            let ok = vals.len() >= 2 && vals.windows(2).all(|w| w[1] < w[0]);
            let s: Vec<String> = vals.iter().map(|v| format!("{v:.4e}")).collect();
            (f64::NAN, ok, format!("values {}", s.join(", ")))
        }
        CheckKind::MaxDrift => {
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let d = (hi - lo) / mean.abs();
            (d, d <= thr, format!("drift {d:.3e} vs <= {thr}"))
        }
    };
    Ok(CheckOutcome { target: target.clone(), value, passed, note })
}

/// Runs one experiment, writing artifacts when an output directory is set.
pub fn run(plan: &ExperimentPlan) -> Result<ConvergenceReport> {
    run_with(plan, None)
}

/// As [`run`], reusing error reports computed for the same configuration.
pub fn run_with(plan: &ExperimentPlan, cached: Option<&[ErrorReport]>) -> Result<ConvergenceReport> {
    plan.validate()?;
    let ctx = |e: Error| Error::Config(format!("{}: {}: {e}", plan.config.path.display(), plan.experiment));
    let (table, rows) = match plan.experiment {
        ExperimentName::GreenSymmetry => (green_symmetry(plan).map_err(ctx)?, Vec::new()),
        ExperimentName::Capacity => (capacity(plan).map_err(ctx)?, Vec::new()),
        ExperimentName::MatchSweep => (match_sweep(plan).map_err(ctx)?, Vec::new()),
        e => {
            check_regime(plan.junction(), e).map_err(ctx)?;
            let rows = match cached {
                Some(r) => r.to_vec(),
                None => error_sweep(&plan.config.config, &plan.h).map_err(ctx)?,
            };
            (error_table(plan, &rows).map_err(ctx)?, rows)
        }
    };
    let fits = if plan.experiment.needs_reference() && plan.experiment != ExperimentName::CorollaryLimits {
        table
            .columns
            .iter()
            .filter(|c| c.ends_with("_err"))
            .filter_map(|c| {
                let v = table.column(c)?;
                let pairs: Vec<(f64, f64)> = plan.h.iter().copied().zip(v).collect();
                fit_rate(&pairs).ok().map(|fit| ColumnFit { column: c.clone(), fit })
            })
            .collect()
    } else {
        Vec::new()
    };
    let checks = plan
        .config
        .config
        .targets
        .iter()
        .filter(|t| t.experiment == plan.experiment)
        .map(|t| evaluate_target(&table, t))
        .collect::<Result<Vec<_>>>()
        .map_err(ctx)?;
    let report = ConvergenceReport { experiment: plan.experiment, config: plan.config.path.clone(), table, rows, fits, checks };
    if let Some(dir) = &plan.out_dir {
        write_artifacts(plan, &report, dir)?;
    }
    Ok(report)
}

fn check_regime(cfg: &JunctionConfig, e: ExperimentName) -> Result<()> {
    let regime = CompositeRegime::of(cfg);
    let ok = match e {
        ExperimentName::ConvergeAlpha1 => regime == CompositeRegime::Alpha1,
        ExperimentName::ConvergeAlpha0 => regime == CompositeRegime::Alpha0,
        ExperimentName::ConvergeDirichlet => cfg.plate.lateral_bc == LateralBc::Dirichlet,
        ExperimentName::CorollaryLimits => cfg.plate.lateral_bc == LateralBc::Neumann,
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("experiment does not apply to the {} regime", regime.name())))
    }
}

/// Error reports against reference solves, one per h, computed concurrently
/// and returned in the order of `hs`.
pub fn error_sweep(config: &ExperimentConfig, hs: &[f64]) -> Result<Vec<ErrorReport>> {
    let ing = Ingredients::compute(&config.junction, &config.options())?;
    let controls = config.reference.controls();
    hs.par_iter()
        .map(|&h| {
            let asym = ing.solution(h)?;
            let reference = solve_reference(&config.junction.with_h(h), &controls)?;
            log::info!("h = {h}: {}", reference.summary());
            error_norms(&asym, &reference)
        })
        .collect()
}

fn error_table(plan: &ExperimentPlan, rows: &[ErrorReport]) -> Result<Table> {
    const COLUMNS: [&str; 16] = [
        "plate_h1_seminorm_err",
        "plate_weighted_l2_err",
        "plate_weighted_l2_err_log",
        "plate_combined_err",
        "rod_grad_err",
        "rod_h1_err",
        "rod_h1_err_scaled",
        "rod_weighted_err",
        "rod_combined_err",
        "plate_mean",
        "plate_limit_value",
        "plate_limit_deviation",
        "plate_corollary_err",
        "rod_corollary_err",
        "norm_of_reference_plate",
        "norm_of_reference_rod",
    ];
    let cfg = plan.junction();
    let ing = Ingredients::compute(cfg, &plan.config.config.options())?;
    let n = cfg.n_rods();
    let mut columns: Vec<String> = std::iter::once("h").chain(COLUMNS).map(String::from).collect();
    for j in 1..=n {
        columns.push(format!("a{j}"));
        columns.push(format!("a{j}_log"));
    }
    let mut table = Table::new(columns);
    for r in rows {
        let mut row = vec![r.h];
        row.extend(COLUMNS.iter().map(|c| r.column(c).unwrap_or(f64::NAN)));
        let coeffs = ing.coefficients(r.h)?;
        for j in 0..n {
            let a = coeffs.as_ref().map_or(f64::NAN, |c| c.a[j]);
            row.push(a);
            row.push(a.abs() * r.h.ln().abs());
        }
        table.rows.push(row);
    }
    Ok(table)
}

fn green_symmetry(plan: &ExperimentPlan) -> Result<Table> {
    let cfg = plan.junction();
    let settings = &plan.config.config.pipeline;
    let n = cfg.plate.anchors.len();
    let bc = match cfg.plate.lateral_bc {
        LateralBc::Neumann => GreenBc::NeumannMeanZero,
        LateralBc::Dirichlet => GreenBc::Dirichlet,
    };
    let mut columns = vec!["mesh_size".to_string(), "triangles".into(), "symmetry_defect".into()];
    for j in 1..=n {
        for k in 1..=n {
            columns.push(format!("g{j}{k}"));
        }
    }
    let rows = plan
        .mesh_levels
        .par_iter()
        .map(|&level| {
            let size = settings.green_mesh_size / f64::from(1u32 << level);
            let mesh = Arc::new(mesh_plate(&cfg.plate, size, settings.grade)?);
            let triangles = mesh.triangles().len() as f64;
            let g = green_functions(mesh, &cfg.plate.anchors, cfg.plate.cutoff(), bc)?;
            let mut row = vec![size, triangles, g.symmetry_defect()];
            for j in 0..n {
                for k in 0..n {
                    row.push(g.gmatrix[(j, k)]);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { columns, rows })
}

fn capacity(plan: &ExperimentPlan) -> Result<Table> {
    let cfg = plan.junction();
    let columns = ["rod", "c_log", "flux", "compat_layer", "compat_rod", "compat_sum"].map(String::from).to_vec();
    let rows = cfg
        .rods
        .par_iter()
        .enumerate()
        .map(|(j, rod)| {
            let pot = log_potential(rod)?;
            let flux = flux_identity_check(&pot);
            let (cl, cr) = compatibility_integrals(rod, 1.5 * rod.shape.circumradius())?;
            Ok(vec![(j + 1) as f64, pot.c_log, flux, cl, cr, cl + cr])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { columns, rows })
}

fn match_sweep(plan: &ExperimentPlan) -> Result<Table> {
    let cfg = plan.junction();
    let ing = Ingredients::compute(cfg, &plan.config.config.options())?;
    let n = cfg.n_rods();
    let mut columns = vec!["h".to_string(), "a0".into()];
    columns.extend((1..=n).map(|j| format!("a{j}")));
    columns.extend(["constraint_defect", "m", "m_log_ratio", "h0"].map(String::from));
    let mut table = Table::new(columns);
    for &h in &plan.h {
        let c = ing.coefficients(h)?.ok_or_else(|| Error::Unsupported("no matching in this regime".into()))?;
        let mut row = vec![h, c.a0.unwrap_or(f64::NAN)];
        row.extend(c.a.iter().copied());
        let m = c.m.unwrap_or(f64::NAN);
        row.extend([
            c.constraint_defect(ing.source_integral),
            m,
            m * h.ln().abs() / (2.0 * std::f64::consts::PI * n as f64),
            c.h0.unwrap_or(f64::NAN),
        ]);
        table.rows.push(row);
    }
    Ok(table)
}

/// Provenance lines: tool version, config hash, experiment and tolerances.
pub fn provenance(plan: &ExperimentPlan) -> Vec<String> {
    let cfg = &plan.config.config;
    let mut lines = vec![
        format!("junction-asym {}", env!("CARGO_PKG_VERSION")),
        format!("config {} sha256 {}", plan.config.path.display(), plan.config.sha256),
        format!("experiment {}", plan.experiment),
        format!("regime {}", CompositeRegime::of(&cfg.junction).name()),
        format!(
            "pipeline green_mesh_size={} grade={} convention={:?} layer_level={}",
            cfg.pipeline.green_mesh_size,
            cfg.pipeline.grade,
            cfg.pipeline.convention,
            cfg.pipeline.layer_level.unwrap_or(stretched_controls().level)
        ),
        format!("reference level={} controls={:?}", cfg.reference.level, cfg.reference.controls),
    ];
    lines.extend(cfg.targets.iter().filter(|t| t.experiment == plan.experiment).map(|t| format!("target {}", t.describe())));
    lines
}

fn write_with_header(path: &Path, header: &[String], body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    for l in header {
        writeln!(buf, "# {l}")?;
    }
    body(&mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

fn write_artifacts(plan: &ExperimentPlan, report: &ConvergenceReport, dir: &Path) -> Result<()> {
    let dir = dir.join(plan.config.stem());
    fs::create_dir_all(&dir)?;
    let header = provenance(plan);
    let name = plan.experiment.as_str();
    write_with_header(&dir.join(format!("{name}.csv")), &header, |w| report.table.write(w))?;
    for (i, r) in report.rows.iter().enumerate() {
        let single = Table { columns: report.table.columns.clone(), rows: vec![report.table.rows[i].clone()] };
        write_with_header(&dir.join(format!("{name}_h{:.6}.csv", r.h)), &header, |w| single.write(w))?;
    }
    if !report.fits.is_empty() {
        write_with_header(&dir.join(format!("{name}_slopes.csv")), &header, |w| {
            let mut wr = csv::Writer::from_writer(w);
            wr.write_record(["column", "slope", "intercept", "residual", "slope_ci95"])?;
            for f in &report.fits {
                wr.write_record([
                    f.column.clone(),
                    format!("{:.6e}", f.fit.slope),
                    format!("{:.6e}", f.fit.intercept),
                    format!("{:.6e}", f.fit.residual),
                    format!("{:.6e}", f.fit.slope_ci95),
                ])?;
            }
            wr.flush()?;
            Ok(())
        })?;
    }
    write_with_header(&dir.join(format!("{name}_checks.csv")), &header, |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["label", "column", "check", "threshold", "value", "passed"])?;
        for c in &report.checks {
            wr.write_record([
                c.target.label.clone().unwrap_or_default(),
                c.target.column.clone(),
                format!("{:?}", c.target.check),
                format!("{}", c.target.threshold),
                format!("{:.6e}", c.value),
                c.passed.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    })
}

/// Runs every experiment listed in a configuration. Error reports are shared
/// between experiments that need reference solves.
pub fn run_config(config: Arc<LoadedConfig>, out_dir: Option<&Path>) -> Result<Vec<ConvergenceReport>> {
    let mut cache: Option<Vec<ErrorReport>> = None;
    let mut reports = Vec::new();
    for &e in &config.config.experiments {
        let plan = ExperimentPlan::new(config.clone(), e, out_dir.map(Path::to_path_buf));
        let report = if e.needs_reference() {
            plan.validate()?;
            check_regime(plan.junction(), e)
                .map_err(|err| Error::Config(format!("{}: {e}: {err}", config.path.display())))?;
            if cache.is_none() {
                let rows = error_sweep(&config.config, &plan.h)
                    .map_err(|err| Error::Config(format!("{}: {e}: {err}", config.path.display())))?;
                cache = Some(rows);
            }
            run_with(&plan, cache.as_deref())?
        } else {
            run(&plan)?
        };
        reports.push(report);
    }
    Ok(reports)
}

/// The standard one-rod configuration: unit-disk plate, centred unit-disk
/// rod with γ = 1 and l = 1, f₀ = 1, no rod source.
pub fn standard_config(alpha: crate::geometry::Alpha, lateral_bc: LateralBc, h: f64) -> JunctionConfig {
    use crate::geometry::{CrossSection, PlateDomain, PlateSource, Sources};
    let mut plate = PlateDomain::disk(1.0, vec![[0.0, 0.0]]);
    plate.lateral_bc = lateral_bc;
    JunctionConfig {
        plate,
        rods: vec![CrossSection::disk(1.0, 1.0, 1.0)],
        alpha,
        h,
        h0: None,
        sources: Sources { plate: PlateSource::Constant { value: 1.0 }, rods: Vec::new() },
    }
}
