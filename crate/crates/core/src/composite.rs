//! Composite asymptotic fields on the physical junction and weighted error
//! norms against reference solutions.
//!
//! The plate part is a function of (y, z) on the plate layer z ∈ (0, h); the
//! rod parts are functions on ω_j^h × (0, l_j), the socket included. Layer
//! terms enter through the cut-offs χ_{0j}(|y - P^j|) (1 below R0/2, 0 above
//! R0) and χ_j(z) (1 below l_j/3, 0 above 2l_j/3).

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cross_section::{junction_constant_q, log_potential, BoundaryLayerData, LogPotential, Truncation};
use crate::error::{Error, Result};
use crate::geometry::{mesh_plate, validate_config, Alpha, JunctionConfig, LateralBc, PlateSource, Shape};
use crate::matching::{
    solve_alpha0, solve_alpha1, solve_alpha1_dirichlet_lateral, MatchingCoefficients, MatchingConvention,
    MatchingInputs,
};
use crate::poisson2d::{
    green_functions, solve_dirichlet, solve_neumann_mean_zero, value_at_anchor, FeField, GreenBc, GreenData,
};
use crate::quadrature::{CompositeGauss, Cutoff};
use crate::reference_axisym::{AxisymField, ReferenceSolution};
use crate::rod1d::{assemble_u0_alpha1, leading_alpha0, solve_dirichlet_ends, solve_hash, RodProfile};

/// Which asymptotic form applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeRegime {
    /// Contrasting rods, Neumann plate edge.
    Alpha1,
    /// Homogeneous junction, Neumann plate edge.
    Alpha0,
    /// Contrasting rods, Dirichlet plate edge.
    DirichletAlpha1,
    /// Homogeneous junction, Dirichlet plate edge.
    DirichletAlpha0,
}

impl CompositeRegime {
    pub fn of(cfg: &JunctionConfig) -> Self {
        match (cfg.alpha, cfg.plate.lateral_bc) {
            (Alpha::One, LateralBc::Neumann) => Self::Alpha1,
            (Alpha::Zero, LateralBc::Neumann) => Self::Alpha0,
            (Alpha::One, LateralBc::Dirichlet) => Self::DirichletAlpha1,
            (Alpha::Zero, LateralBc::Dirichlet) => Self::DirichletAlpha0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Alpha1 => "alpha1",
            Self::Alpha0 => "alpha0",
            Self::DirichletAlpha1 => "dirichlet_alpha1",
            Self::DirichletAlpha0 => "dirichlet_alpha0",
        }
    }

    pub fn is_contrasting(self) -> bool {
        matches!(self, Self::Alpha1 | Self::DirichletAlpha1)
    }
}

/// Planar P1 field with recovered nodal gradients, so that gradients are
/// continuous and second-order accurate in the interior.
#[derive(Debug, Clone)]
pub struct SmoothField {
    field: FeField,
    nodal: Arc<Vec<[f64; 2]>>,
}

impl SmoothField {
    pub fn new(field: FeField) -> Self {
        let nodal = Arc::new(field.recovered_gradients());
        Self { field, nodal }
    }

    pub fn field(&self) -> &FeField {
        &self.field
    }

    pub fn evaluate(&self, y: [f64; 2]) -> Result<(f64, [f64; 2])> {
        self.field.evaluate_smooth(y, &self.nodal)
    }
}

/// Discretisation choices of the asymptotic pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineOptions {
    /// Target element size of the plate mesh for Green functions and plate
    /// limit problems.
    pub green_mesh_size: f64,
    /// Grade the plate mesh toward the anchors.
    pub grade: bool,
    pub convention: MatchingConvention,
    /// Truncation of the junction problem (homogeneous regime); `None` uses
    /// R = Z = 32a.
    pub truncation: Option<Truncation>,
    /// Value for the constant A0 left open by the homogeneous matching.
    pub a0_const: Option<f64>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { green_mesh_size: 0.02, grade: true, convention: MatchingConvention::default(), truncation: None, a0_const: None }
    }
}

/// Junction data for every rod (disk sections only).
pub fn layer_data(cfg: &JunctionConfig, truncation: Option<Truncation>) -> Result<Vec<Arc<BoundaryLayerData>>> {
    cfg.rods
        .iter()
        .map(|rod| {
            let Shape::Disk { radius } = rod.shape else {
                return Err(Error::Unsupported("homogeneous layer term needs disk cross-sections".into()));
            };
            let t = truncation.unwrap_or_else(|| Truncation::default_for(radius));
            Ok(Arc::new(junction_constant_q(rod, &t, None)?))
        })
        .collect()
}

/// Everything of the asymptotic pipeline that does not depend on h.
#[derive(Debug, Clone)]
pub struct Ingredients {
    pub cfg: JunctionConfig,
    pub regime: CompositeRegime,
    pub options: PipelineOptions,
    pub green: Arc<GreenData>,
    green_regular: Vec<SmoothField>,
    /// U_⊥ (Neumann edge) or U₀^# (Dirichlet edge).
    pub base: SmoothField,
    pub base_at_anchors: Vec<f64>,
    /// U_j^#: Neumann end for contrasting rods, Dirichlet end otherwise.
    pub hashes: Vec<RodProfile>,
    pub potentials: Vec<LogPotential>,
    /// Junction data, homogeneous regime with Neumann edge only.
    pub layers: Vec<Arc<BoundaryLayerData>>,
    pub source_integral: f64,
}

impl Ingredients {
    pub fn compute(cfg: &JunctionConfig, options: &PipelineOptions) -> Result<Self> {
        let layers = if CompositeRegime::of(cfg) == CompositeRegime::Alpha0 {
            layer_data(cfg, options.truncation)?
        } else {
            Vec::new()
        };
        Self::with_layers(cfg, options, layers)
    }

    /// As [`Ingredients::compute`] with precomputed junction data.
    pub fn with_layers(cfg: &JunctionConfig, options: &PipelineOptions, layers: Vec<Arc<BoundaryLayerData>>) -> Result<Self> {
        let violations = validate_config(cfg);
        if !violations.is_empty() {
            let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::Config(msg.join("; ")));
        }
        let regime = CompositeRegime::of(cfg);
        if regime == CompositeRegime::Alpha0 && layers.len() != cfg.n_rods() {
            return Err(Error::InvalidInput(format!("{} layer fields for {} rods", layers.len(), cfg.n_rods())));
        }
        let mesh = Arc::new(mesh_plate(&cfg.plate, options.green_mesh_size, options.grade)?);
        let anchors = cfg.plate.anchors.clone();
        let f0 = |y: [f64; 2]| cfg.sources.plate.value(y);
        let (bc, base) = match cfg.plate.lateral_bc {
            LateralBc::Neumann => (GreenBc::NeumannMeanZero, solve_neumann_mean_zero(mesh.clone(), &f0, None)?.field),
            LateralBc::Dirichlet => (GreenBc::Dirichlet, solve_dirichlet(mesh.clone(), &f0)?),
        };
        let green = green_functions(mesh.clone(), &anchors, cfg.plate.cutoff(), bc)?;
        let base_at_anchors = (0..anchors.len())
            .map(|j| {
                let v = value_at_anchor(&base, &green, &f0, j)?;
                Ok(match bc {
                    GreenBc::NeumannMeanZero => v.green_quadrature,
                    GreenBc::Dirichlet => v.interpolated,
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let hashes = cfg
            .rods
            .iter()
            .enumerate()
            .map(|(j, rod)| {
                let f = cfg.sources.rod(j);
                if regime.is_contrasting() {
                    solve_hash(rod.length, rod.gamma, rod.area(), &f)
                } else {
                    let left = if regime == CompositeRegime::DirichletAlpha0 { base_at_anchors[j] } else { 0.0 };
                    solve_dirichlet_ends(rod.length, rod.gamma, rod.area(), &f, left)
                }
            })
            .collect();
        let potentials = cfg.rods.iter().map(log_potential).collect::<Result<Vec<_>>>()?;
        let source_integral = exact_source_integral(cfg)
            .unwrap_or_else(|| FeField::interpolate(mesh.clone(), |_| 1.0).integrate_against(f0));
        let green_regular = green.regular_parts.iter().cloned().map(SmoothField::new).collect();
        Ok(Self {
            cfg: cfg.clone(),
            regime,
            options: *options,
            green: Arc::new(green),
            green_regular,
            base: SmoothField::new(base),
            base_at_anchors,
            hashes,
            potentials,
            layers,
            source_integral,
        })
    }

    pub fn n_rods(&self) -> usize {
        self.cfg.n_rods()
    }

    /// Matching inputs at step h.
    pub fn matching_inputs(&self, h: f64) -> MatchingInputs {
        let rods = &self.cfg.rods;
        MatchingInputs {
            gmatrix: self.green.gmatrix.clone(),
            c_log: self.potentials.iter().map(|p| p.c_log).collect(),
            gamma: rods.iter().map(|r| r.gamma).collect(),
            area: rods.iter().map(|r| r.area()).collect(),
            length: rods.iter().map(|r| r.length).collect(),
            u_hash_at_0: self.hashes.iter().map(|p| p.value(0.0).unwrap_or(0.0)).collect(),
            u_plate_at_p: self.base_at_anchors.clone(),
            source_integral: self.source_integral,
            ln_h: h.ln(),
            convention: self.options.convention,
        }
    }

    /// Matching coefficients at step h; `None` for the homogeneous Dirichlet
    /// edge, which needs no matching.
    pub fn coefficients(&self, h: f64) -> Result<Option<MatchingCoefficients>> {
        let inputs = self.matching_inputs(h);
        Ok(match self.regime {
            CompositeRegime::Alpha1 => Some(solve_alpha1(&inputs)?),
            CompositeRegime::DirichletAlpha1 => Some(solve_alpha1_dirichlet_lateral(&inputs)?),
            CompositeRegime::Alpha0 => Some(solve_alpha0(&inputs, self.options.a0_const)?),
            CompositeRegime::DirichletAlpha0 => None,
        })
    }

    /// Composite approximation at step h.
    pub fn solution(&self, h: f64) -> Result<AsymptoticSolution> {
        let coeffs = self.coefficients(h)?;
        match self.regime {
            CompositeRegime::Alpha1 => build_alpha1(self, coeffs.as_ref().expect("matched"), h),
            CompositeRegime::Alpha0 => build_alpha0(self, coeffs.as_ref().expect("matched"), h),
            _ => build_dirichlet_variant(self, coeffs.as_ref(), h),
        }
    }
}

/// ∫f₀ in closed form where available: constant sources, and polynomial
/// radial or linear sources on a disk plate.
fn exact_source_integral(cfg: &JunctionConfig) -> Option<f64> {
    let area = cfg.plate.shape.area();
    match (&cfg.sources.plate, &cfg.plate.shape) {
        (PlateSource::Constant { value }, _) => Some(value * area),
        (PlateSource::Linear { value, .. }, Shape::Disk { .. }) => Some(value * area),
        (PlateSource::Radial { coeffs }, Shape::Disk { radius }) => Some(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| 2.0 * PI * c * radius.powi(k as i32 + 2) / (k as f64 + 2.0))
                .sum(),
        ),
        _ => None,
    }
}

/// Plate term: constant + base + Σ A_j G_j + Σ χ_{0j}(A_j W̃^j + c_j w̃_j).
#[derive(Debug, Clone)]
struct PlateTerm {
    constant: f64,
    base: Option<SmoothField>,
    green: Option<(Arc<GreenData>, Vec<SmoothField>)>,
    a: Vec<f64>,
    potentials: Vec<LogPotential>,
    layers: Vec<(Arc<BoundaryLayerData>, f64)>,
}

/// Rod term: profile(z) + χ_j(z) c_j w̃_j.
#[derive(Debug, Clone)]
struct RodTerm {
    anchor: [f64; 2],
    profile: RodProfile,
    layer: Option<(Arc<BoundaryLayerData>, f64)>,
    chi: Cutoff,
}

/// Target of a limit passage: scale · u → target.
#[derive(Debug, Clone)]
pub enum PlateLimit {
    Constant(f64),
    Field(SmoothField),
}

#[derive(Debug, Clone)]
pub struct CorollaryLimits {
    pub plate_scale: f64,
    pub plate: PlateLimit,
    pub rod_scale: f64,
    pub rods: Vec<RodProfile>,
}

/// Composite approximation on the plate and the rods.
#[derive(Debug, Clone)]
pub struct AsymptoticSolution {
    pub regime: CompositeRegime,
    pub h: f64,
    pub coefficients: Option<MatchingCoefficients>,
    pub limits: CorollaryLimits,
    cfg: JunctionConfig,
    chi0: Cutoff,
    plate: PlateTerm,
    rods: Vec<RodTerm>,
}

/// Which part of the junction a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartTag {
    Plate,
    Rod(usize),
}

impl std::fmt::Display for PartTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PartTag::Plate => write!(f, "plate"),
            PartTag::Rod(j) => write!(f, "rod{}", j + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeRow {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub value: f64,
    pub part: PartTag,
}

fn check_step(ing: &Ingredients, h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidInput(format!("step h = {h} must lie in (0, 1)")));
    }
    let _ = ing;
    Ok(())
}

fn check_j(ing: &Ingredients, coeffs: &MatchingCoefficients) -> Result<()> {
    if coeffs.a.len() != ing.n_rods() || ing.green.n_anchors() != ing.n_rods() {
        return Err(Error::InvalidInput(format!(
            "mismatched J: {} coefficients, {} anchors, {} rods",
            coeffs.a.len(),
            ing.green.n_anchors(),
            ing.n_rods()
        )));
    }
    Ok(())
}

fn rod_cutoff(l: f64) -> Cutoff {
    Cutoff::new(l / 3.0, 2.0 * l / 3.0)
}

fn chi0(ing: &Ingredients) -> Cutoff {
    let r0 = ing.cfg.plate.cutoff();
    Cutoff::new(0.5 * r0, r0)
}

fn a0_m1(ing: &Ingredients) -> f64 {
    ing.source_integral / (2.0 * PI * ing.n_rods() as f64)
}

/// Contrasting rods, Neumann edge: plate U₀⁰ + Σχ_{0j}A_jW̃^j, rods U_j⁰.
pub fn build_alpha1(ing: &Ingredients, coeffs: &MatchingCoefficients, h: f64) -> Result<AsymptoticSolution> {
    check_step(ing, h)?;
    check_j(ing, coeffs)?;
    let a0 = coeffs.a0.ok_or_else(|| Error::InvalidInput("contrasting matching must fix A0".into()))?;
    let conv = ing.options.convention;
    let rods = ing
        .hashes
        .iter()
        .zip(&coeffs.a)
        .zip(&ing.cfg.plate.anchors)
        .map(|((hash, &a), &p)| RodTerm {
            anchor: p,
            profile: assemble_u0_alpha1(hash, a, conv),
            layer: None,
            chi: rod_cutoff(hash.l),
        })
        .collect();
    let jn = ing.n_rods() as f64;
    let limits = CorollaryLimits {
        plate_scale: 1.0 / h.ln().abs(),
        plate: PlateLimit::Constant(a0_m1(ing)),
        rod_scale: 1.0,
        rods: ing.hashes.iter().map(|hash| assemble_u0_alpha1(hash, -ing.source_integral / jn, conv)).collect(),
    };
    Ok(AsymptoticSolution {
        regime: CompositeRegime::Alpha1,
        h,
        coefficients: Some(coeffs.clone()),
        limits,
        cfg: ing.cfg.clone(),
        chi0: chi0(ing),
        plate: PlateTerm {
            constant: a0,
            base: Some(ing.base.clone()),
            green: Some((ing.green.clone(), ing.green_regular.clone())),
            a: coeffs.a.clone(),
            potentials: ing.potentials.clone(),
            layers: Vec::new(),
        },
        rods,
    })
}

/// Homogeneous junction, Neumann edge: plate h⁻¹a₀ + Σχ_{0j}w̃_j, rods
/// h⁻¹a₀(1 - z/l_j) + χ_j w̃_j, with w̃_j = -a₀γ_j|ω_j|/l_j times the decaying
/// part of the junction field.
pub fn build_alpha0(ing: &Ingredients, coeffs: &MatchingCoefficients, h: f64) -> Result<AsymptoticSolution> {
    check_step(ing, h)?;
    check_j(ing, coeffs)?;
    if ing.layers.len() != ing.n_rods() {
        return Err(Error::Unsupported("homogeneous layer term needs disk cross-sections".into()));
    }
    let a0 = coeffs.small_a0.ok_or_else(|| Error::InvalidInput("homogeneous matching must give a0".into()))?;
    let mut layers = Vec::new();
    let mut rods = Vec::new();
    for (j, rod) in ing.cfg.rods.iter().enumerate() {
        let c = -a0 * rod.gamma * rod.area() / rod.length;
        layers.push((ing.layers[j].clone(), c));
        rods.push(RodTerm {
            anchor: ing.cfg.plate.anchors[j],
            profile: leading_alpha0(rod.length, rod.gamma, rod.area(), a0 / h),
            layer: Some((ing.layers[j].clone(), c)),
            chi: rod_cutoff(rod.length),
        });
    }
    let limits = CorollaryLimits {
        plate_scale: h,
        plate: PlateLimit::Constant(a0),
        rod_scale: h,
        rods: ing.cfg.rods.iter().map(|r| leading_alpha0(r.length, r.gamma, r.area(), a0)).collect(),
    };
    Ok(AsymptoticSolution {
        regime: CompositeRegime::Alpha0,
        h,
        coefficients: Some(coeffs.clone()),
        limits,
        cfg: ing.cfg.clone(),
        chi0: chi0(ing),
        plate: PlateTerm { constant: a0 / h, base: None, green: None, a: Vec::new(), potentials: Vec::new(), layers },
        rods,
    })
}

/// Dirichlet edge. Contrasting rods: plate U₀^# + Σ A_j G_j (Dirichlet Green
/// functions) + layer terms, rods U_j⁰. Homogeneous: plate U₀^#, rods U_j^#
/// with U_j^#(0) = U₀^#(P^j).
pub fn build_dirichlet_variant(
    ing: &Ingredients,
    coeffs: Option<&MatchingCoefficients>,
    h: f64,
) -> Result<AsymptoticSolution> {
    check_step(ing, h)?;
    let rods_cfg = &ing.cfg.rods;
    let anchors = &ing.cfg.plate.anchors;
    match ing.regime {
        CompositeRegime::DirichletAlpha1 => {
            let coeffs = coeffs.ok_or_else(|| Error::InvalidInput("contrasting Dirichlet variant needs coefficients".into()))?;
            check_j(ing, coeffs)?;
            let conv = ing.options.convention;
            let rods = ing
                .hashes
                .iter()
                .zip(&coeffs.a)
                .zip(anchors)
                .map(|((hash, &a), &p)| RodTerm {
                    anchor: p,
                    profile: assemble_u0_alpha1(hash, a, conv),
                    layer: None,
                    chi: rod_cutoff(hash.l),
                })
                .collect();
            Ok(AsymptoticSolution {
                regime: ing.regime,
                h,
                coefficients: Some(coeffs.clone()),
                limits: CorollaryLimits {
                    plate_scale: 1.0,
                    plate: PlateLimit::Field(ing.base.clone()),
                    rod_scale: 1.0,
                    rods: ing.hashes.clone(),
                },
                cfg: ing.cfg.clone(),
                chi0: chi0(ing),
                plate: PlateTerm {
                    constant: 0.0,
                    base: Some(ing.base.clone()),
                    green: Some((ing.green.clone(), ing.green_regular.clone())),
                    a: coeffs.a.clone(),
                    potentials: ing.potentials.clone(),
                    layers: Vec::new(),
                },
                rods,
            })
        }
        CompositeRegime::DirichletAlpha0 => {
            let rods = ing
                .hashes
                .iter()
                .zip(anchors)
                .zip(rods_cfg)
                .map(|((hash, &p), r)| RodTerm { anchor: p, profile: hash.clone(), layer: None, chi: rod_cutoff(r.length) })
                .collect();
            Ok(AsymptoticSolution {
                regime: ing.regime,
                h,
                coefficients: coeffs.cloned(),
                limits: CorollaryLimits {
                    plate_scale: 1.0,
                    plate: PlateLimit::Field(ing.base.clone()),
                    rod_scale: 1.0,
                    rods: ing.hashes.clone(),
                },
                cfg: ing.cfg.clone(),
                chi0: chi0(ing),
                plate: PlateTerm {
                    constant: 0.0,
                    base: Some(ing.base.clone()),
                    green: None,
                    a: Vec::new(),
                    potentials: Vec::new(),
                    layers: Vec::new(),
                },
                rods,
            })
        }
        _ => Err(Error::InvalidInput("Dirichlet variant needs a Dirichlet plate edge".into())),
    }
}

/// Decaying layer term c χ(r_j) w̃(r_j/h, z/h) with gradient in (y, z).
fn layer_term(
    layer: &BoundaryLayerData,
    c: f64,
    chi: Option<&Cutoff>,
    d: [f64; 2],
    z: f64,
    h: f64,
) -> Result<(f64, [f64; 3])> {
    let r = d[0].hypot(d[1]);
    let (w, gw) = layer.w_tilde(r / h, z / h)?;
    let (x, dx) = match chi {
        Some(ch) => (ch.value(r), ch.d1(r)),
        None => (1.0, 0.0),
    };
    let dr = c * (dx * w + x * gw[0] / h);
    let (ex, ey) = if r > 0.0 { (d[0] / r, d[1] / r) } else { (0.0, 0.0) };
    Ok((c * x * w, [dr * ex, dr * ey, c * x * gw[1] / h]))
}

impl AsymptoticSolution {
    pub fn n_rods(&self) -> usize {
        self.rods.len()
    }

    pub fn config(&self) -> &JunctionConfig {
        &self.cfg
    }

    /// Plate part and its gradient (∂y₁, ∂y₂, ∂z).
    pub fn plate(&self, y: [f64; 2], z: f64) -> Result<(f64, [f64; 3])> {
        let p = &self.plate;
        let mut v = p.constant;
        let mut g = [0.0; 3];
        if let Some(base) = &p.base {
            let (b, gb) = base.evaluate(y)?;
            v += b;
            g[0] += gb[0];
            g[1] += gb[1];
        }
        if let Some((green, regular)) = &p.green {
            for (j, a) in p.a.iter().enumerate() {
                let (s, gs) = green.singular_part(j, y);
                let (r, gr) = regular[j].evaluate(y)?;
                v += a * (s + r);
                g[0] += a * (gs[0] + gr[0]);
                g[1] += a * (gs[1] + gr[1]);
            }
        }
        for (j, pot) in p.potentials.iter().enumerate() {
            let anchor = self.cfg.plate.anchors[j];
            let d = [y[0] - anchor[0], y[1] - anchor[1]];
            let r = d[0].hypot(d[1]);
            if r >= self.chi0.outer || r == 0.0 {
                continue;
            }
            let (w, gw) = pot.remainder([d[0] / self.h, d[1] / self.h]);
            if w == 0.0 && gw == [0.0, 0.0] {
                continue;
            }
            let (x, dx) = (self.chi0.value(r), self.chi0.d1(r));
            v += p.a[j] * x * w;
            g[0] += p.a[j] * (dx * d[0] / r * w + x * gw[0] / self.h);
            g[1] += p.a[j] * (dx * d[1] / r * w + x * gw[1] / self.h);
        }
        for (j, (layer, c)) in p.layers.iter().enumerate() {
            let anchor = self.cfg.plate.anchors[j];
            let d = [y[0] - anchor[0], y[1] - anchor[1]];
            if d[0].hypot(d[1]) >= self.chi0.outer {
                continue;
            }
            let (lv, lg) = layer_term(layer, *c, Some(&self.chi0), d, z, self.h)?;
            v += lv;
            for k in 0..3 {
                g[k] += lg[k];
            }
        }
        Ok((v, g))
    }

    /// Rod part j and its gradient (∂y₁, ∂y₂, ∂z).
    pub fn rod(&self, j: usize, y: [f64; 2], z: f64) -> Result<(f64, [f64; 3])> {
        let rod = self.rods.get(j).ok_or_else(|| Error::InvalidInput(format!("no rod {j}")))?;
        let mut v = rod.profile.value(z)?;
        let mut g = [0.0, 0.0, rod.profile.derivative(z)?];
        if let Some((layer, c)) = &rod.layer {
            let x = rod.chi.value(z);
            if x > 0.0 || rod.chi.d1(z) != 0.0 {
                let d = [y[0] - rod.anchor[0], y[1] - rod.anchor[1]];
                let (w, gw) = layer_term(layer, *c, None, d, z, self.h)?;
                v += x * w;
                g[0] += x * gw[0];
                g[1] += x * gw[1];
                g[2] += x * gw[2] + rod.chi.d1(z) * w;
            }
        }
        Ok((v, g))
    }

    /// Part containing the physical point (y₁, y₂, z), if any.
    pub fn part_of(&self, x: [f64; 3]) -> Option<PartTag> {
        for (j, rod) in self.cfg.rods.iter().enumerate() {
            let p = self.cfg.plate.anchors[j];
            let eta = [(x[0] - p[0]) / self.h, (x[1] - p[1]) / self.h];
            if rod.shape.contains(eta) && x[2] > 0.0 && x[2] < rod.length {
                return Some(PartTag::Rod(j));
            }
        }
        if x[2] > 0.0 && x[2] < self.h && self.cfg.plate.shape.contains([x[0], x[1]]) {
            return Some(PartTag::Plate);
        }
        None
    }

    /// Value at a physical point, with the part it was taken from.
    pub fn evaluate(&self, x: [f64; 3]) -> Result<Option<(f64, PartTag)>> {
        Ok(match self.part_of(x) {
            Some(PartTag::Plate) => Some((self.plate([x[0], x[1]], x[2])?.0, PartTag::Plate)),
            Some(PartTag::Rod(j)) => Some((self.rod(j, [x[0], x[1]], x[2])?.0, PartTag::Rod(j))),
            None => None,
        })
    }

    /// Structured probe: an n × n grid on the mid-plane of the plate (holes
    /// excluded) and n points along each rod axis.
    pub fn probe_grid(&self, n: usize) -> Result<Vec<ProbeRow>> {
        let n = n.max(2);
        let r = self.cfg.plate.shape.circumradius();
        let mut rows = Vec::new();
        for i in 0..n {
            for k in 0..n {
                let y = [-r + 2.0 * r * i as f64 / (n - 1) as f64, -r + 2.0 * r * k as f64 / (n - 1) as f64];
                let x = [y[0], y[1], 0.5 * self.h];
                if let Some((value, PartTag::Plate)) = self.evaluate(x)? {
                    rows.push(ProbeRow { x: x[0], y: x[1], z: x[2], value, part: PartTag::Plate });
                }
            }
        }
        for (j, rod) in self.cfg.rods.iter().enumerate() {
            let p = self.cfg.plate.anchors[j];
            for k in 0..=n {
                let z = rod.length * k as f64 / n as f64;
                let value = self.rod(j, p, z)?.0;
                rows.push(ProbeRow { x: p[0], y: p[1], z, value, part: PartTag::Rod(j) });
            }
        }
        Ok(rows)
    }

    /// CSV with columns x, y, z, value, part.
    pub fn write_probe_csv<W: Write>(&self, w: W, n: usize) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "y", "z", "value", "part"])?;
        for row in self.probe_grid(n)? {
            wr.write_record([
                format!("{:.12e}", row.x),
                format!("{:.12e}", row.y),
                format!("{:.12e}", row.z),
                format!("{:.12e}", row.value),
                row.part.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Flux -∮ ∂_ρ U ρ dθ of the plate part through the circle of radius ρ
    /// about anchor j; tends to A_j as ρ → 0 for contrasting rods.
    pub fn singular_flux(&self, j: usize, rho: f64) -> Result<f64> {
        let p = self.cfg.plate.anchors[j];
        let q = CompositeGauss::new(0.0, 2.0 * PI, 32, 6);
        let mut s = 0.0;
        for (th, w) in q.points() {
            let (c, sn) = (th.cos(), th.sin());
            let (_, g) = self.plate([p[0] + rho * c, p[1] + rho * sn], 0.5 * self.h)?;
            s -= w * (g[0] * c + g[1] * sn) * rho;
        }
        Ok(s)
    }
}

/// Hardy-type inequality ∫₀^L ζ⁻²|W|² ≤ 4∫₀^L |W'|²: returns (left, right)
/// for W given with its derivative.
pub fn hardy_sides(w: &dyn Fn(f64) -> (f64, f64), l: f64) -> (f64, f64) {
    // ζ = l t² removes the endpoint behaviour of ζ⁻²W².
    let q = CompositeGauss::new(0.0, 1.0, 64, 8);
    let mut left = 0.0;
    let mut right = 0.0;
    for (t, wt) in q.points() {
        let z = l * t * t;
        let jac = 2.0 * l * t;
        let (v, dv) = w(z);
        if z > 0.0 {
            left += wt * jac * v * v / (z * z);
        }
        right += wt * jac * 4.0 * dv * dv;
    }
    (left, right)
}

/// Per-h error norms between a reference solution and a composite field.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub h: f64,
    pub regime: CompositeRegime,
    /// ‖∇(u₀ - U)‖ on the perforated plate.
    pub plate_h1_seminorm_err: f64,
    /// ‖r⁻¹(1 + |ln r|)⁻¹(u₀ - U)‖, r = min{1, r₁, …, r_J}.
    pub plate_weighted_l2_err: f64,
    /// The same with the factor (1 + |ln h|)⁻¹.
    pub plate_weighted_l2_err_log: f64,
    /// Left side of the plate estimate of the regime.
    pub plate_combined_err: f64,
    /// ‖∇(u_j - U_j)‖ over the rods, socket included.
    pub rod_grad_err: f64,
    /// Full H¹ norm of u_j - U_j.
    pub rod_h1_err: f64,
    /// h^{-1/2} rod_h1_err for contrasting rods, rod_h1_err otherwise.
    pub rod_h1_err_scaled: f64,
    /// ‖(l_j - z)⁻¹(u_j - U_j)‖.
    pub rod_weighted_err: f64,
    /// Left side of the rod estimate of the regime.
    pub rod_combined_err: f64,
    /// Mean of u over the plate.
    pub plate_mean: f64,
    /// scale · plate_mean (|ln h|⁻¹ or h), compared with the limit constant.
    pub plate_limit_value: f64,
    pub plate_limit_target: Option<f64>,
    /// Distance of scale · u to the plate limit in H¹ of the rescaled plate.
    pub plate_corollary_err: f64,
    /// Distance of scale · u to the rod limit in H¹ of the rescaled rod.
    pub rod_corollary_err: f64,
    /// ‖∇u₀‖ on the plate.
    pub norm_of_reference_plate: f64,
    /// H¹ norm of u over the rods.
    pub norm_of_reference_rod: f64,
}

impl ErrorReport {
    pub fn csv_header() -> Vec<&'static str> {
        vec![
            "h",
            "regime",
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
            "plate_limit_target",
            "plate_corollary_err",
            "rod_corollary_err",
            "norm_of_reference_plate",
            "norm_of_reference_rod",
        ]
    }

    pub fn csv_row(&self) -> Vec<String> {
        let f = |v: f64| format!("{v:.12e}");
        vec![
            f(self.h),
            self.regime.name().to_string(),
            f(self.plate_h1_seminorm_err),
            f(self.plate_weighted_l2_err),
            f(self.plate_weighted_l2_err_log),
            f(self.plate_combined_err),
            f(self.rod_grad_err),
            f(self.rod_h1_err),
            f(self.rod_h1_err_scaled),
            f(self.rod_weighted_err),
            f(self.rod_combined_err),
            f(self.plate_mean),
            f(self.plate_limit_value),
            self.plate_limit_target.map_or_else(String::new, f),
            f(self.plate_corollary_err),
            f(self.rod_corollary_err),
            f(self.norm_of_reference_plate),
            f(self.norm_of_reference_rod),
        ]
    }

    /// Column by name, for rate fits.
    pub fn column(&self, name: &str) -> Option<f64> {
        Some(match name {
            "h" => self.h,
            "plate_h1_seminorm_err" => self.plate_h1_seminorm_err,
            "plate_weighted_l2_err" => self.plate_weighted_l2_err,
            "plate_weighted_l2_err_log" => self.plate_weighted_l2_err_log,
            "plate_combined_err" => self.plate_combined_err,
            "rod_grad_err" => self.rod_grad_err,
            "rod_h1_err" => self.rod_h1_err,
            "rod_h1_err_scaled" => self.rod_h1_err_scaled,
            "rod_weighted_err" => self.rod_weighted_err,
            "rod_combined_err" => self.rod_combined_err,
            "plate_mean" => self.plate_mean,
            "plate_limit_value" => self.plate_limit_value,
            "plate_limit_deviation" => {
                let t = self.plate_limit_target?;
                (self.plate_limit_value - t).abs() / t.abs()
            }
            "plate_corollary_err" => self.plate_corollary_err,
            "rod_corollary_err" => self.rod_corollary_err,
            "norm_of_reference_plate" => self.norm_of_reference_plate,
            "norm_of_reference_rod" => self.norm_of_reference_rod,
            _ => return None,
        })
    }
}

const N_ACC: usize = 11;

/// Error norms against the axisymmetric reference solution.
pub fn error_norms(asym: &AsymptoticSolution, reference: &ReferenceSolution) -> Result<ErrorReport> {
    let cfg = &asym.cfg;
    let mismatch = |m: String| Err(Error::InvalidInput(format!("geometry mismatch: {m}")));
    if cfg.n_rods() != 1 || cfg.plate.anchors[0] != [0.0, 0.0] {
        return mismatch("the reference is a centred one-rod junction".into());
    }
    if (asym.h - reference.h).abs() > 1e-12 * asym.h {
        return mismatch(format!("h = {} vs {}", asym.h, reference.h));
    }
    if (cfg.rods[0].length - reference.rod_length).abs() > 1e-12 {
        return mismatch(format!("rod length {} vs {}", cfg.rods[0].length, reference.rod_length));
    }
    if let Shape::Disk { radius } = cfg.plate.shape {
        if (radius - reference.plate_radius).abs() > 1e-12 {
            return mismatch(format!("plate radius {radius} vs {}", reference.plate_radius));
        }
    }
    error_norms_field(asym, reference.field())
}

/// Error norms of an axisymmetric field on a T-mesh whose core is the rod
/// and whose slab is the plate; the composite is evaluated on the plane
/// y = (r, 0).
pub fn error_norms_field(asym: &AsymptoticSolution, field: &AxisymField) -> Result<ErrorReport> {
    let mesh = field.mesh();
    let h = asym.h;
    let l = asym.cfg.rods.first().map(|r| r.length).ok_or_else(|| Error::InvalidInput("no rods".into()))?;
    let lim = &asym.limits;
    let anchors = &asym.cfg.plate.anchors;
    let per_triangle: Vec<[f64; N_ACC]> = (0..mesh.triangles().len())
        .into_par_iter()
        .map(|t| -> Result<[f64; N_ACC]> {
            let mut acc = [0.0; N_ACC];
            let gu = field.gradient(t);
            let core = mesh.is_core(t);
            for (p, bary, w) in mesh.quadrature(t) {
                let u = field.value_at(t, bary);
                let y = [p[0], 0.0];
                if !core {
                    let (v, g) = asym.plate(y, p[1])?;
                    let e = u - v;
                    let (er, ez) = (gu[0] - g[0], gu[1] - g[2]);
                    let rr = anchors.iter().map(|a| (y[0] - a[0]).hypot(y[1] - a[1])).fold(1.0, f64::min);
                    let wt = 1.0 / (rr * (1.0 + rr.ln().abs()));
                    acc[0] += w * (er * er + ez * ez);
                    acc[1] += w * (wt * e).powi(2);
                    acc[2] += w * (gu[0] * gu[0] + gu[1] * gu[1]);
                    acc[3] += w * u;
                    acc[4] += w;
                    let (tv, tg) = match &lim.plate {
                        PlateLimit::Constant(c) => (*c, [0.0, 0.0]),
                        PlateLimit::Field(f) => f.evaluate(y)?,
                    };
                    let s = lim.plate_scale;
                    acc[5] += w
                        * ((s * u - tv).powi(2) + (s * gu[0] - tg[0]).powi(2) + (h * s * gu[1]).powi(2))
                        / h;
                } else {
                    let (v, g) = asym.rod(0, y, p[1])?;
                    let e = u - v;
                    let (er, ez) = (gu[0] - g[0], gu[1] - g[2]);
                    acc[6] += w * e * e;
                    acc[7] += w * (er * er + ez * ez);
                    acc[8] += w * (e / (l - p[1])).powi(2);
                    acc[9] += w * (u * u + gu[0] * gu[0] + gu[1] * gu[1]);
                    let target = &lim.rods[0];
                    let (tv, td) = (target.value(p[1])?, target.derivative(p[1])?);
                    let s = lim.rod_scale;
                    acc[10] += w
                        * ((s * u - tv).powi(2) + (h * s * gu[0]).powi(2) + (s * gu[1] - td).powi(2))
                        / (h * h);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = [0.0; N_ACC];
    for a in &per_triangle {
        for k in 0..N_ACC {
            acc[k] += a[k];
        }
    }
    let plate_h1 = acc[0].sqrt();
    let weighted = acc[1].sqrt();
    let log_factor = 1.0 / (1.0 + h.ln().abs());
    let rod_grad = acc[7].sqrt();
    let rod_h1 = (acc[6] + acc[7]).sqrt();
    let rod_weighted = acc[8].sqrt();
    let contrasting = asym.regime.is_contrasting();
    let rod_scaled = if contrasting { rod_h1 / h.sqrt() } else { rod_h1 };
    let plate_combined = match asym.regime {
        CompositeRegime::Alpha1 => plate_h1 + log_factor * weighted,
        CompositeRegime::Alpha0 => weighted,
        _ => plate_h1,
    };
    let rod_combined = match asym.regime {
        CompositeRegime::Alpha1 => rod_scaled,
        CompositeRegime::Alpha0 => rod_grad + rod_weighted,
        CompositeRegime::DirichletAlpha1 => rod_grad / h,
        CompositeRegime::DirichletAlpha0 => rod_grad,
    };
    let plate_mean = if acc[4] > 0.0 { acc[3] / acc[4] } else { 0.0 };
    let plate_limit_target = match &lim.plate {
        PlateLimit::Constant(c) => Some(*c),
        PlateLimit::Field(_) => None,
    };
    Ok(ErrorReport {
        h,
        regime: asym.regime,
        plate_h1_seminorm_err: plate_h1,
        plate_weighted_l2_err: weighted,
        plate_weighted_l2_err_log: log_factor * weighted,
        plate_combined_err: plate_combined,
        rod_grad_err: rod_grad,
        rod_h1_err: rod_h1,
        rod_h1_err_scaled: rod_scaled,
        rod_weighted_err: rod_weighted,
        rod_combined_err: rod_combined,
        plate_mean,
        plate_limit_value: lim.plate_scale * plate_mean,
        plate_limit_target,
        plate_corollary_err: acc[5].sqrt(),
        rod_corollary_err: acc[10].sqrt(),
        norm_of_reference_plate: acc[2].sqrt(),
        norm_of_reference_rod: acc[9].sqrt(),
    })
}

/// Writes error reports as CSV.
pub fn write_error_csv(path: &Path, rows: &[ErrorReport]) -> Result<()> {
    let mut wr = csv::Writer::from_path(path)?;
    wr.write_record(ErrorReport::csv_header())?;
    for r in rows {
        wr.write_record(r.csv_row())?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CrossSection, PlateDomain, RodSource, Sources};
    use crate::reference_axisym::{solve_reference, MeshControls};

    fn standard(alpha: Alpha, lateral: LateralBc, h: f64) -> JunctionConfig {
        let mut plate = PlateDomain::disk(1.0, vec![[0.0, 0.0]]);
        plate.lateral_bc = lateral;
        JunctionConfig {
            plate,
            rods: vec![CrossSection::disk(1.0, 1.0, 1.0)],
            alpha,
            h,
            h0: None,
            sources: Sources { plate: PlateSource::Constant { value: 1.0 }, rods: vec![RodSource::zero()] },
        }
    }

    fn options(conv: MatchingConvention) -> PipelineOptions {
        PipelineOptions { green_mesh_size: 0.05, convention: conv, ..PipelineOptions::default() }
    }

    fn radial_green(r: f64) -> f64 {
        -r.ln() / (2.0 * PI) + r * r / (4.0 * PI) - 3.0 / (8.0 * PI)
    }

    #[test]
    fn alpha1_plate_value_oracle() {
        let cfg = standard(Alpha::One, LateralBc::Neumann, 0.01);
        // Published and flux-balanced matching give different constants A0.
        for (conv, a0) in [(MatchingConvention::AsPublished, 0.92757), (MatchingConvention::FluxBalanced, 2.92759)] {
            let ing = Ingredients::compute(&cfg, &options(conv)).unwrap();
            let s = ing.solution(0.01).unwrap();
            let c = s.coefficients.as_ref().unwrap();
            assert!((c.a[0] + PI).abs() < 1e-10);
            assert!((c.a0.unwrap() - a0).abs() < 1e-2, "{:?}", c.a0);
            let expected = c.a0.unwrap() - PI * radial_green(0.5);
            let (v, _) = s.plate([0.5, 0.0], 0.005).unwrap();
            assert!((v - expected).abs() < 5e-3, "{v} vs {expected}");
            let oracle = a0 - PI * 0.01085;
            assert!((v - oracle).abs() < 1.5e-2, "{v} vs {oracle}");
        }
    }

    #[test]
    fn alpha1_log_coefficient_from_flux() {
        let cfg = standard(Alpha::One, LateralBc::Neumann, 0.01);
        let ing = Ingredients::compute(&cfg, &options(MatchingConvention::FluxBalanced)).unwrap();
        let s = ing.solution(0.01).unwrap();
        let a = s.coefficients.as_ref().unwrap().a[0];
        let f1 = s.singular_flux(0, 0.1).unwrap();
        let f2 = s.singular_flux(0, 0.05).unwrap();
        assert!((f2 - a).abs() < (f1 - a).abs() + 1e-12);
        assert!((f2 - a).abs() < 2e-2 * a.abs(), "{f2} vs {a}");
        // -ΔU₀⁰ = f₀ - ∫f₀/|ω₀| - A/|ω₀| = 1 away from the anchor, so the flux
        // is A + πρ² and the ρ² Richardson combination recovers A.
        for (rho, f) in [(0.1, f1), (0.05, f2)] {
            assert!((f - a - PI * rho * rho).abs() < 3e-3, "{rho}: {f}");
        }
        let rich = (4.0 * f2 - f1) / 3.0;
        assert!((rich - a).abs() < 3e-3, "{rich} vs {a}");
    }

    #[test]
    fn rod_end_value_is_zero_in_every_regime() {
        for (alpha, lateral) in [
            (Alpha::One, LateralBc::Neumann),
            (Alpha::Zero, LateralBc::Neumann),
            (Alpha::One, LateralBc::Dirichlet),
            (Alpha::Zero, LateralBc::Dirichlet),
        ] {
            let mut cfg = standard(alpha, lateral, 0.05);
            cfg.sources.rods = vec![RodSource { coeffs: vec![0.3, -0.2] }];
            let ing = Ingredients::compute(&cfg, &options(MatchingConvention::FluxBalanced)).unwrap();
            let s = ing.solution(0.05).unwrap();
            for r in [0.0, 0.02] {
                assert_eq!(s.rod(0, [r, 0.0], 1.0).unwrap().0, 0.0, "{alpha:?} {lateral:?}");
            }
        }
    }

    #[test]
    fn zero_data_gives_zero_field() {
        for (alpha, lateral) in [(Alpha::One, LateralBc::Neumann), (Alpha::Zero, LateralBc::Dirichlet)] {
            let mut cfg = standard(alpha, lateral, 0.05);
            cfg.sources = Sources { plate: PlateSource::Constant { value: 0.0 }, rods: vec![] };
            let ing = Ingredients::compute(&cfg, &options(MatchingConvention::FluxBalanced)).unwrap();
            let s = ing.solution(0.05).unwrap();
            for row in s.probe_grid(7).unwrap() {
                assert!(row.value.abs() < 1e-12, "{row:?}");
            }
        }
    }

    #[test]
    fn linear_in_the_sources() {
        let cfg = standard(Alpha::One, LateralBc::Neumann, 0.02);
        let mut cfg2 = cfg.clone();
        cfg2.sources = cfg.sources.scaled(2.5);
        let o = options(MatchingConvention::FluxBalanced);
        let s1 = Ingredients::compute(&cfg, &o).unwrap().solution(0.02).unwrap();
        let s2 = Ingredients::compute(&cfg2, &o).unwrap().solution(0.02).unwrap();
        for (a, b) in s1.probe_grid(6).unwrap().iter().zip(s2.probe_grid(6).unwrap()) {
            assert!((2.5 * a.value - b.value).abs() < 1e-9 * (1.0 + b.value.abs()));
        }
    }

    #[test]
    fn dirichlet_alpha0_closed_forms() {
        let cfg = standard(Alpha::Zero, LateralBc::Dirichlet, 0.05);
        let ing = Ingredients::compute(&cfg, &options(MatchingConvention::FluxBalanced)).unwrap();
        let s = ing.solution(0.05).unwrap();
        for r in [0.1, 0.5, 0.9] {
            let (v, _) = s.plate([r, 0.0], 0.01).unwrap();
            assert!((v - 0.25 * (1.0 - r * r)).abs() < 2e-3, "{r}: {v}");
        }
        let u0 = ing.base_at_anchors[0];
        assert!((u0 - 0.25).abs() < 2e-3);
        for z in [0.0, 0.3, 0.7] {
            assert!((s.rod(0, [0.0, 0.0], z).unwrap().0 - u0 * (1.0 - z)).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_alpha1_has_small_coefficient() {
        let cfg = standard(Alpha::One, LateralBc::Dirichlet, 0.01);
        let ing = Ingredients::compute(&cfg, &options(MatchingConvention::AsPublished)).unwrap();
        let s = ing.solution(0.01).unwrap();
        let a = s.coefficients.as_ref().unwrap().a[0];
        assert!((a + 0.60296).abs() < 5e-3, "{a}");
        let f = s.singular_flux(0, 0.05).unwrap();
        assert!((f - a).abs() < 5e-2 * a.abs(), "{f} vs {a}");
    }

    #[test]
    fn alpha0_structure() {
        let h = 0.05;
        let cfg = standard(Alpha::Zero, LateralBc::Neumann, h);
        let ing = Ingredients::compute(&cfg, &options(MatchingConvention::FluxBalanced)).unwrap();
        let s = ing.solution(h).unwrap();
        assert!((s.coefficients.as_ref().unwrap().small_a0.unwrap() - 1.0).abs() < 1e-3);
        // Beyond 2l/3 only the leading linear profile remains.
        let (v, _) = s.rod(0, [0.0, 0.0], 0.75).unwrap();
        assert!((v - 0.25 / h).abs() < 1e-2 / h);
        // Away from the anchor the plate part is h⁻¹a₀.
        let (v, _) = s.plate([0.8, 0.0], 0.5 * h).unwrap();
        assert!((h * v - 1.0).abs() < 5e-3);
        // The layer term is O(1) at z = l/2.
        let (v, _) = s.rod(0, [0.0, 0.0], 0.5).unwrap();
        assert!((v - 0.5 / h).abs() < 1.0, "{v}");
        let mut zero = cfg.clone();
        zero.sources.plate = PlateSource::Constant { value: 0.0 };
        let z = Ingredients::with_layers(&zero, &options(MatchingConvention::FluxBalanced), ing.layers.clone())
            .unwrap()
            .solution(h)
            .unwrap();
        for row in z.probe_grid(5).unwrap() {
            assert_eq!(row.value, 0.0);
        }
    }

    #[test]
    fn polygon_sections_rejected_in_homogeneous_regime() {
        let mut cfg = standard(Alpha::Zero, LateralBc::Neumann, 0.05);
        cfg.rods[0].shape = Shape::Polygon { vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] };
        assert!(matches!(Ingredients::compute(&cfg, &PipelineOptions::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn weighted_norm_reproduces_radial_integral() {
        let h = 0.05;
        let cfg = standard(Alpha::Zero, LateralBc::Dirichlet, h);
        let mut zero = cfg.clone();
        zero.sources = Sources { plate: PlateSource::Constant { value: 0.0 }, rods: vec![] };
        let s = Ingredients::compute(&zero, &options(MatchingConvention::FluxBalanced)).unwrap().solution(h).unwrap();
        let reference = solve_reference(&zero, &MeshControls::default()).unwrap();
        let field = reference.field();
        let c = 0.7;
        let a = h;
        let values: Vec<f64> = field.mesh().vertices().iter().map(|v| if v[0] >= a - 1e-14 && v[1] <= h + 1e-14 { c } else { 0.0 }).collect();
        let shifted = AxisymField::new(field.mesh().clone(), values).unwrap();
        let rep = error_norms_field(&s, &shifted).unwrap();
        // 2πh ∫_{ah}^1 r⁻¹(1 + |ln r|)⁻² dr = 2πh (1 - 1/(1 + |ln ah|)).
        let exact = c * (2.0 * PI * h * (1.0 - 1.0 / (1.0 + a.ln().abs()))).sqrt();
        assert!((rep.plate_weighted_l2_err - exact).abs() < 1e-4 * exact, "{} vs {exact}", rep.plate_weighted_l2_err);
        assert!(rep.plate_h1_seminorm_err < 1e-12);
        // Without the hole the integral is 2πh, i.e. |c|√(2πh).
        let no_hole = c * (2.0 * PI * h).sqrt();
        assert!(rep.plate_weighted_l2_err < no_hole);
    }

    #[test]
    fn identical_fields_give_zero_errors() {
        let h = 0.05;
        let cfg = standard(Alpha::Zero, LateralBc::Dirichlet, h);
        let mut zero = cfg.clone();
        zero.sources = Sources { plate: PlateSource::Constant { value: 0.0 }, rods: vec![] };
        let s = Ingredients::compute(&zero, &options(MatchingConvention::FluxBalanced)).unwrap().solution(h).unwrap();
        let reference = solve_reference(&zero, &MeshControls::default()).unwrap();
        let rep = error_norms(&s, &reference).unwrap();
        for v in [rep.plate_h1_seminorm_err, rep.plate_weighted_l2_err, rep.rod_h1_err, rep.rod_weighted_err] {
            assert!(v < 1e-12);
        }
        let other = s.clone();
        let mut bad = cfg.clone();
        bad.rods[0].length = 2.0;
        let r2 = solve_reference(&bad, &MeshControls::default()).unwrap();
        assert!(error_norms(&other, &r2).is_err());
    }

    #[test]
    fn hardy_example() {
        let (l, r) = hardy_sides(&|z| (z, 1.0), 1.0);
        assert!((l - 1.0).abs() < 1e-12 && (r - 4.0).abs() < 1e-12);
        let (l, r) = hardy_sides(&|z| (z * (2.0 - z), 2.0 - 2.0 * z), 1.5);
        assert!(l <= r);
    }
}
