//! Cross-section quantities of a rod: the exterior logarithmic potential and
//! capacity, the semi-cylinder growth constant and the junction constant q of
//! the layer/semi-cylinder problem.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CrossSection, Shape};
use crate::matching::MatchingConvention;
use crate::quadrature::{gauss_legendre, CompositeGauss, Cutoff};
use crate::reference_axisym::{EdgeBc, MeshControls, TeeProblem, TeeSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    AnalyticDisk,
    Numeric,
}

/// Piecewise-constant single-layer density on straight panels.
#[derive(Debug, Clone)]
struct Layer {
    panels: Vec<([f64; 2], [f64; 2])>,
    density: Vec<f64>,
    constant: f64,
}

/// ∫₀^L ½ ln((x - τ)² + y²) dτ and its gradient in (x, y).
fn panel_log_integral(x: f64, y: f64, len: f64) -> (f64, [f64; 2]) {
    let prim = |t: f64| -> f64 {
        // Antiderivative in τ' = τ - x of ½ ln(τ'² + y²).
        let d2 = t * t + y * y;
        let log = if d2 > 0.0 { t * d2.ln() } else { 0.0 };
        let at = if y != 0.0 { 2.0 * y * (t / y).atan() } else { 0.0 };
        0.5 * (log - 2.0 * t + at)
    };
    let v = prim(len - x) - prim(-x);
    let lg = |t: f64| (t * t + y * y).ln();
    let gx = 0.5 * (lg(x) - lg(x - len));
    let gy = if y != 0.0 { (x / y).atan() - ((x - len) / y).atan() } else { 0.0 };
    (v, [gx, gy])
}

impl Layer {
    /// Single-layer potential -(2π)⁻¹∫ ln|η - s| σ(s) ds and its gradient.
    fn potential(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for ((a, b), s) in self.panels.iter().zip(&self.density) {
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
            let n = [-t[1], t[0]];
            let d = [p[0] - a[0], p[1] - a[1]];
            let x = d[0] * t[0] + d[1] * t[1];
            let y = d[0] * n[0] + d[1] * n[1];
            let (iv, ig) = panel_log_integral(x, y, len);
            v += s * iv;
            g[0] += s * (ig[0] * t[0] + ig[1] * n[0]);
            g[1] += s * (ig[0] * t[1] + ig[1] * n[1]);
        }
        let c = -1.0 / (2.0 * PI);
        (c * v, [c * g[0], c * g[1]])
    }
}

/// Exterior potential W: harmonic outside the section, zero on its boundary,
/// W = (2π)⁻¹(ln c_log - ln ρ) + O(ρ⁻¹).
#[derive(Debug, Clone)]
pub struct LogPotential {
    pub section: CrossSection,
    pub c_log: f64,
    pub kind: PotentialKind,
    layer: Option<Layer>,
}

/// Panel count per polygon side for the boundary-integral solve.
pub const DEFAULT_PANELS_PER_SIDE: usize = 64;

pub fn log_potential(section: &CrossSection) -> Result<LogPotential> {
    log_potential_with(section, DEFAULT_PANELS_PER_SIDE)
}

/// As [`log_potential`], with a given number of cosine-graded panels per side.
pub fn log_potential_with(section: &CrossSection, panels_per_side: usize) -> Result<LogPotential> {
    section.check().map_err(Error::Geometry)?;
    match &section.shape {
        Shape::Disk { radius } => {
            Ok(LogPotential { section: section.clone(), c_log: *radius, kind: PotentialKind::AnalyticDisk, layer: None })
        }
        Shape::Polygon { vertices } => {
            let layer = solve_layer(vertices, panels_per_side.max(2))?;
            let c_log = (-2.0 * PI * layer.constant).exp();
            Ok(LogPotential { section: section.clone(), c_log, kind: PotentialKind::Numeric, layer: Some(layer) })
        }
    }
}

/// Collocation for V σ = C on the boundary with ∫σ = 1.
fn solve_layer(vertices: &[[f64; 2]], per_side: usize) -> Result<Layer> {
    let nv = vertices.len();
    let mut panels = Vec::with_capacity(nv * per_side);
    for i in 0..nv {
        let (a, b) = (vertices[i], vertices[(i + 1) % nv]);
        for k in 0..per_side {
            let s0 = 0.5 * (1.0 - (PI * k as f64 / per_side as f64).cos());
            let s1 = 0.5 * (1.0 - (PI * (k + 1) as f64 / per_side as f64).cos());
            let p = |s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            panels.push((p(s0), p(s1)));
        }
    }
    let n = panels.len();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    let mut rhs = DVector::zeros(n + 1);
    for i in 0..n {
        let (a, b) = panels[i];
        let c = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        for (k, (pa, pb)) in panels.iter().enumerate() {
            let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
            let t = [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len];
            let d = [c[0] - pa[0], c[1] - pa[1]];
            let x = d[0] * t[0] + d[1] * t[1];
            let y = if k == i { 0.0 } else { -d[0] * t[1] + d[1] * t[0] };
            m[(i, k)] = -panel_log_integral(x, y, len).0 / (2.0 * PI);
        }
        m[(i, n)] = -1.0;
        m[(n, i)] = (b[0] - a[0]).hypot(b[1] - a[1]);
    }
    rhs[n] = 1.0;
    let lu = m.lu();
    let sol = lu.solve(&rhs).ok_or_else(|| Error::Solver("single-layer system is singular".into()))?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("single-layer system is ill-conditioned".into()));
    }
    Ok(Layer { panels, density: sol.iter().take(n).copied().collect(), constant: sol[n] })
}

impl LogPotential {
    /// W and ∇W at an exterior point of the section frame.
    pub fn evaluate(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        match &self.layer {
            None => {
                let r = p[0].hypot(p[1]);
                let s = -1.0 / (2.0 * PI * r * r);
                ((self.c_log / r).ln() / (2.0 * PI), [s * p[0], s * p[1]])
            }
            Some(layer) => {
                let (v, g) = layer.potential(p);
                (v - layer.constant, g)
            }
        }
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        self.evaluate(p).0
    }

    /// Remainder W + (2π)⁻¹(ln ρ - ln c_log); identically zero for disks.
    pub fn remainder(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        if self.kind == PotentialKind::AnalyticDisk {
            return (0.0, [0.0; 2]);
        }
        let (v, g) = self.evaluate(p);
        let r2 = p[0] * p[0] + p[1] * p[1];
        (
            v + ((r2.sqrt()).ln() - self.c_log.ln()) / (2.0 * PI),
            [g[0] + p[0] / (2.0 * PI * r2), g[1] + p[1] / (2.0 * PI * r2)],
        )
    }
}

/// Flux of W through the section boundary, normal pointing into the section.
/// Analytic disks return exactly 1; numeric potentials integrate -∂_ρ W over
/// the circle of radius twice the circumradius.
pub fn flux_identity_check(pot: &LogPotential) -> f64 {
    if pot.kind == PotentialKind::AnalyticDisk {
        return 1.0;
    }
    let t = 2.0 * pot.section.shape.circumradius();
    let q = CompositeGauss::new(0.0, 2.0 * PI, 64, 8);
    q.integrate(|th| {
        let (c, s) = (th.cos(), th.sin());
        let (_, g) = pot.evaluate([t * c, t * s]);
        -(g[0] * c + g[1] * s) * t
    })
}

/// Lateral flux data γ ∂_ν W = g on ∂ω × (0, support), ν the outward normal
/// of the semi-cylinder, g given per boundary point and height.
pub struct LateralFlux<'a> {
    pub support: f64,
    pub density: &'a dyn Fn([f64; 2], f64) -> f64,
}

/// Growth constant C in W = C ζ + C₀ + O(e^{-δζ}) for the Neumann problem in
/// the semi-cylinder: C = -(γ|ω|)⁻¹ ∫∫ g, with C₀ = 0 by normalisation.
pub fn semicylinder_growth(section: &CrossSection, data: &LateralFlux<'_>) -> Result<(f64, f64)> {
    if !data.support.is_finite() || data.support < 0.0 {
        return Err(Error::InvalidInput("lateral flux data must have compact support".into()));
    }
    if data.support == 0.0 {
        return Ok((0.0, 0.0));
    }
    let zq = CompositeGauss::new(0.0, data.support, 16, 6);
    let total = boundary_integral(&section.shape, |p| zq.integrate(|z| (data.density)(p, z)));
    Ok((-total / (section.gamma * section.area()), 0.0))
}

/// Growth constant produced by the flux A_j ∂_ν W on ζ ∈ (0, 1). The published
/// form reads -A_j/(γ|ω|); the flux-balanced convention, which takes the
/// normal of the data as pointing out of the layer, gives +A_j/(γ|ω|).
pub fn junction_growth(section: &CrossSection, a_j: f64, conv: MatchingConvention) -> f64 {
    conv.growth_sign() * a_j / (section.gamma * section.area())
}

fn boundary_integral(shape: &Shape, f: impl Fn([f64; 2]) -> f64) -> f64 {
    match shape {
        Shape::Disk { radius } => {
            let q = CompositeGauss::new(0.0, 2.0 * PI, 32, 6);
            q.integrate(|th| radius * f([radius * th.cos(), radius * th.sin()]))
        }
        Shape::Polygon { vertices } => {
            let (x, w) = gauss_legendre(8);
            let n = vertices.len();
            (0..n)
                .map(|i| {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                    x.iter()
                        .zip(&w)
                        .map(|(xi, wi)| {
                            let s = 0.5 * (xi + 1.0);
                            0.5 * len * wi * f([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
                        })
                        .sum::<f64>()
                })
                .sum()
        }
    }
}

/// Truncation of the junction problem in stretched variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    /// Layer truncation radius.
    pub radius: f64,
    /// Semi-cylinder truncation height.
    pub height: f64,
    pub controls: MeshControls,
}

impl Truncation {
    /// R = Z = 32 a with the default stretched-variable mesh.
    pub fn default_for(a: f64) -> Self {
        Self { radius: 32.0 * a, height: 32.0 * a, controls: stretched_controls() }
    }
}

/// Mesh controls for the layer problem in stretched variables.
pub fn stretched_controls() -> MeshControls {
    MeshControls { core_r_frac: 1.0 / 8.0, slab_z_frac: 1.0 / 8.0, slab_r_max: 0.5, core_z_max: 0.5, level: 2, ..MeshControls::default() }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    pub radius: f64,
    pub height: f64,
    pub q_half: f64,
    /// |q(R, Z) - q(R/2, Z/2)|.
    pub indicator: f64,
    pub dofs: usize,
}

/// Junction data of one rod: q, capacity, decay rate and the solved field w.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryLayerData {
    pub q: f64,
    pub c_log: f64,
    pub delta: f64,
    pub gamma: f64,
    pub radius: f64,
    pub truncation: TruncationReport,
    #[serde(skip)]
    field: Option<Arc<TeeSolution>>,
}

/// First positive root of J₀' = -J₁.
const J1_FIRST_ROOT: f64 = 3.831_705_970_207_512;

fn solve_w(a: f64, gamma: f64, radius: f64, height: f64, controls: &MeshControls) -> Result<(f64, TeeSolution)> {
    let area = PI * a * a;
    let zero = |_: [f64; 2], _: bool| 0.0;
    let problem = TeeProblem {
        core_radius: a,
        outer_radius: radius,
        slab_height: 1.0,
        top: height,
        core_coeff: gamma,
        top_bc: EdgeBc::Flux(1.0 / area),
        outer_bc: EdgeBc::Dirichlet(-radius.ln() / (2.0 * PI)),
        source: &zero,
    };
    let sol = problem.solve(controls)?;
    let q = CompositeGauss::new(0.0, a, 16, 4);
    let mut top = 0.0;
    for (r, w) in q.points() {
        top += w * 2.0 * PI * r * sol.field.evaluate([r, height])?;
    }
    Ok((top / area - height / (gamma * area), sol))
}

/// Solves the junction problem for a disk section in axisymmetric form on
/// {ρ < R, 0 < ζ < 1} ∪ {ρ < a, 0 < ζ < Z}: w = -(2π)⁻¹ ln R at ρ = R,
/// γ ∂_ζ w = 1/|ω| at ζ = Z; q is the mean over the top minus Z/(γ|ω|).
pub fn junction_constant_q(section: &CrossSection, trunc: &Truncation, tol: Option<f64>) -> Result<BoundaryLayerData> {
    section.check().map_err(Error::Geometry)?;
    let Shape::Disk { radius: a } = section.shape else {
        return Err(Error::Unsupported("junction constant for non-disk sections needs a full 3D solve".into()));
    };
    let gamma = section.gamma;
    if !(trunc.radius > 4.0 * a && trunc.height > 4.0) {
        return Err(Error::InvalidInput("truncation radius must exceed 4a and height 4".into()));
    }
    let (q, sol) = solve_w(a, gamma, trunc.radius, trunc.height, &trunc.controls)?;
    let (q_half, _) = solve_w(a, gamma, 0.5 * trunc.radius, 0.5 * trunc.height, &trunc.controls)?;
    let indicator = (q - q_half).abs();
    if let Some(tol) = tol {
        if indicator > tol {
            return Err(Error::Truncation { indicator, tol });
        }
    }
    let dofs = sol.field.mesh().n_vertices();
    Ok(BoundaryLayerData {
        q,
        c_log: a,
        delta: J1_FIRST_ROOT / a,
        gamma,
        radius: a,
        truncation: TruncationReport { radius: trunc.radius, height: trunc.height, q_half, indicator, dofs },
        field: Some(Arc::new(sol)),
    })
}

impl BoundaryLayerData {
    fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    /// w(ρ, ζ) and (∂_ρ, ∂_ζ)w; beyond the truncation the far-field forms are
    /// used.
    pub fn w(&self, rho: f64, zeta: f64) -> Result<(f64, [f64; 2])> {
        let field = self.field.as_ref().ok_or_else(|| Error::InvalidInput("no layer field stored".into()))?;
        if rho < self.radius {
            if zeta >= field.top {
                let s = 1.0 / (self.gamma * self.area());
                return Ok((s * zeta + self.q, [0.0, s]));
            }
        } else if rho >= field.outer_radius {
            return Ok((-rho.ln() / (2.0 * PI), [-1.0 / (2.0 * PI * rho), 0.0]));
        }
        field.field.evaluate_with_gradient([rho, zeta])
    }

    /// Decaying part of w: w + (2π)⁻¹ ln ρ in the layer and
    /// w - ζ/(γ|ω|) - q in the semi-cylinder.
    pub fn w_tilde(&self, rho: f64, zeta: f64) -> Result<(f64, [f64; 2])> {
        let (v, g) = self.w(rho, zeta)?;
        if rho < self.radius {
            let s = 1.0 / (self.gamma * self.area());
            Ok((v - s * zeta - self.q, [g[0], g[1] - s]))
        } else {
            Ok((v + rho.ln() / (2.0 * PI), [g[0] + 1.0 / (2.0 * PI * rho), g[1]]))
        }
    }
}

/// The two commutator integrals whose sum certifies solvability of the
/// problem for the remainder of w: (layer part, semi-cylinder part).
/// `r_cut` is the cut-off radius R_j with the section inside the disk of that
/// radius.
pub fn compatibility_integrals(section: &CrossSection, r_cut: f64) -> Result<(f64, f64)> {
    if !(r_cut > section.shape.circumradius()) {
        return Err(Error::InvalidInput("cut-off radius must enclose the section".into()));
    }
    // X_Λ = 1 - χ(ρ/R), X_Q = 1 - χ(ζ), χ = 1 below 1 and 0 above 2.
    let cl = Cutoff::new(r_cut, 2.0 * r_cut);
    let cq = Cutoff::new(1.0, 2.0);
    let q = CompositeGauss::new(r_cut, 2.0 * r_cut, 64, 8);
    let layer = q.integrate(|rho| {
        let (x1, lap) = (-cl.d1(rho), -cl.laplacian_2d(rho));
        let w = -rho.ln();
        let w1 = -1.0 / rho;
        (2.0 * w1 * x1 + w * lap) * 2.0 * PI * rho
    }) / (2.0 * PI);
    let qz = CompositeGauss::new(1.0, 2.0, 64, 8);
    let cyl = qz.integrate(|z| 2.0 * (-cq.d1(z)) + z * (-cq.d2(z)));
    Ok((layer, cyl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn square(side: f64) -> CrossSection {
        let s = 0.5 * side;
        CrossSection {
            shape: Shape::Polygon { vertices: vec![[-s, -s], [s, -s], [s, s], [-s, s]] },
            gamma: 1.0,
            length: 1.0,
        }
    }

    /// Capacity of the square of side 2 from the Schwarz-Christoffel map:
    /// c = 2 Γ(1/4)² / (4 π^{3/2}), with Γ(1/4) from its integral form.
    fn square_oracle() -> f64 {
        // Γ(1/4) = ∫₀^∞ t^{-3/4} e^{-t} dt = 4 ∫₀^∞ e^{-u⁴} du.
        let g = 4.0 * CompositeGauss::new(0.0, 6.0, 200, 10).integrate(|u| (-u.powi(4)).exp());
        2.0 * g * g / (4.0 * PI.powf(1.5))
    }

    #[test]
    fn disk_potential_closed_form() {
        let p = log_potential(&CrossSection::disk(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(p.c_log, 1.0);
        assert_eq!(p.value([1.0, 0.0]), 0.0);
        assert_relative_eq!(p.value([3.0, 0.0]), -(3.0f64).ln() / (2.0 * PI), epsilon = 1e-15);
        assert_eq!(log_potential(&CrossSection::disk(2.0, 1.0, 1.0)).unwrap().c_log, 2.0);
        assert_eq!(flux_identity_check(&p), 1.0);
        assert_eq!(flux_identity_check(&log_potential(&CrossSection::disk(0.3, 1.0, 1.0)).unwrap()), 1.0);
        assert_eq!(p.remainder([2.0, 1.0]), (0.0, [0.0, 0.0]));
    }

    #[test]
    fn square_capacity_and_flux() {
        let oracle = square_oracle();
        assert!((oracle - 1.18034).abs() < 1e-4, "{oracle}");
        let p = log_potential(&square(2.0)).unwrap();
        assert!((p.c_log / oracle - 1.0).abs() < 1e-2, "{} vs {oracle}", p.c_log);
        assert!((flux_identity_check(&p) - 1.0).abs() < 1e-3);
        // Vanishes on the boundary, far-field normalisation.
        assert!(p.value([1.0, 0.3]).abs() < 1e-2);
        let far: [f64; 2] = [40.0, 25.0];
        let r = far[0].hypot(far[1]);
        assert!((p.value(far) - (p.c_log / r).ln() / (2.0 * PI)).abs() < 1e-3);
        let (rem, _) = p.remainder([20.0, 0.0]);
        assert!(rem.abs() < 1e-3);
    }

    #[test]
    fn capacity_scales_and_is_monotone() {
        let a = log_potential(&square(2.0)).unwrap().c_log;
        let b = log_potential(&square(3.0)).unwrap().c_log;
        assert!((b / a - 1.5).abs() < 1.5e-2);
        let d: Vec<f64> = [0.5, 1.0, 1.5].iter().map(|&r| log_potential(&CrossSection::disk(r, 1.0, 1.0)).unwrap().c_log).collect();
        assert!(d[0] < d[1] && d[1] < d[2]);
    }

    #[test]
    fn growth_constants() {
        let disk = CrossSection::disk(1.0, 1.0, 1.0);
        let a = -PI;
        let pot = log_potential(&disk).unwrap();
        // g = A ∂_ν W on ζ ∈ (0, 1) with ∂_ν W = 1/(2π) on the unit circle,
        // taken with the normal pointing into the section.
        let g = |p: [f64; 2], _z: f64| {
            let (_, grad) = pot.evaluate(p);
            let r = p[0].hypot(p[1]);
            a * -(grad[0] * p[0] + grad[1] * p[1]) / r
        };
        let (c, c0) = semicylinder_growth(&disk, &LateralFlux { support: 1.0, density: &g }).unwrap();
        assert_relative_eq!(c, 1.0, epsilon = 1e-12);
        assert_eq!(c0, 0.0);
        assert_relative_eq!(junction_growth(&disk, a, MatchingConvention::AsPublished), 1.0, epsilon = 1e-15);
        assert_relative_eq!(junction_growth(&disk, a, MatchingConvention::FluxBalanced), -1.0, epsilon = 1e-15);
        let zero = |_: [f64; 2], _: f64| 0.0;
        assert_eq!(semicylinder_growth(&disk, &LateralFlux { support: 1.0, density: &zero }).unwrap().0, 0.0);
        assert!(semicylinder_growth(&disk, &LateralFlux { support: f64::INFINITY, density: &zero }).is_err());
    }

    proptest! {
        #[test]
        fn growth_is_linear(al in -3.0..3.0f64, be in -3.0..3.0f64, s in 0.2..2.0f64) {
            let sec = CrossSection::disk(0.7, 1.3, 1.0);
            let g1 = |p: [f64; 2], z: f64| p[0] * p[0] + z;
            let g2 = |p: [f64; 2], z: f64| (1.0 - z / s) + p[1];
            let mix = |p: [f64; 2], z: f64| al * g1(p, z) + be * g2(p, z);
            let c = |g: &dyn Fn([f64; 2], f64) -> f64| semicylinder_growth(&sec, &LateralFlux { support: s, density: g }).unwrap().0;
            let lhs = c(&mix);
            let rhs = al * c(&g1) + be * c(&g2);
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn compatibility_sums_to_zero() {
        let (l, c) = compatibility_integrals(&CrossSection::disk(1.0, 1.0, 1.0), 2.0).unwrap();
        assert!((l + 1.0).abs() < 1e-6, "{l}");
        assert!((c - 1.0).abs() < 1e-6, "{c}");
        assert!((l + c).abs() < 1e-3);
    }

    #[test]
    fn junction_constant_for_disks() {
        let sec = CrossSection::disk(1.0, 1.0, 1.0);
        let d = junction_constant_q(&sec, &Truncation::default_for(1.0), None).unwrap();
        assert!(d.q.is_finite());
        assert!(d.truncation.indicator < 1e-4, "{:?}", d.truncation);
        assert_relative_eq!(d.delta, J1_FIRST_ROOT, epsilon = 1e-15);
        // Far-field forms of w.
        let (w, _) = d.w(20.0, 0.5).unwrap();
        assert!((w + (20.0f64).ln() / (2.0 * PI)).abs() < 1e-4);
        let (wt, _) = d.w_tilde(0.5, 20.0).unwrap();
        assert!(wt.abs() < 1e-4);
        assert!(junction_constant_q(&square(2.0), &Truncation::default_for(1.0), None).is_err());
    }

    #[test]
    fn junction_constant_pinned() {
        // Mesh-Richardson extrapolation of three nested levels at R = Z = 32.
        let sec = CrossSection::disk(1.0, 1.0, 1.0);
        let q: Vec<f64> = (0..3)
            .map(|l| {
                let mut t = Truncation::default_for(1.0);
                t.controls = t.controls.refined(l);
                junction_constant_q(&sec, &t, None).unwrap().q
            })
            .collect();
        let extrapolated = q[2] + (q[2] - q[1]) / 3.0;
        assert!((q[1] - q[2]).abs() < (q[0] - q[1]).abs() + 1e-12, "{q:?}");
        assert!((extrapolated - PINNED_Q).abs() < 1e-3, "q levels {q:?}, extrapolated {extrapolated}");
    }

    /// Self-oracle for a = 1, γ = 1, frozen after the first computation.
    const PINNED_Q: f64 = -0.207327;
}
