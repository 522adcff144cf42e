//! Green functions of the plate with the logarithmic singularity split off:
//! G_j = chi_j(r_j) (2 pi)^-1 ln(1/r_j) + g_j, with g_j a finite-element field.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{load_vector, DirichletSolver, FeField, NeumannSolver};
use crate::error::{Error, Result};
use crate::geometry::{dist, TriMesh};
use crate::quadrature::{gauss_legendre, CompositeGauss, Cutoff, TRI7};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenBc {
    NeumannMeanZero,
    Dirichlet,
}

#[derive(Debug, Clone)]
pub struct GreenData {
    pub regular_parts: Vec<FeField>,
    pub gmatrix: DMatrix<f64>,
    pub bc: GreenBc,
    pub anchors: Vec<[f64; 2]>,
    pub cutoffs: Vec<Cutoff>,
}

/// (2 pi)^-1 ln(1/r).
#[inline]
pub fn log_kernel(r: f64) -> f64 {
    -r.ln() / (2.0 * PI)
}

/// Source left over by the cut-off singular part: -Δ(chi L) = δ - c.
pub fn commutator_source(cut: &Cutoff, r: f64) -> f64 {
    if r <= cut.inner || r >= cut.outer {
        return 0.0;
    }
    log_kernel(r) * cut.laplacian_2d(r) - cut.d1(r) / (PI * r)
}

/// Integral of chi(r) (2 pi)^-1 ln(1/r) over the plane.
pub fn singular_part_integral(cut: &Cutoff) -> f64 {
    let a = cut.inner;
    let core = if a > 0.0 { 0.25 * a * a * (1.0 - 2.0 * a.ln()) } else { 0.0 };
    core + CompositeGauss::new(a, cut.outer, 32, 8).integrate(|r| cut.value(r) * r * (-r.ln()))
}

impl GreenData {
    pub fn n_anchors(&self) -> usize {
        self.anchors.len()
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        self.regular_parts[0].mesh()
    }

    /// Singular part of G_j and its gradient.
    pub fn singular_part(&self, j: usize, y: [f64; 2]) -> (f64, [f64; 2]) {
        let p = self.anchors[j];
        let d = [y[0] - p[0], y[1] - p[1]];
        let r = d[0].hypot(d[1]);
        let cut = &self.cutoffs[j];
        if r >= cut.outer {
            return (0.0, [0.0, 0.0]);
        }
        let chi = cut.value(r);
        let v = chi * log_kernel(r);
        let dr = cut.d1(r) * log_kernel(r) - chi / (2.0 * PI * r);
        (v, [dr * d[0] / r, dr * d[1] / r])
    }

    /// G_j(y) and its gradient.
    pub fn evaluate(&self, j: usize, y: [f64; 2]) -> Result<(f64, [f64; 2])> {
        let (s, gs) = self.singular_part(j, y);
        let (g, gg) = self.regular_parts[j].evaluate_with_gradient(y)?;
        Ok((s + g, [gs[0] + gg[0], gs[1] + gg[1]]))
    }

    /// Maximum of |G_jk - G_kj|.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.gmatrix.nrows();
        let mut d: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                d = d.max((self.gmatrix[(j, k)] - self.gmatrix[(k, j)]).abs());
            }
        }
        d
    }

    /// Integral of G_j f over the plate: mesh quadrature for the regular part
    /// and polar quadrature around the anchor for the singular part.
    pub fn integrate_against(&self, j: usize, f: &dyn Fn([f64; 2]) -> f64) -> f64 {
        let regular = self.regular_parts[j].integrate_against(f);
        let p = self.anchors[j];
        let cut = &self.cutoffs[j];
        let n_theta = 64;
        let mut polar = 0.0;
        // r = a t^2 on the core removes the logarithm's end-point singularity.
        let (x, w) = gauss_legendre(12);
        let a = cut.inner;
        let ring = |r: f64| -> f64 {
            (0..n_theta)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / n_theta as f64;
                    f([p[0] + r * th.cos(), p[1] + r * th.sin()])
                })
                .sum::<f64>()
                * (2.0 * PI / n_theta as f64)
        };
        for panel in 0..4 {
            let (t0, t1) = (panel as f64 / 4.0, (panel + 1) as f64 / 4.0);
            for (xi, wi) in x.iter().zip(&w) {
                let t = t0 + 0.5 * (xi + 1.0) * (t1 - t0);
                let r = a * t * t;
                if r == 0.0 {
                    continue;
                }
                polar += 0.5 * (t1 - t0) * wi * 2.0 * a * t * r * log_kernel(r) * ring(r);
            }
        }
        polar += CompositeGauss::new(a, cut.outer, 8, 8)
            .integrate(|r| cut.value(r) * log_kernel(r) * r * ring(r));
        regular + polar
    }

    /// Writes `gmatrix.csv` and one field file per anchor into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("gmatrix.csv"))?;
        let n = self.gmatrix.nrows();
        let mut header = vec!["j".to_string()];
        header.extend((1..=n).map(|k| format!("G_j{k}")));
        w.write_record(&header)?;
        for j in 0..n {
            let mut row = vec![(j + 1).to_string()];
            row.extend((0..n).map(|k| self.gmatrix[(j, k)].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        for (j, g) in self.regular_parts.iter().enumerate() {
            g.write_csv_file(&dir.join(format!("green_regular_{}.csv", j + 1)))?;
        }
        Ok(())
    }

    pub fn write_matrix<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for j in 0..self.gmatrix.nrows() {
            let row: Vec<String> = (0..self.gmatrix.ncols()).map(|k| format!("{:.10e}", self.gmatrix[(j, k)])).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Computes the Green functions for the anchors, with cut-off radius `r0`
/// (singular part cut off between r0/2 and r0).
pub fn green_functions(mesh: Arc<TriMesh>, anchors: &[[f64; 2]], r0: f64, bc: GreenBc) -> Result<GreenData> {
    if anchors.is_empty() {
        return Err(Error::InvalidInput("no anchors".into()));
    }
    if !(r0 > 0.0) {
        return Err(Error::InvalidInput("cut-off radius must be positive".into()));
    }
    for &p in anchors {
        if mesh.locate(p).is_none() {
            return Err(Error::OutsideMesh { x: p[0], y: p[1] });
        }
        if !mesh.vertices().iter().any(|&v| v == p) {
            log::warn!("anchor ({}, {}) is not a mesh vertex; evaluating by interpolation", p[0], p[1]);
        }
    }
    let cutoffs: Vec<Cutoff> = anchors.iter().map(|_| Cutoff::new(0.5 * r0, r0)).collect();
    let area = mesh.area();
    let mut regular_parts = Vec::with_capacity(anchors.len());
    match bc {
        GreenBc::NeumannMeanZero => {
            let solver = NeumannSolver::new(mesh.clone())?;
            for (&p, cut) in anchors.iter().zip(&cutoffs) {
                let src = |y: [f64; 2]| commutator_source(cut, dist(y, p)) - 1.0 / area;
                let b = load_vector(&mesh, &src);
                let scale = b.iter().map(|v| v.abs()).sum();
                let sol = solver.solve_load(b, scale)?;
                let shift = -singular_part_integral(cut) / area;
                regular_parts.push(sol.field.shifted(shift));
            }
        }
        GreenBc::Dirichlet => {
            let solver = DirichletSolver::new(mesh.clone())?;
            for (&p, cut) in anchors.iter().zip(&cutoffs) {
                let src = |y: [f64; 2]| commutator_source(cut, dist(y, p));
                regular_parts.push(solver.solve(&src)?);
            }
        }
    }
    let n = anchors.len();
    let mut gmatrix = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let mut v = regular_parts[j].evaluate(anchors[k])?;
            if j != k {
                let r = dist(anchors[j], anchors[k]);
                v += cutoffs[j].value(r) * log_kernel(r);
            }
            gmatrix[(j, k)] = v;
        }
    }
    Ok(GreenData { regular_parts, gmatrix, bc, anchors: anchors.to_vec(), cutoffs })
}

/// Value of the plate field at anchor j by two paths.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnchorValue {
    pub interpolated: f64,
    pub green_quadrature: f64,
}

/// `u` solves the plate problem with source `f` (mean-zero Neumann or
/// homogeneous Dirichlet, matching `green.bc`); returns u(P_j) by
/// interpolation and by integrating G_j against the (projected) source.
pub fn value_at_anchor(u: &FeField, green: &GreenData, f: &dyn Fn([f64; 2]) -> f64, j: usize) -> Result<AnchorValue> {
    let interpolated = u.evaluate(green.anchors[j])?;
    let mean = match green.bc {
        GreenBc::NeumannMeanZero => {
            let mesh = u.mesh();
            let mut s = 0.0;
            for t in 0..mesh.triangles().len() {
                let a = mesh.triangle_area(t);
                s += TRI7.iter().map(|(b, w)| a * w * f(mesh.point(t, *b))).sum::<f64>();
            }
            s / mesh.area()
        }
        GreenBc::Dirichlet => 0.0,
    };
    let green_quadrature = green.integrate_against(j, &|y| f(y) - mean);
    Ok(AnchorValue { interpolated, green_quadrature })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mesh_plate, PlateDomain};
    use crate::poisson2d::{solve_dirichlet, solve_neumann_mean_zero};

    fn radial_oracle(r: f64) -> f64 {
        log_kernel(r) + r * r / (4.0 * PI) - 3.0 / (8.0 * PI)
    }

    #[test]
    fn commutator_source_has_unit_mass() {
        let c = Cutoff::new(0.25, 0.5);
        let m = CompositeGauss::new(0.25, 0.5, 32, 8).integrate(|r| 2.0 * PI * r * commutator_source(&c, r));
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_integral_matches_quadrature() {
        let c = Cutoff::new(0.25, 0.5);
        let direct = CompositeGauss::new(0.0, 0.5, 400, 8).integrate(|r| 2.0 * PI * r * c.value(r) * log_kernel(r));
        assert!((singular_part_integral(&c) - direct).abs() < 1e-8);
    }

    #[test]
    fn center_anchor_neumann_and_dirichlet() {
        let d = PlateDomain::disk(1.0, vec![[0.0, 0.0]]);
        let mesh = Arc::new(mesh_plate(&d, 0.05, true).unwrap());
        let g = green_functions(mesh.clone(), &d.anchors, 0.5, GreenBc::NeumannMeanZero).unwrap();
        assert!((g.gmatrix[(0, 0)] + 3.0 / (8.0 * PI)).abs() < 2e-3, "{}", g.gmatrix[(0, 0)]);
        let (v, _) = g.evaluate(0, [0.5, 0.0]).unwrap();
        assert!((v - radial_oracle(0.5)).abs() < 3e-3);
        // Reconstructed Green function has zero mean.
        let total = g.regular_parts[0].integral() + singular_part_integral(&g.cutoffs[0]);
        assert!(total.abs() < 1e-10);
        let gd = green_functions(mesh, &d.anchors, 0.5, GreenBc::Dirichlet).unwrap();
        assert!(gd.gmatrix[(0, 0)].abs() < 2e-3);
    }

    #[test]
    fn anchor_value_paths_agree() {
        let d = PlateDomain::disk(1.0, vec![[0.0, 0.0]]);
        let mesh = Arc::new(mesh_plate(&d, 0.05, true).unwrap());
        let g = green_functions(mesh.clone(), &d.anchors, 0.5, GreenBc::NeumannMeanZero).unwrap();
        let f = |y: [f64; 2]| y[0] * y[0] + y[1] * y[1];
        let u = solve_neumann_mean_zero(mesh.clone(), &f, None).unwrap().field;
        let v = value_at_anchor(&u, &g, &f, 0).unwrap();
        assert!((v.green_quadrature + 1.0 / 24.0).abs() < 1e-3, "{v:?}");
        assert!((v.interpolated + 1.0 / 24.0).abs() < 1e-3, "{v:?}");
        let c = value_at_anchor(&FeField::zeros(mesh.clone()), &g, &|_| 1.0, 0).unwrap();
        assert!(c.green_quadrature.abs() < 1e-10);
        let odd = |y: [f64; 2]| y[0];
        let u = solve_neumann_mean_zero(mesh.clone(), &odd, None).unwrap().field;
        let v = value_at_anchor(&u, &g, &odd, 0).unwrap();
        assert!(v.green_quadrature.abs() < 1e-4 && v.interpolated.abs() < 1e-4);
        let gd = green_functions(mesh.clone(), &d.anchors, 0.5, GreenBc::Dirichlet).unwrap();
        let ud = solve_dirichlet(mesh, &|_| 1.0).unwrap();
        let v = value_at_anchor(&ud, &gd, &|_| 1.0, 0).unwrap();
        assert!((v.green_quadrature - 0.25).abs() < 2e-3 && (v.interpolated - 0.25).abs() < 2e-3);
    }
}
