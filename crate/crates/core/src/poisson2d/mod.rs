//! Piecewise-linear finite elements for planar Poisson problems with Neumann
//! (mean-zero) or Dirichlet boundary conditions, and Neumann/Dirichlet Green
//! functions with the logarithmic singularity subtracted.

mod green;

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

pub use green::{green_functions, value_at_anchor, AnchorValue, GreenBc, GreenData};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryTag, TriMesh};
use crate::quadrature::{gauss_legendre, TRI7};
use crate::sparse::{Coo, Factor};

/// Scalar field, linear on each triangle, stored by vertex values.
#[derive(Debug, Clone)]
pub struct FeField {
    mesh: Arc<TriMesh>,
    values: Vec<f64>,
}

impl FeField {
    pub fn new(mesh: Arc<TriMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} vertices",
                values.len(),
                mesh.n_vertices()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite field value".into()));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Arc<TriMesh>) -> Self {
        let n = mesh.n_vertices();
        Self { mesh, values: vec![0.0; n] }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: Arc<TriMesh>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = mesh.vertices().iter().map(|&p| f(p)).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn evaluate(&self, p: [f64; 2]) -> Result<f64> {
        let loc = self.mesh.locate(p).ok_or(Error::OutsideMesh { x: p[0], y: p[1] })?;
        let t = self.mesh.triangles()[loc.triangle];
        Ok((0..3).map(|k| loc.bary[k] * self.values[t[k]]).sum())
    }

    /// Value and (piecewise constant) gradient; points slightly outside the
    /// polygonal boundary are extrapolated from the nearest triangle.
    pub fn evaluate_with_gradient(&self, p: [f64; 2]) -> Result<(f64, [f64; 2])> {
        let loc = self
            .mesh
            .locate_or_nearest(p)
            .ok_or(Error::OutsideMesh { x: p[0], y: p[1] })?;
        let t = self.mesh.triangles()[loc.triangle];
        let g = self.mesh.basis_gradients(loc.triangle);
        let mut v = 0.0;
        let mut grad = [0.0; 2];
        for k in 0..3 {
            v += loc.bary[k] * self.values[t[k]];
            grad[0] += g[k][0] * self.values[t[k]];
            grad[1] += g[k][1] * self.values[t[k]];
        }
        Ok((v, grad))
    }

    /// Nodal gradients by area-weighted averaging of the element gradients.
    pub fn recovered_gradients(&self) -> Vec<[f64; 2]> {
        let n = self.mesh.n_vertices();
        let mut acc = vec![[0.0; 2]; n];
        let mut wsum = vec![0.0; n];
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let a = self.mesh.triangle_area(t);
            let g = self.mesh.basis_gradients(t);
            let mut gu = [0.0; 2];
            for k in 0..3 {
                gu[0] += g[k][0] * self.values[tri[k]];
                gu[1] += g[k][1] * self.values[tri[k]];
            }
            for &i in tri {
                acc[i][0] += a * gu[0];
                acc[i][1] += a * gu[1];
                wsum[i] += a;
            }
        }
        acc.iter().zip(&wsum).map(|(g, w)| [g[0] / w, g[1] / w]).collect()
    }

    /// Value and the linear interpolant of precomputed nodal gradients.
    pub fn evaluate_smooth(&self, p: [f64; 2], nodal: &[[f64; 2]]) -> Result<(f64, [f64; 2])> {
        let loc = self
            .mesh
            .locate_or_nearest(p)
            .ok_or(Error::OutsideMesh { x: p[0], y: p[1] })?;
        let t = self.mesh.triangles()[loc.triangle];
        let mut v = 0.0;
        let mut grad = [0.0; 2];
        for k in 0..3 {
            v += loc.bary[k] * self.values[t[k]];
            grad[0] += loc.bary[k] * nodal[t[k]][0];
            grad[1] += loc.bary[k] * nodal[t[k]][1];
        }
        Ok((v, grad))
    }

    pub fn integral(&self) -> f64 {
        lumped_mass(&self.mesh).iter().zip(&self.values).map(|(m, v)| m * v).sum()
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.mesh.area()
    }

    /// Integral of `field * weight` with the seven-point rule.
    pub fn integrate_against(&self, weight: impl Fn([f64; 2]) -> f64) -> f64 {
        let mut s = 0.0;
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let area = self.mesh.triangle_area(t);
            for (b, w) in TRI7.iter() {
                let u: f64 = (0..3).map(|k| b[k] * self.values[tri[k]]).sum();
                s += area * w * u * weight(self.mesh.point(t, *b));
            }
        }
        s
    }

    /// L2 distance to an exact function, seven-point quadrature.
    pub fn l2_error(&self, exact: impl Fn([f64; 2]) -> f64) -> f64 {
        let mut s = 0.0;
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let area = self.mesh.triangle_area(t);
            for (b, w) in TRI7.iter() {
                let u: f64 = (0..3).map(|k| b[k] * self.values[tri[k]]).sum();
                s += area * w * (u - exact(self.mesh.point(t, *b))).powi(2);
            }
        }
        s.sqrt()
    }

    /// H1 seminorm distance to an exact gradient.
    pub fn h1_seminorm_error(&self, exact_grad: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
        let mut s = 0.0;
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let area = self.mesh.triangle_area(t);
            let g = self.mesh.basis_gradients(t);
            let mut gu = [0.0; 2];
            for k in 0..3 {
                gu[0] += g[k][0] * self.values[tri[k]];
                gu[1] += g[k][1] * self.values[tri[k]];
            }
            for (b, w) in TRI7.iter() {
                let e = exact_grad(self.mesh.point(t, *b));
                s += area * w * ((gu[0] - e[0]).powi(2) + (gu[1] - e[1]).powi(2));
            }
        }
        s.sqrt()
    }

    pub fn scaled_add(&self, s: f64, other: &FeField) -> Result<FeField> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh) {
            return Err(Error::InvalidInput("fields live on different meshes".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Ok(FeField { mesh: self.mesh.clone(), values })
    }

    pub fn shifted(&self, c: f64) -> FeField {
        FeField { mesh: self.mesh.clone(), values: self.values.iter().map(|v| v + c).collect() }
    }

    /// CSV with columns vertex, x, y, value.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["vertex", "x", "y", "value"])?;
        for (i, (p, v)) in self.mesh.vertices().iter().zip(&self.values).enumerate() {
            wr.write_record([i.to_string(), p[0].to_string(), p[1].to_string(), v.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Stiffness matrix of the Laplacian.
pub fn stiffness(mesh: &TriMesh) -> Coo {
    let mut a = Coo::new(mesh.n_vertices());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        let g = mesh.basis_gradients(t);
        for i in 0..3 {
            for j in 0..3 {
                a.add(tri[i], tri[j], area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
            }
        }
    }
    a
}

/// Integrals of the basis functions.
pub fn lumped_mass(mesh: &TriMesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.n_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.triangle_area(t) / 3.0;
        for &v in tri {
            m[v] += a;
        }
    }
    m
}

/// Load vector of a source, seven-point quadrature.
pub fn load_vector(mesh: &TriMesh, f: &dyn Fn([f64; 2]) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.n_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        for (bary, w) in TRI7.iter() {
            let fv = f(mesh.point(t, *bary)) * area * w;
            for k in 0..3 {
                b[tri[k]] += fv * bary[k];
            }
        }
    }
    b
}

/// Boundary load of a flux density given per point and tag.
pub fn boundary_load(mesh: &TriMesh, flux: &dyn Fn([f64; 2], BoundaryTag) -> f64) -> Vec<f64> {
    let (x, w) = gauss_legendre(3);
    let mut b = vec![0.0; mesh.n_vertices()];
    for &([i, j], tag) in mesh.boundary_edges() {
        let (p, q) = (mesh.vertices()[i], mesh.vertices()[j]);
        let len = crate::geometry::dist(p, q);
        for (xi, wi) in x.iter().zip(&w) {
            let s = 0.5 * (xi + 1.0);
            let g = flux([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])], tag) * 0.5 * wi * len;
            b[i] += g * (1.0 - s);
            b[j] += g * s;
        }
    }
    b
}

/// Factorized mean-zero Neumann problem: the stiffness matrix with the
/// first vertex pinned, applied to compatible loads, then shifted to zero
/// mean.
pub struct NeumannSolver {
    mesh: Arc<TriMesh>,
    mass: Vec<f64>,
    area: f64,
    factor: Factor,
}

/// Result of a mean-zero Neumann solve.
#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub field: FeField,
    /// Constant removed from the source to make the problem compatible.
    pub subtracted_mean: f64,
    /// Relative compatibility defect of the data before projection.
    pub compatibility_defect: f64,
}

impl NeumannSolver {
    pub fn new(mesh: Arc<TriMesh>) -> Result<Self> {
        let n = mesh.n_vertices();
        let a = stiffness(&mesh);
        let mut reduced = Coo::new(n - 1);
        for &(i, j, v) in &a.entries {
            if i != 0 && j != 0 {
                reduced.add(i - 1, j - 1, v);
            }
        }
        let factor = Factor::cholesky(&reduced)?;
        let mass = lumped_mass(&mesh);
        let area = mesh.area();
        Ok(Self { mesh, mass, area, factor })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Solves with an assembled right-hand side, projecting it onto the
    /// compatible subspace first.
    pub fn solve_load(&self, mut b: Vec<f64>, scale: f64) -> Result<NeumannSolution> {
        let n = self.mesh.n_vertices();
        let total: f64 = b.iter().sum();
        let subtracted_mean = total / self.area;
        for (bi, m) in b.iter_mut().zip(&self.mass) {
            *bi -= subtracted_mean * m;
        }
        let defect = total.abs() / scale.max(1e-300);
        if b.iter().all(|v| v.abs() <= 1e-15 * scale.max(1e-300)) {
            return Ok(NeumannSolution {
                field: FeField::zeros(self.mesh.clone()),
                subtracted_mean,
                compatibility_defect: defect,
            });
        }
        let x = self.factor.solve(&b[1..])?;
        let mut values = Vec::with_capacity(n);
        values.push(0.0);
        values.extend_from_slice(&x);
        let mean: f64 = values.iter().zip(&self.mass).map(|(v, m)| v * m).sum::<f64>() / self.area;
        values.iter_mut().for_each(|v| *v -= mean);
        Ok(NeumannSolution { field: FeField::new(self.mesh.clone(), values)?, subtracted_mean, compatibility_defect: defect })
    }

    pub fn solve(
        &self,
        source: &dyn Fn([f64; 2]) -> f64,
        flux: Option<&dyn Fn([f64; 2], BoundaryTag) -> f64>,
    ) -> Result<NeumannSolution> {
        let mut b = load_vector(&self.mesh, source);
        let mut scale: f64 = b.iter().map(|v| v.abs()).sum();
        if let Some(g) = flux {
            let bf = boundary_load(&self.mesh, g);
            scale += bf.iter().map(|v| v.abs()).sum::<f64>();
            for (bi, fi) in b.iter_mut().zip(bf) {
                *bi += fi;
            }
        }
        self.solve_load(b, scale)
    }
}

/// Solves -Δu = f with the given Neumann flux and zero mean.
pub fn solve_neumann_mean_zero(
    mesh: Arc<TriMesh>,
    source: &dyn Fn([f64; 2]) -> f64,
    flux: Option<&dyn Fn([f64; 2], BoundaryTag) -> f64>,
) -> Result<NeumannSolution> {
    NeumannSolver::new(mesh)?.solve(source, flux)
}

/// Factorized homogeneous Dirichlet problem on all boundary vertices.
pub struct DirichletSolver {
    mesh: Arc<TriMesh>,
    map: Vec<usize>,
    factor: Option<Factor>,
}

impl DirichletSolver {
    pub fn new(mesh: Arc<TriMesh>) -> Result<Self> {
        let n = mesh.n_vertices();
        let fixed = mesh.boundary_vertices(|_| true);
        let mut map = vec![0usize; n];
        let mut is_fixed = vec![false; n];
        for &v in &fixed {
            is_fixed[v] = true;
        }
        let mut free = 0;
        for i in 0..n {
            if is_fixed[i] {
                map[i] = usize::MAX;
            } else {
                map[i] = free;
                free += 1;
            }
        }
        let mut a = Coo::new(free);
        for (i, j, v) in stiffness(&mesh).entries {
            if map[i] != usize::MAX && map[j] != usize::MAX {
                a.add(map[i], map[j], v);
            }
        }
        let factor = if free > 0 { Some(Factor::cholesky(&a)?) } else { None };
        Ok(Self { mesh, map, factor })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn solve_load(&self, b: &[f64]) -> Result<FeField> {
        let mut values = vec![0.0; self.mesh.n_vertices()];
        if let Some(f) = &self.factor {
            let rhs: Vec<f64> = (0..b.len()).filter(|&i| self.map[i] != usize::MAX).map(|i| b[i]).collect();
            if rhs.iter().any(|v| *v != 0.0) {
                let x = f.solve(&rhs)?;
                for i in 0..values.len() {
                    if self.map[i] != usize::MAX {
                        values[i] = x[self.map[i]];
                    }
                }
            }
        }
        FeField::new(self.mesh.clone(), values)
    }

    pub fn solve(&self, source: &dyn Fn([f64; 2]) -> f64) -> Result<FeField> {
        self.solve_load(&load_vector(&self.mesh, source))
    }
}

/// Solves -Δu = f with u = 0 on the whole boundary.
pub fn solve_dirichlet(mesh: Arc<TriMesh>, source: &dyn Fn([f64; 2]) -> f64) -> Result<FeField> {
    DirichletSolver::new(mesh)?.solve(source)
}

/// Solves -Δu = f with u = g on the whole boundary.
pub fn solve_dirichlet_data(
    mesh: Arc<TriMesh>,
    source: &dyn Fn([f64; 2]) -> f64,
    data: &dyn Fn([f64; 2]) -> f64,
) -> Result<FeField> {
    let fixed: Vec<(usize, f64)> = mesh
        .boundary_vertices(|_| true)
        .into_iter()
        .map(|v| (v, data(mesh.vertices()[v])))
        .collect();
    let a = stiffness(&mesh);
    let b = load_vector(&mesh, source);
    let x = crate::sparse::solve_spd_with_fixed(&a, &b, &fixed)?;
    FeField::new(mesh, x)
}
