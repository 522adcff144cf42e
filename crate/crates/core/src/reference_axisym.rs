//! Axisymmetric finite elements in (r, z) on tensor grids restricted to a
//! T-shaped region: a slab 0 < z < H over 0 < r < R joined to a core cylinder
//! 0 < r < a, 0 < z < Z. The same machinery solves the full junction problem
//! for one rod under a circular plate and the junction layer problem in
//! stretched variables.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Alpha, JunctionConfig, LateralBc, Shape};
use crate::quadrature::{gauss_legendre, TRI7};
use crate::sparse::{solve_spd_with_fixed, Coo};

/// Step lengths over [0, len] graded away from the start: `rings` steps with
/// ratio `1/ratio`, then growth `growth` until `max`, rescaled to sum to `len`.
pub fn graded_steps(len: f64, max: f64, ratio: f64, rings: usize, growth: f64) -> Vec<f64> {
    assert!(len > 0.0 && max > 0.0 && ratio > 0.0 && ratio < 1.0 && growth >= 1.0);
    let max = max.min(len);
    let mut s = max * ratio.powi(rings as i32);
    let mut steps = Vec::new();
    let mut total = 0.0;
    let mut k = 0;
    while total < len * (1.0 - 1e-12) {
        steps.push(s);
        total += s;
        let g = if k < rings { 1.0 / ratio } else { growth };
        s = (s * g).min(max);
        k += 1;
    }
    // Merge an undersized tail into its neighbour, then rescale.
    if steps.len() > 1 && total - len > 0.5 * steps[steps.len() - 1] {
        let last = steps.pop().unwrap();
        total -= last;
    }
    steps.iter().map(|v| v * len / total).collect()
}

fn nodes_from(start: f64, steps: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v = vec![start];
    for s in steps {
        let x = v[v.len() - 1] + s;
        v.push(x);
    }
    v
}

/// Node coordinates on [a, b], graded toward `a` (`toward_start`) or `b`.
pub fn graded_nodes(a: f64, b: f64, max: f64, ratio: f64, rings: usize, growth: f64, toward_start: bool) -> Vec<f64> {
    let steps = graded_steps(b - a, max, ratio, rings, growth);
    let mut v = if toward_start {
        nodes_from(a, steps.into_iter())
    } else {
        nodes_from(a, steps.into_iter().rev())
    };
    let n = v.len();
    v[0] = a;
    v[n - 1] = b;
    v
}

fn subdivide(v: &[f64], level: u32) -> Vec<f64> {
    let m = 1usize << level;
    let mut out = Vec::with_capacity((v.len() - 1) * m + 1);
    for w in v.windows(2) {
        for k in 0..m {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / m as f64);
        }
    }
    out.push(v[v.len() - 1]);
    out
}

/// Tensor grid with inactive cells removed, split into triangles. Vertex
/// coordinates are (r, z).
#[derive(Debug, Clone)]
pub struct AxisymMesh {
    r: Vec<f64>,
    z: Vec<f64>,
    node: Vec<usize>,
    cell_active: Vec<bool>,
    cell_core: Vec<bool>,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    tri_core: Vec<bool>,
}

const NONE: usize = usize::MAX;

impl AxisymMesh {
    /// Keeps cells whose midpoint satisfies `active`; `core` marks the
    /// coefficient region.
    pub fn tensor(
        r: Vec<f64>,
        z: Vec<f64>,
        active: impl Fn(f64, f64) -> bool,
        core: impl Fn(f64, f64) -> bool,
    ) -> Result<Self> {
        if r.len() < 2 || z.len() < 2 || r.windows(2).any(|w| w[1] <= w[0]) || z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Mesh("grid coordinates must be strictly increasing".into()));
        }
        if r[0] < 0.0 {
            return Err(Error::Mesh("negative radius".into()));
        }
        let (nr, nz) = (r.len(), z.len());
        let mut cell_active = vec![false; (nr - 1) * (nz - 1)];
        let mut cell_core = vec![false; (nr - 1) * (nz - 1)];
        let mut node = vec![NONE; nr * nz];
        let mut vertices = Vec::new();
        for k in 0..nz - 1 {
            for i in 0..nr - 1 {
                let (rm, zm) = (0.5 * (r[i] + r[i + 1]), 0.5 * (z[k] + z[k + 1]));
                if active(rm, zm) {
                    let c = k * (nr - 1) + i;
                    cell_active[c] = true;
                    cell_core[c] = core(rm, zm);
                    for (ii, kk) in [(i, k), (i + 1, k), (i + 1, k + 1), (i, k + 1)] {
                        node[kk * nr + ii] = 0;
                    }
                }
            }
        }
        for k in 0..nz {
            for i in 0..nr {
                if node[k * nr + i] == 0 {
                    node[k * nr + i] = vertices.len();
                    vertices.push([r[i], z[k]]);
                }
            }
        }
        let mut triangles = Vec::new();
        let mut tri_core = Vec::new();
        for k in 0..nz - 1 {
            for i in 0..nr - 1 {
                let c = k * (nr - 1) + i;
                if !cell_active[c] {
                    continue;
                }
                let a = node[k * nr + i];
                let b = node[k * nr + i + 1];
                let cc = node[(k + 1) * nr + i + 1];
                let d = node[(k + 1) * nr + i];
                triangles.push([a, b, cc]);
                triangles.push([a, cc, d]);
                tri_core.push(cell_core[c]);
                tri_core.push(cell_core[c]);
            }
        }
        if triangles.is_empty() {
            return Err(Error::Mesh("no active cells".into()));
        }
        Ok(Self { r, z, node, cell_active, cell_core, vertices, triangles, tri_core })
    }

    /// T-shaped region: slab r < outer, z < slab; core r < core, z < top.
    /// `core_r` and `slab_z` must be grid lines.
    pub fn tee(r: Vec<f64>, z: Vec<f64>, core_r: f64, slab_z: f64) -> Result<Self> {
        let on = |v: &[f64], x: f64| v.iter().any(|&y| (y - x).abs() <= 1e-12 * x.abs().max(1.0));
        if !on(&r, core_r) || !on(&z, slab_z) {
            return Err(Error::Mesh("core radius and slab height must be grid lines".into()));
        }
        Self::tensor(r, z, |rm, zm| rm < core_r || zm < slab_z, |rm, _| rm < core_r)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn z_nodes(&self) -> &[f64] {
        &self.z
    }

    /// Whether triangle `t` lies in the core region.
    pub fn is_core(&self, t: usize) -> bool {
        self.tri_core[t]
    }

    pub fn corners(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn basis_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [p0, p1, p2] = self.corners(t);
        let two_a = 2.0 * self.area(t);
        [
            [(p1[1] - p2[1]) / two_a, (p2[0] - p1[0]) / two_a],
            [(p2[1] - p0[1]) / two_a, (p0[0] - p2[0]) / two_a],
            [(p0[1] - p1[1]) / two_a, (p1[0] - p0[0]) / two_a],
        ]
    }

    /// Seven-point rule on triangle `t` with the 2πr volume factor:
    /// (point, barycentric coordinates, weight).
    pub fn quadrature(&self, t: usize) -> impl Iterator<Item = ([f64; 2], [f64; 3], f64)> + '_ {
        let [a, b, c] = self.corners(t);
        let area = self.area(t);
        TRI7.iter().map(move |(bary, w)| {
            let p = [
                bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
                bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
            ];
            (p, *bary, area * w * 2.0 * PI * p[0])
        })
    }

    /// Volume of the solid of revolution of the active region.
    pub fn volume(&self, filter: impl Fn(usize) -> bool) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| filter(t))
            .map(|t| 2.0 * PI * self.area(t) * (self.corners(t).iter().map(|p| p[0]).sum::<f64>() / 3.0))
            .sum()
    }

    /// Boundary edges of the active region (edges of active cells whose
    /// neighbour across the edge is inactive or missing).
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let (nr, nz) = (self.r.len(), self.z.len());
        let active = |i: isize, k: isize| -> bool {
            i >= 0 && k >= 0 && (i as usize) < nr - 1 && (k as usize) < nz - 1 && self.cell_active[k as usize * (nr - 1) + i as usize]
        };
        let mut e = Vec::new();
        for k in 0..nz - 1 {
            for i in 0..nr - 1 {
                if !active(i as isize, k as isize) {
                    continue;
                }
                let n = |ii: usize, kk: usize| self.node[kk * nr + ii];
                let (ii, kk) = (i as isize, k as isize);
                if !active(ii, kk - 1) {
                    e.push([n(i, k), n(i + 1, k)]);
                }
                if !active(ii + 1, kk) {
                    e.push([n(i + 1, k), n(i + 1, k + 1)]);
                }
                if !active(ii, kk + 1) {
                    e.push([n(i + 1, k + 1), n(i, k + 1)]);
                }
                if !active(ii - 1, kk) {
                    e.push([n(i, k + 1), n(i, k)]);
                }
            }
        }
        e
    }

    /// Boundary vertices on edges selected by `pred(midpoint)`.
    pub fn boundary_nodes(&self, pred: impl Fn([f64; 2]) -> bool) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges()
            .into_iter()
            .filter(|e| pred(self.midpoint(*e)))
            .flat_map(|e| e.into_iter())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn midpoint(&self, e: [usize; 2]) -> [f64; 2] {
        let (a, b) = (self.vertices[e[0]], self.vertices[e[1]]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    fn cell_candidates(v: &[f64], x: f64) -> Vec<usize> {
        let n = v.len();
        let tol = 1e-12 * (v[n - 1] - v[0]);
        if x < v[0] - tol || x > v[n - 1] + tol {
            return Vec::new();
        }
        let i = v.partition_point(|&y| y <= x).clamp(1, n - 1) - 1;
        let mut c = vec![i];
        if i > 0 && (x - v[i]).abs() <= tol {
            c.push(i - 1);
        }
        if i + 2 < n && (x - v[i + 1]).abs() <= tol {
            c.push(i + 1);
        }
        c
    }

    /// Number of active cells that are in the core.
    pub fn n_core_cells(&self) -> usize {
        self.cell_core.iter().zip(&self.cell_active).filter(|(c, a)| **c && **a).count()
    }
}

/// Piecewise-linear field on an [`AxisymMesh`].
#[derive(Debug, Clone)]
pub struct AxisymField {
    mesh: Arc<AxisymMesh>,
    values: Vec<f64>,
    active_prefix: Arc<Vec<usize>>,
}

impl AxisymField {
    pub fn new(mesh: Arc<AxisymMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::InvalidInput("value count does not match the mesh".into()));
        }
        let mut prefix = Vec::with_capacity(mesh.cell_active.len() + 1);
        let mut acc = 0;
        for a in &mesh.cell_active {
            prefix.push(acc);
            acc += *a as usize;
        }
        Ok(Self { mesh, values, active_prefix: Arc::new(prefix) })
    }

    pub fn mesh(&self) -> &Arc<AxisymMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Gradient (∂_r, ∂_z) on triangle `t`.
    pub fn gradient(&self, t: usize) -> [f64; 2] {
        let g = self.mesh.basis_gradients(t);
        let tri = self.mesh.triangles[t];
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += g[k][0] * self.values[tri[k]];
            out[1] += g[k][1] * self.values[tri[k]];
        }
        out
    }

    pub fn value_at(&self, t: usize, bary: [f64; 3]) -> f64 {
        let tri = self.mesh.triangles[t];
        (0..3).map(|k| bary[k] * self.values[tri[k]]).sum()
    }

    fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let m = &self.mesh;
        let nr = m.r.len();
        for k in AxisymMesh::cell_candidates(&m.z, p[1]) {
            for i in AxisymMesh::cell_candidates(&m.r, p[0]) {
                let c = k * (nr - 1) + i;
                if !m.cell_active[c] {
                    continue;
                }
                let s = ((p[0] - m.r[i]) / (m.r[i + 1] - m.r[i])).clamp(0.0, 1.0);
                let t = ((p[1] - m.z[k]) / (m.z[k + 1] - m.z[k])).clamp(0.0, 1.0);
                let idx = self.active_prefix[c];
                return Some(if t <= s { (2 * idx, [1.0 - s, s - t, t]) } else { (2 * idx + 1, [1.0 - t, s, t - s]) });
            }
        }
        None
    }

    pub fn evaluate(&self, p: [f64; 2]) -> Result<f64> {
        let (t, b) = self.locate(p).ok_or(Error::OutsideMesh { x: p[0], y: p[1] })?;
        Ok(self.value_at(t, b))
    }

    pub fn evaluate_with_gradient(&self, p: [f64; 2]) -> Result<(f64, [f64; 2])> {
        let (t, b) = self.locate(p).ok_or(Error::OutsideMesh { x: p[0], y: p[1] })?;
        Ok((self.value_at(t, b), self.gradient(t)))
    }

    /// Weighted Dirichlet energy ∫ k |∇u|² dV over triangles passing `filter`.
    pub fn energy(&self, coeff: &[f64], filter: impl Fn(usize) -> bool) -> f64 {
        (0..self.mesh.triangles.len())
            .filter(|&t| filter(t))
            .map(|t| {
                let g = self.gradient(t);
                let rbar = self.mesh.corners(t).iter().map(|p| p[0]).sum::<f64>() / 3.0;
                coeff[t] * (g[0] * g[0] + g[1] * g[1]) * 2.0 * PI * rbar * self.mesh.area(t)
            })
            .sum()
    }

    /// ∫ u dV over triangles passing `filter`.
    pub fn integral(&self, filter: impl Fn(usize) -> bool) -> f64 {
        (0..self.mesh.triangles.len())
            .filter(|&t| filter(t))
            .map(|t| self.mesh.quadrature(t).map(|(_, b, w)| w * self.value_at(t, b)).sum::<f64>())
            .sum()
    }

    /// L2 distance (with the 2πr factor) to `exact`.
    pub fn l2_error(&self, exact: impl Fn([f64; 2]) -> f64) -> f64 {
        (0..self.mesh.triangles.len())
            .map(|t| self.mesh.quadrature(t).map(|(p, b, w)| w * (self.value_at(t, b) - exact(p)).powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["vertex", "r", "z", "value"])?;
        for (i, (p, v)) in self.mesh.vertices.iter().zip(&self.values).enumerate() {
            wr.write_record([i.to_string(), p[0].to_string(), p[1].to_string(), v.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Boundary condition on a selected part of the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeBc {
    Dirichlet(f64),
    /// Prescribed conormal derivative k ∂_ν u along the outward normal.
    Flux(f64),
}

/// Linear system pieces for -div(k ∇u) = f with 2πr weighting.
pub struct Assembled {
    pub stiffness: Coo,
    pub load: Vec<f64>,
}

/// Assembles stiffness and load; `coeff` per triangle.
pub fn assemble(mesh: &AxisymMesh, coeff: &[f64], source: &dyn Fn([f64; 2], bool) -> f64) -> Assembled {
    let n = mesh.n_vertices();
    let mut k = Coo::new(n);
    let mut b = vec![0.0; n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let g = mesh.basis_gradients(t);
        let rbar = mesh.corners(t).iter().map(|p| p[0]).sum::<f64>() / 3.0;
        let w = coeff[t] * 2.0 * PI * rbar * mesh.area(t);
        for i in 0..3 {
            for j in 0..3 {
                k.add(tri[i], tri[j], w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
            }
        }
        let core = mesh.tri_core[t];
        for (p, bary, wq) in mesh.quadrature(t) {
            let f = source(p, core);
            if f != 0.0 {
                for i in 0..3 {
                    b[tri[i]] += wq * f * bary[i];
                }
            }
        }
    }
    Assembled { stiffness: k, load: b }
}

/// Adds ∫ g φ_i 2πr ds over the given boundary edges.
pub fn add_flux(mesh: &AxisymMesh, load: &mut [f64], edges: &[[usize; 2]], g: &dyn Fn([f64; 2]) -> f64) {
    let (x, w) = gauss_legendre(3);
    for e in edges {
        let (a, b) = (mesh.vertices[e[0]], mesh.vertices[e[1]]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        for (xi, wi) in x.iter().zip(&w) {
            let s = 0.5 * (xi + 1.0);
            let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let v = 0.5 * wi * len * 2.0 * PI * p[0] * g(p);
            load[e[0]] += v * (1.0 - s);
            load[e[1]] += v * s;
        }
    }
}

/// Mesh controls for the T-domain: spacing caps and corner grading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshControls {
    /// Maximal r-step inside the core, as a fraction of the core radius.
    pub core_r_frac: f64,
    /// Maximal z-step in the slab, as a fraction of the slab height.
    pub slab_z_frac: f64,
    /// Maximal r-step in the slab outside the core.
    pub slab_r_max: f64,
    /// Maximal z-step in the core above the slab.
    pub core_z_max: f64,
    /// Grading ratio toward the re-entrant edge.
    pub ratio: f64,
    /// Number of geometric rings with that ratio.
    pub rings: usize,
    /// Step growth beyond the graded rings.
    pub growth: f64,
    /// Each grid interval is split into 2^level equal parts (nested refinement).
    #[serde(default)]
    pub level: u32,
}

impl Default for MeshControls {
    fn default() -> Self {
        Self { core_r_frac: 1.0 / 8.0, slab_z_frac: 1.0 / 8.0, slab_r_max: 0.004, core_z_max: 0.005, ratio: 0.6, rings: 6, growth: 1.2, level: 0 }
    }
}

impl MeshControls {
    /// The same grid with every interval split into 2^`level` parts.
    pub fn refined(&self, level: u32) -> Self {
        Self { level: self.level + level, ..*self }
    }

    /// Grid for a T-domain with core radius `a`, outer radius `outer`, slab
    /// height `slab` and core height `top`, graded toward (a, slab).
    pub fn tee_grid(&self, a: f64, outer: f64, slab: f64, top: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if !(a > 0.0 && outer > a && slab > 0.0 && top > slab) {
            return Err(Error::Geometry(format!(
                "T-domain needs 0 < a < R and 0 < H < Z (a={a}, R={outer}, H={slab}, Z={top})"
            )));
        }
        let fine = (self.core_r_frac * a).min(self.slab_z_frac * slab);
        let mut r = graded_nodes(0.0, a, self.core_r_frac * a, self.ratio, self.rings, self.growth, false);
        let outer_r = graded_nodes(a, outer, self.slab_r_max.max(fine), self.ratio, self.rings, self.growth, true);
        r.extend_from_slice(&outer_r[1..]);
        let mut z = graded_nodes(0.0, slab, self.slab_z_frac * slab, self.ratio, self.rings, self.growth, false);
        let up = graded_nodes(slab, top, self.core_z_max.max(fine), self.ratio, self.rings, self.growth, true);
        z.extend_from_slice(&up[1..]);
        Ok((subdivide(&r, self.level), subdivide(&z, self.level)))
    }
}

/// Solution of the single-form problem on a T-domain.
#[derive(Debug, Clone)]
pub struct TeeSolution {
    pub field: AxisymField,
    pub coeff: Vec<f64>,
    pub core_radius: f64,
    pub slab_height: f64,
    pub outer_radius: f64,
    pub top: f64,
    /// ‖Ku - b‖/‖b‖ on free rows.
    pub residual: f64,
    /// Sum of reactions at Dirichlet nodes plus total load (flux balance).
    pub flux_defect: f64,
}

/// T-domain problem: -div(k∇u) = f with k = `core_coeff` in the core and 1
/// elsewhere, conditions at the top of the core and the outer slab side,
/// natural conditions elsewhere.
pub struct TeeProblem<'a> {
    pub core_radius: f64,
    pub outer_radius: f64,
    pub slab_height: f64,
    pub top: f64,
    pub core_coeff: f64,
    pub top_bc: EdgeBc,
    pub outer_bc: EdgeBc,
    pub source: &'a (dyn Fn([f64; 2], bool) -> f64 + Sync),
}

impl TeeProblem<'_> {
    pub fn solve(&self, controls: &MeshControls) -> Result<TeeSolution> {
        let (r, z) = controls.tee_grid(self.core_radius, self.outer_radius, self.slab_height, self.top)?;
        let mesh = Arc::new(AxisymMesh::tee(r, z, self.core_radius, self.slab_height)?);
        let coeff: Vec<f64> = (0..mesh.triangles.len())
            .map(|t| if mesh.is_core(t) { self.core_coeff } else { 1.0 })
            .collect();
        let Assembled { stiffness, mut load } = assemble(&mesh, &coeff, self.source);
        let tol = 1e-12 * self.top.max(self.outer_radius);
        let (top, outer) = (self.top, self.outer_radius);
        let top_edges: Vec<[usize; 2]> =
            mesh.boundary_edges().into_iter().filter(|e| (mesh.midpoint(*e)[1] - top).abs() < tol).collect();
        let outer_edges: Vec<[usize; 2]> =
            mesh.boundary_edges().into_iter().filter(|e| (mesh.midpoint(*e)[0] - outer).abs() < tol).collect();
        let mut fixed = Vec::new();
        for (edges, bc) in [(&top_edges, self.top_bc), (&outer_edges, self.outer_bc)] {
            match bc {
                EdgeBc::Dirichlet(v) => {
                    let mut nodes: Vec<usize> = edges.iter().flat_map(|e| e.iter().copied()).collect();
                    nodes.sort_unstable();
                    nodes.dedup();
                    fixed.extend(nodes.into_iter().map(|i| (i, v)));
                }
                EdgeBc::Flux(g) => {
                    if g != 0.0 {
                        add_flux(&mesh, &mut load, edges, &|_| g);
                    }
                }
            }
        }
        if fixed.is_empty() {
            return Err(Error::InvalidInput("T-domain problem needs a Dirichlet part".into()));
        }
        fixed.sort_by_key(|f| f.0);
        fixed.dedup_by_key(|f| f.0);
        let u = solve_spd_with_fixed(&stiffness, &load, &fixed)?;
        let ku = stiffness.matvec(&u);
        let mut is_fixed = vec![false; u.len()];
        for (i, _) in &fixed {
            is_fixed[*i] = true;
        }
        let (mut res, mut nb, mut reaction) = (0.0, 0.0, 0.0);
        for i in 0..u.len() {
            if is_fixed[i] {
                reaction += ku[i] - load[i];
            } else {
                res += (ku[i] - load[i]).powi(2);
                nb += load[i] * load[i];
            }
        }
        let total: f64 = load.iter().sum();
        let flux_defect = (reaction + total).abs() / total.abs().max(1e-300);
        Ok(TeeSolution {
            field: AxisymField::new(mesh, u)?,
            coeff,
            core_radius: self.core_radius,
            slab_height: self.slab_height,
            outer_radius: self.outer_radius,
            top: self.top,
            residual: res.sqrt() / nb.sqrt().max(1e-300),
            flux_defect,
        })
    }
}

/// Full solution of the one-rod junction problem.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub tee: TeeSolution,
    pub h: f64,
    pub alpha: Alpha,
    pub gamma: f64,
    pub rod_radius: f64,
    pub plate_radius: f64,
    pub rod_length: f64,
    pub energy: f64,
    pub dofs: usize,
    pub solve_seconds: f64,
}

/// Reference parameters extracted from a one-rod configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisymParams {
    pub plate_radius: f64,
    pub rod_radius: f64,
    pub gamma: f64,
    pub length: f64,
}

/// Checks that `cfg` is a centred one-rod disk junction.
pub fn axisym_params(cfg: &JunctionConfig) -> Result<AxisymParams> {
    let unsupported = |m: &str| Err(Error::Unsupported(format!("axisymmetric reference: {m}")));
    if cfg.rods.len() != 1 {
        return unsupported("exactly one rod is required");
    }
    let Shape::Disk { radius: plate_radius } = cfg.plate.shape else { return unsupported("plate must be a disk") };
    let Shape::Disk { radius: rod_radius } = cfg.rods[0].shape else { return unsupported("rod must be a disk") };
    if cfg.plate.anchors.len() != 1 || cfg.plate.anchors[0][0].hypot(cfg.plate.anchors[0][1]) > 1e-14 {
        return unsupported("the anchor must be the plate centre");
    }
    if cfg.sources.plate.radial().is_none() {
        return unsupported("the plate source must be radial");
    }
    if rod_radius * cfg.h >= plate_radius {
        return Err(Error::Geometry("rod radius a h must be below the plate radius".into()));
    }
    Ok(AxisymParams { plate_radius, rod_radius, gamma: cfg.rods[0].gamma, length: cfg.rods[0].length })
}

/// Solves the junction problem with plate source f₀(|y|), rod source
/// h^{-α} f₁(z), rod coefficient γ h^{-α}, zero value at the rod top and the
/// configured lateral condition on the plate edge.
pub fn solve_reference(cfg: &JunctionConfig, controls: &MeshControls) -> Result<ReferenceSolution> {
    let p = axisym_params(cfg)?;
    let h = cfg.h;
    if !(h > 0.0 && h < p.length) {
        return Err(Error::InvalidInput("need 0 < h < l".into()));
    }
    let scale = h.powf(-cfg.alpha.exponent());
    let plate_f = cfg.sources.plate.radial().expect("checked radial");
    let rod_f = cfg.sources.rod(0);
    let source = move |x: [f64; 2], core: bool| if core { scale * rod_f.value(x[1]) } else { plate_f(x[0]) };
    let outer_bc = match cfg.plate.lateral_bc {
        LateralBc::Neumann => EdgeBc::Flux(0.0),
        LateralBc::Dirichlet => EdgeBc::Dirichlet(0.0),
    };
    let start = Instant::now();
    let problem = TeeProblem {
        core_radius: p.rod_radius * h,
        outer_radius: p.plate_radius,
        slab_height: h,
        top: p.length,
        core_coeff: p.gamma * scale,
        top_bc: EdgeBc::Dirichlet(0.0),
        outer_bc,
        source: &source,
    };
    let tee = problem.solve(controls)?;
    let solve_seconds = start.elapsed().as_secs_f64();
    let energy = tee.field.energy(&tee.coeff, |_| true);
    let dofs = tee.field.mesh().n_vertices();
    Ok(ReferenceSolution {
        tee,
        h,
        alpha: cfg.alpha,
        gamma: p.gamma,
        rod_radius: p.rod_radius,
        plate_radius: p.plate_radius,
        rod_length: p.length,
        energy,
        dofs,
        solve_seconds,
    })
}

/// Part selector for restrictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// Perforated plate: r > a h, z < h.
    Plate,
    /// Rod including the socket: r < a h.
    Rod,
}

/// Restriction of a reference field to the plate or the rod.
#[derive(Debug, Clone)]
pub struct PartField<'a> {
    pub field: &'a AxisymField,
    pub part: Part,
}

impl PartField<'_> {
    pub fn contains(&self, t: usize) -> bool {
        match self.part {
            Part::Plate => !self.field.mesh().is_core(t),
            Part::Rod => self.field.mesh().is_core(t),
        }
    }

    pub fn evaluate(&self, p: [f64; 2]) -> Result<f64> {
        self.field.evaluate(p)
    }

    pub fn energy(&self, coeff: &[f64]) -> f64 {
        self.field.energy(coeff, |t| self.contains(t))
    }

    pub fn triangles(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.field.mesh().triangles().len()).filter(|&t| self.contains(t))
    }
}

impl ReferenceSolution {
    pub fn field(&self) -> &AxisymField {
        &self.tee.field
    }

    /// Plate and rod restrictions; interface vertices are shared.
    pub fn restrict_to_parts(&self) -> (PartField<'_>, PartField<'_>) {
        (PartField { field: &self.tee.field, part: Part::Plate }, PartField { field: &self.tee.field, part: Part::Rod })
    }

    /// Plate Dirichlet energy and unweighted rod Dirichlet energy.
    pub fn part_energies(&self) -> (f64, f64) {
        let ones = vec![1.0; self.tee.coeff.len()];
        let (p, r) = self.restrict_to_parts();
        (p.energy(&ones), r.energy(&ones))
    }

    /// Mean of u over the plate part.
    pub fn plate_mean(&self) -> f64 {
        let (p, _) = self.restrict_to_parts();
        let mesh = self.tee.field.mesh();
        self.tee.field.integral(|t| p.contains(t)) / mesh.volume(|t| p.contains(t))
    }

    pub fn summary(&self) -> String {
        format!(
            "h={:.6e} alpha={} energy={:.12e} dofs={} residual={:.3e} solve_seconds={:.3}",
            self.h,
            u8::from(self.alpha),
            self.energy,
            self.dofs,
            self.tee.residual,
            self.solve_seconds
        )
    }
}
