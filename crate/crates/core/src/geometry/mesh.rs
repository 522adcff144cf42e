//! Planar triangle meshes, point location and the plain-text export format.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    Outer,
    Hole(usize),
    Artificial,
}

impl std::fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryTag::Outer => write!(f, "outer"),
            BoundaryTag::Hole(j) => write!(f, "hole_{}", j + 1),
            BoundaryTag::Artificial => write!(f, "artificial"),
        }
    }
}

/// Conforming triangulation with tagged boundary edges. Triangles are stored
/// counter-clockwise.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<([usize; 2], BoundaryTag)>,
    locator: Locator,
}

/// Location of a point: triangle index and barycentric coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Location {
    pub triangle: usize,
    pub bary: [f64; 3],
}

impl TriMesh {
    pub fn new(
        vertices: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<([usize; 2], BoundaryTag)>,
    ) -> Result<Self> {
        let nv = vertices.len();
        for t in triangles.iter_mut() {
            if t.iter().any(|&i| i >= nv) {
                return Err(Error::Mesh("triangle references a missing vertex".into()));
            }
            let a = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if a == 0.0 || !a.is_finite() {
                return Err(Error::Mesh("degenerate triangle".into()));
            }
            if a < 0.0 {
                t.swap(1, 2);
            }
        }
        let locator = Locator::build(&vertices, &triangles);
        Ok(Self { vertices, triangles, boundary_edges, locator })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[([usize; 2], BoundaryTag)] {
        &self.boundary_edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn corners(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        signed_area(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Gradients of the three barycentric basis functions on triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [p0, p1, p2] = self.corners(t);
        let two_a = 2.0 * signed_area(p0, p1, p2);
        [
            [(p1[1] - p2[1]) / two_a, (p2[0] - p1[0]) / two_a],
            [(p2[1] - p0[1]) / two_a, (p0[0] - p2[0]) / two_a],
            [(p0[1] - p1[1]) / two_a, (p1[0] - p0[0]) / two_a],
        ]
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.corners(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn point(&self, t: usize, bary: [f64; 3]) -> [f64; 2] {
        let [a, b, c] = self.corners(t);
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }

    /// Vertex indices on edges with the given tag (sorted, deduplicated).
    pub fn boundary_vertices(&self, filter: impl Fn(BoundaryTag) -> bool) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|(_, tag)| filter(*tag))
            .flat_map(|(e, _)| e.iter().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Total length of boundary edges with the given tag.
    pub fn boundary_length(&self, filter: impl Fn(BoundaryTag) -> bool) -> f64 {
        self.boundary_edges
            .iter()
            .filter(|(_, tag)| filter(*tag))
            .map(|(e, _)| dist(self.vertices[e[0]], self.vertices[e[1]]))
            .sum()
    }

    /// Finds the triangle containing `p`, allowing a small relative tolerance.
    pub fn locate(&self, p: [f64; 2]) -> Option<Location> {
        let best = self.locator.best_candidate(self, p, 0)?;
        if best.bary.iter().all(|&b| b >= -1e-9) {
            Some(best)
        } else {
            None
        }
    }

    /// Like [`TriMesh::locate`], but for points slightly outside the mesh
    /// returns the nearest triangle with unclamped barycentric coordinates, so
    /// that evaluation extrapolates linearly. Returns `None` only when no
    /// triangle lies within the search radius.
    pub fn locate_or_nearest(&self, p: [f64; 2]) -> Option<Location> {
        self.locator.best_candidate(self, p, 2)
    }

    /// Checks closed boundary loops: every boundary vertex has even degree.
    pub fn boundary_loops_closed(&self) -> bool {
        let mut deg = vec![0usize; self.vertices.len()];
        for (e, _) in &self.boundary_edges {
            deg[e[0]] += 1;
            deg[e[1]] += 1;
        }
        deg.iter().all(|d| d % 2 == 0)
    }

    /// Writes the plain-text mesh format: header line, counts, coordinates,
    /// index triples and tagged boundary edges.
    pub fn write_off<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "TRIOFF")?;
        writeln!(
            w,
            "{} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        )?;
        for v in &self.vertices {
            writeln!(w, "{:.17e} {:.17e}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        for (e, tag) in &self.boundary_edges {
            writeln!(w, "{} {} {}", e[0], e[1], tag)?;
        }
        Ok(())
    }

    /// Structured mesh of a disk of `radius` centred at `center`: rings of
    /// 6k vertices joined sector by sector. The mesh is invariant under
    /// rotation by 60 degrees, in particular under y -> -y about the centre.
    pub fn disk_polar(center: [f64; 2], radius: f64, target_size: f64) -> Result<Self> {
        if radius <= 0.0 || target_size <= 0.0 {
            return Err(Error::Geometry("disk radius and mesh size must be positive".into()));
        }
        let n = ((radius / target_size).ceil() as usize).max(1);
        let mut vertices = vec![center];
        let mut ring_start = vec![0usize];
        for k in 1..=n {
            ring_start.push(vertices.len());
            let r = radius * k as f64 / n as f64;
            for i in 0..6 * k {
                let th = 2.0 * PI * i as f64 / (6 * k) as f64;
                vertices.push([center[0] + r * th.cos(), center[1] + r * th.sin()]);
            }
        }
        let idx = |k: usize, i: usize| -> usize {
            if k == 0 {
                0
            } else {
                ring_start[k] + i % (6 * k)
            }
        };
        let mut triangles = Vec::new();
        for k in 1..=n {
            for s in 0..6 {
                for i in 0..k {
                    triangles.push([idx(k, s * k + i), idx(k, s * k + i + 1), idx(k - 1, s * (k - 1) + i)]);
                }
                for i in 0..k.saturating_sub(1) {
                    triangles.push([
                        idx(k - 1, s * (k - 1) + i),
                        idx(k, s * k + i + 1),
                        idx(k - 1, s * (k - 1) + i + 1),
                    ]);
                }
            }
        }
        let boundary_edges = (0..6 * n)
            .map(|i| ([idx(n, i), idx(n, i + 1)], BoundaryTag::Outer))
            .collect();
        Self::new(vertices, triangles, boundary_edges)
    }

    /// Structured right-triangle mesh of the rectangle [x0,x1]×[y0,y1].
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    x0 + (x1 - x0) * i as f64 / nx as f64,
                    y0 + (y1 - y0) * j as f64 / ny as f64,
                ]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mut boundary_edges = Vec::new();
        for i in 0..nx {
            boundary_edges.push(([id(i, 0), id(i + 1, 0)], BoundaryTag::Outer));
            boundary_edges.push(([id(i + 1, ny), id(i, ny)], BoundaryTag::Outer));
        }
        for j in 0..ny {
            boundary_edges.push(([id(nx, j), id(nx, j + 1)], BoundaryTag::Outer));
            boundary_edges.push(([id(0, j + 1), id(0, j)], BoundaryTag::Outer));
        }
        Self::new(vertices, triangles, boundary_edges)
    }
}

pub fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

pub fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn barycentric(c: [[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let a = signed_area(c[0], c[1], c[2]);
    let l0 = signed_area(p, c[1], c[2]) / a;
    let l1 = signed_area(c[0], p, c[2]) / a;
    [l0, l1, 1.0 - l0 - l1]
}

/// Uniform bucket grid over triangle bounding boxes.
#[derive(Debug, Clone)]
struct Locator {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl Locator {
    fn build(vertices: &[[f64; 2]], triangles: &[[usize; 3]]) -> Self {
        let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
        for v in vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        if triangles.is_empty() {
            return Self { origin: [0.0; 2], cell: 1.0, nx: 1, ny: 1, start: vec![0, 0], items: vec![] };
        }
        let ext = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
        let area = (hi[0] - lo[0]).max(ext * 1e-3) * (hi[1] - lo[1]).max(ext * 1e-3);
        let cell = (area / triangles.len() as f64).sqrt() * 2.0;
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize).clamp(1, 4096);
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize).clamp(1, 4096);
        let cell_x = (hi[0] - lo[0]).max(1e-300) / nx as f64;
        let cell_y = (hi[1] - lo[1]).max(1e-300) / ny as f64;
        let cell = cell_x.max(cell_y);
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
        let index = |x: f64, d: usize, n: usize| -> usize {
            (((x - lo[d]) / cell).floor().max(0.0) as usize).min(n - 1)
        };
        for (t, tri) in triangles.iter().enumerate() {
            let (mut a, mut b) = ([f64::MAX; 2], [f64::MIN; 2]);
            for &i in tri {
                for d in 0..2 {
                    a[d] = a[d].min(vertices[i][d]);
                    b[d] = b[d].max(vertices[i][d]);
                }
            }
            for j in index(a[1], 1, ny)..=index(b[1], 1, ny) {
                for i in index(a[0], 0, nx)..=index(b[0], 0, nx) {
                    buckets[j * nx + i].push(t);
                }
            }
        }
        let mut start = Vec::with_capacity(nx * ny + 1);
        let mut items = Vec::new();
        start.push(0);
        for b in buckets {
            items.extend(b);
            start.push(items.len());
        }
        Self { origin: lo, cell, nx, ny, start, items }
    }

    /// Candidate with the largest minimum barycentric coordinate among
    /// triangles registered within `ring` cells of `p`.
    fn best_candidate(&self, mesh: &TriMesh, p: [f64; 2], ring: usize) -> Option<Location> {
        let fi = ((p[0] - self.origin[0]) / self.cell).floor();
        let fj = ((p[1] - self.origin[1]) / self.cell).floor();
        let r = ring as f64;
        if fi < -1.0 - r || fj < -1.0 - r || fi > self.nx as f64 + r || fj > self.ny as f64 + r {
            return None;
        }
        let clampi = |x: f64, n: usize| x.max(0.0).min((n - 1) as f64) as usize;
        let (i0, i1) = (clampi(fi - r, self.nx), clampi(fi + r, self.nx));
        let (j0, j1) = (clampi(fj - r, self.ny), clampi(fj + r, self.ny));
        let mut best: Option<(f64, Location)> = None;
        for j in j0..=j1 {
            for i in i0..=i1 {
                let b = j * self.nx + i;
                for &t in &self.items[self.start[b]..self.start[b + 1]] {
                    let bary = barycentric(mesh.corners(t), p);
                    let score = bary[0].min(bary[1]).min(bary[2]);
                    if best.as_ref().map_or(true, |(s, _)| score > *s) {
                        best = Some((score, Location { triangle: t, bary }));
                    }
                    if score >= 0.0 {
                        return Some(Location { triangle: t, bary });
                    }
                }
            }
        }
        best.map(|(_, l)| l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_disk_is_point_symmetric() {
        let m = TriMesh::disk_polar([0.0, 0.0], 1.0, 0.1).unwrap();
        assert!((m.area() - 30.0 * (PI / 30.0).sin()).abs() < 1e-9);
        let n = m.n_vertices();
        // Vertex i on ring k maps to vertex i + 3k under rotation by pi.
        for v in m.vertices() {
            let w = [-v[0], -v[1]];
            assert!(m.vertices().iter().any(|u| dist(*u, w) < 1e-12));
        }
        assert!(m.boundary_loops_closed());
        assert!(n > 300);
        for t in 0..m.triangles().len() {
            assert!(m.triangle_area(t) > 0.0);
        }
    }

    #[test]
    fn locate_finds_containing_triangle() {
        let m = TriMesh::rectangle(0.0, 1.0, 0.0, 1.0, 7, 5).unwrap();
        for &p in &[[0.1, 0.1], [0.99, 0.5], [0.5, 0.0], [1.0, 1.0]] {
            let l = m.locate(p).expect("inside");
            let q = m.point(l.triangle, l.bary);
            assert!(dist(p, q) < 1e-12);
        }
        assert!(m.locate([1.5, 0.5]).is_none());
        let near = m.locate_or_nearest([1.0 + 1e-3, 0.5]).unwrap();
        assert!(near.bary.iter().any(|&b| b < 0.0));
    }

    #[test]
    fn off_export_has_counts() {
        let m = TriMesh::rectangle(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let mut buf = Vec::new();
        m.write_off(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("TRIOFF"));
        assert_eq!(lines.next(), Some("9 8 8"));
        assert!(s.contains(" outer"));
    }
}
