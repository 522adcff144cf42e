//! Constrained Delaunay triangulation with size-driven Delaunay refinement.
//!
//! Bowyer-Watson insertion inside a super triangle, conforming recovery of
//! input segments by midpoint splitting, parity flood fill for the domain and
//! Ruppert-style refinement with encroachment checks. Predicates are the
//! adaptive exact ones from the `robust` crate.

use std::collections::{BTreeMap, VecDeque};

use robust::{incircle, orient2d, Coord};

use super::mesh::{BoundaryTag, TriMesh};
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Planar straight-line graph: points, tagged segments between them.
#[derive(Debug, Clone, Default)]
pub struct Pslg {
    pub points: Vec<[f64; 2]>,
    pub segments: Vec<([usize; 2], BoundaryTag)>,
}

impl Pslg {
    /// Appends a closed loop through `pts` with the given tag.
    pub fn add_loop(&mut self, pts: &[[f64; 2]], tag: BoundaryTag) {
        let base = self.points.len();
        self.points.extend_from_slice(pts);
        for i in 0..pts.len() {
            self.segments
                .push(([base + i, base + (i + 1) % pts.len()], tag));
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RefineOptions {
    /// Upper bound on circumradius-to-shortest-edge ratio (sqrt 2 gives a
    /// minimum angle of about 20.7 degrees).
    pub max_ratio: f64,
    /// Segments and edges shorter than this are never split further.
    pub min_length: f64,
    pub max_vertices: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self { max_ratio: std::f64::consts::SQRT_2, min_length: 1e-9, max_vertices: 4_000_000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [usize; 3],
    n: [usize; 3],
    alive: bool,
    inside: bool,
}

enum Insert {
    Done(usize),
    Encroached([usize; 2]),
    Blocked([usize; 2]),
    Duplicate,
}

struct Triangulation {
    pts: Vec<[f64; 2]>,
    tris: Vec<Tri>,
    free: Vec<usize>,
    vtri: Vec<usize>,
    segs: BTreeMap<(usize, usize), BoundaryTag>,
    hint: usize,
}

#[inline]
fn c(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

#[inline]
fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn circumcenter(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> [f64; 2] {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (p[0] - a[0], p[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    [a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d]
}

fn d2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

impl Triangulation {
    fn new(bbox_lo: [f64; 2], bbox_hi: [f64; 2]) -> Self {
        let cx = 0.5 * (bbox_lo[0] + bbox_hi[0]);
        let cy = 0.5 * (bbox_lo[1] + bbox_hi[1]);
        let l = (bbox_hi[0] - bbox_lo[0]).max(bbox_hi[1] - bbox_lo[1]).max(1e-12);
        let pts = vec![
            [cx - 40.0 * l, cy - 30.0 * l],
            [cx + 40.0 * l, cy - 30.0 * l],
            [cx, cy + 40.0 * l],
        ];
        let tris = vec![Tri { v: [0, 1, 2], n: [NONE; 3], alive: true, inside: false }];
        Self { pts, tris, free: Vec::new(), vtri: vec![0, 0, 0], segs: BTreeMap::new(), hint: 0 }
    }

    fn orient(&self, a: usize, b: usize, p: [f64; 2]) -> f64 {
        orient2d(c(self.pts[a]), c(self.pts[b]), c(p))
    }

    fn in_circle(&self, t: usize, p: [f64; 2]) -> bool {
        let [a, b, cc] = self.tris[t].v;
        incircle(c(self.pts[a]), c(self.pts[b]), c(self.pts[cc]), c(p)) > 0.0
    }

    fn edge(&self, t: usize, i: usize) -> (usize, usize) {
        let v = self.tris[t].v;
        (v[(i + 1) % 3], v[(i + 2) % 3])
    }

    fn is_constrained(&self, a: usize, b: usize) -> bool {
        self.segs.contains_key(&key(a, b))
    }

    /// Visibility walk; returns the triangle containing `p` (possibly on its
    /// boundary).
    fn locate(&self, p: [f64; 2], start: usize) -> Result<usize> {
        let mut t = if start < self.tris.len() && self.tris[start].alive { start } else { self.any_alive() };
        let limit = 4 * self.tris.len() + 100;
        for step in 0..limit {
            let mut moved = false;
            for k in 0..3 {
                let i = (k + step) % 3;
                let (a, b) = self.edge(t, i);
                if self.orient(a, b, p) < 0.0 {
                    let nb = self.tris[t].n[i];
                    if nb == NONE {
                        return Err(Error::Mesh("point outside the super triangle".into()));
                    }
                    t = nb;
                    moved = true;
                    break;
                }
            }
            if !moved {
                return Ok(t);
            }
        }
        Err(Error::Mesh("point location did not terminate".into()))
    }

    /// Straight-line walk from the centroid of `t` towards `p`; returns the
    /// first constrained edge crossed, if any, and the final triangle.
    fn walk_to(&self, t0: usize, p: [f64; 2]) -> std::result::Result<usize, [usize; 2]> {
        let v = self.tris[t0].v;
        let q = [
            (self.pts[v[0]][0] + self.pts[v[1]][0] + self.pts[v[2]][0]) / 3.0,
            (self.pts[v[0]][1] + self.pts[v[1]][1] + self.pts[v[2]][1]) / 3.0,
        ];
        let mut t = t0;
        let mut came_from = NONE;
        for _ in 0..(4 * self.tris.len() + 100) {
            let mut next = None;
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if nb == came_from {
                    continue;
                }
                let (a, b) = self.edge(t, i);
                if self.orient(a, b, p) >= 0.0 {
                    continue;
                }
                let sa = orient2d(c(q), c(p), c(self.pts[a]));
                let sb = orient2d(c(q), c(p), c(self.pts[b]));
                if sa * sb <= 0.0 {
                    next = Some((i, a, b));
                    break;
                }
            }
            let Some((i, a, b)) = next else {
                return Ok(t);
            };
            if self.is_constrained(a, b) {
                return Err([a, b]);
            }
            let nb = self.tris[t].n[i];
            if nb == NONE {
                return Ok(t);
            }
            came_from = t;
            t = nb;
        }
        Ok(t)
    }

    fn any_alive(&self) -> usize {
        self.tris.iter().position(|t| t.alive).unwrap_or(0)
    }

    fn alloc(&mut self, tri: Tri) -> usize {
        if let Some(i) = self.free.pop() {
            self.tris[i] = tri;
            i
        } else {
            self.tris.push(tri);
            self.tris.len() - 1
        }
    }

    /// Inserts a point. `split` names a constrained edge the point lies on and
    /// which the cavity may cross. With `check_encroach` the insertion is
    /// refused when the point would encroach a visible segment.
    fn insert(
        &mut self,
        p: [f64; 2],
        start: usize,
        split: Option<(usize, usize)>,
        check_encroach: bool,
    ) -> Result<Insert> {
        let t0 = self.locate(p, start)?;
        for &vi in &self.tris[t0].v {
            if self.pts[vi] == p {
                return Ok(Insert::Duplicate);
            }
        }
        // Cavity by breadth-first search over circumcircles.
        let mut cavity = vec![t0];
        let mut in_cav = std::collections::HashSet::new();
        in_cav.insert(t0);
        let mut q = VecDeque::from([t0]);
        while let Some(t) = q.pop_front() {
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if nb == NONE || in_cav.contains(&nb) {
                    continue;
                }
                let (a, b) = self.edge(t, i);
                if self.is_constrained(a, b) && split != Some(key(a, b)) {
                    continue;
                }
                if self.in_circle(nb, p) {
                    in_cav.insert(nb);
                    cavity.push(nb);
                    q.push_back(nb);
                }
            }
        }
        // Boundary of the cavity (edges whose outer side is not in the cavity).
        let mut boundary = Vec::new();
        for &t in &cavity {
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if nb != NONE && in_cav.contains(&nb) {
                    continue;
                }
                let (a, b) = self.edge(t, i);
                if check_encroach && self.is_constrained(a, b) {
                    let (pa, pb) = (self.pts[a], self.pts[b]);
                    let m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                    if d2(p, m) < 0.25 * d2(pa, pb) {
                        return Ok(Insert::Encroached([a, b]));
                    }
                }
                if self.orient(a, b, p) <= 0.0 {
                    // The point is not strictly visible from this edge: it lies
                    // on or beyond it, which only happens for the split edge.
                    if split == Some(key(a, b)) {
                        continue;
                    }
                    if self.is_constrained(a, b) {
                        return Ok(Insert::Blocked([a, b]));
                    }
                    return Err(Error::Mesh("non star-shaped cavity".into()));
                }
                boundary.push((a, b, nb, self.tris[t].inside));
            }
        }
        let pi = self.pts.len();
        self.pts.push(p);
        self.vtri.push(NONE);
        for &t in &cavity {
            self.tris[t].alive = false;
            self.free.push(t);
        }
        let mut by_start: std::collections::HashMap<usize, usize> = Default::default();
        let mut by_end: std::collections::HashMap<usize, usize> = Default::default();
        let mut created = Vec::with_capacity(boundary.len());
        // Reuse freed slots in a fixed order for determinism.
        self.free.sort_unstable_by(|a, b| b.cmp(a));
        for &(a, b, nb, inside) in &boundary {
            let t = self.alloc(Tri { v: [a, b, pi], n: [NONE, NONE, nb], alive: true, inside });
            if nb != NONE {
                for k in 0..3 {
                    let (x, y) = self.edge(nb, k);
                    if x == b && y == a {
                        self.tris[nb].n[k] = t;
                    }
                }
            }
            by_start.insert(a, t);
            by_end.insert(b, t);
            created.push(t);
        }
        for &t in &created {
            let [a, b, _] = self.tris[t].v;
            self.tris[t].n[0] = *by_start.get(&b).unwrap_or(&NONE);
            self.tris[t].n[1] = *by_end.get(&a).unwrap_or(&NONE);
            for &vi in &self.tris[t].v {
                self.vtri[vi] = t;
            }
        }
        if let Some((a, b)) = split {
            if let Some(tag) = self.segs.remove(&(a, b)) {
                self.segs.insert(key(a, pi), tag);
                self.segs.insert(key(pi, b), tag);
            }
        }
        self.hint = created[0];
        Ok(Insert::Done(pi))
    }

    /// Triangles around vertex `a` (counter-clockwise rotation, both ways).
    fn star(&self, a: usize) -> Vec<usize> {
        let start = self.vtri[a];
        let mut out = vec![start];
        let pos = |t: usize| self.tris[t].v.iter().position(|&x| x == a).unwrap();
        let mut t = start;
        loop {
            let i = pos(t);
            let nb = self.tris[t].n[(i + 2) % 3];
            if nb == NONE || nb == start {
                if nb == NONE {
                    // Open fan: also rotate the other way.
                    let mut t = start;
                    loop {
                        let i = pos(t);
                        let nb = self.tris[t].n[(i + 1) % 3];
                        if nb == NONE {
                            break;
                        }
                        out.push(nb);
                        t = nb;
                    }
                }
                break;
            }
            out.push(nb);
            t = nb;
        }
        out
    }

    /// A triangle having (a, b) as an edge, if the edge exists.
    fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.star(a).into_iter().find(|&t| self.tris[t].v.contains(&b))
    }

    /// Splits a constrained segment at its midpoint.
    fn split_segment(&mut self, a: usize, b: usize) -> Result<Option<usize>> {
        let (pa, pb) = (self.pts[a], self.pts[b]);
        let m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        let start = self.find_edge(a, b).unwrap_or(self.hint);
        match self.insert(m, start, Some(key(a, b)), false)? {
            Insert::Done(v) => Ok(Some(v)),
            _ => Ok(None),
        }
    }

    fn mark_inside(&mut self) {
        for t in self.tris.iter_mut() {
            t.inside = false;
        }
        let n = self.tris.len();
        let mut parity = vec![u8::MAX; n];
        let start = (0..n).find(|&t| self.tris[t].alive && self.tris[t].v.iter().any(|&v| v < 3)).unwrap();
        parity[start] = 0;
        let mut q = VecDeque::from([start]);
        while let Some(t) = q.pop_front() {
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if nb == NONE || parity[nb] != u8::MAX {
                    continue;
                }
                let (a, b) = self.edge(t, i);
                parity[nb] = parity[t] ^ u8::from(self.is_constrained(a, b));
                q.push_back(nb);
            }
        }
        for t in 0..n {
            self.tris[t].inside = self.tris[t].alive && parity[t] == 1;
        }
    }
}

/// Triangulates the PSLG and refines until every interior triangle has
/// circumradius at most `0.6 * size(centroid)` and bounded aspect ratio.
pub fn triangulate(
    pslg: &Pslg,
    size: &dyn Fn([f64; 2]) -> f64,
    opts: RefineOptions,
) -> Result<TriMesh> {
    if pslg.points.len() < 3 || pslg.segments.is_empty() {
        return Err(Error::Mesh("PSLG needs at least one closed loop".into()));
    }
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for p in &pslg.points {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(Error::Mesh("non-finite input point".into()));
        }
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let mut tr = Triangulation::new(lo, hi);
    let mut map = Vec::with_capacity(pslg.points.len());
    for &p in &pslg.points {
        let hint = tr.hint;
        match tr.insert(p, hint, None, false)? {
            Insert::Done(v) => map.push(v),
            Insert::Duplicate => {
                let v = (3..tr.pts.len()).find(|&v| tr.pts[v] == p).unwrap();
                map.push(v);
            }
            _ => unreachable!("no constraints exist yet"),
        }
    }

    // Conforming segment recovery.
    let mut pending: VecDeque<((usize, usize), BoundaryTag)> = pslg
        .segments
        .iter()
        .map(|&([a, b], tag)| ((map[a], map[b]), tag))
        .collect();
    let mut guard = 0usize;
    while let Some(((a, b), tag)) = pending.pop_front() {
        guard += 1;
        if guard > 10 * opts.max_vertices {
            return Err(Error::Mesh("segment recovery did not terminate".into()));
        }
        if a == b {
            return Err(Error::Mesh("degenerate segment".into()));
        }
        if tr.find_edge(a, b).is_some() {
            tr.segs.insert(key(a, b), tag);
            continue;
        }
        if d2(tr.pts[a], tr.pts[b]).sqrt() < opts.min_length {
            return Err(Error::Mesh("segments intersect or touch".into()));
        }
        let (pa, pb) = (tr.pts[a], tr.pts[b]);
        let m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        let start = tr.vtri[a];
        match tr.insert(m, start, None, false)? {
            Insert::Done(v) => {
                pending.push_back(((a, v), tag));
                pending.push_back(((v, b), tag));
            }
            Insert::Blocked(_) => return Err(Error::Mesh("input segments cross".into())),
            _ => return Err(Error::Mesh("segment midpoint coincides with a vertex".into())),
        }
    }
    tr.mark_inside();

    // Split segments encroached by existing vertices.
    let mut changed = true;
    while changed {
        changed = false;
        let segs: Vec<(usize, usize)> = tr.segs.keys().copied().collect();
        for (a, b) in segs {
            if !tr.segs.contains_key(&(a, b)) {
                continue;
            }
            let (pa, pb) = (tr.pts[a], tr.pts[b]);
            if d2(pa, pb).sqrt() < 2.0 * opts.min_length {
                continue;
            }
            let m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let r2 = 0.25 * d2(pa, pb);
            let Some(t) = tr.find_edge(a, b) else { continue };
            let mut around = vec![t];
            let i = (0..3).find(|&i| {
                let (x, y) = tr.edge(t, i);
                key(x, y) == (a, b)
            });
            if let Some(i) = i {
                if tr.tris[t].n[i] != NONE {
                    around.push(tr.tris[t].n[i]);
                }
            }
            let encroached = around.iter().any(|&t| {
                tr.tris[t].inside
                    && tr.tris[t].v.iter().any(|&v| v != a && v != b && v >= 3 && d2(tr.pts[v], m) < r2 * (1.0 - 1e-12))
            });
            if encroached && tr.split_segment(a, b)?.is_some() {
                changed = true;
            }
        }
        if tr.pts.len() > opts.max_vertices {
            return Err(Error::Mesh("vertex budget exceeded".into()));
        }
    }

    // Refinement of bad or oversized triangles.
    let mut queue: VecDeque<usize> = (0..tr.tris.len()).filter(|&t| tr.tris[t].alive && tr.tris[t].inside).collect();
    while let Some(t) = queue.pop_front() {
        if !tr.tris[t].alive || !tr.tris[t].inside {
            continue;
        }
        if tr.pts.len() > opts.max_vertices {
            return Err(Error::Mesh("vertex budget exceeded".into()));
        }
        let [ia, ib, ic] = tr.tris[t].v;
        let (pa, pb, pc) = (tr.pts[ia], tr.pts[ib], tr.pts[ic]);
        let emin = d2(pa, pb).min(d2(pb, pc)).min(d2(pc, pa)).sqrt();
        let cc = circumcenter(pa, pb, pc);
        let r = d2(cc, pa).sqrt();
        let centroid = [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0];
        let too_big = r > 0.6 * size(centroid);
        let skinny = r > opts.max_ratio * emin;
        if !(too_big || skinny) || emin < opts.min_length {
            continue;
        }
        let target = match tr.walk_to(t, cc) {
            Err(seg) => Err(seg),
            Ok(end) => match tr.insert(cc, end, None, true)? {
                Insert::Done(v) => {
                    let star = tr.star(v);
                    queue.extend(star);
                    Ok(())
                }
                Insert::Encroached(seg) | Insert::Blocked(seg) => Err(seg),
                Insert::Duplicate => Ok(()),
            },
        };
        if let Err([a, b]) = target {
            if d2(tr.pts[a], tr.pts[b]).sqrt() >= 2.0 * opts.min_length {
                if let Some(v) = tr.split_segment(a, b)? {
                    let star = tr.star(v);
                    queue.extend(star);
                    queue.push_back(t);
                }
            }
        }
    }
    export(&tr)
}

fn export(tr: &Triangulation) -> Result<TriMesh> {
    let mut used = vec![false; tr.pts.len()];
    for t in tr.tris.iter().filter(|t| t.alive && t.inside) {
        for &v in &t.v {
            used[v] = true;
        }
    }
    let mut map = vec![NONE; tr.pts.len()];
    let mut vertices = Vec::new();
    for (i, p) in tr.pts.iter().enumerate() {
        if used[i] {
            if i < 3 {
                return Err(Error::Mesh("domain touches the super triangle".into()));
            }
            map[i] = vertices.len();
            vertices.push(*p);
        }
    }
    let triangles: Vec<[usize; 3]> = tr
        .tris
        .iter()
        .filter(|t| t.alive && t.inside)
        .map(|t| [map[t.v[0]], map[t.v[1]], map[t.v[2]]])
        .collect();
    let mut boundary = Vec::new();
    for (&(a, b), &tag) in &tr.segs {
        if map[a] == NONE || map[b] == NONE {
            continue;
        }
        // Orient along the interior triangle (domain on the left).
        let t = tr.find_edge(a, b).expect("segment edge exists");
        let nb_inside = (0..3)
            .find(|&i| key(tr.edge(t, i).0, tr.edge(t, i).1) == (a, b))
            .map(|i| {
                let nb = tr.tris[t].n[i];
                nb != NONE && tr.tris[nb].inside
            })
            .unwrap_or(false);
        let (tt, _) = if tr.tris[t].inside {
            (t, ())
        } else if nb_inside {
            let i = (0..3).find(|&i| key(tr.edge(t, i).0, tr.edge(t, i).1) == (a, b)).unwrap();
            (tr.tris[t].n[i], ())
        } else {
            continue;
        };
        let i = (0..3).find(|&i| key(tr.edge(tt, i).0, tr.edge(tt, i).1) == (a, b)).unwrap();
        let (x, y) = tr.edge(tt, i);
        boundary.push(([map[x], map[y]], tag));
    }
    TriMesh::new(vertices, triangles, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::{dist, signed_area};

    fn square_loop(n: usize) -> Vec<[f64; 2]> {
        let mut pts = Vec::new();
        for side in 0..4 {
            for i in 0..n {
                let s = i as f64 / n as f64;
                pts.push(match side {
                    0 => [s, 0.0],
                    1 => [1.0, s],
                    2 => [1.0 - s, 1.0],
                    _ => [0.0, 1.0 - s],
                });
            }
        }
        pts
    }

    #[test]
    fn square_is_covered_exactly() {
        let mut g = Pslg::default();
        g.add_loop(&square_loop(4), BoundaryTag::Outer);
        let m = triangulate(&g, &|_| 0.1, RefineOptions::default()).unwrap();
        assert!((m.area() - 1.0).abs() < 1e-12);
        assert!((m.boundary_length(|_| true) - 4.0).abs() < 1e-12);
        assert!(m.boundary_loops_closed());
        for t in 0..m.triangles().len() {
            let [a, b, c] = m.corners(t);
            assert!(signed_area(a, b, c) > 0.0);
        }
    }

    #[test]
    fn refinement_respects_quality_and_size() {
        let mut g = Pslg::default();
        g.add_loop(&square_loop(2), BoundaryTag::Outer);
        let m = triangulate(&g, &|_| 0.05, RefineOptions::default()).unwrap();
        let mut min_angle = f64::MAX;
        for t in 0..m.triangles().len() {
            let p = m.corners(t);
            for k in 0..3 {
                let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (dist(a, b) * dist(a, c));
                min_angle = min_angle.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
            assert!(m.diameter(t) < 0.05 * 1.3 * 2.0);
        }
        assert!(min_angle > 18.0, "min angle {min_angle}");
    }

    #[test]
    fn hole_is_excluded() {
        let mut g = Pslg::default();
        g.add_loop(&square_loop(8), BoundaryTag::Outer);
        let hole: Vec<[f64; 2]> = (0..16)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / 16.0;
                [0.5 + 0.2 * th.cos(), 0.5 + 0.2 * th.sin()]
            })
            .collect();
        g.add_loop(&hole, BoundaryTag::Hole(0));
        let m = triangulate(&g, &|_| 0.08, RefineOptions::default()).unwrap();
        let hole_area = 0.5 * 16.0 * 0.04 * (2.0 * std::f64::consts::PI / 16.0).sin();
        assert!((m.area() - (1.0 - hole_area)).abs() < 1e-10);
        assert!(m.locate([0.5, 0.5]).is_none());
        assert!(m.boundary_edges().iter().any(|(_, t)| *t == BoundaryTag::Hole(0)));
    }
}
