//! Declarative junction geometry, configuration validation and planar meshing.

pub mod cdt;
pub mod mesh;
pub mod source;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use mesh::{dist, signed_area, BoundaryTag, Location, TriMesh};
pub use source::{PlateSource, RodSource, Sources};

use crate::error::{Error, Result};
use cdt::{Pslg, RefineOptions};

/// A planar region: disk centred at the origin of its own frame, or a simple
/// counter-clockwise polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Disk { radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Shape {
    pub fn area(&self) -> f64 {
        match self {
            Shape::Disk { radius } => PI * radius * radius,
            Shape::Polygon { vertices } => polygon_signed_area(vertices),
        }
    }

    /// Largest distance from the origin to the shape.
    pub fn circumradius(&self) -> f64 {
        match self {
            Shape::Disk { radius } => *radius,
            Shape::Polygon { vertices } => {
                vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max)
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Shape::Disk { radius } => p[0].hypot(p[1]) < *radius,
            Shape::Polygon { vertices } => point_in_polygon(vertices, p),
        }
    }

    /// Distance from `p` to the boundary, positive inside, negative outside.
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        match self {
            Shape::Disk { radius } => radius - p[0].hypot(p[1]),
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let d = (0..n)
                    .map(|i| segment_distance(vertices[i], vertices[(i + 1) % n], p))
                    .fold(f64::INFINITY, f64::min);
                if point_in_polygon(vertices, p) {
                    d
                } else {
                    -d
                }
            }
        }
    }

    /// Checks the shape invariants; `Err` carries a description.
    pub fn check(&self) -> std::result::Result<(), String> {
        match self {
            Shape::Disk { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(format!("disk radius {radius} is not positive"));
                }
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err("polygon needs at least three vertices".into());
                }
                if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
                    return Err("polygon has non-finite vertices".into());
                }
                if polygon_signed_area(vertices) <= 0.0 {
                    return Err("polygon is not positively oriented".into());
                }
                if !polygon_is_simple(vertices) {
                    return Err("polygon is not simple".into());
                }
            }
        }
        Ok(())
    }

    /// Boundary points of `center + scale * shape`, counter-clockwise, with
    /// spacing at most `spacing`.
    pub fn boundary_points(&self, center: [f64; 2], scale: f64, spacing: f64) -> Vec<[f64; 2]> {
        match self {
            Shape::Disk { radius } => {
                let r = radius * scale;
                let n = ((2.0 * PI * r / spacing).ceil() as usize).max(8);
                (0..n)
                    .map(|i| {
                        let th = 2.0 * PI * i as f64 / n as f64;
                        [center[0] + r * th.cos(), center[1] + r * th.sin()]
                    })
                    .collect()
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut out = Vec::new();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let len = dist(a, b) * scale;
                    let k = ((len / spacing).ceil() as usize).max(1);
                    for s in 0..k {
                        let t = s as f64 / k as f64;
                        out.push([
                            center[0] + scale * (a[0] + t * (b[0] - a[0])),
                            center[1] + scale * (a[1] + t * (b[1] - a[1])),
                        ]);
                    }
                }
                out
            }
        }
    }
}

pub fn polygon_signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1])
        .sum::<f64>()
}

fn point_in_polygon(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = v.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    dist(p, [a[0] + t * dx, a[1] + t * dy])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| signed_area(p, q, r);
    let (d1, d2) = (o(a, b, c), o(a, b, d));
    let (d3, d4) = (o(c, d, a), o(c, d, b));
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    let on = |p: [f64; 2], q: [f64; 2], r: [f64; 2], s: f64| s == 0.0 && segment_distance(p, q, r) == 0.0;
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

fn polygon_is_simple(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                if v[i] == v[j] {
                    return false;
                }
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Rod cross-section with its material coefficient and rod length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    #[serde(flatten)]
    pub shape: Shape,
    pub gamma: f64,
    pub length: f64,
}

impl CrossSection {
    pub fn disk(radius: f64, gamma: f64, length: f64) -> Self {
        Self { shape: Shape::Disk { radius }, gamma, length }
    }

    pub fn area(&self) -> f64 {
        self.shape.area()
    }

    /// Default truncation radius for cut-offs in stretched variables.
    pub fn outer_radius(&self) -> f64 {
        2.0 * self.shape.circumradius()
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        self.shape.check()?;
        if !self.shape.contains([0.0, 0.0]) {
            return Err("cross-section does not contain the origin".into());
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(format!("gamma {} is not positive", self.gamma));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(format!("rod length {} is not positive", self.length));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LateralBc {
    #[default]
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateDomain {
    #[serde(flatten)]
    pub shape: Shape,
    pub anchors: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_radius: Option<f64>,
    #[serde(default)]
    pub lateral_bc: LateralBc,
}

impl PlateDomain {
    pub fn disk(radius: f64, anchors: Vec<[f64; 2]>) -> Self {
        Self { shape: Shape::Disk { radius }, anchors, cutoff_radius: None, lateral_bc: LateralBc::Neumann }
    }

    pub fn area(&self) -> f64 {
        self.shape.area()
    }

    /// Half the minimum of the boundary distances and half the smallest
    /// inter-anchor distance.
    pub fn default_cutoff_radius(&self) -> f64 {
        let mut m = self
            .anchors
            .iter()
            .map(|&p| self.shape.signed_distance(p))
            .fold(f64::INFINITY, f64::min);
        for i in 0..self.anchors.len() {
            for j in i + 1..self.anchors.len() {
                m = m.min(0.5 * dist(self.anchors[i], self.anchors[j]));
            }
        }
        0.5 * m
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff_radius.unwrap_or_else(|| self.default_cutoff_radius())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Alpha {
    Zero,
    One,
}

impl TryFrom<u8> for Alpha {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Alpha::Zero),
            1 => Ok(Alpha::One),
            _ => Err(format!("alpha must be 0 or 1, got {v}")),
        }
    }
}

impl From<Alpha> for u8 {
    fn from(a: Alpha) -> u8 {
        match a {
            Alpha::Zero => 0,
            Alpha::One => 1,
        }
    }
}

impl Alpha {
    pub fn exponent(self) -> f64 {
        match self {
            Alpha::Zero => 0.0,
            Alpha::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionConfig {
    pub plate: PlateDomain,
    pub rods: Vec<CrossSection>,
    pub alpha: Alpha,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<f64>,
    #[serde(default)]
    pub sources: Sources,
}

impl JunctionConfig {
    pub fn n_rods(&self) -> usize {
        self.rods.len()
    }

    pub fn with_h(&self, h: f64) -> Self {
        Self { h, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: &'static str,
    pub index: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.index {
            Some(j) => write!(f, "[{}] rod {}: {}", self.invariant, j + 1, self.message),
            None => write!(f, "[{}] {}", self.invariant, self.message),
        }
    }
}

/// Lists every violated configuration invariant. Indices are zero-based.
pub fn validate_config(cfg: &JunctionConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |invariant, index, message: String| out.push(Violation { invariant, index, message });
    let plate = &cfg.plate;
    if let Err(e) = plate.shape.check() {
        push("plate_shape", None, e);
        return out;
    }
    if cfg.rods.is_empty() {
        push("rod_count", None, "at least one rod is required".into());
    }
    if cfg.rods.len() != plate.anchors.len() {
        push(
            "rod_count",
            None,
            format!("{} rods but {} anchors", cfg.rods.len(), plate.anchors.len()),
        );
    }
    if !(cfg.h.is_finite() && cfg.h > 0.0) {
        push("h_positive", None, format!("h = {} is not positive", cfg.h));
    }
    if let Some(h0) = cfg.h0 {
        if !(h0 > 0.0) {
            push("h0_positive", None, format!("h0 = {h0} is not positive"));
        } else if cfg.h > h0 {
            push("h_admissible", None, format!("h = {} exceeds h0 = {h0}", cfg.h));
        }
    }
    for (j, rod) in cfg.rods.iter().enumerate() {
        if let Err(e) = rod.check() {
            push("rod_section", Some(j), e);
        }
    }
    for (j, &p) in plate.anchors.iter().enumerate() {
        if !plate.shape.contains(p) {
            push("anchor_interior", Some(j), "anchor lies outside the plate".into());
        }
        for k in j + 1..plate.anchors.len() {
            if plate.anchors[k] == p {
                push("anchor_distinct", Some(j), format!("anchor coincides with anchor {}", k + 1));
            }
        }
    }
    let r0 = plate.cutoff();
    if !(r0 > 0.0) {
        push("cutoff_radius", None, format!("cutoff radius {r0} is not positive"));
    } else {
        for (j, &p) in plate.anchors.iter().enumerate() {
            if plate.shape.signed_distance(p) < r0 {
                push("anchor_ball_inside", Some(j), "anchor ball is not contained in the plate".into());
            }
            for k in j + 1..plate.anchors.len() {
                if dist(p, plate.anchors[k]) < 2.0 * r0 {
                    push("anchor_balls_disjoint", Some(j), format!("anchor balls overlap (with anchor {})", k + 1));
                }
            }
        }
    }
    if cfg.h > 0.0 {
        for (j, (rod, &p)) in cfg.rods.iter().zip(&plate.anchors).enumerate() {
            if rod.shape.check().is_err() {
                continue;
            }
            let spacing = (cfg.h * rod.shape.circumradius() / 64.0).max(1e-12);
            let inside = rod
                .shape
                .boundary_points(p, cfg.h, spacing)
                .iter()
                .all(|&q| plate.shape.signed_distance(q) > 0.0);
            if !inside {
                push("section_inside_plate", Some(j), "scaled cross-section is not contained in the plate".into());
            }
            for (k, (other, &q)) in cfg.rods.iter().zip(&plate.anchors).enumerate().skip(j + 1) {
                let reach = cfg.h * (rod.shape.circumradius() + other.shape.circumradius());
                if dist(p, q) <= reach {
                    push("sections_disjoint", Some(j), format!("scaled cross-section may meet rod {}", k + 1));
                }
            }
        }
    }
    out
}

/// Element-size function: `target` away from anchors, graded linearly in the
/// distance to the nearest anchor down to `target / 16`.
pub fn graded_size(anchors: &[[f64; 2]], target: f64, grade: bool) -> impl Fn([f64; 2]) -> f64 + '_ {
    move |p| {
        if !grade || anchors.is_empty() {
            return target;
        }
        let d = anchors.iter().map(|&a| dist(a, p)).fold(f64::INFINITY, f64::min);
        (0.3 * d).clamp(target / 16.0, target)
    }
}

/// Meshes the plate with the anchors inserted as vertices.
pub fn mesh_plate(domain: &PlateDomain, target_size: f64, grade_near_anchors: bool) -> Result<TriMesh> {
    domain.shape.check().map_err(Error::Geometry)?;
    if !(target_size > 0.0) {
        return Err(Error::Geometry("target size must be positive".into()));
    }
    for &p in &domain.anchors {
        let d = domain.shape.signed_distance(p);
        if d <= 0.0 {
            return Err(Error::Geometry("anchor lies outside the plate".into()));
        }
        if grade_near_anchors && d < target_size / 4.0 {
            return Err(Error::Geometry("anchor too close to the boundary for graded meshing".into()));
        }
    }
    let size = graded_size(&domain.anchors, target_size, grade_near_anchors);
    let boundary = outer_loop(&domain.shape, &size, target_size);
    let mut g = Pslg::default();
    g.add_loop(&boundary, BoundaryTag::Outer);
    g.points.extend_from_slice(&domain.anchors);
    cdt::triangulate(&g, &size, RefineOptions::default())
}

/// Meshes the plate with the scaled rod cross-sections removed; hole loops
/// are tagged with the rod index.
pub fn mesh_perforated_plate(cfg: &JunctionConfig, target_size: f64) -> Result<TriMesh> {
    let domain = &cfg.plate;
    domain.shape.check().map_err(Error::Geometry)?;
    let hole_sizes: Vec<f64> = cfg
        .rods
        .iter()
        .map(|r| (cfg.h * r.shape.circumradius() / 8.0).min(target_size))
        .collect();
    let size = |p: [f64; 2]| {
        domain
            .anchors
            .iter()
            .zip(&hole_sizes)
            .map(|(&a, &s)| s + 0.3 * dist(a, p))
            .fold(target_size, f64::min)
    };
    let mut g = Pslg::default();
    g.add_loop(&outer_loop(&domain.shape, &size, target_size), BoundaryTag::Outer);
    for (j, (rod, &p)) in cfg.rods.iter().zip(&domain.anchors).enumerate() {
        let mut pts = rod.shape.boundary_points(p, cfg.h, hole_sizes[j]);
        pts.reverse();
        g.add_loop(&pts, BoundaryTag::Hole(j));
    }
    cdt::triangulate(&g, &size, RefineOptions::default())
}

fn outer_loop(shape: &Shape, size: &dyn Fn([f64; 2]) -> f64, target: f64) -> Vec<[f64; 2]> {
    match shape {
        Shape::Disk { radius } => {
            // Uniform spacing at the smallest size met on the circle.
            let n = 720;
            let s = (0..n)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    size([radius * th.cos(), radius * th.sin()])
                })
                .fold(target, f64::min);
            shape.boundary_points([0.0, 0.0], 1.0, s)
        }
        Shape::Polygon { vertices } => {
            let n = vertices.len();
            let mut out = Vec::new();
            for i in 0..n {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let s = (0..=16)
                    .map(|k| {
                        let t = k as f64 / 16.0;
                        size([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
                    })
                    .fold(target, f64::min);
                let k = ((dist(a, b) / s).ceil() as usize).max(1);
                for m in 0..k {
                    let t = m as f64 / k as f64;
                    out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                }
            }
            out
        }
    }
}
