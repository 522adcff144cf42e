//! Quadrature rules and smooth cutoff functions shared by all modules.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss rule on [a, b] with `panels` equal panels of `order` points.
pub struct CompositeGauss {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeGauss {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * width;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(lo + 0.5 * width * (x + 1.0));
                weights.push(0.5 * width * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Integral of `f` over [a, b] with 64 panels of 8-point Gauss.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    CompositeGauss::new(a, b, 64, 8).integrate(f)
}

/// Seven-point degree-5 rule on a triangle: barycentric coordinates and
/// weights normalized to sum to one.
pub const TRI7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const W1: f64 = 0.132_394_152_788_506;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W2: f64 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Quintic smoothstep blend: 1 for `t <= inner`, 0 for `t >= outer`, C² in between.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Cutoff {
    pub fn new(inner: f64, outer: f64) -> Self {
        assert!(outer > inner && inner >= 0.0, "cutoff needs 0 <= inner < outer");
        Self { inner, outer }
    }

    fn s(&self, t: f64) -> Option<f64> {
        if t <= self.inner || t >= self.outer {
            None
        } else {
            Some((t - self.inner) / (self.outer - self.inner))
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.s(t) {
            Some(s) => 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s),
            None if t <= self.inner => 1.0,
            None => 0.0,
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        self.s(t).map_or(0.0, |s| {
            -30.0 * s * s * (1.0 - s) * (1.0 - s) / (self.outer - self.inner)
        })
    }

    pub fn d2(&self, t: f64) -> f64 {
        self.s(t).map_or(0.0, |s| {
            let w = self.outer - self.inner;
            -(60.0 * s - 180.0 * s * s + 120.0 * s * s * s) / (w * w)
        })
    }

    /// Planar Laplacian of the radial function `value(|y - P|)` at distance `r`.
    pub fn laplacian_2d(&self, r: f64) -> f64 {
        if r <= self.inner || r >= self.outer {
            0.0
        } else {
            self.d2(r) + self.d1(r) / r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn tri7_weights_and_degree() {
        let total: f64 = TRI7.iter().map(|(_, w)| w).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-14);
        // Reference triangle (0,0),(1,0),(0,1): integral of x^2 y^2 is 1/180, area 1/2.
        let q: f64 = TRI7
            .iter()
            .map(|(b, w)| w * 0.5 * (b[1] * b[1]) * (b[2] * b[2]))
            .sum();
        assert_relative_eq!(q, 1.0 / 180.0, epsilon = 1e-12);
    }

    #[test]
    fn cutoff_is_c2_blend() {
        let c = Cutoff::new(0.5, 1.0);
        assert_eq!(c.value(0.2), 1.0);
        assert_eq!(c.value(1.2), 0.0);
        assert_relative_eq!(c.value(0.75), 0.5, epsilon = 1e-14);
        let h = 1e-5;
        for &t in &[0.55, 0.7, 0.9] {
            let fd1 = (c.value(t + h) - c.value(t - h)) / (2.0 * h);
            let fd2 = (c.value(t + h) - 2.0 * c.value(t) + c.value(t - h)) / (h * h);
            assert!((fd1 - c.d1(t)).abs() < 1e-7);
            assert!((fd2 - c.d2(t)).abs() < 1e-3);
        }
        assert!(c.d2(0.5 + 1e-9).abs() < 1e-6 && c.d2(1.0 - 1e-9).abs() < 1e-6);
    }
}
