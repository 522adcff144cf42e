//! Right-hand sides: plate source depending on the in-plane variable only and
//! rod sources depending on the axial variable only.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlateSource {
    /// f(y) = value.
    Constant { value: f64 },
    /// f(y) = value + gradient . y.
    Linear { value: f64, gradient: [f64; 2] },
    /// f(y) = sum_k coeffs[k] |y|^k.
    Radial { coeffs: Vec<f64> },
}

impl Default for PlateSource {
    fn default() -> Self {
        PlateSource::Constant { value: 1.0 }
    }
}

impl PlateSource {
    pub fn value(&self, y: [f64; 2]) -> f64 {
        match self {
            PlateSource::Constant { value } => *value,
            PlateSource::Linear { value, gradient } => value + gradient[0] * y[0] + gradient[1] * y[1],
            PlateSource::Radial { coeffs } => horner(coeffs, y[0].hypot(y[1])),
        }
    }

    /// Radial profile, when the source is rotationally symmetric about the
    /// origin.
    pub fn radial(&self) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        match self {
            PlateSource::Constant { value } => {
                let v = *value;
                Some(Box::new(move |_| v))
            }
            PlateSource::Linear { value, gradient } if *gradient == [0.0, 0.0] => {
                let v = *value;
                Some(Box::new(move |_| v))
            }
            PlateSource::Radial { coeffs } => {
                let c = coeffs.clone();
                Some(Box::new(move |r| horner(&c, r)))
            }
            _ => None,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match self {
            PlateSource::Constant { value } => PlateSource::Constant { value: s * value },
            PlateSource::Linear { value, gradient } => {
                PlateSource::Linear { value: s * value, gradient: [s * gradient[0], s * gradient[1]] }
            }
            PlateSource::Radial { coeffs } => PlateSource::Radial { coeffs: coeffs.iter().map(|c| s * c).collect() },
        }
    }
}

/// f(z) = sum_k coeffs[k] z^k along the rod.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RodSource {
    #[serde(default)]
    pub coeffs: Vec<f64>,
}

impl RodSource {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(v: f64) -> Self {
        Self { coeffs: vec![v] }
    }

    pub fn value(&self, z: f64) -> f64 {
        horner(&self.coeffs, z)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| s * c).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Sources {
    #[serde(default)]
    pub plate: PlateSource,
    /// One entry per rod; missing entries are zero.
    #[serde(default)]
    pub rods: Vec<RodSource>,
}

impl Sources {
    pub fn rod(&self, j: usize) -> RodSource {
        self.rods.get(j).cloned().unwrap_or_default()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { plate: self.plate.scaled(s), rods: self.rods.iter().map(|r| r.scaled(s)).collect() }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        assert_eq!(PlateSource::default().value([0.3, 0.4]), 1.0);
        let r = PlateSource::Radial { coeffs: vec![0.0, 0.0, 1.0] };
        assert!((r.value([0.3, 0.4]) - 0.25).abs() < 1e-15);
        assert!((r.radial().unwrap()(0.5) - 0.25).abs() < 1e-15);
        let l = PlateSource::Linear { value: 0.0, gradient: [1.0, 0.0] };
        assert!(l.radial().is_none());
        assert_eq!(RodSource { coeffs: vec![1.0, 2.0] }.value(0.5), 2.0);
        assert!(Sources::default().rod(3).is_zero());
    }
}
