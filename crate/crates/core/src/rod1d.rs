//! One-dimensional rod limit problems -γ U'' = f on (0, l) with U(l) = 0.
//!
//! Sources are polynomials, so every profile is stored in closed form: a
//! polynomial particular part plus a linear part (1 - z/l) whose coefficient
//! may carry the undetermined constant A0 of the alpha = 0 regime.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::RodSource;
use crate::matching::MatchingConvention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RodRegime {
    /// Flux prescribed at z = 0 (contrasting rods).
    Alpha1NeumannEnd,
    /// Homogeneous regime, value at z = 0 depending on ln h and A0.
    Alpha0,
    /// Value prescribed at z = 0.
    DirichletEnd,
}

/// Polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Poly {
        let mut c = vec![0.0];
        c.extend(self.0.iter().enumerate().map(|(k, a)| a / (k + 1) as f64));
        Poly(c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly(Vec::new());
        }
        let mut c = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly(c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly((0..n).map(|k| self.0.get(k).unwrap_or(&0.0) + other.0.get(k).unwrap_or(&0.0)).collect())
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| s * c).collect())
    }
}

/// Closed-form rod profile U(z) = P(z) + (known + a0_coeff A0)(1 - z/l).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RodProfile {
    pub l: f64,
    pub gamma: f64,
    pub area: f64,
    pub regime: RodRegime,
    particular: Poly,
    known: f64,
    a0_coeff: f64,
    a0: Option<f64>,
}

impl RodProfile {
    pub fn zero(l: f64, gamma: f64, area: f64, regime: RodRegime) -> Self {
        Self { l, gamma, area, regime, particular: Poly::default(), known: 0.0, a0_coeff: 0.0, a0: None }
    }

    /// The linear profile value (1 - z/l).
    pub fn linear(l: f64, gamma: f64, area: f64, value_at_0: f64, regime: RodRegime) -> Self {
        Self { known: value_at_0, ..Self::zero(l, gamma, area, regime) }
    }

    fn linear_coeff(&self) -> Result<f64> {
        if self.a0_coeff == 0.0 {
            return Ok(self.known);
        }
        match self.a0 {
            Some(a) => Ok(self.known + self.a0_coeff * a),
            None => Err(Error::UnknownA0),
        }
    }

    pub fn has_unknown_a0(&self) -> bool {
        self.a0_coeff != 0.0 && self.a0.is_none()
    }

    /// Supplies the constant A0.
    pub fn with_a0(&self, a0: f64) -> Self {
        Self { a0: Some(a0), ..self.clone() }
    }

    pub fn value(&self, z: f64) -> Result<f64> {
        if z == self.l {
            // U(l) = 0 by construction; skip the roundoff of the expansion.
            self.linear_coeff()?;
            return Ok(0.0);
        }
        Ok(self.particular.eval(z) + self.linear_coeff()? * (1.0 - z / self.l))
    }

    pub fn derivative(&self, z: f64) -> Result<f64> {
        Ok(self.particular.derivative().eval(z) - self.linear_coeff()? / self.l)
    }

    /// Axial flux -γ|ω| U'(0).
    pub fn flux_at_0(&self) -> Result<f64> {
        Ok(-self.gamma * self.area * self.derivative(0.0)?)
    }

    /// Residual of -γ U'' - f at z.
    pub fn residual(&self, f: &RodSource, z: f64) -> f64 {
        -self.gamma * self.particular.derivative().derivative().eval(z) - f.value(z)
    }

    /// Profile plus `other` (same rod).
    pub fn plus(&self, other: &RodProfile) -> Result<Self> {
        if self.l != other.l {
            return Err(Error::InvalidInput("profiles on different rods".into()));
        }
        let a0 = match (self.a0, other.a0) {
            (Some(a), Some(b)) if a != b => return Err(Error::InvalidInput("conflicting A0 values".into())),
            (a, b) => a.or(b),
        };
        Ok(Self {
            particular: self.particular.add(&other.particular),
            known: self.known + other.known,
            a0_coeff: self.a0_coeff + other.a0_coeff,
            a0,
            ..self.clone()
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { particular: self.particular.scale(s), known: s * self.known, a0_coeff: s * self.a0_coeff, ..self.clone() }
    }

    /// CSV samples z, U, U'.
    pub fn write_csv<W: Write>(&self, w: W, samples: usize) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["z", "U", "dU"])?;
        for k in 0..=samples {
            let z = self.l * k as f64 / samples as f64;
            wr.write_record([z.to_string(), self.value(z)?.to_string(), self.derivative(z)?.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Solution of -γU'' = f, U'(0) = 0, U(l) = 0:
/// U(z) = γ⁻¹[(l - z)∫₀^z f + ∫_z^l (l - t) f(t) dt].
pub fn solve_hash(l: f64, gamma: f64, area: f64, f: &RodSource) -> RodProfile {
    let fp = Poly(f.coeffs.clone());
    let big_f = fp.antiderivative();
    let q = Poly(vec![l, -1.0]).mul(&fp).antiderivative();
    let ql = q.eval(l);
    let p = Poly(vec![l, -1.0]).mul(&big_f).add(&q.scale(-1.0)).add(&Poly(vec![ql])).scale(1.0 / gamma);
    RodProfile { particular: p, ..RodProfile::zero(l, gamma, area, RodRegime::Alpha1NeumannEnd) }
}

/// Rod term for contrasting rods: U⁰ = U^# + s A_j (l - z)/(γ|ω|), where the
/// flux-balanced convention takes s = -1 (so -γ|ω|U'(0) = -A_j) and the
/// published form takes s = +1.
pub fn assemble_u0_alpha1(hash: &RodProfile, a_j: f64, conv: MatchingConvention) -> RodProfile {
    let s = conv.rod_sign();
    let extra = RodProfile::linear(hash.l, hash.gamma, hash.area, s * a_j * hash.l / (hash.gamma * hash.area), hash.regime);
    RodProfile { regime: RodRegime::Alpha1NeumannEnd, ..hash.plus(&extra).expect("same rod") }
}

/// Solution of -γU'' = f, U(0) = left_value, U(l) = 0.
pub fn solve_dirichlet_ends(l: f64, gamma: f64, area: f64, f: &RodSource, left_value: f64) -> RodProfile {
    let hash = solve_hash(l, gamma, area, f);
    let u0 = hash.particular.eval(0.0);
    RodProfile {
        particular: hash.particular.add(&Poly(vec![-u0, u0 / l])),
        known: left_value,
        regime: RodRegime::DirichletEnd,
        ..hash
    }
}

/// Homogeneous-regime rod term
/// U⁰(z) = (A0 + a0 γ|ω|(2π l)⁻¹ ln h)(1 - z/l) + U^#(z),
/// with U^# the Dirichlet-end profile. A0 may be left unknown.
pub fn assemble_u0_alpha0(a0_const: Option<f64>, a0: f64, ln_h: f64, hash_dirichlet: &RodProfile) -> RodProfile {
    let r = hash_dirichlet;
    let shift = a0 * r.gamma * r.area * ln_h / (2.0 * std::f64::consts::PI * r.l);
    RodProfile {
        known: r.known + shift,
        a0_coeff: r.a0_coeff + 1.0,
        a0: a0_const,
        regime: RodRegime::Alpha0,
        ..r.clone()
    }
}

/// Leading homogeneous-regime term U^{-1}(z) = a0 (1 - z/l).
pub fn leading_alpha0(l: f64, gamma: f64, area: f64, a0: f64) -> RodProfile {
    RodProfile::linear(l, gamma, area, a0, RodRegime::Alpha0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn quad_hash0(l: f64, gamma: f64, f: impl Fn(f64) -> f64) -> f64 {
        crate::quadrature::integrate(|z| (l - z) * f(z), 0.0, l) / gamma
    }

    #[test]
    fn hash_examples() {
        let u = solve_hash(1.0, 1.0, PI, &RodSource::constant(1.0));
        assert_relative_eq!(u.value(0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(u.value(1.0).unwrap(), 0.0);
        let z = solve_hash(1.0, 1.0, PI, &RodSource::zero());
        assert_eq!(z.value(0.3).unwrap(), 0.0);
        let lin = solve_hash(1.0, 2.0, PI, &RodSource { coeffs: vec![0.0, 1.0] });
        let oracle = quad_hash0(1.0, 2.0, |z| z);
        assert_relative_eq!(oracle, 1.0 / 12.0, epsilon = 1e-14);
        assert_relative_eq!(lin.value(0.0).unwrap(), oracle, epsilon = 1e-14);
        assert_eq!(lin.derivative(0.0).unwrap(), 0.0);
    }

    #[test]
    fn alpha1_published_examples() {
        let conv = MatchingConvention::AsPublished;
        let zero = solve_hash(1.0, 1.0, PI, &RodSource::zero());
        let u = assemble_u0_alpha1(&zero, -PI, conv);
        for z in [0.0, 0.3, 1.0] {
            assert_relative_eq!(u.value(z).unwrap(), -(1.0 - z), epsilon = 1e-14);
        }
        assert_relative_eq!(u.flux_at_0().unwrap(), -PI, epsilon = 1e-14);
        let one = solve_hash(1.0, 1.0, PI, &RodSource::constant(1.0));
        assert_relative_eq!(assemble_u0_alpha1(&one, PI, conv).value(0.0).unwrap(), 1.5, epsilon = 1e-14);
        assert_eq!(assemble_u0_alpha1(&one, 0.0, conv), one);
    }

    #[test]
    fn alpha1_flux_balanced_sign() {
        let zero = solve_hash(1.0, 1.0, PI, &RodSource::zero());
        let u = assemble_u0_alpha1(&zero, -PI, MatchingConvention::FluxBalanced);
        // Flux -A_j = π leaves through the rod: U decreases from +1 to 0.
        assert_relative_eq!(u.value(0.0).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(u.flux_at_0().unwrap(), PI, epsilon = 1e-14);
    }

    #[test]
    fn alpha0_examples() {
        let zero_d = solve_dirichlet_ends(1.0, 1.0, PI, &RodSource::zero(), 0.0);
        let hashd = solve_dirichlet_ends(1.0, 1.0, PI, &RodSource::constant(1.0), 0.2);
        let u = assemble_u0_alpha0(Some(0.0), 0.0, -3.0, &hashd);
        assert_relative_eq!(u.value(0.4).unwrap(), hashd.value(0.4).unwrap(), epsilon = 1e-15);
        let u = assemble_u0_alpha0(Some(1.0), 0.0, -3.0, &zero_d);
        assert_relative_eq!(u.value(0.25).unwrap(), 0.75, epsilon = 1e-15);
        let u = assemble_u0_alpha0(Some(0.0), 1.0, -1.0, &zero_d);
        assert_relative_eq!(u.value(0.0).unwrap(), -0.5, epsilon = 1e-15);
        let sym = assemble_u0_alpha0(None, 1.0, -1.0, &zero_d);
        assert!(matches!(sym.value(0.0), Err(Error::UnknownA0)));
        assert_relative_eq!(sym.with_a0(0.5).value(0.0).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dirichlet_examples() {
        let u = solve_dirichlet_ends(2.0, 1.0, PI, &RodSource::zero(), 3.0);
        assert_relative_eq!(u.value(0.5).unwrap(), 3.0 * 0.75, epsilon = 1e-15);
        let u = solve_dirichlet_ends(1.0, 1.0, PI, &RodSource::constant(1.0), 0.0);
        assert_relative_eq!(u.value(0.5).unwrap(), 0.125, epsilon = 1e-15);
        assert_eq!(u.value(0.0).unwrap(), 0.0);
        let z = solve_dirichlet_ends(1.0, 1.0, PI, &RodSource::zero(), 0.0);
        assert_eq!(z.value(0.7).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn profiles_satisfy_the_ode(c0 in -3.0..3.0f64, c1 in -3.0..3.0f64, c2 in -3.0..3.0f64,
                                    l in 0.2..3.0f64, gamma in 0.1..5.0f64, a in -5.0..5.0f64, v in -2.0..2.0f64) {
            let f = RodSource { coeffs: vec![c0, c1, c2] };
            let h = solve_hash(l, gamma, 1.3, &f);
            let u = assemble_u0_alpha1(&h, a, MatchingConvention::FluxBalanced);
            prop_assert!(u.value(l).unwrap().abs() < 1e-12);
            prop_assert!((u.flux_at_0().unwrap() + a).abs() < 1e-12 * (1.0 + a.abs()));
            for k in 0..5 {
                let z = l * k as f64 / 4.0;
                prop_assert!(u.residual(&f, z).abs() < 1e-9 * (1.0 + c0.abs() + c1.abs() + c2.abs()));
            }
            let d = solve_dirichlet_ends(l, gamma, 1.3, &f, v);
            prop_assert!((d.value(0.0).unwrap() - v).abs() < 1e-12);
            prop_assert!(d.value(l).unwrap().abs() < 1e-12);
            // U^#(0) = γ⁻¹∫(l - z) f.
            let oracle = quad_hash0(l, gamma, |z| f.value(z));
            prop_assert!((h.value(0.0).unwrap() - oracle).abs() < 1e-10 * (1.0 + oracle.abs()));
        }

        #[test]
        fn linear_in_data(c0 in -3.0..3.0f64, a in -5.0..5.0f64, s in -3.0..3.0f64) {
            let f = RodSource { coeffs: vec![c0, 1.0] };
            let u = assemble_u0_alpha1(&solve_hash(1.0, 2.0, 1.0, &f), a, MatchingConvention::FluxBalanced);
            let us = assemble_u0_alpha1(&solve_hash(1.0, 2.0, 1.0, &f.scaled(s)), s * a, MatchingConvention::FluxBalanced);
            for z in [0.0, 0.4, 0.9] {
                prop_assert!((us.value(z).unwrap() - s * u.value(z).unwrap()).abs() < 1e-12 * (1.0 + s.abs() * 10.0));
            }
        }
    }
}
