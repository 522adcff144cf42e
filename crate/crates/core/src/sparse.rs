//! Sparse assembly and direct solves backed by faer.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Square matrix in coordinate form; duplicate entries are summed.
#[derive(Debug, Clone)]
pub struct Coo {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Coo {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.entries.push((i, j, v));
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let t: Vec<_> = self
            .entries
            .iter()
            .map(|&(i, j, v)| Triplet::new(i, j, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &t)
            .map_err(|e| Error::Solver(format!("matrix construction: {e:?}")))
    }

    /// Relative residual ‖Ax − b‖ / max(‖b‖, tiny).
    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.matvec(x);
        let r: f64 = ax.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        r / nb.max(1e-300)
    }
}

const ITERATIVE_TOL: f64 = 1e-10;

/// Solves a symmetric positive definite system; sparse Cholesky with a
/// Jacobi-preconditioned conjugate-gradient fallback.
pub fn solve_spd(a: &Coo, b: &[f64]) -> Result<Vec<f64>> {
    if b.iter().all(|v| *v == 0.0) {
        return Ok(vec![0.0; a.n]);
    }
    let m = a.to_faer()?;
    match m.sp_cholesky(Side::Lower) {
        Ok(llt) => {
            let rhs = Mat::<f64>::from_fn(a.n, 1, |i, _| b[i]);
            let x = llt.solve(&rhs);
            Ok((0..a.n).map(|i| x[(i, 0)]).collect())
        }
        Err(e) => {
            log::warn!("sparse Cholesky failed ({e:?}); falling back to conjugate gradients");
            conjugate_gradient(a, b, ITERATIVE_TOL, 20 * a.n + 1000)
        }
    }
}

/// Solves a general square system with sparse LU and partial pivoting.
pub fn solve_lu(a: &Coo, b: &[f64]) -> Result<Vec<f64>> {
    let m = a.to_faer()?;
    let lu = m
        .sp_lu()
        .map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
    let rhs = Mat::<f64>::from_fn(a.n, 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    let x: Vec<f64> = (0..a.n).map(|i| x[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("non-finite solution (singular system)".into()));
    }
    Ok(x)
}

/// Eliminates prescribed values and solves the remaining SPD system.
pub fn solve_spd_with_fixed(a: &Coo, b: &[f64], fixed: &[(usize, f64)]) -> Result<Vec<f64>> {
    let n = a.n;
    let mut value = vec![None; n];
    for &(i, v) in fixed {
        value[i] = Some(v);
    }
    let mut map = vec![usize::MAX; n];
    let mut free = 0;
    for i in 0..n {
        if value[i].is_none() {
            map[i] = free;
            free += 1;
        }
    }
    let mut red = Coo::new(free);
    let mut rhs: Vec<f64> = (0..n).filter(|&i| value[i].is_none()).map(|i| b[i]).collect();
    for &(i, j, v) in &a.entries {
        if map[i] == usize::MAX {
            continue;
        }
        match value[j] {
            Some(g) => rhs[map[i]] -= v * g,
            None => red.add(map[i], map[j], v),
        }
    }
    let xr = if free == 0 { Vec::new() } else { solve_spd(&red, &rhs)? };
    Ok((0..n)
        .map(|i| value[i].unwrap_or_else(|| xr[map[i]]))
        .collect())
}

/// Reusable sparse factorization for repeated right-hand sides.
pub enum Factor {
    Cholesky(faer::sparse::linalg::solvers::Llt<usize, f64>, usize),
    Lu(faer::sparse::linalg::solvers::Lu<usize, f64>, usize),
}

impl Factor {
    /// Cholesky factorization of an SPD matrix.
    pub fn cholesky(a: &Coo) -> Result<Self> {
        let m = a.to_faer()?;
        m.sp_cholesky(Side::Lower)
            .map(|f| Factor::Cholesky(f, a.n))
            .map_err(|e| Error::Solver(format!("sparse Cholesky failed: {e:?}")))
    }

    /// LU factorization of a general square matrix.
    pub fn lu(a: &Coo) -> Result<Self> {
        let m = a.to_faer()?;
        m.sp_lu()
            .map(|f| Factor::Lu(f, a.n))
            .map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))
    }

    pub fn dim(&self) -> usize {
        match self {
            Factor::Cholesky(_, n) | Factor::Lu(_, n) => *n,
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        let x = match self {
            Factor::Cholesky(f, _) => f.solve(&rhs),
            Factor::Lu(f, _) => f.solve(&rhs),
        };
        let x: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite solution (singular system)".into()));
        }
        Ok(x)
    }
}

pub fn conjugate_gradient(a: &Coo, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n;
    let mut diag = vec![0.0; n];
    for &(i, j, v) in &a.entries {
        if i == j {
            diag[i] += v;
        }
    }
    let inv: Vec<f64> = diag.iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let nb = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= tol * nb {
            return Ok(x);
        }
        let ap = a.matvec(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = r.iter().zip(&inv).map(|(r, d)| r * d).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver(format!(
        "conjugate gradients did not reach relative residual {tol:e}"
    )))
}
