use nalgebra::{DMatrix, SymmetricEigen};

use super::point::SymTensorPoint;
use crate::error::{Error, Result};

/// Symmetric eigendecomposition of a symmetric matrix; eigenvalues unsorted.
pub(crate) fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    if m.nrows() == 1 {
        return (vec![m[(0, 0)]], DMatrix::identity(1, 1));
    }
    let e = SymmetricEigen::new(m.clone());
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// `V f(Λ) Vᵀ` for a symmetric matrix, symmetrized on return.
pub(crate) fn sym_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (ev, v) = sym_eigen(m);
    let n = m.nrows();
    let mut scaled = v.clone();
    for j in 0..n {
        let fj = f(ev[j]);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    symmetrize(&(scaled * v.transpose()))
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn trace_sq(m: &DMatrix<f64>) -> f64 {
    // tr(M²) = Σ m_ij m_ji
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += m[(i, j)] * m[(j, i)];
        }
    }
    s
}

pub(crate) fn trace_prod(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// Traceless part `m - (tr m / n) I`.
pub(crate) fn traceless(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let c = m.trace() / n as f64;
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] -= c;
    }
    out
}

/// Square root and inverse square root of a positive definite metric, used
/// to move g-symmetric quantities to symmetric ones and back.
#[derive(Debug, Clone)]
pub struct Congruence {
    sqrt: DMatrix<f64>,
    isqrt: DMatrix<f64>,
    det: f64,
}

impl Congruence {
    pub fn new(g: &SymTensorPoint) -> Result<Self> {
        if !g.is_positive_definite() {
            return Err(Error::invalid(format!("metric {g:?} not positive definite")));
        }
        let (ev, v) = sym_eigen(&g.to_matrix());
        if ev.iter().any(|&l| l <= 0.0) {
            return Err(Error::NumericalFailure(format!("nonpositive eigenvalue in {g:?}")));
        }
        let n = g.dim();
        let mut vs = v.clone();
        let mut vi = v.clone();
        for j in 0..n {
            let r = ev[j].sqrt();
            for i in 0..n {
                vs[(i, j)] *= r;
                vi[(i, j)] /= r;
            }
        }
        Ok(Self {
            sqrt: symmetrize(&(vs * v.transpose())),
            isqrt: symmetrize(&(vi * v.transpose())),
            det: ev.iter().product(),
        })
    }

    /// `g^{-1/2} h g^{-1/2}`, similar to `g⁻¹h`.
    pub fn to_s(&self, h: &SymTensorPoint) -> DMatrix<f64> {
        symmetrize(&(&self.isqrt * h.to_matrix() * &self.isqrt))
    }

    /// `g^{1/2} s g^{1/2}`.
    pub fn from_s(&self, s: &DMatrix<f64>) -> SymTensorPoint {
        SymTensorPoint::from_matrix(&(&self.sqrt * s * &self.sqrt)).expect("dimension")
    }

    pub fn det(&self) -> f64 {
        self.det
    }
}
