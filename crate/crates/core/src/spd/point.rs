use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::EPS_EIG;

/// Largest supported tensor dimension.
pub const MAX_DIM: usize = 4;
const MAX_PACKED: usize = MAX_DIM * (MAX_DIM + 1) / 2;

/// Number of stored entries of a symmetric `n x n` tensor.
pub const fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// A symmetric `n x n` tensor at one point, stored as its upper triangle (row-major).
///
/// The same type carries metrics, semimetrics and tangent vectors; which
/// invariants hold is decided by the caller via [`is_positive_definite`](Self::is_positive_definite)
/// and [`is_positive_semidefinite`](Self::is_positive_semidefinite).
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PackedRepr", into = "PackedRepr")]
pub struct SymTensorPoint {
    n: usize,
    data: [f64; MAX_PACKED],
}

#[derive(Serialize, Deserialize)]
struct PackedRepr {
    n: usize,
    upper: Vec<f64>,
}

impl TryFrom<PackedRepr> for SymTensorPoint {
    type Error = Error;
    fn try_from(r: PackedRepr) -> Result<Self> {
        SymTensorPoint::from_upper(r.n, &r.upper)
    }
}

impl From<SymTensorPoint> for PackedRepr {
    fn from(p: SymTensorPoint) -> Self {
        PackedRepr {
            n: p.n,
            upper: p.upper().to_vec(),
        }
    }
}

impl SymTensorPoint {
    fn check_dim(n: usize) -> Result<()> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::invalid(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        Ok(())
    }

    /// Build from the upper triangle, row-major (`n(n+1)/2` values).
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        Self::check_dim(n)?;
        if upper.len() != packed_len(n) {
            return Err(Error::invalid(format!(
                "expected {} entries for n = {n}, got {}",
                packed_len(n),
                upper.len()
            )));
        }
        let mut data = [0.0; MAX_PACKED];
        data[..upper.len()].copy_from_slice(upper);
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Self::check_dim(n).expect("dimension");
        Self {
            n,
            data: [0.0; MAX_PACKED],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut p = Self::zeros(n);
        for i in 0..n {
            p.set(i, i, c);
        }
        p
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::check_dim(n)?;
        let mut p = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            p.set(i, i, v);
        }
        Ok(p)
    }

    /// Symmetric part of a square matrix.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::invalid("matrix not square"));
        }
        Self::check_dim(n)?;
        let mut p = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                p.set(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        Ok(p)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn upper(&self) -> &[f64] {
        &self.data[..packed_len(self.n)]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[index(self.n, i, j)] = v;
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn is_finite(&self) -> bool {
        self.upper().iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.upper().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm distance between two tensors of equal dimension.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.upper()
            .iter()
            .zip(other.upper())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = *self;
        for v in &mut out.data[..packed_len(self.n)] {
            *v = f(*v);
        }
        out
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        debug_assert_eq!(self.n, other.n);
        let mut out = *self;
        for (o, (x, y)) in out.data[..packed_len(self.n)]
            .iter_mut()
            .zip(self.upper().iter().zip(other.upper()))
        {
            *o = a * x + b * y;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn det(&self) -> f64 {
        match self.n {
            1 => self.data[0],
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(0, 1),
            _ => self.to_matrix().determinant(),
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = if self.n == 1 {
            vec![self.data[0]]
        } else {
            SymmetricEigen::new(self.to_matrix()).eigenvalues.iter().copied().collect()
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Positive definite in the Cholesky sense: every pivot is positive.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_finite() {
            return false;
        }
        let n = self.n;
        let mut l = [0.0f64; MAX_DIM * MAX_DIM];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * MAX_DIM + k] * l[j * MAX_DIM + k];
            }
            if !(d > 0.0) {
                return false;
            }
            let d = d.sqrt();
            l[j * MAX_DIM + j] = d;
            for i in j + 1..n {
                let mut v = self.get(i, j);
                for k in 0..j {
                    v -= l[i * MAX_DIM + k] * l[j * MAX_DIM + k];
                }
                l[i * MAX_DIM + j] = v / d;
            }
        }
        true
    }

    /// All eigenvalues above `-EPS_EIG * lambda_max`.
    pub fn is_positive_semidefinite(&self) -> bool {
        if !self.is_finite() {
            return false;
        }
        let ev = self.eigenvalues();
        let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ev[0] > -EPS_EIG * scale
    }
}

#[inline]
fn index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    debug_assert!(j < n);
    i * n - i * (i + 1) / 2 + j
}

impl fmt::Debug for SymTensorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym{}{:?}", self.n, self.upper())
    }
}
