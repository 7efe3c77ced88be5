use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spd::SymTensorPoint;
use crate::sum::NeumaierSum;

/// Cell layout of a periodic grid on the flat `n`-torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub dims: Vec<usize>,
    pub cell_measure: f64,
}

impl GridSpec {
    pub fn new(n: usize, dims: Vec<usize>, cell_measure: f64) -> Result<Self> {
        if n == 0 || n > crate::spd::MAX_DIM {
            return Err(Error::invalid(format!("dimension {n} unsupported")));
        }
        if dims.len() != n {
            return Err(Error::invalid(format!("{} axis counts for an {n}-torus", dims.len())));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::invalid("every axis needs at least one cell"));
        }
        if !(cell_measure > 0.0 && cell_measure.is_finite()) {
            return Err(Error::invalid("cell measure must be positive"));
        }
        Ok(Self { n, dims, cell_measure })
    }

    /// Grid on the torus of unit reference volume.
    pub fn unit_torus(n: usize, dims: Vec<usize>) -> Result<Self> {
        let cells: usize = dims.iter().product();
        Self::new(n, dims, 1.0 / cells.max(1) as f64)
    }

    pub fn cell_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn reference_volume(&self) -> f64 {
        self.cell_count() as f64 * self.cell_measure
    }

    /// Multi-index of a row-major cell index; the last axis varies fastest.
    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.n];
        for a in (0..self.n).rev() {
            c[a] = idx % self.dims[a];
            idx /= self.dims[a];
        }
        c
    }

    /// Periodic Euclidean distance between cell centres, in cell units.
    pub fn cell_distance(&self, i: usize, j: usize) -> f64 {
        let (ci, cj) = (self.coords(i), self.coords(j));
        let mut s = 0.0;
        for a in 0..self.n {
            let d = ci[a].abs_diff(cj[a]);
            let d = d.min(self.dims[a] - d) as f64;
            s += d * d;
        }
        s.sqrt()
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::invalid("grid mismatch"))
        }
    }
}

/// Compensated sum of `f(cell)` over all cells in row-major order; the
/// per-cell work may run in parallel.
pub(crate) fn cell_sum<F>(count: usize, f: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let parts: Vec<f64> = (0..count).into_par_iter().map(&f).collect::<Result<_>>()?;
    let mut acc = NeumaierSum::new();
    acc.extend(parts);
    Ok(acc.value())
}

/// Cells with bit-identical data, each with its multiplicity.
pub(crate) fn group_cells<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = (K, usize)>) -> Vec<(usize, f64)> {
    let mut seen: HashMap<K, usize> = HashMap::new();
    let mut groups: Vec<(usize, f64)> = Vec::new();
    for (k, i) in keys {
        match seen.get(&k) {
            Some(&slot) => groups[slot].1 += 1.0,
            None => {
                seen.insert(k, groups.len());
                groups.push((i, 1.0));
            }
        }
    }
    groups
}

pub(crate) fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

/// One flag per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMask {
    pub grid: GridSpec,
    #[serde(with = "bits01")]
    pub bits: Vec<bool>,
}

mod bits01 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(bits.iter().map(|&b| b as u8))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let v = Vec::<u8>::deserialize(d)?;
        Ok(v.into_iter().map(|b| b != 0).collect())
    }
}

impl CellMask {
    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[usize]) -> bool) -> Self {
        let bits = (0..grid.cell_count()).map(|i| f(&grid.coords(i))).collect();
        Self { grid: grid.clone(), bits }
    }

    pub fn all(grid: &GridSpec) -> Self {
        Self::from_fn(grid, |_| true)
    }

    pub fn none(grid: &GridSpec) -> Self {
        Self::from_fn(grid, |_| false)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a && b)
    }

    pub fn complement(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    fn zip(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid.clone(),
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

/// One real value per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.cell_count()],
        }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[usize]) -> f64) -> Self {
        Self {
            grid: grid.clone(),
            values: (0..grid.cell_count()).map(|i| f(&grid.coords(i))).collect(),
        }
    }

    pub fn new(grid: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::invalid("value count does not match grid"));
        }
        Ok(Self { grid: grid.clone(), values })
    }
}

/// A symmetric tensor per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorField {
    pub grid: GridSpec,
    pub cells: Vec<SymTensorPoint>,
}

/// Positive definite tensor field.
pub type MetricField = TensorField;
/// Symmetric tensor field seen as a tangent vector.
pub type TangentField = TensorField;

impl TensorField {
    pub fn new(grid: &GridSpec, cells: Vec<SymTensorPoint>) -> Result<Self> {
        if cells.len() != grid.cell_count() {
            return Err(Error::invalid("cell count does not match grid"));
        }
        if let Some(i) = cells.iter().position(|c| c.dim() != grid.n) {
            return Err(Error::invalid(format!("cell {i} has wrong dimension")));
        }
        Ok(Self { grid: grid.clone(), cells })
    }

    pub fn constant(grid: &GridSpec, p: SymTensorPoint) -> Self {
        assert_eq!(p.dim(), grid.n, "tensor dimension");
        Self {
            grid: grid.clone(),
            cells: vec![p; grid.cell_count()],
        }
    }

    pub fn identity(grid: &GridSpec) -> Self {
        Self::constant(grid, SymTensorPoint::identity(grid.n))
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self::constant(grid, SymTensorPoint::zeros(grid.n))
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[usize]) -> SymTensorPoint) -> Self {
        let cells: Vec<_> = (0..grid.cell_count()).map(|i| f(&grid.coords(i))).collect();
        Self::new(grid, cells).expect("tensor dimension")
    }

    pub fn map(&self, f: impl Fn(&SymTensorPoint) -> SymTensorPoint) -> Self {
        Self {
            grid: self.grid.clone(),
            cells: self.cells.iter().map(f).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&SymTensorPoint, &SymTensorPoint) -> SymTensorPoint) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|p| p.scale(c))
    }

    /// Pointwise product with a scalar field.
    pub fn scale_by(&self, f: &ScalarField) -> Result<Self> {
        self.grid.check_same(&f.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            cells: self.cells.iter().zip(&f.values).map(|(p, &c)| p.scale(c)).collect(),
        })
    }

    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.zip_map(other, |x, y| x.lin_comb(a, y, b))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.cells
            .iter()
            .zip(&other.cells)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    pub fn max_abs(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    /// Error naming the first cell that is not positive definite.
    pub fn check_metric(&self) -> Result<()> {
        match self.cells.iter().position(|c| !c.is_positive_definite()) {
            None => Ok(()),
            Some(i) => Err(Error::invalid(format!("cell {i} is not positive definite"))),
        }
    }

    pub fn check_semimetric(&self) -> Result<()> {
        match self.cells.iter().position(|c| !c.is_positive_semidefinite()) {
            None => Ok(()),
            Some(i) => Err(Error::invalid(format!("cell {i} is not positive semidefinite"))),
        }
    }

    /// Cells whose determinant in reference coordinates is below `eps_det`.
    pub fn degenerate_mask(&self, eps_det: f64) -> CellMask {
        CellMask {
            grid: self.grid.clone(),
            bits: self.cells.iter().map(|c| !(c.det() >= eps_det)).collect(),
        }
    }

    /// Cells where the two fields differ by more than `tol` in max-norm.
    pub fn carrier_of_difference(&self, other: &Self, tol: f64) -> CellMask {
        CellMask {
            grid: self.grid.clone(),
            bits: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(a, b)| a.max_abs_diff(b) > tol * a.max_abs().max(b.max_abs()).max(1.0))
                .collect(),
        }
    }
}
