//! Upper bounds for distances between metrics that differ on a small set,
//! via paths that shrink the metric on the set, cross over, and re-inflate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{bits, group_cells, CellMask, MetricField, ScalarField};
use super::ops::volume;
use crate::error::{Error, Result};
use crate::quad::{integrate, small_volume_constant};
use crate::spd::trace_pair;
use crate::tolerances::EPS_LIN;

/// Signed depth of each cell relative to a mask boundary, in cell units:
/// positive inside, negative outside, `±0.5` on cells adjacent to the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskDepth {
    pub mask: CellMask,
    pub depth: Vec<f64>,
}

impl MaskDepth {
    pub fn new(mask: &CellMask) -> Self {
        let grid = &mask.grid;
        let inside: Vec<usize> = (0..grid.cell_count()).filter(|&i| mask.bits[i]).collect();
        let outside: Vec<usize> = (0..grid.cell_count()).filter(|&i| !mask.bits[i]).collect();
        let depth = (0..grid.cell_count())
            .into_par_iter()
            .map(|i| {
                let others = if mask.bits[i] { &outside } else { &inside };
                let d = others
                    .iter()
                    .map(|&j| grid.cell_distance(i, j))
                    .fold(f64::INFINITY, f64::min);
                let d = d - 0.5;
                if mask.bits[i] {
                    d
                } else {
                    -d
                }
            })
            .collect();
        Self {
            mask: mask.clone(),
            depth,
        }
    }

    /// `s` deep inside the mask, `1` well outside, quintic smoothstep across
    /// a band of half-width `width` around the boundary.
    pub fn mollifier(&self, s: f64, width: f64) -> ScalarField {
        let values = self
            .depth
            .iter()
            .map(|&d| {
                if d >= width {
                    s
                } else if d <= -width {
                    1.0
                } else {
                    let u = (d + width) / (2.0 * width);
                    let w = u * u * u * (u * (6.0 * u - 15.0) + 10.0);
                    1.0 + (s - 1.0) * w
                }
            })
            .collect();
        ScalarField {
            grid: self.mask.grid.clone(),
            values,
        }
    }
}

/// Lengths of the three legs of the shrink–cross–inflate path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallVolLength {
    pub s: f64,
    pub smooth_width: f64,
    pub shrink: f64,
    pub cross: f64,
    pub inflate: f64,
    pub total: f64,
}

/// Length of the leg `t ↦ (1 − t + t f) g` with tangent `(f − 1) g`, which has a
/// closed-form speed.
fn scaling_leg(g: &MetricField, f: &ScalarField, tol: f64) -> Result<f64> {
    let n = g.grid.n as f64;
    let cm = g.grid.cell_measure;
    let active: Vec<(f64, f64)> = g
        .cells
        .iter()
        .zip(&f.values)
        .filter(|(_, &fv)| fv != 1.0)
        .map(|(c, &fv)| (fv, c.det().sqrt() * cm))
        .collect();
    let active: Vec<(f64, f64)> = group_cells(active.iter().enumerate().map(|(i, &(fv, w))| ((fv.to_bits(), w.to_bits()), i)))
        .into_iter()
        .map(|(i, mult)| (active[i].0, active[i].1 * mult))
        .collect();
    if active.is_empty() {
        return Ok(0.0);
    }
    let speed = |t: f64| {
        let mut acc = crate::sum::NeumaierSum::new();
        for &(fv, w) in &active {
            let c = 1.0 - t + t * fv;
            acc.add(n * (fv - 1.0) * (fv - 1.0) * c.powf(0.5 * n - 2.0) * w);
        }
        acc.value().max(0.0).sqrt()
    };
    Ok(integrate(&speed, 0.0, 1.0, tol))
}

/// Length of the leg `t ↦ f((1 − t) g0 + t g1)`.
fn cross_leg(g0: &MetricField, g1: &MetricField, f: &ScalarField, tol: f64) -> Result<f64> {
    let n = g0.grid.n as f64;
    let cm = g0.grid.cell_measure;
    let active = group_cells(
        (0..g0.cells.len())
            .filter(|&i| g0.cells[i] != g1.cells[i])
            .map(|i| ((bits(g0.cells[i].upper()), bits(g1.cells[i].upper()), f.values[i].to_bits()), i)),
    );
    if active.is_empty() {
        return Ok(0.0);
    }
    let speed = |t: f64| {
        let parts: Vec<f64> = active
            .par_iter()
            .map(|&(i, mult)| {
                let d = g1.cells[i].sub(&g0.cells[i]);
                let m = g0.cells[i].lin_comb(1.0 - t, &g1.cells[i], t);
                let fv = f.values[i];
                trace_pair(&m, &d, &d).unwrap_or(f64::NAN) * m.det().sqrt() * fv.powf(0.5 * n) * cm * mult
            })
            .collect();
        let mut acc = crate::sum::NeumaierSum::new();
        acc.extend(parts);
        acc.value().max(0.0).sqrt()
    };
    Ok(integrate(&speed, 0.0, 1.0, tol))
}

fn check_support(g0: &MetricField, g1: &MetricField, e: &CellMask) -> Result<()> {
    g0.grid.check_same(&g1.grid)?;
    g0.grid.check_same(&e.grid)?;
    g0.check_metric()?;
    g1.check_metric()?;
    for i in 0..g0.cells.len() {
        if !e.bits[i] {
            let (a, b) = (&g0.cells[i], &g1.cells[i]);
            if a.max_abs_diff(b) > EPS_LIN * a.max_abs().max(1.0) {
                return Err(Error::invalid(format!("fields differ at cell {i} outside the mask")));
            }
        }
    }
    Ok(())
}

/// All three legs for a fixed mollifier parameter pair.
pub fn smallvol_path_lengths(
    g0: &MetricField,
    g1: &MetricField,
    depth: &MaskDepth,
    s: f64,
    smooth_width: f64,
) -> Result<SmallVolLength> {
    check_support(g0, g1, &depth.mask)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::invalid("shrink factor must lie in (0, 1]"));
    }
    if !(smooth_width >= 0.0) {
        return Err(Error::invalid("smoothing width must be nonnegative"));
    }
    let tol = 1e-11;
    let f = depth.mollifier(s, smooth_width);
    let shrink = scaling_leg(g0, &f, tol)?;
    let inflate = scaling_leg(g1, &f, tol)?;
    let cross = cross_leg(g0, g1, &f, tol)?;
    Ok(SmallVolLength {
        s,
        smooth_width,
        shrink,
        cross,
        inflate,
        total: shrink + cross + inflate,
    })
}

/// Length of the shrink–cross–inflate path from `g0` to `g1`, an upper
/// bound for their distance. `g0` and `g1` must agree off `e`.
pub fn dist_upper_smallvol(g0: &MetricField, g1: &MetricField, e: &CellMask, s: f64, smooth_width: f64) -> Result<f64> {
    check_support(g0, g1, e)?;
    if e.is_empty() {
        return Ok(0.0);
    }
    Ok(smallvol_path_lengths(g0, g1, &MaskDepth::new(e), s, smooth_width)?.total)
}

/// The limit bound `C(n)(√Vol(E, g0) + √Vol(E, g1))`.
pub fn smallvol_bound(g0: &MetricField, g1: &MetricField, e: &CellMask) -> Result<f64> {
    let c = small_volume_constant(g0.grid.n);
    Ok(c * (volume(g0, e)?.sqrt() + volume(g1, e)?.sqrt()))
}

/// Result of [`smallvol_sweep`]: every row and the minimizing one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallVolSweep {
    pub rows: Vec<SmallVolLength>,
    pub best: SmallVolLength,
    pub bound: f64,
}

/// Geometric sweep `s = s_max·ratio^k` over the given widths, keeping the shortest path.
pub fn smallvol_sweep(
    g0: &MetricField,
    g1: &MetricField,
    e: &CellMask,
    s_values: &[f64],
    widths: &[f64],
) -> Result<SmallVolSweep> {
    if s_values.is_empty() || widths.is_empty() {
        return Err(Error::invalid("empty sweep"));
    }
    check_support(g0, g1, e)?;
    let bound = smallvol_bound(g0, g1, e)?;
    let depth = MaskDepth::new(e);
    let mut rows = Vec::with_capacity(s_values.len() * widths.len());
    for &w in widths {
        for &s in s_values {
            rows.push(smallvol_path_lengths(g0, g1, &depth, s, w)?);
        }
    }
    let best = *rows
        .iter()
        .min_by(|a, b| a.total.total_cmp(&b.total))
        .expect("nonempty");
    Ok(SmallVolSweep { rows, best, bound })
}

/// Geometric sequence `start, start·ratio, …` with `count` entries.
pub fn geometric(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

