use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{CellMask, MetricField};
use crate::error::Result;
use crate::spd::{theta_bounds_with, SymTensorPoint, ThetaOptions};
use crate::sum::NeumaierSum;

/// Interval `[lower, upper]` for the integrated pointwise distance over a set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaInterval {
    pub lower: f64,
    pub upper: f64,
}

/// `∫_Y θ(g0(x), g1(x)) dx` bracketed by summing certified pointwise intervals.
pub fn theta_y(g0: &MetricField, g1: &MetricField, y: &CellMask) -> Result<ThetaInterval> {
    theta_y_with(g0, g1, y, &ThetaOptions::default())
}

pub fn theta_y_with(g0: &MetricField, g1: &MetricField, y: &CellMask, opts: &ThetaOptions) -> Result<ThetaInterval> {
    g0.grid.check_same(&g1.grid)?;
    g0.grid.check_same(&y.grid)?;
    let r = SymTensorPoint::identity(g0.grid.n);
    let parts: Vec<(f64, f64)> = (0..g0.cells.len())
        .into_par_iter()
        .map(|i| {
            if !y.bits[i] {
                return Ok((0.0, 0.0));
            }
            let tb = theta_bounds_with(&r, &g0.cells[i], &g1.cells[i], opts).map_err(|e| e.at_cell(i))?;
            Ok((tb.lower, tb.upper))
        })
        .collect::<Result<_>>()?;
    let (mut lo, mut hi) = (NeumaierSum::new(), NeumaierSum::new());
    for (l, u) in parts {
        lo.add(l);
        hi.add(u);
    }
    let cm = g0.grid.cell_measure;
    Ok(ThetaInterval {
        lower: lo.value() * cm,
        upper: hi.value() * cm,
    })
}
