use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::grid::{bits, cell_sum, CellMask, MetricField, TangentField, TensorField};
use crate::error::{Error, Result};
use crate::spd::{
    ebin_log_point_with, trace_pair, trace_prod, traceless, Congruence, EbinTangent, SymTensorPoint,
};
use crate::tolerances::EPS_RANGE;

fn check3(g: &TensorField, h: &TensorField, k: &TensorField) -> Result<()> {
    g.grid.check_same(&h.grid)?;
    g.grid.check_same(&k.grid)
}

/// `Σ tr_g(hk) √det g · cell_measure`.
pub fn l2_inner(g: &MetricField, h: &TangentField, k: &TangentField) -> Result<f64> {
    check3(g, h, k)?;
    let cm = g.grid.cell_measure;
    cell_sum(g.cells.len(), |i| {
        let gi = &g.cells[i];
        Ok(trace_pair(gi, &h.cells[i], &k.cells[i]).map_err(|e| e.at_cell(i))? * gi.det().sqrt() * cm)
    })
}

pub fn l2_norm(g: &MetricField, h: &TangentField) -> Result<f64> {
    Ok(l2_inner(g, h, h)?.max(0.0).sqrt())
}

/// `Σ_{Y} √det g · cell_measure`; accepts semidefinite fields.
pub fn volume(g: &TensorField, y: &CellMask) -> Result<f64> {
    g.grid.check_same(&y.grid)?;
    let cm = g.grid.cell_measure;
    cell_sum(g.cells.len(), |i| {
        Ok(if y.bits[i] {
            g.cells[i].det().max(0.0).sqrt() * cm
        } else {
            0.0
        })
    })
}

pub fn total_volume(g: &TensorField) -> Result<f64> {
    volume(g, &CellMask::all(&g.grid))
}

fn tangents(g0: &MetricField, h: &TangentField) -> Result<Vec<EbinTangent>> {
    g0.grid.check_same(&h.grid)?;
    g0.cells
        .par_iter()
        .zip(&h.cells)
        .enumerate()
        .map(|(i, (g, k))| EbinTangent::new(g, k).map_err(|e| e.at_cell(i)))
        .collect()
}

/// Smallest pointwise existence bound and the cell attaining it.
pub fn exp_domain_sup(g0: &MetricField, h: &TangentField) -> Result<(f64, Option<usize>)> {
    let tans = tangents(g0, h)?;
    let mut best = (f64::INFINITY, None);
    for (i, t) in tans.iter().enumerate() {
        let s = t.domain_sup();
        if s < best.0 {
            best = (s, Some(i));
        }
    }
    Ok(best)
}

/// Field-level geodesic of the L² metric at time `t`.
pub fn exp_field(g0: &MetricField, h: &TangentField, t: f64) -> Result<MetricField> {
    let tans = tangents(g0, h)?;
    let cells = tans
        .par_iter()
        .enumerate()
        .map(|(i, tan)| tan.exp(t).map_err(|e| e.at_cell(i)))
        .collect::<Result<Vec<_>>>()?;
    TensorField::new(&g0.grid, cells)
}

/// Velocity of [`exp_field`] at time `t`.
pub fn exp_velocity_field(g0: &MetricField, h: &TangentField, t: f64) -> Result<TangentField> {
    let tans = tangents(g0, h)?;
    let cells = tans
        .par_iter()
        .enumerate()
        .map(|(i, tan)| tan.velocity(t).map_err(|e| e.at_cell(i)))
        .collect::<Result<Vec<_>>>()?;
    TensorField::new(&g0.grid, cells)
}

/// Inverse of [`exp_field`] at `t = 1`.
pub fn log_field(g0: &MetricField, g1: &MetricField) -> Result<TangentField> {
    log_field_with(g0, g1, EPS_RANGE)
}

pub fn log_field_with(g0: &MetricField, g1: &MetricField, eps_range: f64) -> Result<TangentField> {
    g0.grid.check_same(&g1.grid)?;
    // repeated cell pairs are solved once
    let mut slot_of = vec![0usize; g0.cells.len()];
    let mut reps: Vec<usize> = Vec::new();
    let mut seen: HashMap<(Vec<u64>, Vec<u64>), usize> = HashMap::new();
    for i in 0..g0.cells.len() {
        let key = (bits(g0.cells[i].upper()), bits(g1.cells[i].upper()));
        slot_of[i] = *seen.entry(key).or_insert_with(|| {
            reps.push(i);
            reps.len() - 1
        });
    }
    let solved = reps
        .par_iter()
        .map(|&i| ebin_log_point_with(&g0.cells[i], &g1.cells[i], eps_range).map_err(|e| e.at_cell(i)))
        .collect::<Result<Vec<_>>>()?;
    TensorField::new(&g0.grid, slot_of.iter().map(|&s| solved[s]).collect())
}

fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// `R_g(h, k) ℓ` at one point.
pub fn curvature_point(
    g: &SymTensorPoint,
    h: &SymTensorPoint,
    k: &SymTensorPoint,
    l: &SymTensorPoint,
) -> Result<SymTensorPoint> {
    let c = Congruence::new(g)?;
    let (hs, ks, ls) = (c.to_s(h), c.to_s(k), c.to_s(l));
    let n = g.dim() as f64;
    let (th, tk, tl) = (hs.trace(), ks.trace(), ls.trace());
    let (thl, tkl) = (trace_prod(&hs, &ls), trace_prod(&ks, &ls));
    let mut r = commutator(&commutator(&hs, &ks), &ls) * -0.25;
    r += &ks * (n / 16.0 * thl) - &hs * (n / 16.0 * tkl);
    r += &hs * (tk * tl / 16.0) - &ks * (th * tl / 16.0);
    let scalar = (th * tkl - tk * thl) / 16.0;
    for i in 0..g.dim() {
        r[(i, i)] += scalar;
    }
    Ok(c.from_s(&r))
}

/// Pointwise curvature `R_g(h, k) ℓ` as a tensor field.
pub fn curvature_tensor(
    g: &MetricField,
    h: &TangentField,
    k: &TangentField,
    l: &TangentField,
) -> Result<TangentField> {
    check3(g, h, k)?;
    g.grid.check_same(&l.grid)?;
    let cells = (0..g.cells.len())
        .into_par_iter()
        .map(|i| curvature_point(&g.cells[i], &h.cells[i], &k.cells[i], &l.cells[i]).map_err(|e| e.at_cell(i)))
        .collect::<Result<Vec<_>>>()?;
    TensorField::new(&g.grid, cells)
}

/// Integrand of the sectional curvature at one point, without the volume density.
pub fn sectional_density(g: &SymTensorPoint, h: &SymTensorPoint, k: &SymTensorPoint) -> Result<f64> {
    let c = Congruence::new(g)?;
    let a = traceless(&c.to_s(h));
    let b = traceless(&c.to_s(k));
    let n = g.dim() as f64;
    let comm = commutator(&a, &b);
    let tab = trace_prod(&a, &b);
    Ok(0.25 * trace_prod(&comm, &comm) + n / 16.0 * (tab * tab - trace_prod(&a, &a) * trace_prod(&b, &b)))
}

/// `K_g(h, k) = (R_g(h, k) k, h)_g`.
pub fn sectional_curvature(g: &MetricField, h: &TangentField, k: &TangentField) -> Result<f64> {
    check3(g, h, k)?;
    let cm = g.grid.cell_measure;
    cell_sum(g.cells.len(), |i| {
        let gi = &g.cells[i];
        Ok(sectional_density(gi, &h.cells[i], &k.cells[i]).map_err(|e| e.at_cell(i))? * gi.det().sqrt() * cm)
    })
}

/// Tensorial part of the connection at one point.
pub fn christoffel_point(g: &SymTensorPoint, h: &SymTensorPoint, k: &SymTensorPoint) -> Result<SymTensorPoint> {
    let c = Congruence::new(g)?;
    let (hs, ks) = (c.to_s(h), c.to_s(k));
    let mut r = (&hs * &ks + &ks * &hs) * -0.5;
    r += (&hs * ks.trace() + &ks * hs.trace()) * 0.25;
    let thk = trace_prod(&hs, &ks);
    for i in 0..g.dim() {
        r[(i, i)] -= 0.25 * thk;
    }
    Ok(c.from_s(&r))
}

/// `−½(h g⁻¹ k + k g⁻¹ h) + ¼((tr_g k) h + (tr_g h) k − tr_g(hk) g)`.
pub fn christoffel(g: &MetricField, h: &TangentField, k: &TangentField) -> Result<TangentField> {
    check3(g, h, k)?;
    let cells = (0..g.cells.len())
        .into_par_iter()
        .map(|i| christoffel_point(&g.cells[i], &h.cells[i], &k.cells[i]).map_err(|e| e.at_cell(i)))
        .collect::<Result<Vec<_>>>()?;
    TensorField::new(&g.grid, cells)
}

/// Max-norm of `g'' + Γ(g', g')` at time `t` along [`exp_field`], with
/// central differences of step `dt`.
pub fn geodesic_residual(g0: &MetricField, h: &TangentField, t: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0 && t - dt >= 0.0) {
        return Err(Error::invalid("need 0 ≤ t − dt"));
    }
    let gm = exp_field(g0, h, t - dt)?;
    let gc = exp_field(g0, h, t)?;
    let gp = exp_field(g0, h, t + dt)?;
    let mut worst = 0.0f64;
    for i in 0..gc.cells.len() {
        let d1 = gp.cells[i].sub(&gm.cells[i]).scale(0.5 / dt);
        let d2 = gp.cells[i]
            .lin_comb(1.0, &gc.cells[i], -2.0)
            .add(&gm.cells[i])
            .scale(1.0 / (dt * dt));
        let gamma = christoffel_point(&gc.cells[i], &d1, &d1)?;
        worst = worst.max(d2.add(&gamma).max_abs());
    }
    Ok(worst)
}
