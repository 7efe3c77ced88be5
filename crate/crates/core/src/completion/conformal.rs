use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    amenable_check, bits, cell_sum, group_cells, dist_upper_smallvol, smallvol_bound, AmenableClass, AmenableReport, CellMask,
    MetricField, MetricPath, ScalarField, TangentField, TensorField,
};
use crate::quad::integrate;
use crate::spd::{trace_pair, SymTensorPoint};

use super::sequence::SemiMetricField;

/// Slack allowed below the boundary value `λ = −4/n` before it counts as an error.
const BOUNDARY_SLACK: f64 = 1e-12;

fn check_factor(rho: &ScalarField, g: &MetricField) -> Result<()> {
    g.grid.check_same(&rho.grid)?;
    g.check_metric()?;
    for (i, &r) in rho.values.iter().enumerate() {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid(format!("cell {i}: conformal factor {r} not a finite nonnegative number")));
        }
    }
    Ok(())
}

/// `1 + (n/4)λ`, clamped to zero within slack of the boundary.
fn base(n: f64, lambda: f64, cell: usize) -> Result<f64> {
    let b = 1.0 + 0.25 * n * lambda;
    if !b.is_finite() || b < -BOUNDARY_SLACK {
        return Err(Error::invalid(format!("cell {cell}: λ = {lambda} below −4/n")));
    }
    Ok(b.max(0.0))
}

/// `ψ(λ) = (1 + (n/4)λ)^{4/n} g`; cells with `λ = −4/n` become zero.
pub fn psi(lambda: &ScalarField, g: &MetricField) -> Result<SemiMetricField> {
    g.grid.check_same(&lambda.grid)?;
    let n = g.grid.n as f64;
    let cells = (0..g.cells.len())
        .map(|i| Ok(g.cells[i].scale(base(n, lambda.values[i], i)?.powf(4.0 / n))))
        .collect::<Result<Vec<_>>>()?;
    TensorField::new(&g.grid, cells)
}

/// `ψ⁻¹(ρg) = (4/n)(ρ^{n/4} − 1)`.
pub fn psi_inv(rho: &ScalarField, g: &MetricField) -> Result<ScalarField> {
    check_factor(rho, g)?;
    let n = g.grid.n as f64;
    let values = rho.values.iter().map(|&r| 4.0 / n * (r.powf(0.25 * n) - 1.0)).collect();
    ScalarField::new(&g.grid, values)
}

/// Distance between `ρ0 g` and `ρ1 g` in the completed conformal orbit:
/// `(4/√n) ‖ρ1^{n/4} − ρ0^{n/4}‖_{L²(μ_g)}`.
pub fn conformal_distance(rho0: &ScalarField, rho1: &ScalarField, g: &MetricField) -> Result<f64> {
    check_factor(rho0, g)?;
    check_factor(rho1, g)?;
    let n = g.grid.n as f64;
    let cm = g.grid.cell_measure;
    let sq = cell_sum(g.cells.len(), |i| {
        let d = rho1.values[i].powf(0.25 * n) - rho0.values[i].powf(0.25 * n);
        Ok(d * d * g.cells[i].det().sqrt() * cm)
    })?;
    Ok(4.0 / n.sqrt() * sq.sqrt())
}

/// Nonnegative, finite, with finite `Σ ρ^{n/2}` against the cell measure.
pub fn orbit_completion_member(rho: &ScalarField) -> bool {
    let n = rho.grid.n as f64;
    if !rho.values.iter().all(|r| r.is_finite() && *r >= 0.0) {
        return false;
    }
    let mass: f64 = rho.values.iter().map(|r| r.powf(0.5 * n) * rho.grid.cell_measure).sum();
    mass.is_finite()
}

/// Point and velocity of `t ↦ ψ(κ + tΔ)` at one cell.
fn radial_cell(n: f64, g: &SymTensorPoint, kappa: f64, delta: f64, t: f64) -> (SymTensorPoint, SymTensorPoint) {
    let b = (1.0 + 0.25 * n * (kappa + t * delta)).max(0.0);
    (g.scale(b.powf(4.0 / n)), g.scale(delta * b.powf(4.0 / n - 1.0)))
}

/// Samples of the straight-in-λ path from `ρ0 g` to `ρ1 g` with exact tangents.
pub fn conformal_path(rho0: &ScalarField, rho1: &ScalarField, g: &MetricField, times: Vec<f64>) -> Result<MetricPath> {
    let k0 = psi_inv(rho0, g)?;
    let k1 = psi_inv(rho1, g)?;
    let n = g.grid.n as f64;
    let mut fields = Vec::with_capacity(times.len());
    let mut tangents = Vec::with_capacity(times.len());
    for &t in &times {
        let (pts, vels): (Vec<_>, Vec<_>) = (0..g.cells.len())
            .map(|i| radial_cell(n, &g.cells[i], k0.values[i], k1.values[i] - k0.values[i], t))
            .unzip();
        fields.push(TensorField::new(&g.grid, pts)?);
        tangents.push(TangentField::new(&g.grid, vels)?);
    }
    MetricPath::with_tangents(times, fields, tangents)
}

/// Length of the straight-in-λ path by adaptive quadrature of its speed.
pub fn radial_path_length(rho0: &ScalarField, rho1: &ScalarField, g: &MetricField, tol: f64) -> Result<f64> {
    let k0 = psi_inv(rho0, g)?;
    let k1 = psi_inv(rho1, g)?;
    let n = g.grid.n as f64;
    let cm = g.grid.cell_measure;
    let groups = group_cells(
        (0..g.cells.len())
            .filter(|&i| k1.values[i] != k0.values[i])
            .map(|i| ((bits(g.cells[i].upper()), k0.values[i].to_bits(), k1.values[i].to_bits()), i)),
    );
    let speed_sq = |t: f64| -> Result<f64> {
        cell_sum(groups.len(), |j| {
            let (i, mult) = groups[j];
            let (p, v) = radial_cell(n, &g.cells[i], k0.values[i], k1.values[i] - k0.values[i], t);
            if !p.is_positive_definite() {
                return Ok(0.0);
            }
            Ok(trace_pair(&p, &v, &v).map_err(|e| e.at_cell(i))? * p.det().sqrt() * cm * mult)
        })
    };
    // endpoints are never sampled, so zero factors at either end are admissible
    let failure = std::cell::RefCell::new(None);
    let len = integrate(
        &|t: f64| match speed_sq(t) {
            Ok(v) => v.max(0.0).sqrt(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        tol,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(len),
    }
}

/// Sharp mixture of two metrics and the small-volume distance bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskMix {
    /// `g1` on `E`, `g0` elsewhere.
    pub mixture: SemiMetricField,
    /// `C(n)(√Vol(E, g0) + √Vol(E, g1))`.
    pub bound: f64,
    pub envelope: AmenableReport,
}

/// `χ(M∖E) g0 + χ(E) g1`, after checking that `g0, g1` share a quasi-amenable envelope.
pub fn mask_mix(g0: &MetricField, g1: &MetricField, e: &CellMask) -> Result<MaskMix> {
    g0.grid.check_same(&g1.grid)?;
    g0.grid.check_same(&e.grid)?;
    g0.check_metric()?;
    g1.check_metric()?;
    let envelope = amenable_check(&[g0.clone(), g1.clone()])?;
    if envelope.class == AmenableClass::Neither {
        return Err(Error::invalid("metrics have no common quasi-amenable envelope"));
    }
    let cells = (0..g0.cells.len())
        .map(|i| if e.bits[i] { g1.cells[i] } else { g0.cells[i] })
        .collect();
    let mixture = TensorField::new(&g0.grid, cells)?;
    let bound = smallvol_bound(g0, g1, e)?;
    Ok(MaskMix {
        mixture,
        bound,
        envelope,
    })
}

/// Length of a smoothed shrink–cross–inflate path from `g0` to the mixture.
pub fn mask_mix_path_length(g0: &MetricField, mix: &MaskMix, e: &CellMask, s: f64, smooth_width: f64) -> Result<f64> {
    dist_upper_smallvol(g0, &mix.mixture, e, s, smooth_width)
}
