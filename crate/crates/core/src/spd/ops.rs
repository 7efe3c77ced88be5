use nalgebra::DMatrix;

use super::linalg::{sym_eigen, Congruence};
use super::point::SymTensorPoint;
use crate::error::{Error, Result};

fn check_finite(p: &SymTensorPoint, what: &str) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} has non-finite entries")))
    }
}

fn check_same_dim(a: &SymTensorPoint, b: &SymTensorPoint) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::invalid(format!("dimension mismatch {} vs {}", a.dim(), b.dim())))
    }
}

/// Extreme eigenvalues of `g_ref⁻¹ a`.
pub fn eig_extremes(g_ref: &SymTensorPoint, a: &SymTensorPoint) -> Result<(f64, f64)> {
    check_finite(g_ref, "reference")?;
    check_finite(a, "argument")?;
    check_same_dim(g_ref, a)?;
    let c = Congruence::new(g_ref)?;
    let (ev, _) = sym_eigen(&c.to_s(a));
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Lower Cholesky factor with an error on failure.
fn cholesky_l(g: &SymTensorPoint) -> Result<DMatrix<f64>> {
    check_finite(g, "metric")?;
    g.to_matrix()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::invalid(format!("metric {g:?} not positive definite")))
}

/// `L⁻¹ h L⁻ᵀ` for `g = L Lᵀ`.
fn whiten(l: &DMatrix<f64>, h: &SymTensorPoint) -> DMatrix<f64> {
    let x = l.solve_lower_triangular(&h.to_matrix()).expect("nonsingular factor");
    l.solve_lower_triangular(&x.transpose()).expect("nonsingular factor")
}

/// `tr(g⁻¹ h g⁻¹ k)`.
pub fn trace_pair(g: &SymTensorPoint, h: &SymTensorPoint, k: &SymTensorPoint) -> Result<f64> {
    check_same_dim(g, h)?;
    check_same_dim(g, k)?;
    let l = cholesky_l(g)?;
    let x = whiten(&l, h);
    if h == k {
        return Ok(x.iter().map(|v| v * v).sum());
    }
    let y = whiten(&l, k);
    Ok(x.iter().zip(y.iter()).map(|(a, b)| a * b).sum())
}

/// `tr_g(h) = tr(g⁻¹ h)`.
pub fn trace_g(g: &SymTensorPoint, h: &SymTensorPoint) -> Result<f64> {
    check_same_dim(g, h)?;
    let l = cholesky_l(g)?;
    Ok(whiten(&l, h).trace())
}

/// `det(g0⁻¹ g1)`.
pub fn det_ratio(g0: &SymTensorPoint, g1: &SymTensorPoint) -> Result<f64> {
    check_same_dim(g0, g1)?;
    check_finite(g1, "argument")?;
    let l = cholesky_l(g0)?;
    let d0: f64 = (0..g0.dim()).map(|i| l[(i, i)] * l[(i, i)]).product();
    Ok(g1.det() / d0)
}

/// The scalar product `tr_base(hk) · det(g_ref⁻¹ base)`.
pub fn inner0(
    g_ref: &SymTensorPoint,
    base: &SymTensorPoint,
    h: &SymTensorPoint,
    k: &SymTensorPoint,
) -> Result<f64> {
    Ok(trace_pair(base, h, k)? * det_ratio(g_ref, base)?)
}

/// `√det(g0⁻¹ g1)`, the density of `μ_{g1}` against `μ_{g0}`.
pub fn sqrt_det_ratio(g0: &SymTensorPoint, g1: &SymTensorPoint) -> Result<f64> {
    if !g1.is_positive_semidefinite() {
        return Err(Error::invalid(format!("{g1:?} not positive semidefinite")));
    }
    Ok(det_ratio(g0, g1)?.max(0.0).sqrt())
}

/// Split `h` into its `g`-traceless part and its pure-trace part `(tr_g h / n) g`.
pub fn split_traceless(
    g: &SymTensorPoint,
    h: &SymTensorPoint,
) -> Result<(SymTensorPoint, SymTensorPoint)> {
    let tr = trace_g(g, h)?;
    let hc = g.scale(tr / g.dim() as f64);
    Ok((h.sub(&hc), hc))
}

/// `g0 exp(t g0⁻¹ h)`, the geodesic of the metric `tr_g(h k)` on the fibre.
pub fn geodesic_affine(g0: &SymTensorPoint, h: &SymTensorPoint, t: f64) -> Result<SymTensorPoint> {
    check_same_dim(g0, h)?;
    check_finite(h, "tangent")?;
    if !t.is_finite() {
        return Err(Error::invalid("non-finite time"));
    }
    let c = Congruence::new(g0)?;
    let s = c.to_s(h) * t;
    Ok(c.from_s(&super::linalg::sym_apply(&s, f64::exp)))
}

/// `√Σ log² λ_i(a⁻¹ b)`, the distance of [`geodesic_affine`].
pub fn affine_distance(a: &SymTensorPoint, b: &SymTensorPoint) -> Result<f64> {
    check_same_dim(a, b)?;
    check_finite(b, "argument")?;
    let c = Congruence::new(a)?;
    let (ev, _) = sym_eigen(&c.to_s(b));
    if ev.iter().any(|&l| l <= 0.0) {
        return Err(Error::invalid("second argument not positive definite"));
    }
    Ok(ev.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

/// Per-cell bound `C₆ t^{-3/2}` on the squared L² speed of `g0 + t h` for
/// semidefinite `g0` and positive definite `h`, `t ∈ (0, 1]`.
///
/// `C₆ = n λ_max(h)² λ_max(g0 + h)^{(n-1)/2} / λ_min(h)^{3/2}`, eigenvalues in
/// reference coordinates.
pub fn boundary_speed_constant(g0: &SymTensorPoint, h: &SymTensorPoint) -> Result<f64> {
    check_same_dim(g0, h)?;
    if !g0.is_positive_semidefinite() {
        return Err(Error::invalid("base not positive semidefinite"));
    }
    if !h.is_positive_definite() {
        return Err(Error::invalid("direction not positive definite"));
    }
    let n = g0.dim() as f64;
    let eh = h.eigenvalues();
    let et = g0.add(h).eigenvalues();
    let (hmin, hmax) = (eh[0], *eh.last().unwrap());
    let tmax = *et.last().unwrap();
    Ok(n * hmax * hmax * tmax.powf((n - 1.0) / 2.0) / hmin.powf(1.5))
}
