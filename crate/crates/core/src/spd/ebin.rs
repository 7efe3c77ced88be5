//! Closed-form geodesics of the L² metric restricted to one point.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::linalg::{sym_apply, sym_eigen, trace_sq, traceless, Congruence};
use super::point::SymTensorPoint;
use crate::error::{Error, Result};
use crate::tolerances::{EPS_LIN, EPS_RANGE};

/// Decomposition of a tangent at a base point in congruence coordinates.
#[derive(Debug, Clone)]
pub struct EbinTangent {
    cong: Congruence,
    n: usize,
    tr: f64,
    st: DMatrix<f64>,
    st_norm_sq: f64,
    pure_trace: bool,
}

impl EbinTangent {
    pub fn new(g0: &SymTensorPoint, h: &SymTensorPoint) -> Result<Self> {
        if g0.dim() != h.dim() {
            return Err(Error::invalid("dimension mismatch"));
        }
        if !h.is_finite() {
            return Err(Error::invalid("tangent has non-finite entries"));
        }
        let cong = Congruence::new(g0)?;
        let s = cong.to_s(h);
        let n = g0.dim();
        let tr = s.trace();
        let st = traceless(&s);
        let st_norm_sq = trace_sq(&st).max(0.0);
        let scale = s.norm();
        let pure_trace = n == 1 || st_norm_sq.sqrt() <= EPS_LIN * scale;
        Ok(Self {
            cong,
            n,
            tr,
            st,
            st_norm_sq,
            pure_trace,
        })
    }

    /// `tr(g0⁻¹h)`.
    pub fn trace(&self) -> f64 {
        self.tr
    }

    /// `tr((H^T)²)`.
    pub fn traceless_norm_sq(&self) -> f64 {
        self.st_norm_sq
    }

    pub fn is_pure_trace(&self) -> bool {
        self.pure_trace
    }

    /// `tr_{g0}(h²)`.
    pub fn norm_sq(&self) -> f64 {
        self.st_norm_sq + self.tr * self.tr / self.n as f64
    }

    /// Supremum of the maximal existence interval.
    pub fn domain_sup(&self) -> f64 {
        if self.pure_trace && self.tr < 0.0 {
            -4.0 / self.tr
        } else {
            f64::INFINITY
        }
    }

    /// `(q_t, r_t)`.
    pub fn qr(&self, t: f64) -> (f64, f64) {
        let q = 1.0 + 0.25 * t * self.tr;
        let r = if self.pure_trace {
            0.0
        } else {
            0.25 * t * (self.n as f64 * self.st_norm_sq).sqrt()
        };
        (q, r)
    }

    /// Value at `t`, without domain checks; `t = domain_sup` gives the zero tensor.
    fn eval(&self, t: f64) -> SymTensorPoint {
        let n = self.n as f64;
        let (q, r) = self.qr(t);
        if self.pure_trace {
            let id = DMatrix::<f64>::identity(self.n, self.n);
            return self.cong.from_s(&(id * q.max(0.0).powf(4.0 / n)));
        }
        // branch ledger: r > 0 for t > 0 keeps the angle in (0, π)
        let angle = r.atan2(q);
        let coef = 4.0 / (n * self.st_norm_sq).sqrt() * angle;
        let e = sym_apply(&(&self.st * coef), f64::exp);
        self.cong.from_s(&(e * (q * q + r * r).powf(2.0 / n)))
    }

    /// Geodesic value for `t ∈ [0, domain_sup)`.
    pub fn exp(&self, t: f64) -> Result<SymTensorPoint> {
        let sup = self.domain_sup();
        if !(t >= 0.0 && t < sup) {
            return Err(Error::OutOfDomain { t, sup, cell: None });
        }
        Ok(self.eval(t))
    }

    /// Like [`exp`](Self::exp) but also accepts `t = domain_sup`; the flag
    /// reports a degenerate (boundary) value.
    pub fn exp_closed(&self, t: f64) -> Result<(SymTensorPoint, bool)> {
        let sup = self.domain_sup();
        if !(t >= 0.0 && t <= sup) || t.is_infinite() {
            return Err(Error::OutOfDomain { t, sup, cell: None });
        }
        if t == sup {
            return Ok((SymTensorPoint::zeros(self.n), true));
        }
        Ok((self.eval(t), false))
    }

    /// Velocity `d/dt g_t` for `t ∈ [0, domain_sup)`.
    pub fn velocity(&self, t: f64) -> Result<SymTensorPoint> {
        let sup = self.domain_sup();
        if !(t >= 0.0 && t < sup) {
            return Err(Error::OutOfDomain { t, sup, cell: None });
        }
        let n = self.n as f64;
        let (q, r) = self.qr(t);
        let dq = 0.25 * self.tr;
        if self.pure_trace {
            let id = DMatrix::<f64>::identity(self.n, self.n);
            return Ok(self.cong.from_s(&(id * (4.0 / n * q.powf(4.0 / n - 1.0) * dq))));
        }
        let a = (n * self.st_norm_sq).sqrt();
        let dr = 0.25 * a;
        let rho = q * q + r * r;
        let e = sym_apply(&(&self.st * (4.0 / a * r.atan2(q))), f64::exp);
        let dangle = 4.0 / a * (q * dr - r * dq) / rho;
        let dphi = 4.0 / n * rho.powf(2.0 / n - 1.0) * (q * dq + r * dr);
        let v = &e * dphi + &self.st * &e * (rho.powf(2.0 / n) * dangle);
        Ok(self.cong.from_s(&((&v + v.transpose()) * 0.5)))
    }

    /// `√det(g0⁻¹ g_t) = q_t² + r_t²`.
    pub fn density(&self, t: f64) -> f64 {
        let (q, r) = self.qr(t);
        if self.pure_trace {
            let q = q.max(0.0);
            q * q
        } else {
            q * q + r * r
        }
    }
}

/// Point of the L² geodesic from `g0` with initial velocity `h` at time `t`.
pub fn ebin_exp_point(g0: &SymTensorPoint, h: &SymTensorPoint, t: f64) -> Result<SymTensorPoint> {
    EbinTangent::new(g0, h)?.exp(t)
}

/// Supremum of the existence interval of [`ebin_exp_point`].
pub fn domain_sup(g0: &SymTensorPoint, h: &SymTensorPoint) -> Result<f64> {
    Ok(EbinTangent::new(g0, h)?.domain_sup())
}

/// Range quantities of `g1` seen from `g0`.
#[derive(Debug, Clone)]
pub struct LogData {
    /// `tr(K²)` of the traceless log.
    pub k_norm_sq: f64,
    /// Upper limit `16π²/n`.
    pub limit: f64,
}

/// `tr(K²)` and its limit; `K` is the traceless part of `log(g0^{-1/2} g1 g0^{-1/2})`.
pub fn range_margin(g0: &SymTensorPoint, g1: &SymTensorPoint) -> Result<LogData> {
    let c = Congruence::new(g0)?;
    let p = c.to_s(g1);
    let (ev, _) = sym_eigen(&p);
    if ev.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::invalid("target not positive definite"));
    }
    let logs: Vec<f64> = ev.iter().map(|l| l.ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let n = g0.dim() as f64;
    Ok(LogData {
        k_norm_sq: logs.iter().map(|l| (l - mean).powi(2)).sum(),
        limit: 16.0 * PI * PI / n,
    })
}

/// Inverse of [`ebin_exp_point`] at `t = 1`.
pub fn ebin_log_point(g0: &SymTensorPoint, g1: &SymTensorPoint) -> Result<SymTensorPoint> {
    ebin_log_point_with(g0, g1, EPS_RANGE)
}

pub fn ebin_log_point_with(
    g0: &SymTensorPoint,
    g1: &SymTensorPoint,
    eps_range: f64,
) -> Result<SymTensorPoint> {
    if g0.dim() != g1.dim() {
        return Err(Error::invalid("dimension mismatch"));
    }
    if !g1.is_positive_definite() {
        return Err(Error::invalid("target not positive definite"));
    }
    let n = g0.dim();
    let nf = n as f64;
    let c = Congruence::new(g0)?;
    let p = c.to_s(g1);
    let (ev, v) = sym_eigen(&p);
    if ev.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::NumericalFailure("eigendecomposition of g0⁻¹g1".into()));
    }
    let logs: Vec<f64> = ev.iter().map(|l| l.ln()).collect();
    let log_det: f64 = logs.iter().sum();
    let mean = log_det / nf;
    let k_norm_sq: f64 = logs.iter().map(|l| (l - mean).powi(2)).sum();
    let limit = 16.0 * PI * PI / nf;
    if !(k_norm_sq < limit - eps_range) {
        return Err(Error::OutOfRange {
            value: k_norm_sq,
            limit,
            cell: None,
        });
    }
    let rho = (0.25 * log_det).exp();
    let phi = 0.25 * nf.sqrt() * k_norm_sq.sqrt();
    let q = rho * phi.cos();
    let r = rho * phi.sin();
    let tr = 4.0 * (q - 1.0);
    let ratio = if phi > 0.0 { r / phi } else { rho };
    // S = ratio·K + (tr/n) I, diagonal in the eigenbasis of P
    let mut vs = v.clone();
    for j in 0..n {
        let d = ratio * (logs[j] - mean) + tr / nf;
        for i in 0..n {
            vs[(i, j)] *= d;
        }
    }
    let s = super::linalg::symmetrize(&(vs * v.transpose()));
    Ok(c.from_s(&s))
}
