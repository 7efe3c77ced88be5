//! Finite-prefix rendering of the pointwise Cauchy dichotomy.

use serde::{Deserialize, Serialize};

use super::ops::det_ratio;
use super::point::SymTensorPoint;
use super::theta::theta_bounds;
use crate::error::{Error, Result};
use crate::quad::small_volume_constant;
use crate::tolerances::EPS_DET;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub eps_det: f64,
    pub eps_conv: f64,
    /// Absolute diameter below which the newest block certifies directly.
    pub tol_cauchy: f64,
    /// Largest admissible ratio of successive block diameters.
    pub rho_max: f64,
    /// Number of dyadic tail blocks.
    pub blocks: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            eps_det: EPS_DET,
            eps_conv: 1e-6,
            tol_cauchy: 1e-3,
            rho_max: 0.95,
            blocks: 3,
        }
    }
}

/// Dyadic tail blocks `[N/2^{j+1}, N/2^j)`, newest first.
pub fn dyadic_blocks(len: usize, blocks: usize) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut hi = len;
    for _ in 0..blocks.max(1) {
        let lo = hi / 2;
        if lo >= hi {
            break;
        }
        out.push(lo..hi);
        hi = lo;
        if hi < 1 {
            break;
        }
    }
    if out.is_empty() && len > 0 {
        out.push(0..len);
    }
    out
}

/// Evidence of the tail certificate; index 0 is the newest block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyCertificate {
    /// Upper bounds on the diameter of each block.
    pub diameters: Vec<f64>,
    /// Lower bounds on the diameter of each block.
    pub lower: Vec<f64>,
    /// `diameters[j] / diameters[j + 1]`.
    pub ratios: Vec<f64>,
    pub tol_cauchy: f64,
    pub rho_max: f64,
    pub passed: bool,
}

impl CauchyCertificate {
    pub fn from_blocks(diameters: Vec<f64>, lower: Vec<f64>, tol_cauchy: f64, rho_max: f64) -> Self {
        let ratios: Vec<f64> = diameters
            .windows(2)
            .map(|w| {
                if w[1] > 0.0 {
                    w[0] / w[1]
                } else if w[0] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let small = diameters.first().is_some_and(|&d| d <= tol_cauchy);
        let contracting = !ratios.is_empty() && ratios.iter().all(|&r| r <= rho_max);
        Self {
            diameters,
            lower,
            ratios,
            tol_cauchy,
            rho_max,
            passed: small || contracting,
        }
    }

    pub fn reason(&self) -> String {
        format!(
            "tail diameter {:.3e} above {:.1e} and block ratios {:?} not all below {}",
            self.diameters.first().copied().unwrap_or(0.0),
            self.tol_cauchy,
            self.ratios,
            self.rho_max
        )
    }
}

/// Block certificate for a pointwise sequence.
pub fn point_certificate(
    seq: &[SymTensorPoint],
    g_ref: &SymTensorPoint,
    opts: &ClassifyOptions,
) -> Result<CauchyCertificate> {
    let cn = small_volume_constant(g_ref.dim());
    let mut diam = Vec::new();
    let mut lower = Vec::new();
    for block in dyadic_blocks(seq.len(), opts.blocks) {
        let end = &seq[block.end - 1];
        let mut max_up = 0.0f64;
        let mut max_lo = 0.0f64;
        let mut max_det = 0.0f64;
        for a in &seq[block.clone()] {
            let tb = theta_bounds(g_ref, a, end)?;
            max_up = max_up.max(tb.upper);
            max_lo = max_lo.max(tb.lower);
            max_det = max_det.max(det_ratio(g_ref, a)?);
        }
        diam.push((2.0 * max_up).min(2.0 * cn * max_det.sqrt()));
        lower.push(max_lo);
    }
    Ok(CauchyCertificate::from_blocks(diam, lower, opts.tol_cauchy, opts.rho_max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointKind {
    Converges { limit: SymTensorPoint },
    Degenerates,
    NotCauchy { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEvidence {
    /// `det(g_ref⁻¹ a_k)` for every entry.
    pub det_trace: Vec<f64>,
    pub certificate: CauchyCertificate,
    /// Max-norm spread of the final window.
    pub window_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointClassification {
    pub kind: PointKind,
    pub evidence: PointEvidence,
}

impl PointClassification {
    pub fn is_converges(&self) -> bool {
        matches!(self.kind, PointKind::Converges { .. })
    }
    pub fn is_degenerates(&self) -> bool {
        matches!(self.kind, PointKind::Degenerates)
    }
    pub fn is_not_cauchy(&self) -> bool {
        matches!(self.kind, PointKind::NotCauchy { .. })
    }
}

/// Length of the final window used for stabilization checks.
pub fn final_window(len: usize) -> std::ops::Range<usize> {
    let w = len.div_ceil(8).max(1);
    len - w..len
}

/// Classify a finite prefix as converging, degenerating or not certifiably Cauchy.
pub fn classify_point_sequence(seq: &[SymTensorPoint], g_ref: &SymTensorPoint) -> Result<PointClassification> {
    classify_point_sequence_with(seq, g_ref, &ClassifyOptions::default())
}

pub fn classify_point_sequence_with(
    seq: &[SymTensorPoint],
    g_ref: &SymTensorPoint,
    opts: &ClassifyOptions,
) -> Result<PointClassification> {
    if seq.is_empty() {
        return Err(Error::invalid("empty sequence"));
    }
    for (k, a) in seq.iter().enumerate() {
        if a.dim() != g_ref.dim() || !a.is_positive_definite() {
            return Err(Error::invalid(format!("entry {k} not a positive definite tensor of dimension {}", g_ref.dim())));
        }
    }
    let det_trace = seq.iter().map(|a| det_ratio(g_ref, a)).collect::<Result<Vec<_>>>()?;
    let certificate = point_certificate(seq, g_ref, opts)?;
    let window = final_window(seq.len());
    let last = &seq[window.end - 1];
    let window_spread = seq[window.clone()]
        .iter()
        .map(|a| a.max_abs_diff(last))
        .fold(0.0, f64::max);
    let kind = classify_from(seq, &det_trace, &certificate, window, window_spread, opts);
    Ok(PointClassification {
        kind,
        evidence: PointEvidence {
            det_trace,
            certificate,
            window_spread,
        },
    })
}

fn classify_from(
    seq: &[SymTensorPoint],
    det_trace: &[f64],
    cert: &CauchyCertificate,
    window: std::ops::Range<usize>,
    spread: f64,
    opts: &ClassifyOptions,
) -> PointKind {
    if !cert.passed {
        return PointKind::NotCauchy { reason: cert.reason() };
    }
    let win_max = det_trace[window.clone()].iter().copied().fold(0.0, f64::max);
    let win_min = det_trace[window.clone()].iter().copied().fold(f64::INFINITY, f64::min);
    let block_max: Vec<f64> = dyadic_blocks(seq.len(), opts.blocks)
        .into_iter()
        .map(|b| det_trace[b].iter().copied().fold(0.0, f64::max))
        .collect();
    // newest first, so maxima must not decrease going back in time
    let shrinking = block_max.windows(2).all(|w| w[0] <= w[1]);
    if win_max < opts.eps_det && shrinking {
        return PointKind::Degenerates;
    }
    if spread <= opts.eps_conv && win_min >= opts.eps_det {
        let n = seq[0].dim();
        let mut acc = vec![crate::sum::NeumaierSum::new(); seq[0].upper().len()];
        for a in &seq[window.clone()] {
            for (s, v) in acc.iter_mut().zip(a.upper()) {
                s.add(*v);
            }
        }
        let w = window.len() as f64;
        let avg: Vec<f64> = acc.iter().map(|s| s.value() / w).collect();
        let limit = SymTensorPoint::from_upper(n, &avg).expect("dimension");
        return PointKind::Converges { limit };
    }
    let reason = if win_max < opts.eps_det {
        "determinant below threshold but block maxima increase".to_string()
    } else {
        format!("final window spread {spread:.3e} above {:.1e}", opts.eps_conv)
    };
    PointKind::NotCauchy { reason }
}
