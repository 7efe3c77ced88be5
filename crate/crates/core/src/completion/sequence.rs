use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{log_field, l2_norm, smallvol_bound, total_volume, volume, CellMask, MetricField, TensorField};
use crate::quad::small_volume_constant;
use crate::spd::{
    classify_point_sequence_with, dyadic_blocks, CauchyCertificate, ClassifyOptions, PointClassification, PointKind,
    SymTensorPoint,
};

/// Positive semidefinite tensor field; degenerate where `det < eps_det`.
pub type SemiMetricField = TensorField;

/// Deflated and unbounded cells of a sequence with the first witnessing index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflationMasks {
    pub deflated: CellMask,
    pub unbounded: CellMask,
    pub deflated_at: Vec<Option<usize>>,
    pub unbounded_at: Vec<Option<usize>>,
}

fn check_sequence(seq: &[MetricField]) -> Result<()> {
    let first = seq.first().ok_or_else(|| Error::invalid("empty sequence"))?;
    for (k, f) in seq.iter().enumerate() {
        first.grid.check_same(&f.grid)?;
        f.check_metric().map_err(|e| Error::invalid(format!("step {k}: {e}")))?;
    }
    Ok(())
}

/// Cells where some `det g_k < eps_det`, and cells where some `|(g_k)_{ij}| > c_big`.
pub fn deflated_unbounded_sets(seq: &[MetricField], eps_det: f64, c_big: f64) -> Result<DeflationMasks> {
    check_sequence(seq)?;
    let grid = &seq[0].grid;
    let cells = grid.cell_count();
    let mut deflated_at = vec![None; cells];
    let mut unbounded_at = vec![None; cells];
    for (k, f) in seq.iter().enumerate() {
        for (i, c) in f.cells.iter().enumerate() {
            if deflated_at[i].is_none() && c.det() < eps_det {
                deflated_at[i] = Some(k);
            }
            if unbounded_at[i].is_none() && c.max_abs() > c_big {
                unbounded_at[i] = Some(k);
            }
        }
    }
    let mask = |w: &[Option<usize>]| CellMask {
        grid: grid.clone(),
        bits: w.iter().map(Option::is_some).collect(),
    };
    Ok(DeflationMasks {
        deflated: mask(&deflated_at),
        unbounded: mask(&unbounded_at),
        deflated_at,
        unbounded_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaOptions {
    pub classify: ClassifyOptions,
    pub c_big: f64,
    /// Absolute tail diameter accepted by the field-level certificate.
    pub tol_cauchy: f64,
    pub rho_max: f64,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self {
            classify: ClassifyOptions::default(),
            c_big: 1e6,
            tol_cauchy: 1e-3,
            rho_max: 0.95,
        }
    }
}

/// Upper bound on `d(a, b)`: the smaller of the small-volume bound over the
/// carrier of `b − a` and the L² length of the connecting geodesic.
pub fn distance_upper(a: &MetricField, b: &MetricField) -> Result<f64> {
    let e = a.carrier_of_difference(b, 0.0);
    if e.is_empty() {
        return Ok(0.0);
    }
    let mut best = smallvol_bound(a, b, &e)?;
    if let Ok(h) = log_field(a, b) {
        best = best.min(l2_norm(a, &h)?);
    }
    Ok(best)
}

/// Lower bound on `d(a, b)` from the Lipschitz property of `√Vol`.
pub fn distance_lower(a: &MetricField, b: &MetricField) -> Result<f64> {
    let c = 4.0 / (a.grid.n as f64).sqrt();
    let all = CellMask::all(&a.grid);
    let e = a.carrier_of_difference(b, 0.0);
    let mut best = 0.0f64;
    for y in [&all, &e] {
        best = best.max(c * (volume(a, y)?.sqrt() - volume(b, y)?.sqrt()).abs());
    }
    Ok(best)
}

/// Dyadic-block certificate for a sequence of fields.
pub fn field_certificate(seq: &[MetricField], tol_cauchy: f64, rho_max: f64, blocks: usize) -> Result<CauchyCertificate> {
    check_sequence(seq)?;
    let cn = small_volume_constant(seq[0].grid.n);
    let mut diam = Vec::new();
    let mut lower = Vec::new();
    for block in dyadic_blocks(seq.len(), blocks) {
        let end = &seq[block.end - 1];
        let members = &seq[block.clone()];
        let ups = members.par_iter().map(|g| distance_upper(g, end)).collect::<Result<Vec<_>>>()?;
        let los = members.par_iter().map(|g| distance_lower(g, end)).collect::<Result<Vec<_>>>()?;
        let mut carrier = CellMask::none(&end.grid);
        for g in members {
            carrier = carrier.union(&g.carrier_of_difference(end, 0.0));
        }
        let mut max_vol = 0.0f64;
        for g in members {
            max_vol = max_vol.max(volume(g, &carrier)?);
        }
        let max_up = ups.iter().copied().fold(0.0, f64::max);
        diam.push((2.0 * max_up).min(2.0 * cn * max_vol.sqrt()));
        lower.push(los.iter().copied().fold(0.0, f64::max));
    }
    Ok(CauchyCertificate::from_blocks(diam, lower, tol_cauchy, rho_max))
}

/// Classification output for a sequence of fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub deflated: CellMask,
    pub unbounded: CellMask,
    pub omega_limit: SemiMetricField,
    pub per_cell: Vec<PointClassification>,
    /// `Vol(M, g_k)` for every step.
    pub volume_trace: Vec<f64>,
    pub cauchy_certificate: CauchyCertificate,
    pub options: OmegaOptions,
}

impl SequenceReport {
    pub fn count(&self, pred: impl Fn(&PointClassification) -> bool) -> usize {
        self.per_cell.iter().filter(|c| pred(c)).count()
    }
}

fn history_key(seq: &[MetricField], cell: usize) -> u64 {
    let mut h = DefaultHasher::new();
    for f in seq {
        for v in f.cells[cell].upper() {
            v.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

fn same_history(seq: &[MetricField], a: usize, b: usize) -> bool {
    seq.iter().all(|f| f.cells[a] == f.cells[b])
}

/// Pointwise classification and limit of a certified sequence of fields.
pub fn omega_limit(seq: &[MetricField]) -> Result<SequenceReport> {
    omega_limit_with(seq, &OmegaOptions::default())
}

pub fn omega_limit_with(seq: &[MetricField], opts: &OmegaOptions) -> Result<SequenceReport> {
    check_sequence(seq)?;
    let grid = seq[0].grid.clone();
    let cert = field_certificate(seq, opts.tol_cauchy, opts.rho_max, opts.classify.blocks)?;
    if !cert.passed {
        return Err(Error::NotCauchySequence {
            reason: cert.reason(),
            tail_bounds: cert.diameters.clone(),
        });
    }
    let masks = deflated_unbounded_sets(seq, opts.classify.eps_det, opts.c_big)?;

    // cells with identical histories share one classification
    let cells = grid.cell_count();
    let mut reps: Vec<usize> = Vec::new();
    let mut rep_of = vec![0usize; cells];
    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    let keys: Vec<u64> = (0..cells).into_par_iter().map(|i| history_key(seq, i)).collect();
    for i in 0..cells {
        let bucket = buckets.entry(keys[i]).or_default();
        match bucket.iter().find(|&&r| same_history(seq, r, i)) {
            Some(&r) => rep_of[i] = rep_of[r],
            None => {
                bucket.push(i);
                rep_of[i] = reps.len();
                reps.push(i);
            }
        }
    }
    let g_ref = SymTensorPoint::identity(grid.n);
    let classes = reps
        .par_iter()
        .map(|&i| {
            let hist: Vec<SymTensorPoint> = seq.iter().map(|f| f.cells[i]).collect();
            classify_point_sequence_with(&hist, &g_ref, &opts.classify).map_err(|e| e.at_cell(i))
        })
        .collect::<Result<Vec<_>>>()?;
    let per_cell: Vec<PointClassification> = rep_of.iter().map(|&r| classes[r].clone()).collect();

    let last = seq.last().expect("nonempty");
    let limit_cells = (0..cells)
        .map(|i| {
            if masks.deflated.bits[i] {
                return SymTensorPoint::zeros(grid.n);
            }
            match &per_cell[i].kind {
                PointKind::Converges { limit } => *limit,
                PointKind::Degenerates => SymTensorPoint::zeros(grid.n),
                PointKind::NotCauchy { .. } => last.cells[i],
            }
        })
        .collect();
    let volume_trace = seq.iter().map(total_volume).collect::<Result<Vec<_>>>()?;
    Ok(SequenceReport {
        deflated: masks.deflated,
        unbounded: masks.unbounded,
        omega_limit: TensorField::new(&grid, limit_cells)?,
        per_cell,
        volume_trace,
        cauchy_certificate: cert,
        options: *opts,
    })
}

/// Same degenerate cells and agreement within `eps_conv` elsewhere.
pub fn semimetric_equiv(a: &SemiMetricField, b: &SemiMetricField, eps_det: f64, eps_conv: f64) -> Result<bool> {
    a.grid.check_same(&b.grid)?;
    let (da, db) = (a.degenerate_mask(eps_det), b.degenerate_mask(eps_det));
    if da != db {
        return Ok(false);
    }
    Ok((0..a.cells.len()).all(|i| da.bits[i] || a.cells[i].max_abs_diff(&b.cells[i]) <= eps_conv))
}

/// Block-maximum ratio below which a volume trace counts as decaying.
pub const VANISHING_RATIO: f64 = 0.95;

/// Volume history of one mask against the volume of the limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub name: String,
    pub trace: Vec<f64>,
    pub limit_volume: f64,
    /// `|Vol(Y, g_k) − Vol(Y, g_∞)|` for every step.
    pub residuals: Vec<f64>,
    /// For the deflated mask: whether its volume decays to zero along the tail.
    pub vanishing: Option<bool>,
}

/// Per-mask volume traces; the deflated mask also gets a vanishing-volume flag.
pub fn volume_convergence_report(
    seq: &[MetricField],
    limit: &SemiMetricField,
    masks: &[(String, CellMask)],
    deflated: Option<&CellMask>,
    tol: f64,
) -> Result<Vec<VolumeRow>> {
    check_sequence(seq)?;
    let mut named: Vec<(String, CellMask, bool)> = masks.iter().map(|(n, m)| (n.clone(), m.clone(), false)).collect();
    if let Some(d) = deflated {
        named.push(("deflated".into(), d.clone(), true));
    }
    named
        .into_iter()
        .map(|(name, mask, is_deflated)| {
            let trace = seq.iter().map(|g| volume(g, &mask)).collect::<Result<Vec<_>>>()?;
            let limit_volume = volume(limit, &mask)?;
            let residuals: Vec<f64> = trace.iter().map(|v| (v - limit_volume).abs()).collect();
            let vanishing = is_deflated.then(|| {
                let maxima: Vec<f64> = dyadic_blocks(trace.len(), 3)
                    .into_iter()
                    .map(|b| trace[b].iter().copied().fold(0.0, f64::max))
                    .collect();
                // newest block first; geometric decay of block maxima or an already small tail
                let decaying = maxima.len() > 1 && maxima.windows(2).all(|w| w[0] <= VANISHING_RATIO * w[1]);
                let small = residuals.last().is_some_and(|&r| r <= tol);
                limit_volume == 0.0 && (decaying || small)
            });
            Ok(VolumeRow {
                name,
                trace,
                limit_volume,
                residuals,
                vanishing,
            })
        })
        .collect()
}
