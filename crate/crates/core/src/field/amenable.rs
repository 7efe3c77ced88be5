use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{MetricField, TensorField};
use super::ops::l2_norm;
use crate::error::{Error, Result};
use crate::spd::{packed_len, SymTensorPoint};
use crate::tolerances::EPS_DET;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmenableClass {
    Amenable,
    QuasiAmenable,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmenableReport {
    pub class: AmenableClass,
    /// Largest coefficient magnitude.
    pub c: f64,
    /// Smallest eigenvalue in reference coordinates.
    pub delta: f64,
    /// Bound `K` with `1/K ≤ √det g ≤ K` derived from `(c, delta)`.
    pub density_bound: f64,
    /// Largest observed ratio `‖h‖_{g_i} / ‖h‖_{g_j}` over random probes.
    pub norm_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmenableOptions {
    pub eps_det: f64,
    pub probes: usize,
    pub seed: u64,
}

impl Default for AmenableOptions {
    fn default() -> Self {
        Self {
            eps_det: EPS_DET,
            probes: 16,
            seed: 0,
        }
    }
}

/// Random symmetric field with entries uniform in `[-1, 1]`.
pub fn random_tangent(like: &TensorField, rng: &mut ChaCha8Rng) -> TensorField {
    let n = like.grid.n;
    let cells = (0..like.cells.len())
        .map(|_| {
            let v: Vec<f64> = (0..packed_len(n)).map(|_| rng.random_range(-1.0..=1.0)).collect();
            SymTensorPoint::from_upper(n, &v).expect("dimension")
        })
        .collect();
    TensorField {
        grid: like.grid.clone(),
        cells,
    }
}

/// Uniform coefficient and eigenvalue bounds of a family of metrics, with an
/// empirical norm-equivalence constant.
pub fn amenable_check(fields: &[MetricField]) -> Result<AmenableReport> {
    amenable_check_with(fields, &AmenableOptions::default())
}

pub fn amenable_check_with(fields: &[MetricField], opts: &AmenableOptions) -> Result<AmenableReport> {
    let first = fields.first().ok_or_else(|| Error::invalid("empty family"))?;
    for f in fields {
        first.grid.check_same(&f.grid)?;
    }
    let n = first.grid.n as f64;
    let finite = fields.iter().all(|f| f.cells.iter().all(|c| c.is_finite()));
    if !finite {
        return Ok(AmenableReport {
            class: AmenableClass::Neither,
            c: f64::INFINITY,
            delta: 0.0,
            density_bound: f64::INFINITY,
            norm_ratio: f64::INFINITY,
        });
    }
    let c = fields.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
    let delta = fields
        .iter()
        .flat_map(|f| f.cells.iter().map(|p| p.eigenvalues()[0]))
        .fold(f64::INFINITY, f64::min);
    let class = if delta > opts.eps_det {
        AmenableClass::Amenable
    } else {
        AmenableClass::QuasiAmenable
    };
    let density_bound = (n * c).powf(0.5 * n).max(if delta > 0.0 { delta.powf(-0.5 * n) } else { f64::INFINITY });

    let norm_ratio = if class == AmenableClass::Amenable {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut worst = 1.0f64;
        for _ in 0..opts.probes {
            let h = random_tangent(first, &mut rng);
            let norms = fields.iter().map(|g| l2_norm(g, &h)).collect::<Result<Vec<_>>>()?;
            let hi = norms.iter().copied().fold(0.0, f64::max);
            let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
            if lo > 0.0 {
                worst = worst.max(hi / lo);
            }
        }
        worst
    } else {
        f64::INFINITY
    };
    Ok(AmenableReport {
        class,
        c,
        delta,
        density_bound,
        norm_ratio,
    })
}
