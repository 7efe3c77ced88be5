use serde::{Deserialize, Serialize};

use super::grid::{MetricField, TangentField, TensorField};
use super::ops::l2_inner;
use crate::error::{Error, Result};
use crate::quad::{cumulative, integrate, TimeRule};

/// Time samples of a path of metrics, optionally with exact tangents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricPath {
    pub times: Vec<f64>,
    pub fields: Vec<MetricField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangents: Option<Vec<TangentField>>,
}

impl MetricPath {
    pub fn new(times: Vec<f64>, fields: Vec<MetricField>) -> Result<Self> {
        let p = Self {
            times,
            fields,
            tangents: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_tangents(times: Vec<f64>, fields: Vec<MetricField>, tangents: Vec<TangentField>) -> Result<Self> {
        let p = Self {
            times,
            fields,
            tangents: Some(tangents),
        };
        p.validate()?;
        Ok(p)
    }

    /// Sample `f` at `times`.
    pub fn sample(times: Vec<f64>, f: impl Fn(f64) -> Result<MetricField>) -> Result<Self> {
        let fields = times.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        Self::new(times, fields)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() < 2 || self.times.len() != self.fields.len() {
            return Err(Error::invalid("a path needs at least two samples, one field per time"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("times must be strictly increasing"));
        }
        let grid = &self.fields[0].grid;
        for f in &self.fields[1..] {
            grid.check_same(&f.grid)?;
        }
        if let Some(t) = &self.tangents {
            if t.len() != self.fields.len() {
                return Err(Error::invalid("one tangent per sample required"));
            }
            for f in t {
                grid.check_same(&f.grid)?;
            }
        }
        Ok(())
    }

    /// Tangents at every sample: the supplied ones, or second-order
    /// differences on the (nonuniform) time grid.
    pub fn tangent_fields(&self) -> Result<Vec<TangentField>> {
        if let Some(t) = &self.tangents {
            return Ok(t.clone());
        }
        let m = self.times.len();
        let t = &self.times;
        let f = &self.fields;
        let comb = |w: [f64; 3], idx: [usize; 3]| -> Result<TensorField> {
            f[idx[0]]
                .lin_comb(w[0], &f[idx[1]], w[1])?
                .lin_comb(1.0, &f[idx[2]], w[2])
        };
        if m == 2 {
            let d = f[1].lin_comb(1.0, &f[0], -1.0)?.scale(1.0 / (t[1] - t[0]));
            return Ok(vec![d.clone(), d]);
        }
        let mut out = Vec::with_capacity(m);
        let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
        out.push(comb(
            [-(2.0 * h0 + h1) / (h0 * (h0 + h1)), (h0 + h1) / (h0 * h1), -h0 / (h1 * (h0 + h1))],
            [0, 1, 2],
        )?);
        for i in 1..m - 1 {
            let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
            out.push(comb(
                [-h1 / (h0 * (h0 + h1)), (h1 - h0) / (h0 * h1), h0 / (h1 * (h0 + h1))],
                [i - 1, i, i + 1],
            )?);
        }
        let (h0, h1) = (t[m - 2] - t[m - 3], t[m - 1] - t[m - 2]);
        out.push(comb(
            [h1 / (h0 * (h0 + h1)), -(h0 + h1) / (h0 * h1), (2.0 * h1 + h0) / (h1 * (h0 + h1))],
            [m - 3, m - 2, m - 1],
        )?);
        Ok(out)
    }

    /// `‖g'_t‖_{g_t}` at every sample.
    pub fn speeds(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let tans = self.tangent_fields()?;
        self.fields
            .iter()
            .zip(&tans)
            .map(|(g, h)| Ok(l2_inner(g, h, h)?.max(0.0).sqrt()))
            .collect()
    }

    /// Cumulative length at every sample.
    pub fn cumulative_length(&self, rule: TimeRule) -> Result<Vec<f64>> {
        Ok(cumulative(&self.times, &self.speeds()?, rule))
    }
}

/// Length of a sampled path, trapezoid rule in time.
pub fn path_length(path: &MetricPath) -> Result<f64> {
    path_length_with(path, TimeRule::Trapezoid)
}

pub fn path_length_with(path: &MetricPath, rule: TimeRule) -> Result<f64> {
    Ok(*path.cumulative_length(rule)?.last().expect("two samples"))
}

/// Adaptive-quadrature length of `t ↦ (1 − t) g0 + t g1` with exact tangent.
pub fn straight_segment_length(g0: &MetricField, g1: &MetricField, tol: f64) -> Result<f64> {
    g0.grid.check_same(&g1.grid)?;
    let d = g1.lin_comb(1.0, g0, -1.0)?;
    if d.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let speed = |t: f64| {
        let g = g0.lin_comb(1.0 - t, g1, t).expect("same grid");
        l2_inner(&g, &d, &d).map(|v| v.max(0.0).sqrt()).unwrap_or(f64::NAN)
    };
    let len = integrate(&speed, 0.0, 1.0, tol);
    if len.is_finite() {
        Ok(len)
    } else {
        Err(Error::NumericalFailure("segment left the space of metrics".into()))
    }
}

/// Length of the polyline through the given fields.
pub fn polyline_length(nodes: &[MetricField], tol: f64) -> Result<f64> {
    let mut acc = crate::sum::NeumaierSum::new();
    for w in nodes.windows(2) {
        acc.add(straight_segment_length(&w[0], &w[1], tol)?);
    }
    Ok(acc.value())
}
