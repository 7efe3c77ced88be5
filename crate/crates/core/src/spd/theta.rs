//! Certified intervals for the pointwise distance induced by
//! `⟨h, k⟩⁰ = tr_a(hk) · det(g⁻¹a)`.

use serde::{Deserialize, Serialize};

use super::ebin::{ebin_log_point, EbinTangent};
use super::linalg::{sym_eigen, Congruence};
use super::ops::{affine_distance, det_ratio, inner0};
use super::point::SymTensorPoint;
use crate::error::{Error, Result};
use crate::quad::{integrate, small_volume_constant};

/// Which candidate produced the upper end of a [`ThetaBounds`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperSource {
    Identical,
    ThroughZero,
    EbinGeodesic,
    StraightLine,
    AffineGeodesic,
    ScaledDetour,
    Polyline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaBounds {
    pub lower: f64,
    pub upper: f64,
    pub source: UpperSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaOptions {
    /// Also try straight, affine, detour and optimized polyline paths.
    pub refine: bool,
    /// Number of polyline segments used by the refinement.
    pub segments: usize,
    /// Descent iterations of the refinement.
    pub iterations: usize,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        Self {
            refine: false,
            segments: 8,
            iterations: 40,
        }
    }
}

impl ThetaOptions {
    pub fn refined() -> Self {
        Self {
            refine: true,
            ..Self::default()
        }
    }
}

/// Lower bound from the Lipschitz property of `√det`: `(2/√n)|√det A − √det B|`.
pub fn det_lower_bound(g_ref: &SymTensorPoint, a: &SymTensorPoint, b: &SymTensorPoint) -> Result<f64> {
    let n = a.dim() as f64;
    let da = det_ratio(g_ref, a)?.max(0.0).sqrt();
    let db = det_ratio(g_ref, b)?.max(0.0).sqrt();
    Ok(2.0 / n.sqrt() * (da - db).abs())
}

/// Lower bound from splitting paths by whether they leave `{det ≥ δ/2}`.
pub fn separation_lower_bound(
    g_ref: &SymTensorPoint,
    a: &SymTensorPoint,
    b: &SymTensorPoint,
) -> Result<f64> {
    let n = a.dim() as f64;
    let delta = det_ratio(g_ref, a)?.min(det_ratio(g_ref, b)?);
    if !(delta > 0.0) {
        return Ok(0.0);
    }
    let dx = affine_distance(a, b)?;
    let escape = n.sqrt() * (1.0 - std::f64::consts::FRAC_1_SQRT_2) * delta.sqrt();
    Ok(escape.min((0.5 * delta).sqrt() * dx))
}

/// Upper bound through the boundary point: `C'(n)(√det A + √det B)`.
pub fn through_zero_upper(g_ref: &SymTensorPoint, a: &SymTensorPoint, b: &SymTensorPoint) -> Result<f64> {
    let da = det_ratio(g_ref, a)?.max(0.0).sqrt();
    let db = det_ratio(g_ref, b)?.max(0.0).sqrt();
    Ok(small_volume_constant(a.dim()) * (da + db))
}

/// `∫₀¹ √((1 + βt)² + γ²t²) dt`.
fn radial_density_integral(beta: f64, gamma: f64) -> f64 {
    let alpha = beta * beta + gamma * gamma;
    if alpha < 1e-4 {
        return integrate(
            &|t: f64| ((1.0 + beta * t).powi(2) + gamma * gamma * t * t).sqrt(),
            0.0,
            1.0,
            1e-15,
        );
    }
    let c = gamma.abs();
    let prim = |u: f64| {
        let root = (u * u + c * c).sqrt();
        let tail = if c > 0.0 { c * c * (u / c).asinh() } else { 0.0 };
        u * root + tail
    };
    (prim(alpha + beta) - prim(beta)) / (2.0 * alpha.powf(1.5))
}

/// `⟨·,·⟩⁰`-length of the L² geodesic from `a` with initial velocity `h` over `[0, 1]`.
pub fn ebin_geodesic_length0(g_ref: &SymTensorPoint, a: &SymTensorPoint, h: &SymTensorPoint) -> Result<f64> {
    let tan = EbinTangent::new(a, h)?;
    let (q1, r1) = tan.qr(1.0);
    let beta = q1 - 1.0;
    let gamma = r1;
    let scale = (tan.norm_sq() * det_ratio(g_ref, a)?).sqrt();
    Ok(scale * radial_density_integral(beta, gamma))
}

/// `⟨·,·⟩⁰`-length of the affine geodesic from `a` to `b`, in closed form.
pub fn affine_geodesic_length0(g_ref: &SymTensorPoint, a: &SymTensorPoint, b: &SymTensorPoint) -> Result<f64> {
    let c = Congruence::new(a)?;
    let (ev, _) = sym_eigen(&c.to_s(b));
    let logs: Vec<f64> = ev.iter().map(|l| l.ln()).collect();
    let tr: f64 = logs.iter().sum();
    let norm_sq: f64 = logs.iter().map(|l| l * l).sum();
    let x = 0.5 * tr;
    let growth = if x.abs() < 1e-8 { 1.0 + 0.5 * x } else { x.exp_m1() / x };
    Ok((norm_sq * det_ratio(g_ref, a)?).sqrt() * growth)
}

/// `⟨·,·⟩⁰`-length of the straight segment from `a` to `b`.
pub fn segment_length0(g_ref: &SymTensorPoint, a: &SymTensorPoint, b: &SymTensorPoint, tol: f64) -> Result<f64> {
    let d = b.sub(a);
    if d.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let speed = |t: f64| {
        let p = a.lin_comb(1.0 - t, b, t);
        inner0(g_ref, &p, &d, &d).map(|v| v.max(0.0).sqrt()).unwrap_or(f64::NAN)
    };
    let len = integrate(&speed, 0.0, 1.0, tol);
    if len.is_finite() {
        Ok(len)
    } else {
        Err(Error::NumericalFailure("segment left the positive cone".into()))
    }
}

/// `⟨·,·⟩⁰`-length of a polyline through positive definite nodes.
pub fn polyline_length0(g_ref: &SymTensorPoint, nodes: &[SymTensorPoint], tol: f64) -> Result<f64> {
    let mut acc = crate::sum::NeumaierSum::new();
    for w in nodes.windows(2) {
        acc.add(segment_length0(g_ref, &w[0], &w[1], tol)?);
    }
    Ok(acc.value())
}

const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

fn polyline_energy_fast(g_ref: &SymTensorPoint, nodes: &[SymTensorPoint]) -> f64 {
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let d = w[1].sub(&w[0]);
        for &(x, wt) in &GAUSS8 {
            let t = 0.5 * (x + 1.0);
            let p = w[0].lin_comb(1.0 - t, &w[1], t);
            match inner0(g_ref, &p, &d, &d) {
                Ok(v) => total += 0.5 * wt * v.max(0.0).sqrt(),
                Err(_) => return f64::INFINITY,
            }
        }
    }
    total
}

/// Descend the polyline length over interior nodes by finite-difference gradients.
fn straighten(g_ref: &SymTensorPoint, mut nodes: Vec<SymTensorPoint>, iterations: usize) -> Vec<SymTensorPoint> {
    let m = nodes.len();
    if m < 3 {
        return nodes;
    }
    let p = nodes[0].upper().len();
    let n = nodes[0].dim();
    let mut f = polyline_energy_fast(g_ref, &nodes);
    let scale = nodes.iter().map(|x| x.max_abs()).fold(0.0, f64::max).max(1e-300);
    let mut step = 0.05 * scale;
    for _ in 0..iterations {
        let h = 1e-6 * scale;
        let mut grad = vec![0.0; (m - 2) * p];
        for i in 1..m - 1 {
            for c in 0..p {
                let orig = nodes[i];
                let mut up = orig.upper().to_vec();
                up[c] += h;
                nodes[i] = SymTensorPoint::from_upper(n, &up).expect("dimension");
                let fp = polyline_energy_fast(g_ref, &nodes);
                up[c] -= 2.0 * h;
                nodes[i] = SymTensorPoint::from_upper(n, &up).expect("dimension");
                let fm = polyline_energy_fast(g_ref, &nodes);
                nodes[i] = orig;
                grad[(i - 1) * p + c] = if fp.is_finite() && fm.is_finite() {
                    (fp - fm) / (2.0 * h)
                } else {
                    0.0
                };
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm == 0.0 {
            break;
        }
        let mut improved = false;
        while step > 1e-12 * scale {
            let trial: Vec<SymTensorPoint> = nodes
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    if i == 0 || i == m - 1 {
                        return *x;
                    }
                    let up: Vec<f64> = x
                        .upper()
                        .iter()
                        .enumerate()
                        .map(|(c, v)| v - step * grad[(i - 1) * p + c] / gnorm)
                        .collect();
                    SymTensorPoint::from_upper(n, &up).expect("dimension")
                })
                .collect();
            let ft = if trial.iter().all(|x| x.is_positive_definite()) {
                polyline_energy_fast(g_ref, &trial)
            } else {
                f64::INFINITY
            };
            if ft < f {
                nodes = trial;
                f = ft;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    nodes
}

fn canonical_order<'a>(a: &'a SymTensorPoint, b: &'a SymTensorPoint) -> (&'a SymTensorPoint, &'a SymTensorPoint) {
    for (x, y) in a.upper().iter().zip(b.upper()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return (a, b),
            std::cmp::Ordering::Greater => return (b, a),
            std::cmp::Ordering::Equal => {}
        }
    }
    (a, b)
}

/// Certified interval containing the pointwise distance between `a` and `b`.
pub fn theta_bounds(g_ref: &SymTensorPoint, a: &SymTensorPoint, b: &SymTensorPoint) -> Result<ThetaBounds> {
    theta_bounds_with(g_ref, a, b, &ThetaOptions::default())
}

pub fn theta_bounds_with(
    g_ref: &SymTensorPoint,
    a: &SymTensorPoint,
    b: &SymTensorPoint,
    opts: &ThetaOptions,
) -> Result<ThetaBounds> {
    if a.dim() != b.dim() || g_ref.dim() != a.dim() {
        return Err(Error::invalid("dimension mismatch"));
    }
    for (p, name) in [(g_ref, "reference"), (a, "first argument"), (b, "second argument")] {
        if !p.is_positive_definite() {
            return Err(Error::invalid(format!("{name} not positive definite")));
        }
    }
    let (a, b) = canonical_order(a, b);
    if a == b {
        return Ok(ThetaBounds {
            lower: 0.0,
            upper: 0.0,
            source: UpperSource::Identical,
        });
    }
    let lower = det_lower_bound(g_ref, a, b)?.max(separation_lower_bound(g_ref, a, b)?);

    let mut best = (through_zero_upper(g_ref, a, b)?, UpperSource::ThroughZero);
    let mut consider = |v: f64, s: UpperSource| {
        if v.is_finite() && v < best.0 {
            best = (v, s);
        }
    };
    let ebin_h = ebin_log_point(a, b).ok();
    if let Some(h) = &ebin_h {
        if let Ok(len) = ebin_geodesic_length0(g_ref, a, h) {
            consider(len, UpperSource::EbinGeodesic);
        }
    }
    if opts.refine {
        let n = a.dim() as f64;
        let da = det_ratio(g_ref, a)?.sqrt();
        let db = det_ratio(g_ref, b)?.sqrt();
        consider(2.0 / n.sqrt() * (da + db), UpperSource::ScaledDetour);
        if let Ok(len) = affine_geodesic_length0(g_ref, a, b) {
            consider(len, UpperSource::AffineGeodesic);
        }
        if let Ok(len) = segment_length0(g_ref, a, b, 1e-12) {
            consider(len, UpperSource::StraightLine);
        }
        let m = opts.segments.max(1);
        let start: Vec<SymTensorPoint> = (0..=m)
            .map(|i| {
                let t = i as f64 / m as f64;
                match &ebin_h {
                    Some(h) => super::ebin::ebin_exp_point(a, h, t).unwrap_or_else(|_| a.lin_comb(1.0 - t, b, t)),
                    None => super::ops::geodesic_affine(a, &affine_log(a, b), t).unwrap_or_else(|_| a.lin_comb(1.0 - t, b, t)),
                }
            })
            .collect();
        let mut nodes = straighten(g_ref, start, opts.iterations);
        *nodes.first_mut().unwrap() = *a;
        *nodes.last_mut().unwrap() = *b;
        if let Ok(len) = polyline_length0(g_ref, &nodes, 1e-12) {
            consider(len, UpperSource::Polyline);
        }
    }
    // both ends are exact in some configurations (one dimension); meet within round-off
    let lower = if lower > best.0 && lower - best.0 <= 1e-12 * best.0 { best.0 } else { lower };
    Ok(ThetaBounds {
        lower,
        upper: best.0,
        source: best.1,
    })
}

/// `a^{1/2} log(a^{-1/2} b a^{-1/2}) a^{1/2}`.
fn affine_log(a: &SymTensorPoint, b: &SymTensorPoint) -> SymTensorPoint {
    let c = Congruence::new(a).expect("positive definite");
    c.from_s(&super::linalg::sym_apply(&c.to_s(b), f64::ln))
}
