//! One-dimensional quadrature: adaptive integration of callables and
//! rules for sampled integrands on (possibly nonuniform) time grids.

use serde::{Deserialize, Serialize};

/// Maximal bisection depth of [`integrate`].
const MAX_DEPTH: u32 = 24;

/// Integrate `f` over `[a, b]` to an absolute error of about `tol`.
///
/// Tanh-sinh quadrature with nodes placed by their distance to the nearer
/// endpoint, so integrable endpoint singularities are sampled at full
/// precision. An interval is bisected until it agrees with the sum of its halves.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let whole = tanh_sinh(f, a, b, tol);
    integrate_rec(f, a, b, whole, tol, MAX_DEPTH)
}

fn integrate_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = tanh_sinh(f, a, m, 0.5 * tol);
    let right = tanh_sinh(f, m, b, 0.5 * tol);
    let halves = left + right;
    // requests below round-off are met once the difference reaches the noise floor
    let floor = 64.0 * f64::EPSILON * halves.abs();
    if (halves - whole).abs() <= tol.max(floor) || depth == 0 || (b - a).abs() < 1e-300 {
        return halves;
    }
    integrate_rec(f, a, m, left, 0.5 * tol, depth - 1) + integrate_rec(f, m, b, right, 0.5 * tol, depth - 1)
}

const TS_LEVELS: u32 = 9;
const TS_TMAX: f64 = 6.5;

fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let len = b - a;
    if len == 0.0 {
        return 0.0;
    }
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() { v } else { 0.0 }
    };
    // contribution of the node pair at abscissa t > 0, weights without the step factor
    let pair = |t: f64| -> f64 {
        let s = std::f64::consts::FRAC_PI_2 * t.sinh();
        let e = (-2.0 * s).exp();
        let delta = e / (1.0 + e);
        let cs = s.cosh();
        let w = std::f64::consts::FRAC_PI_4 * t.cosh() / (cs * cs);
        if delta * len.abs() == 0.0 || w == 0.0 {
            return 0.0;
        }
        w * (eval(a + len * delta) + eval(b - len * delta))
    };
    let mut h = 1.0;
    let mut sum = std::f64::consts::FRAC_PI_4 * eval(0.5 * (a + b));
    let mut k = 1;
    while k as f64 * h <= TS_TMAX {
        sum += pair(k as f64 * h);
        k += 1;
    }
    let mut est = len * h * sum;
    for level in 1..=TS_LEVELS {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= TS_TMAX {
            sum += pair(k as f64 * h);
            k += 2;
        }
        let next = len * h * sum;
        let diff = (next - est).abs();
        est = next;
        if level >= 3 && diff <= tol.max(16.0 * f64::EPSILON * est.abs()) {
            break;
        }
    }
    est
}

/// Constant of the small-volume distance bounds: `sqrt(n) * int_0^1 t^(n/4-1) dt`
/// for `n < 4`, and `sqrt(n)` from `n = 4` on.
pub fn small_volume_constant(n: usize) -> f64 {
    let nf = n as f64;
    if n < 4 {
        nf.sqrt() * 4.0 / nf
    } else {
        nf.sqrt()
    }
}

/// Rule used to integrate sampled values over a time grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeRule {
    /// Composite trapezoid, second order.
    #[default]
    Trapezoid,
    /// Composite Simpson on nonuniform pairs, fourth order; an odd trailing
    /// interval is closed with the quadratic through the last three samples.
    Simpson,
}

/// Cumulative integral of `values` over `times`; entry `i` is the integral up to `times[i]`.
pub fn cumulative(times: &[f64], values: &[f64], rule: TimeRule) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let m = times.len();
    let mut out = vec![0.0; m];
    if m < 2 {
        return out;
    }
    match rule {
        TimeRule::Trapezoid => {
            let mut acc = crate::sum::NeumaierSum::new();
            for i in 1..m {
                acc.add(0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]));
                out[i] = acc.value();
            }
        }
        TimeRule::Simpson if m == 2 => {
            out[1] = 0.5 * (times[1] - times[0]) * (values[0] + values[1]);
        }
        TimeRule::Simpson => {
            let mut acc = crate::sum::NeumaierSum::new();
            // even-index samples close a Simpson pair
            let mut i = 2;
            while i < m {
                acc.add(simpson_pair(&times[i - 2..=i], &values[i - 2..=i]));
                out[i] = acc.value();
                i += 2;
            }
            // odd-index samples: previous pair sum plus the trailing-interval correction
            let mut i = 1;
            while i < m {
                let base = if i >= 2 { out[i - 1] } else { 0.0 };
                out[i] = if i == 1 {
                    simpson_head(&times[0..3], &values[0..3])
                } else {
                    base + simpson_tail(&times[i - 2..=i], &values[i - 2..=i])
                };
                i += 2;
            }
        }
    }
    out
}

/// Integral of `values` over the whole of `times`.
pub fn integrate_samples(times: &[f64], values: &[f64], rule: TimeRule) -> f64 {
    cumulative(times, values, rule).last().copied().unwrap_or(0.0)
}

fn simpson_pair(t: &[f64], f: &[f64]) -> f64 {
    let h0 = t[1] - t[0];
    let h1 = t[2] - t[1];
    let hs = h0 + h1;
    hs / 6.0 * ((2.0 - h1 / h0) * f[0] + hs * hs / (h0 * h1) * f[1] + (2.0 - h0 / h1) * f[2])
}

/// Integral over `[t1, t2]` of the quadratic through three samples.
fn simpson_tail(t: &[f64], f: &[f64]) -> f64 {
    let h0 = t[1] - t[0];
    let h1 = t[2] - t[1];
    let alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
    let beta = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
    let eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    alpha * f[2] + beta * f[1] - eta * f[0]
}

/// Integral over `[t0, t1]` of the quadratic through three samples.
fn simpson_head(t: &[f64], f: &[f64]) -> f64 {
    // mirror of the tail formula
    let rt = [-t[2], -t[1], -t[0]];
    let rf = [f[2], f[1], f[0]];
    simpson_tail(&rt, &rf)
}
