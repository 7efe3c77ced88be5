use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ebin_core::completion::{
    conformal_distance, distance_lower, distance_upper, omega_limit_with, radial_path_length,
    volume_convergence_report, OmegaOptions,
};
use ebin_core::field::{
    exp_domain_sup, exp_field, exp_velocity_field, geometric, l2_norm, log_field, path_length, smallvol_bound, smallvol_sweep,
    straight_segment_length, theta_y, total_volume, volume, CellMask, GridSpec, MetricField,
    ScalarField, TangentField, TensorField,
};
use ebin_core::quad::{cumulative, TimeRule};
use ebin_core::spd::{ClassifyOptions, PointKind, SymTensorPoint};
use ebin_core::{io, Error};

use crate::args::RunArgs;
use crate::report::{Provenance, Report, Table};

/// Failures that end a run with the usage/IO exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, RunError>;

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be a positive number, got {v}")))
    }
}

fn need_n(grid: &GridSpec, n: usize, preset: &str) -> Result<()> {
    if grid.n != n {
        return Err(usage(format!("preset {preset} needs a {n}-dimensional grid, got {}", grid.n)));
    }
    Ok(())
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn diag(v: &[f64]) -> SymTensorPoint {
    SymTensorPoint::diag(v).expect("valid diagonal")
}

fn random_pd(n: usize, rng: &mut ChaCha8Rng) -> SymTensorPoint {
    let mut b = [[0.0f64; 4]; 4];
    for row in b.iter_mut().take(n) {
        for v in row.iter_mut().take(n) {
            *v = rng.random_range(-1.0..=1.0);
        }
    }
    let shift = rng.random_range(0.1..=1.0);
    let mut upper = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let dot: f64 = (0..n).map(|k| b[i][k] * b[j][k]).sum();
            upper.push(dot + if i == j { shift } else { 0.0 });
        }
    }
    SymTensorPoint::from_upper(n, &upper).expect("packed length")
}

fn random_traceless(g: &SymTensorPoint, rng: &mut ChaCha8Rng) -> SymTensorPoint {
    let n = g.dim();
    let mut upper = Vec::with_capacity(n * (n + 1) / 2);
    for _ in 0..n * (n + 1) / 2 {
        upper.push(rng.random_range(-1.0..=1.0));
    }
    let h = SymTensorPoint::from_upper(n, &upper).expect("packed length");
    let (h_t, _) = ebin_core::spd::split_traceless(g, &h).expect("metric cell");
    h_t
}

/// Speed of `t ↦ diag(e^{rt}, e^{−st})` along a whole grid, with its closed form.
pub fn eg2(args: &RunArgs, grid: &GridSpec, report: &mut Report) -> Result<()> {
    need_n(grid, 2, "eg2")?;
    let r = positive("r", args.r.unwrap_or(1.0))?;
    let s = positive("s", args.s.unwrap_or(2.0))?;
    let t_max = args.t_max.unwrap_or(40.0);
    let samples = args.samples.unwrap_or(400);
    if !(t_max > 1.0 && t_max.is_finite()) {
        return Err(usage("--t-max must exceed 1"));
    }
    if samples < 3 {
        return Err(usage("--samples must be at least 3"));
    }
    report.param("r", r);
    report.param("s", s);
    report.param("t_max", t_max);
    report.param("samples", samples);

    let times: Vec<f64> = (0..samples).map(|i| 1.0 + (t_max - 1.0) * i as f64 / (samples - 1) as f64).collect();
    let mut speeds = Vec::with_capacity(samples);
    for &t in &times {
        let g = MetricField::constant(grid, diag(&[(r * t).exp(), (-s * t).exp()]));
        let h = TangentField::constant(grid, diag(&[r * (r * t).exp(), -s * (-s * t).exp()]));
        speeds.push(l2_norm(&g, &h)?);
    }
    let lengths = cumulative(&times, &speeds, TimeRule::Simpson);
    let c = (r * r + s * s).sqrt();
    let k = (r - s) / 4.0;
    let speed_at = |t: f64| c * (k * t).exp();
    let length_at = |t: f64| {
        if k == 0.0 {
            c * (t - 1.0)
        } else {
            c * ((k * t).exp() - k.exp()) / k + 0.0
        }
    };

    let mut table = Table::new(&[
        "t",
        "speed",
        "analytic_speed",
        "speed_rel_err",
        "length",
        "analytic_length",
        "length_rel_err",
        "provenance",
    ]);
    let (mut max_speed, mut max_len) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let t = times[i];
        let se = rel_err(speeds[i], speed_at(t));
        let le = if i == 0 { 0.0 } else { rel_err(lengths[i], length_at(t)) };
        max_speed = max_speed.max(se);
        max_len = max_len.max(le);
        table.push(vec![
            t.into(),
            speeds[i].into(),
            speed_at(t).into(),
            se.into(),
            lengths[i].into(),
            length_at(t).into(),
            le.into(),
            "quadrature".into(),
        ]);
    }
    report.table = table;
    report.value("length_analytic", length_at(t_max), Provenance::Formula);
    report.value("length", lengths[samples - 1], Provenance::Quadrature);
    report.check("max_speed_rel_err", max_speed, 1e-10, Provenance::Quadrature);
    report.check("max_length_rel_err", max_len, 1e-6, Provenance::Quadrature);
    Ok(())
}

/// `g_k = diag(|cos k|, 1/k)`: deflation, ω-limit and volume trace.
pub fn eg3(args: &RunArgs, grid: &GridSpec, report: &mut Report) -> Result<()> {
    need_n(grid, 2, "eg3")?;
    let eps_det = positive("eps-det", args.eps_det.unwrap_or(0.02))?;
    let c_big = positive("c-big", args.c_big.unwrap_or(1e6))?;
    let k_max = args.k_max.unwrap_or(200);
    if k_max < 8 {
        return Err(usage("--k-max must be at least 8"));
    }
    report.param("eps_det", eps_det);
    report.param("c_big", c_big);
    report.param("k_max", k_max);

    let seq: Vec<MetricField> = (1..=k_max)
        .map(|k| MetricField::constant(grid, diag(&[(k as f64).cos().abs(), 1.0 / k as f64])))
        .collect();
    let mut opts = OmegaOptions {
        c_big,
        ..OmegaOptions::default()
    };
    opts.classify = ClassifyOptions {
        eps_det,
        ..opts.classify
    };
    let rep = omega_limit_with(&seq, &opts)?;
    let rows = volume_convergence_report(&seq, &rep.omega_limit, &[], Some(&rep.deflated), 1e-8)?;

    let mut table = Table::new(&["k", "volume", "analytic_volume", "abs_err", "provenance"]);
    let mut max_err = 0.0f64;
    for (i, v) in rep.volume_trace.iter().enumerate() {
        let k = (i + 1) as f64;
        let want = (k.cos().abs() / k).sqrt() * grid.cell_measure * grid.cell_count() as f64;
        let err = (v - want).abs();
        max_err = max_err.max(err);
        table.push(vec![(i + 1).into(), (*v).into(), want.into(), err.into(), "formula".into()]);
    }
    report.table = table;
    let cells = grid.cell_count() as f64;
    report.value("cells", cells, Provenance::Formula);
    report.value("deflated_cells", rep.deflated.count() as f64, Provenance::Formula);
    report.value(
        "converging_cells",
        rep.count(|c| matches!(c.kind, PointKind::Converges { .. })) as f64,
        Provenance::Formula,
    );
    report.value(
        "degenerating_cells",
        rep.count(|c| matches!(c.kind, PointKind::Degenerates)) as f64,
        Provenance::Formula,
    );
    report.value(
        "not_cauchy_cells",
        rep.count(|c| matches!(c.kind, PointKind::NotCauchy { .. })) as f64,
        Provenance::Formula,
    );
    report.check_flag("deflated_is_everything", rep.deflated.count() == grid.cell_count(), Provenance::Formula);
    report.check("omega_limit_max_abs", rep.omega_limit.max_abs(), 0.0, Provenance::Formula);
    report.check("volume_trace_max_err", max_err, 1e-12, Provenance::Formula);
    let deflated_row = rows.iter().find(|r| r.name == "deflated").expect("deflated row");
    report.check_flag("deflated_volume_vanishes", deflated_row.vanishing == Some(true), Provenance::Formula);
    if let Some(p) = &args.field_out {
        io::write_field(p, &rep.omega_limit)?;
    }
    Ok(())
}

/// Shrink–cross–inflate sweep between the two tori metrics.
pub fn tori(args: &RunArgs, grid: &GridSpec, report: &mut Report) -> Result<()> {
    need_n(grid, 2, "tori")?;
    let s_start = positive("s-param", args.s_param.unwrap_or(0.1))?;
    if s_start > 1.0 {
        return Err(usage("--s-param must lie in (0, 1]"));
    }
    let width = args.smooth_width.unwrap_or(0.0);
    if !(width >= 0.0 && width.is_finite()) {
        return Err(usage("--smooth-width must be nonnegative"));
    }
    let steps = args.steps.unwrap_or(8);
    if steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    report.param("s_param", s_start);
    report.param("smooth_width", width);
    report.param("steps", steps);

    let g0 = MetricField::constant(grid, diag(&[10.0, 1e-5]));
    let g1 = MetricField::constant(grid, diag(&[1e10, 1e-14]));
    let e = CellMask::all(grid);
    let sweep = smallvol_sweep(&g0, &g1, &e, &geometric(s_start, 0.1, steps), &[width])?;
    let mut table = Table::new(&["s", "smooth_width", "shrink", "cross", "inflate", "total", "provenance"]);
    for row in &sweep.rows {
        table.push(vec![
            row.s.into(),
            row.smooth_width.into(),
            row.shrink.into(),
            row.cross.into(),
            row.inflate.into(),
            row.total.into(),
            "sweep".into(),
        ]);
    }
    report.table = table;
    let (v0, v1) = (total_volume(&g0)?, total_volume(&g1)?);
    report.check("vol_g0_abs_err", (v0 - 0.01).abs(), 1e-12, Provenance::Formula);
    report.check("vol_g1_abs_err", (v1 - 0.01).abs(), 1e-12, Provenance::Formula);
    report.value("vol_g0", v0, Provenance::Formula);
    report.value("vol_g1", v1, Provenance::Formula);
    let bound = smallvol_bound(&g0, &g1, &e)?;
    report.value("bound", bound, Provenance::Formula);
    report.value("best_s", sweep.best.s, Provenance::Sweep);
    report.check("best_length", sweep.best.total, 1.1 * bound, Provenance::Sweep);
    let rise = sweep.rows.windows(2).map(|w| w[1].total - w[0].total).fold(f64::NEG_INFINITY, f64::max);
    report.check("max_increase_in_s", rise, 0.0, Provenance::Sweep);
    Ok(())
}

/// Geodesic with a shrinking pure-trace part reaching the boundary in finite length.
pub fn incompleteness(args: &RunArgs, grid: &GridSpec, report: &mut Report) -> Result<()> {
    let alpha = args.alpha.unwrap_or(-2.0);
    let beta = args.beta.unwrap_or(0.0);
    let samples = args.samples.unwrap_or(201);
    if !(alpha < 0.0 && alpha.is_finite()) {
        return Err(usage("--alpha must be negative"));
    }
    if !beta.is_finite() {
        return Err(usage("--beta must be finite"));
    }
    if samples < 3 {
        return Err(usage("--samples must be at least 3"));
    }
    report.param("alpha", alpha);
    report.param("beta", beta);
    report.param("samples", samples);

    let mut rng = ChaCha8Rng::seed_from_u64(report.seed);
    let cells: Vec<SymTensorPoint> = (0..grid.cell_count()).map(|_| random_pd(grid.n, &mut rng)).collect();
    let g0 = TensorField::new(grid, cells)?;
    // pure trace on the first half of the cells, a traceless admixture on the rest
    let half = grid.cell_count() / 2;
    let raw: Vec<SymTensorPoint> = g0
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let pure = c.scale(alpha);
            if i < half || grid.n == 1 {
                pure
            } else {
                pure.add(&random_traceless(c, &mut rng).scale(beta))
            }
        })
        .collect();
    let raw = TensorField::new(grid, raw)?;
    let h = raw.scale(1.0 / l2_norm(&g0, &raw)?);
    let norm = l2_norm(&g0, &h)?;
    let (sup, cell) = exp_domain_sup(&g0, &h)?;
    report.value("h_norm", norm, Provenance::Formula);
    report.value("domain_sup", sup, Provenance::Formula);
    if let Some(c) = cell {
        report.value("boundary_cell", c as f64, Provenance::Formula);
    }
    report.check_flag("domain_finite", sup.is_finite(), Provenance::Formula);
    if !sup.is_finite() {
        return Ok(());
    }
    let end = sup * (1.0 - 1e-4);
    let times: Vec<f64> = (0..samples).map(|i| end * i as f64 / (samples - 1) as f64).collect();
    let mut speeds = Vec::with_capacity(samples);
    let mut volumes = Vec::with_capacity(samples);
    for &t in &times {
        let g = exp_field(&g0, &h, t)?;
        let v = exp_velocity_field(&g0, &h, t)?;
        speeds.push(l2_norm(&g, &v)?);
        volumes.push(total_volume(&g)?);
    }
    let cum = cumulative(&times, &speeds, TimeRule::Trapezoid);
    let mut table = Table::new(&["t", "length", "t_times_norm", "rel_err", "volume", "provenance"]);
    let mut max_err = 0.0f64;
    for (i, &t) in times.iter().enumerate() {
        let want = t * norm;
        let err = if i == 0 { 0.0 } else { rel_err(cum[i], want) };
        max_err = max_err.max(err);
        table.push(vec![
            t.into(),
            cum[i].into(),
            want.into(),
            err.into(),
            volumes[i].into(),
            "quadrature".into(),
        ]);
    }
    report.table = table;
    let len = *cum.last().expect("samples");
    report.value("length", len, Provenance::Quadrature);
    report.check("length_vs_traversed_rel_err", max_err, 1e-10, Provenance::Quadrature);
    // the sampled interval stops 1e-4 short of the boundary; allow round-off on top
    report.check(
        "length_vs_sup_rel_gap",
        rel_err(len, sup * norm),
        1e-4 * (1.0 + 1e-9),
        Provenance::Quadrature,
    );
    Ok(())
}

/// Distance in the completed conformal orbit and metric axioms on random factors.
pub fn conformal(args: &RunArgs, grid: &GridSpec, report: &mut Report) -> Result<()> {
    let rho0 = args.rho0.unwrap_or(1.0);
    let rho1 = args.rho1.unwrap_or(4.0);
    let triples = args.triples.unwrap_or(200);
    for (name, v) in [("rho0", rho0), ("rho1", rho1)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(usage(format!("--{name} must be a nonnegative number")));
        }
    }
    report.param("rho0", rho0);
    report.param("rho1", rho1);
    report.param("triples", triples);

    let g = MetricField::identity(grid);
    let c = |v: f64| ScalarField::constant(grid, v);
    let n = grid.n as f64;
    let d = conformal_distance(&c(rho0), &c(rho1), &g)?;
    let closed = 4.0 / n.sqrt() * (rho1.powf(n / 4.0) - rho0.powf(n / 4.0)).abs() * total_volume(&g)?.sqrt();
    let radial = radial_path_length(&c(rho0), &c(rho1), &g, 1e-13)?;
    report.value("distance", d, Provenance::Formula);
    report.value("radial_length", radial, Provenance::Quadrature);
    report.check("distance_vs_closed_form", (d - closed).abs(), 1e-12 * closed.max(1.0), Provenance::Formula);
    let residual = if d == 0.0 { radial.abs() } else { rel_err(radial, d) };
    report.check("radial_residual", residual, 1e-10, Provenance::Quadrature);

    let mut rng = ChaCha8Rng::seed_from_u64(report.seed);
    let mut factor = || {
        let v = (0..grid.cell_count())
            .map(|_| if rng.random_range(0.0..1.0) < 0.1 { 0.0 } else { rng.random_range(0.0..=5.0) })
            .collect();
        ScalarField::new(grid, v)
    };
    let mut table = Table::new(&["triple", "d_ab", "d_ba", "d_ac", "d_bc", "triangle_slack", "provenance"]);
    let (mut asym, mut excess) = (0.0f64, f64::NEG_INFINITY);
    for i in 0..triples {
        let (a, b, cc) = (factor()?, factor()?, factor()?);
        let ab = conformal_distance(&a, &b, &g)?;
        let ba = conformal_distance(&b, &a, &g)?;
        let ac = conformal_distance(&a, &cc, &g)?;
        let bc = conformal_distance(&b, &cc, &g)?;
        asym = asym.max((ab - ba).abs());
        excess = excess.max(ac - ab - bc);
        table.push(vec![
            i.into(),
            ab.into(),
            ba.into(),
            ac.into(),
            bc.into(),
            (ab + bc - ac).into(),
            "formula".into(),
        ]);
    }
    report.table = table;
    if triples > 0 {
        report.check("max_asymmetry", asym, 1e-10, Provenance::Formula);
        report.check("max_triangle_excess", excess, 1e-10, Provenance::Formula);
    }
    Ok(())
}

/// Bounds between two user fields, or the length of a user path.
pub fn custom(args: &RunArgs, grid_flag: Option<&GridSpec>, report: &mut Report) -> Result<()> {
    let mut table = Table::new(&["quantity", "value", "provenance"]);
    let row = |table: &mut Table, name: &str, v: f64, p: &str| table.push(vec![name.into(), v.into(), p.into()]);
    let check_grid = |g: &GridSpec| -> Result<()> {
        match grid_flag {
            Some(want) if want.dims != g.dims => Err(usage(format!(
                "--grid {:?} disagrees with the input grid {:?}",
                want.dims, g.dims
            ))),
            _ => Ok(()),
        }
    };
    match (&args.g0, &args.g1, &args.path) {
        (Some(p0), Some(p1), None) => {
            let g0 = io::read_field(p0)?;
            let g1 = io::read_field(p1)?;
            check_grid(&g0.grid)?;
            g0.grid.check_same(&g1.grid)?;
            g0.check_metric()?;
            g1.check_metric()?;
            report.dims = g0.grid.dims.clone();
            report.param("g0", p0.display().to_string());
            report.param("g1", p1.display().to_string());
            let (v0, v1) = (total_volume(&g0)?, total_volume(&g1)?);
            row(&mut table, "vol_g0", v0, "formula");
            row(&mut table, "vol_g1", v1, "formula");
            let lower = distance_lower(&g0, &g1)?;
            let upper = distance_upper(&g0, &g1)?;
            row(&mut table, "distance_lower", lower, "formula");
            row(&mut table, "distance_upper", upper, "formula");
            let theta = theta_y(&g0, &g1, &CellMask::all(&g0.grid))?;
            row(&mut table, "theta_lower", theta.lower, "quadrature");
            row(&mut table, "theta_upper", theta.upper, "quadrature");
            let segment = straight_segment_length(&g0, &g1, 1e-11)?;
            row(&mut table, "straight_segment_length", segment, "quadrature");
            let geodesic = match log_field(&g0, &g1) {
                Ok(h) => Some(l2_norm(&g0, &h)?),
                Err(Error::OutOfRange { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            if let Some(len) = geodesic {
                row(&mut table, "geodesic_length", len, "formula");
            }
            let e = g0.carrier_of_difference(&g1, 0.0);
            if !e.is_empty() {
                row(&mut table, "smallvol_bound", smallvol_bound(&g0, &g1, &e)?, "formula");
                row(&mut table, "vol_g0_on_carrier", volume(&g0, &e)?, "formula");
            }
            report.table = table;
            report.value("distance_upper", upper, Provenance::Formula);
            report.check("lower_minus_upper", lower - upper, 1e-12 * upper.max(1.0), Provenance::Formula);
            report.check(
                "lower_minus_segment",
                lower - segment,
                1e-9 * segment.max(1.0),
                Provenance::Quadrature,
            );
            report.check("theta_gap", theta.lower - theta.upper, 0.0, Provenance::Quadrature);
            report.check_flag("log_in_range", geodesic.is_some(), Provenance::Formula);
        }
        (None, None, Some(pp)) => {
            let path = io::read_path(pp)?;
            let first = path.fields.first().ok_or_else(|| usage("path has no fields"))?;
            check_grid(&first.grid)?;
            report.dims = first.grid.dims.clone();
            report.param("path", pp.display().to_string());
            let len = path_length(&path)?;
            let last = path.fields.last().expect("nonempty");
            let lower = distance_lower(first, last)?;
            row(&mut table, "path_length", len, "quadrature");
            row(&mut table, "endpoint_distance_lower", lower, "formula");
            report.table = table;
            report.value("path_length", len, Provenance::Quadrature);
            report.check(
                "lower_minus_length",
                lower - len,
                1e-6 * len.max(1.0),
                Provenance::Quadrature,
            );
        }
        _ => return Err(usage("preset custom takes either --g0 FILE --g1 FILE or --path FILE")),
    }
    Ok(())
}
