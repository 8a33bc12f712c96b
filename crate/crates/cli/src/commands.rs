use serde::Serialize;
use serde_json::{json, Value};
use transjulia::analysis::{
    count_normal, dimension_report, hoeffding_bound, hoeffding_tail, legendre_check, normality_classify,
    NormalityVerdict,
};
use transjulia::boettcher::{bottcher_g, critical_clearance, functional_residual, phi_series, SeriesFile};
use transjulia::geometry::{
    assemble, brick, julia_oracle, raster, render_mandelbrot, tilde_curve, AssembleOptions, Assembled, Polyline,
    Window,
};
use transjulia::polymap::{landing_point, landing_preperiodic, LandingOptions, PeriodicOrbit, PreperiodicLanding};
use transjulia::transseries::{build_model, coefficient_table, dyadic_model, ModelOptions, TransseriesModel};
use transjulia::{ExternalAngle, PolyMap, QuadParam, TruncatedSeries, C64};

use crate::output::{meta, Writer};
use crate::{CliError, Outcome, RunConfig};

/// Engineering tolerance on `|legendre + 1|` at finite `n`.
pub const LEGENDRE_TOL: f64 = 0.1;
/// Depth below the circle at which the tilde curve samples `phi`.
const TILDE_DEPTH: f64 = 1e-12;
/// Rows of the coefficient table written next to a model.
const TABLE_ROWS: usize = 16;

pub fn model_options(cfg: &RunConfig) -> ModelOptions {
    ModelOptions { n_max: cfg.n_max, k_max: cfg.k_max, grid_size: cfg.grid_size, ..ModelOptions::default() }
}

/// Model at a periodic angle; dyadic angles are a usage error here.
pub fn periodic_model(
    param: &QuadParam,
    phi: &TruncatedSeries,
    angle: ExternalAngle,
    cfg: &RunConfig,
) -> Result<TransseriesModel, CliError> {
    if !angle.is_periodic() {
        return Err(CliError::Usage(format!("{angle} is not periodic; bricks need a periodic angle")));
    }
    Ok(build_model(param, phi, angle, &model_options(cfg))?)
}

fn finish(w: Writer) -> Outcome {
    for f in &w.files {
        println!("wrote {}", f.display());
    }
    Outcome { files: w.files, exit_code: 0 }
}

pub fn cmd_boettcher(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.param()?;
    let g = bottcher_g(&p, cfg.order)?;
    let phi = phi_series(&p, cfg.order)?;
    let residuals = json!({
        "g_equation": g.residual,
        "functional_rho_0_5": functional_residual(&p, &phi, 0.5, 256),
        "functional_rho_0_9": functional_residual(&p, &phi, 0.9, 256),
        "critical_clearance_rho_0_9": critical_clearance(&p, &phi, 0.9, 256),
    });
    let m = meta(cfg, "boettcher", residuals);
    let mut w = Writer::new(&cfg.out)?;
    w.json(
        "boettcher.json",
        &m,
        &json!({
            "method": g.method,
            "iterations": g.iterations,
            "G": SeriesFile::new(&p, &g.series),
            "phi": SeriesFile::new(&p, &phi),
        }),
    )?;
    Ok(finish(w))
}

fn cycle_defect(p: &QuadParam, o: &PeriodicOrbit) -> Result<f64, CliError> {
    Ok((p.eval_n(o.landing(), o.period)? - o.landing()).norm())
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Landing {
    Periodic { orbit: PeriodicOrbit },
    Preperiodic { landing: C64, data: PreperiodicLanding },
}

pub fn cmd_periodic(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.param()?;
    let angle = cfg.angle_value()?;
    let phi = phi_series(&p, cfg.order)?;
    let opts = LandingOptions::default();
    let (body, residuals) = if angle.is_periodic() {
        let orbit = landing_point(&p, &phi, angle, &opts)?;
        let r = json!({ "cycle_defect": cycle_defect(&p, &orbit)?, "abs_multiplier": orbit.multiplier.norm() });
        (Landing::Periodic { orbit }, r)
    } else {
        let data = landing_preperiodic(&p, &phi, angle, &opts)?;
        let m = data.preperiodic.len();
        let image = p.eval_n(data.landing(), m)?;
        let r = json!({
            "cycle_defect": cycle_defect(&p, &data.orbit)?,
            "preperiodic_defect": (image - data.orbit.landing()).norm(),
        });
        (Landing::Preperiodic { landing: data.landing(), data }, r)
    };
    let m = meta(cfg, "periodic", residuals);
    let mut w = Writer::new(&cfg.out)?;
    w.json("periodic.json", &m, &body)?;
    Ok(finish(w))
}

pub fn cmd_transseries(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.param()?;
    let angle = cfg.angle_value()?;
    let phi = phi_series(&p, cfg.omega_order)?;
    let opts = model_options(cfg);
    let mut w = Writer::new(&cfg.out)?;
    if angle.is_periodic() {
        let model = build_model(&p, &phi, angle, &opts)?;
        let table = coefficient_table(&model, TABLE_ROWS.min(cfg.n_max), cfg.k_max);
        let m = meta(cfg, "transseries", serde_json::to_value(&model.residuals)?);
        w.json("transseries.json", &m, &json!({ "model": model.to_file(), "table": table }))?;
    } else {
        let image = angle.doubled_n(angle.dyadic_exponent());
        let base = build_model(&p, &phi, image, &opts)?;
        let dy = dyadic_model(&p, &phi, angle, base, &opts)?;
        let mut residuals = serde_json::to_value(&dy.base.residuals)?;
        residuals["dyadic_validation"] = json!(dy.validation_error);
        residuals["dyadic_validation_s"] = json!(dy.validation_s);
        let m = meta(cfg, "transseries", residuals);
        w.json(
            "transseries.json",
            &m,
            &json!({
                "dyadic": { "angle": dy.angle, "m": dy.m, "landing": dy.landing },
                "model": dy.base.to_file(),
            }),
        )?;
    }
    Ok(finish(w))
}

pub fn cmd_brick(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.param()?;
    let phi = phi_series(&p, cfg.omega_order)?;
    let model = periodic_model(&p, &phi, cfg.angle_value()?, cfg)?;
    let b = brick(&model, cfg.half_width, cfg.samples)?;
    let residuals = json!({
        "model": model.residuals,
        "max_gap": b.max_gap(),
    });
    let m = meta(cfg, "brick", residuals);
    let mut w = Writer::new(&cfg.out)?;
    w.csv("brick.csv", &m, &b.to_csv())?;
    w.json(
        "brick.json",
        &m,
        &json!({ "landing": model.landing(), "b": model.exponent(), "points": b.len(), "source": b.source, "scale": b.scale }),
    )?;
    Ok(finish(w))
}

/// Bounding box of `points` grown by 5% and widened to the pixel aspect ratio.
pub fn fit_window(points: &[C64], width: usize, height: usize) -> Window {
    let (mut a, mut b, mut c, mut d) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in points {
        a = a.min(z.re);
        b = b.max(z.re);
        c = c.min(z.im);
        d = d.max(z.im);
    }
    if !(a < b) || !(c <= d) {
        return Window::new(-1.0, 2.0, -1.5, 1.5);
    }
    let centre = C64::new(0.5 * (a + b), 0.5 * (c + d));
    let mut hw = 0.55 * (b - a);
    let mut hh = 0.55 * (d - c);
    let aspect = width as f64 / height as f64;
    if hw / hh < aspect {
        hw = hh * aspect;
    } else {
        hh = hw / aspect;
    }
    Window::new(centre.re - hw, centre.re + hw, centre.im - hh, centre.im + hh)
}

/// The brick at the configured angle, assembled to the configured depth.
pub fn assembled_bricks(
    p: &QuadParam,
    phi: &TruncatedSeries,
    cfg: &RunConfig,
) -> Result<(TransseriesModel, Polyline, Assembled), CliError> {
    let model = periodic_model(p, phi, cfg.angle_value()?, cfg)?;
    let b = brick(&model, cfg.half_width, cfg.samples)?;
    let asm = assemble(p, &b, cfg.depth, &AssembleOptions::default())?;
    Ok((model, b, asm))
}

pub fn cmd_render(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.param()?;
    let (image, residuals) = match cfg.mode.as_str() {
        "mandelbrot" => {
            let win = cfg.window_value().unwrap_or(Window::new(-2.5, 1.0, -1.75, 1.75));
            (render_mandelbrot(win, cfg.width, cfg.height, cfg.max_iter), json!({}))
        }
        "oracle" => {
            let cloud = julia_oracle(&p, cfg.oracle_points, cfg.seed);
            let win = cfg.window_value().unwrap_or_else(|| fit_window(&cloud.points, cfg.width, cfg.height));
            (raster(&[], &[cloud], cfg.width, cfg.height, win), json!({}))
        }
        _ => {
            // one depth covers J unevenly, so every level up to the depth is drawn
            let phi = phi_series(&p, cfg.omega_order)?;
            let model = periodic_model(&p, &phi, cfg.angle_value()?, cfg)?;
            let b = brick(&model, cfg.half_width, cfg.samples)?;
            let mut copies = Vec::new();
            let (mut pruned, mut refined) = (0, 0);
            for d in 0..=cfg.depth {
                let asm = assemble(&p, &b, d, &AssembleOptions::default())?;
                pruned += asm.pruned;
                refined += asm.refined_points;
                copies.extend(asm.copies);
            }
            let points: Vec<C64> = copies.iter().flat_map(|c| c.points.iter().copied()).collect();
            let win = cfg.window_value().unwrap_or_else(|| fit_window(&points, cfg.width, cfg.height));
            let r = json!({
                "model": model.residuals,
                "copies": copies.len(),
                "pruned": pruned,
                "refined_points": refined,
            });
            (raster(&copies, &[], cfg.width, cfg.height, win), r)
        }
    };
    let mut residuals = residuals;
    residuals["window"] = serde_json::to_value(image.window)?;
    let m = meta(cfg, "render", residuals);
    let name = if image.to_pnm().starts_with(b"P6") { "render.ppm" } else { "render.pgm" };
    let mut w = Writer::new(&cfg.out)?;
    w.pnm(name, &m, &image.to_pnm())?;
    Ok(finish(w))
}

pub fn cmd_dimension(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.param()?;
    let phi = phi_series(&p, cfg.order)?;
    let (report, dist) =
        dimension_report(&p, &phi, cfg.n_theta, &cfg.rho_schedule, cfg.n, &LandingOptions::default())?;
    let check = legendre_check(&dist, report.ruelle_d);
    let legendre = json!({
        "value": check,
        "deviation": (check + 1.0).abs(),
        "tolerance": LEGENDRE_TOL,
        "within_tolerance": (check + 1.0).abs() <= LEGENDRE_TOL,
        "note": "finite-n tolerance is an engineering choice, not a proven rate",
    });
    let residuals = serde_json::to_value(&report.residuals)?;
    let m = meta(cfg, "dimension", residuals);
    let mut w = Writer::new(&cfg.out)?;
    w.json("dimension.json", &m, &json!({ "report": report, "legendre": legendre }))?;
    w.csv("distribution.csv", &m, &dist.to_csv())?;
    Ok(finish(w))
}

#[derive(Clone, Debug, Serialize)]
pub struct HoeffdingRow {
    pub n: usize,
    pub non_normal: u128,
    pub total: u128,
    pub fraction: f64,
    pub bound: f64,
    pub within_bound: bool,
}

/// Exact non-normal fractions against the Hoeffding bound for `N` in `n_min..=n_max`.
pub fn hoeffding_rows(n_min: usize, n_max: usize, m: usize, eps: f64) -> Result<Vec<HoeffdingRow>, CliError> {
    if m > 3 || n_max > 31 || n_min == 0 || n_min > n_max {
        return Err(CliError::Usage("exact counts need m <= 3 and 1 <= n_min <= n <= 31".into()));
    }
    Ok((n_min..=n_max)
        .map(|n| {
            let total = 1u128 << (n * m);
            let non_normal = total - count_normal(n, m, eps);
            let fraction = non_normal as f64 / total as f64;
            let bound = hoeffding_bound(n, m, eps);
            HoeffdingRow { n, non_normal, total, fraction, bound, within_bound: fraction <= bound }
        })
        .collect())
}

pub fn cmd_normality(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let table = hoeffding_rows(cfg.n_min, cfg.n, cfg.m, cfg.epsilon)?;
    let verdict: Option<NormalityVerdict> = cfg.bits.as_ref().map(|bits| {
        let digits: Vec<u8> = bits.bytes().map(|b| b - b'0').collect();
        normality_classify(&digits, cfg.m, cfg.epsilon)
    });
    let (tail, majorant) = hoeffding_tail(cfg.n0, cfg.m, cfg.epsilon, 64);
    let mut w = Writer::new(&cfg.out)?;
    let mut residuals = json!({ "hoeffding_tail_64_terms": tail, "hoeffding_tail_majorant": majorant });
    let mut tilde_json = Value::Null;
    if let Some(res) = cfg.resolution {
        let p = cfg.param()?;
        let phi = phi_series(&p, cfg.order)?;
        let t = tilde_curve(&p, &phi, cfg.n0, cfg.m, cfg.epsilon, res, TILDE_DEPTH)?;
        residuals["excluded_measure"] = json!(t.excluded_measure);
        tilde_json = json!({
            "resolution": res,
            "excluded_measure": t.excluded_measure,
            "segments": t.segments,
            "depth": TILDE_DEPTH,
        });
        let m = meta(cfg, "normality", residuals.clone());
        w.csv("tilde.csv", &m, &t.curve.to_csv())?;
    }
    let m = meta(cfg, "normality", residuals);
    w.json("normality.json", &m, &json!({ "hoeffding": table, "verdict": verdict, "tilde": tilde_json }))?;
    Ok(finish(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_matches_aspect_and_contains_points() {
        let pts = [C64::new(0.0, 0.0), C64::new(2.0, 0.5)];
        let w = fit_window(&pts, 200, 100);
        assert!(((w.re_max - w.re_min) / (w.im_max - w.im_min) - 2.0).abs() < 1e-12);
        assert!(w.re_min < 0.0 && w.re_max > 2.0 && w.im_min < 0.0 && w.im_max > 0.5);
        // degenerate input falls back to a fixed window
        assert_eq!(fit_window(&[], 10, 10), Window::new(-1.0, 2.0, -1.5, 1.5));
    }

    #[test]
    fn hoeffding_rows_are_exact_counts() {
        let rows = hoeffding_rows(1, 4, 1, 0.5).unwrap();
        assert_eq!(rows.len(), 4);
        // N = 2, m = 1, eps = 0.5: "00" and "11" fail |2 c - 2| <= 1
        assert_eq!((rows[1].non_normal, rows[1].total), (2, 4));
        assert!(matches!(hoeffding_rows(1, 40, 1, 0.5), Err(CliError::Usage(_))));
        assert!(matches!(hoeffding_rows(1, 4, 4, 0.5), Err(CliError::Usage(_))));
    }
}
