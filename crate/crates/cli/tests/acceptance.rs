//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use transjulia::analysis::{
    beta_e, count_non_normal_brute, legendre_check, ruelle_dimension, DEFAULT_RHO_SCHEDULE,
};
use transjulia::boettcher::{bottcher_g, functional_residual, phi_series, OMEGA_ORDER};
use transjulia::geometry::{assemble, brick, diameter, hausdorff_one_sided, julia_oracle, AssembleOptions};
use transjulia::polymap::{angle_cycles, landing_point, periodic_points_on_j, LandingOptions, PeriodicOrbit};
use transjulia::transseries::{build_model, conjugacy_residual, tracer, ModelOptions, TransseriesModel};
use transjulia::{QuadParam, C64};
use transjulia_cli::commands::hoeffding_rows;
use transjulia_cli::verify::{omega_stddev, sector_error, ORACLE_ARGS, ORACLE_SCALES, ORACLE_SECTOR};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn real(l: f64) -> QuadParam {
    QuadParam::real(l).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Sorted distinct values, merging those closer than `tol`.
fn distinct(mut xs: Vec<f64>, tol: f64) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < tol);
    xs
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn multiset_match(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol)
}

/// Landing orbits at `lambda = 0.9` of every angle cycle of exact period 1..=5.
fn orbits_09() -> BTreeMap<usize, Vec<PeriodicOrbit>> {
    let p = real(0.9);
    let phi = phi_series(&p, 1 << 12).unwrap();
    (1..=5)
        .map(|n| {
            let orbits = angle_cycles(n)
                .into_iter()
                .filter(|c| c.len() == n)
                .map(|c| landing_point(&p, &phi, c[0], &LandingOptions::default()).unwrap())
                .collect();
            (n, orbits)
        })
        .collect()
}

fn c1_exponent_table() -> Outcome {
    let start = Instant::now();
    let orbits = orbits_09();
    let want_re: [&[f64]; 5] = [&[0.13], &[1.16], &[1.08], &[0.98, 1.09], &[0.904, 1.04, 1.12]];
    let want_im: [&[f64]; 5] = [&[], &[], &[0.145], &[0.19], &[0.069, 0.089, 0.21]];
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (n, os)) in orbits.iter().enumerate() {
        let re = distinct(os.iter().map(|o| o.exponent.re).collect(), 1e-6);
        let im = distinct(os.iter().map(|o| o.exponent.im.abs()).filter(|&x| x > 1e-6).collect(), 1e-6);
        ok &= multiset_match(&re, want_re[i], 0.015) && multiset_match(&im, want_im[i], 0.015);
        detail.push(format!("N={n} Re {re:.3?} |Im| {im:.3?}"));
    }
    let secs = start.elapsed().as_secs_f64();
    check(ok && secs < 30.0, format!("{} ({secs:.1} s)", detail.join("; ")))
}

fn c2_boettcher_residual() -> Outcome {
    let mut worst: f64 = 0.0;
    for l in [C64::new(0.5, 0.0), C64::new(0.9, 0.0), C64::new(0.0, 0.5), C64::new(-1.25, 0.0)] {
        let p = QuadParam::new(l).unwrap();
        let phi = phi_series(&p, 64).unwrap();
        worst = worst.max(functional_residual(&p, &phi, 0.5, 256));
    }
    check(worst <= 1e-9, format!("sup residual {worst:.2e} <= 1e-9"))
}

fn c3_closed_form() -> Outcome {
    let p = real(2.0);
    let phi = phi_series(&p, 256).map_err(|e| e.to_string())?;
    let phi_err = (phi.lowest_index()..=phi.order())
        .map(|k| {
            let want = match k {
                -1 => -0.5,
                0 => 0.5,
                _ => 0.0,
            };
            (phi.coeff(k) - C64::new(want, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    let g = bottcher_g(&p, 256).map_err(|e| e.to_string())?;
    let g_err = (1..=256).map(|k| (g.series.coeff(k) - C64::new(2.0, 0.0)).norm()).fold(0.0, f64::max);
    let be = beta_e(&p, &phi, 4096, &DEFAULT_RHO_SCHEDULE).map_err(|e| e.to_string())?.beta_e;
    let phi_big = phi_series(&p, 1024).map_err(|e| e.to_string())?;
    let model = build_model(&p, &phi_big, "0".parse().unwrap(), &ModelOptions::default()).map_err(|e| e.to_string())?;
    let b = brick(&model, 0.05, 201).map_err(|e| e.to_string())?;
    let asm = assemble(&p, &b, 8, &AssembleOptions::default()).map_err(|e| e.to_string())?;
    let circle = asm
        .all_points()
        .iter()
        .map(|x| ((x - C64::new(0.5, 0.0)).norm() - 0.5).abs())
        .fold(0.0, f64::max);
    check(
        phi_err <= 1e-12 && g_err <= 1e-12 && (be - 1.0).abs() <= 1e-6 && circle <= 1e-6,
        format!("phi {phi_err:.1e}, G {g_err:.1e}, beta_E {be:.9}, circle {circle:.1e}"),
    )
}

/// Models at `lambda = 0.9` for all cycles of criterion 1, built once.
fn models_09() -> Result<&'static [TransseriesModel], String> {
    static MODELS: OnceLock<Result<Vec<TransseriesModel>, String>> = OnceLock::new();
    MODELS.get_or_init(build_models_09).as_deref().map_err(Clone::clone)
}

fn build_models_09() -> Result<Vec<TransseriesModel>, String> {
    let p = real(0.9);
    let phi = phi_series(&p, OMEGA_ORDER).unwrap();
    let mut out = Vec::new();
    for n in 1..=5 {
        for c in angle_cycles(n).into_iter().filter(|c| c.len() == n) {
            out.push(build_model(&p, &phi, c[0], &ModelOptions::default()).map_err(|e| format!("{}: {e}", c[0]))?);
        }
    }
    Ok(out)
}

fn c4_normal_form(models: &[TransseriesModel]) -> Outcome {
    let worst = models
        .iter()
        .map(|m| conjugacy_residual(&m.g, &m.conjugacy, m.conv_radius_est / 2.0, 256))
        .fold(0.0, f64::max);
    check(worst <= 1e-9, format!("{} models, sup residual {worst:.2e} <= 1e-9", models.len()))
}

fn c5_omega(models: &[TransseriesModel]) -> Outcome {
    let periodicity = models.iter().map(|m| m.residuals.periodicity).fold(0.0, f64::max);
    let third = models
        .iter()
        .find(|m| m.orbit.angle == "1/3".parse().unwrap())
        .ok_or("no 1/3 model")?;
    let c0 = third.omega.c0().norm();
    let ratio = third.omega.raw_coeff(1).norm().max(third.omega.raw_coeff(-1).norm()) / c0;
    let mut sds = Vec::new();
    for (l, t) in [(0.5, "0"), (0.9, "1/3"), (-1.25, "0"), (2.0, "0")] {
        let p = real(l);
        let phi = phi_series(&p, OMEGA_ORDER).unwrap();
        let m = build_model(&p, &phi, t.parse().unwrap(), &ModelOptions::default()).map_err(|e| e.to_string())?;
        sds.push(omega_stddev(&m.omega));
    }
    let varied = sds[..3].iter().all(|&s| s > 1e-12) && sds[3] < 1e-10;
    check(
        periodicity <= 1e-6 && ratio <= 1e-4 && varied,
        format!("periodicity {periodicity:.1e}, |c1/c0| {ratio:.2e}, stddev (0.5, 0.9, -1.25, 2) {}", sci(&sds)),
    )
}

fn c6_model_vs_phi() -> Outcome {
    let p = real(0.5);
    let phi = phi_series(&p, OMEGA_ORDER).unwrap();
    let m = build_model(&p, &phi, "0".parse().unwrap(), &ModelOptions::default()).map_err(|e| e.to_string())?;
    let tr = tracer(&p, &phi, None);
    let sector: Vec<f64> = ORACLE_SCALES
        .iter()
        .map(|&s| sector_error(&m, &tr, s, ORACLE_SECTOR, ORACLE_ARGS).unwrap())
        .collect();
    let axis: Vec<f64> = ORACLE_SCALES.iter().map(|&s| sector_error(&m, &tr, s, 0.0, 1).unwrap()).collect();
    let decreasing = sector.windows(2).all(|w| w[1] < w[0]);
    check(
        decreasing && sector[2] <= 1e-6,
        format!("sup over |arg s| <= pi/4: {}; real axis: {}", sci(&sector), sci(&axis)),
    )
}

fn c7_ruelle() -> Outcome {
    let opts = LandingOptions::default();
    let p2 = real(2.0);
    let phi2 = phi_series(&p2, 1024).unwrap();
    let ds: Vec<f64> = (2..=10)
        .map(|n| ruelle_dimension(&p2, &phi2, n, &opts).map(|r| r.dimension))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let d4 = ds[2];
    let exact = 15f64.log2() / 4.0;
    let increasing = ds.windows(2).all(|w| w[1] > w[0]) && ds.iter().all(|&d| d < 1.0);
    let p = real(0.5);
    let phi = phi_series(&p, 1 << 12).unwrap();
    let be = beta_e(&p, &phi, 4096, &DEFAULT_RHO_SCHEDULE).map_err(|e| e.to_string())?.beta_e;
    let d10 = ruelle_dimension(&p, &phi, 10, &opts).map_err(|e| e.to_string())?.dimension;
    check(
        (d4 - exact).abs() <= 1e-9 && increasing && d10 >= 1.0 / be - 0.02,
        format!("c=0 n=4 {d4:.9} (|err| {:.1e}), n=2..10 increasing {increasing}; lambda=0.5 D_10 {d10:.5} vs 1/beta_E - 0.02 = {:.5}", (d4 - exact).abs(), 1.0 / be - 0.02),
    )
}

fn c8_hoeffding() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut agree = true;
    for m in [1, 2] {
        for eps in [0.25, 0.5] {
            for row in hoeffding_rows(1, 20, m, eps).map_err(|e| e.to_string())? {
                worst = worst.max(row.fraction / row.bound);
                cases += 1;
                // direct enumeration where 2^{N m} strings are cheap to list
                if row.n * m <= 20 {
                    agree &= count_non_normal_brute(row.n, m, eps) as u128 == row.non_normal;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1.0 && agree && secs < 60.0,
        format!("{cases} cases, max fraction/bound {worst:.3}, enumeration agrees {agree} ({secs:.1} s)"),
    )
}

fn c9_assembly() -> Outcome {
    let p = real(0.5);
    let phi = phi_series(&p, OMEGA_ORDER).unwrap();
    let m = build_model(&p, &phi, "0".parse().unwrap(), &ModelOptions::default()).map_err(|e| e.to_string())?;
    let b = brick(&m, 0.05, 201).map_err(|e| e.to_string())?;
    let asm = assemble(&p, &b, 12, &AssembleOptions::default()).map_err(|e| e.to_string())?;
    let pts = asm.all_points();
    let oracle = julia_oracle(&p, 100_000, 1);
    let hd = hausdorff_one_sided(&pts, &oracle.points);
    let diam = diameter(&oracle.points);
    check(
        hd <= 2e-2 * diam,
        format!("{} copies, Hausdorff {hd:.2e}, diameter {diam:.3}, ratio {:.2e} <= 2e-2", asm.copies.len(), hd / diam),
    )
}

fn c10_legendre() -> Outcome {
    let p = real(0.5);
    let phi = phi_series(&p, 1 << 12).unwrap();
    let set = periodic_points_on_j(&p, &phi, 10, &LandingOptions::default()).map_err(|e| e.to_string())?;
    let d = transjulia::analysis::ruelle_from_set(&set).map_err(|e| e.to_string())?.dimension;
    let dist = transjulia::analysis::exponent_distribution(&set);
    let v = legendre_check(&dist, d);
    check((v + 1.0).abs() <= 0.1, format!("D {d:.5}, max_s(-D s - Phi_10(s)) = {v:.4}, |value + 1| = {:.4} (tolerance 0.1)", (v + 1.0).abs()))
}

fn run_verify(dir: &Path, threads: Option<usize>) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_transjulia"));
    cmd.args(["verify", "--lambda", "0.5", "--out"]).arg(dir);
    if let Some(t) = threads {
        cmd.args(["--threads", &t.to_string()]);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if out.status.code() != Some(0) {
        return Err(format!("verify exited with {:?}", out.status.code()));
    }
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        files.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

fn c11_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs = [None, None, Some(1), Some(8)];
    let mut outputs = Vec::new();
    for (i, t) in runs.iter().enumerate() {
        outputs.push(run_verify(&tmp.path().join(format!("run{i}")), *t)?);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    let names: Vec<&String> = outputs[0].keys().collect();
    check(same && !names.is_empty(), format!("4 runs (default, default, --threads 1, --threads 8) of {names:?} identical: {same}"))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 exponent table (lambda=0.9, periods 1..5)", Box::new(c1_exponent_table)),
        ("2 Boettcher functional residual (K=64)", Box::new(c2_boettcher_residual)),
        ("3 closed form at lambda=2", Box::new(c3_closed_form)),
        ("4 normal-form residual (lambda=0.9 models)", Box::new(|| c4_normal_form(models_09()?))),
        ("5 omega periodicity and decay", Box::new(|| c5_omega(models_09()?))),
        ("6 transseries vs phi (lambda=0.5, t=0)", Box::new(c6_model_vs_phi)),
        ("7 Ruelle dimension", Box::new(c7_ruelle)),
        ("8 Hoeffding bound (N <= 20)", Box::new(c8_hoeffding)),
        ("9 brick assembly fidelity (depth 12)", Box::new(c9_assembly)),
        ("10 Legendre check (lambda=0.5, n=10)", Box::new(c10_legendre)),
        ("11 verify determinism", Box::new(c11_determinism)),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("PASS  criterion {name}: {d} [{secs:.1} s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL  criterion {name}: {d} [{secs:.1} s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
