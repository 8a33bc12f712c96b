use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use transjulia_cli::{commands, verify, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "transjulia", version, about = "Böttcher coordinates, transseries and dimension estimates for P(x) = lambda x (1 - x)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file with any subset of the run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Böttcher series G and phi.
    Boettcher,
    /// Landing point, multiplier and exponent of an external angle.
    Periodic,
    /// Local transseries model at a landing point.
    Transseries,
    /// Brick curve at a periodic angle.
    Brick,
    /// Raster image: assembled bricks, the inverse-iteration cloud, or the Mandelbrot set.
    Render,
    /// beta_E, Ruelle-Bowen dimension and the exponent distribution.
    Dimension,
    /// Hoeffding table, string classification and the tilde curve.
    Normality,
    /// Full check suite; exit 1 if any check fails.
    Verify,
}

fn parse_window(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}` in window")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "window needs re_min,re_max,im_min,im_max".to_string())
}

/// Run-configuration flags; names match the JSON config keys.
#[derive(Args, Serialize, Default)]
struct Flags {
    /// Map parameter, e.g. 0.5, -1.25 or 0.3+0.2i.
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<String>,
    /// External angle p/q in turns.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    angle: Option<String>,
    /// Böttcher truncation order K.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<i64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_order: Option<i64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_max: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k_max: Option<i32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_size: Option<usize>,
    /// Period n of the periodic-point sums; largest N of the Hoeffding table.
    #[arg(long, short = 'n', global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_theta: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_schedule: Option<Vec<f64>>,
    /// Brick half-width in turns (at most 0.05).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    half_width: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    /// Inverse-branch assembly depth.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    depth: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    height: Option<usize>,
    /// re_min,re_max,im_min,im_max
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<[f64; 4]>,
    /// julia, oracle or mandelbrot.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_points: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Block length m for normality.
    #[arg(long, short = 'm', global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n0: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_min: Option<usize>,
    /// Binary string to classify.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    bits: Option<String>,
    /// Angle grid size 2^j of the tilde curve.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<usize>,
    /// Output directory.
    #[arg(long, short = 'o', global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let overrides = match serde_json::to_value(&cli.flags)? {
        serde_json::Value::Object(m) => m,
        _ => unreachable!("flags serialize to an object"),
    };
    let cfg = RunConfig::load(cli.config.as_deref(), overrides)?;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let outcome = match cli.command {
        Command::Boettcher => commands::cmd_boettcher(&cfg),
        Command::Periodic => commands::cmd_periodic(&cfg),
        Command::Transseries => commands::cmd_transseries(&cfg),
        Command::Brick => commands::cmd_brick(&cfg),
        Command::Render => commands::cmd_render(&cfg),
        Command::Dimension => commands::cmd_dimension(&cfg),
        Command::Normality => commands::cmd_normality(&cfg),
        Command::Verify => verify::cmd_verify(&cfg),
    }?;
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { 2 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("transjulia: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
