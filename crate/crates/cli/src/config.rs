use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use transjulia::geometry::Window;
use transjulia::{ExternalAngle, QuadParam, C64};

use crate::CliError;

/// Parses `a+bi`, `a-bi`, `bi`, `i` or a plain real. Decimal points only.
pub fn parse_complex(text: &str) -> Result<C64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse `{text}` as a complex number (expected a+bi)");
    let num = |t: &str| -> Result<f64, String> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        let re = s.parse::<f64>().map_err(|_| bad())?;
        return if re.is_finite() { Ok(C64::new(re, 0.0)) } else { Err(bad()) };
    };
    let bytes = body.as_bytes();
    // split at the last sign that is not a leading sign or an exponent sign
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let z = match split {
        Some(k) => C64::new(body[..k].parse::<f64>().map_err(|_| bad())?, num(&body[k..])?),
        None => C64::new(0.0, num(body)?),
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(bad());
    }
    Ok(z)
}

/// Shortest round-trip text for `z` in `a+bi` form.
pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        return format!("{}", z.re);
    }
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

/// All tunables of a run. Unset fields take the defaults below; a JSON
/// config file may set any subset, and command-line flags override it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: String,
    pub angle: String,
    /// Truncation order `K` of the Böttcher series.
    pub order: i64,
    /// Order used for boundary-value extraction in transseries models.
    pub omega_order: i64,
    pub n_max: usize,
    pub k_max: i32,
    pub grid_size: usize,
    /// Period for periodic-point sums.
    pub n: usize,
    pub n_theta: usize,
    pub rho_schedule: Vec<f64>,
    /// Brick half-width in turns.
    pub half_width: f64,
    pub samples: usize,
    /// Inverse-branch assembly depth.
    pub depth: usize,
    pub width: usize,
    pub height: usize,
    /// `[re_min, re_max, im_min, im_max]`; `None` fits the Julia set.
    pub window: Option<[f64; 4]>,
    pub mode: String,
    pub max_iter: usize,
    pub oracle_points: usize,
    pub seed: u64,
    pub m: usize,
    pub epsilon: f64,
    pub n0: usize,
    pub n_min: usize,
    pub bits: Option<String>,
    /// Resolution `2^j` of the tilde curve; `None` skips it.
    pub resolution: Option<usize>,
    /// Output directory; not echoed so that artifacts do not depend on it.
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda: "0.5".into(),
            angle: "0".into(),
            order: 1 << 12,
            omega_order: 1 << 14,
            n_max: 64,
            k_max: 8,
            grid_size: 128,
            n: 10,
            n_theta: 1 << 12,
            rho_schedule: transjulia::analysis::DEFAULT_RHO_SCHEDULE.to_vec(),
            half_width: 0.05,
            samples: 201,
            depth: 12,
            width: 512,
            height: 512,
            window: None,
            mode: "julia".into(),
            max_iter: 256,
            oracle_points: 100_000,
            seed: 1,
            m: 1,
            epsilon: 0.25,
            n0: 8,
            n_min: 1,
            bits: None,
            resolution: None,
            out: PathBuf::from("transjulia-out"),
        }
    }
}

impl RunConfig {
    /// Reads an optional JSON file, lays `overrides` on top, and validates.
    pub fn load(file: Option<&Path>, overrides: Map<String, Value>) -> Result<Self, CliError> {
        let mut base = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(CliError::Usage("config file must hold a JSON object".into())),
                    Err(e) => return Err(CliError::Usage(format!("config {}: {e}", p.display()))),
                }
            }
            None => Map::new(),
        };
        base.extend(overrides);
        // bare numbers are accepted for the textual fields
        for key in ["lambda", "angle"] {
            if let Some(Value::Number(x)) = base.get(key) {
                let text = x.to_string();
                base.insert(key.into(), Value::String(text));
            }
        }
        let mut cfg: RunConfig =
            serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        cfg.lambda = format_complex(cfg.lambda_value()?);
        cfg.angle = cfg.angle_value()?.to_string();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn lambda_value(&self) -> Result<C64, CliError> {
        parse_complex(&self.lambda).map_err(CliError::Usage)
    }

    pub fn param(&self) -> Result<QuadParam, CliError> {
        QuadParam::new(self.lambda_value()?).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn angle_value(&self) -> Result<ExternalAngle, CliError> {
        self.angle.parse().map_err(|e: transjulia::Error| CliError::Usage(e.to_string()))
    }

    pub fn window_value(&self) -> Option<Window> {
        self.window.map(|[a, b, c, d]| Window::new(a, b, c, d))
    }

    fn validate(&self) -> Result<(), CliError> {
        let fail = |m: &str| Err(CliError::Usage(m.into()));
        if self.order < 1 || self.omega_order < 1 {
            return fail("order must be positive");
        }
        if self.n == 0 || self.n > 24 {
            return fail("n must lie in 1..=24");
        }
        if self.width == 0 || self.height == 0 {
            return fail("width and height must be positive");
        }
        if let Some([a, b, c, d]) = self.window {
            if !(b > a && d > c) {
                return fail("window must satisfy re_min < re_max and im_min < im_max");
            }
        }
        if !(self.half_width > 0.0) || self.samples < 2 {
            return fail("half_width must be positive and samples at least 2");
        }
        if !(self.epsilon > 0.0) || self.m == 0 {
            return fail("epsilon must be positive and m at least 1");
        }
        if let Some(bits) = &self.bits {
            if bits.is_empty() || !bits.bytes().all(|b| b == b'0' || b == b'1') {
                return fail("bits must be a nonempty 0/1 string");
            }
        }
        if !matches!(self.mode.as_str(), "julia" | "oracle" | "mandelbrot") {
            return fail("mode must be julia, oracle or mandelbrot");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_syntax() {
        let cases = [
            ("0.5", C64::new(0.5, 0.0)),
            ("-1.25", C64::new(-1.25, 0.0)),
            ("0.5i", C64::new(0.0, 0.5)),
            ("1+2i", C64::new(1.0, 2.0)),
            ("1-2i", C64::new(1.0, -2.0)),
            ("-1e-3+2.5e+1i", C64::new(-1e-3, 25.0)),
            ("i", C64::new(0.0, 1.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("3 - i", C64::new(3.0, -1.0)),
        ];
        for (s, z) in cases {
            assert_eq!(parse_complex(s).unwrap(), z, "{s}");
        }
        for s in ["", "abc", "1,5", "1+", "+2i+", "nan"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn format_round_trips() {
        for z in [C64::new(0.5, 0.0), C64::new(-1.0, 0.25), C64::new(0.0, -3.5)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"lambda": "0.9", "n": 6, "angle": "2/6"}"#).unwrap();
        let mut over = Map::new();
        over.insert("n".into(), Value::from(8));
        let cfg = RunConfig::load(Some(&path), over).unwrap();
        assert_eq!(cfg.lambda, "0.9");
        assert_eq!(cfg.angle, "1/3");
        assert_eq!(cfg.n, 8);
        assert_eq!(cfg.order, 4096);
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let mut over = Map::new();
        over.insert("lamda".into(), Value::from("1"));
        assert!(matches!(RunConfig::load(None, over), Err(CliError::Usage(_))));
        let mut over = Map::new();
        over.insert("lambda".into(), Value::from("0"));
        let cfg = RunConfig::load(None, over).unwrap();
        assert!(matches!(cfg.param(), Err(CliError::Usage(_))));
    }
}
