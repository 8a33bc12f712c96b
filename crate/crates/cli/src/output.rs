use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::{CliError, RunConfig};

/// Conventions every artifact is stated in.
pub fn conventions() -> Value {
    json!({
        "map": "P(x) = lambda x (1 - x)",
        "phi": "phi = -1/G on the unit disk, z phi(z) -> -1/lambda, J = phi(|z| = 1)",
        "angle": "external angles in turns, z = e^{2 pi i t}",
        "depth": "local variable s with z = e^{2 pi i t} e^{-s}",
        "exponent": "b = ln(w) / (N ln 2), principal branch",
        "series": "coefficients listed from lowest_index upward, complex numbers as [re, im]"
    })
}

/// Header block embedded in every output file.
pub fn meta(cfg: &RunConfig, command: &str, residuals: Value) -> Value {
    json!({
        "tool": "transjulia",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg,
        "conventions": conventions(),
        "residuals": residuals,
    })
}

/// Collects files written into one output directory.
pub struct Writer {
    dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    /// `{"meta": ..., "<key>": body...}` with the body's fields inlined.
    pub fn json<T: Serialize>(&mut self, name: &str, meta: &Value, body: &T) -> Result<(), CliError> {
        let mut obj = serde_json::Map::new();
        obj.insert("meta".into(), meta.clone());
        match serde_json::to_value(body)? {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(obj))?;
        text.push('\n');
        self.put(name, text.as_bytes())
    }

    /// CSV preceded by one `#` line holding the metadata as compact JSON.
    pub fn csv(&mut self, name: &str, meta: &Value, csv: &str) -> Result<(), CliError> {
        let text = format!("# {}\n{csv}", serde_json::to_string(meta)?);
        self.put(name, text.as_bytes())
    }

    /// PNM with the metadata as a header comment after the magic number.
    pub fn pnm(&mut self, name: &str, meta: &Value, pnm: &[u8]) -> Result<(), CliError> {
        let cut = pnm.iter().position(|&b| b == b'\n').map_or(pnm.len(), |i| i + 1);
        let mut out = pnm[..cut].to_vec();
        out.extend_from_slice(format!("# {}\n", serde_json::to_string(meta)?).as_bytes());
        out.extend_from_slice(&pnm[cut..]);
        self.put(name, &out)
    }
}
