//! File formats and the result manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rotodiff_core::planar::PlanarWignerState;

use crate::error::CliError;

/// Shortest decimal that parses back to the same double.
///
/// Positional for `1e-4 ≤ |v| < 1e15`, scientific otherwise, so neither tiny nor huge
/// values expand into long runs of zeros.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// `α` rounded to 12 significant digits, positional.
pub fn format_alpha(alpha: f64) -> String {
    if alpha == 0.0 {
        return "0".into();
    }
    let exponent = alpha.abs().log10().floor() as i32;
    let decimals = (11 - exponent).max(0) as usize;
    format!("{alpha:.decimals$}")
}

pub const WIGNER_HEADER: &str = "alpha,m,w";

/// Long-format text of a Wigner grid: `m` outer ascending, `α` inner ascending.
pub fn wigner_csv(state: &PlanarWignerState) -> String {
    let alphas: Vec<String> = (0..state.n_alpha()).map(|j| format_alpha(state.alpha(j))).collect();
    let mut out = String::with_capacity(state.values().len() * 32);
    out.push_str(WIGNER_HEADER);
    out.push('\n');
    for m in state.m_values() {
        for (a, w) in alphas.iter().zip(state.row(m)) {
            let _ = writeln!(out, "{a},{m},{}", format_f64(*w));
        }
    }
    out
}

pub fn emit_wigner_csv(state: &PlanarWignerState, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, wigner_csv(state)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Parses a file written by [`emit_wigner_csv`]; the grid shape is inferred from the rows.
pub fn read_wigner_csv(path: &Path, t: f64) -> Result<PlanarWignerState, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_wigner_csv(&text, t)
}

pub fn parse_wigner_csv(text: &str, t: f64) -> Result<PlanarWignerState, CliError> {
    let bad = |line: usize, what: &str| CliError::Io(format!("line {line}: {what}"));
    let mut lines = text.lines();
    if lines.next() != Some(WIGNER_HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    let mut ms = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let (Some(_), Some(m), Some(w), None) = (fields.next(), fields.next(), fields.next(), fields.next()) else {
            return Err(bad(i + 2, "expected three fields"));
        };
        ms.push(m.parse::<i64>().map_err(|_| bad(i + 2, "bad m"))?);
        values.push(w.parse::<f64>().map_err(|_| bad(i + 2, "bad w"))?);
    }
    let first = *ms.first().ok_or_else(|| bad(2, "no data"))?;
    let n_alpha = ms.iter().take_while(|&&m| m == first).count();
    if first > 0 || ms.len() % n_alpha != 0 || ms.len() / n_alpha != (2 * first.unsigned_abs() + 1) as usize {
        return Err(bad(2, "rows do not form a complete grid"));
    }
    PlanarWignerState::from_values(n_alpha, first.unsigned_abs() as usize, values, t)
        .map_err(|e| CliError::Io(e.to_string()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one run. Written after every other file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact: String,
    pub version: String,
    pub config: serde_json::Value,
    pub files: Vec<FileRecord>,
    pub wall_clock_seconds: f64,
    /// Time spent hashing and writing the manifest itself.
    pub checksum_seconds: f64,
}

/// Keys of [`Manifest`] that vary between otherwise identical runs.
pub const TIMING_KEYS: [&str; 2] = ["wall_clock_seconds", "checksum_seconds"];

/// Single writer for the files of one run.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    prefix: String,
    files: Vec<FileRecord>,
    checksum_seconds: f64,
}

impl OutputSet {
    pub fn new(dir: &Path, prefix: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            prefix: prefix.to_owned(),
            files: Vec::new(),
            checksum_seconds: 0.0,
        })
    }

    pub fn path_of(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}_{suffix}", self.prefix))
    }

    /// Writes `{prefix}_{suffix}` and records its checksum.
    pub fn write(&mut self, suffix: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path_of(suffix);
        std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let clock = Instant::now();
        let sha256 = sha256_hex(bytes);
        self.checksum_seconds += clock.elapsed().as_secs_f64();
        self.files.push(FileRecord {
            name: path.file_name().expect("file name").to_string_lossy().into_owned(),
            bytes: bytes.len() as u64,
            sha256,
        });
        Ok(path)
    }

    pub fn write_json(&mut self, suffix: &str, value: &serde_json::Value) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON serializes");
        text.push('\n');
        self.write(suffix, text.as_bytes())
    }

    /// Writes the manifest; `started` is the beginning of the run.
    pub fn finish(self, config: serde_json::Value, started: Instant) -> Result<(PathBuf, Manifest), CliError> {
        let clock = Instant::now();
        let mut manifest = Manifest {
            artifact: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            files: self.files,
            wall_clock_seconds: 0.0,
            checksum_seconds: 0.0,
        };
        let path = self.dir.join(format!("{}_manifest.json", self.prefix));
        manifest.checksum_seconds = self.checksum_seconds + clock.elapsed().as_secs_f64();
        manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok((path, manifest))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [
            0.0,
            -0.0,
            1.0,
            0.1,
            1.0 / 3.0,
            1e-5,
            -2.5e-300,
            6.02e23,
            1e15,
            9.99e14,
            f64::MIN_POSITIVE,
        ] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_f64(1e-5), "1e-5");
        assert_eq!(format_f64(0.25), "0.25");
    }

    #[test]
    fn alpha_has_twelve_significant_digits() {
        assert_eq!(format_alpha(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_alpha(0.012_271_846_303_085_13), "0.0122718463031");
        assert_eq!(format_alpha(0.0), "0");
    }

    #[test]
    fn ground_state_csv_layout() {
        let g = PlanarWignerState::ground_state(8, 2).unwrap();
        let text = wigner_csv(&g);
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 1 + 8 * 5);
        assert_eq!(rows[1], "0,-2,0");
        assert!(rows[17].starts_with("0,0,0.159154943"));
        let back = parse_wigner_csv(&text, 0.0).unwrap();
        assert_eq!(back.values(), g.values());
    }

    #[test]
    fn truncated_csv_is_rejected() {
        let g = PlanarWignerState::ground_state(8, 2).unwrap();
        let text = wigner_csv(&g);
        let cut: String = text.lines().take(30).map(|l| format!("{l}\n")).collect();
        assert!(parse_wigner_csv(&cut, 0.0).is_err());
        assert!(parse_wigner_csv("a,b\n", 0.0).is_err());
    }
}
