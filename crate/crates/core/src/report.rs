//! Plot-ready output tables and run manifests.
//!
//! Estimate tables have the columns
//! `beta_deg, scalar_mean, biv_yz, biv_zx, biv_xy, bivector_norm, quantum_ref,
//! deviation, n, seed, standard_error`. CSV floats are written with 17
//! significant digits; JSON uses shortest round-trip formatting. Both parse back
//! to the identical `f64`s. Timing lives only in the manifest sidecar, so data
//! files are byte-identical across re-runs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::PolarizerAngle;
use crate::stats::{quantum_reference, CorrelationEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One estimate at a setting, as written to disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub beta_deg: f64,
    pub scalar_mean: f64,
    pub biv_yz: f64,
    pub biv_zx: f64,
    pub biv_xy: f64,
    pub bivector_norm: f64,
    pub quantum_ref: f64,
    pub deviation: f64,
    pub n: u64,
    pub seed: u64,
    pub standard_error: f64,
}

pub const ESTIMATE_COLUMNS: [&str; 11] = [
    "beta_deg",
    "scalar_mean",
    "biv_yz",
    "biv_zx",
    "biv_xy",
    "bivector_norm",
    "quantum_ref",
    "deviation",
    "n",
    "seed",
    "standard_error",
];

impl EstimateRow {
    pub fn new(
        alpha: PolarizerAngle,
        beta_deg: f64,
        estimate: &CorrelationEstimate,
        seed: u64,
    ) -> Self {
        let beta = PolarizerAngle::from_degrees(beta_deg);
        let reference = quantum_reference(alpha, beta);
        let [biv_yz, biv_zx, biv_xy] = estimate.bivector_mean;
        EstimateRow {
            beta_deg,
            scalar_mean: estimate.scalar_mean,
            biv_yz,
            biv_zx,
            biv_xy,
            bivector_norm: estimate.bivector_norm(),
            quantum_ref: reference,
            deviation: (estimate.scalar_mean - reference).abs(),
            n: estimate.trial_count,
            seed,
            standard_error: estimate.standard_error,
        }
    }

    pub fn estimate(&self) -> CorrelationEstimate {
        CorrelationEstimate {
            scalar_mean: self.scalar_mean,
            bivector_mean: [self.biv_yz, self.biv_zx, self.biv_xy],
            trial_count: self.n,
            standard_error: self.standard_error,
        }
    }

    fn csv_fields(&self) -> [String; 11] {
        [
            fmt_f64(self.beta_deg),
            fmt_f64(self.scalar_mean),
            fmt_f64(self.biv_yz),
            fmt_f64(self.biv_zx),
            fmt_f64(self.biv_xy),
            fmt_f64(self.bivector_norm),
            fmt_f64(self.quantum_ref),
            fmt_f64(self.deviation),
            self.n.to_string(),
            self.seed.to_string(),
            fmt_f64(self.standard_error),
        ]
    }
}

/// CHSH evaluation at one quadruple of settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshRow {
    pub alpha_deg: f64,
    pub alpha_prime_deg: f64,
    pub beta_deg: f64,
    pub beta_prime_deg: f64,
    /// `analytic` or `monte_carlo`.
    pub mode: String,
    pub e_ab: f64,
    pub e_ab_prime: f64,
    pub e_a_prime_b: f64,
    pub e_a_prime_b_prime: f64,
    pub chsh: f64,
    pub n: Option<u64>,
    pub seed: Option<u64>,
}

pub const CHSH_COLUMNS: [&str; 12] = [
    "alpha_deg",
    "alpha_prime_deg",
    "beta_deg",
    "beta_prime_deg",
    "mode",
    "e_ab",
    "e_ab_prime",
    "e_a_prime_b",
    "e_a_prime_b_prime",
    "chsh",
    "n",
    "seed",
];

impl ChshRow {
    fn csv_fields(&self) -> Vec<String> {
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            fmt_f64(self.alpha_deg),
            fmt_f64(self.alpha_prime_deg),
            fmt_f64(self.beta_deg),
            fmt_f64(self.beta_prime_deg),
            self.mode.clone(),
            fmt_f64(self.e_ab),
            fmt_f64(self.e_ab_prime),
            fmt_f64(self.e_a_prime_b),
            fmt_f64(self.e_a_prime_b_prime),
            fmt_f64(self.chsh),
            opt(self.n),
            opt(self.seed),
        ]
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn json_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(rows)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn encode_estimates(rows: &[EstimateRow], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => csv_bytes(&ESTIMATE_COLUMNS, rows.iter().map(|r| r.csv_fields())),
        Format::Json => json_bytes(rows),
    }
}

pub fn encode_chsh(rows: &[ChshRow], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => csv_bytes(&CHSH_COLUMNS, rows.iter().map(|r| r.csv_fields())),
        Format::Json => json_bytes(rows),
    }
}

fn decode<T: for<'de> Deserialize<'de>>(
    bytes: &[u8],
    format: Format,
    columns: &[&str],
) -> Result<Vec<T>> {
    match format {
        Format::Csv => {
            let mut reader = csv::Reader::from_reader(bytes);
            let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
            if header != columns {
                return Err(Error::Format(format!("unexpected header {header:?}")));
            }
            reader
                .deserialize()
                .map(|r| r.map_err(Error::from))
                .collect()
        }
        Format::Json => Ok(serde_json::from_slice(bytes)?),
    }
}

pub fn decode_estimates(bytes: &[u8], format: Format) -> Result<Vec<EstimateRow>> {
    decode(bytes, format, &ESTIMATE_COLUMNS)
}

pub fn decode_chsh(bytes: &[u8], format: Format) -> Result<Vec<ChshRow>> {
    decode(bytes, format, &CHSH_COLUMNS)
}

/// Guess the format of a data file from its extension (`.json` or CSV otherwise).
pub fn format_for_path(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    }
}

pub fn read_estimates(path: &Path) -> Result<Vec<EstimateRow>> {
    decode_estimates(&fs::read(path)?, format_for_path(path))
}

/// Angle echoed in both units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleEcho {
    pub degrees: f64,
    pub radians: f64,
}

impl AngleEcho {
    pub fn from_degrees(degrees: f64) -> Self {
        AngleEcho {
            degrees,
            radians: PolarizerAngle::from_degrees(degrees).radians(),
        }
    }
}

/// Sidecar describing how a data file was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector after the program name; re-running it reproduces the data file.
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub version: String,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new(
        command: &str,
        args: Vec<String>,
        config: serde_json::Value,
        duration_seconds: f64,
    ) -> Self {
        RunManifest {
            command: command.to_string(),
            args,
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds,
        }
    }

    pub fn path_for(data: &Path) -> PathBuf {
        let mut name = data
            .file_name()
            .map(|n| n.to_os_string())
            .unwrap_or_default();
        name.push(".manifest.json");
        data.with_file_name(name)
    }

    pub fn write_beside(&self, data: &Path) -> Result<PathBuf> {
        let path = Self::path_for(data);
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(&path, bytes)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

/// Write `bytes` to `path`, or to stdout when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}
