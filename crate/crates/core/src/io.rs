//! Self-describing curve files and run manifests.
//!
//! CSV files carry `#`-prefixed metadata lines (tool version, curve labels,
//! density convention, normalization and the full parameter set) followed by
//! a header row and one row per frequency. Floats are written in Rust's
//! shortest round-trip form, so re-reading a file recovers the values
//! bit-for-bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curve::{linspace, normalize_curve, CurveKind, Normalization, SpectrumCurve, PSD_CONVENTION};
use crate::error::{Error, Result};
use crate::params::{Scenario, SensorParams, ValidatedParams};
use crate::spectra::{scenario_curve, snl_curve};
use crate::stochastic::{estimate_psd, simulate, Referral, SimulationConfig, SimulationRun};

pub const TOOL_VERSION: &str = concat!("sqz-sensor ", env!("CARGO_PKG_VERSION"));

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Frequency grid as requested on the command line, in output units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.points)
    }
}

/// Evaluates a closed-form curve. With `normalize` the grid is read in units
/// of kappa' and the result is normalized by kappa' / N.
pub fn closed_form_curve(kind: CurveKind, params: &ValidatedParams, grid: &GridSpec, normalize: bool) -> Result<SpectrumCurve> {
    let omegas: Vec<f64> = if normalize {
        grid.values().iter().map(|w| w * params.kappa_prime).collect()
    } else {
        grid.values()
    };
    let curve = match kind {
        CurveKind::Scenario(s) => scenario_curve(s, params, &omegas)?,
        CurveKind::ShotNoiseLimit => snl_curve(params, &omegas)?,
        other => {
            return Err(Error::Parse(format!("`{}` is not a closed-form curve", other.label())));
        }
    };
    if normalize {
        normalize_curve(&curve)
    } else {
        Ok(curve)
    }
}

/// Simulates `config` and returns the signal-referred Welch estimate on `grid`.
pub fn simulated_curve(params: &ValidatedParams, config: &SimulationConfig, grid: &GridSpec, normalize: bool) -> Result<SpectrumCurve> {
    let omegas: Vec<f64> = if normalize {
        grid.values().iter().map(|w| w * params.kappa_prime).collect()
    } else {
        grid.values()
    };
    estimate_curve(&simulate(params, config)?, &omegas, normalize)
}

/// Signal-referred Welch estimate of `run` at `omegas` (in rate units).
pub fn estimate_curve(run: &SimulationRun, omegas: &[f64], normalize: bool) -> Result<SpectrumCurve> {
    let curve = estimate_psd(run, omegas, Referral::Signal)?;
    if normalize {
        normalize_curve(&curve)
    } else {
        Ok(curve)
    }
}

/// Curves sharing one frequency grid, ready to be written as a table.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub omega: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    pub normalization: Normalization,
    pub params: SensorParams,
}

impl CurveTable {
    /// Collects curves evaluated on the same grid. The table keeps the
    /// parameters the caller supplied; scenario curves may carry
    /// materialized copies.
    pub fn from_curves(params: &SensorParams, curves: &[SpectrumCurve]) -> Result<Self> {
        let first = curves.first().ok_or_else(|| Error::Grid("no curves to write".into()))?;
        for c in curves {
            if c.frequencies() != first.frequencies() || c.normalization() != first.normalization() {
                return Err(Error::Grid("curves do not share a grid and normalization".into()));
            }
        }
        let single = curves.len() == 1;
        Ok(CurveTable {
            omega: first.frequencies().to_vec(),
            columns: curves
                .iter()
                .map(|c| {
                    let name = if single { "S".to_string() } else { c.kind().label() };
                    (name, c.values().to_vec())
                })
                .collect(),
            normalization: first.normalization(),
            params: *params,
        })
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn to_csv(&self, labels: &str) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!("# {TOOL_VERSION}\n"));
        out.push_str(&format!("# curves: {labels}\n"));
        out.push_str(&format!("# psd_convention: {PSD_CONVENTION}\n"));
        out.push_str(&format!("# normalization: {}\n", serde_json::to_string(&self.normalization)?.trim_matches('"')));
        out.push_str(&format!("# params: {}\n", serde_json::to_string(&self.params)?));
        out.push_str("omega");
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, w) in self.omega.iter().enumerate() {
            out.push_str(&w.to_string());
            for (_, values) in &self.columns {
                out.push(',');
                out.push_str(&values[i].to_string());
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_json(&self, labels: &str) -> Result<String> {
        let curves: BTreeMap<&str, &Vec<f64>> = self.columns.iter().map(|(n, v)| (n.as_str(), v)).collect();
        let doc = serde_json::json!({
            "tool": TOOL_VERSION,
            "curves_label": labels,
            "psd_convention": PSD_CONVENTION,
            "normalization": self.normalization,
            "params": self.params,
            "omega": self.omega,
            "columns": self.columns.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            "curves": curves,
        });
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn write(&self, path: &Path, format: Format, labels: &str) -> Result<()> {
        let text = match format {
            Format::Csv => self.to_csv(labels)?,
            Format::Json => self.to_json(labels)?,
        };
        write_atomic(path, text.as_bytes())
    }

    /// Reads a table written by [`CurveTable::write`] in either format.
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        if text.trim_start().starts_with('{') {
            Self::parse_json(&text)
        } else {
            Self::parse_csv(&text)
        }
    }

    fn parse_json(text: &str) -> Result<Self> {
        let doc: serde_json::Value = serde_json::from_str(text)?;
        let names: Vec<String> = serde_json::from_value(doc["columns"].clone())?;
        let columns = names
            .into_iter()
            .map(|n| {
                let v: Vec<f64> = serde_json::from_value(doc["curves"][&n].clone())?;
                Ok((n, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CurveTable {
            omega: serde_json::from_value(doc["omega"].clone())?,
            columns,
            normalization: serde_json::from_value(doc["normalization"].clone())?,
            params: serde_json::from_value(doc["params"].clone())?,
        })
    }

    fn parse_csv(text: &str) -> Result<Self> {
        let mut normalization = None;
        let mut params = None;
        let mut header: Option<Vec<String>> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in text.lines() {
            if let Some(meta) = line.strip_prefix('#') {
                let meta = meta.trim();
                if let Some(v) = meta.strip_prefix("normalization:") {
                    normalization = Some(serde_json::from_value(serde_json::Value::String(v.trim().into()))?);
                } else if let Some(v) = meta.strip_prefix("params:") {
                    params = Some(serde_json::from_str(v.trim())?);
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if header.is_none() {
                header = Some(line.split(',').map(|s| s.trim().to_string()).collect());
                continue;
            }
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let header = header.ok_or_else(|| Error::Parse("missing header row".into()))?;
        if header.first().map(String::as_str) != Some("omega") {
            return Err(Error::Parse("first column must be `omega`".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != header.len()) {
            return Err(Error::Parse(format!("row has {} fields, expected {}", bad.len(), header.len())));
        }
        Ok(CurveTable {
            omega: rows.iter().map(|r| r[0]).collect(),
            columns: header[1..]
                .iter()
                .enumerate()
                .map(|(j, n)| (n.clone(), rows.iter().map(|r| r[j + 1]).collect()))
                .collect(),
            normalization: normalization.ok_or_else(|| Error::Parse("missing normalization line".into()))?,
            params: params.ok_or_else(|| Error::Parse("missing params line".into()))?,
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub curves: Vec<CurveKind>,
    pub format: Format,
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the parameter file, or of the canonical JSON parameters
    /// when none was read.
    pub params_hash: String,
    pub tool_version: String,
    pub psd_convention: String,
    pub normalization: Normalization,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub params: SensorParams,
    pub grid: GridSpec,
    /// Settings of the stochastic run behind `estimate` curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    pub outputs: Vec<ManifestEntry>,
}

impl RunManifest {
    pub fn new(command: &str, params: &SensorParams, params_file: Option<&[u8]>, grid: GridSpec, normalize: bool) -> Result<Self> {
        let params_hash = match params_file {
            Some(bytes) => sha256_hex(bytes),
            None => sha256_hex(serde_json::to_string(params)?.as_bytes()),
        };
        Ok(RunManifest {
            command: command.to_string(),
            params_hash,
            tool_version: TOOL_VERSION.to_string(),
            psd_convention: PSD_CONVENTION.to_string(),
            normalization: if normalize { Normalization::KappaPrimeOverN } else { Normalization::Raw },
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            params: *params,
            grid,
            simulation: None,
            outputs: Vec::new(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Recomputes every listed curve file from the recorded parameters, grid
    /// and simulation settings and compares it bit-for-bit with the file on
    /// disk. Returns the files that differ. Entries without curves (reports)
    /// are skipped.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let params = self.params.validate()?;
        let normalize = self.normalization == Normalization::KappaPrimeOverN;
        let mut mismatched = Vec::new();
        for entry in self.outputs.iter().filter(|e| !e.curves.is_empty()) {
            let table = CurveTable::read(&dir.join(&entry.file))?;
            let curves = entry
                .curves
                .iter()
                .map(|k| match k {
                    CurveKind::Estimate => {
                        let config = self
                            .simulation
                            .as_ref()
                            .ok_or_else(|| Error::Parse("estimate curve without simulation settings".into()))?;
                        simulated_curve(&params, config, &self.grid, normalize)
                    }
                    _ => closed_form_curve(*k, &params, &self.grid, normalize),
                })
                .collect::<Result<Vec<_>>>()?;
            let fresh = CurveTable::from_curves(&self.params, &curves)?;
            let same_bits = |a: &[f64], b: &[f64]| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            };
            let ok = same_bits(&table.omega, &fresh.omega)
                && table.columns.len() == fresh.columns.len()
                && table
                    .columns
                    .iter()
                    .zip(&fresh.columns)
                    .all(|((na, a), (nb, b))| na == nb && same_bits(a, b));
            if !ok {
                mismatched.push(entry.file.clone());
            }
        }
        Ok(mismatched)
    }
}

/// Parses a curve name: a scenario name or `snl`.
pub fn parse_curve_kind(name: &str) -> Result<CurveKind> {
    if name == "snl" {
        Ok(CurveKind::ShotNoiseLimit)
    } else {
        name.parse::<Scenario>().map(CurveKind::Scenario)
    }
}

/// The four closed-form curves in plotting order.
pub fn all_curve_kinds() -> Vec<CurveKind> {
    Scenario::CLOSED_FORMS
        .iter()
        .map(|s| CurveKind::Scenario(*s))
        .chain(std::iter::once(CurveKind::ShotNoiseLimit))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_round_trip_bit_exact() {
        let p = SensorParams::fig2().validate().unwrap();
        let grid = GridSpec { min: 0.0, max: 4.0, points: 33 };
        let curves: Vec<_> = all_curve_kinds()
            .into_iter()
            .map(|k| closed_form_curve(k, &p, &grid, true).unwrap())
            .collect();
        let table = CurveTable::from_curves(p.raw(), &curves).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for format in [Format::Csv, Format::Json] {
            let path = dir.path().join(format!("t.{}", format.extension()));
            table.write(&path, format, "all").unwrap();
            let back = CurveTable::read(&path).unwrap();
            assert_eq!(back, table, "{format:?}");
        }
    }

    #[test]
    fn single_curve_column_is_named_s() {
        let p = SensorParams::fig2().validate().unwrap();
        let grid = GridSpec { min: 0.0, max: 1.0, points: 3 };
        let c = closed_form_curve(CurveKind::Scenario(Scenario::NoSqueeze), &p, &grid, false).unwrap();
        let t = CurveTable::from_curves(p.raw(), &[c]).unwrap();
        let csv = t.to_csv("no-squeeze").unwrap();
        assert!(csv.lines().any(|l| l == "omega,S"));
        assert!(csv.lines().all(|l| l.starts_with('#') || l.starts_with("omega") || l.split(',').count() == 2));
    }

    #[test]
    fn manifest_detects_tampering() {
        let p = SensorParams::fig2().validate().unwrap();
        let grid = GridSpec { min: 0.0, max: 4.0, points: 11 };
        let kind = CurveKind::Scenario(Scenario::InputSqueeze);
        let c = closed_form_curve(kind, &p, &grid, true).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let table = CurveTable::from_curves(p.raw(), &[c]).unwrap();
        table.write(&dir.path().join("c.csv"), Format::Csv, "input-squeeze").unwrap();
        let mut m = RunManifest::new("spectrum", p.raw(), None, grid, true).unwrap();
        m.outputs.push(ManifestEntry { file: "c.csv".into(), curves: vec![kind], format: Format::Csv });
        m.write(&dir.path().join("manifest.json")).unwrap();
        let m = RunManifest::read(&dir.path().join("manifest.json")).unwrap();
        assert!(m.verify(dir.path()).unwrap().is_empty());

        let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
        let last = text.lines().last().unwrap();
        let (w, v) = last.split_once(',').unwrap();
        let nudged = f64::from_bits(v.parse::<f64>().unwrap().to_bits() + 1);
        let tampered = text.replace(last, &format!("{w},{nudged}"));
        assert_ne!(text, tampered);
        fs::write(dir.path().join("c.csv"), tampered).unwrap();
        assert_eq!(m.verify(dir.path()).unwrap(), vec!["c.csv".to_string()]);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn curve_names() {
        assert_eq!(parse_curve_kind("snl").unwrap(), CurveKind::ShotNoiseLimit);
        assert_eq!(parse_curve_kind("double-squeeze").unwrap(), CurveKind::Scenario(Scenario::DoubleSqueezeOptimal));
        assert!(parse_curve_kind("bogus").is_err());
    }
}
