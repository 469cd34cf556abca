//! INI-style run configuration: `[section]` headers and `key = value` lines,
//! UTF-8, `#` or `;` comments. Parse errors carry line and section context.

use epsgeo::data::BuiltinData;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value` inside section [{section}]")]
    BadLine { line: usize, section: String },
    #[error("line {line}: key `{key}` outside any section")]
    KeyOutsideSection { line: usize, key: String },
    #[error("line {line}: unterminated section header")]
    BadSection { line: usize },
    #[error("missing required section [{0}]")]
    MissingSection(&'static str),
    #[error("section [{section}]: missing key `{key}`")]
    MissingKey { section: String, key: &'static str },
    #[error("section [{section}], key `{key}`: cannot parse value {value:?}")]
    BadValue {
        section: String,
        key: String,
        value: String,
    },
    #[error("section [data]: either `builtin` or both `phi0` and `phi1` must be set")]
    BadData,
    #[error("section [data]: unknown builtin {0:?}")]
    UnknownBuiltin(String),
    #[error("referenced file {0} does not exist")]
    MissingFile(PathBuf),
    #[error("section [schedule]: eps_start must exceed eps_end, both in (0, 1], ratio in (0, 1)")]
    BadSchedule,
}

/// Raw parsed sections.
#[derive(Debug, Default)]
pub struct IniDoc {
    sections: BTreeMap<String, BTreeMap<String, (usize, String)>>,
}

impl IniDoc {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = IniDoc::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or(ConfigError::BadSection { line })?;
                current = Some(name.trim().to_string());
                doc.sections.entry(name.trim().to_string()).or_default();
                continue;
            }
            let section = current
                .clone()
                .ok_or_else(|| ConfigError::KeyOutsideSection {
                    line,
                    key: trimmed
                        .split('=')
                        .next()
                        .unwrap_or(trimmed)
                        .trim()
                        .to_string(),
                })?;
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| ConfigError::BadLine {
                    line,
                    section: section.clone(),
                })?;
            doc.sections
                .get_mut(&section)
                .expect("section exists")
                .insert(key.trim().to_string(), (line, value.trim().to_string()));
        }
        Ok(doc)
    }

    fn section(&self, name: &str) -> Option<&BTreeMap<String, (usize, String)>> {
        self.sections.get(name)
    }

    fn get<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
    ) -> Result<Option<T>, ConfigError> {
        match self.section(section).and_then(|s| s.get(key)) {
            None => Ok(None),
            Some((_, value)) => value
                .parse::<T>()
                .map(Some)
                .map_err(|_| ConfigError::BadValue {
                    section: section.to_string(),
                    key: key.to_string(),
                    value: value.clone(),
                }),
        }
    }

    fn require<T: std::str::FromStr>(
        &self,
        section: &'static str,
        key: &'static str,
    ) -> Result<T, ConfigError> {
        self.get::<T>(section, key)?.ok_or(ConfigError::MissingKey {
            section: section.to_string(),
            key,
        })
    }
}

/// Boundary data source.
#[derive(Debug, Clone)]
pub enum DataSource {
    Builtin(BuiltinData),
    Files { phi0: PathBuf, phi1: PathBuf },
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub data: DataSource,
    pub schedule: Vec<f64>,
    pub solver: epsgeo::NewtonConfig64,
    pub monitor_coeff: f64,
    pub holder_alpha: f64,
    pub out_dir: PathBuf,
    /// Verbatim bytes of the source file, copied into the run directory.
    pub source_text: String,
}

/// Builds the geometric schedule from `eps_start` down to `eps_end`.
pub fn geometric_schedule(
    eps_start: f64,
    eps_end: f64,
    ratio: f64,
) -> Result<Vec<f64>, ConfigError> {
    if !(eps_start > eps_end && eps_end > 0.0 && eps_start <= 1.0 && ratio > 0.0 && ratio < 1.0) {
        return Err(ConfigError::BadSchedule);
    }
    let steps = ((eps_end / eps_start).ln() / ratio.ln()).round() as usize;
    let schedule: Vec<f64> = (0..=steps)
        .map(|k| (eps_start.ln() + k as f64 * ratio.ln()).exp())
        .collect();
    Ok(schedule)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let doc = IniDoc::parse(text)?;

        if doc.section("grid").is_none() {
            return Err(ConfigError::MissingSection("grid"));
        }
        let nx: usize = doc.require("grid", "nx")?;
        let ny: usize = doc.require("grid", "ny")?;
        let nt: usize = doc.require("grid", "nt")?;

        let data = match doc.get::<String>("data", "builtin")? {
            Some(name) => DataSource::Builtin(
                BuiltinData::parse(&name).ok_or(ConfigError::UnknownBuiltin(name))?,
            ),
            None => {
                let phi0 = doc.get::<PathBuf>("data", "phi0")?;
                let phi1 = doc.get::<PathBuf>("data", "phi1")?;
                match (phi0, phi1) {
                    (Some(phi0), Some(phi1)) => {
                        for p in [&phi0, &phi1] {
                            if !p.exists() {
                                return Err(ConfigError::MissingFile(p.clone()));
                            }
                        }
                        DataSource::Files { phi0, phi1 }
                    }
                    _ => return Err(ConfigError::BadData),
                }
            }
        };

        let eps_start = doc.get::<f64>("schedule", "eps_start")?.unwrap_or(1e-1);
        let eps_end = doc.get::<f64>("schedule", "eps_end")?.unwrap_or(1e-4);
        let ratio = doc
            .get::<f64>("schedule", "ratio")?
            .unwrap_or(0.31622776601683794);
        let schedule = geometric_schedule(eps_start, eps_end, ratio)?;

        let mut solver = epsgeo::NewtonConfig64::default();
        if let Some(v) = doc.get::<f64>("solver", "tol_res")? {
            solver.tol_res = v;
        }
        if let Some(v) = doc.get::<usize>("solver", "max_outer")? {
            solver.max_outer = v;
        }
        if let Some(v) = doc.get::<f64>("solver", "armijo_factor")? {
            solver.armijo_factor = v;
        }
        if let Some(v) = doc.get::<f64>("solver", "armijo_slope")? {
            solver.armijo_slope = v;
        }
        if let Some(v) = doc.get::<f64>("solver", "linear_tol")? {
            solver.linear_tol = v;
        }
        if let Some(v) = doc.get::<usize>("solver", "linear_max")? {
            solver.linear_max = v;
        }

        let monitor_coeff = doc.get::<f64>("diagnostics", "a")?.unwrap_or(3.0);
        let holder_alpha = doc.get::<f64>("diagnostics", "alpha")?.unwrap_or(0.5);

        let out_dir = doc
            .get::<PathBuf>("output", "dir")?
            .unwrap_or_else(|| PathBuf::from("epsgeo-out"));

        Ok(RunConfig {
            nx,
            ny,
            nt,
            data,
            schedule,
            solver,
            monitor_coeff,
            holder_alpha,
            out_dir,
            source_text: text.to_string(),
        })
    }
}
