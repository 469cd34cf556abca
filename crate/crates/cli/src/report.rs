//! Deterministic run-directory emission: CSV tables, JSON verdicts, field
//! files, config copy, version stamp and a manifest.

use epsgeo::diagnostics::{DiagnosticsRow, Verdict};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const DIAGNOSTICS_HEADER: &str =
    "eps,sup_psi,sup_grad,sup_lap,sup_lambda1,min_det,sup_Q,speed_var,holder";

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn diagnostics_csv(rows: &[DiagnosticsRow<f64>]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(r.eps),
            fmt(r.sup_psi),
            fmt(r.sup_grad),
            fmt(r.sup_lap),
            fmt(r.sup_lambda1),
            fmt(r.min_det),
            fmt(r.sup_q),
            fmt(r.speed_var),
            fmt(r.holder),
        ));
    }
    out
}

#[derive(Serialize)]
struct VerdictJson {
    check: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

pub fn verdicts_json(verdicts: &[Verdict<f64>]) -> String {
    let items: Vec<VerdictJson> = verdicts
        .iter()
        .map(|v| VerdictJson {
            check: v.check.clone(),
            value: v.value,
            threshold: v.threshold,
            pass: v.pass,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&items).expect("serializable");
    s.push('\n');
    s
}

/// Collects written files and emits the manifest last.
pub struct RunDir {
    root: PathBuf,
    written: Vec<String>,
}

impl RunDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(RunDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write_text(&mut self, name: &str, content: &str) -> std::io::Result<()> {
        let mut f = std::fs::File::create(self.root.join(name))?;
        f.write_all(content.as_bytes())?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_field(
        &mut self,
        name: &str,
        field: &epsgeo::ScalarField64,
    ) -> Result<(), epsgeo::io::FieldFileError> {
        epsgeo::io::write_field(field, self.root.join(name))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes `manifest.txt` listing every emitted file.
    pub fn finish(mut self) -> std::io::Result<()> {
        let mut listing = self.written.clone();
        listing.push("manifest.txt".to_string());
        listing.sort();
        let content = listing.join("\n") + "\n";
        self.write_text("manifest.txt", &content)
    }
}

pub fn version_stamp() -> String {
    format!(
        "epsgeo {}\nfield-format MAFLD 1\ndiagnostics-columns {}\n",
        env!("CARGO_PKG_VERSION"),
        DIAGNOSTICS_HEADER
    )
}
