use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use twistorlab_core::report::{all_passed, status, Check, Conventions, VERSION};

#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub inputs: Vec<String>,
    pub settings: Settings,
    pub conventions: Conventions,
    pub status: &'static str,
    pub checks: Vec<Check>,
    pub result: Value,
}

impl ReportDocument {
    pub fn new(command: &str, inputs: Vec<String>, settings: Settings, checks: Vec<Check>, result: Value) -> Self {
        ReportDocument {
            tool: "twistorlab",
            version: VERSION,
            command: command.to_string(),
            inputs,
            settings,
            conventions: Conventions::current(),
            status: status(all_passed(&checks)),
            checks,
            result,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "PASS"
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
