use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use wgl_core::field::{write_csv, write_wgl1, Field};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Output directory for one command. Every JSON file carries the config hash
/// and tool version, every CSV starts with a `#` line holding both, and
/// `manifest.json` lists all files (WGL1 included) with their digests.
pub struct OutputDir {
    root: PathBuf,
    command: &'static str,
    config_hash: String,
    files: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(root: &Path, command: &'static str, config_hash: String) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), command, config_hash, files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    fn record(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Io(e.to_string()))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.retain(|(n, _)| n != name);
        self.files.push((name.to_string(), hex::encode(Sha256::digest(bytes))));
        Ok(())
    }

    fn stamp(&self) -> Value {
        json!({ "command": self.command, "config_hash": self.config_hash, "version": VERSION })
    }

    /// `body` must serialize to a JSON object; the stamp fields and `status`
    /// are merged in.
    pub fn json(&mut self, name: &str, status: &str, body: &impl Serialize) -> Result<(), CliError> {
        let mut value = serde_json::to_value(body).map_err(|e| CliError::Io(e.to_string()))?;
        let obj = value.as_object_mut().expect("JSON bodies are objects");
        if let Value::Object(stamp) = self.stamp() {
            obj.extend(stamp);
        }
        obj.insert("status".into(), Value::String(status.into()));
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.record(name, text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("# wgl {VERSION} config {}\n{body}", self.config_hash);
        self.record(name, text.as_bytes())
    }

    pub fn field(&mut self, stem: &str, f: &Field<f64>) -> Result<(), CliError> {
        let mut bin = Vec::new();
        write_wgl1(f, &mut bin).map_err(|e| CliError::Io(e.to_string()))?;
        self.record(&format!("{stem}.wgl1"), &bin)?;
        let mut csv = Vec::new();
        write_csv(f, &mut csv).map_err(|e| CliError::Io(e.to_string()))?;
        self.csv(&format!("{stem}.csv"), &String::from_utf8(csv).expect("CSV is ASCII"))
    }

    /// Write `manifest.json`; call last.
    pub fn finish(mut self, status: &str) -> Result<(), CliError> {
        let files: Vec<Value> = self.files.iter().map(|(n, d)| json!({ "file": n, "sha256": d })).collect();
        self.json("manifest.json", status, &json!({ "files": files }))
    }
}
