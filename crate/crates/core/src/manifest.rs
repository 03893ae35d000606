//! Run manifests: config, seed, tool version and content hashes of every
//! input and output, so that a run can be checked and repeated.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// As given for inputs; relative to the manifest's directory for outputs.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    fn of(path: &Path, recorded: String) -> Result<Self> {
        let bytes = fs::metadata(path).map_err(|e| Error::io(path, e))?.len();
        Ok(FileDigest {
            path: recorded,
            sha256: sha256_file(path)?,
            bytes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub version: u32,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileRole {
    Input,
    Output,
}

/// A file whose current content no longer matches its recorded hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub role: FileRole,
    pub path: String,
    pub expected: String,
    /// `None` when the file is missing or unreadable.
    pub actual: Option<String>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, seed: u64, config: &impl Serialize) -> Result<Self> {
        Ok(RunManifest {
            format: "run-manifest".into(),
            version: 1,
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            seed,
            config: serde_json::to_value(config)?,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn add_input(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let digest = FileDigest::of(path, path.display().to_string())?;
        if !self.inputs.contains(&digest) {
            self.inputs.push(digest);
        }
        Ok(())
    }

    /// Records a file inside `dir` (the directory the manifest will live in).
    pub fn add_output(&mut self, dir: impl AsRef<Path>, name: &str) -> Result<()> {
        let digest = FileDigest::of(&dir.as_ref().join(name), name.to_string())?;
        self.outputs.retain(|d| d.path != name);
        self.outputs.push(digest);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `manifest.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        fs::write(&path, self.to_json()?).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Loads a manifest from a file or from `manifest.json` in a directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut path = path.as_ref().to_path_buf();
        if path.is_dir() {
            path.push(MANIFEST_FILE);
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Rehashes every recorded file. Outputs resolve against `dir`.
    pub fn verify(&self, dir: impl AsRef<Path>) -> Vec<Mismatch> {
        let dir = dir.as_ref();
        let check = |role, d: &FileDigest, path: PathBuf| {
            let actual = sha256_file(&path).ok();
            (actual.as_deref() != Some(d.sha256.as_str())).then(|| Mismatch {
                role,
                path: d.path.clone(),
                expected: d.sha256.clone(),
                actual,
            })
        };
        let inputs = self
            .inputs
            .iter()
            .filter_map(|d| check(FileRole::Input, d, PathBuf::from(&d.path)));
        let outputs = self
            .outputs
            .iter()
            .filter_map(|d| check(FileRole::Output, d, dir.join(&d.path)));
        inputs.chain(outputs).collect()
    }
}
