use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const TOOL: &str = "soundq";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Provenance record written next to every command's outputs. It holds no
/// timestamps, so an identical command reproduces it byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub parameters: serde_json::Value,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub results: serde_json::Value,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(h.finalize()), total))
}

impl RunManifest {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command,
            seeds: BTreeMap::new(),
            parameters: serde_json::Value::Null,
            results: serde_json::Value::Null,
            outputs: Vec::new(),
        }
    }

    /// Writes the manifest to `path`, hashing `outputs` first. Output paths
    /// are recorded relative to the manifest's directory when possible.
    pub fn write(mut self, path: &Path, outputs: &[PathBuf]) -> Result<()> {
        let base = path.parent().unwrap_or(Path::new(""));
        self.outputs = outputs
            .iter()
            .map(|p| {
                let (sha256, bytes) = sha256_file(p)?;
                let rel = relative_to(p, base);
                Ok(OutputEntry { path: rel, sha256, bytes })
            })
            .collect::<Result<_>>()?;
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

fn relative_to(p: &Path, base: &Path) -> String {
    let rel = p.strip_prefix(base).unwrap_or(p);
    rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect::<Vec<_>>().join("/")
}

/// `<dir>/<stem>.manifest.json` for an output file.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    output.with_file_name(format!("{stem}.manifest.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashes_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("a");
        std::fs::create_dir(&sub).unwrap();
        let out = sub.join("x.csv");
        std::fs::write(&out, b"abc").unwrap();
        let mpath = dir.path().join("manifest.json");
        RunManifest::new(vec!["repro".into()]).write(&mpath, &[out]).unwrap();
        let m: RunManifest = serde_json::from_slice(&std::fs::read(&mpath).unwrap()).unwrap();
        assert_eq!(m.outputs[0].path, "a/x.csv");
        assert_eq!(m.outputs[0].sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(m.outputs[0].bytes, 3);
    }

    #[test]
    fn manifest_name() {
        assert_eq!(manifest_path_for(Path::new("/t/boom.wav")), PathBuf::from("/t/boom.manifest.json"));
    }
}
