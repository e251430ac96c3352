//! Buffered artifacts. Nothing touches the output directory until a command
//! has finished, so a failed run leaves no partial files behind.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    path: &'a str,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: &'a str,
    exit_code: i32,
    files: Vec<ManifestEntry<'a>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> serde_json::Result<()> {
        let mut v = serde_json::to_vec_pretty(value)?;
        v.push(b'\n');
        self.add(name, v);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> std::io::Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file plus `manifest.json`.
    pub fn commit(&self, dir: &Path, command: &str, config_hash: &str, exit_code: i32) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        let manifest = Manifest {
            command,
            config_hash,
            exit_code,
            files: self
                .files
                .iter()
                .map(|(n, b)| ManifestEntry { path: n, sha256: sha256_hex(b), bytes: b.len() })
                .collect(),
        };
        let mut v = serde_json::to_vec_pretty(&manifest)?;
        v.push(b'\n');
        std::fs::write(dir.join("manifest.json"), v)
    }
}
