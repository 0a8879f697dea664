//! Run manifests and output directories.
//!
//! The manifest hash covers the command, the resolved settings, the
//! content hashes of the input files and the hashes of upstream runs. It
//! excludes paths, timing and thread counts, so reruns with the same
//! inputs produce byte-identical artifacts.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::settings::Settings;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

impl InputFile {
    pub fn hash(path: &Path) -> CliResult<Self> {
        let mut file = File::open(path)
            .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
        let mut h = Sha256::new();
        std::io::copy(&mut file, &mut h)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Ok(InputFile {
            path: path.to_path_buf(),
            sha256: hex::encode(h.finalize()),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub command: String,
    pub hash: String,
    pub status: String,
    pub settings: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, InputFile>,
    /// Manifest hashes of the runs this one consumed.
    pub upstream: BTreeMap<String, String>,
    pub threads: usize,
    pub wall_time_s: Option<f64>,
    pub results: BTreeMap<String, Value>,
}

impl Manifest {
    pub fn new(
        command: &str,
        settings: &Settings,
        inputs: BTreeMap<String, InputFile>,
        upstream: BTreeMap<String, String>,
        threads: usize,
    ) -> Self {
        let content: BTreeMap<&String, &String> =
            inputs.iter().map(|(k, f)| (k, &f.sha256)).collect();
        let canonical = json!({
            "command": command,
            "settings": settings.map(),
            "inputs": content,
            "upstream": upstream,
        });
        let hash = hex::encode(Sha256::digest(canonical.to_string().as_bytes()));
        Manifest {
            tool: format!("linnet-dp {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            hash,
            status: "running".into(),
            settings: settings.map().clone(),
            inputs,
            upstream,
            threads,
            wall_time_s: None,
            results: BTreeMap::new(),
        }
    }

    pub fn read(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("malformed {}: {e}", path.display())))
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n")
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) {
        self.results
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable result"));
    }

    pub fn result_f64(&self, key: &str) -> CliResult<f64> {
        self.results
            .get(key)
            .and_then(Value::as_f64)
            .ok_or_else(|| CliError::Consistency(format!("run manifest lacks result `{key}`")))
    }
}

/// Output directory filled under a temporary name and renamed into place
/// once complete. Dropped without [`OutDir::commit`], it is removed.
pub struct OutDir {
    target: PathBuf,
    work: PathBuf,
    replace: bool,
    committed: bool,
}

impl OutDir {
    pub fn create(target: &Path, force: bool) -> CliResult<Self> {
        let exists = target.exists();
        if exists && !force {
            return Err(CliError::Input(format!(
                "output directory {} already exists (pass --force to replace it)",
                target.display()
            )));
        }
        let name = target
            .file_name()
            .ok_or_else(|| CliError::Input(format!("bad output path {}", target.display())))?;
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&parent)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", parent.display())))?;
        let work = parent.join(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id()));
        if work.exists() {
            let _ = std::fs::remove_dir_all(&work);
        }
        std::fs::create_dir(&work)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", work.display())))?;
        Ok(OutDir {
            target: target.to_path_buf(),
            work,
            replace: exists,
            committed: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.work
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.work.join(name)
    }

    pub fn commit(mut self) -> CliResult<PathBuf> {
        let io = |e: std::io::Error| CliError::Input(format!("cannot finalize {}: {e}", self.target.display()));
        if self.replace {
            std::fs::remove_dir_all(&self.target).map_err(io)?;
        }
        std::fs::rename(&self.work, &self.target).map_err(io)?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for OutDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = std::fs::remove_dir_all(&self.work);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::settings::{Settings, AMENITY};

    #[test]
    fn hash_ignores_paths_and_threads() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        std::fs::write(&a, "x\n1\n").unwrap();
        std::fs::write(&b, "x\n1\n").unwrap();
        let s = Settings::resolve(&[AMENITY], None, &[]).unwrap();
        let m = |p: &Path, threads| {
            let inputs = BTreeMap::from([("net".to_string(), InputFile::hash(p).unwrap())]);
            Manifest::new("amenity", &s, inputs, BTreeMap::new(), threads)
        };
        assert_eq!(m(&a, 1).hash, m(&b, 4).hash);
        std::fs::write(&b, "x\n2\n").unwrap();
        assert_ne!(m(&a, 1).hash, m(&b, 1).hash);
    }

    #[test]
    fn uncommitted_dir_is_removed() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out");
        let work = {
            let out = OutDir::create(&target, false).unwrap();
            out.dir().to_path_buf()
        };
        assert!(!work.exists());
        assert!(!target.exists());
        let out = OutDir::create(&target, false).unwrap();
        std::fs::write(out.path("f.txt"), "x").unwrap();
        out.commit().unwrap();
        assert!(target.join("f.txt").exists());
        assert!(OutDir::create(&target, false).is_err());
    }
}
