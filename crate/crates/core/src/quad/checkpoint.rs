use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{PanelPolicy, QuadConfig};
use crate::error::{Error, Result};
use crate::zeta::EvalConfig;

/// Prefix-integral state: ∫₀^frontier Z² and Z⁴ with accumulated error.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCheckpoint {
    pub frontier: f64,
    pub i2: f64,
    pub i4: f64,
    pub est_error_i2: f64,
    pub est_error_i4: f64,
    pub cfg_hash: String,
    pub panel_width_policy: PanelPolicy,
}

impl SweepCheckpoint {
    pub fn new(cfg_hash: String, panel_width_policy: PanelPolicy) -> Self {
        Self {
            frontier: 0.0,
            i2: 0.0,
            i4: 0.0,
            est_error_i2: 0.0,
            est_error_i4: 0.0,
            cfg_hash,
            panel_width_policy,
        }
    }

    /// Fresh checkpoint for this configuration pair.
    pub fn for_config(eval: &EvalConfig, quad: &QuadConfig) -> Self {
        Self::new(config_fingerprint(eval, quad), quad.policy)
    }
}

/// SHA-256 over a canonical rendering of every knob that changes the integrals.
/// The panel policy is part of it, so a stored hash also pins the panel rule.
pub fn config_fingerprint(eval: &EvalConfig, quad: &QuadConfig) -> String {
    let canonical = format!(
        "rs_order={};em_threshold={:e};em_terms={};target={:e};rel_tol={:e};max_depth={};cap={:e};fraction={:e}",
        eval.rs_correction_order,
        eval.em_threshold,
        eval.em_terms,
        eval.target_abs_error,
        quad.rel_tol,
        quad.max_depth,
        quad.policy.cap,
        quad.policy.fraction,
    );
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    frontier: f64,
    i2: f64,
    i4: f64,
    est_error_i2: f64,
    est_error_i4: f64,
    cfg_hash: String,
}

/// Append-only checkpoint CSV guarded by a `<path>.lock` file for the lifetime
/// of the handle.
#[derive(Debug)]
pub struct CheckpointFile {
    path: PathBuf,
    lock: PathBuf,
}

impl CheckpointFile {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut lock = path.clone().into_os_string();
        lock.push(".lock");
        let lock = PathBuf::from(lock);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(Error::CheckpointLocked(lock.display().to_string()));
            }
            Err(e) => return Err(e.into()),
        }
        Ok(Self { path, lock })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Last row written under `cfg_hash`. A file holding only rows from other
    /// configurations is a mismatch; an empty or missing file is `None`.
    pub fn latest(&self, cfg_hash: &str, policy: PanelPolicy) -> Result<Option<SweepCheckpoint>> {
        if !self.path.exists() {
            return Ok(None);
        }
        let mut rdr = csv::Reader::from_path(&self.path)?;
        let mut found = None;
        let mut other = None;
        for row in rdr.deserialize::<Row>() {
            let row = row?;
            if row.cfg_hash == cfg_hash {
                found = Some(row);
            } else {
                other = Some(row.cfg_hash);
            }
        }
        match (found, other) {
            (Some(r), _) => Ok(Some(SweepCheckpoint {
                frontier: r.frontier,
                i2: r.i2,
                i4: r.i4,
                est_error_i2: r.est_error_i2,
                est_error_i4: r.est_error_i4,
                cfg_hash: r.cfg_hash,
                panel_width_policy: policy,
            })),
            (None, Some(found)) => Err(Error::CheckpointMismatch {
                expected: cfg_hash.to_string(),
                found,
            }),
            (None, None) => Ok(None),
        }
    }

    /// Append one snapshot and sync it to disk before returning.
    pub fn append(&self, ckpt: &SweepCheckpoint) -> Result<()> {
        let fresh = fs::metadata(&self.path)
            .map(|m| m.len() == 0)
            .unwrap_or(true);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(fresh)
            .from_writer(file);
        wtr.serialize(Row {
            frontier: ckpt.frontier,
            i2: ckpt.i2,
            i4: ckpt.i4,
            est_error_i2: ckpt.est_error_i2,
            est_error_i4: ckpt.est_error_i4,
            cfg_hash: ckpt.cfg_hash.clone(),
        })?;
        let file: File = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        file.sync_data()?;
        Ok(())
    }
}

impl Drop for CheckpointFile {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ckpt(frontier: f64, hash: &str) -> SweepCheckpoint {
        SweepCheckpoint {
            frontier,
            i2: frontier * 1.1 + 0.1,
            i4: frontier * 3.7,
            est_error_i2: 1e-9 / 3.0,
            est_error_i4: 2e-9 / 7.0,
            cfg_hash: hash.into(),
            panel_width_policy: PanelPolicy::default(),
        }
    }

    #[test]
    fn header_and_last_matching_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.csv");
        let f = CheckpointFile::open(&path).unwrap();
        f.append(&ckpt(1.0, "aa")).unwrap();
        f.append(&ckpt(2.0, "bb")).unwrap();
        f.append(&ckpt(3.0 / 7.0, "aa")).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("frontier,i2,i4,est_error_i2,est_error_i4,cfg_hash\n"));
        assert_eq!(text.lines().count(), 4);
        let got = f.latest("aa", PanelPolicy::default()).unwrap().unwrap();
        assert_eq!(got, ckpt(3.0 / 7.0, "aa"));
        assert!(matches!(
            f.latest("cc", PanelPolicy::default()),
            Err(Error::CheckpointMismatch { .. })
        ));
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.csv");
        let first = CheckpointFile::open(&path).unwrap();
        assert!(matches!(
            CheckpointFile::open(&path),
            Err(Error::CheckpointLocked(_))
        ));
        drop(first);
        assert!(CheckpointFile::open(&path).is_ok());
    }

    #[test]
    fn fingerprint_tracks_config() {
        let e = EvalConfig::default();
        let q = QuadConfig::default();
        assert_eq!(config_fingerprint(&e, &q), config_fingerprint(&e, &q));
        let q2 = QuadConfig { rel_tol: 1e-9, ..q };
        assert_ne!(config_fingerprint(&e, &q), config_fingerprint(&e, &q2));
        let e2 = EvalConfig {
            rs_correction_order: 3,
            ..e
        };
        assert_ne!(config_fingerprint(&e, &q), config_fingerprint(&e2, &q));
    }
}
