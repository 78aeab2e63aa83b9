//! The common document every job writes.
//!
//! A document records what was asked (`config`), a digest of that request,
//! what was found (`result`) and the resulting verdict. Serialization is
//! deterministic: struct fields keep declaration order, maps are ordered,
//! and floats print in shortest round-trip form, so equal runs produce
//! byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Identifies the document layout.
pub const SCHEMA: &str = "zeroset-certificate";

/// Bumped whenever a field is added, removed or changes meaning.
pub const VERSION: u32 = 1;

/// Outcome class of a job; the command-line tool maps it to an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The claim was certified.
    Certified,
    /// The check ran to completion and the claim failed.
    Negative,
    /// The search hit a depth or resource limit without deciding.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<C, R> {
    pub schema: String,
    pub version: u32,
    pub kind: String,
    pub config: C,
    /// Hex SHA-256 of the canonical JSON of `config`.
    pub input_digest: String,
    pub result: R,
    pub verdict: Verdict,
}

impl<C: Serialize, R: Serialize> Document<C, R> {
    pub fn new(kind: &str, config: C, result: R, verdict: Verdict) -> Result<Self> {
        let input_digest = digest_of(&config)?;
        Ok(Self {
            schema: SCHEMA.into(),
            version: VERSION,
            kind: kind.into(),
            config,
            input_digest,
            result,
            verdict,
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }
}

/// Hex SHA-256 of the compact JSON encoding of `value`.
pub fn digest_of<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Writes through a sibling temporary file and a rename, so readers never
/// observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable() {
        let a = digest_of(&(1, "x", 0.5)).unwrap();
        let b = digest_of(&(1, "x", 0.5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert_ne!(a, digest_of(&(2, "x", 0.5)).unwrap());
    }

    #[test]
    fn document_round_trips() {
        let d = Document::new("demo", vec![1, 2], "ok".to_string(), Verdict::Certified).unwrap();
        let text = d.to_json().unwrap();
        let back: Document<Vec<i32>, String> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
    }
}
