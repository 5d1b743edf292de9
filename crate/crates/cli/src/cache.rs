//! On-disk coefficient cache keyed by `(spec, M)`. Each CSV table is stored
//! next to a SHA-256 digest of its bytes; a missing or mismatching digest
//! marks the entry stale and it is recomputed.

use crate::error::CliError;
use halfint::qexp::{expand_eta_quotient, read_cache, write_cache, EtaQuotientSpec, QExpansion};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    Stale,
}

#[derive(Debug, Clone)]
pub struct CoeffCache {
    dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("part");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(tmp, path)
}

impl CoeffCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    fn stem(spec: &EtaQuotientSpec, m: u64) -> String {
        let s: String = spec
            .to_string()
            .chars()
            .map(|c| match c {
                '^' => 'e',
                '*' => '_',
                c => c,
            })
            .collect();
        format!("eta_{s}_M{m}")
    }

    pub fn table_path(&self, spec: &EtaQuotientSpec, m: u64) -> PathBuf {
        self.dir.join(format!("{}.csv", Self::stem(spec, m)))
    }

    pub fn digest_path(&self, spec: &EtaQuotientSpec, m: u64) -> PathBuf {
        self.dir.join(format!("{}.sha256", Self::stem(spec, m)))
    }

    fn read_valid(&self, spec: &EtaQuotientSpec, m: u64) -> Option<QExpansion> {
        let table = self.table_path(spec, m);
        let bytes = std::fs::read(&table).ok()?;
        let want = std::fs::read_to_string(self.digest_path(spec, m)).ok()?;
        if want.trim() != sha256_hex(&bytes) {
            return None;
        }
        let f = read_cache(&table).ok()?;
        (f.truncation() == m && f.eta_spec() == Some(spec)).then_some(f)
    }

    pub fn load_or_compute(
        &self,
        spec: &EtaQuotientSpec,
        m: u64,
    ) -> Result<(QExpansion, CacheStatus), CliError> {
        let table = self.table_path(spec, m);
        let existed = table.exists();
        if existed {
            if let Some(f) = self.read_valid(spec, m) {
                return Ok((f, CacheStatus::Hit));
            }
        }
        let f = expand_eta_quotient(spec, m).map_err(CliError::usage)?;
        write_cache(&table, &f).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        let digest = sha256_hex(&std::fs::read(&table)?);
        write_atomic(&self.digest_path(spec, m), format!("{digest}\n").as_bytes())?;
        let status = if existed {
            CacheStatus::Stale
        } else {
            CacheStatus::Miss
        };
        Ok((f, status))
    }
}
