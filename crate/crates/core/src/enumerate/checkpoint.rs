//! Resumable shard bookkeeping.
//!
//! Layout (little-endian): magic `TLSHARD1`, `u32` version, `u64` config
//! hash, `u64` shard count, a bitmap of finished shards (`ceil(n/8)` bytes,
//! bit `i % 8` of byte `i / 8`), then `n` triples of `u64` counters
//! `(nodes, found, violations)`.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"TLSHARD1";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a shard checkpoint")]
    BadMagic,
    #[error("checkpoint version {0} is not supported")]
    BadVersion(u32),
    #[error("checkpoint belongs to a different search")]
    ConfigMismatch,
    #[error("checkpoint is truncated")]
    Truncated,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ShardCounters {
    pub nodes: u64,
    pub found: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub config_hash: u64,
    pub done: Vec<bool>,
    pub counters: Vec<ShardCounters>,
}

impl Checkpoint {
    pub fn new(config_hash: u64, shards: usize) -> Self {
        Checkpoint {
            config_hash,
            done: vec![false; shards],
            counters: vec![ShardCounters::default(); shards],
        }
    }

    pub fn finished(&self) -> usize {
        self.done.iter().filter(|&&d| d).count()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.done.len();
        let mut out = Vec::with_capacity(28 + n.div_ceil(8) + 24 * n);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.config_hash.to_le_bytes());
        out.extend_from_slice(&(n as u64).to_le_bytes());
        let mut bitmap = vec![0u8; n.div_ceil(8)];
        for (i, _) in self.done.iter().enumerate().filter(|(_, &d)| d) {
            bitmap[i / 8] |= 1 << (i % 8);
        }
        out.extend_from_slice(&bitmap);
        for c in &self.counters {
            for v in [c.nodes, c.found, c.violations] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut at = 0usize;
        let mut take = |len: usize| -> Result<&[u8], CheckpointError> {
            let s = bytes.get(at..at + len).ok_or(CheckpointError::Truncated)?;
            at += len;
            Ok(s)
        };
        if take(8)? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap());
        let u64_at = |s: &[u8]| u64::from_le_bytes(s.try_into().unwrap());
        let version = u32_at(take(4)?);
        if version != VERSION {
            return Err(CheckpointError::BadVersion(version));
        }
        let config_hash = u64_at(take(8)?);
        let n = u64_at(take(8)?) as usize;
        let bitmap = take(n.div_ceil(8))?.to_vec();
        let done = (0..n).map(|i| bitmap[i / 8] >> (i % 8) & 1 == 1).collect();
        let mut counters = Vec::with_capacity(n);
        for _ in 0..n {
            counters.push(ShardCounters {
                nodes: u64_at(take(8)?),
                found: u64_at(take(8)?),
                violations: u64_at(take(8)?),
            });
        }
        Ok(Checkpoint {
            config_hash,
            done,
            counters,
        })
    }

    /// Writes through a temporary file so an interrupted write never leaves
    /// a corrupt checkpoint behind.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_bytes())?;
        fs::rename(tmp, path)
    }

    /// Loads a checkpoint for the given search, or starts a fresh one when
    /// the file does not exist.
    pub fn load_or_new(
        path: &Path,
        config_hash: u64,
        shards: usize,
    ) -> Result<Self, CheckpointError> {
        match fs::read(path) {
            Ok(bytes) => {
                let ck = Checkpoint::from_bytes(&bytes)?;
                if ck.config_hash != config_hash || ck.done.len() != shards {
                    return Err(CheckpointError::ConfigMismatch);
                }
                Ok(ck)
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                Ok(Checkpoint::new(config_hash, shards))
            }
            Err(e) => Err(e.into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_rejections() {
        let mut ck = Checkpoint::new(0xfeed, 11);
        ck.done[3] = true;
        ck.done[10] = true;
        ck.counters[3] = ShardCounters {
            nodes: 99,
            found: 7,
            violations: 1,
        };
        let bytes = ck.to_bytes();
        assert_eq!(&bytes[..8], b"TLSHARD1");
        assert_eq!(bytes.len(), 8 + 4 + 8 + 8 + 2 + 24 * 11);
        assert_eq!(Checkpoint::from_bytes(&bytes).unwrap(), ck);
        assert!(matches!(
            Checkpoint::from_bytes(&bytes[..40]),
            Err(CheckpointError::Truncated)
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            Checkpoint::from_bytes(&bad),
            Err(CheckpointError::BadMagic)
        ));
        let mut bad = bytes;
        bad[8] = 9;
        assert!(matches!(
            Checkpoint::from_bytes(&bad),
            Err(CheckpointError::BadVersion(9))
        ));
    }

    #[test]
    fn files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.ck");
        let fresh = Checkpoint::load_or_new(&path, 5, 4).unwrap();
        assert_eq!(fresh.finished(), 0);
        let mut ck = fresh;
        ck.done[1] = true;
        ck.save(&path).unwrap();
        assert_eq!(Checkpoint::load_or_new(&path, 5, 4).unwrap(), ck);
        assert!(matches!(
            Checkpoint::load_or_new(&path, 6, 4),
            Err(CheckpointError::ConfigMismatch)
        ));
    }
}
