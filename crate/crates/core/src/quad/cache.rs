//! Shared bilinear cache with an optional append-only backing file.
//!
//! Each line of the file is `hash,value,error` with the hash as 16 lowercase hex
//! digits and both numbers in shortest round-trip decimal.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::Mutex;
use sha2::{Digest, Sha256};

use super::corner::KernelKind;
use super::QuadSettings;
use crate::testfn::DiamondBump;

#[derive(Debug, Default)]
pub struct BilinearCache {
    entries: Mutex<HashMap<u64, (f64, f64)>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl BilinearCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) a persistent cache. A file with any unparsable record is
    /// discarded with a warning and replaced by an empty one.
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref();
        let mut entries = HashMap::new();
        let mut corrupt = false;
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for line in reader.lines() {
                let line = match line {
                    Ok(l) => l,
                    Err(_) => {
                        corrupt = true;
                        break;
                    }
                };
                if line.trim().is_empty() {
                    continue;
                }
                match parse_record(&line) {
                    Some((k, v, e)) => {
                        entries.insert(k, (v, e));
                    }
                    None => {
                        corrupt = true;
                        break;
                    }
                }
            }
        }
        let file = if corrupt {
            log::warn!("cache file {} is corrupt; ignoring its contents", path.display());
            entries.clear();
            File::create(path)?
        } else {
            OpenOptions::new().create(true).append(true).open(path)?
        };
        Ok(Self {
            entries: Mutex::new(entries),
            file: Some(Mutex::new(file)),
            path: Some(path.to_path_buf()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn get(&self, key: u64) -> Option<(f64, f64)> {
        let found = self.entries.lock().get(&key).copied();
        match found {
            Some(_) => self.hits.fetch_add(1, Ordering::Relaxed),
            None => self.misses.fetch_add(1, Ordering::Relaxed),
        };
        found
    }

    pub fn insert(&self, key: u64, value: f64, error: f64) {
        let fresh = self.entries.lock().insert(key, (value, error)).is_none();
        if let (true, Some(file)) = (fresh, &self.file) {
            let mut file = file.lock();
            if let Err(err) = writeln!(file, "{}", format_record(key, value, error)) {
                log::warn!("failed to append to bilinear cache: {err}");
            }
        }
    }
}

pub fn format_record(key: u64, value: f64, error: f64) -> String {
    format!("{key:016x},{value:?},{error:?}")
}

fn parse_record(line: &str) -> Option<(u64, f64, f64)> {
    let mut parts = line.split(',');
    let hash = parts.next()?;
    let value = parts.next()?.parse().ok()?;
    let error = parts.next()?.parse().ok()?;
    if parts.next().is_some() || hash.len() != 16 || !hash.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
        return None;
    }
    Some((u64::from_str_radix(hash, 16).ok()?, value, error))
}

/// Content hash of everything that determines a bilinear value.
pub fn cache_key(kind: KernelKind, f: &DiamondBump, g: &DiamondBump, m: f64, settings: &QuadSettings) -> u64 {
    let mut h = Sha256::new();
    h.update(match kind {
        KernelKind::Hadamard => b"H",
        KernelKind::PauliJordan => b"P",
    });
    for b in [f, g] {
        for x in [b.center_x, b.radius, b.sharpness, b.amplitude] {
            h.update(x.to_bits().to_le_bytes());
        }
    }
    h.update(m.to_bits().to_le_bytes());
    h.update([settings.backend as u8]);
    h.update((settings.points_per_axis as u64).to_le_bytes());
    h.update(settings.sample_count.to_le_bytes());
    h.update(settings.lightcone_clamp.to_bits().to_le_bytes());
    h.update(settings.seed.to_le_bytes());
    let digest = h.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
