//! On-disk store of ray values keyed by `(filter, generator, depth)`.
//!
//! One tab-separated line per entry:
//! `filter generator depth value version checksum`, where the checksum is the
//! SHA-256 of the first five fields. Lines are appended whole, so readers
//! never see a torn entry from a single writer.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use primeweb::sequences::{value_at, Address, CountingSet, Filter};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub type CacheKey = (String, u64, u32);

fn checksum(filter: &str, generator: u64, depth: u32, value: u64, version: &str) -> String {
    let digest = Sha256::digest(format!("{filter}\t{generator}\t{depth}\t{value}\t{version}"));
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub entries: usize,
    /// Lines dropped on load: bad checksum, other engine version or
    /// unreadable.
    pub evicted: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub entries: usize,
    pub sampled: usize,
    /// Keys whose stored value differs from a recomputation; they are
    /// evicted.
    pub mismatches: Vec<CacheKey>,
}

impl AuditReport {
    pub fn clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Debug)]
pub struct RayCache {
    path: PathBuf,
    version: String,
    entries: BTreeMap<CacheKey, u64>,
    evicted: usize,
}

impl RayCache {
    /// Loads the store at `path` (missing means empty). Corrupted lines are
    /// dropped and the file is rewritten without them.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, CliError> {
        let path = path.into();
        let version = format!("primeweb-{}", primeweb::VERSION);
        let mut cache = Self { path, version, entries: BTreeMap::new(), evicted: 0 };
        let text = match fs::read_to_string(&cache.path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(CliError::io(&cache.path, e)),
        };
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            match cache.parse_line(line) {
                Some((key, value)) => {
                    cache.entries.insert(key, value);
                }
                None => cache.evicted += 1,
            }
        }
        if cache.evicted > 0 {
            cache.rewrite()?;
        }
        Ok(cache)
    }

    fn parse_line(&self, line: &str) -> Option<(CacheKey, u64)> {
        let f: Vec<&str> = line.split('\t').collect();
        let [filter, g, d, v, version, sum] = f.as_slice() else { return None };
        let (g, d, v) = (g.parse().ok()?, d.parse().ok()?, v.parse().ok()?);
        if *version != self.version || checksum(filter, g, d, v, version) != *sum {
            return None;
        }
        Some(((filter.to_string(), g, d), v))
    }

    fn line(&self, key: &CacheKey, value: u64) -> String {
        let (f, g, d) = key;
        format!("{f}\t{g}\t{d}\t{value}\t{}\t{}\n", self.version, checksum(f, *g, *d, value, &self.version))
    }

    fn rewrite(&self) -> Result<(), CliError> {
        let body: String = self.entries.iter().map(|(k, &v)| self.line(k, v)).collect();
        let tmp = self.path.with_extension("tmp");
        fs::write(&tmp, body).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &self.path).map_err(|e| CliError::io(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats { entries: self.entries.len(), evicted: self.evicted }
    }

    /// Entry counts per filter name.
    pub fn filters(&self) -> Vec<(String, usize)> {
        let mut out: BTreeMap<&str, usize> = BTreeMap::new();
        for (f, _, _) in self.entries.keys() {
            *out.entry(f).or_default() += 1;
        }
        out.into_iter().map(|(f, n)| (f.to_string(), n)).collect()
    }

    pub fn get(&self, filter: &str, generator: u64, depth: u32) -> Option<u64> {
        self.entries.get(&(filter.to_string(), generator, depth)).copied()
    }

    /// Stores an entry and appends it to the file.
    pub fn insert(&mut self, filter: &str, generator: u64, depth: u32, value: u64) -> Result<(), CliError> {
        let key = (filter.to_string(), generator, depth);
        if self.entries.get(&key) == Some(&value) {
            return Ok(());
        }
        let line = self.line(&key, value);
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let mut file =
            OpenOptions::new().create(true).append(true).open(&self.path).map_err(|e| CliError::io(&self.path, e))?;
        file.write_all(line.as_bytes()).map_err(|e| CliError::io(&self.path, e))?;
        self.entries.insert(key, value);
        Ok(())
    }

    /// The ray value at `(generator, depth)`, from the store or computed and
    /// stored.
    pub fn value(&mut self, filter: &Filter, generator: u64, depth: u32) -> Result<u64, CliError> {
        let name = filter.name();
        if let Some(v) = self.get(&name, generator, depth) {
            return Ok(v);
        }
        let v = value_at(filter, Address::new(generator, depth))?;
        self.insert(&name, generator, depth, v)?;
        Ok(v)
    }

    /// Recomputes every `stride`-th entry of `filter` (at least one) and
    /// evicts those that disagree.
    pub fn audit(&mut self, filter: &Filter, stride: usize) -> Result<AuditReport, CliError> {
        let name = filter.name();
        let keys: Vec<CacheKey> = self.entries.keys().filter(|k| k.0 == name).cloned().collect();
        let stride = stride.max(1);
        let mut report = AuditReport { entries: keys.len(), ..AuditReport::default() };
        for key in keys.iter().step_by(stride) {
            report.sampled += 1;
            let fresh = value_at(filter, Address::new(key.1, key.2))?;
            if self.entries[key] != fresh {
                report.mismatches.push(key.clone());
            }
        }
        if !report.mismatches.is_empty() {
            for k in &report.mismatches {
                self.entries.remove(k);
            }
            self.evicted += report.mismatches.len();
            self.rewrite()?;
        }
        Ok(report)
    }

    pub fn clear(&mut self) -> Result<(), CliError> {
        self.entries.clear();
        match fs::remove_file(&self.path) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(CliError::io(&self.path, e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use primeweb::engine::PrimeIndexer;
    use primeweb::sequences::FilterKind;

    use super::*;

    fn primes() -> Filter {
        Filter::new(FilterKind::Primes, Arc::new(PrimeIndexer::default()))
    }

    #[test]
    fn hit_equals_recomputation_and_survives_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rays.tsv");
        let p = primes();
        let mut c = RayCache::open(&path).unwrap();
        assert_eq!(c.value(&p, 1, 7).unwrap(), 709);
        assert_eq!(c.value(&p, 4, 3).unwrap(), 59);
        let c = RayCache::open(&path).unwrap();
        assert_eq!(c.stats(), CacheStats { entries: 2, evicted: 0 });
        assert_eq!(c.get("P", 1, 7), Some(709));
    }

    #[test]
    fn corrupted_lines_are_evicted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rays.tsv");
        let p = primes();
        let mut c = RayCache::open(&path).unwrap();
        c.value(&p, 1, 7).unwrap();
        c.value(&p, 6, 2).unwrap();
        let text = fs::read_to_string(&path).unwrap().replacen("\t709\t", "\t719\t", 1) + "garbage\n";
        fs::write(&path, text).unwrap();
        let c = RayCache::open(&path).unwrap();
        assert_eq!(c.stats(), CacheStats { entries: 1, evicted: 2 });
        assert_eq!(c.get("P", 1, 7), None);
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1);
    }

    #[test]
    fn audit_catches_a_wrong_value_with_a_valid_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RayCache::open(dir.path().join("rays.tsv")).unwrap();
        let p = primes();
        c.insert("P", 1, 7, 719).unwrap();
        c.value(&p, 4, 3).unwrap();
        let report = c.audit(&p, 1).unwrap();
        assert_eq!((report.sampled, report.mismatches.len()), (2, 1));
        assert_eq!(c.get("P", 1, 7), None);
        assert!(c.audit(&p, 1).unwrap().clean());
        c.clear().unwrap();
        assert_eq!(c.stats().entries, 0);
    }
}
