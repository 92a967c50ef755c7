//! Append-only store of spectrum fingerprints, one JSON record per line.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::RationalMap;
use crate::spectrum::{self, fnv1a, SpectrumConfig, SpectrumFingerprint};

pub const HEADER: &str = "#multispec-catalog v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub id: String,
    pub map_text: String,
    pub degree: usize,
    pub max_period: u32,
    pub quantum: f64,
    pub digest: String,
    /// Per level, the quantized entries as `[re, im]` decimal strings.
    pub levels: Vec<Vec<[String; 2]>>,
    pub tags: Vec<String>,
    pub created_at: String,
}

/// 64-bit FNV-1a of `map_text`, a zero byte, then degree, max_period and the
/// bits of quantum, little-endian.
pub fn entry_id(map_text: &str, degree: usize, max_period: u32, quantum: f64) -> String {
    let mut bytes = map_text.as_bytes().to_vec();
    bytes.push(0);
    bytes.extend_from_slice(&(degree as u32).to_le_bytes());
    bytes.extend_from_slice(&max_period.to_le_bytes());
    bytes.extend_from_slice(&quantum.to_bits().to_le_bytes());
    format!("{:016x}", fnv1a(&bytes))
}

/// Shortest decimal at 15 significant digits, which hides the rounding of
/// `grid * quantum * 10^exponent`.
fn decimal(x: f64) -> String {
    let x: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    let x = x + 0.0;
    if x == 0.0 || (1e-6..1e16).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

impl CatalogEntry {
    pub fn from_fingerprint(map_text: &str, fp: &SpectrumFingerprint, tags: Vec<String>, created_at: String) -> Self {
        let levels = fp
            .levels
            .iter()
            .map(|l| {
                l.iter()
                    .map(|q| {
                        let v = q.value(fp.quantum);
                        [decimal(v.re), decimal(v.im)]
                    })
                    .collect()
            })
            .collect();
        CatalogEntry {
            id: entry_id(map_text, fp.degree, fp.max_period, fp.quantum),
            map_text: map_text.to_string(),
            degree: fp.degree,
            max_period: fp.max_period,
            quantum: fp.quantum,
            digest: fp.digest_hex(),
            levels,
            tags,
            created_at,
        }
    }

    /// Parses `map_text`, computes its spectrum and builds the entry.
    pub fn compute(
        map_text: &str,
        max_period: u32,
        quantum: f64,
        cfg: &SpectrumConfig,
        tags: Vec<String>,
    ) -> Result<Self> {
        let f = RationalMap::parse(map_text)?;
        let s = spectrum::spectrum(&f, max_period, cfg)?;
        let fp = spectrum::fingerprint(&s, quantum);
        Ok(Self::from_fingerprint(map_text, &fp, tags, now_rfc3339()))
    }

    fn same_payload(&self, other: &CatalogEntry) -> bool {
        self.map_text == other.map_text
            && self.degree == other.degree
            && self.max_period == other.max_period
            && self.quantum.to_bits() == other.quantum.to_bits()
            && self.digest == other.digest
            && self.levels == other.levels
    }

    fn matches(&self, fp: &SpectrumFingerprint) -> bool {
        self.digest == fp.digest_hex()
            && self.quantum.to_bits() == fp.quantum.to_bits()
            && self.degree == fp.degree
            && self.max_period == fp.max_period
    }

    /// Re-parses `map_text` and checks that the recomputed digest matches.
    pub fn verify(&self, cfg: &SpectrumConfig) -> Result<bool> {
        let f = RationalMap::parse(&self.map_text)?;
        let s = spectrum::spectrum(&f, self.max_period, cfg)?;
        let fp = spectrum::fingerprint(&s, self.quantum);
        Ok(f.degree() == self.degree && fp.digest_hex() == self.digest)
    }
}

fn parse_line(line: &str, number: usize) -> Result<CatalogEntry> {
    let corrupt = |reason: String| Error::CorruptEntry { line: number, reason };
    let e: CatalogEntry = serde_json::from_str(line).map_err(|err| corrupt(err.to_string()))?;
    if e.digest.len() != 16 || !e.digest.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(corrupt(format!("malformed digest {:?}", e.digest)));
    }
    if e.id != entry_id(&e.map_text, e.degree, e.max_period, e.quantum) {
        return Err(corrupt(format!("id {} does not match the content", e.id)));
    }
    Ok(e)
}

/// Entries in insertion order plus the corrupt lines that were skipped.
#[derive(Debug, Default)]
pub struct Listing {
    pub entries: Vec<CatalogEntry>,
    pub corrupt: Vec<Error>,
}

fn parse_store(text: &str) -> Result<Listing> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == HEADER => {}
        other => return Err(Error::BadHeader(other.unwrap_or("").to_string())),
    }
    let mut out = Listing::default();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line, i + 2) {
            Ok(e) => out.entries.push(e),
            Err(err) => out.corrupt.push(err),
        }
    }
    Ok(out)
}

pub fn catalog_list(store: &Path) -> Result<Listing> {
    parse_store(&std::fs::read_to_string(store)?)
}

/// Appends `entry` under an exclusive lock. Adding an identical entry again
/// is a no-op.
pub fn catalog_add(store: &Path, entry: &CatalogEntry) -> Result<String> {
    let mut file = OpenOptions::new().read(true).append(true).create(true).open(store)?;
    file.lock()?;
    let result = add_locked(&mut file, entry);
    file.unlock()?;
    result
}

fn add_locked(file: &mut File, entry: &CatalogEntry) -> Result<String> {
    let mut text = String::new();
    file.seek(SeekFrom::Start(0))?;
    file.read_to_string(&mut text)?;
    let mut out = String::new();
    if text.is_empty() {
        out.push_str(HEADER);
        out.push('\n');
    } else {
        let listing = parse_store(&text)?;
        if let Some(old) = listing.entries.iter().find(|e| e.id == entry.id) {
            if old.same_payload(entry) {
                return Ok(entry.id.clone());
            }
            return Err(Error::DuplicateId(entry.id.clone()));
        }
        if !text.ends_with('\n') {
            out.push('\n');
        }
    }
    out.push_str(&serde_json::to_string(entry).map_err(|e| Error::Io(e.into()))?);
    out.push('\n');
    file.write_all(out.as_bytes())?;
    file.flush()?;
    Ok(entry.id.clone())
}

/// Entries whose digest, quantum, degree and max period all equal those of
/// `fp`.
pub fn catalog_query(store: &Path, fp: &SpectrumFingerprint) -> Result<Listing> {
    let mut listing = catalog_list(store)?;
    listing.entries.retain(|e| e.matches(fp));
    Ok(listing)
}

#[derive(Debug, Default)]
pub struct Collisions {
    pub groups: Vec<Vec<CatalogEntry>>,
    pub corrupt: Vec<Error>,
}

/// Groups of at least two entries with distinct map texts sharing degree,
/// max period, quantum and digest. Groups are ordered by first appearance.
pub fn catalog_scan_collisions(store: &Path) -> Result<Collisions> {
    let listing = catalog_list(store)?;
    let mut index: HashMap<(usize, u32, u64, String), usize> = HashMap::new();
    let mut groups: Vec<Vec<CatalogEntry>> = Vec::new();
    for e in listing.entries {
        let key = (e.degree, e.max_period, e.quantum.to_bits(), e.digest.clone());
        let slot = *index.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        if groups[slot].iter().all(|o| o.map_text != e.map_text) {
            groups[slot].push(e);
        }
    }
    groups.retain(|g| g.len() >= 2);
    Ok(Collisions {
        groups,
        corrupt: listing.corrupt,
    })
}
