//! Binary embedding (`FEMB`) and score (`GSCR`) stores.
//!
//! Both are little-endian and sorted by crop id.
//!
//! ```text
//! FEMB: "FEMB" u32 dim  u64 count  { u64 id, f32 x dim (bg), f32 x dim (fg) } x count
//! GSCR: "GSCR" u32 count           { u64 id, f32 score } x count
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use docforge_core::quality::ExternalScorer;
use docforge_core::similarity::{CropEmbedding, EmbeddingStore};

use crate::io::write_atomic;
use crate::{Error, Result};

pub const FEMB_MAGIC: &[u8; 4] = b"FEMB";
pub const GSCR_MAGIC: &[u8; 4] = b"GSCR";

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(format!("truncated at byte {}", self.pos)),
        }
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> std::result::Result<f32, String> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn finish(&self) -> std::result::Result<(), String> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(format!("{} trailing bytes", self.bytes.len() - self.pos))
        }
    }
}

fn check_order(prev: &mut Option<u64>, id: u64) -> std::result::Result<(), String> {
    match *prev {
        Some(p) if p == id => return Err(format!("duplicate crop id {id}")),
        Some(p) if p > id => return Err(format!("crop id {id} out of order")),
        _ => {}
    }
    *prev = Some(id);
    Ok(())
}

pub fn encode_embeddings(store: &EmbeddingStore) -> Vec<u8> {
    let dim = store.dim();
    let mut out = Vec::with_capacity(16 + store.len() * (8 + 8 * dim));
    out.extend_from_slice(FEMB_MAGIC);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(store.len() as u64).to_le_bytes());
    for (id, e) in store.iter() {
        out.extend_from_slice(&id.to_le_bytes());
        for v in e.bg.iter().chain(&e.fg) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Parse and validate; each head is L2-normalized on load.
pub fn decode_embeddings(bytes: &[u8]) -> std::result::Result<EmbeddingStore, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != FEMB_MAGIC {
        return Err("bad magic, expected FEMB".into());
    }
    let dim = r.u32()? as usize;
    if dim == 0 {
        return Err("zero dimension".into());
    }
    let count = r.u64()?;
    let record = 8 + 8 * dim as u64;
    let remaining = (bytes.len() - r.pos) as u64;
    if count.checked_mul(record) != Some(remaining) {
        return Err(format!("header count {count} does not match {remaining} payload bytes"));
    }
    let mut store = EmbeddingStore::new(dim);
    let mut prev = None;
    for _ in 0..count {
        let id = r.u64()?;
        check_order(&mut prev, id)?;
        let mut read_head = || (0..dim).map(|_| r.f32()).collect::<std::result::Result<Vec<_>, _>>();
        let bg = read_head()?;
        let fg = read_head()?;
        store.insert(id, CropEmbedding { bg, fg }).map_err(|e| e.to_string())?;
    }
    r.finish()?;
    Ok(store)
}

pub fn encode_scores(scores: &BTreeMap<u64, f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + scores.len() * 12);
    out.extend_from_slice(GSCR_MAGIC);
    out.extend_from_slice(&(scores.len() as u32).to_le_bytes());
    for (id, s) in scores {
        out.extend_from_slice(&id.to_le_bytes());
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn decode_scores(bytes: &[u8]) -> std::result::Result<BTreeMap<u64, f32>, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != GSCR_MAGIC {
        return Err("bad magic, expected GSCR".into());
    }
    let count = r.u32()? as u64;
    let remaining = (bytes.len() - r.pos) as u64;
    if count * 12 != remaining {
        return Err(format!("header count {count} does not match {remaining} payload bytes"));
    }
    let mut out = BTreeMap::new();
    let mut prev = None;
    for _ in 0..count {
        let id = r.u64()?;
        check_order(&mut prev, id)?;
        let s = r.f32()?;
        if !s.is_finite() {
            return Err(format!("non-finite score for crop {id}"));
        }
        out.insert(id, s);
    }
    r.finish()?;
    Ok(out)
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_embeddings(&bytes).map_err(|m| Error::format(path, m))
}

pub fn save_embeddings(path: &Path, store: &EmbeddingStore) -> Result<()> {
    write_atomic(path, &encode_embeddings(store))
}

pub fn load_scores(path: &Path) -> Result<ExternalScorer> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let scores = decode_scores(&bytes).map_err(|m| Error::format(path, m))?;
    Ok(ExternalScorer { scores })
}

pub fn save_scores(path: &Path, scores: &BTreeMap<u64, f32>) -> Result<()> {
    write_atomic(path, &encode_scores(scores))
}
