//! Line-delimited corpus manifests.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use docforge_core::ocr::{compute_char_stats, CharBox, CharStats, DocumentRecord};
use docforge_core::segments::{extract_line_segments, LineSegment, SegmentConfig};
use docforge_core::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{read_lines, read_rgb};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestChar {
    pub t: String,
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub doc_id: String,
    pub image: String,
    #[serde(default)]
    pub chars: Vec<ManifestChar>,
}

impl ManifestEntry {
    pub fn char_boxes(&self) -> Vec<CharBox> {
        self.chars.iter().map(|c| CharBox::new(c.t.clone(), c.x, c.y, c.w, c.h)).collect()
    }

    pub fn from_record(record: &DocumentRecord) -> Self {
        Self {
            doc_id: record.doc_id.clone(),
            image: record.image.clone(),
            chars: record
                .chars
                .iter()
                .map(|c| ManifestChar {
                    t: c.text.clone(),
                    x: c.rect.x,
                    y: c.rect.y,
                    w: c.rect.w,
                    h: c.rect.h,
                })
                .collect(),
        }
    }
}

/// A document that passed validation, with its decoded image.
#[derive(Debug, Clone)]
pub struct LoadedDoc {
    pub ordinal: u32,
    pub record: DocumentRecord,
    pub image: RgbImage,
    pub stats: CharStats,
    /// Characters removed by the bounds policy.
    pub dropped_chars: usize,
}

impl LoadedDoc {
    pub fn segments(&self, config: &SegmentConfig) -> Vec<LineSegment> {
        extract_line_segments(&self.record.chars, self.image.width(), self.image.height(), config)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skip {
    pub line: usize,
    pub doc_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    /// Sorted by `doc_id`; `ordinal` is the position in this list.
    pub docs: Vec<LoadedDoc>,
    pub skips: Vec<Skip>,
}

impl Corpus {
    pub fn find(&self, doc_id: &str) -> Option<&LoadedDoc> {
        self.docs
            .binary_search_by(|d| d.record.doc_id.as_str().cmp(doc_id))
            .ok()
            .map(|i| &self.docs[i])
    }
}

pub fn resolve(base: &Path, image: &str) -> PathBuf {
    let p = Path::new(image);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn base_dir(manifest: &Path) -> PathBuf {
    manifest.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Validate one entry against its image. Relative image paths resolve against
/// `base`.
pub fn parse_ocr_document(entry: &ManifestEntry, base: &Path) -> std::result::Result<(DocumentRecord, RgbImage, usize), String> {
    let path = resolve(base, &entry.image);
    if !path.is_file() {
        return Err(format!("missing image {}", path.display()));
    }
    let image = read_rgb(&path).map_err(|e| e.to_string())?;
    let v = DocumentRecord::validate(
        entry.doc_id.clone(),
        entry.image.clone(),
        image.width(),
        image.height(),
        entry.char_boxes(),
    )
    .map_err(|e| e.to_string())?;
    Ok((v.record, image, v.dropped.len()))
}

fn is_header(line: &str) -> bool {
    serde_json::from_str::<crate::io::Header>(line).is_ok_and(|h| h.kind == "header")
}

/// Entries of a manifest. Malformed lines become skips; duplicate ids are an error.
pub fn read_manifest(path: &Path) -> Result<(Vec<(usize, ManifestEntry)>, Vec<Skip>)> {
    let mut entries = Vec::new();
    let mut skips = Vec::new();
    let mut seen = BTreeSet::new();
    for (n, line) in read_lines(path)? {
        if is_header(&line) {
            continue;
        }
        match serde_json::from_str::<ManifestEntry>(&line) {
            Ok(e) => {
                if !seen.insert(e.doc_id.clone()) {
                    return Err(Error::Corpus(format!("{}: duplicate doc_id '{}' on line {n}", path.display(), e.doc_id)));
                }
                entries.push((n, e));
            }
            Err(err) => skips.push(Skip {
                line: n,
                doc_id: None,
                reason: format!("malformed entry: {err}"),
            }),
        }
    }
    Ok((entries, skips))
}

/// Load and validate every document of a manifest. Skipped documents are
/// logged; with `strict` any skip is an error.
pub fn load_corpus(path: &Path, strict: bool) -> Result<Corpus> {
    let (entries, mut skips) = read_manifest(path)?;
    let base = base_dir(path);
    let parsed: Vec<_> = entries
        .par_iter()
        .map(|(n, e)| (*n, e, parse_ocr_document(e, &base)))
        .collect();
    let mut docs = Vec::new();
    for (n, e, res) in parsed {
        match res {
            Ok((record, image, dropped)) => {
                if dropped > 0 {
                    log::warn!("{}: dropped {dropped} out-of-bounds or empty characters", record.doc_id);
                }
                let stats = compute_char_stats(&record.chars)?;
                docs.push(LoadedDoc {
                    ordinal: 0,
                    record,
                    image,
                    stats,
                    dropped_chars: dropped,
                });
            }
            Err(reason) => skips.push(Skip {
                line: n,
                doc_id: Some(e.doc_id.clone()),
                reason,
            }),
        }
    }
    skips.sort_by_key(|s| s.line);
    for s in &skips {
        log::warn!(
            "{} line {}: skipped {}: {}",
            path.display(),
            s.line,
            s.doc_id.as_deref().unwrap_or("entry"),
            s.reason
        );
    }
    if strict {
        if let Some(s) = skips.first() {
            return Err(Error::Corpus(format!("{} line {}: {}", path.display(), s.line, s.reason)));
        }
    }
    docs.sort_by(|a, b| a.record.doc_id.cmp(&b.record.doc_id));
    for (i, d) in docs.iter_mut().enumerate() {
        d.ordinal = i as u32;
    }
    Ok(Corpus { docs, skips })
}

/// Write a manifest, one entry per line.
pub fn manifest_bytes(entries: &[ManifestEntry]) -> Vec<u8> {
    let mut out = Vec::new();
    for e in entries {
        serde_json::to_writer(&mut out, e).expect("serializable entry");
        out.push(b'\n');
    }
    out
}
