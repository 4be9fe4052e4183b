//! Serialized forms of engine outputs: crop manifest, generation log, tuple
//! export, quality manifest and the leakage report.

use base64::Engine as _;
use docforge_core::generator::{CropRecord, RegionLog};
use docforge_core::mining::{ContrastiveTuple, CropRef, Negative};
use docforge_core::quality::QualityLabel;
use docforge_core::segments::{LineSegment, SegmentKind};
use docforge_core::Rect;
use serde::{Deserialize, Serialize};

use crate::corpus::LoadedDoc;
use crate::io::encode_png_rgb;

/// `[x, y, w, h]`.
pub type BoxXywh = [u32; 4];

pub fn xywh(r: Rect) -> BoxXywh {
    [r.x, r.y, r.w, r.h]
}

pub fn rect(b: BoxXywh) -> Rect {
    Rect::new(b[0], b[1], b[2], b[3])
}

pub fn kind_str(k: SegmentKind) -> &'static str {
    match k {
        SegmentKind::Text => "text",
        SegmentKind::Blank => "blank",
        SegmentKind::HardBlank => "hard_blank",
    }
}

/// One line of the crop manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropEntry {
    pub crop_id: u64,
    pub doc_id: String,
    pub image: String,
    pub segment: usize,
    #[serde(rename = "box")]
    pub bbox: BoxXywh,
    pub text: String,
    pub kind: String,
    pub chars: usize,
    /// Absent for blanks, which are never scored.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub quality: Option<f64>,
}

impl CropEntry {
    pub fn new(doc: &LoadedDoc, segment: usize, seg: &LineSegment, crop_id: u64, quality: Option<f64>) -> Self {
        Self {
            crop_id,
            doc_id: doc.record.doc_id.clone(),
            image: doc.record.image.clone(),
            segment,
            bbox: xywh(seg.rect),
            text: seg.text.clone(),
            kind: kind_str(seg.kind).into(),
            chars: seg.char_count,
            quality,
        }
    }

    pub fn from_record(doc: &LoadedDoc, seg: &LineSegment, r: &CropRecord) -> Self {
        let (_, segment) = docforge_core::generator::split_crop_id(r.crop_id);
        Self::new(doc, segment, seg, r.crop_id, r.quality)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionEntry {
    pub doc_id: String,
    pub region: BoxXywh,
    pub crop_id: u64,
    pub region_blank: bool,
    pub gates: Vec<String>,
    pub branch: Option<String>,
    pub source_crop: Option<u64>,
    pub source_doc: Option<String>,
    pub font: Option<String>,
    pub color: Option<[u8; 3]>,
    pub similarity: Option<f64>,
    pub inpaint_mode: Option<String>,
    pub masked_pixels: u64,
    pub skip_reason: Option<String>,
}

impl RegionEntry {
    pub fn new(doc_id: &str, log: &RegionLog, source_doc: Option<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            region: xywh(log.region),
            crop_id: log.crop_id,
            region_blank: log.region_blank,
            gates: log.gates.iter().map(|g| g.as_str().into()).collect(),
            branch: log.branch.map(|b| b.as_str().into()),
            source_crop: log.source_crop,
            source_doc,
            font: log.font.clone(),
            color: log.color,
            similarity: log.similarity,
            inpaint_mode: log.inpaint_mode.map(|m| m.as_str().into()),
            masked_pixels: log.masked_pixels,
            skip_reason: log.skip_reason.map(Into::into),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropRefEntry {
    pub doc_id: String,
    pub segment: usize,
    #[serde(rename = "box")]
    pub bbox: BoxXywh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NegativeEntry {
    /// PNG bytes, base64 (standard alphabet, padded).
    HardAugmented { width: u32, height: u32, ops: Vec<String>, png: String },
    IntraImage(CropRefEntry),
    CrossDocument(CropRefEntry),
}

impl NegativeEntry {
    pub fn kind(&self) -> &'static str {
        match self {
            NegativeEntry::HardAugmented { .. } => "hard_augmented",
            NegativeEntry::IntraImage(_) => "intra_image",
            NegativeEntry::CrossDocument(_) => "cross_document",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleEntry {
    pub anchor: CropRefEntry,
    pub anchor_text: String,
    pub anchor_kind: String,
    pub positive: CropRefEntry,
    /// Reference negatives keep their source size; resize them bilinearly to
    /// the anchor size before use.
    pub negatives: Vec<NegativeEntry>,
    pub short: bool,
}

impl TupleEntry {
    pub fn new(docs: &[LoadedDoc], segments: &[Vec<LineSegment>], t: &ContrastiveTuple) -> Self {
        let r = |c: &CropRef| CropRefEntry {
            doc_id: docs[c.doc].record.doc_id.clone(),
            segment: c.segment,
            bbox: xywh(c.rect),
        };
        let anchor_seg = &segments[t.anchor.doc][t.anchor.segment];
        Self {
            anchor: r(&t.anchor),
            anchor_text: anchor_seg.text.clone(),
            anchor_kind: kind_str(anchor_seg.kind).into(),
            positive: r(&t.positive),
            negatives: t
                .negatives
                .iter()
                .map(|n| match n {
                    Negative::HardAugmented { pixels, ops } => NegativeEntry::HardAugmented {
                        width: pixels.width(),
                        height: pixels.height(),
                        ops: ops.iter().map(|s| s.to_string()).collect(),
                        png: base64::engine::general_purpose::STANDARD.encode(encode_png_rgb(pixels)),
                    },
                    Negative::IntraImage(c) => NegativeEntry::IntraImage(r(c)),
                    Negative::CrossDocument(c) => NegativeEntry::CrossDocument(r(c)),
                })
                .collect(),
            short: t.short,
        }
    }
}

pub fn decode_payload(png_b64: &str) -> crate::Result<docforge_core::RgbImage> {
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(png_b64)
        .map_err(|e| crate::Error::format("<inline>", e.to_string()))?;
    crate::io::decode_png_rgb(&bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityEntry {
    pub doc_id: String,
    pub image: String,
    #[serde(rename = "box")]
    pub bbox: BoxXywh,
    /// 1 well-defined, 0 ill-defined.
    pub label: u8,
    pub origin: String,
    /// Present for well-defined boxes only.
    pub fg_darker: Option<bool>,
    pub augment: Vec<String>,
}

impl QualityEntry {
    pub fn new(doc: &LoadedDoc, l: &QualityLabel) -> Self {
        Self {
            doc_id: doc.record.doc_id.clone(),
            image: doc.record.image.clone(),
            bbox: xywh(l.rect),
            label: l.label,
            origin: l.origin.as_str().into(),
            fg_darker: l.fg_darker,
            augment: l.augment.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalEntry {
    pub doc_id: String,
    pub eval_doc_id: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_tagging() {
        let n = NegativeEntry::IntraImage(CropRefEntry {
            doc_id: "a".into(),
            segment: 3,
            bbox: [1, 2, 3, 4],
        });
        let s = serde_json::to_string(&n).unwrap();
        assert_eq!(s, r#"{"kind":"intra_image","doc_id":"a","segment":3,"box":[1,2,3,4]}"#);
        assert_eq!(serde_json::from_str::<NegativeEntry>(&s).unwrap(), n);
    }

    #[test]
    fn payload_round_trip() {
        let img = docforge_core::RgbImage::new(3, 2, [9, 8, 7]);
        let b = base64::engine::general_purpose::STANDARD.encode(encode_png_rgb(&img));
        assert_eq!(decode_payload(&b).unwrap(), img);
    }
}
