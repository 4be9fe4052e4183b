//! Contrastive tuple mining: for each anchor crop, one same-line positive and
//! `N` geometry-matched negatives (augmented copies of the anchor first, then
//! far-away crops of the same page, then crops from other pages).

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::augment::{augment_crop, AugmentParams};
use crate::ocr::CharStats;
use crate::raster::RgbImage;
use crate::rng::item_rng;
use crate::segments::{LineSegment, SegmentKind};
use crate::similarity::cosine_similarity;
use crate::{math, Error, Rect, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MiningConfig {
    /// Positive centre distance limit, in mean character widths.
    pub tau0: f64,
    /// Negative vertical distance floor, in mean character heights.
    pub tau1: f64,
    /// Aspect-ratio tolerance for negatives.
    pub epsilon: f64,
    pub negatives: usize,
    pub augmented: usize,
    pub temperature: f64,
    /// Drop tuples with fewer than `negatives` negatives instead of flagging.
    pub strict: bool,
    pub augment: AugmentParams,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self {
            tau0: 10.0,
            tau1: 10.0,
            epsilon: 0.1,
            negatives: 256,
            augmented: 10,
            temperature: 0.1,
            strict: false,
            augment: AugmentParams::default(),
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau0 > 0.0 && self.tau1 > 0.0) {
            return Err(Error::InvalidParameter("tau0 and tau1 must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter("epsilon must be in (0, 1)"));
        }
        if self.negatives < self.augmented {
            return Err(Error::InvalidParameter("negatives must be >= augmented"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::InvalidParameter("temperature must be positive"));
        }
        Ok(())
    }
}

/// One page as seen by the miner.
#[derive(Debug, Clone, Copy)]
pub struct MiningDoc<'a> {
    pub doc_id: &'a str,
    pub image: &'a RgbImage,
    pub segments: &'a [LineSegment],
    pub stats: CharStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CropRef {
    pub doc: usize,
    pub segment: usize,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Negative {
    HardAugmented { pixels: RgbImage, ops: Vec<&'static str> },
    IntraImage(CropRef),
    CrossDocument(CropRef),
}

impl Negative {
    pub fn kind(&self) -> &'static str {
        match self {
            Negative::HardAugmented { .. } => "hard_augmented",
            Negative::IntraImage(_) => "intra_image",
            Negative::CrossDocument(_) => "cross_document",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContrastiveTuple {
    pub anchor: CropRef,
    pub positive: CropRef,
    /// Reference negatives are stored at source geometry; consumers resize
    /// them to the anchor size with [`RgbImage::resize_bilinear`].
    pub negatives: Vec<Negative>,
    /// Fewer than the configured number of negatives were found.
    pub short: bool,
}

fn anchor_kind(s: &LineSegment) -> bool {
    s.kind != SegmentKind::HardBlank
}

/// Same line, same size, same character count, same kind, centres closer than
/// `tau0` mean character widths.
pub fn is_positive(anchor: &LineSegment, cand: &LineSegment, stats: &CharStats, tau0: f64) -> bool {
    anchor_kind(cand)
        && cand.kind == anchor.kind
        && cand.line == anchor.line
        && cand.rect.w == anchor.rect.w
        && cand.rect.h == anchor.rect.h
        && cand.char_count == anchor.char_count
        && anchor.rect.center_distance(&cand.rect) < tau0 * stats.mean_width
}

pub fn mine_positives(anchor: usize, segments: &[LineSegment], stats: &CharStats, tau0: f64) -> Vec<usize> {
    let a = &segments[anchor];
    (0..segments.len())
        .filter(|&j| j != anchor && is_positive(a, &segments[j], stats, tau0))
        .collect()
}

/// Equal character count and aspect ratio within `epsilon`.
pub fn geometry_matches(anchor: &LineSegment, cand: &LineSegment, epsilon: f64) -> bool {
    cand.char_count == anchor.char_count && anchor.rect.aspect_ratio_within(&cand.rect, epsilon)
}

/// Geometry match plus a vertical distance above `tau1` mean character heights.
pub fn is_intra_negative(anchor: &LineSegment, cand: &LineSegment, stats: &CharStats, tau1: f64, epsilon: f64) -> bool {
    let dy = (anchor.rect.y as f64 - cand.rect.y as f64).abs();
    dy > tau1 * stats.mean_height && geometry_matches(anchor, cand, epsilon)
}

pub fn mine_intra_negatives(
    anchor: usize,
    segments: &[LineSegment],
    stats: &CharStats,
    tau1: f64,
    epsilon: f64,
) -> Vec<usize> {
    let a = &segments[anchor];
    (0..segments.len())
        .filter(|&j| j != anchor && is_intra_negative(a, &segments[j], stats, tau1, epsilon))
        .collect()
}

/// Scan the other documents, in order starting after `anchor_doc` and
/// wrapping, for up to `needed` geometry-matched segments.
pub fn mine_cross_negatives(
    anchor: &LineSegment,
    anchor_doc: usize,
    docs: &[MiningDoc<'_>],
    needed: usize,
    epsilon: f64,
) -> Vec<CropRef> {
    let mut out = Vec::new();
    if needed == 0 {
        return out;
    }
    let n = docs.len();
    for step in 1..n {
        let d = (anchor_doc + step) % n;
        for (j, s) in docs[d].segments.iter().enumerate() {
            if geometry_matches(anchor, s, epsilon) {
                out.push(CropRef {
                    doc: d,
                    segment: j,
                    rect: s.rect,
                });
                if out.len() == needed {
                    return out;
                }
            }
        }
    }
    out
}

/// Mine all anchors of `docs[doc]`. `docs` must be sorted by `doc_id`.
pub fn mine_document(docs: &[MiningDoc<'_>], doc: usize, config: &MiningConfig, seed: u64) -> Result<Vec<ContrastiveTuple>> {
    let d = &docs[doc];
    let mut out = Vec::new();
    for i in 0..d.segments.len() {
        let anchor = &d.segments[i];
        if !anchor_kind(anchor) {
            continue;
        }
        let positives = mine_positives(i, d.segments, &d.stats, config.tau0);
        if positives.is_empty() {
            continue;
        }
        let mut rng = item_rng(seed, d.doc_id, i as u64);
        let p = *positives.choose(&mut rng).expect("nonempty");
        let mut negatives = Vec::with_capacity(config.negatives);

        for _ in 0..config.augmented.min(config.negatives) {
            if let Some(a) = augment_crop(d.image, anchor.rect, anchor.is_blank(), &config.augment, &mut rng)? {
                negatives.push(Negative::HardAugmented {
                    pixels: a.pixels,
                    ops: a.ops,
                });
            }
        }

        let mut intra = mine_intra_negatives(i, d.segments, &d.stats, config.tau1, config.epsilon);
        intra.shuffle(&mut rng);
        intra.truncate(config.negatives - negatives.len());
        negatives.extend(intra.into_iter().map(|j| {
            Negative::IntraImage(CropRef {
                doc,
                segment: j,
                rect: d.segments[j].rect,
            })
        }));

        let needed = config.negatives - negatives.len();
        let cross = mine_cross_negatives(anchor, doc, docs, needed, config.epsilon);
        negatives.extend(cross.into_iter().map(Negative::CrossDocument));

        let short = negatives.len() < config.negatives;
        if short && config.strict {
            continue;
        }
        out.push(ContrastiveTuple {
            anchor: CropRef {
                doc,
                segment: i,
                rect: anchor.rect,
            },
            positive: CropRef {
                doc,
                segment: p,
                rect: d.segments[p].rect,
            },
            negatives,
            short,
        });
    }
    Ok(out)
}

/// `-log(exp(s_pos/τ) / (exp(s_pos/τ) + Σ exp(s_neg/τ)))`, max-shifted.
pub fn contrastive_loss_from_similarities(s_pos: f64, s_neg: &[f64], tau: f64) -> f64 {
    let scaled_pos = s_pos / tau;
    let m = s_neg
        .iter()
        .map(|s| s / tau)
        .fold(scaled_pos, f64::max);
    let num = math::exp(scaled_pos - m);
    let den = num + s_neg.iter().map(|s| math::exp(s / tau - m)).sum::<f64>();
    -(math::ln(num) - math::ln(den))
}

/// Loss over raw embeddings, with cosine similarity.
pub fn contrastive_loss(anchor: &[f32], positive: &[f32], negatives: &[&[f32]], tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter("temperature must be positive"));
    }
    let sp = cosine_similarity(anchor, positive)?;
    let sn = negatives
        .iter()
        .map(|n| cosine_similarity(anchor, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(contrastive_loss_from_similarities(sp, &sn, tau))
}
