//! Box-quality assessment: does a bounding box enclose its characters without
//! cutting glyphs or clipping neighbours?
//!
//! The core primitive is the border-integrity test, a connected-component check
//! on an Otsu-binarized region. On top of it sit the two-polarity labelling rule,
//! box perturbation for synthetic ill-defined examples, balanced dataset
//! preparation, edge-stripe extraction and the pluggable [`QualityScorer`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::binarize::{connected_components, otsu_threshold, threshold, Polarity};
use crate::raster::{GrayImage, RgbImage};
use crate::segments::LineSegment;
use crate::{math, Error, Rect, Result};

/// Edge strips around a crop. Every strip is oriented so that index 0 along
/// its thickness axis touches the crop border.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripeInputs {
    pub thickness: u32,
    /// `t' x w`, rows reversed.
    pub top: RgbImage,
    /// `t' x w`.
    pub bottom: RgbImage,
    /// `h x t'`, columns reversed.
    pub left: RgbImage,
    /// `h x t'`.
    pub right: RgbImage,
}

fn region(image: &RgbImage, x0: u32, y0: u32, x1: u32, y1: u32) -> RgbImage {
    if x1 <= x0 || y1 <= y0 {
        return RgbImage::new(x1.saturating_sub(x0), y1.saturating_sub(y0), [0, 0, 0]);
    }
    image
        .crop(Rect::from_corners(x0, y0, x1, y1))
        .expect("clipped to bounds")
}

pub fn flip_rows(img: &RgbImage) -> RgbImage {
    let mut out = img.clone();
    let h = img.height();
    for y in 0..h {
        for x in 0..img.width() {
            out.set(x, h - 1 - y, img.get(x, y));
        }
    }
    out
}

pub fn flip_cols(img: &RgbImage) -> RgbImage {
    let mut out = img.clone();
    let w = img.width();
    for y in 0..img.height() {
        for x in 0..w {
            out.set(w - 1 - x, y, img.get(x, y));
        }
    }
    out
}

fn concat_h(a: &RgbImage, b: &RgbImage) -> Option<RgbImage> {
    if a.height() == 0 || a.width() == 0 {
        return Some(b.clone());
    }
    if b.height() == 0 || b.width() == 0 {
        return Some(a.clone());
    }
    if a.height() != b.height() {
        return None;
    }
    let mut out = RgbImage::new(a.width() + b.width(), a.height(), [0, 0, 0]);
    out.paste(a, 0, 0).ok()?;
    out.paste(b, a.width(), 0).ok()?;
    Some(out)
}

fn concat_v(a: &RgbImage, b: &RgbImage) -> Option<RgbImage> {
    if a.height() == 0 || a.width() == 0 {
        return Some(b.clone());
    }
    if b.height() == 0 || b.width() == 0 {
        return Some(a.clone());
    }
    if a.width() != b.width() {
        return None;
    }
    let mut out = RgbImage::new(a.width(), a.height() + b.height(), [0, 0, 0]);
    out.paste(a, 0, 0).ok()?;
    out.paste(b, 0, a.height()).ok()?;
    Some(out)
}

impl StripeInputs {
    /// Flipped top beside bottom. `None` when image borders truncated the two
    /// strips to different nonzero thicknesses.
    pub fn tb(&self) -> Option<RgbImage> {
        concat_h(&self.top, &self.bottom)
    }

    /// Flipped left above right, under the same truncation rule as [`Self::tb`].
    pub fn lr(&self) -> Option<RgbImage> {
        concat_v(&self.left, &self.right)
    }
}

/// Cut the four `t`-thick strips around `rect`, truncated at image borders.
pub fn extract_stripes(image: &RgbImage, rect: Rect, t: u32) -> Result<StripeInputs> {
    if t == 0 {
        return Err(Error::InvalidParameter("stripe thickness must be >= 1"));
    }
    if rect.is_empty() {
        return Err(Error::DegenerateBox { w: rect.w, h: rect.h });
    }
    if !rect.fits_in(image.width(), image.height()) {
        return Err(Error::OutOfBounds(rect));
    }
    let (x0, y0, x1, y1) = (rect.x, rect.y, rect.x1(), rect.y1());
    let top = region(image, x0, y0.saturating_sub(t), x1, y0);
    let bottom = region(image, x0, y1, x1, (y1 + t).min(image.height()));
    let left = region(image, x0.saturating_sub(t), y0, x0, y1);
    let right = region(image, x1, y0, (x1 + t).min(image.width()), y1);
    Ok(StripeInputs {
        thickness: t,
        top: flip_rows(&top),
        bottom,
        left: flip_cols(&left),
        right,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrityParams {
    pub min_component_area: u64,
}

impl Default for IntegrityParams {
    fn default() -> Self {
        Self {
            min_component_area: 4,
        }
    }
}

/// What the border-integrity test looks at.
#[derive(Debug, Clone, Copy)]
pub enum IntegritySubject<'a> {
    /// A box inside a full page; the test runs on the box padded by
    /// `max(h/2, 8)` pixels so neighbouring components are visible.
    Global { image: &'a RgbImage, rect: Rect },
    /// A grayscale crop on its own.
    Local { crop: &'a GrayImage },
}

/// Padded grayscale view plus its Otsu threshold, shared by both polarities.
struct Probe {
    gray: GrayImage,
    otsu: u8,
    offset: (u32, u32),
    target: Option<Rect>,
}

impl Probe {
    fn new(subject: IntegritySubject<'_>) -> Result<Self> {
        match subject {
            IntegritySubject::Global { image, rect } => {
                if rect.is_empty() {
                    return Err(Error::DegenerateBox { w: rect.w, h: rect.h });
                }
                if !rect.fits_in(image.width(), image.height()) {
                    return Err(Error::OutOfBounds(rect));
                }
                let m = (rect.h / 2).max(8);
                let px0 = rect.x.saturating_sub(m);
                let py0 = rect.y.saturating_sub(m);
                let px1 = (rect.x1() + m).min(image.width());
                let py1 = (rect.y1() + m).min(image.height());
                let gray = image.crop(Rect::from_corners(px0, py0, px1, py1))?.to_gray();
                let otsu = otsu_threshold(&gray);
                Ok(Self {
                    gray,
                    otsu,
                    offset: (px0, py0),
                    target: Some(rect),
                })
            }
            IntegritySubject::Local { crop } => {
                if crop.width() == 0 || crop.height() == 0 {
                    return Err(Error::DegenerateBox {
                        w: crop.width(),
                        h: crop.height(),
                    });
                }
                Ok(Self {
                    gray: crop.clone(),
                    otsu: otsu_threshold(crop),
                    offset: (0, 0),
                    target: None,
                })
            }
        }
    }

    fn contact(&self, invert_mask: bool, params: &IntegrityParams) -> bool {
        let polarity = if invert_mask {
            Polarity::BinaryInv
        } else {
            Polarity::Binary
        };
        let mask = threshold(&self.gray, self.otsu, polarity);
        let (w, h) = (self.gray.width() as i64, self.gray.height() as i64);
        for c in connected_components(&mask) {
            if c.area < params.min_component_area {
                continue;
            }
            match self.target {
                Some(r) => {
                    let x1c = (c.x + self.offset.0) as i64;
                    let y1c = (c.y + self.offset.1) as i64;
                    let x2c = x1c + c.w as i64;
                    let y2c = y1c + c.h as i64;
                    let (bx0, by0, bx1, by1) = (r.x as i64, r.y as i64, r.x1() as i64, r.y1() as i64);
                    let intersects_x = x1c <= bx1 && x2c >= bx0;
                    let intersects_y = y1c <= by1 && y2c >= by0;
                    let fully_inside =
                        x1c >= bx0 + 1 && x2c <= bx1 - 1 && y1c >= by0 + 1 && y2c <= by1 - 1;
                    if intersects_x && intersects_y && !fully_inside {
                        return true;
                    }
                }
                None => {
                    let (x1c, y1c) = (c.x as i64, c.y as i64);
                    let (x2c, y2c) = (x1c + c.w as i64, y1c + c.h as i64);
                    let touches = x1c <= 1 || y1c <= 1 || x2c >= w - 1 || y2c >= h - 1;
                    let inside = x1c >= 1 && y1c >= 1 && x2c <= w - 1 && y2c <= h - 1;
                    if touches && !inside {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// `true` when some foreground component (area >= `min_component_area`)
/// reaches the box border without lying fully inside it.
///
/// `invert_mask` selects dark foreground (`pixel <= T`).
pub fn border_integrity_test(
    subject: IntegritySubject<'_>,
    invert_mask: bool,
    params: &IntegrityParams,
) -> Result<bool> {
    Ok(Probe::new(subject)?.contact(invert_mask, params))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QualityOutcome {
    Well { fg_darker: bool },
    Ill,
    Discard,
}

/// All four border tests behind a labelling decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QualityAssessment {
    pub global_dark: bool,
    pub global_light: bool,
    pub local_dark: bool,
    pub local_light: bool,
    pub outcome: QualityOutcome,
}

impl QualityAssessment {
    /// Label from the global tests alone: well-defined when either polarity
    /// shows no border contact.
    pub fn global_well(&self) -> bool {
        !self.global_dark || !self.global_light
    }
}

/// Label a box: global tests in both polarities decide well/ill; local tests on
/// the bare crop must agree, otherwise the box is discarded.
///
/// Ill needs contact in all four runs. Well needs each local run to match the
/// global run of the same polarity.
pub fn assess_crop_quality(image: &RgbImage, rect: Rect, params: &IntegrityParams) -> Result<QualityAssessment> {
    let global = Probe::new(IntegritySubject::Global { image, rect })?;
    let global_dark = global.contact(true, params);
    let global_light = global.contact(false, params);
    let crop = image.crop(rect)?.to_gray();
    let local = Probe::new(IntegritySubject::Local { crop: &crop })?;
    let local_dark = local.contact(true, params);
    let local_light = local.contact(false, params);
    let outcome = if !global_dark || !global_light {
        if local_dark == global_dark && local_light == global_light {
            QualityOutcome::Well {
                fg_darker: !global_dark,
            }
        } else {
            QualityOutcome::Discard
        }
    } else if local_dark && local_light {
        QualityOutcome::Ill
    } else {
        QualityOutcome::Discard
    };
    Ok(QualityAssessment {
        global_dark,
        global_light,
        local_dark,
        local_light,
        outcome,
    })
}

pub fn label_crop_quality(image: &RgbImage, rect: Rect, params: &IntegrityParams) -> Result<QualityOutcome> {
    Ok(assess_crop_quality(image, rect, params)?.outcome)
}

/// `min(20, floor(0.3 * max(h, w)))`.
pub fn delta_max(w: u32, h: u32) -> u32 {
    (3 * w.max(h) / 10).min(20)
}

/// Draw `k` in `1..=dmax` with `Pr(k) ∝ rho^(k-1)`.
pub fn sample_offset<R: Rng + ?Sized>(rng: &mut R, dmax: u32, rho: f64) -> u32 {
    debug_assert!(dmax >= 1);
    let total: f64 = (0..dmax).map(|i| math::powi(rho, i)).sum();
    let mut u = rng.gen::<f64>() * total;
    for k in 1..=dmax {
        let w = math::powi(rho, k - 1);
        if u < w {
            return k;
        }
        u -= w;
    }
    dmax
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideOp {
    Pad,
    Crop,
}

/// Result of [`perturb_box`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Perturbation {
    pub rect: Rect,
    pub changed: bool,
    /// `delta_max` was zero; the box is returned untouched.
    pub too_small: bool,
}

/// Pad or crop a random nonempty subset of sides by small offsets.
///
/// Sides are visited left, right, top, bottom. Half the time every active side
/// shares one offset and one operation. Crops shrink so the box keeps at least
/// 2x2 pixels (or skip the side), and the result is clipped to the image.
pub fn perturb_box<R: Rng + ?Sized>(
    rect: Rect,
    image_width: u32,
    image_height: u32,
    rng: &mut R,
    rho: f64,
) -> Perturbation {
    let dmax = delta_max(rect.w, rect.h);
    if dmax == 0 {
        return Perturbation {
            rect,
            changed: false,
            too_small: true,
        };
    }
    let sides: u8 = rng.gen_range(1..16);
    let coherent = rng.gen_bool(0.5);
    let shared_delta = sample_offset(rng, dmax, rho);
    let shared_op = if rng.gen_bool(0.5) { SideOp::Pad } else { SideOp::Crop };

    let (mut x0, mut y0, mut x1, mut y1) = (rect.x as i64, rect.y as i64, rect.x1() as i64, rect.y1() as i64);
    for side in 0..4u8 {
        if sides & (1 << side) == 0 {
            continue;
        }
        let (delta, op) = if coherent {
            (shared_delta, shared_op)
        } else {
            let d = sample_offset(rng, dmax, rho);
            let op = if rng.gen_bool(0.5) { SideOp::Pad } else { SideOp::Crop };
            (d, op)
        };
        let delta = delta as i64;
        match op {
            SideOp::Pad => match side {
                0 => x0 -= delta,
                1 => x1 += delta,
                2 => y0 -= delta,
                _ => y1 += delta,
            },
            SideOp::Crop => {
                let room = if side < 2 { x1 - x0 - 2 } else { y1 - y0 - 2 };
                let d = delta.min(room);
                if d < 1 {
                    continue;
                }
                match side {
                    0 => x0 += d,
                    1 => x1 -= d,
                    2 => y0 += d,
                    _ => y1 -= d,
                }
            }
        }
    }
    let x0 = x0.max(0) as u32;
    let y0 = y0.max(0) as u32;
    let x1 = (x1.min(image_width as i64)) as u32;
    let y1 = (y1.min(image_height as i64)) as u32;
    let out = Rect::from_corners(x0, y0, x1, y1);
    Perturbation {
        rect: out,
        changed: out != rect,
        too_small: false,
    }
}

/// Where a stored quality example came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    NaturalIll,
    PerturbedIll,
    Well,
}

impl Origin {
    pub fn as_str(&self) -> &'static str {
        match self {
            Origin::NaturalIll => "natural_ill",
            Origin::PerturbedIll => "perturbed_ill",
            Origin::Well => "well",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualityLabel {
    pub rect: Rect,
    /// 1 = well-defined, 0 = ill-defined.
    pub label: u8,
    pub origin: Origin,
    pub fg_darker: Option<bool>,
    /// Photometric augmentations the trainer should apply to this example.
    pub augment: Vec<&'static str>,
}

/// Photometric operations for quality-model training, with their sampling
/// probabilities. Stored as flags; pixels are never altered here.
pub const QUALITY_AUGMENTATIONS: &[(&str, f64)] = &[
    ("brightness_contrast", 0.25),
    ("hue_saturation_value", 0.25),
    ("rgb_shift", 0.25),
    ("color_jitter", 0.25),
    ("channel_shuffle", 0.2),
    ("text_color", 0.2),
    ("invert", 0.2),
    ("gaussian_blur", 0.15),
    ("median_blur", 0.15),
    ("box_blur", 0.15),
    ("motion_blur", 0.15),
    ("defocus", 0.15),
    ("jpeg", 0.2),
    ("sharpen", 0.1),
    ("gauss_noise", 0.1),
    ("iso_noise", 0.1),
    ("multiplicative_noise", 0.1),
    ("to_gray", 0.01),
];

#[derive(Debug, Clone, PartialEq)]
pub struct QualityDatasetConfig {
    /// Stop after this many stored examples.
    pub target: usize,
    /// Upper edges of the width bins (the last bin is open-ended).
    pub width_bin_edges: Vec<u32>,
    /// Maximum examples per (width bin, label); `None` splits `target` evenly.
    pub cap_per_bucket: Option<usize>,
    /// Share of each ill bucket that naturally ill-defined boxes may fill.
    pub natural_ill_share: f64,
    pub rho: f64,
    pub integrity: IntegrityParams,
}

impl Default for QualityDatasetConfig {
    fn default() -> Self {
        Self {
            target: 10_000,
            width_bin_edges: alloc::vec![32, 64, 128],
            cap_per_bucket: None,
            natural_ill_share: 0.5,
            rho: 0.5,
            integrity: IntegrityParams::default(),
        }
    }
}

impl QualityDatasetConfig {
    pub fn bins(&self) -> usize {
        self.width_bin_edges.len() + 1
    }

    pub fn width_bin(&self, w: u32) -> usize {
        self.width_bin_edges
            .iter()
            .position(|&edge| w < edge)
            .unwrap_or(self.width_bin_edges.len())
    }

    pub fn cap(&self) -> usize {
        self.cap_per_bucket
            .unwrap_or_else(|| self.target.div_ceil(2 * self.bins()).max(1))
    }
}

/// Per-box work that does not depend on corpus-wide counters, so it can run
/// for many documents in parallel.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityCandidate {
    pub segment: usize,
    pub rect: Rect,
    pub assessment: QualityAssessment,
    /// Perturbed box, present for globally well-defined boxes whose perturbation
    /// registered border contact in the opposite polarity and relabels as ill.
    pub perturbed: Option<Rect>,
    pub augment: Vec<&'static str>,
}

fn sample_augment<R: Rng + ?Sized>(rng: &mut R) -> Vec<&'static str> {
    QUALITY_AUGMENTATIONS
        .iter()
        .filter_map(|&(name, p)| rng.gen_bool(p).then_some(name))
        .collect()
}

/// Shuffle a document's text segments and assess each one.
pub fn assess_document<R: Rng + ?Sized>(
    image: &RgbImage,
    segments: &[LineSegment],
    config: &QualityDatasetConfig,
    rng: &mut R,
) -> Vec<QualityCandidate> {
    let mut order: Vec<usize> = (0..segments.len())
        .filter(|&i| !segments[i].is_blank())
        .collect();
    order.shuffle(rng);
    let mut out = Vec::with_capacity(order.len());
    for i in order {
        let rect = segments[i].rect;
        let Ok(assessment) = assess_crop_quality(image, rect, &config.integrity) else {
            continue;
        };
        let mut perturbed = None;
        if assessment.global_well() {
            let fg_darker = !assessment.global_dark;
            let p = perturb_box(rect, image.width(), image.height(), rng, config.rho);
            if p.changed && !p.rect.is_empty() {
                let contact = border_integrity_test(
                    IntegritySubject::Global { image, rect: p.rect },
                    !fg_darker,
                    &config.integrity,
                )
                .unwrap_or(false);
                if contact
                    && label_crop_quality(image, p.rect, &config.integrity).ok() == Some(QualityOutcome::Ill)
                {
                    perturbed = Some(p.rect);
                }
            }
        }
        let augment = sample_augment(rng);
        out.push(QualityCandidate {
            segment: i,
            rect,
            assessment,
            perturbed,
            augment,
        });
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct BucketCounts {
    well: usize,
    ill: usize,
    natural_ill: usize,
}

/// Corpus-wide bucket bookkeeping for dataset preparation.
#[derive(Debug, Clone)]
pub struct QualitySelector {
    config: QualityDatasetConfig,
    buckets: BTreeMap<usize, BucketCounts>,
    stored: usize,
}

impl QualitySelector {
    pub fn new(config: QualityDatasetConfig) -> Self {
        Self {
            config,
            buckets: BTreeMap::new(),
            stored: 0,
        }
    }

    pub fn is_full(&self) -> bool {
        self.stored >= self.config.target
    }

    pub fn stored(&self) -> usize {
        self.stored
    }

    /// Feed one document's candidates in order; returns the stored labels.
    pub fn take_document(&mut self, candidates: &[QualityCandidate]) -> Vec<QualityLabel> {
        let cap = self.config.cap();
        let natural_cap = (math::ceil(cap as f64 * self.config.natural_ill_share) as usize).max(1);
        let mut out = Vec::new();
        for c in candidates {
            if self.is_full() {
                break;
            }
            let bin = self.config.width_bin(c.rect.w);
            let counts = self.buckets.entry(bin).or_default();
            let ill_open = counts.ill < cap;
            let stored = if c.assessment.global_well() {
                match (ill_open, c.perturbed) {
                    (true, Some(p)) => {
                        let pbin = self.config.width_bin(p.w);
                        let pc = self.buckets.entry(pbin).or_default();
                        if pc.ill < cap {
                            pc.ill += 1;
                            Some(QualityLabel {
                                rect: p,
                                label: 0,
                                origin: Origin::PerturbedIll,
                                fg_darker: None,
                                augment: c.augment.clone(),
                            })
                        } else {
                            None
                        }
                    }
                    _ => match c.assessment.outcome {
                        QualityOutcome::Well { fg_darker } if counts.well < cap => {
                            counts.well += 1;
                            Some(QualityLabel {
                                rect: c.rect,
                                label: 1,
                                origin: Origin::Well,
                                fg_darker: Some(fg_darker),
                                augment: c.augment.clone(),
                            })
                        }
                        _ => None,
                    },
                }
            } else if ill_open && counts.natural_ill < natural_cap && c.assessment.outcome == QualityOutcome::Ill {
                counts.ill += 1;
                counts.natural_ill += 1;
                Some(QualityLabel {
                    rect: c.rect,
                    label: 0,
                    origin: Origin::NaturalIll,
                    fg_darker: None,
                    augment: c.augment.clone(),
                })
            } else {
                None
            };
            if let Some(label) = stored {
                self.stored += 1;
                out.push(label);
            }
        }
        out
    }
}

/// Sequential dataset preparation over `(image, segments)` documents, each with
/// its own RNG. Returns per-document labels and whether the target was reached.
pub fn prepare_quality_dataset<'a, R, I>(docs: I, config: &QualityDatasetConfig) -> (Vec<Vec<QualityLabel>>, bool)
where
    R: Rng + 'a,
    I: IntoIterator<Item = (&'a RgbImage, &'a [LineSegment], R)>,
{
    let mut selector = QualitySelector::new(config.clone());
    let mut out = Vec::new();
    for (image, segments, mut rng) in docs {
        if selector.is_full() {
            break;
        }
        let candidates = assess_document(image, segments, config, &mut rng);
        out.push(selector.take_document(&candidates));
    }
    let complete = selector.is_full();
    (out, complete)
}

/// Box-quality score in `[0, 1]`.
pub trait QualityScorer: Sync {
    fn score(&self, image: &RgbImage, rect: Rect, crop_id: u64) -> Result<f64>;
}

/// Scores from the labelling rule: well 1.0, ill 0.0, discard 0.5.
#[derive(Debug, Clone, Default)]
pub struct AlgorithmicScorer {
    pub params: IntegrityParams,
}

impl QualityScorer for AlgorithmicScorer {
    fn score(&self, image: &RgbImage, rect: Rect, _crop_id: u64) -> Result<f64> {
        Ok(match label_crop_quality(image, rect, &self.params)? {
            QualityOutcome::Well { .. } => 1.0,
            QualityOutcome::Ill => 0.0,
            QualityOutcome::Discard => 0.5,
        })
    }
}

/// Precomputed scores keyed by crop id.
#[derive(Debug, Clone, Default)]
pub struct ExternalScorer {
    pub scores: BTreeMap<u64, f32>,
}

impl QualityScorer for ExternalScorer {
    fn score(&self, _image: &RgbImage, _rect: Rect, crop_id: u64) -> Result<f64> {
        self.scores
            .get(&crop_id)
            .map(|&s| (s as f64).clamp(0.0, 1.0))
            .ok_or(Error::MissingScore(crop_id))
    }
}
