//! Tampered-image generation.
//!
//! A [`CropDatabase`] holds every crop the quality scorer accepted (plus the
//! injected blanks), indexed by `(w, h, char_count)`. For each page,
//! [`generate_tampered`] picks up to `n_max` non-overlapping regions and runs
//! one of four edits on each: text insertion into a blank, inpainting,
//! copy-move from the same page, or splicing from another page. Pasting a
//! blank crop over text realizes coverage.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::binarize::{estimate_foreground_color, SauvolaParams};
use crate::font::FontSet;
use crate::inpaint::{inpaint_region, InpaintMode};
use crate::quality::QualityScorer;
use crate::raster::{GrayImage, RgbImage};
use crate::render::{render_text, RenderedPatch};
use crate::rng::doc_rng;
use crate::segments::LineSegment;
use crate::similarity::{classical_features, crop_similarity, CropEmbedder, CropEmbedding};
use crate::{Error, Rect, Result};

/// Bits reserved for the segment index inside a crop id.
pub const SEGMENT_BITS: u32 = 24;

/// `doc_ordinal << 24 | segment_index`.
pub fn crop_id(doc_ordinal: u32, segment: usize) -> u64 {
    debug_assert!(segment < 1 << SEGMENT_BITS);
    ((doc_ordinal as u64) << SEGMENT_BITS) | segment as u64
}

pub fn split_crop_id(id: u64) -> (u32, usize) {
    ((id >> SEGMENT_BITS) as u32, (id & ((1 << SEGMENT_BITS) - 1)) as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub tau2: f64,
    pub p_ins: f64,
    pub p_inp: f64,
    pub p_spl: f64,
    pub n_max: usize,
    /// Aspect tolerance for copy-move sources; 0 means exact size only.
    pub epsilon_prime: f64,
    /// Insertion colours span `col_0 + [-d, d]^3`.
    pub color_delta: u8,
    pub sauvola: SauvolaParams,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            tau2: 0.5,
            p_ins: 0.05,
            p_inp: 0.05,
            p_spl: 0.5,
            n_max: 5,
            epsilon_prime: 0.05,
            color_delta: 2,
            sauvola: SauvolaParams::default(),
        }
    }
}

impl GenerationConfig {
    /// Precomputed embeddings with exact-size matching only.
    pub fn on_the_fly() -> Self {
        Self {
            epsilon_prime: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.tau2, self.p_ins, self.p_inp, self.p_spl] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter("probabilities and tau2 must lie in [0, 1]"));
            }
        }
        if !(0.0..1.0).contains(&self.epsilon_prime) {
            return Err(Error::InvalidParameter("epsilon_prime must lie in [0, 1)"));
        }
        self.sauvola.validate()
    }
}

/// One page as seen by the generator.
#[derive(Debug, Clone, Copy)]
pub struct Page<'a> {
    /// Position of the document in the doc_id-sorted corpus.
    pub ordinal: u32,
    pub doc_id: &'a str,
    pub image: &'a RgbImage,
    pub segments: &'a [LineSegment],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CropRecord {
    pub crop_id: u64,
    pub doc: u32,
    pub rect: Rect,
    pub text: String,
    pub is_blank: bool,
    pub char_count: usize,
    /// `None` for blanks, which are never scored.
    pub quality: Option<f64>,
    pub embedding: CropEmbedding,
    pub pixels: RgbImage,
}

pub type BucketKey = (u32, u32, usize);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CropDatabase {
    records: Vec<CropRecord>,
    by_id: BTreeMap<u64, usize>,
    index: BTreeMap<BucketKey, Vec<usize>>,
    by_doc: BTreeMap<u32, Vec<usize>>,
}

impl CropDatabase {
    /// Build from records in any order; they are stored sorted by crop id.
    pub fn from_records(mut records: Vec<CropRecord>) -> Result<Self> {
        records.sort_by_key(|r| r.crop_id);
        if let Some(w) = records.windows(2).find(|w| w[0].crop_id == w[1].crop_id) {
            return Err(Error::DuplicateCrop(w[0].crop_id));
        }
        let mut db = Self {
            records,
            ..Self::default()
        };
        for (i, r) in db.records.iter().enumerate() {
            db.by_id.insert(r.crop_id, i);
            db.index.entry((r.rect.w, r.rect.h, r.char_count)).or_default().push(i);
            db.by_doc.entry(r.doc).or_default().push(i);
        }
        Ok(db)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[CropRecord] {
        &self.records
    }

    pub fn get(&self, id: u64) -> Option<&CropRecord> {
        self.by_id.get(&id).map(|&i| &self.records[i])
    }

    /// Records with exactly this geometry and character count, by crop id.
    pub fn bucket(&self, w: u32, h: u32, chars: usize) -> impl Iterator<Item = &CropRecord> {
        self.index
            .get(&(w, h, chars))
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    pub fn doc_records(&self, doc: u32) -> impl Iterator<Item = &CropRecord> {
        self.by_doc
            .get(&doc)
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&BucketKey, usize)> {
        self.index.iter().map(|(k, v)| (k, v.len()))
    }
}

/// Score and embed one page's segments. Text crops must score above `tau2`;
/// blanks are kept without scoring.
pub fn page_records(
    page: &Page<'_>,
    scorer: &dyn QualityScorer,
    embedder: &dyn CropEmbedder,
    tau2: f64,
) -> Result<Vec<CropRecord>> {
    let mut out = Vec::new();
    for (j, s) in page.segments.iter().enumerate() {
        let id = crop_id(page.ordinal, j);
        let quality = if s.is_blank() {
            None
        } else {
            let q = scorer.score(page.image, s.rect, id)?;
            if q <= tau2 {
                continue;
            }
            Some(q)
        };
        let pixels = page.image.crop(s.rect)?;
        let embedding = embedder.embed(&pixels, s.is_blank(), Some(id))?;
        out.push(CropRecord {
            crop_id: id,
            doc: page.ordinal,
            rect: s.rect,
            text: s.text.clone(),
            is_blank: s.is_blank(),
            char_count: s.char_count,
            quality,
            embedding,
            pixels,
        });
    }
    Ok(out)
}

pub fn build_crop_database<'a, I>(
    pages: I,
    scorer: &dyn QualityScorer,
    embedder: &dyn CropEmbedder,
    tau2: f64,
) -> Result<CropDatabase>
where
    I: IntoIterator<Item = Page<'a>>,
{
    let mut all = Vec::new();
    for p in pages {
        all.extend(page_records(&p, scorer, embedder, tau2)?);
    }
    CropDatabase::from_records(all)
}

/// Draw `n ~ U{0..=n_max}` and greedily accept candidates from a random
/// permutation, rejecting any that overlap an accepted one.
pub fn select_regions<R: Rng + ?Sized>(candidates: &[Rect], n_max: usize, rng: &mut R) -> Vec<usize> {
    let n = rng.gen_range(0..=n_max);
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.shuffle(rng);
    let mut picked: Vec<usize> = Vec::with_capacity(n);
    for i in order {
        if picked.len() == n {
            break;
        }
        if picked.iter().all(|&j| !candidates[j].intersects(&candidates[i])) {
            picked.push(i);
        }
    }
    picked
}

/// Outcome of the random gates for one region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    Insertion,
    Inpaint,
    Splice,
    CopyMove,
}

impl Gate {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gate::Insertion => "insertion",
            Gate::Inpaint => "inpaint",
            Gate::Splice => "splice",
            Gate::CopyMove => "copy_move",
        }
    }
}

/// Tampering category actually realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Insertion,
    Inpainting,
    CopyMove,
    Splicing,
    Coverage,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Insertion => "insertion",
            Branch::Inpainting => "inpainting",
            Branch::CopyMove => "copy_move",
            Branch::Splicing => "splicing",
            Branch::Coverage => "coverage",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionLog {
    pub region: Rect,
    pub crop_id: u64,
    pub region_blank: bool,
    /// First gate drawn; an insertion that falls through records a second gate.
    pub gates: Vec<Gate>,
    pub branch: Option<Branch>,
    pub source_crop: Option<u64>,
    pub font: Option<String>,
    pub color: Option<[u8; 3]>,
    pub similarity: Option<f64>,
    pub inpaint_mode: Option<InpaintMode>,
    pub masked_pixels: u64,
    pub skip_reason: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TamperOutput {
    pub image: RgbImage,
    /// 0 pristine, 255 tampered.
    pub mask: GrayImage,
    pub log: Vec<RegionLog>,
}

impl TamperOutput {
    /// No region was modified.
    pub fn is_pristine(&self) -> bool {
        self.log.iter().all(|r| r.branch.is_none())
    }
}

/// Candidate colours `col_0 + Δ`, Δ ascending over each channel, clamped.
pub fn color_candidates(col0: [u8; 3], delta: u8) -> Vec<[u8; 3]> {
    let d = delta as i16;
    let mut out = Vec::with_capacity(((2 * d + 1) as usize).pow(3));
    for dr in -d..=d {
        for dg in -d..=d {
            for db in -d..=d {
                let c = [(col0[0] as i16 + dr), (col0[1] as i16 + dg), (col0[2] as i16 + db)];
                out.push(c.map(|v| v.clamp(0, 255) as u8));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertionChoice {
    pub font_index: usize,
    pub color_index: usize,
    pub color: [u8; 3],
    pub similarity: f64,
    pub patch: RenderedPatch,
}

/// Render every (font, colour) pair onto `background` and keep the one most
/// similar to `reference`; ties keep the earliest pair (fonts outer, colours
/// inner). Renders are embedded with the classical extractor.
pub fn best_insertion(
    text: &str,
    background: &RgbImage,
    reference: &CropEmbedding,
    fonts: &FontSet,
    colors: &[[u8; 3]],
) -> Result<Option<InsertionChoice>> {
    let mut best: Option<InsertionChoice> = None;
    for (fi, font) in fonts.fonts().iter().enumerate() {
        for (ci, &color) in colors.iter().enumerate() {
            let patch = match render_text(text, font, color, background) {
                Ok(p) => p,
                Err(Error::NoFeasibleScale { .. }) => break,
                Err(e) => return Err(e),
            };
            let emb = classical_features(&patch.pixels, false)?;
            let s = crop_similarity(reference, &emb, false)?;
            if best.as_ref().is_none_or(|b| s > b.similarity) {
                best = Some(InsertionChoice {
                    font_index: fi,
                    color_index: ci,
                    color,
                    similarity: s,
                    patch,
                });
            }
        }
    }
    Ok(best)
}

/// Index of the best candidate under `crop_similarity`, first-wins on ties.
/// Callers pass candidates in ascending crop-id order.
pub fn best_candidate(
    target: &CropEmbedding,
    target_blank: bool,
    candidates: &[(&CropEmbedding, bool)],
) -> Result<Option<(usize, f64)>> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (emb, blank)) in candidates.iter().enumerate() {
        let s = crop_similarity(target, emb, target_blank || *blank)?;
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    Ok(best)
}

struct Apply<'a> {
    image: &'a mut RgbImage,
    mask: &'a mut GrayImage,
}

impl Apply<'_> {
    fn paste_full(&mut self, region: Rect, pixels: &RgbImage) -> Result<u64> {
        self.image.paste(pixels, region.x, region.y)?;
        for y in region.y..region.y1() {
            for x in region.x..region.x1() {
                self.mask.set(x, y, 255);
            }
        }
        Ok(region.area())
    }
}

/// Nearest same-size text record on the same page, by centre distance then id.
fn insertion_reference<'a>(db: &'a CropDatabase, page: u32, region: &CropRecord) -> Option<&'a CropRecord> {
    db.doc_records(page)
        .filter(|r| !r.is_blank && r.rect.w == region.rect.w && r.rect.h == region.rect.h)
        .min_by(|a, b| {
            let da = a.rect.center_distance(&region.rect);
            let db_ = b.rect.center_distance(&region.rect);
            da.partial_cmp(&db_)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.crop_id.cmp(&b.crop_id))
        })
}

/// Tamper one page. The RNG stream is keyed by `(seed, doc_id)`.
pub fn generate_tampered(
    page: &Page<'_>,
    db: &CropDatabase,
    config: &GenerationConfig,
    embedder: &dyn CropEmbedder,
    fonts: &FontSet,
    seed: u64,
) -> Result<TamperOutput> {
    let mut rng = doc_rng(seed, page.doc_id);
    let original = page.image;
    let mut image = original.clone();
    let mut mask = GrayImage::new(original.width(), original.height(), 0);

    let retained: Vec<&CropRecord> = db.doc_records(page.ordinal).collect();
    let rects: Vec<Rect> = retained.iter().map(|r| r.rect).collect();
    let picks = select_regions(&rects, config.n_max, &mut rng);
    let mut log = Vec::with_capacity(picks.len());
    let colors_delta = config.color_delta;

    for &pi in &picks {
        let region = retained[pi];
        let r = region.rect;
        let mut entry = RegionLog {
            region: r,
            crop_id: region.crop_id,
            region_blank: region.is_blank,
            gates: Vec::new(),
            branch: None,
            source_crop: None,
            font: None,
            color: None,
            similarity: None,
            inpaint_mode: None,
            masked_pixels: 0,
            skip_reason: None,
        };
        let mut apply = Apply {
            image: &mut image,
            mask: &mut mask,
        };

        let mut done = false;
        let mut copy_splice = false;
        if region.is_blank && rng.gen_bool(config.p_ins) {
            entry.gates.push(Gate::Insertion);
            copy_splice = true;
            if let Some(reference) = insertion_reference(db, page.ordinal, region) {
                let col0 = estimate_foreground_color(&reference.pixels, &config.sauvola);
                let colors = color_candidates(col0, colors_delta);
                let ref_emb = classical_features(&reference.pixels, false)?;
                let background = original.crop(r)?;
                if let Some(choice) = best_insertion(&reference.text, &background, &ref_emb, fonts, &colors)? {
                    entry.masked_pixels = apply.paste_full(r, &choice.patch.pixels)?;
                    entry.branch = Some(Branch::Insertion);
                    entry.source_crop = Some(reference.crop_id);
                    entry.font = Some(fonts.fonts()[choice.font_index].id.clone());
                    entry.color = Some(choice.color);
                    entry.similarity = Some(choice.similarity);
                    done = true;
                }
            }
        } else if rng.gen_bool(config.p_inp) {
            entry.gates.push(Gate::Inpaint);
            let res = inpaint_region(original, r, &mut rng)?;
            let mut n = 0;
            for y in 0..r.h {
                for x in 0..r.w {
                    if res.changed.get(x, y) {
                        apply.image.set(r.x + x, r.y + y, res.pixels.get(x, y));
                        apply.mask.set(r.x + x, r.y + y, 255);
                        n += 1;
                    }
                }
            }
            entry.masked_pixels = n;
            entry.inpaint_mode = Some(res.mode);
            entry.branch = (n > 0).then_some(Branch::Inpainting);
            if n == 0 {
                entry.skip_reason = Some("inpaint_no_change");
            }
            done = true;
        } else {
            copy_splice = true;
        }

        if !done && copy_splice {
            let splice = rng.gen_bool(config.p_spl);
            entry.gates.push(if splice { Gate::Splice } else { Gate::CopyMove });
            let chosen = if splice {
                let cands: Vec<&CropRecord> = db
                    .bucket(r.w, r.h, region.char_count)
                    .filter(|c| c.doc != page.ordinal)
                    .collect();
                let pairs: Vec<(&CropEmbedding, bool)> = cands.iter().map(|c| (&c.embedding, c.is_blank)).collect();
                best_candidate(&region.embedding, region.is_blank, &pairs)?
                    .map(|(i, s)| (cands[i], cands[i].pixels.clone(), s))
            } else {
                let cands: Vec<&CropRecord> = retained
                    .iter()
                    .copied()
                    .filter(|c| {
                        c.crop_id != region.crop_id
                            && c.char_count == region.char_count
                            && if config.epsilon_prime == 0.0 {
                                c.rect.w == r.w && c.rect.h == r.h
                            } else {
                                r.aspect_ratio_within(&c.rect, config.epsilon_prime)
                            }
                    })
                    .collect();
                let mut resized = Vec::with_capacity(cands.len());
                let mut embs = Vec::with_capacity(cands.len());
                for c in &cands {
                    let src = original.crop(c.rect)?;
                    if c.rect.w == r.w && c.rect.h == r.h {
                        embs.push(c.embedding.clone());
                        resized.push(src);
                    } else {
                        let px = src.resize_bilinear(r.w, r.h);
                        embs.push(embedder.embed(&px, c.is_blank, Some(c.crop_id))?);
                        resized.push(px);
                    }
                }
                let pairs: Vec<(&CropEmbedding, bool)> =
                    embs.iter().zip(&cands).map(|(e, c)| (e, c.is_blank)).collect();
                best_candidate(&region.embedding, region.is_blank, &pairs)?
                    .map(|(i, s)| (cands[i], resized.swap_remove(i), s))
            };
            match chosen {
                Some((src, pixels, s)) => {
                    entry.masked_pixels = apply.paste_full(r, &pixels)?;
                    entry.source_crop = Some(src.crop_id);
                    entry.similarity = Some(s);
                    entry.branch = Some(if src.is_blank && !region.is_blank {
                        Branch::Coverage
                    } else if splice {
                        Branch::Splicing
                    } else {
                        Branch::CopyMove
                    });
                }
                None => entry.skip_reason = Some("no_candidates"),
            }
        }
        log.push(entry);
    }
    Ok(TamperOutput { image, mask, log })
}
