//! Crop similarity through a two-headed embedding: a background head for
//! paper texture, noise and blur, and a foreground head for ink colour, weight
//! and placement.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::binarize::{sauvola_dark_mask, SauvolaParams};
use crate::raster::{Mask, RgbImage};
use crate::{math, Error, Result};

/// Per-head length of the classical feature vector.
pub const CLASSICAL_DIM: usize = 16;

/// Component names of the classical background head, in storage order.
pub const BG_FEATURES: [&str; CLASSICAL_DIM] = [
    "mean_r",
    "mean_g",
    "mean_b",
    "std_r",
    "std_g",
    "std_b",
    "mean_luma",
    "std_luma",
    "local_contrast",
    "laplacian_var",
    "highpass_std",
    "grad_x",
    "grad_y",
    "chroma",
    "bg_ratio",
    "bias",
];

/// Component names of the classical foreground head, in storage order.
pub const FG_FEATURES: [&str; CLASSICAL_DIM] = [
    "mean_r",
    "mean_g",
    "mean_b",
    "std_r",
    "std_g",
    "std_b",
    "ink_ratio",
    "stroke_width",
    "centroid_y",
    "centroid_x",
    "spread_y",
    "spread_x",
    "top_extent",
    "bottom_extent",
    "ink_contrast",
    "bias",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CropEmbedding {
    pub bg: Vec<f32>,
    pub fg: Vec<f32>,
}

impl CropEmbedding {
    pub fn dim(&self) -> usize {
        self.bg.len()
    }

    /// Normalize both heads to unit length. A zero head becomes the
    /// all-equal sentinel.
    pub fn normalized(mut self) -> Self {
        normalize_or_sentinel(&mut self.bg);
        normalize_or_sentinel(&mut self.fg);
        self
    }
}

fn normalize_or_sentinel(v: &mut [f32]) {
    let n = math::sqrt(v.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>());
    if n > 0.0 && n.is_finite() {
        for x in v.iter_mut() {
            *x = (*x as f64 / n) as f32;
        }
    } else {
        let s = sentinel_value(v.len());
        v.iter_mut().for_each(|x| *x = s);
    }
}

fn sentinel_value(dim: usize) -> f32 {
    if dim == 0 {
        0.0
    } else {
        (1.0 / math::sqrt(dim as f64)) as f32
    }
}

/// `u·v / (|u| |v|)`, accumulated in `f64`.
pub fn cosine_similarity(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (math::sqrt(nu) * math::sqrt(nv))).clamp(-1.0, 1.0))
}

/// Background cosine alone when either crop is blank, otherwise the mean of the
/// background and foreground cosines.
pub fn crop_similarity(a: &CropEmbedding, b: &CropEmbedding, either_blank: bool) -> Result<f64> {
    let bg = cosine_similarity(&a.bg, &b.bg)?;
    if either_blank {
        if a.fg.len() != b.fg.len() {
            return Err(Error::DimensionMismatch {
                left: a.fg.len(),
                right: b.fg.len(),
            });
        }
        return Ok(bg);
    }
    let fg = cosine_similarity(&a.fg, &b.fg)?;
    Ok(0.5 * bg + 0.5 * fg)
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: f64,
    s: [f64; 3],
    q: [f64; 3],
}

impl Moments {
    fn push(&mut self, p: [u8; 3]) {
        self.n += 1.0;
        for c in 0..3 {
            let v = p[c] as f64;
            self.s[c] += v;
            self.q[c] += v * v;
        }
    }

    fn mean(&self, c: usize) -> f64 {
        self.s[c] / self.n
    }

    fn std(&self, c: usize) -> f64 {
        let m = self.mean(c);
        math::sqrt((self.q[c] / self.n - m * m).max(0.0))
    }
}

fn finite_or_zero(v: &mut [f64]) {
    for x in v.iter_mut() {
        if !x.is_finite() {
            *x = 0.0;
        }
    }
}

fn to_head(mut v: Vec<f64>) -> Vec<f32> {
    finite_or_zero(&mut v);
    let mut out: Vec<f32> = v.into_iter().map(|x| x as f32).collect();
    normalize_or_sentinel(&mut out);
    out
}

fn background_head(crop: &RgbImage, gray: &[u8], ink: &Mask) -> Vec<f32> {
    let (w, h) = (crop.width() as usize, crop.height() as usize);
    let mut m = Moments::default();
    let mut chroma = 0.0;
    let (mut lum_s, mut lum_q) = (0.0, 0.0);
    for i in 0..w * h {
        if ink.bits()[i] {
            continue;
        }
        let p = crop.at(i);
        m.push(p);
        let l = gray[i] as f64;
        lum_s += l;
        lum_q += l * l;
        let mx = p[0].max(p[1]).max(p[2]) as f64;
        let mn = p[0].min(p[1]).min(p[2]) as f64;
        chroma += mx - mn;
    }
    if m.n == 0.0 {
        // all ink: fall back to every pixel
        for i in 0..w * h {
            let p = crop.at(i);
            m.push(p);
            let l = gray[i] as f64;
            lum_s += l;
            lum_q += l * l;
        }
    }
    let lum_mean = lum_s / m.n;
    let lum_std = math::sqrt((lum_q / m.n - lum_mean * lum_mean).max(0.0));

    // gradient, Laplacian and high-pass statistics over the whole crop
    let g = |x: usize, y: usize| gray[y * w + x] as f64;
    let (mut gx, mut gy, mut nx, mut ny) = (0.0, 0.0, 0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                gx += math::abs(g(x + 1, y) - g(x, y));
                nx += 1.0;
            }
            if y + 1 < h {
                gy += math::abs(g(x, y + 1) - g(x, y));
                ny += 1.0;
            }
        }
    }
    let (mut ls, mut lq, mut hs, mut hq, mut contrast, mut ln) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    if w >= 3 && h >= 3 {
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let c = g(x, y);
                let nb = g(x - 1, y) + g(x + 1, y) + g(x, y - 1) + g(x, y + 1);
                let lap = nb - 4.0 * c;
                ls += lap;
                lq += lap * lap;
                let hp = c - nb / 4.0;
                hs += hp;
                hq += hp * hp;
                let mut lo = c;
                let mut hi = c;
                for v in [g(x - 1, y), g(x + 1, y), g(x, y - 1), g(x, y + 1)] {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                contrast += (hi - lo) * (hi - lo);
                ln += 1.0;
            }
        }
    }
    let lap_var = if ln > 0.0 { lq / ln - (ls / ln) * (ls / ln) } else { 0.0 };
    let hp_std = if ln > 0.0 {
        math::sqrt((hq / ln - (hs / ln) * (hs / ln)).max(0.0))
    } else {
        0.0
    };
    let contrast = if ln > 0.0 { contrast / ln } else { 0.0 };
    let bg_ratio = (w * h - ink.count()) as f64 / (w * h) as f64;

    to_head(vec![
        m.mean(0) / 127.5 - 1.0,
        m.mean(1) / 127.5 - 1.0,
        m.mean(2) / 127.5 - 1.0,
        m.std(0) / 64.0,
        m.std(1) / 64.0,
        m.std(2) / 64.0,
        lum_mean / 127.5 - 1.0,
        lum_std / 64.0,
        math::ln(1.0 + contrast) / 10.0,
        math::ln(1.0 + lap_var) / 10.0,
        hp_std / 32.0,
        if nx > 0.0 { gx / nx / 32.0 } else { 0.0 },
        if ny > 0.0 { gy / ny / 32.0 } else { 0.0 },
        chroma / m.n / 127.5,
        bg_ratio - 0.5,
        0.5,
    ])
}

fn foreground_head(crop: &RgbImage, gray: &[u8], ink: &Mask) -> Vec<f32> {
    let (w, h) = (crop.width() as usize, crop.height() as usize);
    let mut m = Moments::default();
    let (mut cx, mut cy, mut qx, mut qy) = (0.0, 0.0, 0.0, 0.0);
    let (mut ink_l, mut bg_l, mut nbg) = (0.0, 0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if ink.bits()[i] {
                m.push(crop.at(i));
                let (fx, fy) = ((x as f64 + 0.5) / w as f64, (y as f64 + 0.5) / h as f64);
                cx += fx;
                cy += fy;
                qx += fx * fx;
                qy += fy * fy;
                ink_l += gray[i] as f64;
            } else {
                bg_l += gray[i] as f64;
                nbg += 1.0;
            }
        }
    }
    let n = m.n;
    let (mcx, mcy) = (cx / n, cy / n);
    let sx = math::sqrt((qx / n - mcx * mcx).max(0.0));
    let sy = math::sqrt((qy / n - mcy * mcy).max(0.0));

    // stroke width: mean 2*area/perimeter over components
    let mut perim = 0.0;
    for y in 0..h {
        for x in 0..w {
            if !ink.bits()[y * w + x] {
                continue;
            }
            let edge = x == 0
                || y == 0
                || x + 1 == w
                || y + 1 == h
                || !ink.bits()[y * w + x - 1]
                || !ink.bits()[y * w + x + 1]
                || !ink.bits()[(y - 1) * w + x]
                || !ink.bits()[(y + 1) * w + x];
            if edge {
                perim += 1.0;
            }
        }
    }
    let stroke = 2.0 * n / perim;
    let bbox = ink.bounding_box();
    let (top, bottom) = match bbox {
        Some(b) => (b.y as f64 / h as f64, b.y1() as f64 / h as f64),
        None => (0.0, 0.0),
    };
    let contrast = if nbg > 0.0 { (bg_l / nbg - ink_l / n) / 255.0 } else { 0.0 };

    to_head(vec![
        m.mean(0) / 127.5 - 1.0,
        m.mean(1) / 127.5 - 1.0,
        m.mean(2) / 127.5 - 1.0,
        m.std(0) / 64.0,
        m.std(1) / 64.0,
        m.std(2) / 64.0,
        n / (w * h) as f64 - 0.25,
        stroke / 4.0,
        (mcy - 0.5) * 4.0,
        (mcx - 0.5) * 4.0,
        sy * 4.0,
        sx * 4.0,
        (top - 0.25) * 4.0,
        (bottom - 0.75) * 4.0,
        contrast,
        0.5,
    ])
}

/// Engine-native crop descriptor; see [`BG_FEATURES`] and [`FG_FEATURES`] for
/// the component order. Ink is the Sauvola dark mask. Blank crops, and crops
/// with no ink at all, get the sentinel foreground head.
pub fn classical_features(crop: &RgbImage, is_blank: bool) -> Result<CropEmbedding> {
    if crop.pixel_count() == 0 {
        return Err(Error::EmptyImage);
    }
    let gray_img = crop.to_gray();
    let ink = sauvola_dark_mask(&gray_img, &SauvolaParams::default());
    let gray = gray_img.as_raw();
    let bg = background_head(crop, gray, &ink);
    let fg = if is_blank || ink.is_empty() {
        vec![sentinel_value(CLASSICAL_DIM); CLASSICAL_DIM]
    } else {
        foreground_head(crop, gray, &ink)
    };
    Ok(CropEmbedding { bg, fg })
}

/// Anything that can turn a crop into a [`CropEmbedding`].
pub trait CropEmbedder: Sync {
    fn dim(&self) -> usize;

    /// `crop_id` is `None` for pixels synthesized during generation.
    fn embed(&self, crop: &RgbImage, is_blank: bool, crop_id: Option<u64>) -> Result<CropEmbedding>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ClassicalEmbedder;

impl CropEmbedder for ClassicalEmbedder {
    fn dim(&self) -> usize {
        CLASSICAL_DIM
    }

    fn embed(&self, crop: &RgbImage, is_blank: bool, _crop_id: Option<u64>) -> Result<CropEmbedding> {
        classical_features(crop, is_blank)
    }
}

/// Precomputed embeddings keyed by crop id, normalized per head.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    entries: BTreeMap<u64, CropEmbedding>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// Validate and normalize; rejects duplicate ids, wrong dims and
    /// non-finite components.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, CropEmbedding)>,
    {
        let mut store = Self::new(dim);
        for (id, e) in entries {
            store.insert(id, e)?;
        }
        Ok(store)
    }

    pub fn insert(&mut self, id: u64, e: CropEmbedding) -> Result<()> {
        if e.bg.len() != self.dim || e.fg.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: if e.bg.len() != self.dim { e.bg.len() } else { e.fg.len() },
            });
        }
        if e.bg.iter().chain(&e.fg).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(id));
        }
        if self.entries.contains_key(&id) {
            return Err(Error::DuplicateCrop(id));
        }
        self.entries.insert(id, e.normalized());
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&CropEmbedding> {
        self.entries.get(&id)
    }

    /// Entries in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &CropEmbedding)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }
}

impl CropEmbedder for EmbeddingStore {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, _crop: &RgbImage, _is_blank: bool, crop_id: Option<u64>) -> Result<CropEmbedding> {
        let id = crop_id.ok_or(Error::MissingEmbedding(u64::MAX))?;
        self.get(id).cloned().ok_or(Error::MissingEmbedding(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text_crop(shift: i32, bg: u8) -> RgbImage {
        let mut img = RgbImage::new(40, 20, [bg, bg, bg]);
        for x in 5..35 {
            for y in 6..12 {
                let yy = y + shift;
                if (0..20).contains(&yy) && (x % 6) < 3 {
                    img.set(x as u32, yy as u32, [10, 10, 30]);
                }
            }
        }
        img
    }

    #[test]
    fn cosine_examples() {
        let u = [1.0f32, 2.0, 2.0];
        let v = [2.0f32, 1.0, 2.0];
        assert!((cosine_similarity(&u, &v).unwrap() - 8.0 / 9.0).abs() < 1e-12);
        assert!((cosine_similarity(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[0.0, 1.0]), Err(Error::ZeroVector));
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn crop_similarity_routing() {
        let a = CropEmbedding {
            bg: vec![1.0, 0.0],
            fg: vec![1.0, 0.0],
        };
        let b = CropEmbedding {
            bg: vec![1.0, 0.0],
            fg: vec![0.0, 1.0],
        };
        assert!((crop_similarity(&a, &b, false).unwrap() - 0.5).abs() < 1e-12);
        assert!((crop_similarity(&a, &b, true).unwrap() - 1.0).abs() < 1e-12);
        assert!((crop_similarity(&a, &a, false).unwrap() - 1.0).abs() < 1e-12);
        let c = CropEmbedding {
            bg: vec![0.8, 0.6],
            fg: vec![-1.0, 0.0],
        };
        assert!((crop_similarity(&a, &c, true).unwrap() - 0.8).abs() < 1e-6);
    }

    #[test]
    fn identical_crops_identical_embeddings() {
        let a = classical_features(&text_crop(0, 200), false).unwrap();
        let b = classical_features(&text_crop(0, 200), false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), CLASSICAL_DIM);
    }

    #[test]
    fn brightness_moves_background_head() {
        let base = text_crop(0, 180);
        let mut bright = base.clone();
        for i in 0..bright.pixel_count() {
            let p = bright.at(i);
            bright.put(i, p.map(|v| v.saturating_add(40)));
        }
        let a = classical_features(&base, false).unwrap();
        let b = classical_features(&bright, false).unwrap();
        assert!(cosine_similarity(&a.bg, &b.bg).unwrap() < 1.0 - 1e-3);
    }

    #[test]
    fn vertical_shift_moves_centroid() {
        let a = classical_features(&text_crop(0, 220), false).unwrap();
        let b = classical_features(&text_crop(5, 220), false).unwrap();
        let cy = FG_FEATURES.iter().position(|&n| n == "centroid_y").unwrap();
        // heads are normalized; compare the raw direction
        assert!((a.fg[cy] - b.fg[cy]).abs() > 1e-3);
    }

    #[test]
    fn blank_uses_sentinel() {
        let e = classical_features(&text_crop(0, 200), true).unwrap();
        assert!(e.fg.iter().all(|&v| (v - 0.25).abs() < 1e-7));
        let white = classical_features(&RgbImage::new(8, 8, [255, 255, 255]), false).unwrap();
        assert!(white.fg.iter().all(|&v| (v - 0.25).abs() < 1e-7));
    }

    #[test]
    fn heads_are_unit_norm() {
        let e = classical_features(&text_crop(2, 150), false).unwrap();
        for head in [&e.bg, &e.fg] {
            let n: f64 = head.iter().map(|&v| (v as f64) * (v as f64)).sum();
            assert!((n - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn store_validation() {
        let ok = CropEmbedding {
            bg: vec![3.0, 4.0],
            fg: vec![0.0, 2.0],
        };
        let mut s = EmbeddingStore::new(2);
        s.insert(5, ok.clone()).unwrap();
        assert_eq!(s.get(5).unwrap().bg, vec![0.6, 0.8]);
        assert_eq!(s.insert(5, ok.clone()), Err(Error::DuplicateCrop(5)));
        let bad = CropEmbedding {
            bg: vec![f32::NAN, 1.0],
            fg: vec![1.0, 1.0],
        };
        assert_eq!(s.insert(9, bad), Err(Error::NonFinite(9)));
        assert_eq!(
            s.embed(&RgbImage::new(1, 1, [0, 0, 0]), false, Some(7)),
            Err(Error::MissingEmbedding(7))
        );
    }
}
