//! Text removal by harmonic fill.
//!
//! Masked pixels are solved for the discrete Laplace equation with the
//! unmasked pixels as Dirichlet data and reflecting edges, using successive
//! over-relaxation. This continues the surrounding background smoothly into
//! the hole.

use alloc::vec::Vec;

use rand::Rng;

use crate::binarize::{sauvola_dark_mask, SauvolaParams};
use crate::raster::{Mask, RgbImage};
use crate::{math, Error, Rect, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InpaintMode {
    FullBox,
    TextOnly,
}

impl InpaintMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InpaintMode::FullBox => "full_box",
            InpaintMode::TextOnly => "text_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillParams {
    /// Stop once no unknown moves by more than this (8-bit units).
    pub tolerance: f64,
    pub max_iterations: u32,
}

impl Default for FillParams {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_iterations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InpaintResult {
    pub pixels: RgbImage,
    /// Pixels whose value differs from the input.
    pub changed: Mask,
    pub mode: InpaintMode,
}

/// Dark-text mask (`gray < sauvola threshold`). Light text on a dark ground
/// selects the ground instead; callers decide polarity.
pub fn build_text_mask_sauvola(crop: &RgbImage) -> Mask {
    sauvola_dark_mask(&crop.to_gray(), &SauvolaParams::default())
}

fn ring_mean(image: &RgbImage) -> [f64; 3] {
    let (w, h) = image.dimensions();
    let mut acc = [0.0; 3];
    let mut n = 0.0;
    for y in 0..h {
        for x in 0..w {
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                let p = image.get(x, y);
                for c in 0..3 {
                    acc[c] += p[c] as f64;
                }
                n += 1.0;
            }
        }
    }
    acc.map(|v| v / n)
}

/// Fill `hole` in place. Returns `false` (and leaves the image untouched)
/// when the hole has no known pixel to diffuse from.
pub fn harmonic_fill(image: &mut RgbImage, hole: &Mask, params: &FillParams) -> Result<bool> {
    let (w, h) = image.dimensions();
    if hole.width() != w || hole.height() != h {
        return Err(Error::DimensionMismatch {
            left: (w * h) as usize,
            right: (hole.width() * hole.height()) as usize,
        });
    }
    let unknown: Vec<usize> = hole
        .bits()
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    if unknown.is_empty() {
        return Ok(true);
    }
    if unknown.len() == (w * h) as usize {
        return Ok(false);
    }
    let (wu, hu) = (w as usize, h as usize);
    let mut vals: Vec<[f64; 3]> = (0..wu * hu)
        .map(|i| image.at(i).map(|v| v as f64))
        .collect();

    // initialize the hole with the mean of its known 4-neighbours
    let mut acc = [0.0; 3];
    let mut n = 0.0;
    for &i in &unknown {
        let (x, y) = (i % wu, i / wu);
        let mut visit = |j: usize| {
            if !hole.bits()[j] {
                for c in 0..3 {
                    acc[c] += vals[j][c];
                }
                n += 1.0;
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < wu {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - wu);
        }
        if y + 1 < hu {
            visit(i + wu);
        }
    }
    let init = acc.map(|v| v / n);
    for &i in &unknown {
        vals[i] = init;
    }

    // hole extent drives the over-relaxation factor
    let bbox = hole.bounding_box().expect("nonempty hole");
    let span = bbox.w.max(bbox.h).max(2) as f64;
    let omega = 2.0 / (1.0 + math::sin(core::f64::consts::PI / span));

    for _ in 0..params.max_iterations {
        let mut worst: f64 = 0.0;
        for &i in &unknown {
            let (x, y) = (i % wu, i / wu);
            let mut sum = [0.0; 3];
            let mut k = 0.0;
            let mut add = |j: usize, sum: &mut [f64; 3]| {
                for c in 0..3 {
                    sum[c] += vals[j][c];
                }
                k += 1.0;
            };
            if x > 0 {
                add(i - 1, &mut sum);
            }
            if x + 1 < wu {
                add(i + 1, &mut sum);
            }
            if y > 0 {
                add(i - wu, &mut sum);
            }
            if y + 1 < hu {
                add(i + wu, &mut sum);
            }
            for c in 0..3 {
                let target = sum[c] / k;
                let step = omega * (target - vals[i][c]);
                vals[i][c] += step;
                worst = worst.max(math::abs(step));
            }
        }
        if worst < params.tolerance {
            break;
        }
    }
    for &i in &unknown {
        image.put(i, vals[i].map(math::to_u8));
    }
    Ok(true)
}

fn diff_mask(a: &RgbImage, b: &RgbImage) -> Mask {
    let bits = (0..a.pixel_count()).map(|i| a.at(i) != b.at(i)).collect();
    Mask::from_bits(a.width(), a.height(), bits).expect("same dims")
}

fn pick_mode<R: Rng + ?Sized>(rng: &mut R) -> InpaintMode {
    if rng.gen_bool(0.5) {
        InpaintMode::FullBox
    } else {
        InpaintMode::TextOnly
    }
}

/// Inpaint a crop with no outside context. Full-box mode has no boundary to
/// diffuse from, so it paints the crop's border-ring mean.
pub fn inpaint<R: Rng + ?Sized>(crop: &RgbImage, rng: &mut R) -> Result<InpaintResult> {
    let mode = pick_mode(rng);
    inpaint_with_mode(crop, mode, &FillParams::default())
}

pub fn inpaint_with_mode(crop: &RgbImage, mode: InpaintMode, params: &FillParams) -> Result<InpaintResult> {
    if crop.pixel_count() == 0 {
        return Err(Error::EmptyImage);
    }
    let hole = match mode {
        InpaintMode::FullBox => Mask::filled(crop.width(), crop.height(), true),
        InpaintMode::TextOnly => build_text_mask_sauvola(crop),
    };
    let mut out = crop.clone();
    if !harmonic_fill(&mut out, &hole, params)? {
        let m = ring_mean(crop).map(math::to_u8);
        for i in 0..out.pixel_count() {
            out.put(i, m);
        }
    }
    let changed = diff_mask(crop, &out);
    Ok(InpaintResult {
        pixels: out,
        changed,
        mode,
    })
}

/// Inpaint `region` of `image` using a one-pixel ring of surrounding pixels as
/// boundary data. The returned pixels and mask cover `region` only.
pub fn inpaint_region<R: Rng + ?Sized>(image: &RgbImage, region: Rect, rng: &mut R) -> Result<InpaintResult> {
    let mode = pick_mode(rng);
    inpaint_region_with_mode(image, region, mode, &FillParams::default())
}

pub fn inpaint_region_with_mode(
    image: &RgbImage,
    region: Rect,
    mode: InpaintMode,
    params: &FillParams,
) -> Result<InpaintResult> {
    let crop = image.crop(region)?;
    let (iw, ih) = image.dimensions();
    let ctx = Rect::from_corners(
        region.x.saturating_sub(1),
        region.y.saturating_sub(1),
        (region.x1() + 1).min(iw),
        (region.y1() + 1).min(ih),
    );
    let mut work = image.crop(ctx)?;
    let (ox, oy) = (region.x - ctx.x, region.y - ctx.y);
    let inner = match mode {
        InpaintMode::FullBox => Mask::filled(crop.width(), crop.height(), true),
        InpaintMode::TextOnly => build_text_mask_sauvola(&crop),
    };
    let mut hole = Mask::new(work.width(), work.height());
    for y in 0..crop.height() {
        for x in 0..crop.width() {
            if inner.get(x, y) {
                hole.set(x + ox, y + oy, true);
            }
        }
    }
    let out = if harmonic_fill(&mut work, &hole, params)? {
        work.crop(Rect::new(ox, oy, crop.width(), crop.height()))?
    } else {
        let m = ring_mean(&crop).map(math::to_u8);
        RgbImage::new(crop.width(), crop.height(), m)
    };
    let changed = diff_mask(&crop, &out);
    Ok(InpaintResult {
        pixels: out,
        changed,
        mode,
    })
}
