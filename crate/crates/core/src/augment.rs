//! Hard-negative synthesis: small geometric misalignment or a random stack of
//! photometric edits, kept only when the result is measurably different.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::binarize::{sauvola_dark_mask, SauvolaParams};
use crate::raster::RgbImage;
use crate::{math, Error, Rect, Result};

/// Photometric pool, in canonical order.
pub const PHOTOMETRIC_OPS: [&str; 7] = [
    "brightness_contrast",
    "hue_saturation_value",
    "motion_blur",
    "rgb_shift",
    "channel_shuffle",
    "color_jitter",
    "text_color",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentParams {
    pub geometric_probability: f64,
    /// Vertical shift as a fraction of crop height, drawn uniformly.
    pub shift_fraction: (f64, f64),
    pub contrast: (f64, f64),
    pub brightness: f64,
    pub hue_degrees: f64,
    pub saturation: (f64, f64),
    pub value: (f64, f64),
    pub motion_lengths: Vec<u32>,
    pub rgb_shift: i32,
    pub jitter: (f64, f64),
    pub text_color_shift: i32,
    pub min_diff_ratio: f64,
    pub min_l2: f64,
    pub max_attempts: u32,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            geometric_probability: 0.15,
            shift_fraction: (0.15, 0.35),
            contrast: (0.7, 1.3),
            brightness: 40.0,
            hue_degrees: 20.0,
            saturation: (0.7, 1.3),
            value: (0.8, 1.2),
            motion_lengths: alloc::vec![3, 5, 7],
            rgb_shift: 30,
            jitter: (0.8, 1.2),
            text_color_shift: 80,
            min_diff_ratio: 0.05,
            min_l2: 12.0,
            max_attempts: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedCrop {
    pub pixels: RgbImage,
    /// `"vertical_shift"` or the photometric ops applied, in order.
    pub ops: Vec<&'static str>,
    pub attempts: u32,
}

/// Draw `k` in `1..=pool` with `Pr(k) ∝ 1/k`.
pub fn sample_composition_size<R: Rng + ?Sized>(rng: &mut R, pool: usize) -> usize {
    let total: f64 = (1..=pool).map(|k| 1.0 / k as f64).sum();
    let mut u = rng.gen::<f64>() * total;
    for k in 1..=pool {
        let w = 1.0 / k as f64;
        if u < w {
            return k;
        }
        u -= w;
    }
    pool
}

/// Fraction of pixels with any channel changed, and the L2 distance over raw
/// RGB bytes.
pub fn difference(a: &RgbImage, b: &RgbImage) -> (f64, f64) {
    let mut differing = 0usize;
    let mut sq = 0.0;
    for i in 0..a.pixel_count() {
        let (p, q) = (a.at(i), b.at(i));
        if p != q {
            differing += 1;
        }
        for c in 0..3 {
            let d = p[c] as f64 - q[c] as f64;
            sq += d * d;
        }
    }
    (differing as f64 / a.pixel_count().max(1) as f64, math::sqrt(sq))
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

fn map_pixels(img: &mut RgbImage, f: impl Fn([u8; 3]) -> [u8; 3]) {
    for i in 0..img.pixel_count() {
        let p = img.at(i);
        img.put(i, f(p));
    }
}

fn rgb_to_hsv(p: [u8; 3]) -> (f64, f64, f64) {
    let [r, g, b] = p.map(|v| v as f64 / 255.0);
    let mx = r.max(g).max(b);
    let mn = r.min(g).min(b);
    let d = mx - mn;
    let h = if d == 0.0 {
        0.0
    } else if mx == r {
        60.0 * (((g - b) / d) % 6.0)
    } else if mx == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    let h = if h < 0.0 { h + 360.0 } else { h };
    let s = if mx == 0.0 { 0.0 } else { d / mx };
    (h, s, mx)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h = ((h % 360.0) + 360.0) % 360.0;
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - math::abs(hp % 2.0 - 1.0));
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|t| math::to_u8((t + m) * 255.0))
}

fn motion_blur(img: &RgbImage, len: u32, dir: (i32, i32)) -> RgbImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let half = (len / 2) as i64;
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0u32; 3];
            for t in -half..=half {
                let sx = (x + t * dir.0 as i64).clamp(0, w - 1);
                let sy = (y + t * dir.1 as i64).clamp(0, h - 1);
                let p = img.get(sx as u32, sy as u32);
                for c in 0..3 {
                    acc[c] += p[c] as u32;
                }
            }
            let n = (2 * half + 1) as f64;
            out.set(x as u32, y as u32, acc.map(|v| math::to_u8(v as f64 / n)));
        }
    }
    out
}

fn apply_op<R: Rng + ?Sized>(img: &mut RgbImage, op: &str, p: &AugmentParams, rng: &mut R) {
    match op {
        "brightness_contrast" => {
            let a = uniform(rng, p.contrast);
            let b = uniform(rng, (-p.brightness, p.brightness));
            map_pixels(img, |px| px.map(|v| math::to_u8(a * (v as f64 - 128.0) + 128.0 + b)));
        }
        "hue_saturation_value" => {
            let dh = uniform(rng, (-p.hue_degrees, p.hue_degrees));
            let fs = uniform(rng, p.saturation);
            let fv = uniform(rng, p.value);
            map_pixels(img, |px| {
                let (h, s, v) = rgb_to_hsv(px);
                hsv_to_rgb(h + dh, (s * fs).min(1.0), (v * fv).min(1.0))
            });
        }
        "motion_blur" => {
            let len = *p.motion_lengths.choose(rng).unwrap_or(&3);
            let dir = *[(1, 0), (0, 1), (1, 1), (1, -1)].choose(rng).expect("nonempty");
            *img = motion_blur(img, len, dir);
        }
        "rgb_shift" => {
            let s = p.rgb_shift;
            let d: [i32; 3] = [rng.gen_range(-s..=s), rng.gen_range(-s..=s), rng.gen_range(-s..=s)];
            map_pixels(img, |px| [0, 1, 2].map(|c| (px[c] as i32 + d[c]).clamp(0, 255) as u8));
        }
        "channel_shuffle" => {
            let perms = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let q = *perms.choose(rng).expect("nonempty");
            map_pixels(img, |px| [px[q[0]], px[q[1]], px[q[2]]]);
        }
        "color_jitter" => {
            let fb = uniform(rng, p.jitter);
            let fc = uniform(rng, p.jitter);
            let fs = uniform(rng, p.jitter);
            let mean = {
                let g = img.to_gray();
                g.as_raw().iter().map(|&v| v as f64).sum::<f64>() / g.as_raw().len() as f64
            };
            map_pixels(img, |px| {
                let px = px.map(|v| v as f64 * fb);
                let px = px.map(|v| (v - mean) * fc + mean);
                let l = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
                px.map(|v| math::to_u8(l + (v - l) * fs))
            });
        }
        "text_color" => {
            let ink = sauvola_dark_mask(&img.to_gray(), &SauvolaParams::default());
            let s = p.text_color_shift;
            let d: [i32; 3] = [rng.gen_range(-s..=s), rng.gen_range(-s..=s), rng.gen_range(-s..=s)];
            for (i, &on) in ink.bits().iter().enumerate() {
                if on {
                    let px = img.at(i);
                    img.put(i, [0, 1, 2].map(|c| (px[c] as i32 + d[c]).clamp(0, 255) as u8));
                }
            }
        }
        _ => unreachable!("unknown op {op}"),
    }
}

fn vertical_shift<R: Rng + ?Sized>(image: &RgbImage, rect: Rect, p: &AugmentParams, rng: &mut R) -> Option<RgbImage> {
    let frac = uniform(rng, p.shift_fraction);
    let s = (math::round(frac * rect.h as f64) as i64).max(1);
    let first = if rng.gen_bool(0.5) { 1i64 } else { -1 };
    for sign in [first, -first] {
        let y0 = rect.y as i64 + sign * s;
        let y1 = y0 + rect.h as i64;
        let (cy0, cy1) = (y0.max(0), y1.min(image.height() as i64));
        if cy1 - cy0 < 1 {
            continue;
        }
        let src = image
            .crop(Rect::new(rect.x, cy0 as u32, rect.w, (cy1 - cy0) as u32))
            .ok()?;
        return Some(src.resize_bilinear(rect.w, rect.h));
    }
    None
}

/// One draw from the augmentation law, without the validity check.
pub fn draw_augmentation<R: Rng + ?Sized>(
    image: &RgbImage,
    rect: Rect,
    is_blank: bool,
    params: &AugmentParams,
    rng: &mut R,
) -> Result<(RgbImage, Vec<&'static str>)> {
    let crop = image.crop(rect)?;
    if !is_blank && rng.gen_bool(params.geometric_probability) {
        if let Some(shifted) = vertical_shift(image, rect, params, rng) {
            return Ok((shifted, alloc::vec!["vertical_shift"]));
        }
    }
    let k = sample_composition_size(rng, PHOTOMETRIC_OPS.len());
    let mut ops: Vec<&'static str> = PHOTOMETRIC_OPS.to_vec();
    ops.shuffle(rng);
    ops.truncate(k);
    let mut out = crop;
    for op in &ops {
        apply_op(&mut out, op, params, rng);
    }
    Ok((out, ops))
}

/// Produce a hard negative of the crop at `rect`, or `None` when every
/// attempt stayed too close to the original.
pub fn augment_crop<R: Rng + ?Sized>(
    image: &RgbImage,
    rect: Rect,
    is_blank: bool,
    params: &AugmentParams,
    rng: &mut R,
) -> Result<Option<AugmentedCrop>> {
    if rect.is_empty() {
        return Err(Error::DegenerateBox { w: rect.w, h: rect.h });
    }
    let original = image.crop(rect)?;
    for attempt in 1..=params.max_attempts {
        let (pixels, ops) = draw_augmentation(image, rect, is_blank, params, rng)?;
        if is_valid_augmentation(&original, &pixels, params) {
            return Ok(Some(AugmentedCrop {
                pixels,
                ops,
                attempts: attempt,
            }));
        }
    }
    Ok(None)
}

pub fn is_valid_augmentation(original: &RgbImage, altered: &RgbImage, params: &AugmentParams) -> bool {
    let (ratio, l2) = difference(original, altered);
    ratio >= params.min_diff_ratio && l2 >= params.min_l2
}
