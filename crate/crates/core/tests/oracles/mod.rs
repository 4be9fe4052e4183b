//! Straightforward reference implementations used to check the optimized code.
#![allow(dead_code)]

use std::collections::VecDeque;

use docforge_core::font::Font;
use docforge_core::raster::{GrayImage, Mask};

/// Lowest threshold maximizing between-class variance, compared exactly in
/// rational arithmetic. Total count must stay below about 1e5.
pub fn otsu_exhaustive(hist: &[u64; 256]) -> u8 {
    let occupied: Vec<usize> = (0..256).filter(|&v| hist[v] > 0).collect();
    if occupied.len() == 1 {
        return occupied[0] as u8;
    }
    let n: u128 = hist.iter().map(|&c| c as u128).sum();
    let total: u128 = hist.iter().enumerate().map(|(v, &c)| v as u128 * c as u128).sum();
    // variance ∝ (n*s0 - n0*s)^2 / (n0*n1): keep numerator and denominator
    let mut best: Option<(u128, u128, u8)> = None;
    for t in 0..256usize {
        let n0: u128 = hist[..=t].iter().map(|&c| c as u128).sum();
        let s0: u128 = hist[..=t].iter().enumerate().map(|(v, &c)| v as u128 * c as u128).sum();
        let n1 = n - n0;
        let (num, den) = if n0 == 0 || n1 == 0 {
            (0, 1)
        } else {
            let d = (n * s0) as i128 - (n0 * total) as i128;
            ((d * d) as u128, n0 * n1)
        };
        match best {
            None => best = Some((num, den, t as u8)),
            Some((bn, bd, _)) if num * bd > bn * den => best = Some((num, den, t as u8)),
            _ => {}
        }
    }
    best.unwrap().2
}

/// Sauvola threshold with an explicit window loop and two-pass variance.
pub fn sauvola_naive(gray: &GrayImage, window: u32, k: f64, r: f64) -> Vec<f64> {
    let (w, h) = (gray.width() as i64, gray.height() as i64);
    let half = (window / 2) as i64;
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let mut vals = Vec::new();
            for dy in -half..=half {
                for dx in -half..=half {
                    let sx = (x + dx).clamp(0, w - 1) as u32;
                    let sy = (y + dy).clamp(0, h - 1) as u32;
                    vals.push(gray.get(sx, sy) as f64);
                }
            }
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64;
            out.push(m * (1.0 + k * (var.sqrt() / r - 1.0)));
        }
    }
    out
}

/// BFS flood fill, 8-connected, components in raster order of first pixel:
/// `(x, y, w, h, area)`.
pub fn flood_fill_components(mask: &Mask) -> Vec<(u32, u32, u32, u32, u64)> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut seen = vec![false; (w * h) as usize];
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if !mask.bits()[i] || seen[i] {
                continue;
            }
            let (mut x0, mut y0, mut x1, mut y1, mut area) = (x, y, x, y, 0u64);
            let mut q = VecDeque::from([(x, y)]);
            seen[i] = true;
            while let Some((cx, cy)) = q.pop_front() {
                area += 1;
                x0 = x0.min(cx);
                y0 = y0.min(cy);
                x1 = x1.max(cx);
                y1 = y1.max(cy);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (cx + dx, cy + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let j = (ny * w + nx) as usize;
                        if mask.bits()[j] && !seen[j] {
                            seen[j] = true;
                            q.push_back((nx, ny));
                        }
                    }
                }
            }
            out.push((x0 as u32, y0 as u32, (x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32, area));
        }
    }
    out
}

/// Text extent at scale `k/100`, measured from the layout definition.
pub fn extent_at(font: &Font, text: &str, k: u32) -> (u32, u32) {
    let chars: Vec<char> = text.chars().collect();
    let stroke = std::cmp::max(1, (k as f64 / 100.0).round() as u32);
    let units_w = (chars.len() as u32 - 1) * font.advance + font.glyph(*chars.last().unwrap()).width();
    let px = |u: u32| ((u as f64) * (k as f64) / 100.0).floor() as u32;
    (px(units_w - 1) + stroke, px(font.height - 1) + stroke)
}

/// Largest k in `1..=limit` whose extent fits, by linear scan.
pub fn fit_scale_exhaustive(font: &Font, text: &str, vw: u32, vh: u32, limit: u32) -> Option<u32> {
    (1..=limit).rev().find(|&k| {
        let (w, h) = extent_at(font, text, k);
        w <= vw && h <= vh
    })
}

pub fn cosine(u: &[f32], v: &[f32]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(&a, &b)| a as f64 * b as f64).sum();
    let nu: f64 = u.iter().map(|&a| (a as f64).powi(2)).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|&a| (a as f64).powi(2)).sum::<f64>().sqrt();
    dot / (nu * nv)
}

/// 64-bit FNV-1a written out byte by byte.
pub fn fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 14695981039346656037;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(1099511628211);
    }
    h
}

/// Hash of the 64x64 patch at (x, y), zero outside the image.
pub fn naive_patch_hash(gray: &GrayImage, x: u32, y: u32) -> u64 {
    let mut bytes = Vec::with_capacity(4096);
    for dy in 0..64 {
        for dx in 0..64 {
            let (px, py) = (x + dx, y + dy);
            bytes.push(if px < gray.width() && py < gray.height() { gray.get(px, py) } else { 0 });
        }
    }
    fnv(&bytes)
}

/// Expected number of text runs for lines of the given lengths.
pub fn segment_count(lines: &[usize]) -> usize {
    lines.iter().map(|k| k * (k + 1) / 2).sum()
}
