//! Global (Otsu) and local (Sauvola) thresholding plus 8-connected component
//! statistics.

use alloc::vec;
use alloc::vec::Vec;

use crate::raster::{GrayImage, Mask, RgbImage};
use crate::{math, Error, Result};

/// Foreground convention for a global threshold `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// Foreground is `pixel > T` (light foreground).
    Binary,
    /// Foreground is `pixel <= T` (dark foreground).
    BinaryInv,
}

/// Between-class variance scaled by `n^2`, from integer class statistics.
///
/// `n0`/`s0` are the pixel count and value sum of the class `<= T`.
pub fn between_class_variance(n: u64, sum: u64, n0: u64, s0: u64) -> f64 {
    let n1 = n - n0;
    if n0 == 0 || n1 == 0 {
        return 0.0;
    }
    let d = n as f64 * s0 as f64 - n0 as f64 * sum as f64;
    d * d / (n0 as f64 * n1 as f64)
}

/// Otsu threshold over a 256-bin histogram.
///
/// Returns the lowest bin maximizing between-class variance. A histogram with a
/// single occupied bin returns that bin's value.
pub fn otsu_from_histogram(hist: &[u64; 256]) -> u8 {
    let n: u64 = hist.iter().sum();
    let sum: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let occupied: Vec<usize> = (0..256).filter(|&v| hist[v] > 0).collect();
    match occupied.len() {
        0 => return 0,
        1 => return occupied[0] as u8,
        _ => {}
    }
    let (mut n0, mut s0) = (0u64, 0u64);
    let mut best_t = 0u8;
    let mut best = f64::NEG_INFINITY;
    for t in 0..256usize {
        n0 += hist[t];
        s0 += t as u64 * hist[t];
        let var = between_class_variance(n, sum, n0, s0);
        if var > best {
            best = var;
            best_t = t as u8;
        }
    }
    best_t
}

pub fn otsu_threshold(gray: &GrayImage) -> u8 {
    otsu_from_histogram(&gray.histogram())
}

pub fn threshold(gray: &GrayImage, t: u8, polarity: Polarity) -> Mask {
    let bits = gray
        .as_raw()
        .iter()
        .map(|&v| match polarity {
            Polarity::Binary => v > t,
            Polarity::BinaryInv => v <= t,
        })
        .collect();
    Mask::from_bits(gray.width(), gray.height(), bits).expect("same dimensions")
}

pub fn otsu_binarize(gray: &GrayImage, polarity: Polarity) -> Mask {
    threshold(gray, otsu_threshold(gray), polarity)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SauvolaParams {
    /// Odd window side, at least 3.
    pub window: u32,
    pub k: f64,
    /// Dynamic range of the standard deviation.
    pub r: f64,
}

impl Default for SauvolaParams {
    fn default() -> Self {
        Self {
            window: 25,
            k: 0.2,
            r: 128.0,
        }
    }
}

impl SauvolaParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window % 2 == 0 {
            return Err(Error::InvalidParameter("sauvola window must be odd and >= 3"));
        }
        if !(self.k > 0.0 && self.k < 1.0) {
            return Err(Error::InvalidParameter("sauvola k must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Per-pixel Sauvola threshold `m * (1 + k * (s / R - 1))`.
///
/// Local mean `m` and standard deviation `s` are taken over a `window x window`
/// neighbourhood with edge replication, via integral images over the padded
/// raster so the variance is exact in integers before the final division.
pub fn sauvola_threshold_map(gray: &GrayImage, params: &SauvolaParams) -> Vec<f64> {
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    if w == 0 || h == 0 {
        return Vec::new();
    }
    let r = (params.window / 2) as usize;
    let pw = w + 2 * r;
    let ph = h + 2 * r;
    // integral images with a leading zero row/column
    let stride = pw + 1;
    let mut sum = vec![0u64; stride * (ph + 1)];
    let mut sq = vec![0u64; stride * (ph + 1)];
    for py in 0..ph {
        let sy = py.saturating_sub(r).min(h - 1);
        let mut row_sum = 0u64;
        let mut row_sq = 0u64;
        for px in 0..pw {
            let sx = px.saturating_sub(r).min(w - 1);
            let v = gray.as_raw()[sy * w + sx] as u64;
            row_sum += v;
            row_sq += v * v;
            let i = (py + 1) * stride + px + 1;
            sum[i] = sum[i - stride] + row_sum;
            sq[i] = sq[i - stride] + row_sq;
        }
    }
    let win = 2 * r + 1;
    let n = (win * win) as u64;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            // padded window [x, x + win) x [y, y + win)
            let (x0, y0, x1, y1) = (x, y, x + win, y + win);
            let s = sum[y1 * stride + x1] + sum[y0 * stride + x0]
                - sum[y0 * stride + x1]
                - sum[y1 * stride + x0];
            let q = sq[y1 * stride + x1] + sq[y0 * stride + x0]
                - sq[y0 * stride + x1]
                - sq[y1 * stride + x0];
            let mean = s as f64 / n as f64;
            let var_num = (n as u128 * q as u128 - s as u128 * s as u128) as f64;
            let std = math::sqrt(var_num) / n as f64;
            out.push(mean * (1.0 + params.k * (std / params.r - 1.0)));
        }
    }
    out
}

/// Pixels strictly darker than their Sauvola threshold.
pub fn sauvola_dark_mask(gray: &GrayImage, params: &SauvolaParams) -> Mask {
    let map = sauvola_threshold_map(gray, params);
    let bits = gray
        .as_raw()
        .iter()
        .zip(&map)
        .map(|(&v, &t)| (v as f64) < t)
        .collect();
    Mask::from_bits(gray.width(), gray.height(), bits).expect("same dimensions")
}

/// Bounding box and pixel count of one connected component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentStats {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub area: u64,
}

fn find(parent: &mut [u32], mut a: u32) -> u32 {
    while parent[a as usize] != a {
        let p = parent[a as usize];
        parent[a as usize] = parent[p as usize];
        a = p;
    }
    a
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// 8-connected components of the set pixels, in raster order of each
/// component's first pixel.
pub fn connected_components(mask: &Mask) -> Vec<ComponentStats> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let bits = mask.bits();
    let mut labels = vec![0u32; w * h];
    // label 0 is background
    let mut parent: Vec<u32> = vec![0];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut count = 0;
            if x > 0 && labels[i - 1] != 0 {
                neighbours[count] = labels[i - 1];
                count += 1;
            }
            if y > 0 {
                let up = i - w;
                if x > 0 && labels[up - 1] != 0 {
                    neighbours[count] = labels[up - 1];
                    count += 1;
                }
                if labels[up] != 0 {
                    neighbours[count] = labels[up];
                    count += 1;
                }
                if x + 1 < w && labels[up + 1] != 0 {
                    neighbours[count] = labels[up + 1];
                    count += 1;
                }
            }
            if count == 0 {
                let l = parent.len() as u32;
                parent.push(l);
                labels[i] = l;
            } else {
                let l = *neighbours[..count].iter().min().unwrap();
                labels[i] = l;
                for &n in &neighbours[..count] {
                    union(&mut parent, l, n);
                }
            }
        }
    }
    // resolve roots; roots keep the smallest provisional label, which is also the
    // first in raster order
    let mut slot = vec![u32::MAX; parent.len()];
    let mut acc: Vec<(u32, u32, u32, u32, u64)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x];
            if l == 0 {
                continue;
            }
            let root = find(&mut parent, l) as usize;
            if slot[root] == u32::MAX {
                slot[root] = acc.len() as u32;
                acc.push((x as u32, y as u32, x as u32, y as u32, 0));
            }
            let e = &mut acc[slot[root] as usize];
            e.0 = e.0.min(x as u32);
            e.1 = e.1.min(y as u32);
            e.2 = e.2.max(x as u32);
            e.3 = e.3.max(y as u32);
            e.4 += 1;
        }
    }
    acc.into_iter()
        .map(|(x0, y0, x1, y1, area)| ComponentStats {
            x: x0,
            y: y0,
            w: x1 - x0 + 1,
            h: y1 - y0 + 1,
            area,
        })
        .collect()
}

/// Mean colour of Sauvola-dark pixels; falls back to the darkest 5% (at least
/// one pixel) when no pixel qualifies.
pub fn estimate_foreground_color(crop: &RgbImage, params: &SauvolaParams) -> [u8; 3] {
    let n = crop.pixel_count();
    if n == 0 {
        return [0, 0, 0];
    }
    let gray = crop.to_gray();
    let mask = sauvola_dark_mask(&gray, params);
    let mut chosen: Vec<usize> = mask
        .bits()
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    if chosen.is_empty() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by_key(|&i| (gray.as_raw()[i], i));
        let take = n.div_ceil(20).max(1);
        idx.truncate(take);
        chosen = idx;
    }
    let mut acc = [0u64; 3];
    for &i in &chosen {
        let p = crop.at(i);
        for c in 0..3 {
            acc[c] += p[c] as u64;
        }
    }
    let m = chosen.len() as f64;
    [
        math::to_u8(acc[0] as f64 / m),
        math::to_u8(acc[1] as f64 / m),
        math::to_u8(acc[2] as f64 / m),
    ]
}
