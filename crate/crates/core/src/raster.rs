//! Minimal owned rasters: interleaved RGB, 8-bit gray and boolean masks.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Rect, Result};

/// Interleaved 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, fill: [u8; 3]) -> Self {
        let n = width as usize * height as usize;
        let mut data = Vec::with_capacity(n * 3);
        for _ in 0..n {
            data.extend_from_slice(&fill);
        }
        Self { width, height, data }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: expected,
            });
        }
        Ok(Self { width, height, data })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, px: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&px);
    }

    /// Pixel by linear index.
    #[inline]
    pub fn at(&self, idx: usize) -> [u8; 3] {
        let i = idx * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn put(&mut self, idx: usize, px: [u8; 3]) {
        let i = idx * 3;
        self.data[i..i + 3].copy_from_slice(&px);
    }

    pub fn full_rect(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn crop(&self, r: Rect) -> Result<RgbImage> {
        if r.is_empty() {
            return Err(Error::DegenerateBox { w: r.w, h: r.h });
        }
        if !r.fits_in(self.width, self.height) {
            return Err(Error::OutOfBounds(r));
        }
        let mut data = Vec::with_capacity(r.area() as usize * 3);
        let stride = self.width as usize * 3;
        for row in r.y..r.y1() {
            let start = row as usize * stride + r.x as usize * 3;
            data.extend_from_slice(&self.data[start..start + r.w as usize * 3]);
        }
        Ok(RgbImage {
            width: r.w,
            height: r.h,
            data,
        })
    }

    /// Copy `src` into `self` with its top-left corner at `(x, y)`.
    pub fn paste(&mut self, src: &RgbImage, x: u32, y: u32) -> Result<()> {
        let r = Rect::new(x, y, src.width, src.height);
        if !r.fits_in(self.width, self.height) {
            return Err(Error::OutOfBounds(r));
        }
        let stride = self.width as usize * 3;
        let row_len = src.width as usize * 3;
        for row in 0..src.height as usize {
            let dst = (y as usize + row) * stride + x as usize * 3;
            let s = row * row_len;
            self.data[dst..dst + row_len].copy_from_slice(&src.data[s..s + row_len]);
        }
        Ok(())
    }

    /// Integer BT.601 luma, rounded half up.
    pub fn to_gray(&self) -> GrayImage {
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| luma(p[0], p[1], p[2]))
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Bilinear resize with half-pixel centers in 11-bit fixed point.
    pub fn resize_bilinear(&self, width: u32, height: u32) -> RgbImage {
        if width == self.width && height == self.height {
            return self.clone();
        }
        if self.width == 0 || self.height == 0 || width == 0 || height == 0 {
            return RgbImage::new(width, height, [0, 0, 0]);
        }
        let xs = sample_axis(self.width, width);
        let ys = sample_axis(self.height, height);
        let mut out = RgbImage::new(width, height, [0, 0, 0]);
        for (dy, &(y0, y1, fy)) in ys.iter().enumerate() {
            for (dx, &(x0, x1, fx)) in xs.iter().enumerate() {
                let a = self.get(x0, y0);
                let b = self.get(x1, y0);
                let c = self.get(x0, y1);
                let d = self.get(x1, y1);
                let mut px = [0u8; 3];
                for ch in 0..3 {
                    let top = a[ch] as u64 * (FP_ONE - fx) + b[ch] as u64 * fx;
                    let bottom = c[ch] as u64 * (FP_ONE - fx) + d[ch] as u64 * fx;
                    let v = top * (FP_ONE - fy) + bottom * fy;
                    px[ch] = ((v + (FP_ONE * FP_ONE) / 2) >> (2 * FP_BITS)) as u8;
                }
                out.set(dx as u32, dy as u32, px);
            }
        }
        out
    }
}

const FP_BITS: u32 = 11;
const FP_ONE: u64 = 1 << FP_BITS;

/// Source taps and fractional weight for each destination coordinate.
fn sample_axis(src: u32, dst: u32) -> Vec<(u32, u32, u64)> {
    let (src, dst) = (src as i64, dst as i64);
    (0..dst)
        .map(|d| {
            // source coordinate = ((2d + 1) * src - dst) / (2 * dst)
            let num = (2 * d + 1) * src - dst;
            let fixed = if num <= 0 {
                0
            } else {
                (num << FP_BITS) / (2 * dst)
            };
            let max = (src - 1) << FP_BITS;
            let fixed = fixed.min(max);
            let i0 = fixed >> FP_BITS;
            let frac = (fixed & (FP_ONE as i64 - 1)) as u64;
            let i1 = (i0 + 1).min(src - 1);
            (i0 as u32, i1 as u32, frac)
        })
        .collect()
}

#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// 8-bit single-channel image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, fill: u8) -> Self {
        Self {
            width,
            height,
            data: vec![fill; width as usize * height as usize],
        }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: expected,
            });
        }
        Ok(Self { width, height, data })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        self.data[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn crop(&self, r: Rect) -> Result<GrayImage> {
        if r.is_empty() {
            return Err(Error::DegenerateBox { w: r.w, h: r.h });
        }
        if !r.fits_in(self.width, self.height) {
            return Err(Error::OutOfBounds(r));
        }
        let mut data = Vec::with_capacity(r.area() as usize);
        for row in r.y..r.y1() {
            let start = row as usize * self.width as usize + r.x as usize;
            data.extend_from_slice(&self.data[start..start + r.w as usize]);
        }
        Ok(GrayImage {
            width: r.w,
            height: r.h,
            data,
        })
    }

    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &v in &self.data {
            hist[v as usize] += 1;
        }
        hist
    }
}

/// Boolean per-pixel mask (`true` = set).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Self::filled(width, height, false)
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![value; width as usize * height as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(Error::DimensionMismatch {
                left: bits.len(),
                right: expected,
            });
        }
        Ok(Self { width, height, bits })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Bounding box of the set pixels.
    pub fn bounding_box(&self) -> Option<Rect> {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x + 1);
                    y1 = y1.max(y + 1);
                }
            }
        }
        (x0 != u32::MAX).then(|| Rect::from_corners(x0, y0, x1, y1))
    }

    /// Intersection over union; two empty masks score 1.
    pub fn iou(&self, other: &Mask) -> f64 {
        let mut inter = 0usize;
        let mut union = 0usize;
        for (a, b) in self.bits.iter().zip(&other.bits) {
            inter += (*a && *b) as usize;
            union += (*a || *b) as usize;
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}
