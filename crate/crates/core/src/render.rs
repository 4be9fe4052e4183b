//! Text rasterization into an existing background crop.
//!
//! Scales are integer percentages. At scale `k` a font unit `u` starts at
//! pixel `floor(u * k / 100)` and a lit unit paints a square of side
//! `stroke = max(1, round(k / 100))`.

use crate::font::Font;
use crate::raster::{Mask, RgbImage};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FontSpec {
    pub font_id: alloc::string::String,
    /// Scale in hundredths.
    pub scale_pct: u32,
    pub stroke: u32,
}

impl FontSpec {
    pub fn scale(&self) -> f64 {
        self.scale_pct as f64 / 100.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedPatch {
    pub pixels: RgbImage,
    pub glyph_mask: Mask,
    pub spec: FontSpec,
}

pub fn stroke_for(scale_pct: u32) -> u32 {
    ((scale_pct + 50) / 100).max(1)
}

fn unit_to_px(u: u32, scale_pct: u32) -> u32 {
    (u as u64 * scale_pct as u64 / 100) as u32
}

/// Pixel extent of `units` laid out at `scale_pct`.
pub fn measure_units(units: (u32, u32), scale_pct: u32) -> (u32, u32) {
    let s = stroke_for(scale_pct);
    let f = |n: u32| if n == 0 { 0 } else { unit_to_px(n - 1, scale_pct) + s };
    (f(units.0), f(units.1))
}

pub fn measure_text(text: &str, font: &Font, scale_pct: u32) -> (u32, u32) {
    measure_units(font.text_units(text), scale_pct)
}

/// Margin on every side: 10% of the region height, rounded.
pub fn default_margin(h: u32) -> u32 {
    (h + 5) / 10
}

/// Largest scale (1/100 resolution) whose extent fits `(w - 2mx) x (h - 2my)`.
pub fn fit_text_scale(text: &str, font: &Font, w: u32, h: u32, margin_x: u32, margin_y: u32) -> Result<FontSpec> {
    if text.is_empty() {
        return Err(Error::EmptyText);
    }
    let no_fit = Error::NoFeasibleScale { w, h };
    let vw = w.checked_sub(2 * margin_x).filter(|&v| v > 0).ok_or(no_fit.clone())?;
    let vh = h.checked_sub(2 * margin_y).filter(|&v| v > 0).ok_or(no_fit.clone())?;
    let units = font.text_units(text);
    let fits = |k: u32| {
        let (ew, eh) = measure_units(units, k);
        ew <= vw && eh <= vh
    };
    if !fits(1) {
        return Err(no_fit);
    }
    // extent is monotone in k; at k = 100 * max(vw, vh) + 100 the stroke alone overflows
    let (mut lo, mut hi) = (1u32, 100 * vw.max(vh) + 100);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FontSpec {
        font_id: font.id.clone(),
        scale_pct: lo,
        stroke: stroke_for(lo),
    })
}

/// Glyph coverage of `text` at `spec`, placed at `(ox, oy)` in a `w x h` mask.
fn glyph_coverage(text: &str, font: &Font, scale_pct: u32, ox: u32, oy: u32, w: u32, h: u32) -> Mask {
    let mut mask = Mask::new(w, h);
    let s = stroke_for(scale_pct);
    for (i, c) in text.chars().enumerate() {
        let g = font.glyph(c);
        let base = i as u32 * font.advance;
        for col in 0..g.width() {
            let px = ox + unit_to_px(base + col, scale_pct);
            for row in 0..font.height {
                if !g.bit(col, row) {
                    continue;
                }
                let py = oy + unit_to_px(row, scale_pct);
                for y in py..(py + s).min(h) {
                    for x in px..(px + s).min(w) {
                        mask.set(x, y, true);
                    }
                }
            }
        }
    }
    mask
}

/// Render `text` fitted and centred on a copy of `background`.
pub fn render_text(text: &str, font: &Font, color: [u8; 3], background: &RgbImage) -> Result<RenderedPatch> {
    let (w, h) = background.dimensions();
    let m = default_margin(h);
    let spec = fit_text_scale(text, font, w, h, m, m)?;
    render_with_spec(text, font, &spec, color, background)
}

pub fn render_with_spec(
    text: &str,
    font: &Font,
    spec: &FontSpec,
    color: [u8; 3],
    background: &RgbImage,
) -> Result<RenderedPatch> {
    let (w, h) = background.dimensions();
    let (ew, eh) = measure_text(text, font, spec.scale_pct);
    if ew > w || eh > h {
        return Err(Error::NoFeasibleScale { w, h });
    }
    let glyph_mask = glyph_coverage(text, font, spec.scale_pct, (w - ew) / 2, (h - eh) / 2, w, h);
    let mut pixels = background.clone();
    for (i, &on) in glyph_mask.bits().iter().enumerate() {
        if on {
            pixels.put(i, color);
        }
    }
    Ok(RenderedPatch {
        pixels,
        glyph_mask,
        spec: spec.clone(),
    })
}
