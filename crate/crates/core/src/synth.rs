//! Synthetic printed pages with exact character boxes, for fixtures and smoke
//! corpora.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::font::{Font, FontSet};
use crate::ocr::CharBox;
use crate::raster::RgbImage;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    /// Integer glyph scale, at least 2.
    pub scale: u32,
    /// Extra rows between lines, in pixels.
    pub line_gap: u32,
    /// Characters per line, inclusive range.
    pub line_chars: (usize, usize),
    /// Probability that a position is a space.
    pub space_probability: f64,
    /// Per-pixel paper noise amplitude.
    pub noise: u8,
    pub font_id: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 480,
            height: 360,
            margin: 16,
            scale: 2,
            line_gap: 10,
            line_chars: (6, 24),
            space_probability: 0.15,
            noise: 6,
            font_id: String::from("mono"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPage {
    pub image: RgbImage,
    pub chars: Vec<CharBox>,
    /// Boxed (non-space) characters per rendered line.
    pub line_lengths: Vec<usize>,
}

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

fn draw_glyph(img: &mut RgbImage, font: &Font, c: char, x: u32, y: u32, scale: u32, ink: [u8; 3]) {
    let g = font.glyph(c);
    for col in 0..g.width() {
        for row in 0..font.height {
            if !g.bit(col, row) {
                continue;
            }
            for dy in 0..scale {
                for dx in 0..scale {
                    img.set(x + col * scale + dx, y + row * scale + dy, ink);
                }
            }
        }
    }
}

/// Lay out random lines of text. Each character box is its glyph cell grown
/// by one pixel on every side.
pub fn synth_page<R: Rng + ?Sized>(config: &SynthConfig, rng: &mut R) -> Result<SynthPage> {
    if config.scale < 2 {
        return Err(Error::InvalidParameter("synthetic glyph scale must be >= 2"));
    }
    let fonts = FontSet::embedded();
    let font = fonts
        .get(&config.font_id)
        .ok_or_else(|| Error::UnknownFont(config.font_id.clone()))?;
    let paper: [u8; 3] = [rng.gen_range(215..=250), rng.gen_range(210..=245), rng.gen_range(200..=240)];
    let ink: [u8; 3] = [rng.gen_range(0..=60), rng.gen_range(0..=60), rng.gen_range(0..=90)];
    let mut image = RgbImage::new(config.width, config.height, paper);
    if config.noise > 0 {
        let n = config.noise as i16;
        for i in 0..image.pixel_count() {
            let d = rng.gen_range(-n..=n);
            let p = image.at(i).map(|v| (v as i16 + d).clamp(0, 255) as u8);
            image.put(i, p);
        }
    }

    let cell_w = font.glyph('M').width() * config.scale;
    let cell_h = font.height * config.scale;
    let adv = font.advance * config.scale;
    let pitch = cell_h + 2 + config.line_gap;
    let usable_w = config.width.saturating_sub(2 * config.margin + cell_w + 2);
    let max_fit = (usable_w / adv) as usize + 1;

    let mut chars = Vec::new();
    let mut line_lengths = Vec::new();
    let mut y = config.margin + 1;
    while y + cell_h + 1 + config.margin <= config.height {
        let (lo, hi) = config.line_chars;
        let n = rng.gen_range(lo..=hi.max(lo)).min(max_fit);
        let mut boxed = 0;
        for i in 0..n {
            let c = if i > 0 && i + 1 < n && rng.gen_bool(config.space_probability) {
                ' '
            } else {
                ALPHABET[rng.gen_range(0..ALPHABET.len())] as char
            };
            if c == ' ' {
                continue;
            }
            let x = config.margin + 1 + i as u32 * adv;
            draw_glyph(&mut image, font, c, x, y, config.scale, ink);
            let mut s = String::new();
            s.push(c);
            chars.push(CharBox::new(s, x - 1, y - 1, cell_w + 2, cell_h + 2));
            boxed += 1;
        }
        if boxed > 0 {
            line_lengths.push(boxed);
        }
        y += pitch;
    }
    Ok(SynthPage {
        image,
        chars,
        line_lengths,
    })
}
