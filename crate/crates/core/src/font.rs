//! Bitmap fonts for text insertion.
//!
//! Glyphs are column bitmaps: one `u16` per column, bit 0 is the top row.
//! Three faces are embedded (`bold`, `mono`, `wide`), all derived from one
//! 5x7 ASCII table, so rendering never depends on files outside the crate.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// 5x7 columns for `' '..='~'`.
const BASE_5X7: [[u8; 5]; 95] = [
    [0x00, 0x00, 0x00, 0x00, 0x00],
    [0x00, 0x00, 0x5F, 0x00, 0x00],
    [0x00, 0x07, 0x00, 0x07, 0x00],
    [0x14, 0x7F, 0x14, 0x7F, 0x14],
    [0x24, 0x2A, 0x7F, 0x2A, 0x12],
    [0x23, 0x13, 0x08, 0x64, 0x62],
    [0x36, 0x49, 0x56, 0x20, 0x50],
    [0x00, 0x05, 0x03, 0x00, 0x00],
    [0x00, 0x1C, 0x22, 0x41, 0x00],
    [0x00, 0x41, 0x22, 0x1C, 0x00],
    [0x14, 0x08, 0x3E, 0x08, 0x14],
    [0x08, 0x08, 0x3E, 0x08, 0x08],
    [0x00, 0x50, 0x30, 0x00, 0x00],
    [0x08, 0x08, 0x08, 0x08, 0x08],
    [0x00, 0x60, 0x60, 0x00, 0x00],
    [0x20, 0x10, 0x08, 0x04, 0x02],
    [0x3E, 0x51, 0x49, 0x45, 0x3E],
    [0x00, 0x42, 0x7F, 0x40, 0x00],
    [0x42, 0x61, 0x51, 0x49, 0x46],
    [0x21, 0x41, 0x45, 0x4B, 0x31],
    [0x18, 0x14, 0x12, 0x7F, 0x10],
    [0x27, 0x45, 0x45, 0x45, 0x39],
    [0x3C, 0x4A, 0x49, 0x49, 0x30],
    [0x01, 0x71, 0x09, 0x05, 0x03],
    [0x36, 0x49, 0x49, 0x49, 0x36],
    [0x06, 0x49, 0x49, 0x29, 0x1E],
    [0x00, 0x36, 0x36, 0x00, 0x00],
    [0x00, 0x56, 0x36, 0x00, 0x00],
    [0x08, 0x14, 0x22, 0x41, 0x00],
    [0x14, 0x14, 0x14, 0x14, 0x14],
    [0x00, 0x41, 0x22, 0x14, 0x08],
    [0x02, 0x01, 0x51, 0x09, 0x06],
    [0x32, 0x49, 0x79, 0x41, 0x3E],
    [0x7E, 0x11, 0x11, 0x11, 0x7E],
    [0x7F, 0x49, 0x49, 0x49, 0x36],
    [0x3E, 0x41, 0x41, 0x41, 0x22],
    [0x7F, 0x41, 0x41, 0x22, 0x1C],
    [0x7F, 0x49, 0x49, 0x49, 0x41],
    [0x7F, 0x09, 0x09, 0x09, 0x01],
    [0x3E, 0x41, 0x49, 0x49, 0x7A],
    [0x7F, 0x08, 0x08, 0x08, 0x7F],
    [0x00, 0x41, 0x7F, 0x41, 0x00],
    [0x20, 0x40, 0x41, 0x3F, 0x01],
    [0x7F, 0x08, 0x14, 0x22, 0x41],
    [0x7F, 0x40, 0x40, 0x40, 0x40],
    [0x7F, 0x02, 0x0C, 0x02, 0x7F],
    [0x7F, 0x04, 0x08, 0x10, 0x7F],
    [0x3E, 0x41, 0x41, 0x41, 0x3E],
    [0x7F, 0x09, 0x09, 0x09, 0x06],
    [0x3E, 0x41, 0x51, 0x21, 0x5E],
    [0x7F, 0x09, 0x19, 0x29, 0x46],
    [0x46, 0x49, 0x49, 0x49, 0x31],
    [0x01, 0x01, 0x7F, 0x01, 0x01],
    [0x3F, 0x40, 0x40, 0x40, 0x3F],
    [0x1F, 0x20, 0x40, 0x20, 0x1F],
    [0x3F, 0x40, 0x38, 0x40, 0x3F],
    [0x63, 0x14, 0x08, 0x14, 0x63],
    [0x07, 0x08, 0x70, 0x08, 0x07],
    [0x61, 0x51, 0x49, 0x45, 0x43],
    [0x00, 0x7F, 0x41, 0x41, 0x00],
    [0x02, 0x04, 0x08, 0x10, 0x20],
    [0x00, 0x41, 0x41, 0x7F, 0x00],
    [0x04, 0x02, 0x01, 0x02, 0x04],
    [0x40, 0x40, 0x40, 0x40, 0x40],
    [0x00, 0x01, 0x02, 0x04, 0x00],
    [0x20, 0x54, 0x54, 0x54, 0x78],
    [0x7F, 0x48, 0x44, 0x44, 0x38],
    [0x38, 0x44, 0x44, 0x44, 0x20],
    [0x38, 0x44, 0x44, 0x48, 0x7F],
    [0x38, 0x54, 0x54, 0x54, 0x18],
    [0x08, 0x7E, 0x09, 0x01, 0x02],
    [0x0C, 0x52, 0x52, 0x52, 0x3E],
    [0x7F, 0x08, 0x04, 0x04, 0x78],
    [0x00, 0x44, 0x7D, 0x40, 0x00],
    [0x20, 0x40, 0x44, 0x3D, 0x00],
    [0x7F, 0x10, 0x28, 0x44, 0x00],
    [0x00, 0x41, 0x7F, 0x40, 0x00],
    [0x7C, 0x04, 0x18, 0x04, 0x78],
    [0x7C, 0x08, 0x04, 0x04, 0x78],
    [0x38, 0x44, 0x44, 0x44, 0x38],
    [0x7C, 0x14, 0x14, 0x14, 0x08],
    [0x08, 0x14, 0x14, 0x18, 0x7C],
    [0x7C, 0x08, 0x04, 0x04, 0x08],
    [0x48, 0x54, 0x54, 0x54, 0x20],
    [0x04, 0x3F, 0x44, 0x40, 0x20],
    [0x3C, 0x40, 0x40, 0x20, 0x7C],
    [0x1C, 0x20, 0x40, 0x20, 0x1C],
    [0x3C, 0x40, 0x30, 0x40, 0x3C],
    [0x44, 0x28, 0x10, 0x28, 0x44],
    [0x0C, 0x50, 0x50, 0x50, 0x3C],
    [0x44, 0x64, 0x54, 0x4C, 0x44],
    [0x00, 0x08, 0x36, 0x41, 0x00],
    [0x00, 0x00, 0x7F, 0x00, 0x00],
    [0x00, 0x41, 0x36, 0x08, 0x00],
    [0x02, 0x01, 0x02, 0x04, 0x02],
];

/// Widest supported glyph height in rows.
pub const MAX_HEIGHT: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glyph {
    pub columns: Vec<u16>,
}

impl Glyph {
    pub fn width(&self) -> u32 {
        self.columns.len() as u32
    }

    pub fn bit(&self, col: u32, row: u32) -> bool {
        self.columns
            .get(col as usize)
            .is_some_and(|c| c >> row & 1 == 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Font {
    pub id: String,
    /// Rows per glyph.
    pub height: u32,
    /// Horizontal pen advance in font units.
    pub advance: u32,
    glyphs: BTreeMap<char, Glyph>,
    fallback: char,
}

impl Font {
    pub fn new(id: impl Into<String>, height: u32, advance: u32, glyphs: BTreeMap<char, Glyph>) -> Result<Self> {
        if height == 0 || height > MAX_HEIGHT {
            return Err(Error::InvalidParameter("font height must be in 1..=16"));
        }
        if advance == 0 {
            return Err(Error::InvalidParameter("font advance must be >= 1"));
        }
        let fallback = if glyphs.contains_key(&'?') {
            '?'
        } else {
            *glyphs
                .keys()
                .next()
                .ok_or(Error::InvalidParameter("font has no glyphs"))?
        };
        Ok(Self {
            id: id.into(),
            height,
            advance,
            glyphs,
            fallback,
        })
    }

    /// Glyph for `c`, or the fallback (`'?'` when present).
    pub fn glyph(&self, c: char) -> &Glyph {
        self.glyphs
            .get(&c)
            .unwrap_or_else(|| &self.glyphs[&self.fallback])
    }

    pub fn has_glyph(&self, c: char) -> bool {
        self.glyphs.contains_key(&c)
    }

    /// Layout width in font units: every character but the last advances the
    /// pen, the last contributes its glyph width.
    pub fn text_units(&self, text: &str) -> (u32, u32) {
        let n = text.chars().count() as u32;
        let last = text.chars().last().map(|c| self.glyph(c).width()).unwrap_or(0);
        let w = if n == 0 { 0 } else { (n - 1) * self.advance + last.max(1) };
        (w, self.height)
    }
}

fn base_glyphs() -> BTreeMap<char, [u8; 5]> {
    (0x20u8..=0x7E)
        .map(|b| (b as char, BASE_5X7[(b - 0x20) as usize]))
        .collect()
}

fn mono() -> Font {
    let glyphs = base_glyphs()
        .into_iter()
        .map(|(c, cols)| {
            (
                c,
                Glyph {
                    columns: cols.iter().map(|&v| v as u16).collect(),
                },
            )
        })
        .collect();
    Font::new("mono", 7, 6, glyphs).expect("embedded font")
}

fn bold() -> Font {
    let glyphs = base_glyphs()
        .into_iter()
        .map(|(c, cols)| {
            let mut out = Vec::with_capacity(6);
            let mut prev = 0u16;
            for &v in cols.iter() {
                out.push(v as u16 | prev);
                prev = v as u16;
            }
            out.push(prev);
            (c, Glyph { columns: out })
        })
        .collect();
    Font::new("bold", 7, 7, glyphs).expect("embedded font")
}

fn wide() -> Font {
    let glyphs = base_glyphs()
        .into_iter()
        .map(|(c, cols)| {
            let columns = cols.iter().flat_map(|&v| [v as u16, v as u16]).collect();
            (c, Glyph { columns })
        })
        .collect();
    Font::new("wide", 7, 12, glyphs).expect("embedded font")
}

/// Fonts in ascending id order; insertion enumerates candidates in this order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FontSet {
    fonts: Vec<Font>,
}

impl FontSet {
    pub fn new(mut fonts: Vec<Font>) -> Result<Self> {
        if fonts.is_empty() {
            return Err(Error::InvalidParameter("font set is empty"));
        }
        fonts.sort_by(|a, b| a.id.cmp(&b.id));
        if fonts.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidParameter("duplicate font id"));
        }
        Ok(Self { fonts })
    }

    /// `bold`, `mono`, `wide`.
    pub fn embedded() -> Self {
        Self::new(alloc::vec![mono(), bold(), wide()]).expect("embedded fonts")
    }

    /// Embedded fonts restricted to `ids`.
    pub fn embedded_subset(ids: &[&str]) -> Result<Self> {
        let all = Self::embedded();
        let mut picked = Vec::new();
        for id in ids {
            picked.push(all.get(id).ok_or_else(|| Error::UnknownFont(id.to_string()))?.clone());
        }
        Self::new(picked)
    }

    pub fn get(&self, id: &str) -> Option<&Font> {
        self.fonts.iter().find(|f| f.id == id)
    }

    pub fn fonts(&self) -> &[Font] {
        &self.fonts
    }

    pub fn len(&self) -> usize {
        self.fonts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fonts.is_empty()
    }
}
