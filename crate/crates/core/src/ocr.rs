//! Character-level OCR records and per-document statistics.

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Rect, Result};

/// One OCR character box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharBox {
    pub text: String,
    pub rect: Rect,
}

impl CharBox {
    pub fn new(text: impl Into<String>, x: u32, y: u32, w: u32, h: u32) -> Self {
        Self {
            text: text.into(),
            rect: Rect::new(x, y, w, h),
        }
    }
}

/// Why a character box was rejected during validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    OutOfBounds,
    Degenerate,
    EmptyText,
}

/// A validated document: image reference, dimensions and in-bounds characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub chars: Vec<CharBox>,
}

/// Result of validating raw OCR against the image dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub record: DocumentRecord,
    pub dropped: Vec<(usize, DropReason)>,
}

impl DocumentRecord {
    /// Drops (never clamps) characters that fall outside the image, have a zero
    /// extent, or carry no text.
    ///
    /// Multi-codepoint boxes (ligatures) are kept and count as one character.
    pub fn validate(
        doc_id: impl Into<String>,
        image: impl Into<String>,
        width: u32,
        height: u32,
        chars: Vec<CharBox>,
    ) -> Result<Validated> {
        let mut kept = Vec::with_capacity(chars.len());
        let mut dropped = Vec::new();
        for (i, c) in chars.into_iter().enumerate() {
            let reason = if c.text.is_empty() {
                Some(DropReason::EmptyText)
            } else if c.rect.is_empty() {
                Some(DropReason::Degenerate)
            } else if !c.rect.fits_in(width, height) {
                Some(DropReason::OutOfBounds)
            } else {
                None
            };
            match reason {
                Some(r) => dropped.push((i, r)),
                None => kept.push(c),
            }
        }
        if kept.is_empty() {
            return Err(Error::NoCharacters);
        }
        Ok(Validated {
            record: DocumentRecord {
                doc_id: doc_id.into(),
                image: image.into(),
                width,
                height,
                chars: kept,
            },
            dropped,
        })
    }
}

/// Mean character width and height of a document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharStats {
    pub mean_width: f64,
    pub mean_height: f64,
}

pub fn compute_char_stats(chars: &[CharBox]) -> Result<CharStats> {
    if chars.is_empty() {
        return Err(Error::NoCharacters);
    }
    let (sw, sh) = chars.iter().fold((0u64, 0u64), |(w, h), c| {
        (w + c.rect.w as u64, h + c.rect.h as u64)
    });
    let n = chars.len() as f64;
    Ok(CharStats {
        mean_width: sw as f64 / n,
        mean_height: sh as f64 / n,
    })
}
