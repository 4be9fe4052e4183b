//! Leakage filter: exact hashes of fixed 64x64 grayscale patches.

use alloc::collections::{BTreeMap, BTreeSet};

use crate::raster::GrayImage;
use crate::rng::fnv1a64_extend;
use crate::{Error, Result};

pub const PATCH: u32 = 64;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DedupParams {
    pub stride: u32,
    /// Ignore patches whose pixels are all equal (blank margins).
    pub skip_constant_patches: bool,
}

impl Default for DedupParams {
    fn default() -> Self {
        Self {
            stride: 64,
            skip_constant_patches: false,
        }
    }
}

impl DedupParams {
    pub fn validate(&self) -> Result<()> {
        if !(1..=PATCH).contains(&self.stride) {
            return Err(Error::InvalidParameter("stride must be in 1..=64"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatchHashSet {
    pub stride: u32,
    pub hashes: BTreeSet<u64>,
}

fn offsets(dim: u32, stride: u32) -> impl Iterator<Item = u32> {
    let last = dim.saturating_sub(PATCH);
    (0..=last).step_by(stride as usize)
}

/// FNV-1a over the patch at `(x, y)` in row-major order; pixels past the
/// image edge read as zero. Returns `None` for a constant patch when
/// `skip_constant` is set.
pub fn patch_hash(gray: &GrayImage, x: u32, y: u32, skip_constant: bool) -> Option<u64> {
    let (w, h) = (gray.width(), gray.height());
    let raw = gray.as_raw();
    let mut hash = FNV_OFFSET;
    let first = if x < w && y < h { raw[(y * w + x) as usize] } else { 0 };
    let mut constant = true;
    let mut row = [0u8; PATCH as usize];
    for dy in 0..PATCH {
        let yy = y + dy;
        row.fill(0);
        if yy < h {
            let x_end = (x + PATCH).min(w);
            if x < x_end {
                let start = (yy * w + x) as usize;
                let len = (x_end - x) as usize;
                row[..len].copy_from_slice(&raw[start..start + len]);
            }
        }
        if constant && row.iter().any(|&v| v != first) {
            constant = false;
        }
        hash = fnv1a64_extend(hash, &row);
    }
    if skip_constant && constant {
        None
    } else {
        Some(hash)
    }
}

/// Hashes of every stride-aligned patch. Dimensions below 64 contribute one
/// zero-padded patch position.
pub fn patch_hashes(gray: &GrayImage, params: &DedupParams) -> PatchHashSet {
    let mut hashes = BTreeSet::new();
    for y in offsets(gray.height(), params.stride) {
        for x in offsets(gray.width(), params.stride) {
            if let Some(h) = patch_hash(gray, x, y, params.skip_constant_patches) {
                hashes.insert(h);
            }
        }
    }
    PatchHashSet {
        stride: params.stride,
        hashes,
    }
}

/// Union of evaluation hash sets, remembering the lowest eval index per hash.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalIndex {
    owners: BTreeMap<u64, usize>,
}

impl EvalIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, eval_index: usize, set: &PatchHashSet) {
        for &h in &set.hashes {
            self.owners
                .entry(h)
                .and_modify(|o| *o = (*o).min(eval_index))
                .or_insert(eval_index);
        }
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    /// Lowest-index eval image sharing a hash with `train`.
    pub fn first_collision(&self, train: &PatchHashSet) -> Option<usize> {
        train.hashes.iter().filter_map(|h| self.owners.get(h).copied()).min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn noise(w: u32, h: u32, seed: u32) -> GrayImage {
        let mut s = seed.wrapping_mul(2_654_435_761).wrapping_add(1);
        let data: Vec<u8> = (0..w * h)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 17;
                s ^= s << 5;
                (s >> 24) as u8
            })
            .collect();
        GrayImage::from_raw(w, h, data).unwrap()
    }

    #[test]
    fn counts() {
        let p = DedupParams::default();
        assert_eq!(patch_hashes(&noise(64, 64, 1), &p).hashes.len(), 1);
        assert_eq!(patch_hashes(&noise(128, 128, 2), &p).hashes.len(), 4);
        assert_eq!(patch_hashes(&noise(10, 5, 3), &p).hashes.len(), 1);
    }

    #[test]
    fn padding_matches_explicit_zero_pad() {
        let small = noise(10, 5, 3);
        let mut big = GrayImage::new(64, 64, 0);
        for y in 0..5 {
            for x in 0..10 {
                big.set(x, y, small.get(x, y));
            }
        }
        let p = DedupParams::default();
        assert_eq!(patch_hashes(&small, &p), patch_hashes(&big, &p));
    }

    #[test]
    fn skip_constant() {
        let g = GrayImage::new(128, 64, 255);
        let p = DedupParams {
            skip_constant_patches: true,
            ..DedupParams::default()
        };
        assert!(patch_hashes(&g, &p).hashes.is_empty());
        assert_eq!(patch_hashes(&g, &DedupParams::default()).hashes.len(), 1);
    }

    #[test]
    fn first_collision_is_lowest() {
        let p = DedupParams::default();
        let a = patch_hashes(&noise(64, 64, 9), &p);
        let mut idx = EvalIndex::new();
        idx.insert(5, &a);
        idx.insert(2, &a);
        assert_eq!(idx.first_collision(&a), Some(2));
        assert_eq!(idx.first_collision(&patch_hashes(&noise(64, 64, 10), &p)), None);
    }
}
