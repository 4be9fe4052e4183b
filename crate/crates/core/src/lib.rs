//! Core algorithms for building synthetic tampered document images.
//!
//! Everything in this crate operates on in-memory rasters and plain data, so it
//! builds without `std` (an allocator is required). File formats, manifests, the
//! worker pool and the command-line front end live in the `docforge` crate.
//!
//! The pipeline, bottom-up:
//!
//! - [`ocr`] validates character boxes and computes per-document statistics.
//! - [`segments`] clusters characters into lines, enumerates contiguous runs and
//!   injects blank look-alike regions.
//! - [`binarize`] holds Otsu, Sauvola and 8-connected component labelling.
//! - [`quality`] decides whether a box cleanly encloses its characters.
//! - [`similarity`] compares crops through a two-headed embedding.
//! - [`render`] and [`inpaint`] produce new pixels for insertion and removal.
//! - [`mining`] builds contrastive training tuples.
//! - [`generator`] ties it together into tampered image / mask pairs.
//! - [`dedup`] hashes fixed-size patches to detect leakage between corpora.
#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod augment;
pub mod binarize;
pub mod dedup;
pub mod error;
pub mod font;
pub mod generator;
pub mod geom;
pub mod inpaint;
pub mod math;
pub mod mining;
pub mod ocr;
pub mod quality;
pub mod raster;
pub mod render;
pub mod rng;
pub mod segments;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};
pub use geom::Rect;
pub use raster::{GrayImage, Mask, RgbImage};
