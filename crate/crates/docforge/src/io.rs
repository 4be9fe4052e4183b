//! Atomic file output, PNG/JPEG decoding and line-delimited JSON.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use docforge_core::{GrayImage, RgbImage};
use serde::Serialize;

use crate::{Error, Result};

fn temp_beside(path: &Path) -> Result<tempfile::NamedTempFile> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut b = tempfile::Builder::new();
    b.prefix(".docforge-");
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        b.permissions(fs::Permissions::from_mode(0o644));
    }
    b.tempfile_in(&dir).map_err(|e| Error::io(&dir, e))
}

fn persist(tmp: tempfile::NamedTempFile, path: &Path) -> Result<()> {
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Write `bytes` to a temporary file beside `path`, then rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = temp_beside(path)?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    persist(tmp, path)
}

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| Error::format(path, e.to_string()))?;
    let rgb = img.into_rgb8();
    let (w, h) = rgb.dimensions();
    Ok(RgbImage::from_raw(w, h, rgb.into_raw())?)
}

pub fn encode_png_rgb(img: &RgbImage) -> Vec<u8> {
    encode_png(img.as_raw(), img.width(), img.height(), image::ExtendedColorType::Rgb8)
}

pub fn encode_png_gray(img: &GrayImage) -> Vec<u8> {
    encode_png(img.as_raw(), img.width(), img.height(), image::ExtendedColorType::L8)
}

fn encode_png(raw: &[u8], w: u32, h: u32, color: image::ExtendedColorType) -> Vec<u8> {
    use image::ImageEncoder;
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(raw, w, h, color)
        .expect("in-memory PNG encoding of a well-formed raster");
    out
}

pub fn decode_png_rgb(bytes: &[u8]) -> Result<RgbImage> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format("<inline>", e.to_string()))?
        .into_rgb8();
    let (w, h) = img.dimensions();
    Ok(RgbImage::from_raw(w, h, img.into_raw())?)
}

/// First line of every line-delimited output.
#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct Header {
    pub kind: String,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
}

impl Header {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            kind: "header".into(),
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
        }
    }
}

/// Line-delimited JSON streamed into a temporary file and renamed into place
/// by [`Jsonl::finish`]. Dropping it unfinished leaves `path` untouched.
pub struct Jsonl {
    path: PathBuf,
    out: std::io::BufWriter<tempfile::NamedTempFile>,
    records: usize,
}

impl Jsonl {
    pub fn create(path: &Path, header: &Header) -> Result<Self> {
        let mut j = Self {
            path: path.to_path_buf(),
            out: std::io::BufWriter::new(temp_beside(path)?),
            records: 0,
        };
        j.line(header)?;
        Ok(j)
    }

    pub fn push<T: Serialize>(&mut self, record: &T) -> Result<()> {
        self.line(record)?;
        self.records += 1;
        Ok(())
    }

    fn line<T: Serialize>(&mut self, v: &T) -> Result<()> {
        serde_json::to_writer(&mut self.out, v).map_err(|e| Error::io(&self.path, e.into()))?;
        self.out.write_all(b"\n").map_err(|e| Error::io(&self.path, e))
    }

    pub fn records(&self) -> usize {
        self.records
    }

    /// Returns the number of records written, header excluded.
    pub fn finish(self) -> Result<usize> {
        let tmp = self.out.into_inner().map_err(|e| Error::io(&self.path, e.into_error()))?;
        persist(tmp, &self.path)?;
        Ok(self.records)
    }
}

/// Non-empty lines of a text file with their 1-based line numbers.
pub fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

/// Records of a line-delimited file, skipping a leading header line if any.
pub fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(Option<Header>, Vec<T>)> {
    let mut header = None;
    let mut out = Vec::new();
    for (n, line) in read_lines(path)? {
        if out.is_empty() && header.is_none() {
            if let Ok(h) = serde_json::from_str::<Header>(&line) {
                if h.kind == "header" {
                    header = Some(h);
                    continue;
                }
            }
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::format(path, format!("line {n}: {e}")))?;
        out.push(rec);
    }
    Ok((header, out))
}

/// File-name-safe form of a document id.
pub fn file_stem(doc_id: &str) -> String {
    doc_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}
