//! Field file formats.
//!
//! `PHF2` is the lossless interchange format: a 16-byte header (`b"PHF2"`,
//! then version, rows and cols as little-endian `u32`) followed by
//! `rows * cols` little-endian `f64` values in row-major order.
//!
//! The 16-bit graymap export is for viewing only.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use image::DynamicImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::phase::WrappedPhase;

pub const MAGIC: &[u8; 4] = b"PHF2";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

pub fn encode_field(field: &Field2D) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(field.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(field.cols() as u32).to_le_bytes());
    for v in field.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses a PHF2 buffer. `origin` only labels errors.
pub fn decode_field(bytes: &[u8], origin: &Path) -> Result<Field2D> {
    let bad = |reason: String| Error::Format {
        path: origin.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(bad("missing PHF2 magic".into()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let (rows, cols) = (word(8) as usize, word(12) as usize);
    let expected = HEADER_LEN + 8 * rows * cols;
    if bytes.len() != expected {
        return Err(bad(format!(
            "{rows}x{cols} field needs {expected} bytes, file has {}",
            bytes.len()
        )));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Field2D::new(rows, cols, data).map_err(|e| bad(e.to_string()))
}

pub fn write_field(path: &Path, field: &Field2D) -> Result<()> {
    fs::write(path, encode_field(field)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_field(path: &Path) -> Result<Field2D> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_field(&bytes, path)
}

/// Maps `[-pi, pi]` linearly onto `[0, 65535]`, clamping outside values.
pub fn phase_to_gray16(v: f64) -> u16 {
    (((v + PI) / (2.0 * PI)).clamp(0.0, 1.0) * 65535.0).round() as u16
}

/// Writes a 16-bit binary portable graymap (`P5`, maxval 65535).
pub fn export_graymap(path: &Path, field: &Field2D) -> Result<()> {
    export_graymap_with(path, field, phase_to_gray16)
}

/// Graymap export with a caller-chosen value mapping. Samples are stored
/// big-endian as the `P5` format requires for maxval > 255.
pub fn export_graymap_with(path: &Path, field: &Field2D, map: impl Fn(f64) -> u16) -> Result<()> {
    let (m, n) = field.shape();
    let mut out = format!("P5\n{n} {m}\n65535\n").into_bytes();
    out.reserve(2 * field.len());
    for &v in field.as_slice() {
        out.extend_from_slice(&map(v).to_be_bytes());
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// How grey levels were turned into phase by [`import_grayscale`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImportMapping {
    pub bit_depth: u8,
    pub max_level: u32,
    /// `psi = offset + scale * level`, then folded into `(-pi, pi]`.
    pub offset: f64,
    pub scale: f64,
}

/// Reads an 8- or 16-bit greyscale image (PNG or PNM) as wrapped phase,
/// mapping level 0 to `-pi` (folded onto `+pi`) and the maximum level to `pi`.
pub fn import_grayscale(path: &Path) -> Result<(WrappedPhase, ImportMapping)> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let sixteen = matches!(
        img,
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) | DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_)
    );
    let (w, h, levels): (u32, u32, Vec<u32>) = if sixteen {
        let g = img.into_luma16();
        (g.width(), g.height(), g.into_raw().into_iter().map(u32::from).collect())
    } else {
        let g = img.into_luma8();
        (g.width(), g.height(), g.into_raw().into_iter().map(u32::from).collect())
    };
    let max_level = if sixteen { 65535 } else { 255 };
    let mapping = ImportMapping {
        bit_depth: if sixteen { 16 } else { 8 },
        max_level,
        offset: -PI,
        scale: 2.0 * PI / max_level as f64,
    };
    let values = levels
        .into_iter()
        .map(|l| {
            let v = mapping.offset + mapping.scale * l as f64;
            if v <= -PI {
                v + 2.0 * PI
            } else {
                v.min(PI)
            }
        })
        .collect();
    let field = Field2D::new(h as usize, w as usize, values)?;
    Ok((WrappedPhase::new(field)?, mapping))
}
