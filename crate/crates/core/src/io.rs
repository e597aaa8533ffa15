//! Grayscale image and binary tensor file I/O.
//!
//! Images are read as 8-bit luminance and scaled to `[0, 1]`. Writing
//! clamps to `[0, 1]` and quantizes with `round(v * 255)`, halves rounding up.
//! `.pgm` output is binary P5 with a `P5\n<w> <h> 255\n` header.
//!
//! The tensor format is little-endian throughout:
//!
//! ```text
//! magic   8 bytes   b"GFCTNSR1"
//! rank    u64
//! dims    rank x u64
//! values  product(dims) x f64, row-major
//! ```

use std::fs;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, GrayImage, ImageEncoder, ImageFormat};

use crate::error::{Error, Result};
use crate::field::{FeatureBatch, ScalarField};

pub const TENSOR_MAGIC: &[u8; 8] = b"GFCTNSR1";

/// Extensions [`load_image`] and [`save_image`] understand.
pub const IMAGE_EXTENSIONS: &[&str] = &["pgm", "pnm", "png"];

fn image_format(path: &Path) -> Result<ImageFormat> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" | "pnm" => Ok(ImageFormat::Pnm),
        "png" => Ok(ImageFormat::Png),
        _ => Err(Error::format(path, format!("unsupported image extension {ext:?}"))),
    }
}

/// Whether `path` has an extension [`load_image`] accepts.
pub fn is_image_path(path: &Path) -> bool {
    image_format(path).is_ok()
}

/// Reads an 8-bit grayscale image, converting colour rasters to luminance.
pub fn load_image(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let format = image_format(path)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let img = image::load_from_memory_with_format(&bytes, format)
        .map_err(|e| Error::format(path, e.to_string()))?
        .into_luma8();
    let (w, h) = img.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::format(path, "image has zero size"));
    }
    let values = img.into_raw().into_iter().map(|b| f64::from(b) / 255.0).collect();
    Ok(ScalarField::from_raw(h as usize, w as usize, values))
}

/// Quantizes one value to a byte: clamp to `[0, 1]`, then `floor(v * 255 + 0.5)`.
pub fn quantize(value: f64) -> u8 {
    (value.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Writes an 8-bit grayscale image; the format follows the extension.
pub fn save_image(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = image_format(path)?;
    let bytes: Vec<u8> = field.values().iter().map(|&v| quantize(v)).collect();
    let (w, h) = (field.width() as u32, field.height() as u32);
    let mut encoded = Vec::new();
    let written = match format {
        ImageFormat::Pnm => PnmEncoder::new(&mut encoded)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&bytes, w, h, ExtendedColorType::L8),
        _ => GrayImage::from_raw(w, h, bytes)
            .expect("buffer length matches dimensions")
            .write_to(&mut std::io::Cursor::new(&mut encoded), format),
    };
    written.map_err(|e| Error::format(path, e.to_string()))?;
    fs::write(path, encoded).map_err(|e| Error::io(path, e))
}

/// A raw tensor read from disk: shape plus row-major values.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

pub fn encode_tensor(shape: &[usize], values: &[f64]) -> Vec<u8> {
    debug_assert_eq!(shape.iter().product::<usize>(), values.len());
    let mut out = Vec::with_capacity(16 + 8 * shape.len() + 8 * values.len());
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&(shape.len() as u64).to_le_bytes());
    for &d in shape {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor, String> {
    fn take_u64(bytes: &[u8], at: &mut usize) -> Result<u64, String> {
        let chunk = bytes
            .get(*at..*at + 8)
            .ok_or_else(|| "truncated header".to_string())?;
        *at += 8;
        Ok(u64::from_le_bytes(chunk.try_into().unwrap()))
    }

    if bytes.len() < 8 || &bytes[..8] != TENSOR_MAGIC {
        return Err("missing tensor magic".into());
    }
    let mut at = 8;
    let rank = take_u64(bytes, &mut at)?;
    if rank == 0 || rank > 8 {
        return Err(format!("unsupported rank {rank}"));
    }
    let mut shape = Vec::with_capacity(rank as usize);
    for _ in 0..rank {
        shape.push(take_u64(bytes, &mut at)? as usize);
    }
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or("tensor dimensions overflow")?;
    let body = &bytes[at..];
    if count.checked_mul(8) != Some(body.len()) {
        return Err(format!(
            "expected {} payload bytes for shape {shape:?}, found {}",
            count as u128 * 8,
            body.len()
        ));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Tensor { shape, values })
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_tensor(&bytes).map_err(|reason| Error::format(path, reason))
}

pub fn write_tensor(path: impl AsRef<Path>, shape: &[usize], values: &[f64]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_tensor(shape, values)).map_err(|e| Error::io(path, e))
}

/// Reads a rank-4 `[N, C, H, W]` tensor. Rank 2 and 3 inputs are promoted
/// by prepending unit dimensions.
pub fn read_batch(path: impl AsRef<Path>) -> Result<FeatureBatch> {
    let t = read_tensor(path)?;
    let dims: [usize; 4] = match t.shape.as_slice() {
        &[h, w] => [1, 1, h, w],
        &[c, h, w] => [1, c, h, w],
        &[n, c, h, w] => [n, c, h, w],
        other => {
            return Err(Error::Dimension(format!(
                "expected a tensor of rank 2 to 4, got shape {other:?}"
            )))
        }
    };
    FeatureBatch::new(dims[0], dims[1], dims[2], dims[3], t.values)
}

pub fn write_batch(path: impl AsRef<Path>, batch: &FeatureBatch) -> Result<()> {
    write_tensor(path, &batch.shape(), batch.values())
}

/// Reads a single 2-D field from a tensor whose non-spatial dimensions are all 1.
pub fn read_field_tensor(path: impl AsRef<Path>) -> Result<ScalarField> {
    let t = read_tensor(path)?;
    let rank = t.shape.len();
    if rank < 2 || t.shape[..rank - 2].iter().any(|&d| d != 1) {
        return Err(Error::Dimension(format!(
            "expected a single 2-D field, got shape {:?}",
            t.shape
        )));
    }
    ScalarField::new(t.shape[rank - 2], t.shape[rank - 1], t.values)
}

pub fn write_field_tensor(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    write_tensor(path, &[field.height(), field.width()], field.values())
}

/// Loads a field from an image if the extension is an image type, otherwise
/// from the tensor format.
pub fn load_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    if is_image_path(path) {
        load_image(path)
    } else {
        read_field_tensor(path)
    }
}

/// Saves a field as an image or a tensor, by extension. Images are clamped
/// to `[0, 1]`; tensors keep full precision.
pub fn save_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_image_path(path) {
        save_image(field, path)
    } else {
        write_field_tensor(path, field)
    }
}
