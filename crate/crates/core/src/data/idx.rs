use std::path::Path;

use super::RawTable;
use crate::numkernel::Matrix;
use crate::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Decoded IDX image file: `count` images of `rows x cols` unsigned bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

/// Reads an image/label IDX pair. Pixels are flattened row-major and scaled to `[0, 1]`.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<RawTable> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let ibytes = std::fs::read(ip).map_err(|e| Error::io(ip, e))?;
    let lbytes = std::fs::read(lp).map_err(|e| Error::io(lp, e))?;
    let images = parse_idx_images(&ibytes, ip)?;
    let labels = parse_idx_labels(&lbytes, lp)?;
    if images.count != labels.len() {
        return Err(Error::Format {
            path: lp.to_path_buf(),
            message: format!("{} labels for {} images", labels.len(), images.count),
        });
    }
    let d = images.rows * images.cols;
    let values = images
        .pixels
        .iter()
        .map(|&p| f64::from(p) / 255.0)
        .collect();
    let features = Matrix::new(images.count, d, values)?;
    RawTable::new(features, labels.into_iter().map(i64::from).collect())
}

pub fn parse_idx_images(bytes: &[u8], source: &Path) -> Result<IdxImages> {
    let header = read_header(bytes, source, IMAGES_MAGIC, 3)?;
    let (count, rows, cols) = (header[0], header[1], header[2]);
    if rows == 0 || cols == 0 {
        return Err(format_err(source, "image dimensions must be non-zero"));
    }
    let payload = payload(bytes, source, 16, count * rows * cols)?;
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: payload.to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8], source: &Path) -> Result<Vec<u8>> {
    let header = read_header(bytes, source, LABELS_MAGIC, 1)?;
    Ok(payload(bytes, source, 8, header[0])?.to_vec())
}

/// Serializes images in IDX format (inverse of [`parse_idx_images`]).
pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for n in [images.count, images.rows, images.cols] {
        out.extend_from_slice(&(n as u32).to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn format_err(source: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: source.to_path_buf(),
        message: message.into(),
    }
}

fn read_header(bytes: &[u8], source: &Path, magic: u32, dims: usize) -> Result<Vec<usize>> {
    let need = 4 + 4 * dims;
    if bytes.len() < need {
        return Err(format_err(
            source,
            format!("truncated header: {} bytes", bytes.len()),
        ));
    }
    let word = |k: usize| u32::from_be_bytes([bytes[k], bytes[k + 1], bytes[k + 2], bytes[k + 3]]);
    let found = word(0);
    if found != magic {
        return Err(format_err(
            source,
            format!("bad magic number {found:#010x}, expected {magic:#010x}"),
        ));
    }
    Ok((0..dims).map(|i| word(4 + 4 * i) as usize).collect())
}

fn payload<'a>(bytes: &'a [u8], source: &Path, offset: usize, len: usize) -> Result<&'a [u8]> {
    let body = &bytes[offset..];
    if body.len() < len {
        return Err(format_err(
            source,
            format!("truncated payload: {} bytes, expected {len}", body.len()),
        ));
    }
    if body.len() > len {
        return Err(format_err(
            source,
            format!("{} trailing bytes after payload", body.len() - len),
        ));
    }
    Ok(body)
}
