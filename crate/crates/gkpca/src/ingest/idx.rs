//! IDX files (the MNIST container format): big-endian headers followed by
//! unsigned bytes.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::{DataKind, DataMatrix, Dataset, Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// `count · rows · cols` pixels, image after image, row-major.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn count(&self) -> usize {
        if self.rows * self.cols == 0 {
            0
        } else {
            self.pixels.len() / (self.rows * self.cols)
        }
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let sz = self.rows * self.cols;
        &self.pixels[i * sz..(i + 1) * sz]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.pixels.len());
        for v in [IMAGES_MAGIC, self.count() as u32, self.rows as u32, self.cols as u32] {
            out.extend_from_slice(&v.to_be_bytes());
        }
        out.extend_from_slice(&self.pixels);
        out
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::format("IDX header truncated"))
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::format(format!(
            "bad IDX image magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"
        )));
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::format("IDX images have a zero dimension"));
    }
    let want = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::format("IDX image dimensions overflow"))?;
    let body = &bytes[16..];
    if body.len() != want {
        return Err(Error::format(format!(
            "IDX image payload is {} bytes, header implies {want}",
            body.len()
        )));
    }
    Ok(IdxImages {
        rows,
        cols,
        pixels: body.to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(Error::format(format!(
            "bad IDX label magic {magic:#010x}, expected {LABELS_MAGIC:#010x}"
        )));
    }
    let count = be_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(Error::format(format!(
            "IDX label payload is {} bytes, header says {count}",
            body.len()
        )));
    }
    Ok(body.to_vec())
}

pub fn labels_to_bytes(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Builds a dataset from parsed images and labels. With `digits`, only those
/// classes are kept; with `limit_per_class`, only the first that many of each
/// class in file order. Pixels are scaled to `[0, 1]`.
pub fn select_idx(
    images: &IdxImages,
    labels: &[u8],
    digits: Option<&[u8]>,
    limit_per_class: Option<usize>,
) -> Result<Dataset> {
    if images.count() != labels.len() {
        return Err(Error::format(format!(
            "{} images but {} labels",
            images.count(),
            labels.len()
        )));
    }
    let wanted: Option<BTreeSet<u8>> = match digits {
        Some([]) => return Err(Error::input("digit filter is empty")),
        Some(d) => Some(d.iter().copied().collect()),
        None => None,
    };
    let mut taken: HashMap<u8, usize> = HashMap::new();
    let mut keep = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if wanted.as_ref().is_some_and(|w| !w.contains(&l)) {
            continue;
        }
        let c = taken.entry(l).or_default();
        if limit_per_class.is_some_and(|lim| *c >= lim) {
            continue;
        }
        *c += 1;
        keep.push(i);
    }
    let dim = images.rows * images.cols;
    let mut values = Vec::with_capacity(keep.len() * dim);
    for &i in &keep {
        values.extend(images.image(i).iter().map(|&p| f64::from(p) / 255.0));
    }
    Dataset::new(
        DataMatrix::new(keep.len(), dim, values)?,
        Some(keep.iter().map(|&i| i64::from(labels[i])).collect()),
        DataKind::ImageGrid {
            width: images.cols,
            height: images.rows,
        },
    )
}

pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    digits: Option<&[u8]>,
    limit_per_class: Option<usize>,
) -> Result<Dataset> {
    let images = parse_idx_images(&fs::read(images_path)?)?;
    let labels = parse_idx_labels(&fs::read(labels_path)?)?;
    select_idx(&images, &labels, digits, limit_per_class)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth() -> (IdxImages, Vec<u8>) {
        let pixels: Vec<u8> = (0..6 * 4).map(|v| (v * 11) as u8).collect();
        (
            IdxImages {
                rows: 2,
                cols: 2,
                pixels,
            },
            vec![0, 1, 2, 0, 1, 0],
        )
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let (img, lab) = synth();
        let bytes = img.to_bytes();
        assert_eq!(parse_idx_images(&bytes).unwrap().to_bytes(), bytes);
        let lb = labels_to_bytes(&lab);
        assert_eq!(labels_to_bytes(&parse_idx_labels(&lb).unwrap()), lb);
    }

    #[test]
    fn header_fields() {
        let (img, _) = synth();
        let bytes = img.to_bytes();
        assert_eq!(&bytes[..4], &[0, 0, 8, 3]);
        assert_eq!(&bytes[4..8], &6u32.to_be_bytes());
    }

    #[test]
    fn filter_and_limit_in_file_order() {
        let (img, lab) = synth();
        let ds = select_idx(&img, &lab, Some(&[0, 1]), Some(2)).unwrap();
        assert_eq!(ds.labels.as_deref(), Some(&[0, 1, 0, 1][..]));
        assert_eq!(ds.len(), 4);
        // row 2 of the dataset is image 3
        assert_eq!(ds.x.row(2)[0], f64::from(img.image(3)[0]) / 255.0);
        assert_eq!(ds.kind, DataKind::ImageGrid { width: 2, height: 2 });
        assert!(ds.x.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn empty_filter_is_input_error() {
        let (img, lab) = synth();
        assert!(matches!(select_idx(&img, &lab, Some(&[]), None), Err(Error::Input(_))));
    }

    #[test]
    fn bad_magic_and_truncation() {
        let (img, lab) = synth();
        let mut bytes = img.to_bytes();
        assert!(parse_idx_labels(&bytes).is_err());
        bytes.pop();
        assert!(matches!(parse_idx_images(&bytes), Err(Error::Format(_))));
        assert!(parse_idx_images(&bytes[..10]).is_err());
        let lb = labels_to_bytes(&lab);
        assert!(parse_idx_labels(&lb[..lb.len() - 1]).is_err());
    }

    #[test]
    fn count_mismatch() {
        let (img, _) = synth();
        assert!(select_idx(&img, &[0, 1], None, None).is_err());
    }
}
