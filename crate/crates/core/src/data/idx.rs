//! IDX binary files (the MNIST distribution format).
//!
//! Big-endian throughout. Image files carry magic `0x00000803` followed by
//! item count, rows and columns as 32-bit integers and then one unsigned byte
//! per pixel. Label files carry magic `0x00000801`, the item count and one
//! byte per label.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, IdxError, Result};
use crate::matrix::DataMatrix;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32, IdxError> {
    match bytes.get(offset..offset + 4) {
        Some(b) => Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]])),
        None => Err(IdxError::Truncated {
            offset: bytes.len(),
            needed: offset + 4 - bytes.len(),
            available: bytes.len().saturating_sub(offset),
        }),
    }
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), IdxError> {
    let found = read_u32(bytes, 0)?;
    if found != expected {
        return Err(IdxError::BadMagic { offset: 0, found, expected });
    }
    Ok(())
}

fn payload(bytes: &[u8], offset: usize, len: usize) -> Result<&[u8], IdxError> {
    let available = bytes.len().saturating_sub(offset);
    if available < len {
        return Err(IdxError::Truncated { offset: bytes.len(), needed: len - available, available });
    }
    Ok(&bytes[offset..offset + len])
}

/// Raw image tensor of an IDX image file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub const HEADER_LEN: usize = 16;

    pub fn parse(bytes: &[u8]) -> Result<Self, IdxError> {
        check_magic(bytes, IMAGES_MAGIC)?;
        let count = read_u32(bytes, 4)? as usize;
        let rows = read_u32(bytes, 8)? as usize;
        let cols = read_u32(bytes, 12)? as usize;
        let len = count
            .checked_mul(rows)
            .and_then(|v| v.checked_mul(cols))
            .ok_or(IdxError::DimensionOverflow { offset: 4 })?;
        let pixels = payload(bytes, Self::HEADER_LEN, len)?.to_vec();
        Ok(Self { count, rows, cols, pixels })
    }

    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let p = self.pixels_per_image();
        &self.pixels[i * p..(i + 1) * p]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::HEADER_LEN + self.pixels.len());
        out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
        for v in [self.count, self.rows, self.cols] {
            out.extend_from_slice(&(v as u32).to_be_bytes());
        }
        out.extend_from_slice(&self.pixels);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxLabels {
    pub labels: Vec<u8>,
}

impl IdxLabels {
    pub const HEADER_LEN: usize = 8;

    pub fn parse(bytes: &[u8]) -> Result<Self, IdxError> {
        check_magic(bytes, LABELS_MAGIC)?;
        let count = read_u32(bytes, 4)? as usize;
        let labels = payload(bytes, Self::HEADER_LEN, count)?.to_vec();
        Ok(Self { labels })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::HEADER_LEN + self.labels.len());
        out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
        out.extend_from_slice(&(self.labels.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.labels);
        out
    }
}

/// Guesses the label file that accompanies an image file following the
/// MNIST naming convention (`*-images-idx3-ubyte` → `*-labels-idx1-ubyte`).
pub fn companion_labels_path(images: &Path) -> Option<PathBuf> {
    let name = images.file_name()?.to_str()?;
    let guess = name.replace("images-idx3", "labels-idx1");
    (guess != name).then(|| images.with_file_name(guess))
}

/// Selection applied while loading an IDX image file.
#[derive(Debug, Clone, Default)]
pub struct IdxQuery {
    pub labels: Option<PathBuf>,
    pub max_rows: Option<usize>,
    pub label_filter: Option<u8>,
}

/// Decoded IDX data: each image flattened row-major and scaled to `[0, 1]`.
pub fn decode_images(
    images: &IdxImages,
    labels: Option<&IdxLabels>,
    max_rows: Option<usize>,
    label_filter: Option<u8>,
) -> Result<(DataMatrix, Option<Vec<u8>>)> {
    if let Some(l) = labels {
        if l.labels.len() != images.count {
            return Err(IdxError::CountMismatch { images: images.count, labels: l.labels.len() }
                .into());
        }
    }
    if label_filter.is_some() && labels.is_none() {
        return Err(Error::invalid("label filter requires a label file"));
    }
    let limit = max_rows.unwrap_or(usize::MAX);
    let dim = images.pixels_per_image();
    let mut values = Vec::new();
    let mut kept = Vec::new();
    for i in 0..images.count {
        if kept.len() >= limit {
            break;
        }
        let label = labels.map(|l| l.labels[i]);
        if let (Some(want), Some(have)) = (label_filter, label) {
            if want != have {
                continue;
            }
        }
        values.extend(images.image(i).iter().map(|&p| f64::from(p) / 255.0));
        kept.push(label.unwrap_or(0));
    }
    let rows = kept.len();
    let matrix = DataMatrix::new(rows, dim, values)?;
    Ok((matrix, labels.map(|_| kept)))
}

/// Loads an IDX image file, optionally restricted to one label and capped in
/// row count. Returns the labels of the retained rows when a label file is
/// available.
pub fn load_idx(path: &Path, query: &IdxQuery) -> Result<(DataMatrix, Option<Vec<u8>>)> {
    let images = IdxImages::parse(&fs::read(path)?)?;
    let labels_path = query.labels.clone().or_else(|| {
        companion_labels_path(path).filter(|p| p.exists())
    });
    let labels = match labels_path {
        Some(p) => Some(IdxLabels::parse(&fs::read(p)?)?),
        None => None,
    };
    decode_images(&images, labels.as_ref(), query.max_rows, query.label_filter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_by_two_file() -> Vec<u8> {
        // magic, count=2, rows=2, cols=2, then 8 pixels, written by hand
        vec![
            0x00, 0x00, 0x08, 0x03, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, //
            0, 255, 128, 64, 255, 0, 0, 0,
        ]
    }

    #[test]
    fn decodes_hand_written_file() {
        let images = IdxImages::parse(&two_by_two_file()).unwrap();
        let (x, labels) = decode_images(&images, None, None, None).unwrap();
        assert!(labels.is_none());
        assert_eq!((x.rows(), x.dim()), (2, 4));
        let expect = [[0.0, 1.0, 0.50196, 0.25098], [1.0, 0.0, 0.0, 0.0]];
        for (row, want) in x.iter_rows().zip(expect) {
            for (a, b) in row.iter().zip(want) {
                assert!((a - b).abs() < 1e-5, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn bad_magic_reports_offset_zero() {
        let mut bytes = two_by_two_file();
        bytes[3] = 0x01;
        let err = IdxImages::parse(&bytes).unwrap_err();
        assert_eq!(
            err,
            IdxError::BadMagic { offset: 0, found: 0x0000_0801, expected: IMAGES_MAGIC }
        );
        // A label file handed to the image parser is the same error.
        let labels = IdxLabels { labels: vec![1, 2] }.to_bytes();
        assert!(matches!(IdxImages::parse(&labels), Err(IdxError::BadMagic { offset: 0, .. })));
    }

    #[test]
    fn truncation_is_reported() {
        let bytes = two_by_two_file();
        let err = IdxImages::parse(&bytes[..bytes.len() - 3]).unwrap_err();
        assert_eq!(err, IdxError::Truncated { offset: 21, needed: 3, available: 5 });
        let err = IdxImages::parse(&bytes[..10]).unwrap_err();
        assert!(matches!(err, IdxError::Truncated { offset: 10, .. }), "{err:?}");
        assert!(matches!(IdxImages::parse(&[0, 0]), Err(IdxError::Truncated { .. })));
    }

    #[test]
    fn dimension_overflow_is_reported() {
        let mut bytes = vec![0x00, 0x00, 0x08, 0x03];
        for _ in 0..3 {
            bytes.extend_from_slice(&u32::MAX.to_be_bytes());
        }
        if usize::BITS <= 64 {
            assert_eq!(
                IdxImages::parse(&bytes).unwrap_err(),
                IdxError::DimensionOverflow { offset: 4 }
            );
        }
    }

    #[test]
    fn label_filter_and_row_cap() {
        let images = IdxImages { count: 4, rows: 1, cols: 2, pixels: vec![0, 1, 2, 3, 4, 5, 6, 7] };
        let labels = IdxLabels { labels: vec![7, 1, 7, 7] };
        let (x, l) = decode_images(&images, Some(&labels), Some(2), Some(7)).unwrap();
        assert_eq!(l.unwrap(), vec![7, 7]);
        assert_eq!(x.rows(), 2);
        assert!((x.row(1)[0] - 4.0 / 255.0).abs() < 1e-15);
        assert!(decode_images(&images, None, None, Some(7)).is_err());
        let short = IdxLabels { labels: vec![7] };
        assert!(decode_images(&images, Some(&short), None, None).is_err());
    }

    #[test]
    fn companion_path_follows_naming() {
        let p = Path::new("/d/train-images-idx3-ubyte");
        assert_eq!(
            companion_labels_path(p).unwrap(),
            Path::new("/d/train-labels-idx1-ubyte")
        );
        assert!(companion_labels_path(Path::new("/d/other.bin")).is_none());
    }

    proptest! {
        #[test]
        fn image_bytes_roundtrip(count in 0usize..5, rows in 1usize..4, cols in 1usize..4, seed in any::<u64>()) {
            let pixels: Vec<u8> = (0..count * rows * cols)
                .map(|i| (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 56) as u8)
                .collect();
            let bytes = IdxImages { count, rows, cols, pixels }.to_bytes();
            prop_assert_eq!(IdxImages::parse(&bytes).unwrap().to_bytes(), bytes);
        }

        #[test]
        fn label_bytes_roundtrip(labels in proptest::collection::vec(any::<u8>(), 0..64)) {
            let bytes = IdxLabels { labels }.to_bytes();
            prop_assert_eq!(IdxLabels::parse(&bytes).unwrap().to_bytes(), bytes);
        }
    }
}
