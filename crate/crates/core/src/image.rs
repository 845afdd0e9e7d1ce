//! Grayscale image storage, binary PGM I/O, block extraction, and local
//! neighbourhood statistics.
//!
//! Intensities are kept as `f64` throughout the pipeline; restoration adds
//! signed residuals that transiently leave the nominal [0, 255] range, so
//! quantization to 8 bits happens only when an image is written back out as
//! PGM. Wherever a window or block leaves the image, samples are filled by
//! mirror (reflect-without-repeat) padding.

use std::path::Path;

use crate::error::{Error, Result};

/// A rectangular grid of real-valued intensities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    /// Builds an image from a row-major intensity buffer.
    ///
    /// Dimensions must be positive, the buffer length must equal
    /// `width * height`, and every intensity must be finite.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if data.len() != width * height {
            return Err(Error::BadPixelCount {
                width,
                height,
                len: data.len(),
            });
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntensity(idx));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// An image with every pixel set to `value`.
    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height])
            .expect("constant image is well-formed")
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self::new(width, height, data).expect("generator produced a well-formed image")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Intensity at `(row, col)`. Panics if the coordinates are out of bounds.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col]
    }

    /// Intensity at possibly out-of-bounds coordinates, filled by mirror
    /// (reflect-without-repeat) padding.
    #[inline]
    pub fn get_mirrored(&self, row: isize, col: isize) -> f64 {
        let r = mirror_index(row, self.height);
        let c = mirror_index(col, self.width);
        self.data[r * self.width + c]
    }

    pub fn same_dimensions(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Population variance over all pixels.
    pub fn population_variance(&self) -> f64 {
        let mean = self.mean();
        self.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / self.data.len() as f64
    }
}

/// Maps an arbitrary index onto `[0, n)` by reflecting at the borders
/// without repeating the edge sample: for n = 4 the extension reads
/// `... 2 1 | 0 1 2 3 | 2 1 0 ...`.
#[inline]
pub(crate) fn mirror_index(i: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut m = i % period;
    if m < 0 {
        m += period;
    }
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Decodes a binary (P5) PGM with maxval at most 255.
///
/// The header accepts arbitrary whitespace and `#` comment lines between
/// tokens, per the netpbm convention; exactly one whitespace byte separates
/// the maxval from the pixel data.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 {
        return Err(Error::MalformedHeader("shorter than a magic number".into()));
    }
    if &bytes[..2] != b"P5" {
        return Err(Error::UnsupportedMagic(
            String::from_utf8_lossy(&bytes[..2]).into_owned(),
        ));
    }
    let mut pos = 2;
    let width = read_header_int(bytes, &mut pos)?;
    let height = read_header_int(bytes, &mut pos)?;
    let maxval = read_header_int(bytes, &mut pos)?;
    if maxval == 0 {
        return Err(Error::MalformedHeader("maxval is zero".into()));
    }
    if maxval > 255 {
        return Err(Error::MaxvalTooLarge(maxval as u32));
    }
    // Single whitespace byte terminates the header.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(Error::MalformedHeader(
                "missing whitespace after maxval".into(),
            ))
        }
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("dimension overflow".into()))?;
    let found = bytes.len() - pos;
    if found < expected {
        return Err(Error::TruncatedPixelData { expected, found });
    }
    let data = bytes[pos..pos + expected]
        .iter()
        .map(|&b| f64::from(b))
        .collect();
    GrayImage::new(width, height, data)
}

fn read_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    // Skip whitespace and comment lines.
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if *pos == start {
        return Err(Error::MalformedHeader(format!(
            "expected an integer at byte {start}"
        )));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .expect("digits are valid UTF-8")
        .parse::<usize>()
        .map_err(|e| Error::MalformedHeader(e.to_string()))
}

/// Encodes an image as binary (P5) PGM with the canonical header
/// `P5\n<w> <h>\n255\n`. Intensities are rounded half-up and clamped to
/// [0, 255].
pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.data().iter().map(|&v| {
        let rounded = (v + 0.5).floor();
        rounded.clamp(0.0, 255.0) as u8
    }));
    out
}

pub fn read_pgm_file(path: impl AsRef<Path>) -> Result<GrayImage> {
    read_pgm(&std::fs::read(path)?)
}

pub fn write_pgm_file(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, write_pgm(image))?)
}

/// A square pixel neighbourhood with a unique center.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub center_row: usize,
    pub center_col: usize,
    pub side: usize,
    pub values: Vec<f64>,
}

/// Extracts the `side x side` block centered at `(row, col)`, mirror-padding
/// samples that fall outside the image. `side` must be odd.
pub fn extract_block(image: &GrayImage, row: usize, col: usize, side: usize) -> Result<Block> {
    check_odd(side)?;
    if row >= image.height() || col >= image.width() {
        return Err(Error::CenterOutOfBounds {
            row,
            col,
            width: image.width(),
            height: image.height(),
        });
    }
    let half = (side / 2) as isize;
    let mut values = Vec::with_capacity(side * side);
    for dr in -half..=half {
        for dc in -half..=half {
            values.push(image.get_mirrored(row as isize + dr, col as isize + dc));
        }
    }
    Ok(Block {
        center_row: row,
        center_col: col,
        side,
        values,
    })
}

/// Per-pixel population variance of the `side x side` mirror-padded
/// neighbourhood, in squared intensity units.
pub fn local_variance_map(image: &GrayImage, side: usize) -> Result<GrayImage> {
    check_odd(side)?;
    let half = (side / 2) as isize;
    let count = (side * side) as f64;
    let map = GrayImage::from_fn(image.width(), image.height(), |row, col| {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for dr in -half..=half {
            for dc in -half..=half {
                let v = image.get_mirrored(row as isize + dr, col as isize + dc);
                sum += v;
                sum_sq += v * v;
            }
        }
        let mean = sum / count;
        (sum_sq / count - mean * mean).max(0.0)
    });
    Ok(map)
}

pub(crate) fn check_odd(side: usize) -> Result<()> {
    if side == 0 || side % 2 == 0 {
        return Err(Error::EvenSide(side));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_minimal_p5() {
        let bytes = b"P5\n2 2\n255\n\x00\xff\x11\x2a";
        let img = read_pgm(bytes).unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.height(), 2);
        assert_eq!(img.data(), &[0.0, 255.0, 17.0, 42.0]);
    }

    #[test]
    fn rejects_ascii_magic() {
        let err = read_pgm(b"P2\n2 2\n255\n").unwrap_err();
        assert!(matches!(err, Error::UnsupportedMagic(m) if m == "P2"));
    }

    #[test]
    fn rejects_wide_maxval() {
        let err = read_pgm(b"P5\n1 1\n65535\n\x00\x00").unwrap_err();
        assert!(matches!(err, Error::MaxvalTooLarge(65535)));
    }

    #[test]
    fn rejects_truncated_data() {
        let err = read_pgm(b"P5\n2 2\n255\n\x00\x01").unwrap_err();
        assert!(matches!(
            err,
            Error::TruncatedPixelData {
                expected: 4,
                found: 2
            }
        ));
    }

    #[test]
    fn header_comments_are_skipped() {
        let bytes = b"P5\n# made by hand\n2 1\n# another\n255\n\x07\x09";
        let img = read_pgm(bytes).unwrap();
        assert_eq!(img.data(), &[7.0, 9.0]);
    }

    #[test]
    fn write_clamps_below() {
        let img = GrayImage::new(1, 1, vec![-3.0]).unwrap();
        assert_eq!(*write_pgm(&img).last().unwrap(), 0u8);
    }

    #[test]
    fn write_rounds_half_up() {
        let img = GrayImage::new(1, 1, vec![254.5]).unwrap();
        assert_eq!(*write_pgm(&img).last().unwrap(), 255u8);
        let img = GrayImage::new(1, 1, vec![16.5]).unwrap();
        assert_eq!(*write_pgm(&img).last().unwrap(), 17u8);
    }

    #[test]
    fn write_clamps_above() {
        let img = GrayImage::new(1, 1, vec![300.0]).unwrap();
        assert_eq!(*write_pgm(&img).last().unwrap(), 255u8);
    }

    #[test]
    fn rejects_non_finite_intensity() {
        let err = GrayImage::new(2, 1, vec![0.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntensity(1)));
    }

    #[test]
    fn mirror_reflects_without_repeat() {
        // n = 4 extends as ... 2 1 | 0 1 2 3 | 2 1 0 ...
        assert_eq!(mirror_index(-1, 4), 1);
        assert_eq!(mirror_index(-2, 4), 2);
        assert_eq!(mirror_index(4, 4), 2);
        assert_eq!(mirror_index(5, 4), 1);
        assert_eq!(mirror_index(6, 4), 0);
        assert_eq!(mirror_index(7, 4), 1);
        assert_eq!(mirror_index(-3, 2), 1);
        assert_eq!(mirror_index(123, 1), 0);
    }

    #[test]
    fn block_of_constant_image_is_constant() {
        let img = GrayImage::constant(5, 5, 7.0);
        let block = extract_block(&img, 2, 2, 3).unwrap();
        assert_eq!(block.values, vec![7.0; 9]);
    }

    #[test]
    fn corner_block_mirrors() {
        let img = GrayImage::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let block = extract_block(&img, 0, 0, 3).unwrap();
        assert_eq!(
            block.values,
            vec![4.0, 3.0, 4.0, 2.0, 1.0, 2.0, 4.0, 3.0, 4.0]
        );
    }

    #[test]
    fn interior_block_equals_direct_slice() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let img = GrayImage::from_fn(9, 8, |_, _| (rng.next_u32() % 256) as f64);
        for (row, col) in [(2, 2), (3, 5), (5, 6)] {
            let block = extract_block(&img, row, col, 5).unwrap();
            let mut expected = Vec::new();
            for r in row - 2..=row + 2 {
                for c in col - 2..=col + 2 {
                    expected.push(img.get(r, c));
                }
            }
            assert_eq!(block.values, expected);
        }
    }

    #[test]
    fn block_rejects_even_side_and_bad_center() {
        let img = GrayImage::constant(4, 4, 0.0);
        assert!(matches!(
            extract_block(&img, 0, 0, 4),
            Err(Error::EvenSide(4))
        ));
        assert!(matches!(
            extract_block(&img, 4, 0, 3),
            Err(Error::CenterOutOfBounds { .. })
        ));
    }

    #[test]
    fn variance_of_constant_image_is_zero() {
        let img = GrayImage::constant(6, 4, 42.0);
        let map = local_variance_map(&img, 3).unwrap();
        assert!(map.data().iter().all(|&v| v == 0.0));
    }

    /// Independent window oracle: gather the mirrored neighbourhood and take
    /// its population variance directly.
    fn window_variance_oracle(img: &GrayImage, row: usize, col: usize, side: usize) -> f64 {
        let half = (side / 2) as isize;
        let mut vals = Vec::new();
        for dr in -half..=half {
            for dc in -half..=half {
                vals.push(img.get_mirrored(row as isize + dr, col as isize + dc));
            }
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64
    }

    #[test]
    fn variance_of_column_stripes() {
        // Columns alternate 0 and 255; every mirrored 3x3 window holds six
        // copies of one level and three of the other, giving variance
        // (6*85^2 + 3*170^2)/9 = 14450 at every pixel.
        let img = GrayImage::new(2, 2, vec![0.0, 255.0, 0.0, 255.0]).unwrap();
        let map = local_variance_map(&img, 3).unwrap();
        for row in 0..2 {
            for col in 0..2 {
                let oracle = window_variance_oracle(&img, row, col, 3);
                let got = map.get(row, col);
                assert!((got - oracle).abs() < 1e-9);
                assert!((got - 14450.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn variance_matches_oracle_on_random_image() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let img = GrayImage::from_fn(7, 6, |_, _| (rng.next_u32() % 256) as f64);
        let map = local_variance_map(&img, 5).unwrap();
        for row in 0..6 {
            for col in 0..7 {
                let oracle = window_variance_oracle(&img, row, col, 5);
                assert!((map.get(row, col) - oracle).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn variance_is_shift_invariant() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let img = GrayImage::from_fn(8, 8, |_, _| (rng.next_u32() % 256) as f64);
        let shifted = GrayImage::from_fn(8, 8, |r, c| img.get(r, c) + 60.0);
        let a = local_variance_map(&img, 3).unwrap();
        let b = local_variance_map(&shifted, 3).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn pgm_round_trip(w in 1usize..24, h in 1usize..24, seed in any::<u64>()) {
            use rand_chacha::rand_core::{RngCore, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let img = GrayImage::from_fn(w, h, |_, _| (rng.next_u32() % 256) as f64);
            let bytes = write_pgm(&img);
            let back = read_pgm(&bytes).unwrap();
            prop_assert_eq!(&back, &img);
            // Canonical-header files survive a decode/encode cycle bit-exactly.
            prop_assert_eq!(write_pgm(&back), bytes);
        }

        #[test]
        fn blocks_are_total_at_every_center(row in 0usize..6, col in 0usize..6, side in 0usize..4) {
            let side = 2 * side + 1;
            let img = GrayImage::from_fn(6, 6, |r, c| (r * 6 + c) as f64);
            let block = extract_block(&img, row, col, side).unwrap();
            prop_assert_eq!(block.values.len(), side * side);
        }
    }
}
