//! Grayscale images and binary PGM (P5) I/O.

use std::fs;
use std::path::Path;

use crate::scalar::Scalar;

use super::CorpusError;

/// Row-major grayscale image with intensities in `[0, 1]` (0 = black).
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage<T> {
    height: usize,
    width: usize,
    pixels: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    /// Validating constructor.
    pub fn new(height: usize, width: usize, pixels: Vec<T>) -> Result<Self, CorpusError> {
        if height * width != pixels.len() {
            return Err(CorpusError::InvalidImage(format!(
                "{height}x{width} image needs {} pixels, got {}",
                height * width,
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(CorpusError::InvalidImage(format!("intensity {v} outside [0,1]")));
        }
        Ok(Self { height, width, pixels })
    }

    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self {
            height,
            width,
            pixels: vec![value; height * width],
        }
    }

    /// Builds an image from 8-bit samples, scaling by 1/255.
    pub fn from_u8(height: usize, width: usize, bytes: &[u8]) -> Result<Self, CorpusError> {
        let scale = T::lit(255.0);
        Self::new(height, width, bytes.iter().map(|&b| T::lit(b as f64) / scale).collect())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<T> {
        self.pixels
    }

    pub fn get(&self, y: usize, x: usize) -> T {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, y: usize, x: usize, v: T) {
        self.pixels[y * self.width + x] = v;
    }

    /// Quantises to 8 bits with round-half-away-from-zero.
    pub fn to_u8(&self) -> Vec<u8> {
        let scale = T::lit(255.0);
        self.pixels
            .iter()
            .map(|&v| {
                let q = (v * scale).round().max(T::zero()).min(scale);
                q.to_u8().unwrap_or(0)
            })
            .collect()
    }

    pub fn cast<U: Scalar>(&self) -> GrayImage<U> {
        GrayImage {
            height: self.height,
            width: self.width,
            pixels: self.pixels.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }

    pub fn min_max(&self) -> (T, T) {
        self.pixels
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Encodes a binary PGM with maxval 255.
pub fn encode_pgm<T: Scalar>(img: &GrayImage<T>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.to_u8());
    out
}

pub fn save_image<T: Scalar>(img: &GrayImage<T>, path: &Path) -> Result<(), CorpusError> {
    fs::write(path, encode_pgm(img)).map_err(|e| CorpusError::io(path, e))
}

pub fn load_image<T: Scalar>(path: &Path) -> Result<GrayImage<T>, CorpusError> {
    let bytes = fs::read(path).map_err(|e| CorpusError::io(path, e))?;
    decode_pgm(&bytes)
}

/// Decodes a binary 8-bit PGM (P5). Comments in the header are skipped.
pub fn decode_pgm<T: Scalar>(bytes: &[u8]) -> Result<GrayImage<T>, CorpusError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        let magic = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(CorpusError::UnsupportedMagic(magic));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(CorpusError::TruncatedImage("header ends early".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(CorpusError::InvalidImage("expected a number in PGM header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CorpusError::InvalidImage("header number out of range".into()))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(CorpusError::InvalidImage(format!(
            "unsupported maxval {maxval}, expected 255"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(CorpusError::TruncatedImage("missing raster".into())),
    }
    let need = width * height;
    let raster = &bytes[pos..];
    if raster.len() < need {
        return Err(CorpusError::TruncatedImage(format!(
            "expected {need} pixel bytes, found {}",
            raster.len()
        )));
    }
    GrayImage::from_u8(height, width, &raster[..need])
}

/// Bilinear resize using pixel-centre alignment; samples outside the source
/// are clamped to the border.
pub fn resize_image<T: Scalar>(img: &GrayImage<T>, h: usize, w: usize) -> Result<GrayImage<T>, CorpusError> {
    if h == 0 || w == 0 {
        return Err(CorpusError::InvalidImage(format!(
            "target size {h}x{w} must be positive"
        )));
    }
    if img.height == 0 || img.width == 0 {
        return Err(CorpusError::InvalidImage("cannot resize an empty image".into()));
    }
    if (h, w) == img.dims() {
        return Ok(img.clone());
    }
    let ys = sample_positions::<T>(img.height, h);
    let xs = sample_positions::<T>(img.width, w);
    let mut pixels = Vec::with_capacity(h * w);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = img.get(y0, x0) * (T::one() - fx) + img.get(y0, x1) * fx;
            let bottom = img.get(y1, x0) * (T::one() - fx) + img.get(y1, x1) * fx;
            let v = top * (T::one() - fy) + bottom * fy;
            pixels.push(v.max(T::zero()).min(T::one()));
        }
    }
    Ok(GrayImage {
        height: h,
        width: w,
        pixels,
    })
}

/// For each destination index: the two source neighbours and the weight of
/// the second one.
fn sample_positions<T: Scalar>(src: usize, dst: usize) -> Vec<(usize, usize, T)> {
    let ratio = T::from_count(src) / T::from_count(dst);
    let half = T::lit(0.5);
    let last = T::from_count(src - 1);
    (0..dst)
        .map(|i| {
            let s = ((T::from_count(i) + half) * ratio - half).max(T::zero()).min(last);
            let i0 = s.floor().to_usize().unwrap_or(0);
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - T::from_count(i0))
        })
        .collect()
}
