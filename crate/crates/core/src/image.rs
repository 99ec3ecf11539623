//! Raster types shared by every stage: 8-bit gray and RGB images, real-valued
//! per-pixel maps, and the global intensity extrema.

use crate::error::{Error, Result};

/// Single-channel 8-bit image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_shape(width, height, data.len(), 1)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image filled with a single intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Replicates the gray channel into RGB.
    pub fn to_color(&self) -> ColorImage {
        ColorImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| [v, v, v]).collect(),
        }
    }
}

/// Three-channel 8-bit image, row-major `[r, g, b]` triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        check_shape(width, height, data.len(), 1)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image from packed `rgbrgb...` bytes.
    pub fn from_interleaved(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        check_shape(width, height, bytes.len(), 3)?;
        let data = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[[u8; 3]] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }

    pub fn interleaved(&self) -> Vec<u8> {
        self.data.iter().flatten().copied().collect()
    }
}

/// Either kind of raster a file can decode to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Image {
    Gray(GrayImage),
    Color(ColorImage),
}

impl Image {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Image::Gray(g) => g.dims(),
            Image::Color(c) => c.dims(),
        }
    }

    /// Gray view of the image; color sources go through [`to_grayscale`].
    pub fn to_gray(&self) -> GrayImage {
        match self {
            Image::Gray(g) => g.clone(),
            Image::Color(c) => to_grayscale(c),
        }
    }
}

impl From<GrayImage> for Image {
    fn from(img: GrayImage) -> Self {
        Image::Gray(img)
    }
}

impl From<ColorImage> for Image {
    fn from(img: ColorImage) -> Self {
        Image::Color(img)
    }
}

/// Real-valued per-pixel map (means, thresholds, scores).
#[derive(Clone, Debug, PartialEq)]
pub struct Plane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T> Plane<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_shape(width, height, data.len(), 1)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub(crate) fn from_parts(width: usize, height: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }
}

/// Global intensity extremes of an image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Extrema {
    pub min_val: u8,
    pub max_val: u8,
}

impl Extrema {
    /// Half the intensity span, the dynamic range used by the threshold.
    pub fn half_range(&self) -> f64 {
        (f64::from(self.max_val) - f64::from(self.min_val)) / 2.0
    }
}

/// Exact minimum and maximum over all pixels.
pub fn global_extrema(img: &GrayImage) -> Result<Extrema> {
    let data = img.data();
    if data.is_empty() {
        return Err(Error::EmptyImage);
    }
    let (min_val, max_val) = data
        .iter()
        .fold((u8::MAX, u8::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(Extrema { min_val, max_val })
}

/// BT.601 luma, rounded half away from zero.
#[inline]
pub fn luma([r, g, b]: [u8; 3]) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

pub fn to_grayscale(img: &ColorImage) -> GrayImage {
    GrayImage {
        width: img.width,
        height: img.height,
        data: img.data.iter().copied().map(luma).collect(),
    }
}

fn check_shape(width: usize, height: usize, len: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::MalformedFile(format!("{width}x{height} overflows")))?;
    if expected != len {
        return Err(Error::DimensionMismatch {
            expected: (width, height),
            actual: (len / channels, 1),
        });
    }
    Ok(())
}
