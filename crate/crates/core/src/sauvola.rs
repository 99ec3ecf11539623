//! Sauvola thresholding and the per-pixel confidence scores derived from it.
//!
//! The threshold at pixel `p` is
//!
//! ```text
//! T(p) = m(p) * (1 + k * (s(p) / R - 1)),    R = (max(I) - min(I)) / 2
//! ```
//!
//! with `m`, `s` the windowed mean and standard deviation. Each pixel then
//! gets a background score
//!
//! ```text
//! cb(p) = (I - T) / (max(I) - T)          if I > T
//! cb(p) = 1 - (T - I) / (T - min(I))      otherwise
//! ```
//!
//! and a foreground score `cf = 1 - cb`.
//!
//! The score formula is discontinuous at `I = T`: approaching from above
//! `cb -> 0`, while at and below the threshold `cb` starts from 1 and falls
//! to 0 at `min(I)`. A pixel sitting exactly on its threshold is classified
//! as foreground yet scores `cb = 1`. This is implemented as written; the
//! confidence grows with distance from the threshold inside each branch but
//! not across it.
//!
//! Degenerate inputs are total: `R = 0` makes `s / R` read as 0, and any
//! score fraction whose denominator is within `1e-12` of zero reads as 0.

use crate::error::{check_dims, Error, Result};
use crate::exec::Exec;
use crate::image::{Extrema, GrayImage, Plane};
use crate::stats::{StatsMaps, WindowSpec};

/// Denominators at or below this magnitude make a score fraction 0.
pub const DENOM_EPS: f64 = 1e-12;

pub const DEFAULT_WINDOW: usize = 31;
pub const DEFAULT_K: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SauvolaParams {
    k: f64,
    window: WindowSpec,
}

impl SauvolaParams {
    pub fn new(k: f64, window: WindowSpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::InvalidParam {
                name: "k",
                reason: format!("k must be within [0, 1], got {k}"),
            });
        }
        Ok(Self { k, window })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn window(&self) -> WindowSpec {
        self.window
    }
}

impl Default for SauvolaParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            window: WindowSpec::new(DEFAULT_WINDOW).expect("default window is valid"),
        }
    }
}

/// Per-pixel thresholds and the dynamic range they were computed with.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdMap {
    pub t: Plane<f64>,
    pub r: f64,
}

impl ThresholdMap {
    pub fn dims(&self) -> (usize, usize) {
        self.t.dims()
    }
}

/// Foreground mask; `true` marks foreground (ink).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if mask.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                actual: (mask.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            mask,
        })
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

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn is_foreground(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn foreground_count(&self) -> usize {
        self.mask.iter().filter(|&&f| f).count()
    }

    /// Foreground 0 (black), background 255 (white).
    pub fn to_gray(&self) -> GrayImage {
        let data = self.mask.iter().map(|&f| if f { 0 } else { 255 }).collect();
        GrayImage::new(self.width, self.height, data).expect("shape already validated")
    }
}

/// Background and foreground confidence, each in `[0, 1]`, summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfidenceMaps {
    pub cb: Plane<f64>,
    pub cf: Plane<f64>,
}

impl ConfidenceMaps {
    /// Builds maps from background scores alone; `cf` is `1 - cb`.
    pub fn from_background(cb: Plane<f64>) -> Result<Self> {
        if cb.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParam {
                name: "cb",
                reason: "background scores must lie in [0, 1]".into(),
            });
        }
        let cf = cb.data().iter().map(|&b| 1.0 - b).collect();
        let cf = Plane::from_parts(cb.width(), cb.height(), cf);
        Ok(Self { cb, cf })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.cb.dims()
    }
}

/// The threshold for a single pixel.
#[inline]
pub fn sauvola_threshold(mean: f64, std: f64, k: f64, r: f64) -> f64 {
    // s <= R holds exactly for real numbers; the min keeps T <= m under rounding.
    let ratio = if r > 0.0 { (std / r).min(1.0) } else { 0.0 };
    mean * (1.0 + k * (ratio - 1.0))
}

pub fn threshold_map(stats: &StatsMaps, extrema: Extrema, params: SauvolaParams) -> ThresholdMap {
    threshold_map_with(stats, extrema, params, Exec::default())
}

pub fn threshold_map_with(
    stats: &StatsMaps,
    extrema: Extrema,
    params: SauvolaParams,
    exec: Exec,
) -> ThresholdMap {
    let (width, height) = stats.dims();
    let r = extrema.half_range();
    let k = params.k;
    let (mean, std) = (stats.mean.data(), stats.std.data());
    let mut t = vec![0.0; width * height];
    exec.for_each_row(&mut t, width, |y, row| {
        let base = y * width;
        for (x, out) in row.iter_mut().enumerate() {
            *out = sauvola_threshold(mean[base + x], std[base + x], k, r);
        }
    });
    ThresholdMap {
        t: Plane::from_parts(width, height, t),
        r,
    }
}

/// Foreground wherever `I(p) <= T(p)`.
pub fn classify(img: &GrayImage, tmap: &ThresholdMap) -> Result<BinaryImage> {
    classify_with(img, tmap, Exec::default())
}

pub fn classify_with(img: &GrayImage, tmap: &ThresholdMap, exec: Exec) -> Result<BinaryImage> {
    check_dims(img.dims(), tmap.dims())?;
    let (width, height) = img.dims();
    let (pixels, t) = (img.data(), tmap.t.data());
    let mut mask = vec![false; width * height];
    exec.for_each_row(&mut mask, width, |y, row| {
        let base = y * width;
        for (x, out) in row.iter_mut().enumerate() {
            *out = f64::from(pixels[base + x]) <= t[base + x];
        }
    });
    Ok(BinaryImage {
        width,
        height,
        mask,
    })
}

/// Background score of one pixel with intensity `value` and threshold
/// `threshold`, given the global extrema.
#[inline]
pub fn background_confidence(value: f64, threshold: f64, extrema: Extrema) -> f64 {
    let (lo, hi) = (f64::from(extrema.min_val), f64::from(extrema.max_val));
    let cb = if value > threshold {
        safe_ratio(value - threshold, hi - threshold)
    } else {
        1.0 - safe_ratio(threshold - value, threshold - lo)
    };
    cb.clamp(0.0, 1.0)
}

#[inline]
fn safe_ratio(num: f64, den: f64) -> f64 {
    if den.abs() <= DENOM_EPS {
        0.0
    } else {
        num / den
    }
}

pub fn confidence_maps(img: &GrayImage, tmap: &ThresholdMap, extrema: Extrema) -> Result<ConfidenceMaps> {
    confidence_maps_with(img, tmap, extrema, Exec::default())
}

pub fn confidence_maps_with(
    img: &GrayImage,
    tmap: &ThresholdMap,
    extrema: Extrema,
    exec: Exec,
) -> Result<ConfidenceMaps> {
    check_dims(img.dims(), tmap.dims())?;
    let (width, height) = img.dims();
    let (pixels, t) = (img.data(), tmap.t.data());
    let mut cb = vec![0.0; width * height];
    let mut cf = vec![0.0; width * height];
    exec.for_each_row2(&mut cb, &mut cf, width, |y, cb_row, cf_row| {
        let base = y * width;
        for x in 0..width {
            let b = background_confidence(f64::from(pixels[base + x]), t[base + x], extrema);
            cb_row[x] = b;
            cf_row[x] = 1.0 - b;
        }
    });
    Ok(ConfidenceMaps {
        cb: Plane::from_parts(width, height, cb),
        cf: Plane::from_parts(width, height, cf),
    })
}
