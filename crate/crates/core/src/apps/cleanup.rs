//! Pushes background toward a flat paper colour while keeping ink.
//!
//! Each pixel is blended with the background colour by `alpha = cb^gamma`,
//! so confident background is fully replaced, confident foreground is left
//! alone, and everything in between fades smoothly instead of being cut by a
//! hard mask.

use crate::apps::quantize;
use crate::error::{check_dims, Error, Result};
use crate::exec::Exec;
use crate::image::{luma, ColorImage, GrayImage, Image};
use crate::sauvola::ConfidenceMaps;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackgroundColor {
    Gray(u8),
    Rgb([u8; 3]),
}

impl BackgroundColor {
    fn gray(self) -> u8 {
        match self {
            BackgroundColor::Gray(v) => v,
            BackgroundColor::Rgb(rgb) => luma(rgb),
        }
    }

    fn rgb(self) -> [u8; 3] {
        match self {
            BackgroundColor::Gray(v) => [v, v, v],
            BackgroundColor::Rgb(rgb) => rgb,
        }
    }
}

impl Default for BackgroundColor {
    fn default() -> Self {
        BackgroundColor::Gray(255)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CleanupParams {
    gamma: f64,
    pub background: BackgroundColor,
}

impl CleanupParams {
    pub fn new(gamma: f64, background: BackgroundColor) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParam {
                name: "gamma",
                reason: format!("gamma must be a positive finite number, got {gamma}"),
            });
        }
        Ok(Self { gamma, background })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Default for CleanupParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            background: BackgroundColor::default(),
        }
    }
}

#[inline]
fn blend(alpha: f64, background: u8, original: u8) -> u8 {
    quantize(alpha * f64::from(background) + (1.0 - alpha) * f64::from(original))
}

pub fn cleanup(img: &Image, conf: &ConfidenceMaps, params: CleanupParams) -> Result<Image> {
    match img {
        Image::Gray(g) => cleanup_gray(g, conf, params).map(Image::Gray),
        Image::Color(c) => cleanup_color(c, conf, params).map(Image::Color),
    }
}

pub fn cleanup_gray(img: &GrayImage, conf: &ConfidenceMaps, params: CleanupParams) -> Result<GrayImage> {
    check_dims(img.dims(), conf.dims())?;
    let (width, height) = img.dims();
    let bg = params.background.gray();
    let (pixels, cb) = (img.data(), conf.cb.data());
    let mut out = vec![0u8; width * height];
    Exec::default().for_each_row(&mut out, width, |y, row| {
        let base = y * width;
        for (x, o) in row.iter_mut().enumerate() {
            let alpha = cb[base + x].powf(params.gamma);
            *o = blend(alpha, bg, pixels[base + x]);
        }
    });
    GrayImage::new(width, height, out)
}

pub fn cleanup_color(img: &ColorImage, conf: &ConfidenceMaps, params: CleanupParams) -> Result<ColorImage> {
    check_dims(img.dims(), conf.dims())?;
    let (width, height) = img.dims();
    let bg = params.background.rgb();
    let (pixels, cb) = (img.data(), conf.cb.data());
    let mut out = vec![[0u8; 3]; width * height];
    Exec::default().for_each_row(&mut out, width, |y, row| {
        let base = y * width;
        for (x, o) in row.iter_mut().enumerate() {
            let alpha = cb[base + x].powf(params.gamma);
            let p = pixels[base + x];
            *o = [0, 1, 2].map(|c| blend(alpha, bg[c], p[c]));
        }
    });
    ColorImage::new(width, height, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Plane;

    fn conf(cb: Vec<f64>) -> ConfidenceMaps {
        let n = cb.len();
        ConfidenceMaps::from_background(Plane::new(n, 1, cb).unwrap()).unwrap()
    }

    #[test]
    fn gray_examples() {
        let img = GrayImage::new(3, 1, vec![40, 40, 100]).unwrap();
        let out = cleanup_gray(&img, &conf(vec![1.0, 0.0, 0.5]), CleanupParams::default()).unwrap();
        assert_eq!(out.data(), &[255, 40, 178]);
    }

    #[test]
    fn endpoints_ignore_gamma() {
        let img = GrayImage::new(2, 1, vec![13, 200]).unwrap();
        for gamma in [0.1, 1.0, 3.7] {
            let p = CleanupParams::new(gamma, BackgroundColor::Gray(240)).unwrap();
            let out = cleanup_gray(&img, &conf(vec![1.0, 0.0]), p).unwrap();
            assert_eq!(out.data(), &[240, 200]);
        }
    }

    #[test]
    fn color_uses_per_channel_background() {
        let img = ColorImage::new(2, 1, vec![[10, 20, 30], [10, 20, 30]]).unwrap();
        let p = CleanupParams::new(1.0, BackgroundColor::Rgb([250, 240, 200])).unwrap();
        let out = cleanup_color(&img, &conf(vec![1.0, 0.0]), p).unwrap();
        assert_eq!(out.data(), &[[250, 240, 200], [10, 20, 30]]);
    }

    #[test]
    fn gamma_validation() {
        for g in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(CleanupParams::new(g, BackgroundColor::default()).is_err());
        }
    }

    #[test]
    fn dimension_mismatch() {
        let img = GrayImage::filled(2, 2, 0).unwrap();
        assert!(cleanup_gray(&img, &conf(vec![0.0; 4]), CleanupParams::default()).is_err());
    }
}
