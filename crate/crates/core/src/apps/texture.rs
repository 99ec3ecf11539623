//! Places a page's content on a new background texture, using the
//! foreground score as the weight of the original pixel and the background
//! score as the weight of the texture.

use crate::apps::quantize;
use crate::error::{check_dims, Error, Result};
use crate::exec::Exec;
use crate::image::{ColorImage, Image};
use crate::sauvola::ConfidenceMaps;

/// How a texture of arbitrary size is fitted to the page.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TextureFit {
    /// Bilinear resampling to the page size.
    #[default]
    Resize,
    /// Repeat the texture with modular wraparound.
    Tile,
}

/// Samples a texture as if it had been fitted to a `width x height` page.
/// Resize samples stay in double precision.
pub struct TextureSampler<'a> {
    texture: &'a ColorImage,
    width: usize,
    height: usize,
    fit: TextureFit,
}

impl<'a> TextureSampler<'a> {
    pub fn new(texture: &'a ColorImage, width: usize, height: usize, fit: TextureFit) -> Self {
        Self {
            texture,
            width,
            height,
            fit,
        }
    }

    pub fn sample(&self, x: usize, y: usize) -> [f64; 3] {
        let (tw, th) = self.texture.dims();
        match self.fit {
            TextureFit::Tile => self.texture.get(x % tw, y % th).map(f64::from),
            TextureFit::Resize => {
                // Pixel centres are aligned, so equal sizes give the identity.
                let (fx, x0, x1) = source_coord(x, self.width, tw);
                let (fy, y0, y1) = source_coord(y, self.height, th);
                let p = |xx, yy| self.texture.get(xx, yy).map(f64::from);
                let (a, b, c, d) = (p(x0, y0), p(x1, y0), p(x0, y1), p(x1, y1));
                [0, 1, 2].map(|ch| {
                    let top = a[ch] + (b[ch] - a[ch]) * fx;
                    let bottom = c[ch] + (d[ch] - c[ch]) * fx;
                    top + (bottom - top) * fy
                })
            }
        }
    }
}

/// Maps destination index `i` of `dst` onto a `src`-long axis, returning the
/// interpolation weight and the two neighbouring source indices.
fn source_coord(i: usize, dst: usize, src: usize) -> (f64, usize, usize) {
    let s = ((i as f64 + 0.5) * src as f64 / dst as f64 - 0.5).clamp(0.0, (src - 1) as f64);
    let lo = s.floor() as usize;
    let hi = (lo + 1).min(src - 1);
    (s - lo as f64, lo, hi)
}

pub fn texture_transfer(
    img: &Image,
    conf: &ConfidenceMaps,
    texture: &ColorImage,
    fit: TextureFit,
) -> Result<ColorImage> {
    check_dims(img.dims(), conf.dims())?;
    if texture.data().is_empty() {
        return Err(Error::EmptyTexture);
    }
    let promoted;
    let original = match img {
        Image::Color(c) => c,
        Image::Gray(g) => {
            promoted = g.to_color();
            &promoted
        }
    };
    let (width, height) = original.dims();
    let sampler = TextureSampler::new(texture, width, height, fit);
    let (pixels, cb, cf) = (original.data(), conf.cb.data(), conf.cf.data());
    let mut out = vec![[0u8; 3]; width * height];
    Exec::default().for_each_row(&mut out, width, |y, row| {
        let base = y * width;
        for (x, o) in row.iter_mut().enumerate() {
            let i = base + x;
            let tex = sampler.sample(x, y);
            let p = pixels[i];
            *o = [0, 1, 2].map(|c| quantize(cf[i] * f64::from(p[c]) + cb[i] * tex[c]));
        }
    });
    ColorImage::new(width, height, out)
}
