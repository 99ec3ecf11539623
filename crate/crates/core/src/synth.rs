//! Deterministic synthetic document pages with known ink masks.
//!
//! Pages are rows of glyph-like stroke clusters on a paper background with
//! an illumination gradient and grain noise, which is the regime where local
//! thresholds matter. The returned stroke mask is exact ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::GrayImage;
use crate::sauvola::BinaryImage;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PageStyle {
    /// Paper intensity at the brightest corner.
    pub paper: u8,
    /// Ink intensity.
    pub ink: u8,
    /// Darkening across the page, as a fraction of `paper` (0 = flat light).
    pub shading: f64,
    /// Peak amplitude of the grain noise added to every pixel.
    pub noise: f64,
    /// Stroke thickness in pixels.
    pub stroke: usize,
    /// Glyph cell height in pixels; cells are about 0.7 of this wide.
    pub glyph: usize,
    /// Add a black and a white registration mark so the page spans the full
    /// intensity range, as scanner targets and page edges usually do.
    pub marks: bool,
}

impl PageStyle {
    /// Clean high-contrast print.
    pub fn crisp() -> Self {
        Self {
            paper: 235,
            ink: 30,
            shading: 0.15,
            noise: 10.0,
            stroke: 2,
            glyph: 14,
            marks: false,
        }
    }

    /// Faded ink on grey paper with heavy strokes.
    pub fn low_contrast() -> Self {
        Self {
            paper: 190,
            ink: 145,
            shading: 0.05,
            noise: 6.0,
            stroke: 4,
            glyph: 24,
            marks: true,
        }
    }
}

/// A generated page together with its exact ink mask.
#[derive(Clone, Debug)]
pub struct SyntheticPage {
    pub image: GrayImage,
    pub strokes: BinaryImage,
}

pub fn synthetic_page(width: usize, height: usize, style: PageStyle, seed: u64) -> SyntheticPage {
    assert!(width > 0 && height > 0, "page must be non-empty");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ink = vec![false; width * height];

    let glyph_h = style.glyph.max(4);
    let glyph_w = (glyph_h * 7 / 10).max(3);
    let line_pitch = glyph_h * 2;
    let margin = glyph_h;
    let mut top = margin;
    while top + glyph_h + margin <= height {
        let mut left = margin;
        while left + glyph_w + margin <= width {
            // Word gaps.
            if rng.random_bool(0.15) {
                left += glyph_w;
                continue;
            }
            draw_glyph(&mut ink, width, left, top, glyph_w, glyph_h, style.stroke, &mut rng);
            left += glyph_w + glyph_w / 3 + 1;
        }
        top += line_pitch;
    }

    let (w, h) = (width as f64, height as f64);
    let mut data: Vec<u8> = (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            let shade = 1.0 - style.shading * (0.6 * x / w + 0.4 * y / h);
            let grain = style.noise * (rng.random::<f64>() + rng.random::<f64>() - 1.0);
            let base = if ink[i] {
                f64::from(style.ink)
            } else {
                f64::from(style.paper) * shade
            };
            (base + grain).round().clamp(0.0, 255.0) as u8
        })
        .collect();

    if style.marks {
        let side = (width.min(height) / 40).max(2);
        for y in 0..side.min(height) {
            for x in 0..side.min(width) {
                data[y * width + x] = 0;
                data[(height - 1 - y) * width + (width - 1 - x)] = 255;
                ink[y * width + x] = true;
            }
        }
    }

    SyntheticPage {
        image: GrayImage::new(width, height, data).expect("non-empty page"),
        strokes: BinaryImage::new(width, height, ink).expect("non-empty page"),
    }
}

#[allow(clippy::too_many_arguments)]
fn draw_glyph(
    ink: &mut [bool],
    width: usize,
    left: usize,
    top: usize,
    gw: usize,
    gh: usize,
    stroke: usize,
    rng: &mut ChaCha8Rng,
) {
    let segments = rng.random_range(2..=4);
    let (r, b) = ((left + gw - 1) as f64, (top + gh - 1) as f64);
    let (l, t) = (left as f64, top as f64);
    for _ in 0..segments {
        let (from, to) = match rng.random_range(0..4) {
            0 => {
                let x = rng.random_range(l..=r);
                ((x, t), (x, b))
            }
            1 => {
                let y = rng.random_range(t..=b);
                ((l, y), (r, y))
            }
            2 => ((l, b), (r, t)),
            _ => ((l, t), (r, b)),
        };
        stamp_line(ink, width, from, to, stroke);
    }
}

fn stamp_line(ink: &mut [bool], width: usize, from: (f64, f64), to: (f64, f64), stroke: usize) {
    let height = ink.len() / width;
    let steps = (to.0 - from.0).abs().max((to.1 - from.1).abs()).ceil() as usize + 1;
    for s in 0..=steps {
        let f = s as f64 / steps as f64;
        let cx = (from.0 + (to.0 - from.0) * f).round() as usize;
        let cy = (from.1 + (to.1 - from.1) * f).round() as usize;
        for y in cy..(cy + stroke).min(height) {
            for x in cx..(cx + stroke).min(width) {
                ink[y * width + x] = true;
            }
        }
    }
}
