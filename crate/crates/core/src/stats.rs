//! Windowed mean and standard deviation.
//!
//! [`local_mean_std`] answers every window query from a pair of summed-area
//! tables in four lookups, so its cost does not depend on the window size.
//! [`naive_mean_std`] walks every window directly and is kept as the
//! reference the fast path is tested against.
//!
//! Windows are `n x n` squares centred on the pixel and clipped to the image;
//! statistics are taken over the pixels that remain (no padding), and the
//! standard deviation is the population one (divisor = pixel count).

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::image::{GrayImage, Plane};

/// Side length of the square statistics window. Always odd and at least 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowSpec(usize);

impl WindowSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidParam {
                name: "window",
                reason: format!("window size must be odd and >= 3, got {n}"),
            });
        }
        Ok(Self(n))
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn half(self) -> usize {
        self.0 / 2
    }
}

/// Inclusive pixel rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn area(&self) -> u64 {
        ((self.x1 - self.x0 + 1) * (self.y1 - self.y0 + 1)) as u64
    }

    /// Window of half-width `half` around `(x, y)`, clipped to a
    /// `width x height` image.
    #[inline]
    pub fn clamped_window(x: usize, y: usize, half: usize, width: usize, height: usize) -> Rect {
        Rect {
            x0: x.saturating_sub(half),
            y0: y.saturating_sub(half),
            x1: (x + half).min(width - 1),
            y1: (y + half).min(height - 1),
        }
    }
}

/// Exclusive-prefix summed-area tables of intensities and squared
/// intensities, each `(width + 1) x (height + 1)` with a zero first row and
/// column.
#[derive(Clone, Debug)]
pub struct IntegralPair {
    width: usize,
    height: usize,
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
}

impl IntegralPair {
    /// Width of the source image.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Height of the source image.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Table entry `(x, y)` for `x <= width`, `y <= height`.
    pub fn sum_at(&self, x: usize, y: usize) -> u64 {
        self.sum[y * (self.width + 1) + x]
    }

    pub fn sum_sq_at(&self, x: usize, y: usize) -> u64 {
        self.sum_sq[y * (self.width + 1) + x]
    }

    /// `(value_sum, square_sum)` over `rect`, which must lie inside the image.
    pub fn window_sum(&self, rect: Rect) -> Result<(u64, u64)> {
        if rect.x0 > rect.x1 || rect.y0 > rect.y1 || rect.x1 >= self.width || rect.y1 >= self.height {
            return Err(Error::RectOutOfBounds {
                x0: rect.x0,
                y0: rect.y0,
                x1: rect.x1,
                y1: rect.y1,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.window_sum_unchecked(rect))
    }

    #[inline]
    fn window_sum_unchecked(&self, rect: Rect) -> (u64, u64) {
        let stride = self.width + 1;
        let a = rect.y0 * stride + rect.x0;
        let b = rect.y0 * stride + rect.x1 + 1;
        let c = (rect.y1 + 1) * stride + rect.x0;
        let d = (rect.y1 + 1) * stride + rect.x1 + 1;
        let s = self.sum[d] + self.sum[a] - self.sum[b] - self.sum[c];
        let q = self.sum_sq[d] + self.sum_sq[a] - self.sum_sq[b] - self.sum_sq[c];
        (s, q)
    }
}

pub fn build_integral(img: &GrayImage) -> Result<IntegralPair> {
    let (width, height) = img.dims();
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let stride = width + 1;
    let mut sum = vec![0u64; stride * (height + 1)];
    let mut sum_sq = vec![0u64; stride * (height + 1)];
    for y in 0..height {
        let (mut row_sum, mut row_sq) = (0u64, 0u64);
        let above = y * stride;
        let here = (y + 1) * stride;
        for (x, &v) in img.row(y).iter().enumerate() {
            let v = u64::from(v);
            row_sum += v;
            row_sq += v * v;
            sum[here + x + 1] = sum[above + x + 1] + row_sum;
            sum_sq[here + x + 1] = sum_sq[above + x + 1] + row_sq;
        }
    }
    Ok(IntegralPair {
        width,
        height,
        sum,
        sum_sq,
    })
}

/// Convenience wrapper over [`IntegralPair::window_sum`].
pub fn window_sum(ip: &IntegralPair, rect: Rect) -> Result<(u64, u64)> {
    ip.window_sum(rect)
}

/// Per-pixel windowed statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsMaps {
    pub mean: Plane<f64>,
    pub std: Plane<f64>,
    /// Number of pixels left in each window after clipping to the image.
    pub effective_count: Plane<u32>,
}

impl StatsMaps {
    pub fn dims(&self) -> (usize, usize) {
        self.mean.dims()
    }
}

/// Mean and population standard deviation from exact window sums.
///
/// The variance numerator `count * sum_sq - sum^2` is evaluated in integers,
/// so it is exact and never negative. `count * sum_sq <= 255^2 * count^2`
/// fits in 64 bits while `count < 2^24`; larger windows use 128 bits.
#[inline]
pub(crate) fn moments(sum: u64, sum_sq: u64, count: u64) -> (f64, f64) {
    let mean = sum as f64 / count as f64;
    let (num, den) = if count < 1 << 24 {
        ((count * sum_sq - sum * sum) as f64, (count * count) as f64)
    } else {
        let num = u128::from(count) * u128::from(sum_sq) - u128::from(sum) * u128::from(sum);
        (num as f64, (u128::from(count) * u128::from(count)) as f64)
    };
    let var = (num / den).max(0.0);
    (mean, var.sqrt())
}

pub fn local_mean_std(img: &GrayImage, spec: WindowSpec) -> StatsMaps {
    local_mean_std_with(img, spec, Exec::default())
}

pub fn local_mean_std_with(img: &GrayImage, spec: WindowSpec, exec: Exec) -> StatsMaps {
    let ip = build_integral(img).expect("GrayImage is never empty");
    local_mean_std_from_integral(&ip, spec, exec)
}

/// Statistics from precomputed tables.
pub fn local_mean_std_from_integral(ip: &IntegralPair, spec: WindowSpec, exec: Exec) -> StatsMaps {
    let (width, height) = (ip.width, ip.height);
    let half = spec.half();
    let len = width * height;
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    exec.for_each_row2(&mut mean, &mut std, width, |y, mean_row, std_row| {
        for x in 0..width {
            let rect = Rect::clamped_window(x, y, half, width, height);
            let (s, q) = ip.window_sum_unchecked(rect);
            let (m, sd) = moments(s, q, rect.area());
            mean_row[x] = m;
            std_row[x] = sd;
        }
    });
    StatsMaps {
        mean: Plane::from_parts(width, height, mean),
        std: Plane::from_parts(width, height, std),
        effective_count: effective_counts(width, height, half),
    }
}

/// Clipped window sizes; separable into a row factor and a column factor.
fn effective_counts(width: usize, height: usize, half: usize) -> Plane<u32> {
    let span = |i: usize, len: usize| ((i + half).min(len - 1) - i.saturating_sub(half) + 1) as u32;
    let cols: Vec<u32> = (0..width).map(|x| span(x, width)).collect();
    let data = (0..height)
        .flat_map(|y| {
            let rows = span(y, height);
            cols.iter().map(move |&c| c * rows)
        })
        .collect();
    Plane::from_parts(width, height, data)
}

/// Reference implementation: visits every pixel of every window and uses a
/// two-pass mean/variance.
pub fn naive_mean_std(img: &GrayImage, spec: WindowSpec) -> StatsMaps {
    let (width, height) = img.dims();
    let half = spec.half();
    let mut mean = Vec::with_capacity(width * height);
    let mut std = Vec::with_capacity(width * height);
    let mut count = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let r = Rect::clamped_window(x, y, half, width, height);
            let values = (r.y0..=r.y1).flat_map(|yy| (r.x0..=r.x1).map(move |xx| (xx, yy)));
            let n = r.area() as f64;
            let m = values.clone().map(|(xx, yy)| f64::from(img.get(xx, yy))).sum::<f64>() / n;
            let var = values
                .map(|(xx, yy)| {
                    let d = f64::from(img.get(xx, yy)) - m;
                    d * d
                })
                .sum::<f64>()
                / n;
            mean.push(m);
            std.push(var.sqrt());
            count.push(r.area() as u32);
        }
    }
    StatsMaps {
        mean: Plane::from_parts(width, height, mean),
        std: Plane::from_parts(width, height, std),
        effective_count: Plane::from_parts(width, height, count),
    }
}
