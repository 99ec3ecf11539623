//! Confidence-driven recovery of foreground pixels that the plain threshold
//! rejected.
//!
//! Background pixels whose foreground score reaches `tau` become candidates.
//! With connectivity required, a candidate is kept only if it links to the
//! original foreground through a chain of candidates (hysteresis with the
//! base foreground as seeds); otherwise every candidate is kept.

use std::collections::VecDeque;

use crate::error::{check_dims, Error, Result};
use crate::sauvola::{BinaryImage, ConfidenceMaps};

pub const DEFAULT_TAU: f64 = 0.7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(isize, isize); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RescueParams {
    tau: Option<f64>,
    pub require_connectivity: bool,
    pub connectivity: Connectivity,
}

impl RescueParams {
    /// `tau = None` disables rescue entirely.
    pub fn new(tau: Option<f64>, require_connectivity: bool, connectivity: Connectivity) -> Result<Self> {
        if let Some(t) = tau {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidParam {
                    name: "tau",
                    reason: format!("tau must be within [0, 1] or off, got {t}"),
                });
            }
        }
        Ok(Self {
            tau,
            require_connectivity,
            connectivity,
        })
    }

    pub fn off() -> Self {
        Self {
            tau: None,
            ..Self::default()
        }
    }

    pub fn tau(&self) -> Option<f64> {
        self.tau
    }
}

impl Default for RescueParams {
    fn default() -> Self {
        Self {
            tau: Some(DEFAULT_TAU),
            require_connectivity: true,
            connectivity: Connectivity::Eight,
        }
    }
}

/// Base foreground plus the rescued pixels.
pub fn score_binarize(base: &BinaryImage, conf: &ConfidenceMaps, params: RescueParams) -> Result<BinaryImage> {
    check_dims(base.dims(), conf.dims())?;
    let Some(tau) = params.tau else {
        return Ok(base.clone());
    };
    let (width, height) = base.dims();
    let cf = conf.cf.data();
    let seeds = base.mask();
    let candidate = |i: usize| !seeds[i] && cf[i] >= tau;

    if !params.require_connectivity {
        let mask = (0..seeds.len()).map(|i| seeds[i] || candidate(i)).collect();
        return BinaryImage::new(width, height, mask);
    }

    let mut mask = seeds.to_vec();
    let mut queue: VecDeque<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let offsets = params.connectivity.offsets();
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % width) as isize, (i / width) as isize);
        for &(dx, dy) in offsets {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                continue;
            }
            let j = ny as usize * width + nx as usize;
            if !mask[j] && candidate(j) {
                mask[j] = true;
                queue.push_back(j);
            }
        }
    }
    BinaryImage::new(width, height, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Plane;

    /// 5x5 with a 3-pixel foreground blob at the centre and cf = 0.8 at `hot`.
    fn fixture(hot: (usize, usize)) -> (BinaryImage, ConfidenceMaps) {
        let fg = [(2, 2), (2, 1), (1, 2)];
        let mask = (0..25).map(|i| fg.contains(&(i % 5, i / 5))).collect();
        let base = BinaryImage::new(5, 5, mask).unwrap();
        let cb = (0..25)
            .map(|i| {
                let p = (i % 5, i / 5);
                if p == hot {
                    0.2
                } else if fg.contains(&p) {
                    0.1
                } else {
                    0.9
                }
            })
            .collect();
        let conf = ConfidenceMaps::from_background(Plane::new(5, 5, cb).unwrap()).unwrap();
        (base, conf)
    }

    fn params(connected: bool) -> RescueParams {
        RescueParams::new(Some(0.7), connected, Connectivity::Eight).unwrap()
    }

    #[test]
    fn off_is_identity() {
        let (base, conf) = fixture((3, 3));
        assert_eq!(score_binarize(&base, &conf, RescueParams::off()).unwrap(), base);
    }

    #[test]
    fn adjacent_candidate_is_rescued() {
        let (base, conf) = fixture((3, 3));
        let out = score_binarize(&base, &conf, params(true)).unwrap();
        assert!(out.is_foreground(3, 3));
        assert_eq!(out.foreground_count(), base.foreground_count() + 1);
    }

    #[test]
    fn isolated_candidate_needs_connectivity_off() {
        let (base, conf) = fixture((4, 4));
        let out = score_binarize(&base, &conf, params(true)).unwrap();
        assert!(!out.is_foreground(4, 4));
        assert_eq!(out, base);
        let out = score_binarize(&base, &conf, params(false)).unwrap();
        assert!(out.is_foreground(4, 4));
    }

    #[test]
    fn diagonal_link_depends_on_connectivity() {
        let (base, conf) = fixture((3, 3));
        let four = RescueParams::new(Some(0.7), true, Connectivity::Four).unwrap();
        assert!(!score_binarize(&base, &conf, four).unwrap().is_foreground(3, 3));
    }

    #[test]
    fn validation() {
        assert!(RescueParams::new(Some(1.01), true, Connectivity::Eight).is_err());
        assert!(RescueParams::new(Some(-0.5), true, Connectivity::Eight).is_err());
        assert!(RescueParams::new(Some(f64::NAN), true, Connectivity::Eight).is_err());
        assert!(RescueParams::new(None, true, Connectivity::Four).is_ok());
        let (base, _) = fixture((3, 3));
        let other = ConfidenceMaps::from_background(Plane::new(1, 1, vec![0.0]).unwrap()).unwrap();
        assert!(matches!(
            score_binarize(&base, &other, RescueParams::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
