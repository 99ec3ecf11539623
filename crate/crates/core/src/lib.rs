//! Sauvola document binarization with per-pixel confidence scores.
//!
//! The crate computes, for every pixel of a grayscale page, the Sauvola
//! threshold from windowed mean and standard deviation (via summed-area
//! tables), the resulting foreground/background split, and a pair of
//! background/foreground confidence scores in `[0, 1]`. The scores drive
//! four applications in [`apps`]: rescuing missed foreground, soft
//! background cleanup, score-map export, and texture transfer.
//!
//! Per-pixel stages run row-parallel on rayon when the default `parallel`
//! feature is enabled; results are bit-identical to the sequential path.
//!
//! ```
//! use scorebin::{analyze, GrayImage, SauvolaParams, WindowSpec};
//!
//! let page = GrayImage::from_fn(64, 48, |x, y| if (x / 4 + y / 6) % 5 == 0 { 40 } else { 220 }).unwrap();
//! let params = SauvolaParams::new(0.2, WindowSpec::new(15).unwrap()).unwrap();
//! let a = analyze(&page, params);
//! assert!(a.confidence.cb.data().iter().all(|c| (0.0..=1.0).contains(c)));
//! ```

pub mod apps;
mod error;
pub mod exec;
pub mod image;
pub mod io;
pub mod sauvola;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Exec;
pub use image::{global_extrema, to_grayscale, ColorImage, Extrema, GrayImage, Image, Plane};
pub use io::{load_image, save_image, Format};
pub use sauvola::{
    classify, confidence_maps, threshold_map, BinaryImage, ConfidenceMaps, SauvolaParams, ThresholdMap,
};
pub use stats::{local_mean_std, naive_mean_std, StatsMaps, WindowSpec};

/// Every intermediate of the threshold and scoring pipeline for one page.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub extrema: Extrema,
    pub stats: StatsMaps,
    pub threshold: ThresholdMap,
    /// Plain Sauvola foreground.
    pub base: BinaryImage,
    pub confidence: ConfidenceMaps,
}

pub fn analyze(img: &GrayImage, params: SauvolaParams) -> Analysis {
    analyze_with(img, params, Exec::default())
}

/// Extrema, statistics, threshold, classification and scores in one pass.
pub fn analyze_with(img: &GrayImage, params: SauvolaParams, exec: Exec) -> Analysis {
    let extrema = global_extrema(img).expect("GrayImage is never empty");
    let stats = stats::local_mean_std_with(img, params.window(), exec);
    let threshold = sauvola::threshold_map_with(&stats, extrema, params, exec);
    let base = sauvola::classify_with(img, &threshold, exec).expect("shapes match");
    let confidence = sauvola::confidence_maps_with(img, &threshold, extrema, exec).expect("shapes match");
    Analysis {
        extrema,
        stats,
        threshold,
        base,
        confidence,
    }
}
