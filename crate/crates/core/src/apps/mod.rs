//! Downstream uses of the confidence maps.

mod cleanup;
mod export;
mod rescue;
mod texture;

pub use cleanup::{cleanup, cleanup_color, cleanup_gray, BackgroundColor, CleanupParams};
pub use export::{export_score_map, ScoreKind};
pub use rescue::{score_binarize, Connectivity, RescueParams, DEFAULT_TAU};
pub use texture::{texture_transfer, TextureFit, TextureSampler};

/// Rounds a blended value half away from zero into the 8-bit range.
#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
