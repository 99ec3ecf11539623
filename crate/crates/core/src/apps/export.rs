use crate::apps::quantize;
use crate::image::GrayImage;
use crate::sauvola::ConfidenceMaps;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoreKind {
    Foreground,
    Background,
}

/// Quantizes one score map to 8 bits (`round(score * 255)`), e.g. as an
/// extra input channel for a learned cleanup model.
pub fn export_score_map(conf: &ConfidenceMaps, which: ScoreKind) -> GrayImage {
    let plane = match which {
        ScoreKind::Foreground => &conf.cf,
        ScoreKind::Background => &conf.cb,
    };
    let data = plane.data().iter().map(|&s| quantize(s * 255.0)).collect();
    GrayImage::new(plane.width(), plane.height(), data).expect("plane is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Plane;

    #[test]
    fn quantization_examples() {
        let cb = Plane::new(3, 1, vec![0.0, 1.0, 0.5]).unwrap();
        let conf = ConfidenceMaps::from_background(cb).unwrap();
        assert_eq!(export_score_map(&conf, ScoreKind::Foreground).data(), &[255, 0, 128]);
        assert_eq!(export_score_map(&conf, ScoreKind::Background).data(), &[0, 255, 128]);
    }
}
