use proptest::prelude::*;
use scorebin::apps::{
    cleanup_color, cleanup_gray, export_score_map, score_binarize, texture_transfer, BackgroundColor,
    CleanupParams, Connectivity, RescueParams, ScoreKind, TextureFit, TextureSampler,
};
use scorebin::io::{decode, encode};
use scorebin::sauvola::background_confidence;
use scorebin::stats::{build_integral, Rect};
use scorebin::{
    analyze, classify, global_extrema, local_mean_std, naive_mean_std, threshold_map, ColorImage, Extrema,
    Format, GrayImage, Image, SauvolaParams, WindowSpec,
};

fn gray_image(max_side: usize) -> impl Strategy<Value = GrayImage> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), w * h).prop_map(move |d| GrayImage::new(w, h, d).unwrap())
    })
}

/// Images drawn from a handful of levels, so ties and flat regions are common.
fn few_level_image(max_side: usize) -> impl Strategy<Value = GrayImage> {
    (1..=max_side, 1..=max_side, prop::collection::vec(any::<u8>(), 1..4)).prop_flat_map(|(w, h, levels)| {
        prop::collection::vec(prop::sample::select(levels), w * h)
            .prop_map(move |d| GrayImage::new(w, h, d).unwrap())
    })
}

fn window() -> impl Strategy<Value = WindowSpec> {
    prop::sample::select(vec![3usize, 5, 7, 15, 31]).prop_map(|n| WindowSpec::new(n).unwrap())
}

/// Independent Sauvola: direct window loops, two-pass moments.
fn reference_sauvola(img: &GrayImage, n: usize, k: f64) -> Vec<bool> {
    let (w, h) = img.dims();
    let lo = *img.data().iter().min().unwrap() as f64;
    let hi = *img.data().iter().max().unwrap() as f64;
    let r = (hi - lo) / 2.0;
    let half = n / 2;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut vals = Vec::new();
            for yy in y.saturating_sub(half)..=(y + half).min(h - 1) {
                for xx in x.saturating_sub(half)..=(x + half).min(w - 1) {
                    vals.push(img.get(xx, yy) as f64);
                }
            }
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let s = (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64).sqrt();
            let ratio = if r > 0.0 { s / r } else { 0.0 };
            let t = m * (1.0 + k * (ratio - 1.0));
            out.push(img.get(x, y) as f64 <= t);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integral_matches_naive(img in gray_image(40), spec in window()) {
        let fast = local_mean_std(&img, spec);
        let slow = naive_mean_std(&img, spec);
        prop_assert_eq!(&fast.effective_count, &slow.effective_count);
        for (a, b) in fast.mean.data().iter().zip(slow.mean.data()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        for (a, b) in fast.std.data().iter().zip(slow.std.data()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn window_sum_matches_direct(img in gray_image(20), a in any::<(usize, usize)>(), b in any::<(usize, usize)>()) {
        let (w, h) = img.dims();
        let (xa, xb) = (a.0 % w, b.0 % w);
        let (ya, yb) = (a.1 % h, b.1 % h);
        let rect = Rect { x0: xa.min(xb), y0: ya.min(yb), x1: xa.max(xb), y1: ya.max(yb) };
        let ip = build_integral(&img).unwrap();
        let (mut s, mut q) = (0u64, 0u64);
        for y in rect.y0..=rect.y1 {
            for x in rect.x0..=rect.x1 {
                let v = img.get(x, y) as u64;
                s += v;
                q += v * v;
            }
        }
        prop_assert_eq!(ip.window_sum(rect).unwrap(), (s, q));
    }

    #[test]
    fn std_bounded_by_window_and_global_half_range(img in few_level_image(24), spec in window()) {
        let stats = local_mean_std(&img, spec);
        let ext = global_extrema(&img).unwrap();
        let (w, h) = img.dims();
        for y in 0..h {
            for x in 0..w {
                let r = Rect::clamped_window(x, y, spec.half(), w, h);
                let vals = (r.y0..=r.y1).flat_map(|yy| (r.x0..=r.x1).map(move |xx| (xx, yy)))
                    .map(|(xx, yy)| img.get(xx, yy));
                let (lo, hi) = vals.fold((255u8, 0u8), |(lo, hi), v| (lo.min(v), hi.max(v)));
                let s = *stats.std.get(x, y);
                let m = *stats.mean.get(x, y);
                prop_assert!(s.is_finite() && s >= 0.0);
                prop_assert!(s <= (hi as f64 - lo as f64) / 2.0 + 1e-9);
                prop_assert!(s <= ext.half_range() + 1e-9);
                prop_assert!((0.0..=255.0).contains(&m));
            }
        }
    }

    #[test]
    fn scores_partition_and_stay_in_range(img in few_level_image(32), spec in window(), k in 0.0f64..=1.0) {
        let a = analyze(&img, SauvolaParams::new(k, spec).unwrap());
        for (b, f) in a.confidence.cb.data().iter().zip(a.confidence.cf.data()) {
            prop_assert!(b.is_finite() && f.is_finite());
            prop_assert!((0.0..=1.0).contains(b) && (0.0..=1.0).contains(f));
            prop_assert!((b + f - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn threshold_lies_between_scaled_mean_and_mean(img in gray_image(32), spec in window(), k in 0.0f64..=1.0) {
        let ext = global_extrema(&img).unwrap();
        let stats = local_mean_std(&img, spec);
        let tmap = threshold_map(&stats, ext, SauvolaParams::new(k, spec).unwrap());
        prop_assert_eq!(tmap.r, ext.half_range());
        for (t, m) in tmap.t.data().iter().zip(stats.mean.data()) {
            prop_assert!(*t >= m * (1.0 - k) - 1e-9 && *t <= m + 1e-9);
        }
    }

    #[test]
    fn score_is_monotone_within_each_branch(
        lo in 0u8..=120, hi in 130u8..=255, t_frac in 0.0f64..=1.0,
    ) {
        let ext = Extrema { min_val: lo, max_val: hi };
        let t = lo as f64 + t_frac * (hi as f64 - lo as f64);
        let mut prev_lower = f64::NEG_INFINITY;
        let mut prev_upper = f64::NEG_INFINITY;
        for v in lo..=hi {
            let v = v as f64;
            let cb = background_confidence(v, t, ext);
            if v <= t {
                prop_assert!(cb >= prev_lower);
                if t - lo as f64 > 1e-12 && prev_lower.is_finite() {
                    prop_assert!(cb > prev_lower);
                }
                prev_lower = cb;
            } else {
                prop_assert!(cb >= prev_upper);
                if hi as f64 - t > 1e-12 && prev_upper.is_finite() {
                    prop_assert!(cb > prev_upper);
                }
                prev_upper = cb;
            }
        }
    }

    #[test]
    fn classify_reproduces_reference_sauvola(img in gray_image(24), n in prop::sample::select(vec![3usize, 5, 9]), k in 0.05f64..=0.5) {
        let params = SauvolaParams::new(k, WindowSpec::new(n).unwrap()).unwrap();
        let stats = local_mean_std(&img, params.window());
        let tmap = threshold_map(&stats, global_extrema(&img).unwrap(), params);
        let ours = classify(&img, &tmap).unwrap();
        let expected = reference_sauvola(&img, n, k);
        prop_assert_eq!(ours.mask(), expected.as_slice());
    }

    #[test]
    fn rescue_is_superset_and_antitone(img in few_level_image(32), spec in window(), connected in any::<bool>(), four in any::<bool>()) {
        let a = analyze(&img, SauvolaParams::new(0.2, spec).unwrap());
        let conn = if four { Connectivity::Four } else { Connectivity::Eight };
        let mut prev: Option<Vec<bool>> = None;
        for tau in [0.0, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let out = score_binarize(&a.base, &a.confidence, RescueParams::new(Some(tau), connected, conn).unwrap()).unwrap();
            for (o, b) in out.mask().iter().zip(a.base.mask()) {
                prop_assert!(*o || !*b);
            }
            if let Some(p) = &prev {
                for (o, q) in out.mask().iter().zip(p) {
                    prop_assert!(!*o || *q, "raising tau added a pixel");
                }
            }
            if tau == 1.0 {
                for ((o, b), cf) in out.mask().iter().zip(a.base.mask()).zip(a.confidence.cf.data()) {
                    prop_assert!(!*o || *b || *cf == 1.0);
                }
            }
            prev = Some(out.mask().to_vec());
        }
    }

    #[test]
    fn cleanup_stays_between_original_and_background(
        img in gray_image(24), gamma in 0.1f64..5.0, bg in any::<u8>(),
    ) {
        let a = analyze(&img, SauvolaParams::new(0.2, WindowSpec::new(5).unwrap()).unwrap());
        let p = CleanupParams::new(gamma, BackgroundColor::Gray(bg)).unwrap();
        let out = cleanup_gray(&img, &a.confidence, p).unwrap();
        for (o, i) in out.data().iter().zip(img.data()) {
            prop_assert!(*o >= (*i).min(bg) && *o <= (*i).max(bg));
        }
        let color = ColorImage::from_fn(img.width(), img.height(), |x, y| {
            let v = img.get(x, y);
            [v, v.wrapping_mul(7), 255 - v]
        }).unwrap();
        let rgb = [bg, 255 - bg, bg / 2];
        let out = cleanup_color(&color, &a.confidence, CleanupParams::new(gamma, BackgroundColor::Rgb(rgb)).unwrap()).unwrap();
        for (o, i) in out.data().iter().zip(color.data()) {
            for c in 0..3 {
                prop_assert!(o[c] >= i[c].min(rgb[c]) && o[c] <= i[c].max(rgb[c]));
            }
        }
    }

    #[test]
    fn export_quantization_error_is_half_a_level(img in gray_image(24)) {
        let a = analyze(&img, SauvolaParams::new(0.3, WindowSpec::new(3).unwrap()).unwrap());
        for (kind, plane) in [(ScoreKind::Foreground, &a.confidence.cf), (ScoreKind::Background, &a.confidence.cb)] {
            let out = export_score_map(&a.confidence, kind);
            for (q, s) in out.data().iter().zip(plane.data()) {
                prop_assert!((*q as f64 / 255.0 - s).abs() <= 1.0 / 510.0 + 1e-12);
            }
        }
    }

    #[test]
    fn tile_sampling_wraps_exactly(tw in 1usize..6, th in 1usize..6, w in 1usize..20, h in 1usize..20, seed in any::<u8>()) {
        let tex = ColorImage::from_fn(tw, th, |x, y| [seed.wrapping_add((x * 13 + y * 7) as u8), x as u8, y as u8]).unwrap();
        let s = TextureSampler::new(&tex, w, h, TextureFit::Tile);
        for y in 0..h {
            for x in 0..w {
                prop_assert_eq!(s.sample(x, y), tex.get(x % tw, y % th).map(f64::from));
            }
        }
    }

    #[test]
    fn texture_endpoints_hold_per_channel(img in gray_image(16), fit_tile in any::<bool>()) {
        let a = analyze(&img, SauvolaParams::new(0.2, WindowSpec::new(3).unwrap()).unwrap());
        let tex = ColorImage::from_fn(5, 4, |x, y| [(x * 50) as u8, (y * 60) as u8, 77]).unwrap();
        let fit = if fit_tile { TextureFit::Tile } else { TextureFit::Resize };
        let out = texture_transfer(&Image::Gray(img.clone()), &a.confidence, &tex, fit).unwrap();
        let s = TextureSampler::new(&tex, img.width(), img.height(), fit);
        for y in 0..img.height() {
            for x in 0..img.width() {
                let cb = *a.confidence.cb.get(x, y);
                let o = out.get(x, y);
                if cb == 0.0 {
                    prop_assert_eq!(o, [img.get(x, y); 3]);
                }
                if cb == 1.0 {
                    prop_assert_eq!(o, s.sample(x, y).map(|v| v.round() as u8));
                }
            }
        }
    }

    #[test]
    fn pnm_and_png_round_trip(img in gray_image(16), rgb in any::<bool>()) {
        let image = if rgb {
            Image::Color(ColorImage::from_fn(img.width(), img.height(), |x, y| {
                let v = img.get(x, y);
                [v, 255 - v, v / 3]
            }).unwrap())
        } else {
            Image::Gray(img)
        };
        let native = if rgb { Format::Ppm } else { Format::Pgm };
        for format in [native, Format::Png] {
            let back = decode(&encode(&image, format).unwrap()).unwrap();
            prop_assert_eq!(&back, &image);
        }
    }
}

#[test]
fn extrema_bound_every_pixel() {
    let img = GrayImage::from_fn(50, 30, |x, y| ((x * 37 + y * 91) % 200 + 20) as u8).unwrap();
    let e = global_extrema(&img).unwrap();
    assert!(img.data().iter().all(|&v| e.min_val <= v && v <= e.max_val));
    assert_eq!((e.min_val, e.max_val), (20, 219));
}
