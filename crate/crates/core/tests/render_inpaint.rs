mod oracles;

use docforge_core::font::FontSet;
use docforge_core::inpaint::{inpaint_region_with_mode, inpaint_with_mode, FillParams, InpaintMode, build_text_mask_sauvola};
use docforge_core::raster::RgbImage;
use docforge_core::render::{fit_text_scale, measure_text, render_text};
use docforge_core::Rect;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &["a", "Hi", "text", "1234", "Mixed Case", "wW", "...", "gyp"];

#[test]
fn binary_search_equals_exhaustive_scan() {
    let fonts = FontSet::embedded();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..300 {
        let font = &fonts.fonts()[rng.gen_range(0..fonts.len())];
        let text = WORDS[rng.gen_range(0..WORDS.len())];
        let (w, h) = (rng.gen_range(4..200), rng.gen_range(4..60));
        let got = fit_text_scale(text, font, w, h, 0, 0).ok().map(|s| s.scale_pct);
        let want = oracles::fit_scale_exhaustive(font, text, w, h, 100 * 200 + 100);
        assert_eq!(got, want, "{text} {w}x{h} {}", font.id);
    }
}

#[test]
fn measurement_matches_definition() {
    let fonts = FontSet::embedded();
    for f in fonts.fonts() {
        for k in [1, 50, 99, 100, 149, 150, 233, 400] {
            assert_eq!(measure_text("Ab c", f, k), oracles::extent_at(f, "Ab c", k));
        }
    }
}

#[test]
fn fit_is_tight() {
    let fonts = FontSet::embedded();
    let f = fonts.get("bold").unwrap();
    for (w, h) in [(50, 12), (120, 30), (33, 33)] {
        let s = fit_text_scale("abc", f, w, h, 1, 1).unwrap();
        let (ew, eh) = measure_text("abc", f, s.scale_pct);
        assert!(ew <= w - 2 && eh <= h - 2);
        let (nw, nh) = measure_text("abc", f, s.scale_pct + 1);
        assert!(nw > w - 2 || nh > h - 2);
    }
}

#[test]
fn doubling_region_grows_scale() {
    let fonts = FontSet::embedded();
    let f = fonts.get("mono").unwrap();
    for (w, h) in [(40, 10), (60, 16), (100, 25)] {
        let a = fit_text_scale("word", f, w, h, 0, 0).unwrap().scale_pct;
        let b = fit_text_scale("word", f, 2 * w, 2 * h, 0, 0).unwrap().scale_pct;
        // stroke rounding costs at most a couple of pixels at the larger size
        assert!(b > a && 10 * b >= 18 * a, "{a} -> {b}");
    }
}

#[test]
fn sauvola_mask_recovers_rendered_glyphs() {
    let fonts = FontSet::embedded();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for i in 0..40 {
        let f = &fonts.fonts()[i % fonts.len()];
        let bg = RgbImage::new(rng.gen_range(60..140), rng.gen_range(20..40), [245, 245, 240]);
        let p = render_text(WORDS[i % WORDS.len()], f, [15, 15, 15], &bg).unwrap();
        let iou = build_text_mask_sauvola(&p.pixels).iou(&p.glyph_mask);
        assert!(iou >= 0.8, "iou {iou} for {}", f.id);
    }
}

#[test]
fn inverted_crop_mask_covers_background() {
    let fonts = FontSet::embedded();
    let bg = RgbImage::new(80, 24, [10, 10, 10]);
    let p = render_text("abc", fonts.get("mono").unwrap(), [250, 250, 250], &bg).unwrap();
    let m = build_text_mask_sauvola(&p.pixels);
    // dark ground near glyphs is marked, white strokes are not
    for (i, &g) in p.glyph_mask.bits().iter().enumerate() {
        if g {
            assert!(!m.bits()[i]);
        }
    }
    assert!(m.count() > 0);
}

#[test]
fn disk_on_gradient_matches_harmonic_solution() {
    // a linear field is harmonic, so the exact fill is the gradient itself
    let (w, h) = (64u32, 64u32);
    let mut img = RgbImage::new(w, h, [0, 0, 0]);
    let value = |x: u32, y: u32| 40.0 + 2.0 * x as f64 + 1.0 * y as f64;
    for y in 0..h {
        for x in 0..w {
            let v = value(x, y).round() as u8;
            img.set(x, y, [v, v, v]);
        }
    }
    let mut hole = docforge_core::Mask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (x as f64 - 32.0, y as f64 - 32.0);
            if dx * dx + dy * dy <= 100.0 {
                hole.set(x, y, true);
                img.set(x, y, [255, 0, 0]);
            }
        }
    }
    docforge_core::inpaint::harmonic_fill(&mut img, &hole, &FillParams::default()).unwrap();
    let got = img.get(32, 32)[0] as f64;
    assert!((got - value(32, 32)).abs() <= 3.0, "{got} vs {}", value(32, 32));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn render_only_touches_glyph_mask(seed in any::<u64>(), wi in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fonts = FontSet::embedded();
        let f = &fonts.fonts()[rng.gen_range(0..fonts.len())];
        let (w, h) = (rng.gen_range(20..120), rng.gen_range(10..40));
        let data: Vec<u8> = (0..w * h * 3).map(|_| rng.gen()).collect();
        let bg = RgbImage::from_raw(w, h, data).unwrap();
        if let Ok(p) = render_text(WORDS[wi], f, [1, 2, 3], &bg) {
            for (i, &g) in p.glyph_mask.bits().iter().enumerate() {
                if !g {
                    prop_assert_eq!(p.pixels.at(i), bg.at(i));
                } else {
                    prop_assert_eq!(p.pixels.at(i), [1, 2, 3]);
                }
            }
        }
    }

    #[test]
    fn changed_mask_is_pixel_diff(seed in any::<u64>(), full in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (rng.gen_range(8..60u32), rng.gen_range(8..40u32));
        let mut img = RgbImage::new(w, h, [230, 220, 200]);
        for _ in 0..20 {
            let (x, y) = (rng.gen_range(0..w), rng.gen_range(0..h));
            img.set(x, y, [rng.gen_range(0..80), 10, 10]);
        }
        let mode = if full { InpaintMode::FullBox } else { InpaintMode::TextOnly };
        let r = inpaint_with_mode(&img, mode, &FillParams::default()).unwrap();
        for i in 0..img.pixel_count() {
            prop_assert_eq!(r.changed.bits()[i], r.pixels.at(i) != img.at(i));
        }
        let region = Rect::new(2, 2, w - 4, h - 4);
        let rr = inpaint_region_with_mode(&img, region, mode, &FillParams::default()).unwrap();
        let before = img.crop(region).unwrap();
        for i in 0..before.pixel_count() {
            prop_assert_eq!(rr.changed.bits()[i], rr.pixels.at(i) != before.at(i));
        }
    }
}
