//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use docforge::config::Config;
use docforge::io::{read_records, read_rgb};
use docforge::records::{rect, RegionEntry};
use docforge::workflows::{self, Context};
use docforge_core::binarize::{connected_components, otsu_from_histogram, sauvola_threshold_map, SauvolaParams};
use docforge_core::dedup::{patch_hashes, DedupParams, EvalIndex};
use docforge_core::font::FontSet;
use docforge_core::generator::{generate_tampered, Gate, GenerationConfig};
use docforge_core::mining::{contrastive_loss, contrastive_loss_from_similarities};
use docforge_core::quality::{
    border_integrity_test, delta_max, perturb_box, sample_offset, AlgorithmicScorer, IntegrityParams, IntegritySubject,
};
use docforge_core::segments::{extract_line_segments, SegmentConfig, SegmentKind};
use docforge_core::similarity::ClassicalEmbedder;
use docforge_core::synth::{synth_page, SynthConfig};
use docforge_core::{GrayImage, Mask, Rect, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

fn segment_law() -> Outcome {
    let t = Instant::now();
    let cfg = SegmentConfig {
        max_run: None,
        ..SegmentConfig::default()
    };
    let mut total = 0;
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
        let synth = SynthConfig {
            line_chars: (rng.gen_range(1..8), rng.gen_range(8..30)),
            ..SynthConfig::default()
        };
        let page = synth_page(&synth, &mut rng).map_err(|e| e.to_string())?;
        let segs = extract_line_segments(&page.chars, synth.width, synth.height, &cfg);
        let text = segs.iter().filter(|s| s.kind == SegmentKind::Text).count();
        let want = oracles::segment_count(&page.line_lengths);
        ensure(text == want, || format!("page {seed}: {text} text segments, expected {want}"))?;
        total += text;
    }
    within(t.elapsed(), 10.0)?;
    Ok(format!("200 pages, {total} segments, 0 failures, {:.2}s", t.elapsed().as_secs_f64()))
}

fn binarization() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for i in 0..1000 {
        let mut h = [0u64; 256];
        for _ in 0..rng.gen_range(1..=256) {
            h[rng.gen_range(0..256)] += rng.gen_range(1..200);
        }
        let (a, b) = (otsu_from_histogram(&h), oracles::otsu_exhaustive(&h));
        ensure(a == b, || format!("histogram {i}: otsu {a}, exhaustive {b}"))?;
    }
    let mut worst = 0f64;
    for _ in 0..30 {
        let (w, h) = (rng.gen_range(1..60), rng.gen_range(1..60));
        let g = GrayImage::from_raw(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap();
        let fast = sauvola_threshold_map(&g, &SauvolaParams::default());
        let slow = oracles::sauvola_naive(&g, 25, 0.2, 128.0);
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst < 1e-6, || format!("sauvola max deviation {worst:e}"))?;
    for i in 0..1000 {
        let density = 0.1 + 0.8 * (i as f64 / 1000.0);
        let m = Mask::from_bits(16, 16, (0..256).map(|_| rng.gen_bool(density)).collect()).unwrap();
        let got: Vec<_> = connected_components(&m).iter().map(|c| (c.x, c.y, c.w, c.h, c.area)).collect();
        ensure(got == oracles::flood_fill_components(&m), || format!("component mismatch on image {i}"))?;
    }
    within(t.elapsed(), 60.0)?;
    Ok(format!(
        "1000 histograms, sauvola max dev {worst:.1e}, 1000 label images, {:.2}s",
        t.elapsed().as_secs_f64()
    ))
}

fn fill(img: &mut RgbImage, r: Rect, c: [u8; 3]) {
    for y in r.y..r.y1() {
        for x in r.x..r.x1() {
            img.set(x, y, c);
        }
    }
}

fn border_integrity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let p = IntegrityParams::default();
    let mut per_kind = [0usize; 3];
    for i in 0..500 {
        let mut page = RgbImage::new(140, 90, [245, 245, 240]);
        let b = Rect::new(45, 30, rng.gen_range(20..44), rng.gen_range(14..28));
        let (gw, gh) = (rng.gen_range(3..8), rng.gen_range(3..8));
        let gy = rng.gen_range(b.y + 2..b.y1() - gh - 1);
        let kind = rng.gen_range(0..3);
        let glyph = match kind {
            0 => Rect::new(rng.gen_range(b.x + 2..b.x1() - gw - 1), gy, gw, gh),
            1 => match rng.gen_range(0..2) {
                0 => Rect::new(b.x, gy, gw, gh),
                _ => Rect::new(b.x1() - gw, gy, gw, gh),
            },
            // straddles the left edge with at least 2 columns (area >= 6) inside
            _ => {
                let inside = rng.gen_range(2..gw);
                Rect::new(b.x - (gw - inside), gy, gw, gh)
            }
        };
        let ink = rng.gen_range(0..90);
        fill(&mut page, glyph, [ink, ink, ink]);
        per_kind[kind] += 1;
        let truth = kind != 0;
        let global = border_integrity_test(IntegritySubject::Global { image: &page, rect: b }, true, &p)
            .map_err(|e| e.to_string())?;
        let crop = page.crop(b).unwrap().to_gray();
        let local = border_integrity_test(IntegritySubject::Local { crop: &crop }, true, &p).map_err(|e| e.to_string())?;
        ensure(global == truth && local == truth, || {
            format!("case {i} kind {kind}: global {global} local {local} truth {truth}")
        })?;
    }
    for i in 0..500 {
        let (w, h) = (rng.gen_range(6..40), rng.gen_range(6..30));
        let mut crop = RgbImage::new(w, h, [255, 255, 255]);
        let ink = rng.gen_range(0..128u8);
        for _ in 0..rng.gen_range(0..4) {
            let (bw, bh) = (rng.gen_range(1..=w.min(8)), rng.gen_range(1..=h.min(8)));
            fill(
                &mut crop,
                Rect::new(rng.gen_range(0..=w - bw), rng.gen_range(0..=h - bh), bw, bh),
                [ink, ink, ink],
            );
        }
        let mut page = RgbImage::new(w + 80, h + 80, [255, 255, 255]);
        page.paste(&crop, 40, 40).unwrap();
        let gray = crop.to_gray();
        for invert in [true, false] {
            let local = border_integrity_test(IntegritySubject::Local { crop: &gray }, invert, &p).unwrap();
            let global =
                border_integrity_test(IntegritySubject::Global { image: &page, rect: Rect::new(40, 40, w, h) }, invert, &p)
                    .unwrap();
            ensure(local == global, || format!("embedding {i}: local {local} global {global}"))?;
        }
    }
    Ok(format!(
        "500 constructed crops (inside {}, edge {}, straddling {}) 100%, 500 blank-page embeddings equivalent",
        per_kind[0], per_kind[1], per_kind[2]
    ))
}

/// χ² p-value of `counts` against Pr(k) ∝ ρ^(k−1) on 1..=dmax, merging the
/// tail until every expected count reaches 5.
fn geometric_p_value(counts: &[u64], rho: f64) -> f64 {
    let n: u64 = counts.iter().sum();
    let z: f64 = (0..counts.len()).map(|i| rho.powi(i as i32)).sum();
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o, mut e) = (0f64, 0f64);
    for (i, &c) in counts.iter().enumerate() {
        o += c as f64;
        e += n as f64 * rho.powi(i as i32) / z;
        if e >= 5.0 {
            obs.push(o);
            exp.push(e);
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 {
        *obs.last_mut().unwrap() += o;
        *exp.last_mut().unwrap() += e;
    }
    let chi: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((obs.len() - 1) as f64).unwrap().cdf(chi)
}

fn perturbation_law() -> Outcome {
    ensure(delta_max(10, 10) == 3, || format!("delta_max(10,10) = {}", delta_max(10, 10)))?;
    ensure(delta_max(100, 100) == 20, || format!("delta_max(100,100) = {}", delta_max(100, 100)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let dmax = delta_max(40, 24);
    let mut counts = vec![0u64; dmax as usize];
    for _ in 0..100_000 {
        counts[(sample_offset(&mut rng, dmax, 0.5) - 1) as usize] += 1;
    }
    let p1 = geometric_p_value(&counts, 0.5);
    ensure(p1 > 0.01, || format!("sampler χ² p = {p1:.4}"))?;

    // offsets read back from perturbed boxes: left side, away from clipping
    let b = Rect::new(150, 150, 60, 60);
    let dmax = delta_max(60, 60);
    let mut counts = vec![0u64; dmax as usize];
    let mut samples = 0;
    for _ in 0..100_000 {
        let pert = perturb_box(b, 400, 400, &mut rng, 0.5);
        let d = (pert.rect.x as i64 - b.x as i64).unsigned_abs();
        if d > 0 {
            counts[d as usize - 1] += 1;
            samples += 1;
        }
    }
    let p2 = geometric_p_value(&counts, 0.5);
    ensure(p2 > 0.01, || format!("perturb_box χ² p = {p2:.4}"))?;
    Ok(format!(
        "Δmax(10,10)=3, Δmax(100,100)=20, sampler p={p1:.3} (100000 draws), box offsets p={p2:.3} ({samples} sides)"
    ))
}

fn loss_identities() -> Outcome {
    let tau = 0.1;
    let mut worst = 0f64;
    for &s in &[0.0, 0.5, -0.3, 1.0] {
        let l = contrastive_loss_from_similarities(s, &[s], tau);
        worst = worst.max((l - 2f64.ln()).abs());
        for n in [2usize, 10, 64, 256] {
            let l = contrastive_loss_from_similarities(s, &vec![s; n], tau);
            worst = worst.max((l - ((n + 1) as f64).ln()).abs());
        }
    }
    let v = [0.6f32, 0.8];
    let negs: Vec<&[f32]> = vec![&v; 7];
    let l = contrastive_loss(&v, &v, &negs, tau).map_err(|e| e.to_string())?;
    worst = worst.max((l - 8f64.ln()).abs());
    ensure(worst < 1e-9, || format!("identity deviation {worst:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for i in 0..1000 {
        let negs: Vec<f64> = (0..rng.gen_range(1..50)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = rng.gen_range(-1.0..0.99);
        let h = 1e-4;
        let (a, b) = (
            contrastive_loss_from_similarities(s, &negs, tau),
            contrastive_loss_from_similarities(s + h, &negs, tau),
        );
        ensure(b < a, || format!("case {i}: loss not decreasing ({a} -> {b})"))?;
    }
    Ok(format!("ln 2 and ln(N+1) within {worst:.1e}; 1000 finite-difference checks strictly decreasing"))
}

fn mask_consistency(dir: &Path) -> Outcome {
    let t = Instant::now();
    let ctx = Context::new(Config::default(), 7, 0, false).map_err(|e| e.to_string())?;
    let corpus = dir.join("mask-corpus");
    workflows::synth_corpus(&ctx, 100, &corpus).map_err(|e| e.to_string())?;
    let p = workflows::prepare(&ctx, &corpus.join("manifest.jsonl"), false).map_err(|e| e.to_string())?;
    let out = dir.join("mask-out");
    workflows::generate(&ctx, &p, None, None, &out).map_err(|e| e.to_string())?;
    let (_, log) = read_records::<RegionEntry>(&out.join("log.jsonl")).map_err(|e| e.to_string())?;
    let mut by_doc: BTreeMap<&str, Vec<&RegionEntry>> = BTreeMap::new();
    for r in &log {
        by_doc.entry(&r.doc_id).or_default().push(r);
    }
    let mut violations = 0u64;
    let mut checked = 0u64;
    let mut full = 0;
    for d in &p.corpus.docs {
        let id = &d.record.doc_id;
        let img = read_rgb(&out.join(format!("images/{id}.png"))).map_err(|e| e.to_string())?;
        let mask = image::open(out.join(format!("masks/{id}.png"))).map_err(|e| e.to_string())?.into_luma8();
        for (i, m) in mask.as_raw().iter().enumerate() {
            if *m == 0 && img.at(i) != d.image.at(i) {
                violations += 1;
            }
            if *m != 0 && *m != 255 {
                violations += 1;
            }
        }
        checked += d.image.pixel_count() as u64;
        for r in by_doc.get(id.as_str()).into_iter().flatten() {
            let b = rect(r.region);
            match r.branch.as_deref() {
                Some("inpainting") => {
                    for y in b.y..b.y1() {
                        for x in b.x..b.x1() {
                            let changed = img.get(x, y) != d.image.get(x, y);
                            violations += ((mask.get_pixel(x, y).0[0] == 255) != changed) as u64;
                        }
                    }
                }
                Some(_) => {
                    full += 1;
                    for y in b.y..b.y1() {
                        for x in b.x..b.x1() {
                            violations += (mask.get_pixel(x, y).0[0] != 255) as u64;
                        }
                    }
                }
                None => {}
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violating pixels"))?;
    within(t.elapsed(), 300.0)?;
    Ok(format!(
        "100 documents, {checked} pixels, {full} full-box regions, 0 violations, {:.1}s",
        t.elapsed().as_secs_f64()
    ))
}

fn branch_calibration() -> Outcome {
    let cfg = GenerationConfig::default();
    let synth = SynthConfig::default();
    let seg = SegmentConfig::default();
    let pages: Vec<(String, RgbImage, Vec<docforge_core::segments::LineSegment>)> = (0..40)
        .map(|i| {
            let id = format!("cal-{i:03}");
            let page = synth_page(&synth, &mut docforge_core::rng::doc_rng(3, &id)).unwrap();
            let segs = extract_line_segments(&page.chars, synth.width, synth.height, &seg);
            (id, page.image, segs)
        })
        .collect();
    let db = docforge_core::generator::build_crop_database(
        pages.iter().enumerate().map(|(i, (id, img, segs))| docforge_core::generator::Page {
            ordinal: i as u32,
            doc_id: id,
            image: img,
            segments: segs,
        }),
        &AlgorithmicScorer::default(),
        &ClassicalEmbedder,
        cfg.tau2,
    )
    .map_err(|e| e.to_string())?;
    let fonts = FontSet::embedded();
    use rayon::prelude::*;
    let logs: Vec<_> = (0..40 * 120)
        .into_par_iter()
        .map(|k| {
            let i = k % 40;
            let (id, img, segs) = &pages[i];
            let page = docforge_core::generator::Page {
                ordinal: i as u32,
                doc_id: id,
                image: img,
                segments: segs,
            };
            generate_tampered(&page, &db, &cfg, &ClassicalEmbedder, &fonts, k as u64).map(|o| o.log)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (mut blank, mut ins, mut non_ins, mut inp, mut cs, mut spl, mut regions) = (0, 0, 0, 0, 0, 0, 0);
    for r in logs.iter().flatten() {
        regions += 1;
        let first = r.gates[0];
        if r.region_blank {
            blank += 1;
            ins += (first == Gate::Insertion) as usize;
        }
        if first != Gate::Insertion {
            non_ins += 1;
            inp += (first == Gate::Inpaint) as usize;
        }
        if let Some(g) = r.gates.iter().find(|g| matches!(g, Gate::Splice | Gate::CopyMove)) {
            cs += 1;
            spl += (*g == Gate::Splice) as usize;
        }
    }
    ensure(regions >= 10_000, || format!("only {regions} regions"))?;
    let f = |a: usize, b: usize| a as f64 / b.max(1) as f64;
    let (fi, fp, fs) = (f(ins, blank), f(inp, non_ins), f(spl, cs));
    for (name, got, want) in [("p_ins", fi, cfg.p_ins), ("p_inp", fp, cfg.p_inp), ("p_spl", fs, cfg.p_spl)] {
        ensure((got - want).abs() < 0.02, || format!("{name}: {got:.4} vs {want}"))?;
    }
    Ok(format!(
        "{regions} regions: insertion|blank {fi:.4} ({blank}), inpaint|not-insertion {fp:.4} ({non_ins}), splice|copy-splice {fs:.4} ({cs})"
    ))
}

fn determinism(dir: &Path) -> Outcome {
    let bin = env!("CARGO_BIN_EXE_docforge");
    let run = |args: &[&str]| -> Result<(), String> {
        let o = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())
    };
    let root = dir.join("det");
    let s = |p: &Path| p.to_string_lossy().into_owned();
    let corpus = root.join("corpus");
    run(&["synth-corpus", "--pages", "10", "--seed", "1", "--out", &s(&corpus)])?;
    let manifest = s(&corpus.join("manifest.jsonl"));
    let mut trees = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "1"), ("c", "8")] {
        let out = root.join(name);
        run(&["generate", "--seed", "7", "--workers", workers, "--corpus", &manifest, "--out", &s(&out)])?;
        let mut files = Vec::new();
        for sub in ["images", "masks"] {
            let mut entries: Vec<_> = std::fs::read_dir(out.join(sub)).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
            entries.sort();
            for p in entries {
                let rel = s(p.strip_prefix(&out).unwrap());
                files.push((rel, std::fs::read(&p).map_err(|e| e.to_string())?));
            }
        }
        trees.push(files);
    }
    ensure(trees[0].len() == 20, || format!("{} output files", trees[0].len()))?;
    ensure(trees[0] == trees[1], || "two runs with --seed 7 differ".into())?;
    ensure(trees[0] == trees[2], || "1 and 8 workers differ".into())?;
    Ok("10-document fixture: 20 image/mask files identical across two runs and 1 vs 8 workers".into())
}

fn throughput() -> Outcome {
    let cfg = GenerationConfig::default();
    let synth = SynthConfig::default();
    let seg = SegmentConfig::default();
    let pages: Vec<(String, RgbImage, Vec<docforge_core::segments::LineSegment>)> = (0..20)
        .map(|i| {
            let id = format!("tp-{i:03}");
            let page = synth_page(&synth, &mut docforge_core::rng::doc_rng(5, &id)).unwrap();
            let segs = extract_line_segments(&page.chars, synth.width, synth.height, &seg);
            (id, page.image, segs)
        })
        .collect();
    let mk = |i: usize| docforge_core::generator::Page {
        ordinal: i as u32,
        doc_id: &pages[i].0,
        image: &pages[i].1,
        segments: &pages[i].2,
    };
    let t_db = Instant::now();
    let db = docforge_core::generator::build_crop_database(
        (0..pages.len()).map(mk),
        &AlgorithmicScorer::default(),
        &ClassicalEmbedder,
        cfg.tau2,
    )
    .map_err(|e| e.to_string())?;
    let db_time = t_db.elapsed();
    let fonts = FontSet::embedded();
    let mut regions = 0;
    let t = Instant::now();
    for seed in 0..10u64 {
        for i in 0..pages.len() {
            let out = generate_tampered(&mk(i), &db, &cfg, &ClassicalEmbedder, &fonts, seed).map_err(|e| e.to_string())?;
            regions += out.log.len();
        }
    }
    let gen = t.elapsed().as_secs_f64();
    let n = regions.max(1) as f64;
    // charge the whole database build to these regions
    let per = (gen + db_time.as_secs_f64()) / n;
    ensure(per <= 0.30, || format!("{per:.4}s per region over {regions} regions"))?;
    Ok(format!(
        "{per:.4}s per region over {regions} regions, single thread; generation alone {:.4}s, database build {:.2}s for {} crops",
        gen / n,
        db_time.as_secs_f64(),
        db.len()
    ))
}

fn dedup() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let p = DedupParams::default();
    let noise = |rng: &mut ChaCha8Rng, w: u32, h: u32| GrayImage::from_raw(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap();
    for trial in 0..200 {
        let mut eval = EvalIndex::new();
        let (sw, sh) = (rng.gen_range(64..160), rng.gen_range(64..160));
        let src = noise(&mut rng, sw, sh);
        eval.insert(0, &patch_hashes(&noise(&mut rng, 96, 96), &p));
        eval.insert(1, &patch_hashes(&src, &p));
        let (gw, gh) = (64 * rng.gen_range(2..5), 64 * rng.gen_range(2..5));
        let mut train = noise(&mut rng, gw, gh);
        // an exact, aligned 64x64 patch of the eval image
        let (sx, sy) = (64 * rng.gen_range(0..src.width() / 64), 64 * rng.gen_range(0..src.height() / 64));
        let (tx, ty) = (64 * rng.gen_range(0..gw / 64), 64 * rng.gen_range(0..gh / 64));
        for y in 0..64 {
            for x in 0..64 {
                train.set(tx + x, ty + y, src.get(sx + x, sy + y));
            }
        }
        let hit = eval.first_collision(&patch_hashes(&train, &p));
        ensure(hit == Some(1), || format!("trial {trial}: embedded patch not detected ({hit:?})"))?;
    }
    let mut eval = EvalIndex::new();
    for i in 0..1000 {
        eval.insert(i, &patch_hashes(&noise(&mut rng, 128, 128), &p));
    }
    let removed = (0..1000)
        .filter(|_| eval.first_collision(&patch_hashes(&noise(&mut rng, 128, 128), &p)).is_some())
        .count();
    ensure(removed == 0, || format!("{removed} of 1000 disjoint images removed"))?;
    Ok("200/200 aligned embeds removed; 0 removals among 1000 disjoint train images vs 1000 eval images".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path().to_path_buf();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("segment-count law", Box::new(segment_law)),
        ("binarization oracles", Box::new(binarization)),
        ("border-integrity correctness", Box::new(border_integrity)),
        ("perturbation law", Box::new(perturbation_law)),
        ("loss identities", Box::new(loss_identities)),
        ("mask-image consistency", Box::new({
            let d = d.clone();
            move || mask_consistency(&d)
        })),
        ("branch-probability calibration", Box::new(branch_calibration)),
        ("determinism", Box::new({
            let d = d.clone();
            move || determinism(&d)
        })),
        ("throughput budget", Box::new(throughput)),
        ("dedup filter", Box::new(dedup)),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS  {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
