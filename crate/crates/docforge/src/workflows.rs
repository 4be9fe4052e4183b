//! The command-line workflows as library calls. Documents are processed on a
//! rayon pool; every per-document result is merged in `doc_id` order, so output
//! bytes do not depend on the worker count.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use docforge_core::dedup::{patch_hashes, EvalIndex, PatchHashSet};
use docforge_core::font::FontSet;
use docforge_core::generator::{
    crop_id, generate_tampered, page_records, split_crop_id, CropDatabase, CropRecord, Page, TamperOutput,
};
use docforge_core::mining::{mine_document, MiningDoc};
use docforge_core::quality::{assess_document, AlgorithmicScorer, Origin, QualityScorer, QualitySelector};
use docforge_core::rng::doc_rng;
use docforge_core::segments::{LineSegment, SegmentKind};
use docforge_core::similarity::{ClassicalEmbedder, CropEmbedder, EmbeddingStore};
use docforge_core::synth::synth_page;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::corpus::{load_corpus, manifest_bytes, read_manifest, resolve, Corpus, ManifestEntry};
use crate::io::{encode_png_gray, encode_png_rgb, file_stem, read_records, read_rgb, write_atomic, Header, Jsonl};
use crate::records::{CropEntry, QualityEntry, RegionEntry, RemovalEntry, TupleEntry};
use crate::stores::{load_embeddings, load_scores, save_embeddings, save_scores};
use crate::{Error, Result};

/// Resolved run settings shared by every workflow.
pub struct Context {
    pub config: Config,
    pub seed: u64,
    pub strict: bool,
    pool: rayon::ThreadPool,
}

impl Context {
    /// `workers == 0` uses every available core.
    pub fn new(config: Config, seed: u64, workers: usize, strict: bool) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        Ok(Self {
            config,
            seed,
            strict,
            pool,
        })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    fn header(&self, command: &str) -> Header {
        Header::new(command, self.seed)
    }
}

/// A loaded corpus with its segments.
pub struct Prepared {
    pub corpus: Corpus,
    pub segments: Vec<Vec<LineSegment>>,
}

impl Prepared {
    pub fn page(&self, i: usize) -> Page<'_> {
        let d = &self.corpus.docs[i];
        Page {
            ordinal: d.ordinal,
            doc_id: &d.record.doc_id,
            image: &d.image,
            segments: &self.segments[i],
        }
    }
}

pub fn prepare(ctx: &Context, manifest: &Path, contrastive: bool) -> Result<Prepared> {
    let seg_cfg = ctx.config.segments.to_core(contrastive);
    ctx.install(|| {
        let corpus = load_corpus(manifest, ctx.strict)?;
        let segments: Vec<Vec<LineSegment>> = corpus.docs.par_iter().map(|d| d.segments(&seg_cfg)).collect();
        if let Some((i, _)) = segments.iter().enumerate().find(|(_, s)| s.len() >= 1 << 24) {
            return Err(Error::Corpus(format!("{}: too many segments", corpus.docs[i].record.doc_id)));
        }
        log::info!("loaded {} documents ({} skipped)", corpus.docs.len(), corpus.skips.len());
        Ok(Prepared { corpus, segments })
    })
}

fn embedder_for(store: &Option<EmbeddingStore>) -> &dyn CropEmbedder {
    match store {
        Some(s) => s,
        None => &ClassicalEmbedder,
    }
}

fn optional_store(path: Option<&Path>) -> Result<Option<EmbeddingStore>> {
    path.map(load_embeddings).transpose()
}

/// Score, filter and embed every segment.
pub fn database(ctx: &Context, p: &Prepared, scorer: &dyn QualityScorer, embedder: &dyn CropEmbedder) -> Result<CropDatabase> {
    let tau2 = ctx.config.generation.tau2;
    let per_doc: Vec<Result<Vec<CropRecord>>> = ctx.install(|| {
        (0..p.corpus.docs.len())
            .into_par_iter()
            .map(|i| Ok(page_records(&p.page(i), scorer, embedder, tau2)?))
            .collect()
    });
    let mut all = Vec::new();
    for r in per_doc {
        all.extend(r?);
    }
    Ok(CropDatabase::from_records(all)?)
}

fn crop_entries(p: &Prepared, db: &CropDatabase) -> Vec<CropEntry> {
    db.records()
        .iter()
        .map(|r| {
            let (ord, seg) = split_crop_id(r.crop_id);
            let doc = &p.corpus.docs[ord as usize];
            CropEntry::from_record(doc, &p.segments[ord as usize][seg], r)
        })
        .collect()
}

/// Rebuild a database from a crop manifest written by [`build_db`] against the
/// same corpus and segment settings.
pub fn load_database(ctx: &Context, p: &Prepared, crops: &Path, embedder: &dyn CropEmbedder) -> Result<CropDatabase> {
    let (_, entries) = read_records::<CropEntry>(crops)?;
    let mismatch = |e: &CropEntry, why: &str| {
        Error::Corpus(format!(
            "{}: crop {} ({}) does not match the corpus: {why}",
            crops.display(),
            e.crop_id,
            e.doc_id
        ))
    };
    let records: Vec<Result<CropRecord>> = ctx.install(|| {
        entries
            .par_iter()
            .map(|e| {
                let doc = p.corpus.find(&e.doc_id).ok_or_else(|| mismatch(e, "unknown document"))?;
                let (ord, seg) = split_crop_id(e.crop_id);
                if ord != doc.ordinal || seg != e.segment {
                    return Err(mismatch(e, "crop id"));
                }
                let s = p.segments[ord as usize].get(seg).ok_or_else(|| mismatch(e, "segment index"))?;
                if crate::records::xywh(s.rect) != e.bbox || s.char_count != e.chars {
                    return Err(mismatch(e, "segment geometry"));
                }
                let pixels = doc.image.crop(s.rect)?;
                let blank = s.is_blank();
                let embedding = embedder.embed(&pixels, blank, Some(e.crop_id))?;
                Ok(CropRecord {
                    crop_id: e.crop_id,
                    doc: ord,
                    rect: s.rect,
                    text: s.text.clone(),
                    is_blank: blank,
                    char_count: s.char_count,
                    quality: e.quality,
                    embedding,
                    pixels,
                })
            })
            .collect()
    });
    Ok(CropDatabase::from_records(records.into_iter().collect::<Result<_>>()?)?)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BuildDbSummary {
    pub documents: usize,
    pub skipped_documents: usize,
    pub segments: usize,
    pub retained: usize,
    pub retained_text: usize,
    pub retained_blank: usize,
    pub buckets: usize,
}

/// Writes `crops.jsonl` and `embeddings.femb` into `out`.
pub fn build_db(ctx: &Context, p: &Prepared, scores: Option<&Path>, embeddings: Option<&Path>, out: &Path) -> Result<BuildDbSummary> {
    let external = scores.map(load_scores).transpose()?;
    let algorithmic = AlgorithmicScorer {
        params: ctx.config.quality.integrity(),
    };
    let scorer: &dyn QualityScorer = match &external {
        Some(s) => s,
        None => &algorithmic,
    };
    let store = optional_store(embeddings)?;
    let db = database(ctx, p, scorer, embedder_for(&store))?;

    let mut crops = Jsonl::create(&out.join("crops.jsonl"), &ctx.header("build-db"))?;
    for e in crop_entries(p, &db) {
        crops.push(&e)?;
    }
    crops.finish()?;
    let dim = db.records().first().map_or(embedder_for(&store).dim(), |r| r.embedding.dim());
    let femb = EmbeddingStore::from_entries(dim, db.records().iter().map(|r| (r.crop_id, r.embedding.clone())))?;
    save_embeddings(&out.join("embeddings.femb"), &femb)?;

    let blank = db.records().iter().filter(|r| r.is_blank).count();
    Ok(BuildDbSummary {
        documents: p.corpus.docs.len(),
        skipped_documents: p.corpus.skips.len(),
        segments: p.segments.iter().map(Vec::len).sum(),
        retained: db.len(),
        retained_text: db.len() - blank,
        retained_blank: blank,
        buckets: db.buckets().count(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GenerateSummary {
    pub documents: usize,
    pub skipped_documents: usize,
    pub pristine_documents: usize,
    pub regions: usize,
    pub tampered_regions: usize,
    pub branches: BTreeMap<String, usize>,
    pub region_skips: BTreeMap<String, usize>,
}

impl GenerateSummary {
    fn add(&mut self, out: &TamperOutput) {
        self.documents += 1;
        self.pristine_documents += out.is_pristine() as usize;
        for r in &out.log {
            self.regions += 1;
            match (r.branch, r.skip_reason) {
                (Some(b), _) => {
                    self.tampered_regions += 1;
                    *self.branches.entry(b.as_str().into()).or_default() += 1;
                }
                (None, reason) => *self.region_skips.entry(reason.unwrap_or("none").into()).or_default() += 1,
            }
        }
    }
}

/// Tamper every document. Writes `images/`, `masks/`, `log.jsonl` and
/// `summary.json` into `out`. Without `db` the database is built in memory
/// with the algorithmic scorer.
pub fn generate(ctx: &Context, p: &Prepared, db: Option<&Path>, embeddings: Option<&Path>, out: &Path) -> Result<GenerateSummary> {
    let store = optional_store(embeddings)?;
    let embedder = embedder_for(&store);
    let db = match db {
        Some(dir) => load_database(ctx, p, &dir.join("crops.jsonl"), embedder)?,
        None => database(
            ctx,
            p,
            &AlgorithmicScorer {
                params: ctx.config.quality.integrity(),
            },
            embedder,
        )?,
    };
    let gen_cfg = ctx.config.generation.to_core();
    let ids: Vec<&str> = ctx.config.generation.fonts.iter().map(String::as_str).collect();
    let fonts = FontSet::embedded_subset(&ids).map_err(|e| Error::Config(e.to_string()))?;

    let mut stems = BTreeSet::new();
    for d in &p.corpus.docs {
        if !stems.insert(file_stem(&d.record.doc_id)) {
            return Err(Error::Corpus(format!("doc_id '{}' collides with another after sanitizing", d.record.doc_id)));
        }
    }
    let (images, masks) = (out.join("images"), out.join("masks"));
    let outputs: Vec<Result<TamperOutput>> = ctx.install(|| {
        (0..p.corpus.docs.len())
            .into_par_iter()
            .map(|i| {
                let page = p.page(i);
                let t = generate_tampered(&page, &db, &gen_cfg, embedder, &fonts, ctx.seed)?;
                let stem = file_stem(page.doc_id);
                write_atomic(&images.join(format!("{stem}.png")), &encode_png_rgb(&t.image))?;
                write_atomic(&masks.join(format!("{stem}.png")), &encode_png_gray(&t.mask))?;
                Ok(t)
            })
            .collect()
    });

    let mut summary = GenerateSummary {
        skipped_documents: p.corpus.skips.len(),
        ..Default::default()
    };
    let mut log = Jsonl::create(&out.join("log.jsonl"), &ctx.header("generate"))?;
    for (i, t) in outputs.into_iter().enumerate() {
        let t = t?;
        let doc_id = &p.corpus.docs[i].record.doc_id;
        for r in &t.log {
            let source_doc = r
                .source_crop
                .map(|c| p.corpus.docs[split_crop_id(c).0 as usize].record.doc_id.clone());
            log.push(&RegionEntry::new(doc_id, r, source_doc))?;
        }
        summary.add(&t);
    }
    log.finish()?;
    let json = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    write_atomic(&out.join("summary.json"), &json)?;
    Ok(summary)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MineSummary {
    pub documents: usize,
    pub tuples: usize,
    pub short_tuples: usize,
    pub negatives: BTreeMap<String, usize>,
}

/// Mine contrastive tuples into a line-delimited file at `out`.
pub fn mine_pairs(ctx: &Context, p: &Prepared, out: &Path) -> Result<MineSummary> {
    let mut cfg = ctx.config.mining.to_core();
    cfg.strict |= ctx.strict;
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    let docs: Vec<MiningDoc<'_>> = p
        .corpus
        .docs
        .iter()
        .zip(&p.segments)
        .map(|(d, s)| MiningDoc {
            doc_id: &d.record.doc_id,
            image: &d.image,
            segments: s,
            stats: d.stats,
        })
        .collect();
    let mut summary = MineSummary {
        documents: docs.len(),
        ..Default::default()
    };
    let mut file = Jsonl::create(out, &ctx.header("mine-pairs"))?;
    // bounded batches keep at most a few documents' tuples in memory
    let batch = ctx.workers().max(1) * 2;
    let mut start = 0;
    while start < docs.len() {
        let end = (start + batch).min(docs.len());
        let per_doc: Vec<Result<Vec<TupleEntry>>> = ctx.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| {
                    let tuples = mine_document(&docs, i, &cfg, ctx.seed)?;
                    Ok(tuples.iter().map(|t| TupleEntry::new(&p.corpus.docs, &p.segments, t)).collect())
                })
                .collect()
        });
        for tuples in per_doc {
            for t in tuples? {
                summary.tuples += 1;
                summary.short_tuples += t.short as usize;
                for n in &t.negatives {
                    *summary.negatives.entry(n.kind().into()).or_default() += 1;
                }
                file.push(&t)?;
            }
        }
        start = end;
    }
    file.finish()?;
    Ok(summary)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct QualitySummary {
    pub documents_used: usize,
    pub stored: usize,
    pub well: usize,
    pub natural_ill: usize,
    pub perturbed_ill: usize,
    pub target: usize,
    pub target_reached: bool,
}

/// Documents assessed per parallel batch before feeding the selector.
const QUALITY_BATCH: usize = 64;

/// Label boxes for quality-model training into a line-delimited file at `out`.
pub fn prepare_quality_data(ctx: &Context, p: &Prepared, out: &Path) -> Result<QualitySummary> {
    let cfg = ctx.config.quality.to_core();
    let mut selector = QualitySelector::new(cfg.clone());
    let mut file = Jsonl::create(out, &ctx.header("prepare-quality-data"))?;
    let mut summary = QualitySummary {
        target: cfg.target,
        ..Default::default()
    };
    let n = p.corpus.docs.len();
    let mut start = 0;
    while start < n && !selector.is_full() {
        let end = (start + QUALITY_BATCH).min(n);
        let batch: Vec<_> = ctx.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| {
                    let d = &p.corpus.docs[i];
                    let mut rng = doc_rng(ctx.seed, &d.record.doc_id);
                    assess_document(&d.image, &p.segments[i], &cfg, &mut rng)
                })
                .collect()
        });
        for (i, candidates) in (start..end).zip(batch) {
            if selector.is_full() {
                break;
            }
            summary.documents_used += 1;
            for l in selector.take_document(&candidates) {
                match l.origin {
                    Origin::Well => summary.well += 1,
                    Origin::NaturalIll => summary.natural_ill += 1,
                    Origin::PerturbedIll => summary.perturbed_ill += 1,
                }
                file.push(&QualityEntry::new(&p.corpus.docs[i], &l))?;
            }
        }
        start = end;
    }
    summary.stored = selector.stored();
    summary.target_reached = selector.is_full();
    if !summary.target_reached {
        log::warn!("quality dataset stopped at {} of {} examples", summary.stored, summary.target);
    }
    file.finish()?;
    Ok(summary)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub documents: usize,
    pub scored: usize,
    pub above_tau2: usize,
}

/// Algorithmic quality scores for every text segment, as a GSCR file.
pub fn score(ctx: &Context, p: &Prepared, out: &Path) -> Result<ScoreSummary> {
    let scorer = AlgorithmicScorer {
        params: ctx.config.quality.integrity(),
    };
    let per_doc: Vec<Result<Vec<(u64, f32)>>> = ctx.install(|| {
        (0..p.corpus.docs.len())
            .into_par_iter()
            .map(|i| {
                let d = &p.corpus.docs[i];
                p.segments[i]
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.kind == SegmentKind::Text)
                    .map(|(j, s)| {
                        let id = crop_id(d.ordinal, j);
                        Ok((id, scorer.score(&d.image, s.rect, id)? as f32))
                    })
                    .collect()
            })
            .collect()
    });
    let mut scores = BTreeMap::new();
    for r in per_doc {
        scores.extend(r?);
    }
    save_scores(out, &scores)?;
    let tau2 = ctx.config.generation.tau2;
    Ok(ScoreSummary {
        documents: p.corpus.docs.len(),
        scored: scores.len(),
        above_tau2: scores.values().filter(|&&s| s as f64 > tau2).count(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LeakageSummary {
    pub train: usize,
    pub eval: usize,
    pub removed: usize,
    pub retained: usize,
    pub unreadable: usize,
}

fn hash_manifest(ctx: &Context, manifest: &Path) -> Result<(Vec<String>, Vec<(ManifestEntry, Option<PatchHashSet>)>)> {
    let params = ctx.config.dedup.to_core();
    let lines: BTreeMap<usize, String> = crate::io::read_lines(manifest)?.into_iter().collect();
    let (entries, skips) = read_manifest(manifest)?;
    if ctx.strict {
        if let Some(s) = skips.first() {
            return Err(Error::Corpus(format!("{} line {}: {}", manifest.display(), s.line, s.reason)));
        }
    }
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let hashed: Vec<(ManifestEntry, Option<PatchHashSet>)> = ctx.install(|| {
        entries
            .par_iter()
            .map(|(_, e)| {
                let set = match read_rgb(&resolve(&base, &e.image)) {
                    Ok(img) => Some(patch_hashes(&img.to_gray(), &params)),
                    Err(err) => {
                        log::warn!("{}: unreadable image for {}: {err}", manifest.display(), e.doc_id);
                        None
                    }
                };
                (e.clone(), set)
            })
            .collect()
    });
    let raw = entries.iter().map(|(n, _)| lines[n].clone()).collect();
    Ok((raw, hashed))
}

/// Remove training images whose patch hashes intersect any evaluation image.
/// Writes `retained.jsonl` (the surviving manifest lines, verbatim) and
/// `removed.jsonl` into `out`.
pub fn filter_leakage(ctx: &Context, train: &Path, eval: &Path, out: &Path) -> Result<LeakageSummary> {
    let (_, evals) = hash_manifest(ctx, eval)?;
    let mut index = EvalIndex::new();
    let mut unreadable = 0;
    for (i, (_, set)) in evals.iter().enumerate() {
        match set {
            Some(s) => index.insert(i, s),
            None => unreadable += 1,
        }
    }
    let (raw, trains) = hash_manifest(ctx, train)?;
    let mut retained = Vec::new();
    let mut report = Jsonl::create(&out.join("removed.jsonl"), &ctx.header("filter-leakage"))?;
    for ((e, set), line) in trains.iter().zip(raw) {
        let Some(set) = set else {
            unreadable += 1;
            continue;
        };
        match index.first_collision(set) {
            Some(j) => report.push(&RemovalEntry {
                doc_id: e.doc_id.clone(),
                eval_doc_id: evals[j].0.doc_id.clone(),
            })?,
            None => {
                retained.extend_from_slice(line.as_bytes());
                retained.push(b'\n');
            }
        }
    }
    write_atomic(&out.join("retained.jsonl"), &retained)?;
    let removed = report.finish()?;
    Ok(LeakageSummary {
        train: trains.len(),
        eval: evals.len(),
        removed,
        retained: trains.len() - removed - trains.iter().filter(|t| t.1.is_none()).count(),
        unreadable,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SynthSummary {
    pub pages: usize,
    pub chars: usize,
}

/// Render `pages` synthetic documents into `out/images` with a manifest at
/// `out/manifest.jsonl`.
pub fn synth_corpus(ctx: &Context, pages: usize, out: &Path) -> Result<SynthSummary> {
    let cfg = ctx.config.synth.to_core();
    let rendered: Vec<Result<ManifestEntry>> = ctx.install(|| {
        (0..pages)
            .into_par_iter()
            .map(|i| {
                let doc_id = format!("synth-{i:05}");
                let page = synth_page(&cfg, &mut doc_rng(ctx.seed, &doc_id))?;
                let rel = PathBuf::from("images").join(format!("{doc_id}.png"));
                write_atomic(&out.join(&rel), &encode_png_rgb(&page.image))?;
                let record = docforge_core::ocr::DocumentRecord {
                    doc_id,
                    image: rel.to_string_lossy().into_owned(),
                    width: page.image.width(),
                    height: page.image.height(),
                    chars: page.chars,
                };
                Ok(ManifestEntry::from_record(&record))
            })
            .collect()
    });
    let entries: Vec<ManifestEntry> = rendered.into_iter().collect::<Result<_>>()?;
    let mut bytes = Vec::new();
    serde_json::to_writer(&mut bytes, &ctx.header("synth-corpus")).expect("header serializes");
    bytes.push(b'\n');
    bytes.extend(manifest_bytes(&entries));
    write_atomic(&out.join("manifest.jsonl"), &bytes)?;
    Ok(SynthSummary {
        pages,
        chars: entries.iter().map(|e| e.chars.len()).sum(),
    })
}
