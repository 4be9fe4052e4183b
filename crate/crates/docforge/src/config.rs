//! TOML configuration. Every key is optional; missing keys take the engine
//! defaults, and unknown keys are rejected.

use std::path::Path;

use docforge_core::augment::AugmentParams;
use docforge_core::binarize::SauvolaParams;
use docforge_core::dedup::DedupParams;
use docforge_core::generator::GenerationConfig;
use docforge_core::mining::MiningConfig;
use docforge_core::quality::{IntegrityParams, QualityDatasetConfig};
use docforge_core::segments::SegmentConfig;
use docforge_core::synth::SynthConfig;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// 0 uses every available core.
    pub workers: usize,
    pub segments: SegmentSection,
    pub generation: GenerationSection,
    pub mining: MiningSection,
    pub quality: QualitySection,
    pub dedup: DedupSection,
    pub synth: SynthSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 0,
            segments: SegmentSection::default(),
            generation: GenerationSection::default(),
            mining: MiningSection::default(),
            quality: QualitySection::default(),
            dedup: DedupSection::default(),
            synth: SynthSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentSection {
    /// 0 derives the tolerance from the mean character height.
    pub line_tolerance: u32,
    /// 0 enumerates every run.
    pub max_run: usize,
}

impl Default for SegmentSection {
    fn default() -> Self {
        let d = SegmentConfig::default();
        Self {
            line_tolerance: d.line_tolerance.unwrap_or(0),
            max_run: d.max_run.unwrap_or(0),
        }
    }
}

impl SegmentSection {
    pub fn to_core(&self, contrastive_mode: bool) -> SegmentConfig {
        SegmentConfig {
            line_tolerance: (self.line_tolerance > 0).then_some(self.line_tolerance),
            max_run: (self.max_run > 0).then_some(self.max_run),
            contrastive_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSection {
    pub tau2: f64,
    pub p_ins: f64,
    pub p_inp: f64,
    pub p_spl: f64,
    pub n_max: usize,
    pub epsilon_prime: f64,
    pub color_delta: u8,
    pub fonts: Vec<String>,
    pub sauvola_window: u32,
    pub sauvola_k: f64,
    pub sauvola_r: f64,
}

impl Default for GenerationSection {
    fn default() -> Self {
        let d = GenerationConfig::default();
        Self {
            tau2: d.tau2,
            p_ins: d.p_ins,
            p_inp: d.p_inp,
            p_spl: d.p_spl,
            n_max: d.n_max,
            epsilon_prime: d.epsilon_prime,
            color_delta: d.color_delta,
            fonts: vec!["bold".into(), "mono".into(), "wide".into()],
            sauvola_window: d.sauvola.window,
            sauvola_k: d.sauvola.k,
            sauvola_r: d.sauvola.r,
        }
    }
}

impl GenerationSection {
    pub fn to_core(&self) -> GenerationConfig {
        GenerationConfig {
            tau2: self.tau2,
            p_ins: self.p_ins,
            p_inp: self.p_inp,
            p_spl: self.p_spl,
            n_max: self.n_max,
            epsilon_prime: self.epsilon_prime,
            color_delta: self.color_delta,
            sauvola: SauvolaParams {
                window: self.sauvola_window,
                k: self.sauvola_k,
                r: self.sauvola_r,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningSection {
    pub tau0: f64,
    pub tau1: f64,
    pub epsilon: f64,
    pub negatives: usize,
    pub augmented: usize,
    pub temperature: f64,
    pub strict: bool,
    pub augment: AugmentSection,
}

impl Default for MiningSection {
    fn default() -> Self {
        let d = MiningConfig::default();
        Self {
            tau0: d.tau0,
            tau1: d.tau1,
            epsilon: d.epsilon,
            negatives: d.negatives,
            augmented: d.augmented,
            temperature: d.temperature,
            strict: d.strict,
            augment: AugmentSection::default(),
        }
    }
}

impl MiningSection {
    pub fn to_core(&self) -> MiningConfig {
        MiningConfig {
            tau0: self.tau0,
            tau1: self.tau1,
            epsilon: self.epsilon,
            negatives: self.negatives,
            augmented: self.augmented,
            temperature: self.temperature,
            strict: self.strict,
            augment: self.augment.to_core(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSection {
    pub geometric_probability: f64,
    pub shift_fraction: [f64; 2],
    pub contrast: [f64; 2],
    pub brightness: f64,
    pub hue_degrees: f64,
    pub saturation: [f64; 2],
    pub value: [f64; 2],
    pub motion_lengths: Vec<u32>,
    pub rgb_shift: i32,
    pub jitter: [f64; 2],
    pub text_color_shift: i32,
    pub min_diff_ratio: f64,
    pub min_l2: f64,
    pub max_attempts: u32,
}

impl Default for AugmentSection {
    fn default() -> Self {
        let d = AugmentParams::default();
        let pair = |p: (f64, f64)| [p.0, p.1];
        Self {
            geometric_probability: d.geometric_probability,
            shift_fraction: pair(d.shift_fraction),
            contrast: pair(d.contrast),
            brightness: d.brightness,
            hue_degrees: d.hue_degrees,
            saturation: pair(d.saturation),
            value: pair(d.value),
            motion_lengths: d.motion_lengths,
            rgb_shift: d.rgb_shift,
            jitter: pair(d.jitter),
            text_color_shift: d.text_color_shift,
            min_diff_ratio: d.min_diff_ratio,
            min_l2: d.min_l2,
            max_attempts: d.max_attempts,
        }
    }
}

impl AugmentSection {
    pub fn to_core(&self) -> AugmentParams {
        let pair = |p: [f64; 2]| (p[0], p[1]);
        AugmentParams {
            geometric_probability: self.geometric_probability,
            shift_fraction: pair(self.shift_fraction),
            contrast: pair(self.contrast),
            brightness: self.brightness,
            hue_degrees: self.hue_degrees,
            saturation: pair(self.saturation),
            value: pair(self.value),
            motion_lengths: self.motion_lengths.clone(),
            rgb_shift: self.rgb_shift,
            jitter: pair(self.jitter),
            text_color_shift: self.text_color_shift,
            min_diff_ratio: self.min_diff_ratio,
            min_l2: self.min_l2,
            max_attempts: self.max_attempts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualitySection {
    pub target: usize,
    pub width_bin_edges: Vec<u32>,
    /// 0 splits the target evenly over (width bin, label) buckets.
    pub cap_per_bucket: usize,
    pub natural_ill_share: f64,
    pub rho: f64,
    pub min_component_area: u64,
}

impl Default for QualitySection {
    fn default() -> Self {
        let d = QualityDatasetConfig::default();
        Self {
            target: d.target,
            width_bin_edges: d.width_bin_edges,
            cap_per_bucket: d.cap_per_bucket.unwrap_or(0),
            natural_ill_share: d.natural_ill_share,
            rho: d.rho,
            min_component_area: d.integrity.min_component_area,
        }
    }
}

impl QualitySection {
    pub fn to_core(&self) -> QualityDatasetConfig {
        QualityDatasetConfig {
            target: self.target,
            width_bin_edges: self.width_bin_edges.clone(),
            cap_per_bucket: (self.cap_per_bucket > 0).then_some(self.cap_per_bucket),
            natural_ill_share: self.natural_ill_share,
            rho: self.rho,
            integrity: self.integrity(),
        }
    }

    pub fn integrity(&self) -> IntegrityParams {
        IntegrityParams {
            min_component_area: self.min_component_area,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupSection {
    pub stride: u32,
    pub skip_constant_patches: bool,
}

impl Default for DedupSection {
    fn default() -> Self {
        let d = DedupParams::default();
        Self {
            stride: d.stride,
            skip_constant_patches: d.skip_constant_patches,
        }
    }
}

impl DedupSection {
    pub fn to_core(&self) -> DedupParams {
        DedupParams {
            stride: self.stride,
            skip_constant_patches: self.skip_constant_patches,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    pub scale: u32,
    pub line_gap: u32,
    pub line_chars: [usize; 2],
    pub space_probability: f64,
    pub noise: u8,
}

impl Default for SynthSection {
    fn default() -> Self {
        let d = SynthConfig::default();
        Self {
            width: d.width,
            height: d.height,
            margin: d.margin,
            scale: d.scale,
            line_gap: d.line_gap,
            line_chars: [d.line_chars.0, d.line_chars.1],
            space_probability: d.space_probability,
            noise: d.noise,
        }
    }
}

impl SynthSection {
    pub fn to_core(&self) -> SynthConfig {
        SynthConfig {
            width: self.width,
            height: self.height,
            margin: self.margin,
            scale: self.scale,
            line_gap: self.line_gap,
            line_chars: (self.line_chars[0], self.line_chars[1]),
            space_probability: self.space_probability,
            noise: self.noise,
            ..SynthConfig::default()
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: docforge_core::Error| Error::Config(e.to_string());
        self.generation.to_core().validate().map_err(wrap)?;
        self.mining.to_core().validate().map_err(wrap)?;
        self.dedup.to_core().validate().map_err(wrap)?;
        if self.generation.fonts.is_empty() {
            return Err(Error::Config("generation.fonts must not be empty".into()));
        }
        let ids: Vec<&str> = self.generation.fonts.iter().map(String::as_str).collect();
        docforge_core::font::FontSet::embedded_subset(&ids).map_err(wrap)?;
        let q = &self.quality;
        if !(0.0..=1.0).contains(&q.natural_ill_share) || !(q.rho > 0.0 && q.rho <= 1.0) {
            return Err(Error::Config("quality.natural_ill_share must lie in [0, 1] and quality.rho in (0, 1]".into()));
        }
        if q.width_bin_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("quality.width_bin_edges must increase".into()));
        }
        let s = &self.synth;
        if s.scale < 2 || s.line_chars[0] == 0 || s.line_chars[0] > s.line_chars[1] {
            return Err(Error::Config("synth.scale must be at least 2 and synth.line_chars a nonempty range".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
