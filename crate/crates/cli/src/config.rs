//! Effective run settings.
//!
//! Settings are layered: the chosen profile supplies the thresholds, a TOML
//! config file overrides any of them, and command-line flags override both.
//! The file uses the flag names with `_` in place of `-`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use salprop::backends::{
    AnchorParams, ProposalSource, SaliencySource, DEFAULT_MAX_PROPOSALS, DEFAULT_PROPOSALS_SUFFIX,
    DEFAULT_SALIENCY_SUFFIX,
};
use salprop::dataset::{Layout, ScanOptions};
use salprop::eval::ReportFormat;
use salprop::{FusionConfig, Profile};
use serde::{Deserialize, Serialize};

pub const DEFAULT_BLUR_RADIUS: u32 = 2;
pub const DEFAULT_OUT: &str = "salprop-out";
pub const DEFAULT_LABEL: &str = "Ours";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SaliencyKind {
    /// Read `<stem><suffix>.png|.pgm` next to the image.
    File,
    /// Global color contrast computed from the image.
    Contrast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProposalKind {
    /// Read `<stem><suffix>.csv` next to the image.
    File,
    /// Multi-scale anchor grid ranked by mean saliency.
    Anchors,
}

/// One layer of optional settings: a config file or the flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub profile: Option<Profile>,
    pub saliency: Option<SaliencyKind>,
    pub proposals: Option<ProposalKind>,
    pub fallback: Option<bool>,
    pub t_ps: Option<u8>,
    pub t_a: Option<u64>,
    pub t_nms: Option<f64>,
    pub t_hist: Option<f64>,
    pub low_overlap_min: Option<f64>,
    pub no_merge: Option<bool>,
    pub saliency_suffix: Option<String>,
    pub proposals_suffix: Option<String>,
    pub blur_radius: Option<u32>,
    pub max_proposals: Option<usize>,
    pub anchor_scales: Option<Vec<u32>>,
    pub anchor_aspects: Option<Vec<f64>>,
    pub anchor_stride: Option<u32>,
    pub layout: Option<Layout>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub report: Option<ReportFormat>,
    pub report_out: Option<PathBuf>,
    pub label: Option<String>,
    pub overlay: Option<bool>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    /// Parses a config file.
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// `top` wins wherever it is set.
    pub fn overlay(self, top: Settings) -> Settings {
        let base = self;
        overlay_fields!(base, top;
            profile, saliency, proposals, fallback, t_ps, t_a, t_nms, t_hist,
            low_overlap_min, no_merge, saliency_suffix, proposals_suffix,
            blur_radius, max_proposals, anchor_scales, anchor_aspects,
            anchor_stride, layout, out, jobs, report, report_out, label, overlay)
    }
}

/// Fully resolved settings for one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub profile: Profile,
    pub fusion: FusionConfig,
    pub saliency: SaliencyKind,
    pub proposals: ProposalKind,
    /// Use the classical generators when a sidecar file is missing.
    pub fallback: bool,
    pub saliency_suffix: String,
    pub proposals_suffix: String,
    pub blur_radius: u32,
    /// Also bounds the anchor generator.
    pub max_proposals: usize,
    pub anchor_scales: Vec<u32>,
    pub anchor_aspects: Vec<f64>,
    pub anchor_stride: u32,
    pub layout: Layout,
    pub out: PathBuf,
    pub jobs: usize,
    pub report: ReportFormat,
    pub report_out: Option<PathBuf>,
    pub label: String,
    pub overlay: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::resolve(Settings::default()).expect("defaults are valid")
    }
}

impl RunConfig {
    /// Fills unset fields from the profile and built-in defaults, then
    /// validates. Errors are usage errors.
    pub fn resolve(s: Settings) -> Result<Self, String> {
        let profile = s.profile.unwrap_or(Profile::ObjectDiscovery);
        let base = profile.config();
        let fusion = FusionConfig {
            t_ps: s.t_ps.unwrap_or(base.t_ps),
            t_a: s.t_a.unwrap_or(base.t_a),
            t_nms: s.t_nms.unwrap_or(base.t_nms),
            t_hist: s.t_hist.unwrap_or(base.t_hist),
            merge_low_overlap: !s.no_merge.unwrap_or(!base.merge_low_overlap),
            low_overlap_min: s.low_overlap_min.unwrap_or(base.low_overlap_min),
        };
        fusion.validate().map_err(|e| e.to_string())?;

        let anchors = AnchorParams::default();
        let cfg = RunConfig {
            profile,
            fusion,
            saliency: s.saliency.unwrap_or(SaliencyKind::File),
            proposals: s.proposals.unwrap_or(ProposalKind::File),
            fallback: s.fallback.unwrap_or(false),
            saliency_suffix: s.saliency_suffix.unwrap_or_else(|| DEFAULT_SALIENCY_SUFFIX.into()),
            proposals_suffix: s.proposals_suffix.unwrap_or_else(|| DEFAULT_PROPOSALS_SUFFIX.into()),
            blur_radius: s.blur_radius.unwrap_or(DEFAULT_BLUR_RADIUS),
            max_proposals: s.max_proposals.unwrap_or(DEFAULT_MAX_PROPOSALS),
            anchor_scales: s.anchor_scales.unwrap_or(anchors.scales),
            anchor_aspects: s.anchor_aspects.unwrap_or(anchors.aspects),
            anchor_stride: s.anchor_stride.unwrap_or(anchors.stride),
            layout: s.layout.unwrap_or(Layout::Flat),
            out: s.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            jobs: s.jobs.unwrap_or_else(default_jobs),
            report: s.report.unwrap_or(ReportFormat::Markdown),
            report_out: s.report_out,
            label: s.label.unwrap_or_else(|| DEFAULT_LABEL.into()),
            overlay: s.overlay.unwrap_or(false),
        };
        if cfg.jobs == 0 {
            return Err("jobs must be at least 1".into());
        }
        if cfg.max_proposals == 0 {
            return Err("max_proposals must be at least 1".into());
        }
        cfg.anchor_params().validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    /// Every field set, suitable for writing back out as a config file.
    pub fn settings(&self) -> Settings {
        Settings {
            profile: Some(self.profile),
            saliency: Some(self.saliency),
            proposals: Some(self.proposals),
            fallback: Some(self.fallback),
            t_ps: Some(self.fusion.t_ps),
            t_a: Some(self.fusion.t_a),
            t_nms: Some(self.fusion.t_nms),
            t_hist: Some(self.fusion.t_hist),
            low_overlap_min: Some(self.fusion.low_overlap_min),
            no_merge: Some(!self.fusion.merge_low_overlap),
            saliency_suffix: Some(self.saliency_suffix.clone()),
            proposals_suffix: Some(self.proposals_suffix.clone()),
            blur_radius: Some(self.blur_radius),
            max_proposals: Some(self.max_proposals),
            anchor_scales: Some(self.anchor_scales.clone()),
            anchor_aspects: Some(self.anchor_aspects.clone()),
            anchor_stride: Some(self.anchor_stride),
            layout: Some(self.layout),
            out: Some(self.out.clone()),
            jobs: Some(self.jobs),
            report: Some(self.report),
            report_out: self.report_out.clone(),
            label: Some(self.label.clone()),
            overlay: Some(self.overlay),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.settings()).expect("settings serialize")
    }

    pub fn anchor_params(&self) -> AnchorParams {
        AnchorParams {
            scales: self.anchor_scales.clone(),
            aspects: self.anchor_aspects.clone(),
            stride: self.anchor_stride,
            max_proposals: self.max_proposals,
        }
    }

    pub fn saliency_source(&self) -> SaliencySource {
        match self.saliency {
            SaliencyKind::File => SaliencySource::File {
                suffix: self.saliency_suffix.clone(),
            },
            SaliencyKind::Contrast => self.saliency_fallback(),
        }
    }

    pub fn saliency_fallback(&self) -> SaliencySource {
        SaliencySource::Contrast {
            blur_radius: self.blur_radius,
        }
    }

    pub fn proposal_source(&self) -> ProposalSource {
        match self.proposals {
            ProposalKind::File => ProposalSource::File {
                suffix: self.proposals_suffix.clone(),
                max_proposals: self.max_proposals,
            },
            ProposalKind::Anchors => self.proposal_fallback(),
        }
    }

    pub fn proposal_fallback(&self) -> ProposalSource {
        ProposalSource::Anchors(self.anchor_params())
    }

    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            saliency_suffix: self.saliency_suffix.clone(),
            proposals_suffix: self.proposals_suffix.clone(),
        }
    }
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
