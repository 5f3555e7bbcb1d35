use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use salprop::dataset::Layout;
use salprop::eval::ReportFormat;
use salprop::Profile;

use crate::config::{ProposalKind, SaliencyKind, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "salprop",
    version,
    about = "Localize objects by fusing saliency maps with region proposals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Localize objects in one image and write the result JSON.
    Localize {
        image: PathBuf,
        /// Saliency map to use instead of the image's sidecar.
        #[arg(long, value_name = "PATH")]
        saliency_map: Option<PathBuf>,
        /// Proposal CSV to use instead of the image's sidecar.
        #[arg(long, value_name = "PATH")]
        proposals_file: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Localize every image of a dataset and report CorLoc.
    Eval {
        root: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the effective configuration as TOML.
    Config {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write a synthetic dataset whose objects are known.
    Synth(SynthArgs),
}

/// Options shared by every command that runs the pipeline.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// TOML file setting any of the options below; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Threshold profile: object-discovery or kth-handtool.
    #[arg(long, value_name = "NAME")]
    pub profile: Option<Profile>,
    #[arg(long, value_enum)]
    pub saliency: Option<SaliencyKind>,
    #[arg(long, value_enum)]
    pub proposals: Option<ProposalKind>,
    /// Compute contrast saliency or anchor proposals when a sidecar is missing.
    #[arg(long)]
    pub fallback: bool,
    /// Saliency intensity threshold; pixels strictly above it are salient.
    #[arg(long, value_name = "0-255")]
    pub t_ps: Option<u8>,
    /// Minimum salient region size in pixels.
    #[arg(long, value_name = "PIXELS")]
    pub t_a: Option<u64>,
    /// NMS overlap threshold.
    #[arg(long, value_name = "0-1", value_parser = parse_ratio)]
    pub t_nms: Option<f64>,
    /// Histogram similarity needed to merge two boxes.
    #[arg(long, value_name = "0-1", value_parser = parse_ratio)]
    pub t_hist: Option<f64>,
    /// Lower, exclusive edge of the overlap band considered for merging.
    #[arg(long, value_name = "0-1", value_parser = parse_ratio)]
    pub low_overlap_min: Option<f64>,
    /// Skip the histogram merge stage.
    #[arg(long)]
    pub no_merge: bool,
    #[arg(long, value_name = "SUFFIX")]
    pub saliency_suffix: Option<String>,
    #[arg(long, value_name = "SUFFIX")]
    pub proposals_suffix: Option<String>,
    /// Box-blur radius of the contrast saliency generator.
    #[arg(long, value_name = "PIXELS")]
    pub blur_radius: Option<u32>,
    /// Proposals kept per image.
    #[arg(long, value_name = "N", value_parser = parse_positive)]
    pub max_proposals: Option<usize>,
    /// Anchor side lengths, comma separated.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub anchor_scales: Option<Vec<u32>>,
    /// Anchor width/height ratios, comma separated.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub anchor_aspects: Option<Vec<f64>>,
    #[arg(long, value_name = "PIXELS")]
    pub anchor_stride: Option<u32>,
    /// Dataset layout: flat, object-discovery or kth-handtool.
    #[arg(long, value_name = "NAME")]
    pub layout: Option<Layout>,
    /// Directory for result JSON and overlays.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for batch evaluation.
    #[arg(long, value_name = "N", value_parser = parse_positive)]
    pub jobs: Option<usize>,
    /// Report format: csv or markdown.
    #[arg(long, value_name = "FORMAT")]
    pub report: Option<ReportFormat>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub report_out: Option<PathBuf>,
    /// Row label of the method in markdown reports.
    #[arg(long, value_name = "TEXT")]
    pub label: Option<String>,
    /// Also write images with the predicted boxes drawn in green.
    #[arg(long)]
    pub overlay: bool,
}

impl RunArgs {
    pub fn settings(&self) -> Settings {
        Settings {
            profile: self.profile,
            saliency: self.saliency,
            proposals: self.proposals,
            fallback: self.fallback.then_some(true),
            t_ps: self.t_ps,
            t_a: self.t_a,
            t_nms: self.t_nms,
            t_hist: self.t_hist,
            low_overlap_min: self.low_overlap_min,
            no_merge: self.no_merge.then_some(true),
            saliency_suffix: self.saliency_suffix.clone(),
            proposals_suffix: self.proposals_suffix.clone(),
            blur_radius: self.blur_radius,
            max_proposals: self.max_proposals,
            anchor_scales: self.anchor_scales.clone(),
            anchor_aspects: self.anchor_aspects.clone(),
            anchor_stride: self.anchor_stride,
            layout: self.layout,
            out: self.out.clone(),
            jobs: self.jobs,
            report: self.report,
            report_out: self.report_out.clone(),
            label: self.label.clone(),
            overlay: self.overlay.then_some(true),
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory to create the dataset in.
    pub root: PathBuf,
    #[arg(long, default_value = "object-discovery")]
    pub layout: Layout,
    #[arg(long, value_delimiter = ',', default_value = "airplane,car,horse")]
    pub categories: Vec<String>,
    /// Images per category (per camera and illumination for kth-handtool).
    #[arg(long, default_value_t = 20)]
    pub images: usize,
    /// Random proposals added next to the true box.
    #[arg(long, default_value_t = 100)]
    pub distractors: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 160, value_parser = clap::value_parser!(u32).range(8..))]
    pub width: u32,
    #[arg(long, default_value_t = 120, value_parser = clap::value_parser!(u32).range(8..))]
    pub height: u32,
}

pub(crate) fn parse_ratio(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_bounds() {
        assert_eq!(parse_ratio("0"), Ok(0.0));
        assert_eq!(parse_ratio("1"), Ok(1.0));
        assert!(parse_ratio("1.5").is_err());
        assert!(parse_ratio("-0.1").is_err());
        assert!(parse_ratio("NaN").is_err());
        assert!(parse_ratio("x").is_err());
    }

    #[test]
    fn positive_counts() {
        assert_eq!(parse_positive("8"), Ok(8));
        assert!(parse_positive("0").is_err());
        assert!(parse_positive("-1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
