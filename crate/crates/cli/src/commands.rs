use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use rayon::prelude::*;
use salprop::backends::{
    anchor_proposals, contrast_saliency, expected_proposals_path, expected_saliency_path, load_proposals,
    load_saliency, proposals_sidecar, saliency_sidecar,
};
use salprop::dataset::{scan, ManifestEntry};
use salprop::eval::{corloc_over, render_report, score_boxes, EvalRecord};
use salprop::io::{draw_boxes, read_color, write_color};
use salprop::synth::{generate, SynthSpec};
use salprop::{localize, ColorImage, LocalizationResult, RegionProposal, ResultDocument, SaliencyMap};

use crate::args::SynthArgs;
use crate::config::{ProposalKind, RunConfig, SaliencyKind};

/// Predicted boxes are drawn in green.
pub const OVERLAY_COLOR: [u8; 3] = [0, 255, 0];
const OVERLAY_THICKNESS: u32 = 2;

/// Sidecar paths known ahead of time. `None` means look next to the image.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sidecars<'a> {
    pub saliency: Option<&'a Path>,
    pub proposals: Option<&'a Path>,
}

fn obtain_saliency(
    image_path: &Path,
    image: &ColorImage,
    given: Option<&Path>,
    cfg: &RunConfig,
) -> anyhow::Result<SaliencyMap> {
    if cfg.saliency == SaliencyKind::Contrast {
        return Ok(contrast_saliency(image, cfg.blur_radius));
    }
    let path = given
        .map(Path::to_path_buf)
        .or_else(|| saliency_sidecar(image_path, &cfg.saliency_suffix));
    match path {
        Some(p) => {
            load_saliency(&p, image.width(), image.height()).with_context(|| format!("saliency map {}", p.display()))
        }
        None if cfg.fallback => Ok(contrast_saliency(image, cfg.blur_radius)),
        None => bail!(
            "saliency map not found: {} (use --saliency contrast or --fallback)",
            expected_saliency_path(image_path, &cfg.saliency_suffix).display()
        ),
    }
}

fn obtain_proposals(
    image_path: &Path,
    image: &ColorImage,
    saliency: &SaliencyMap,
    given: Option<&Path>,
    cfg: &RunConfig,
) -> anyhow::Result<Vec<RegionProposal>> {
    let anchors = || anchor_proposals(image.width(), image.height(), &cfg.anchor_params(), Some(saliency));
    if cfg.proposals == ProposalKind::Anchors {
        return Ok(anchors()?);
    }
    let path = given
        .map(Path::to_path_buf)
        .or_else(|| proposals_sidecar(image_path, &cfg.proposals_suffix));
    match path {
        Some(p) => Ok(load_proposals(&p, image.width(), image.height(), cfg.max_proposals)?),
        None if cfg.fallback => Ok(anchors()?),
        None => bail!(
            "proposal file not found: {} (use --proposals anchors or --fallback)",
            expected_proposals_path(image_path, &cfg.proposals_suffix).display()
        ),
    }
}

/// Loads an image and its cues and runs the fusion pipeline.
pub fn process_image(
    image_path: &Path,
    sidecars: Sidecars<'_>,
    cfg: &RunConfig,
) -> anyhow::Result<(ColorImage, LocalizationResult)> {
    let image = read_color(image_path)?;
    let saliency = obtain_saliency(image_path, &image, sidecars.saliency, cfg)?;
    let proposals = obtain_proposals(image_path, &image, &saliency, sidecars.proposals, cfg)?;
    let result = localize(&image, &saliency, &proposals, &cfg.fusion)
        .with_context(|| format!("localizing {}", image_path.display()))?;
    Ok((image, result))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create directory {}", dir.display()))
}

/// Writes `<base>.json` and, if requested, `<base>_overlay.png`.
fn write_outputs(base: &Path, image: &ColorImage, doc: &ResultDocument, overlay: bool) -> anyhow::Result<PathBuf> {
    if let Some(parent) = base.parent() {
        create_dir(parent)?;
    }
    let json = base.with_file_name(format!("{}.json", file_name(base)));
    fs::write(&json, doc.to_json() + "\n").with_context(|| format!("cannot write {}", json.display()))?;
    if overlay {
        let drawn = draw_boxes(image, &doc.boxes, OVERLAY_COLOR, OVERLAY_THICKNESS);
        write_color(&drawn, &base.with_file_name(format!("{}_overlay.png", file_name(base))))?;
    }
    Ok(json)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn cmd_localize(
    image_path: &Path,
    sidecars: Sidecars<'_>,
    cfg: &RunConfig,
    stdout: &mut dyn Write,
) -> anyhow::Result<()> {
    let stem = image_path
        .file_stem()
        .ok_or_else(|| anyhow!("not an image path: {}", image_path.display()))?
        .to_string_lossy()
        .into_owned();
    let (image, result) = process_image(image_path, sidecars, cfg)?;
    create_dir(&cfg.out)?;
    let doc = ResultDocument::new(stem.clone(), &result, &cfg.fusion);
    let json = write_outputs(&cfg.out.join(&stem), &image, &doc, cfg.overlay)?;
    writeln!(
        stdout,
        "{}: {} box(es) -> {}",
        image_path.display(),
        doc.boxes.len(),
        json.display()
    )?;
    Ok(())
}

fn eval_entry(entry: &ManifestEntry, cfg: &RunConfig) -> anyhow::Result<EvalRecord> {
    let truth = entry
        .ground_truth()
        .ok_or_else(|| anyhow!("no ground truth for image `{}`", entry.image_id))?;
    let sidecars = Sidecars {
        saliency: entry.saliency.as_deref(),
        proposals: entry.proposals.as_deref(),
    };
    let (image, result) = process_image(&entry.image, sidecars, cfg)?;
    for b in &truth.boxes {
        b.check_within(image.width(), image.height())
            .with_context(|| format!("ground truth of `{}`", entry.image_id))?;
    }
    let doc = ResultDocument::new(entry.image_id.clone(), &result, &cfg.fusion);
    write_outputs(&cfg.out.join(&entry.image_id), &image, &doc, cfg.overlay)?;
    Ok(score_boxes(&entry.image_id, &doc.boxes, &truth)?)
}

/// Runs the pipeline over a dataset and renders the CorLoc report.
///
/// Images are processed on `cfg.jobs` threads; records are sorted by image
/// id before aggregation, so the report does not depend on scheduling.
pub fn eval_report(root: &Path, cfg: &RunConfig) -> anyhow::Result<String> {
    let manifest = scan(root, cfg.layout, &cfg.scan_options())?;
    if manifest.entries.is_empty() {
        bail!("no images found under {}", root.display());
    }
    if let Some(e) = manifest.entries.iter().find(|e| e.ground_truth().is_none()) {
        bail!("no ground truth for image `{}`", e.image_id);
    }
    create_dir(&cfg.out)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .context("cannot start worker pool")?;
    let outcomes: Vec<anyhow::Result<EvalRecord>> =
        pool.install(|| manifest.entries.par_iter().map(|e| eval_entry(e, cfg)).collect());
    let mut records = outcomes.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.image_id.cmp(&b.image_id));

    let report = corloc_over(&manifest.categories, &records, cfg.layout.group_labels())?;
    Ok(render_report(&report, cfg.report, &cfg.label))
}

pub fn cmd_eval(root: &Path, cfg: &RunConfig, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let mut text = eval_report(root, cfg)?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cfg.report_out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                create_dir(parent)?;
            }
            fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_config(cfg: &RunConfig, stdout: &mut dyn Write) -> anyhow::Result<()> {
    stdout.write_all(cfg.to_toml().as_bytes())?;
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let spec = SynthSpec {
        layout: args.layout,
        categories: args.categories.clone(),
        images_per_category: args.images,
        width: args.width,
        height: args.height,
        distractors: args.distractors,
        seed: args.seed,
    };
    let images = generate(&args.root, &spec)?;
    writeln!(stdout, "wrote {} images to {}", images.len(), args.root.display())?;
    Ok(())
}
