//! Sources for the two perception cues.
//!
//! The saliency network and the region proposal network are external: their
//! outputs are read from sidecar files next to each image. When those are
//! unavailable, two classical generators stand in: a global-contrast
//! saliency map and a multi-scale anchor grid. The fallbacks are plumbing
//! that keeps the pipeline runnable; they do not approximate the networks.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, RegionProposal};
use crate::io;
use crate::raster::{ColorImage, SaliencyMap};
use crate::rows;

pub const DEFAULT_SALIENCY_SUFFIX: &str = "_saliency";
pub const DEFAULT_PROPOSALS_SUFFIX: &str = "_proposals";
pub const DEFAULT_MAX_PROPOSALS: usize = 2000;

/// Where saliency maps come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SaliencySource {
    /// Grayscale sidecar `<stem><suffix>.png` or `<stem><suffix>.pgm`.
    File { suffix: String },
    /// [`contrast_saliency`] computed from the image itself.
    Contrast { blur_radius: u32 },
}

impl Default for SaliencySource {
    fn default() -> Self {
        Self::File {
            suffix: DEFAULT_SALIENCY_SUFFIX.into(),
        }
    }
}

/// Where region proposals come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProposalSource {
    /// CSV sidecar `<stem><suffix>.csv`, truncated to `max_proposals` rows.
    File {
        suffix: String,
        max_proposals: usize,
    },
    Anchors(AnchorParams),
}

impl Default for ProposalSource {
    fn default() -> Self {
        Self::File {
            suffix: DEFAULT_PROPOSALS_SUFFIX.into(),
            max_proposals: DEFAULT_MAX_PROPOSALS,
        }
    }
}

/// Parameters of the anchor-grid fallback.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorParams {
    /// Anchor side lengths in pixels (for aspect 1).
    pub scales: Vec<u32>,
    /// Width / height ratios.
    pub aspects: Vec<f64>,
    /// Spacing of anchor centers in pixels.
    pub stride: u32,
    pub max_proposals: usize,
}

impl Default for AnchorParams {
    fn default() -> Self {
        Self {
            scales: vec![32, 64, 128, 256],
            aspects: vec![0.5, 1.0, 2.0],
            stride: 16,
            max_proposals: DEFAULT_MAX_PROPOSALS,
        }
    }
}

impl AnchorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("anchor parameters: {msg}")));
        if self.scales.is_empty() || self.scales.contains(&0) {
            return bad("scales must be non-empty and positive");
        }
        if self.aspects.is_empty() || self.aspects.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return bad("aspects must be non-empty, finite and positive");
        }
        if self.stride == 0 {
            return bad("stride must be positive");
        }
        if self.max_proposals == 0 {
            return bad("max_proposals must be at least 1");
        }
        Ok(())
    }
}

fn with_suffix(image_path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = image_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    image_path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// Existing saliency sidecar for `image_path`, preferring PNG over PGM.
pub fn saliency_sidecar(image_path: &Path, suffix: &str) -> Option<PathBuf> {
    ["png", "pgm"]
        .into_iter()
        .map(|ext| with_suffix(image_path, suffix, ext))
        .find(|p| p.is_file())
}

/// Path the saliency sidecar would have as a PNG, whether or not it exists.
pub fn expected_saliency_path(image_path: &Path, suffix: &str) -> PathBuf {
    with_suffix(image_path, suffix, "png")
}

/// Existing proposal sidecar for `image_path`.
pub fn proposals_sidecar(image_path: &Path, suffix: &str) -> Option<PathBuf> {
    Some(expected_proposals_path(image_path, suffix)).filter(|p| p.is_file())
}

pub fn expected_proposals_path(image_path: &Path, suffix: &str) -> PathBuf {
    with_suffix(image_path, suffix, "csv")
}

/// Reads a grayscale saliency raster and checks it matches the image size.
pub fn load_saliency(path: &Path, expected_width: u32, expected_height: u32) -> Result<SaliencyMap> {
    let map = io::read_saliency(path)?;
    if map.width() != expected_width || map.height() != expected_height {
        return Err(Error::DimensionMismatch {
            expected_width,
            expected_height,
            width: map.width(),
            height: map.height(),
        });
    }
    Ok(map)
}

/// Summed-area table over `(width + 1) x (height + 1)` with a zero border.
struct Integral {
    stride: usize,
    sums: Vec<u64>,
}

impl Integral {
    fn new(width: u32, height: u32, value: impl Fn(usize) -> u64) -> Self {
        let (w, h) = (width as usize, height as usize);
        let stride = w + 1;
        let mut sums = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u64;
            for x in 0..w {
                row += value(y * w + x);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { stride, sums }
    }

    /// Sum over the inclusive rectangle.
    fn sum(&self, x1: usize, y1: usize, x2: usize, y2: usize) -> u64 {
        let s = self.stride;
        self.sums[(y2 + 1) * s + x2 + 1] + self.sums[y1 * s + x1]
            - self.sums[y1 * s + x2 + 1]
            - self.sums[(y2 + 1) * s + x1]
    }
}

/// Global-contrast saliency: for every pixel, the Euclidean RGB distance
/// between the image's mean color and the pixel's box-blurred color
/// (window `2r + 1`, clipped at the borders), min-max normalized to 0..=255.
///
/// An image with no contrast yields an all-zero map.
pub fn contrast_saliency(image: &ColorImage, blur_radius: u32) -> SaliencyMap {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let px = image.pixels();
    let n = (w * h) as f64;
    let integrals: Vec<Integral> = (0..3)
        .map(|c| Integral::new(image.width(), image.height(), |i| u64::from(px[i][c])))
        .collect();
    let mean: Vec<f64> = integrals
        .iter()
        .map(|ii| ii.sum(0, 0, w - 1, h - 1) as f64 / n)
        .collect();

    let r = blur_radius as usize;
    let mut dist = Vec::with_capacity(w * h);
    for y in 0..h {
        let (y1, y2) = (y.saturating_sub(r), (y + r).min(h - 1));
        for x in 0..w {
            let (x1, x2) = (x.saturating_sub(r), (x + r).min(w - 1));
            let count = ((x2 - x1 + 1) * (y2 - y1 + 1)) as f64;
            let sq: f64 = (0..3)
                .map(|c| {
                    let d = mean[c] - integrals[c].sum(x1, y1, x2, y2) as f64 / count;
                    d * d
                })
                .sum();
            dist.push(sq.sqrt());
        }
    }

    let (lo, hi) = dist.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
        (lo.min(d), hi.max(d))
    });
    let values = if hi > lo {
        dist.iter()
            .map(|&d| (255.0 * (d - lo) / (hi - lo)).round() as u8)
            .collect()
    } else {
        vec![0; w * h]
    };
    SaliencyMap::new(image.width(), image.height(), values).expect("dimensions preserved")
}

/// Reads a proposal CSV (`x1,y1,x2,y2[,score]`, `#` comments).
///
/// Boxes are clipped to the image; at most `max_n` rows are read, in file
/// order. A row with `x2 < x1` or `y2 < y1`, a malformed field, a score
/// outside `[0, 1]` or a box entirely outside the image is an error naming
/// the line.
pub fn load_proposals(path: &Path, image_width: u32, image_height: u32, max_n: usize) -> Result<Vec<RegionProposal>> {
    let text = rows::read_text(path)?;
    let (max_x, max_y) = (i64::from(image_width) - 1, i64::from(image_height) - 1);
    let mut out = Vec::new();
    for row in rows::rows(&text).take(max_n) {
        let err = |msg: String| rows::parse_error(path, row.line, msg);
        let fields = &row.fields;
        if fields.len() != 4 && fields.len() != 5 {
            return Err(err(format!("expected 4 or 5 fields, found {}", fields.len())));
        }
        let mut coords = [0i64; 4];
        for (slot, field) in coords.iter_mut().zip(fields) {
            *slot = field
                .parse()
                .map_err(|_| err(format!("invalid integer coordinate `{field}`")))?;
        }
        let [x1, y1, x2, y2] = coords;
        if x2 < x1 || y2 < y1 {
            return Err(err(format!(
                "invalid box ({x1},{y1},{x2},{y2}): requires x1 <= x2 and y1 <= y2"
            )));
        }
        let score = match fields.get(4) {
            Some(s) => {
                let v: f64 = s.parse().map_err(|_| err(format!("invalid score `{s}`")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(err(format!("score {v} is outside [0, 1]")));
                }
                Some(v)
            }
            None => None,
        };
        let (cx1, cy1, cx2, cy2) = (x1.max(0), y1.max(0), x2.min(max_x), y2.min(max_y));
        if cx1 > cx2 || cy1 > cy2 {
            return Err(err(format!(
                "box ({x1},{y1},{x2},{y2}) lies outside the {image_width}x{image_height} image"
            )));
        }
        let bbox = BoundingBox::new(cx1 as u32, cy1 as u32, cx2 as u32, cy2 as u32)?;
        out.push(RegionProposal::new(bbox, score)?);
    }
    Ok(out)
}

/// Renders proposals in the CSV format read by [`load_proposals`].
pub fn format_proposals(proposals: &[RegionProposal]) -> String {
    let mut s = String::new();
    for p in proposals {
        let b = p.bbox;
        let _ = write!(s, "{},{},{},{}", b.x1(), b.y1(), b.x2(), b.y2());
        if let Some(score) = p.score() {
            let _ = write!(s, ",{score}");
        }
        s.push('\n');
    }
    s
}

pub fn write_proposals(path: &Path, proposals: &[RegionProposal]) -> Result<()> {
    std::fs::write(path, format_proposals(proposals)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn grid_centers(dim: u32, stride: u32) -> impl Iterator<Item = u32> {
    let n = (dim / stride).max(1);
    let start = (dim - (n - 1) * stride) / 2;
    (0..n).map(move |k| start + k * stride)
}

fn anchor_span(center: u32, len: u32, dim: u32) -> (u32, u32) {
    let lo = i64::from(center) - i64::from(len / 2);
    let hi = lo + i64::from(len) - 1;
    (lo.max(0) as u32, hi.min(i64::from(dim) - 1) as u32)
}

/// Multi-scale anchor grid over a `width x height` image.
///
/// Centers are spaced `stride` apart and centered on the image (a single
/// center per axis when the stride exceeds it); each center gets one box per
/// (scale, aspect) pair, clipped to the image, and exact duplicates are
/// dropped. With a saliency map each box is scored by its mean saliency and
/// the list is ranked by score; without one, boxes score 0.5 and, when the
/// grid exceeds `max_proposals`, an evenly spaced subset is kept.
pub fn anchor_proposals(
    width: u32,
    height: u32,
    params: &AnchorParams,
    saliency: Option<&SaliencyMap>,
) -> Result<Vec<RegionProposal>> {
    params.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::EmptyRaster { width, height });
    }
    if let Some(map) = saliency {
        if (map.width(), map.height()) != (width, height) {
            return Err(Error::DimensionMismatch {
                expected_width: width,
                expected_height: height,
                width: map.width(),
                height: map.height(),
            });
        }
    }

    let shapes: Vec<(u32, u32)> = params
        .scales
        .iter()
        .flat_map(|&s| {
            params.aspects.iter().map(move |&a| {
                let root = a.sqrt();
                let w = (f64::from(s) * root).round().max(1.0) as u32;
                let h = (f64::from(s) / root).round().max(1.0) as u32;
                (w, h)
            })
        })
        .collect();

    let mut seen = HashSet::new();
    let mut boxes = Vec::new();
    for cy in grid_centers(height, params.stride) {
        for cx in grid_centers(width, params.stride) {
            for &(w, h) in &shapes {
                let (x1, x2) = anchor_span(cx, w, width);
                let (y1, y2) = anchor_span(cy, h, height);
                let b = BoundingBox::new(x1, y1, x2, y2)?;
                if seen.insert(b) {
                    boxes.push(b);
                }
            }
        }
    }

    let max_n = params.max_proposals;
    match saliency {
        Some(map) => {
            let values = map.values();
            let ii = Integral::new(width, height, |i| u64::from(values[i]));
            let mut scored: Vec<RegionProposal> = boxes
                .into_iter()
                .map(|b| {
                    let sum = ii.sum(b.x1() as usize, b.y1() as usize, b.x2() as usize, b.y2() as usize);
                    let score = (sum as f64 / (b.area() as f64 * 255.0)).clamp(0.0, 1.0);
                    RegionProposal::new(b, Some(score))
                })
                .collect::<Result<_>>()?;
            // stable: equal scores keep grid order
            scored.sort_by(|a, b| b.effective_score().total_cmp(&a.effective_score()));
            scored.truncate(max_n);
            Ok(scored)
        }
        None => {
            let n = boxes.len();
            let picked: Vec<BoundingBox> = if n <= max_n {
                boxes
            } else {
                (0..max_n).map(|i| boxes[i * n / max_n]).collect()
            };
            picked
                .into_iter()
                .map(|b| RegionProposal::new(b, Some(crate::geometry::DEFAULT_SCORE)))
                .collect()
        }
    }
}
