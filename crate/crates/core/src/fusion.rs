//! Cue fusion: turns one saliency map and one proposal list into candidate
//! object boxes.
//!
//! The stages run in a fixed order:
//!
//! 1. binarize the saliency map at `t_ps`, split it into 8-connected regions
//!    and drop regions smaller than `t_a` pixels;
//! 2. take the centroid of every remaining region as a fixation point and
//!    discard proposals that contain no fixation;
//! 3. greedy non-maximum suppression at `t_nms`;
//! 4. repeatedly join pairs of surviving boxes that still overlap a little
//!    (Jaccard in `(low_overlap_min, t_nms]`) and whose color histograms are
//!    at least `t_hist` similar, replacing each pair by its union box.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_ratio, Error, Result};
use crate::geometry::{self, jaccard, union_box, BoundingBox, RegionProposal};
use crate::raster::{
    area_filter, binarize, connected_components, histogram_similarity, BinnedImage, ColorHistogram, ColorImage,
    SaliencyMap,
};

/// Thresholds of the fusion stages.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    /// Saliency intensity a pixel must exceed to be salient.
    pub t_ps: u8,
    /// Minimum salient-region area in pixels.
    pub t_a: u64,
    /// Jaccard overlap above which NMS suppresses a proposal.
    pub t_nms: f64,
    /// Histogram similarity needed to join two low-overlap boxes.
    pub t_hist: f64,
    pub merge_low_overlap: bool,
    /// Exclusive lower end of the low-overlap band.
    pub low_overlap_min: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Profile::ObjectDiscovery.config()
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        check_ratio("t_nms", self.t_nms)?;
        check_ratio("t_hist", self.t_hist)?;
        check_ratio("low_overlap_min", self.low_overlap_min)?;
        if self.low_overlap_min > self.t_nms {
            return Err(Error::InvalidConfig(format!(
                "low-overlap band ({}, {}] is empty: low_overlap_min must not exceed t_nms",
                self.low_overlap_min, self.t_nms
            )));
        }
        Ok(())
    }

    fn in_merge_band(&self, overlap: f64) -> bool {
        overlap > self.low_overlap_min && overlap <= self.t_nms
    }
}

/// Published threshold sets for the two evaluation datasets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    ObjectDiscovery,
    KthHandtool,
}

impl Profile {
    pub const ALL: [Profile; 2] = [Profile::ObjectDiscovery, Profile::KthHandtool];

    pub fn name(self) -> &'static str {
        match self {
            Profile::ObjectDiscovery => "object-discovery",
            Profile::KthHandtool => "kth-handtool",
        }
    }

    pub fn config(self) -> FusionConfig {
        let t_nms = match self {
            Profile::ObjectDiscovery => 0.15,
            Profile::KthHandtool => 0.05,
        };
        FusionConfig {
            t_ps: 127,
            t_a: 300,
            t_nms,
            t_hist: 1.0,
            merge_low_overlap: true,
            low_overlap_min: 0.0,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown profile `{s}`")))
    }
}

/// Centroid of a salient region. Serializes as `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Fixation {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Fixation {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Fixation> for [f64; 2] {
    fn from(f: Fixation) -> Self {
        [f.x, f.y]
    }
}

/// Centroids of the salient regions that survive the area threshold,
/// largest region first.
pub fn fixation_points(map: &SaliencyMap, config: &FusionConfig) -> Vec<Fixation> {
    let regions = connected_components(&binarize(map, config.t_ps));
    area_filter(&regions, config.t_a)
        .iter()
        .map(|r| Fixation {
            x: r.centroid_x,
            y: r.centroid_y,
        })
        .collect()
}

fn contains_any(bbox: &BoundingBox, fixations: &[Fixation]) -> bool {
    fixations.iter().any(|f| bbox.contains_point(f.x, f.y))
}

/// Proposals whose box contains at least one fixation, in input order.
pub fn filter_by_fixation(proposals: &[RegionProposal], fixations: &[Fixation]) -> Vec<RegionProposal> {
    proposals
        .iter()
        .filter(|p| contains_any(&p.bbox, fixations))
        .copied()
        .collect()
}

/// A fused box and the indices of the input proposals it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct MergedBox {
    pub bbox: BoundingBox,
    pub sources: Vec<usize>,
}

struct Node {
    bbox: BoundingBox,
    sources: Vec<usize>,
    hist: Option<ColorHistogram>,
}

struct Candidate {
    a: usize,
    b: usize,
    similarity: f64,
}

struct Merger<'a> {
    binned: &'a BinnedImage,
    config: &'a FusionConfig,
    nodes: Vec<Node>,
    /// Live node ids in output order.
    order: Vec<usize>,
    candidates: Vec<Candidate>,
}

impl Merger<'_> {
    fn histogram(&mut self, id: usize) -> Result<&ColorHistogram> {
        if self.nodes[id].hist.is_none() {
            self.nodes[id].hist = Some(self.binned.histogram(&self.nodes[id].bbox)?);
        }
        Ok(self.nodes[id].hist.as_ref().expect("just filled"))
    }

    fn consider(&mut self, a: usize, b: usize) -> Result<()> {
        if !self
            .config
            .in_merge_band(jaccard(&self.nodes[a].bbox, &self.nodes[b].bbox))
        {
            return Ok(());
        }
        let ha = self.histogram(a)?.clone();
        let similarity = histogram_similarity(&ha, self.histogram(b)?)?;
        if similarity >= self.config.t_hist {
            self.candidates.push(Candidate { a, b, similarity });
        }
        Ok(())
    }

    /// Pair ordering: similarity descending, combined area descending, then
    /// the pair's boxes (smaller first) ascending.
    fn better(&self, x: &Candidate, y: &Candidate) -> bool {
        let key = |c: &Candidate| {
            let (p, q) = (self.nodes[c.a].bbox, self.nodes[c.b].bbox);
            (p.area() + q.area(), p.min(q), p.max(q))
        };
        let (ax, px, qx) = key(x);
        let (ay, py, qy) = key(y);
        x.similarity
            .total_cmp(&y.similarity)
            .then(ax.cmp(&ay))
            .then((py, qy).cmp(&(px, qx)))
            .is_gt()
    }

    fn run(mut self) -> Result<Vec<MergedBox>> {
        for i in 0..self.order.len() {
            for j in i + 1..self.order.len() {
                self.consider(self.order[i], self.order[j])?;
            }
        }
        while let Some(best) = (0..self.candidates.len()).reduce(|best, i| {
            if self.better(&self.candidates[i], &self.candidates[best]) {
                i
            } else {
                best
            }
        }) {
            let Candidate { a, b, .. } = self.candidates.swap_remove(best);
            self.candidates.retain(|c| c.a != a && c.a != b && c.b != a && c.b != b);

            let mut sources = std::mem::take(&mut self.nodes[a].sources);
            sources.append(&mut self.nodes[b].sources);
            sources.sort_unstable();
            let id = self.nodes.len();
            self.nodes.push(Node {
                bbox: union_box(&self.nodes[a].bbox, &self.nodes[b].bbox),
                sources,
                hist: None,
            });
            self.nodes[a].hist = None;
            self.nodes[b].hist = None;

            // the union takes the earlier slot of the pair
            let pa = self.order.iter().position(|&n| n == a).expect("live node");
            let pb = self.order.iter().position(|&n| n == b).expect("live node");
            self.order[pa.min(pb)] = id;
            self.order.remove(pa.max(pb));

            for k in 0..self.order.len() {
                let other = self.order[k];
                if other != id {
                    self.consider(other.min(id), other.max(id))?;
                }
            }
        }
        Ok(self
            .order
            .iter()
            .map(|&n| MergedBox {
                bbox: self.nodes[n].bbox,
                sources: std::mem::take(&mut self.nodes[n].sources),
            })
            .collect())
    }
}

/// Joins low-overlap boxes of similar color until no eligible pair remains.
///
/// `boxes` pairs each box with its source proposal ids. A joined box takes
/// the position of the earlier member of its pair.
pub fn merge_boxes(binned: &BinnedImage, boxes: Vec<MergedBox>, config: &FusionConfig) -> Result<Vec<MergedBox>> {
    if !config.merge_low_overlap || boxes.len() < 2 {
        return Ok(boxes);
    }
    let nodes: Vec<Node> = boxes
        .into_iter()
        .map(|m| Node {
            bbox: m.bbox,
            sources: m.sources,
            hist: None,
        })
        .collect();
    let merger = Merger {
        binned,
        config,
        order: (0..nodes.len()).collect(),
        nodes,
        candidates: Vec::new(),
    };
    merger.run()
}

/// [`merge_boxes`] over plain proposals, returning only the boxes.
pub fn merge_similar(
    image: &ColorImage,
    survivors: &[RegionProposal],
    config: &FusionConfig,
) -> Result<Vec<BoundingBox>> {
    let boxes = survivors
        .iter()
        .enumerate()
        .map(|(i, p)| MergedBox {
            bbox: p.bbox,
            sources: vec![i],
        })
        .collect();
    let merged = merge_boxes(&BinnedImage::new(image), boxes, config)?;
    Ok(merged.into_iter().map(|m| m.bbox).collect())
}

/// Number of proposals alive after each stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub proposals: usize,
    pub with_fixation: usize,
    pub after_nms: usize,
    pub output: usize,
}

/// Candidate object boxes for one image.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationResult {
    pub boxes: Vec<BoundingBox>,
    /// For each box, the sorted indices of the input proposals it came from.
    pub provenance: Vec<Vec<usize>>,
    pub fixations: Vec<Fixation>,
    pub stages: StageCounts,
}

/// Runs every fusion stage on one image.
pub fn localize(
    image: &ColorImage,
    saliency: &SaliencyMap,
    proposals: &[RegionProposal],
    config: &FusionConfig,
) -> Result<LocalizationResult> {
    config.validate()?;
    let (w, h) = (image.width(), image.height());
    if (saliency.width(), saliency.height()) != (w, h) {
        return Err(Error::DimensionMismatch {
            expected_width: w,
            expected_height: h,
            width: saliency.width(),
            height: saliency.height(),
        });
    }
    for p in proposals {
        p.bbox.check_within(w, h)?;
    }

    let fixations = fixation_points(saliency, config);
    let kept: Vec<usize> = (0..proposals.len())
        .filter(|&i| contains_any(&proposals[i].bbox, &fixations))
        .collect();
    let subset: Vec<RegionProposal> = kept.iter().map(|&i| proposals[i]).collect();
    let survivors: Vec<MergedBox> = geometry::nms_indices(&subset, config.t_nms)?
        .into_iter()
        .map(|i| MergedBox {
            bbox: subset[i].bbox,
            sources: vec![kept[i]],
        })
        .collect();
    let after_nms = survivors.len();

    let merged = if config.merge_low_overlap && survivors.len() > 1 {
        merge_boxes(&BinnedImage::new(image), survivors, config)?
    } else {
        survivors
    };

    Ok(LocalizationResult {
        stages: StageCounts {
            proposals: proposals.len(),
            with_fixation: kept.len(),
            after_nms,
            output: merged.len(),
        },
        boxes: merged.iter().map(|m| m.bbox).collect(),
        provenance: merged.into_iter().map(|m| m.sources).collect(),
        fixations,
    })
}

/// Serialized form of one image's result. Field order is fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub image: String,
    pub boxes: Vec<BoundingBox>,
    pub provenance: Vec<Vec<usize>>,
    pub fixations: Vec<Fixation>,
    pub config: FusionConfig,
}

impl ResultDocument {
    pub fn new(image: impl Into<String>, result: &LocalizationResult, config: &FusionConfig) -> Self {
        Self {
            image: image.into(),
            boxes: result.boxes.clone(),
            provenance: result.provenance.clone(),
            fixations: result.fixations.clone(),
            config: *config,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}
