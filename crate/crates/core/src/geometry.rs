//! Axis-aligned boxes on the pixel grid and the overlap arithmetic built on them.
//!
//! Coordinates are inclusive: a box covers every pixel `(x, y)` with
//! `x1 <= x <= x2` and `y1 <= y <= y2`, so a single pixel has `x1 == x2`
//! and every area is an exact integer.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_ratio, Error, Result};

/// Score assumed for proposals whose producer did not supply one.
pub const DEFAULT_SCORE: f64 = 0.5;

/// Inclusive-pixel rectangle. Serializes as `[x1, y1, x2, y2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[u32; 4]", into = "[u32; 4]")]
pub struct BoundingBox {
    x1: u32,
    y1: u32,
    x2: u32,
    y2: u32,
}

impl BoundingBox {
    pub fn new(x1: u32, y1: u32, x2: u32, y2: u32) -> Result<Self> {
        if x1 > x2 || y1 > y2 {
            return Err(Error::InvalidBox {
                x1: x1.into(),
                y1: y1.into(),
                x2: x2.into(),
                y2: y2.into(),
            });
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    /// Box of `width` x `height` pixels with its top-left corner at `(x, y)`.
    pub fn from_origin_size(x: u32, y: u32, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidBox {
                x1: x.into(),
                y1: y.into(),
                x2: i64::from(x) + i64::from(width) - 1,
                y2: i64::from(y) + i64::from(height) - 1,
            });
        }
        Self::new(x, y, x + width - 1, y + height - 1)
    }

    pub fn x1(&self) -> u32 {
        self.x1
    }

    pub fn y1(&self) -> u32 {
        self.y1
    }

    pub fn x2(&self) -> u32 {
        self.x2
    }

    pub fn y2(&self) -> u32 {
        self.y2
    }

    pub fn width(&self) -> u32 {
        self.x2 - self.x1 + 1
    }

    pub fn height(&self) -> u32 {
        self.y2 - self.y1 + 1
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    pub fn to_array(self) -> [u32; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    /// Overlapping rectangle, if the boxes share at least one pixel.
    pub fn intersection(&self, other: &Self) -> Option<Self> {
        let x1 = self.x1.max(other.x1);
        let y1 = self.y1.max(other.y1);
        let x2 = self.x2.min(other.x2);
        let y2 = self.y2.min(other.y2);
        (x1 <= x2 && y1 <= y2).then_some(Self { x1, y1, x2, y2 })
    }

    pub fn intersection_area(&self, other: &Self) -> u64 {
        self.intersection(other).map_or(0, |b| b.area())
    }

    pub fn contains_box(&self, other: &Self) -> bool {
        self.x1 <= other.x1 && self.y1 <= other.y1 && self.x2 >= other.x2 && self.y2 >= other.y2
    }

    /// Inclusive containment of a sub-pixel point.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        f64::from(self.x1) <= x && x <= f64::from(self.x2) && f64::from(self.y1) <= y && y <= f64::from(self.y2)
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.x2 < width && self.y2 < height
    }

    pub fn check_within(&self, width: u32, height: u32) -> Result<()> {
        if self.fits_within(width, height) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                bbox: self.to_array(),
                width,
                height,
            })
        }
    }
}

impl TryFrom<[u32; 4]> for BoundingBox {
    type Error = Error;

    fn try_from([x1, y1, x2, y2]: [u32; 4]) -> Result<Self> {
        Self::new(x1, y1, x2, y2)
    }
}

impl From<BoundingBox> for [u32; 4] {
    fn from(b: BoundingBox) -> Self {
        b.to_array()
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.x1, self.y1, self.x2, self.y2)
    }
}

/// Jaccard coefficient `|a ∩ b| / |a ∪ b|` over inclusive pixel areas.
///
/// Areas are exact integers, so the only rounding is the final division.
pub fn jaccard(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    if inter == union {
        return 1.0;
    }
    inter as f64 / union as f64
}

/// Smallest box containing both inputs.
pub fn union_box(a: &BoundingBox, b: &BoundingBox) -> BoundingBox {
    BoundingBox {
        x1: a.x1.min(b.x1),
        y1: a.y1.min(b.y1),
        x2: a.x2.max(b.x2),
        y2: a.y2.max(b.y2),
    }
}

/// A class-agnostic candidate box with an optional objectness score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionProposal {
    pub bbox: BoundingBox,
    score: Option<f64>,
}

impl RegionProposal {
    pub fn new(bbox: BoundingBox, score: Option<f64>) -> Result<Self> {
        if let Some(s) = score {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidScore(s));
            }
        }
        Ok(Self { bbox, score })
    }

    pub fn unscored(bbox: BoundingBox) -> Self {
        Self { bbox, score: None }
    }

    pub fn score(&self) -> Option<f64> {
        self.score
    }

    /// Score used for ranking; absent scores rank as [`DEFAULT_SCORE`].
    pub fn effective_score(&self) -> f64 {
        self.score.unwrap_or(DEFAULT_SCORE)
    }
}

/// Total ranking order used by [`nms`]: score descending, then area
/// descending, then `(x1, y1, x2, y2)` ascending. Proposals that agree on
/// all of those rank a supplied score ahead of an absent one.
pub fn rank_order(a: &RegionProposal, b: &RegionProposal) -> Ordering {
    b.effective_score()
        .total_cmp(&a.effective_score())
        .then_with(|| b.bbox.area().cmp(&a.bbox.area()))
        .then_with(|| a.bbox.cmp(&b.bbox))
        .then_with(|| b.score.is_some().cmp(&a.score.is_some()))
}

/// Greedy non-maximum suppression.
///
/// Proposals are visited in [`rank_order`]; each one is kept unless its
/// Jaccard overlap with an already kept proposal exceeds `t_nms`. The result
/// is in rank order, so it does not depend on the order of the input.
pub fn nms(proposals: &[RegionProposal], t_nms: f64) -> Result<Vec<RegionProposal>> {
    nms_indices(proposals, t_nms).map(|keep| keep.into_iter().map(|i| proposals[i]).collect())
}

/// Like [`nms`], returning indices into `proposals` instead of copies.
pub fn nms_indices(proposals: &[RegionProposal], t_nms: f64) -> Result<Vec<usize>> {
    check_ratio("t_nms", t_nms)?;
    let mut order: Vec<usize> = (0..proposals.len()).collect();
    order.sort_by(|&i, &j| rank_order(&proposals[i], &proposals[j]));

    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let candidate = &proposals[i].bbox;
        if kept.iter().all(|&k| jaccard(&proposals[k].bbox, candidate) <= t_nms) {
            kept.push(i);
        }
    }
    Ok(kept)
}
