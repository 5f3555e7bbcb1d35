//! Unsupervised single-image object localization.
//!
//! A pixel-wise saliency map and a list of class-agnostic region proposals
//! are fused into candidate object boxes: salient regions above an area
//! threshold yield fixation points, proposals without a fixation are
//! discarded, the rest go through non-maximum suppression, and remaining
//! low-overlap boxes with matching color distributions are joined. The
//! [`eval`] module scores results with the CorLoc metric.
//!
//! ```
//! use salprop::{localize, BoundingBox, ColorImage, FusionConfig, RegionProposal, SaliencyMap};
//!
//! let image = ColorImage::filled(64, 64, [40, 40, 40]).unwrap();
//! let mut saliency = SaliencyMap::blank(64, 64).unwrap();
//! let object = BoundingBox::new(10, 10, 39, 39).unwrap();
//! saliency.fill_box(&object, 255);
//!
//! let proposals = [
//!     RegionProposal::new(object, Some(0.9)).unwrap(),
//!     RegionProposal::new(BoundingBox::new(45, 45, 60, 60).unwrap(), Some(0.8)).unwrap(),
//! ];
//! let result = localize(&image, &saliency, &proposals, &FusionConfig::default()).unwrap();
//! assert_eq!(result.boxes, vec![object]);
//! ```

pub mod backends;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod geometry;
pub mod io;
pub mod raster;
mod rows;
pub mod synth;

pub use error::{Error, Result};
pub use fusion::{localize, FusionConfig, LocalizationResult, Profile, ResultDocument};
pub use geometry::{jaccard, nms, union_box, BoundingBox, RegionProposal};
pub use raster::{ColorImage, SaliencyMap};
