//! Synthetic datasets with known answers.
//!
//! Each generated image shows one solid rectangle on a solid background.
//! The saliency sidecar is the object's ground-truth mask and the proposal
//! sidecar holds the ground-truth box (score 0.9) followed by random
//! distractors (scores below 0.85), so a correct pipeline localizes every
//! image.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backends::{write_proposals, DEFAULT_PROPOSALS_SUFFIX, DEFAULT_SALIENCY_SUFFIX};
use crate::dataset::{Layout, GROUND_TRUTH_FILE, KTH_CAMERAS, KTH_ILLUMINATIONS};
use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, RegionProposal};
use crate::io::{write_color, write_saliency};
use crate::raster::{bin_index, ColorImage, SaliencyMap};

/// Colors whose histogram bins are pairwise distinct.
const PALETTE: [[u8; 3]; 8] = [
    [230, 40, 40],
    [40, 200, 60],
    [50, 70, 220],
    [240, 220, 50],
    [30, 30, 30],
    [240, 240, 240],
    [150, 60, 200],
    [40, 200, 210],
];

#[derive(Clone, Debug)]
pub struct SynthSpec {
    pub layout: Layout,
    pub categories: Vec<String>,
    /// Images per category cell (per camera x illumination for KTH).
    pub images_per_category: usize,
    pub width: u32,
    pub height: u32,
    pub distractors: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            layout: Layout::ObjectDiscovery,
            categories: vec!["airplane".into(), "car".into(), "horse".into()],
            images_per_category: 20,
            width: 160,
            height: 120,
            distractors: 100,
            seed: 0,
        }
    }
}

/// One generated image and its planted object.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthImage {
    pub image_id: String,
    pub path: PathBuf,
    pub category: String,
    pub truth: BoundingBox,
}

fn random_box(rng: &mut ChaCha8Rng, w: u32, h: u32) -> BoundingBox {
    let x1 = rng.gen_range(0..w);
    let y1 = rng.gen_range(0..h);
    let x2 = rng.gen_range(x1..w);
    let y2 = rng.gen_range(y1..h);
    BoundingBox::new(x1, y1, x2, y2).expect("ordered corners")
}

fn write_one(dir: &Path, stem: &str, spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<(PathBuf, BoundingBox)> {
    let (w, h) = (spec.width, spec.height);
    let bg = rng.gen_range(0..PALETTE.len());
    let fg = (bg + rng.gen_range(1..PALETTE.len())) % PALETTE.len();
    debug_assert_ne!(bin_index(PALETTE[bg]), bin_index(PALETTE[fg]));

    let ow = rng.gen_range(w / 4..=w * 3 / 5);
    let oh = rng.gen_range(h / 4..=h * 3 / 5);
    let ox = rng.gen_range(0..=w - ow);
    let oy = rng.gen_range(0..=h - oh);
    let truth = BoundingBox::from_origin_size(ox, oy, ow, oh)?;

    let image = ColorImage::from_fn(w, h, |x, y| {
        if truth.contains_point(f64::from(x), f64::from(y)) {
            PALETTE[fg]
        } else {
            PALETTE[bg]
        }
    })?;
    let mut saliency = SaliencyMap::blank(w, h)?;
    saliency.fill_box(&truth, 255);

    let mut proposals = vec![RegionProposal::new(truth, Some(0.9))?];
    for _ in 0..spec.distractors {
        let score = (rng.gen_range(0..85u32) as f64) / 100.0;
        proposals.push(RegionProposal::new(random_box(rng, w, h), Some(score))?);
    }

    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(format!("{stem}.png"));
    write_color(&image, &path)?;
    write_saliency(&saliency, &dir.join(format!("{stem}{DEFAULT_SALIENCY_SUFFIX}.png")))?;
    write_proposals(&dir.join(format!("{stem}{DEFAULT_PROPOSALS_SUFFIX}.csv")), &proposals)?;
    Ok((path, truth))
}

/// Writes a dataset under `root` in `spec.layout`, including
/// `ground_truth.csv`. Output depends only on `spec`.
pub fn generate(root: &Path, spec: &SynthSpec) -> Result<Vec<SynthImage>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut images = Vec::new();

    // (relative directory, id prefix, category)
    let mut cells: Vec<(PathBuf, String, String)> = Vec::new();
    for cat in &spec.categories {
        match spec.layout {
            Layout::Flat => cells.push((PathBuf::new(), format!("{cat}_"), cat.clone())),
            Layout::ObjectDiscovery => cells.push((PathBuf::from(cat), format!("{cat}/"), cat.clone())),
            Layout::KthHandtool => {
                for cam in KTH_CAMERAS {
                    for ill in KTH_ILLUMINATIONS {
                        let rel = PathBuf::from(cam).join(ill).join(cat).join(format!("{cat}1"));
                        cells.push((rel, format!("{cam}/{ill}/{cat}/{cat}1/"), cat.clone()));
                    }
                }
            }
        }
    }

    for (rel, prefix, cat) in cells {
        for i in 0..spec.images_per_category {
            let stem = match spec.layout {
                Layout::Flat => format!("{cat}_{i:04}"),
                _ => format!("{i:04}"),
            };
            let (path, truth) = write_one(&root.join(&rel), &stem, spec, &mut rng)?;
            let image_id = match spec.layout {
                Layout::Flat => stem.clone(),
                _ => format!("{prefix}{stem}"),
            };
            images.push(SynthImage {
                image_id,
                path,
                category: cat.clone(),
                truth,
            });
        }
    }

    write_ground_truth(&root.join(GROUND_TRUTH_FILE), &images)?;
    Ok(images)
}

/// Writes `image_id,category,x1,y1,x2,y2` rows for `images`.
pub fn write_ground_truth(path: &Path, images: &[SynthImage]) -> Result<()> {
    let mut s = String::from("image_id,category,x1,y1,x2,y2\n");
    for img in images {
        let [x1, y1, x2, y2] = img.truth.to_array();
        let _ = writeln!(s, "{},{},{x1},{y1},{x2},{y2}", img.image_id, img.category);
    }
    fs::write(path, s).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
