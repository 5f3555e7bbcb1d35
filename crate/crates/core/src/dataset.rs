//! Dataset discovery for the supported directory layouts.
//!
//! * `flat`: images directly under the root.
//! * `object-discovery`: `<root>/<category>/**/<image>`.
//! * `kth-handtool`: `<root>/<camera>/<illumination>/<category>/<instance>/<image>`
//!   with camera in {Camera1, Camera2} and illumination in
//!   {artificial, natural, directional} (matched case-insensitively).
//!
//! Images are `.png`, `.pgm` or `.ppm` files. Sidecars sit next to their
//! image and are found by filename suffix. Ground truth, when present, is
//! `<root>/ground_truth.csv` keyed by image id: the image path relative to
//! the root, `/`-separated, without extension.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::backends::{proposals_sidecar, saliency_sidecar, DEFAULT_PROPOSALS_SUFFIX, DEFAULT_SALIENCY_SUFFIX};
use crate::error::{Error, Result};
use crate::eval::{load_ground_truth, CategoryKey, GroundTruth};
use crate::geometry::BoundingBox;

pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";
pub const KTH_CAMERAS: [&str; 2] = ["Camera1", "Camera2"];
pub const KTH_ILLUMINATIONS: [&str; 3] = ["artificial", "natural", "directional"];
const IMAGE_EXTENSIONS: [&str; 3] = ["png", "pgm", "ppm"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    Flat,
    ObjectDiscovery,
    KthHandtool,
}

impl Layout {
    pub fn name(self) -> &'static str {
        match self {
            Layout::Flat => "flat",
            Layout::ObjectDiscovery => "object-discovery",
            Layout::KthHandtool => "kth-handtool",
        }
    }

    /// Titles of the row-group columns in reports.
    pub fn group_labels(self) -> Vec<String> {
        match self {
            Layout::KthHandtool => vec!["Camera".into(), "Illumination".into()],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Layout::Flat, Layout::ObjectDiscovery, Layout::KthHandtool]
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown layout `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanOptions {
    pub saliency_suffix: String,
    pub proposals_suffix: String,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            saliency_suffix: DEFAULT_SALIENCY_SUFFIX.into(),
            proposals_suffix: DEFAULT_PROPOSALS_SUFFIX.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image_id: String,
    pub image: PathBuf,
    pub saliency: Option<PathBuf>,
    pub proposals: Option<PathBuf>,
    /// Category (and row group) the image is scored under, if known.
    pub key: Option<CategoryKey>,
    pub truth: Vec<BoundingBox>,
}

impl ManifestEntry {
    pub fn ground_truth(&self) -> Option<GroundTruth> {
        let key = self.key.clone()?;
        (!self.truth.is_empty()).then(|| GroundTruth {
            image_id: self.image_id.clone(),
            key,
            boxes: self.truth.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub layout: Layout,
    /// Every category cell the layout declares, in report order.
    pub categories: Vec<CategoryKey>,
    /// Sorted by image path.
    pub entries: Vec<ManifestEntry>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn layout_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Layout {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Sorted (directories, files) directly under `dir`, skipping dot-entries.
fn list_dir(dir: &Path) -> Result<(Vec<PathBuf>, Vec<PathBuf>)> {
    let mut dirs = Vec::new();
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if entry.file_name().to_string_lossy().starts_with('.') {
            continue;
        }
        let ty = fs::metadata(&path).map_err(io_err(&path))?;
        if ty.is_dir() {
            dirs.push(path);
        } else if ty.is_file() {
            files.push(path);
        }
    }
    dirs.sort();
    files.sort();
    Ok((dirs, files))
}

fn is_image(path: &Path, opts: &ScanOptions) -> bool {
    let ext_ok = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
    let stem = path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    ext_ok && !stem.ends_with(opts.saliency_suffix.as_str())
}

fn images_below(dir: &Path, opts: &ScanOptions, out: &mut Vec<PathBuf>) -> Result<()> {
    let (dirs, files) = list_dir(dir)?;
    out.extend(files.into_iter().filter(|f| is_image(f, opts)));
    for d in dirs {
        images_below(&d, opts, out)?;
    }
    Ok(())
}

fn dir_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn canonical<'a>(name: &str, set: &[&'a str]) -> Option<&'a str> {
    set.iter().copied().find(|c| c.eq_ignore_ascii_case(name))
}

/// Image id for a path below `root`.
pub fn image_id(root: &Path, image: &Path) -> String {
    let rel = image.strip_prefix(root).unwrap_or(image).with_extension("");
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Builds the manifest for `root`. Missing sidecars are recorded as absent.
pub fn scan(root: &Path, layout: Layout, opts: &ScanOptions) -> Result<DatasetManifest> {
    if !root.is_dir() {
        return Err(layout_err(root, "dataset root is not a readable directory"));
    }
    // (image, key from directory structure)
    let mut found: Vec<(PathBuf, Option<CategoryKey>)> = Vec::new();
    let mut categories: Vec<CategoryKey> = Vec::new();

    match layout {
        Layout::Flat => {
            let (_, files) = list_dir(root)?;
            found.extend(files.into_iter().filter(|f| is_image(f, opts)).map(|f| (f, None)));
        }
        Layout::ObjectDiscovery => {
            let (dirs, _) = list_dir(root)?;
            for cat_dir in dirs {
                let key = CategoryKey::new(dir_name(&cat_dir));
                let mut imgs = Vec::new();
                images_below(&cat_dir, opts, &mut imgs)?;
                found.extend(imgs.into_iter().map(|i| (i, Some(key.clone()))));
                categories.push(key);
            }
        }
        Layout::KthHandtool => {
            let (cams, _) = list_dir(root)?;
            let mut cells: Vec<((usize, usize), CategoryKey)> = Vec::new();
            for cam_dir in cams {
                let name = dir_name(&cam_dir);
                let cam_idx = KTH_CAMERAS
                    .iter()
                    .position(|c| c.eq_ignore_ascii_case(&name))
                    .ok_or_else(|| layout_err(&cam_dir, format!("expected a camera directory {KTH_CAMERAS:?}")))?;
                let (illums, _) = list_dir(&cam_dir)?;
                for ill_dir in illums {
                    let ill = dir_name(&ill_dir);
                    let ill_name = canonical(&ill, &KTH_ILLUMINATIONS).ok_or_else(|| {
                        layout_err(
                            &ill_dir,
                            format!("expected an illumination directory {KTH_ILLUMINATIONS:?}"),
                        )
                    })?;
                    let ill_idx = KTH_ILLUMINATIONS
                        .iter()
                        .position(|&i| i == ill_name)
                        .expect("canonical");
                    let (cats, _) = list_dir(&ill_dir)?;
                    for cat_dir in cats {
                        let key = CategoryKey::grouped(
                            vec![KTH_CAMERAS[cam_idx].to_string(), ill_name.to_string()],
                            dir_name(&cat_dir),
                        );
                        let mut imgs = Vec::new();
                        images_below(&cat_dir, opts, &mut imgs)?;
                        found.extend(imgs.into_iter().map(|i| (i, Some(key.clone()))));
                        cells.push(((cam_idx, ill_idx), key));
                    }
                }
            }
            // camera-major, illuminations in declared order, then category name
            cells.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.name.cmp(&b.1.name)));
            categories = cells.into_iter().map(|(_, k)| k).collect();
        }
    }

    let gt_path = root.join(GROUND_TRUTH_FILE);
    let truth: BTreeMap<String, GroundTruth> = if gt_path.is_file() {
        load_ground_truth(&gt_path)?
            .into_iter()
            .map(|g| (g.image_id.clone(), g))
            .collect()
    } else {
        BTreeMap::new()
    };

    found.sort_by(|a, b| a.0.cmp(&b.0));
    let mut entries = Vec::with_capacity(found.len());
    for (image, dir_key) in found {
        let id = image_id(root, &image);
        let gt = truth.get(&id);
        let key = match (dir_key, gt) {
            (Some(k), Some(g)) if g.key.name != k.name => {
                return Err(layout_err(
                    &gt_path,
                    format!(
                        "image `{id}` lies under category `{}` but ground truth says `{}`",
                        k.name, g.key.name
                    ),
                ))
            }
            (Some(k), _) => Some(k),
            (None, g) => g.map(|g| g.key.clone()),
        };
        entries.push(ManifestEntry {
            saliency: saliency_sidecar(&image, &opts.saliency_suffix),
            proposals: proposals_sidecar(&image, &opts.proposals_suffix),
            truth: gt.map(|g| g.boxes.clone()).unwrap_or_default(),
            key,
            image_id: id,
            image,
        });
    }

    if layout == Layout::Flat {
        let mut keys: Vec<CategoryKey> = entries.iter().filter_map(|e| e.key.clone()).collect();
        keys.sort();
        keys.dedup();
        categories = keys;
    }

    Ok(DatasetManifest {
        root: root.to_path_buf(),
        layout,
        categories,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(path: &Path) {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, b"").unwrap();
    }

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        for layout in [Layout::Flat, Layout::ObjectDiscovery, Layout::KthHandtool] {
            let m = scan(dir.path(), layout, &ScanOptions::default()).unwrap();
            assert!(m.entries.is_empty());
        }
    }

    #[test]
    fn missing_root_is_an_error() {
        let err = scan(Path::new("/no/such/root"), Layout::Flat, &ScanOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Layout { .. }));
    }

    #[test]
    fn flat_with_partial_sidecars() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for name in [
            "a.png",
            "b.png",
            "c.ppm",
            "a_saliency.png",
            "c_saliency.pgm",
            "notes.txt",
        ] {
            touch(&root.join(name));
        }
        touch(&root.join("b_proposals.csv"));
        let m = scan(root, Layout::Flat, &ScanOptions::default()).unwrap();
        let ids: Vec<&str> = m.entries.iter().map(|e| e.image_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(m.entries.iter().filter(|e| e.saliency.is_none()).count(), 1);
        assert!(m.entries[1].saliency.is_none());
        assert_eq!(m.entries[1].proposals, Some(root.join("b_proposals.csv")));
        assert_eq!(m.entries[2].saliency, Some(root.join("c_saliency.pgm")));
    }

    #[test]
    fn flat_categories_from_ground_truth() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        touch(&root.join("a.png"));
        touch(&root.join("b.png"));
        fs::write(
            root.join(GROUND_TRUTH_FILE),
            "a,cup,0,0,1,1\nb,bowl,0,0,2,2\nzzz,vase,0,0,1,1\n",
        )
        .unwrap();
        let m = scan(root, Layout::Flat, &ScanOptions::default()).unwrap();
        assert_eq!(m.categories, vec![CategoryKey::new("bowl"), CategoryKey::new("cup")]);
        assert_eq!(m.entries[0].ground_truth().unwrap().key.name, "cup");
    }

    #[test]
    fn object_discovery_layout() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        touch(&root.join("Car/0002.png"));
        touch(&root.join("Airplane/0001.png"));
        touch(&root.join("Horse/sub/0003.png"));
        fs::write(root.join(GROUND_TRUTH_FILE), "Car/0002,Car,0,0,3,3\n").unwrap();
        let m = scan(root, Layout::ObjectDiscovery, &ScanOptions::default()).unwrap();
        let names: Vec<&str> = m.categories.iter().map(|k| k.name.as_str()).collect();
        assert_eq!(names, ["Airplane", "Car", "Horse"]);
        assert_eq!(m.entries[2].image_id, "Horse/sub/0003");
        assert_eq!(m.entries[1].truth.len(), 1);

        fs::write(root.join(GROUND_TRUTH_FILE), "Car/0002,Horse,0,0,3,3\n").unwrap();
        assert!(scan(root, Layout::ObjectDiscovery, &ScanOptions::default()).is_err());
    }

    #[test]
    fn kth_grid_keys() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for cam in KTH_CAMERAS {
            for ill in ["Artificial", "natural", "directional"] {
                for cat in ["hammer", "plier", "screwdriver"] {
                    touch(&root.join(format!("{cam}/{ill}/{cat}/{cat}1/img001.png")));
                }
            }
        }
        let m = scan(root, Layout::KthHandtool, &ScanOptions::default()).unwrap();
        assert_eq!(m.entries.len(), 18);
        assert_eq!(m.categories.len(), 18);
        assert_eq!(m.categories[0].group, ["Camera1", "artificial"]);
        assert_eq!(m.categories[3].group, ["Camera1", "natural"]);
        assert_eq!(m.categories[17].group, ["Camera2", "directional"]);
        assert_eq!(m.categories[17].name, "screwdriver");
        let e = &m.entries[0];
        assert_eq!(e.key.as_ref().unwrap().group, ["Camera1", "artificial"]);
        assert_eq!(e.image_id, "Camera1/Artificial/hammer/hammer1/img001");
    }

    #[test]
    fn kth_rejects_unknown_directories() {
        let dir = tempfile::tempdir().unwrap();
        touch(&dir.path().join("Camera3/natural/hammer/h1/x.png"));
        assert!(scan(dir.path(), Layout::KthHandtool, &ScanOptions::default()).is_err());
        let dir = tempfile::tempdir().unwrap();
        touch(&dir.path().join("Camera1/sunny/hammer/h1/x.png"));
        assert!(scan(dir.path(), Layout::KthHandtool, &ScanOptions::default()).is_err());
    }

    #[test]
    fn malformed_ground_truth_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        touch(&dir.path().join("a.png"));
        fs::write(dir.path().join(GROUND_TRUTH_FILE), "a,cup,0,0,1,1\na,cup,x,0,1,1\n").unwrap();
        let err = scan(dir.path(), Layout::Flat, &ScanOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn scan_is_idempotent_and_serializable() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        touch(&root.join("Car/1.png"));
        touch(&root.join("Car/1_saliency.png"));
        fs::write(root.join(GROUND_TRUTH_FILE), "Car/1,Car,0,0,3,3\n").unwrap();
        let a = scan(root, Layout::ObjectDiscovery, &ScanOptions::default()).unwrap();
        let b = scan(root, Layout::ObjectDiscovery, &ScanOptions::default()).unwrap();
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<DatasetManifest>(&json).unwrap(), a);
    }
}
