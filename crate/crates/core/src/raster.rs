//! Raster containers and the pixel kernels of the pipeline: saliency
//! binarization, 8-connected component labeling and quantized color
//! histograms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

fn check_dims(width: u32, height: u32, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyRaster { width, height });
    }
    let expected = width as usize * height as usize;
    if len != expected {
        return Err(Error::BufferSize { len, expected });
    }
    Ok(())
}

/// 24-bit RGB raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl ColorImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![color; width as usize * height as usize])
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, color: [u8; 3]) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = color;
    }

    pub fn bounds(&self) -> BoundingBox {
        BoundingBox::new(0, 0, self.width - 1, self.height - 1).expect("non-empty raster")
    }
}

/// Per-pixel saliency stored as 8-bit intensity; `p = intensity / 255`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaliencyMap {
    width: u32,
    height: u32,
    values: Vec<u8>,
}

impl SaliencyMap {
    pub fn new(width: u32, height: u32, values: Vec<u8>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        Ok(Self { width, height, values })
    }

    pub fn blank(width: u32, height: u32) -> Result<Self> {
        Self::new(width, height, vec![0; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn intensity(&self, x: u32, y: u32) -> u8 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn probability(&self, x: u32, y: u32) -> f64 {
        f64::from(self.intensity(x, y)) / 255.0
    }

    /// Sets every pixel of `bbox` to `value`. The box must lie inside the map.
    pub fn fill_box(&mut self, bbox: &BoundingBox, value: u8) {
        let w = self.width as usize;
        for y in bbox.y1()..=bbox.y2() {
            let row = y as usize * w;
            self.values[row + bbox.x1() as usize..=row + bbox.x2() as usize].fill(value);
        }
    }
}

/// Salient / non-salient flag per pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn salient_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Marks a pixel salient iff its intensity is strictly above `t_ps`.
pub fn binarize(map: &SaliencyMap, t_ps: u8) -> BinaryMask {
    BinaryMask {
        width: map.width,
        height: map.height,
        bits: map.values.iter().map(|&v| v > t_ps).collect(),
    }
}

/// One 8-connected component of a [`BinaryMask`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SalientRegion {
    pub pixel_count: u64,
    /// Mean column of the member pixels.
    pub centroid_x: f64,
    /// Mean row of the member pixels.
    pub centroid_y: f64,
    pub bbox: BoundingBox,
}

/// Component labels for every pixel alongside the component statistics.
#[derive(Clone, Debug)]
pub struct Labeling {
    /// 0 for background, otherwise `1 + index` into `regions`.
    pub labels: Vec<u32>,
    pub regions: Vec<SalientRegion>,
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // slot 0 is the background label
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let ra = self.find(a);
        let rb = self.find(b);
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

struct Accumulator {
    count: u64,
    sum_x: u64,
    sum_y: u64,
    min_x: u32,
    min_y: u32,
    max_x: u32,
    max_y: u32,
    first_index: usize,
}

/// Two-pass union-find labeling of the salient pixels under 8-connectivity.
///
/// Regions are ordered by descending pixel count, then by bounding box, then
/// by the raster position of their first pixel, so the ordering is total.
pub fn label_components(mask: &BinaryMask) -> Labeling {
    let w = mask.width as usize;
    let h = mask.height as usize;
    let mut labels = vec![0u32; w * h];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if !mask.bits[idx] {
                continue;
            }
            // already-visited neighbours: W, NW, N, NE
            let mut label = 0u32;
            fn merge(n: u32, label: &mut u32, sets: &mut DisjointSet) {
                if n != 0 {
                    *label = if *label == 0 { n } else { sets.union(*label, n) };
                }
            }
            if x > 0 {
                merge(labels[idx - 1], &mut label, &mut sets);
            }
            if y > 0 {
                let up = idx - w;
                if x > 0 {
                    merge(labels[up - 1], &mut label, &mut sets);
                }
                merge(labels[up], &mut label, &mut sets);
                if x + 1 < w {
                    merge(labels[up + 1], &mut label, &mut sets);
                }
            }
            labels[idx] = if label == 0 { sets.make() } else { label };
        }
    }

    // resolve roots and accumulate per-component statistics
    let mut slot_of_root: Vec<u32> = vec![u32::MAX; sets.parent.len()];
    let mut acc: Vec<Accumulator> = Vec::new();
    for (idx, label) in labels.iter_mut().enumerate() {
        if *label == 0 {
            continue;
        }
        let root = sets.find(*label) as usize;
        if slot_of_root[root] == u32::MAX {
            slot_of_root[root] = acc.len() as u32;
            acc.push(Accumulator {
                count: 0,
                sum_x: 0,
                sum_y: 0,
                min_x: u32::MAX,
                min_y: u32::MAX,
                max_x: 0,
                max_y: 0,
                first_index: idx,
            });
        }
        let slot = slot_of_root[root];
        let (x, y) = ((idx % w) as u32, (idx / w) as u32);
        let a = &mut acc[slot as usize];
        a.count += 1;
        a.sum_x += u64::from(x);
        a.sum_y += u64::from(y);
        a.min_x = a.min_x.min(x);
        a.min_y = a.min_y.min(y);
        a.max_x = a.max_x.max(x);
        a.max_y = a.max_y.max(y);
        *label = slot + 1;
    }

    let mut order: Vec<usize> = (0..acc.len()).collect();
    let bbox_of = |a: &Accumulator| BoundingBox::new(a.min_x, a.min_y, a.max_x, a.max_y).expect("component has pixels");
    order.sort_by(|&i, &j| {
        let (a, b) = (&acc[i], &acc[j]);
        b.count
            .cmp(&a.count)
            .then_with(|| bbox_of(a).cmp(&bbox_of(b)))
            .then_with(|| a.first_index.cmp(&b.first_index))
    });

    let mut rank = vec![0u32; acc.len()];
    for (r, &slot) in order.iter().enumerate() {
        rank[slot] = r as u32 + 1;
    }
    for label in labels.iter_mut().filter(|l| **l != 0) {
        *label = rank[*label as usize - 1];
    }

    let regions = order
        .iter()
        .map(|&slot| {
            let a = &acc[slot];
            SalientRegion {
                pixel_count: a.count,
                centroid_x: a.sum_x as f64 / a.count as f64,
                centroid_y: a.sum_y as f64 / a.count as f64,
                bbox: bbox_of(a),
            }
        })
        .collect();

    Labeling { labels, regions }
}

/// 8-connected components of the salient pixels; see [`label_components`].
pub fn connected_components(mask: &BinaryMask) -> Vec<SalientRegion> {
    label_components(mask).regions
}

/// Keeps the regions with `pixel_count >= t_a`, preserving order.
pub fn area_filter(regions: &[SalientRegion], t_a: u64) -> Vec<SalientRegion> {
    regions.iter().filter(|r| r.pixel_count >= t_a).copied().collect()
}

/// Quantization levels per channel.
pub const LEVELS: usize = 8;
/// Bins in a [`ColorHistogram`].
pub const BINS: usize = LEVELS * LEVELS * LEVELS;

/// Bin of an RGB color: each channel is quantized to `value / 32`.
pub fn bin_index([r, g, b]: [u8; 3]) -> usize {
    ((r as usize >> 5) << 6) | ((g as usize >> 5) << 3) | (b as usize >> 5)
}

/// Joint RGB histogram with 8 levels per channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorHistogram {
    bins: Box<[u64; BINS]>,
    total: u64,
}

impl Default for ColorHistogram {
    fn default() -> Self {
        Self {
            bins: Box::new([0; BINS]),
            total: 0,
        }
    }
}

impl ColorHistogram {
    pub fn from_counts(counts: &[(usize, u64)]) -> Self {
        let mut h = Self::default();
        for &(bin, n) in counts {
            h.bins[bin] += n;
            h.total += n;
        }
        h
    }

    pub fn add(&mut self, bin: usize) {
        self.bins[bin] += 1;
        self.total += 1;
    }

    pub fn bins(&self) -> &[u64; BINS] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn normalized(&self) -> Vec<f64> {
        let t = self.total as f64;
        self.bins.iter().map(|&c| c as f64 / t).collect()
    }
}

/// Histogram of every pixel inside the inclusive `bbox`.
pub fn region_histogram(image: &ColorImage, bbox: &BoundingBox) -> Result<ColorHistogram> {
    bbox.check_within(image.width, image.height)?;
    let mut h = ColorHistogram::default();
    let w = image.width as usize;
    for y in bbox.y1()..=bbox.y2() {
        let row = y as usize * w;
        for px in &image.pixels[row + bbox.x1() as usize..=row + bbox.x2() as usize] {
            h.add(bin_index(*px));
        }
    }
    Ok(h)
}

/// Image pre-quantized to histogram bins, for repeated region histograms
/// over the same image.
pub struct BinnedImage {
    width: u32,
    height: u32,
    bins: Vec<u16>,
}

impl BinnedImage {
    pub fn new(image: &ColorImage) -> Self {
        Self {
            width: image.width,
            height: image.height,
            bins: image.pixels.iter().map(|&p| bin_index(p) as u16).collect(),
        }
    }

    pub fn histogram(&self, bbox: &BoundingBox) -> Result<ColorHistogram> {
        bbox.check_within(self.width, self.height)?;
        let mut h = ColorHistogram::default();
        let w = self.width as usize;
        for y in bbox.y1()..=bbox.y2() {
            let row = y as usize * w;
            for &b in &self.bins[row + bbox.x1() as usize..=row + bbox.x2() as usize] {
                h.bins[b as usize] += 1;
            }
        }
        h.total = bbox.area();
        Ok(h)
    }
}

/// Histogram intersection of the normalized histograms,
/// `Σ_b min(h1_b / total1, h2_b / total2)`.
///
/// Evaluated on integers as `Σ_b min(h1_b·total2, h2_b·total1) / (total1·total2)`,
/// so identical distributions give exactly 1.0.
pub fn histogram_similarity(h1: &ColorHistogram, h2: &ColorHistogram) -> Result<f64> {
    if h1.total == 0 || h2.total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let (t1, t2) = (u128::from(h1.total), u128::from(h2.total));
    let numer: u128 = h1
        .bins
        .iter()
        .zip(h2.bins.iter())
        .map(|(&a, &b)| (u128::from(a) * t2).min(u128::from(b) * t1))
        .sum();
    let denom = t1 * t2;
    if numer == denom {
        return Ok(1.0);
    }
    Ok(numer as f64 / denom as f64)
}
