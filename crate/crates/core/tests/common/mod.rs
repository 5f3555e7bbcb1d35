//! Independent reference implementations and fixtures shared by the
//! integration tests. Nothing here calls the code paths it is used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use salprop::geometry::{BoundingBox, RegionProposal};
use salprop::raster::{ColorImage, SaliencyMap};

/// Pixels covered by an inclusive box.
pub fn box_pixels(b: &BoundingBox) -> BTreeSet<(u32, u32)> {
    let mut s = BTreeSet::new();
    for y in b.y1()..=b.y2() {
        for x in b.x1()..=b.x2() {
            s.insert((x, y));
        }
    }
    s
}

/// Jaccard by counting rasterized member pixels.
pub fn raster_jaccard(a: &BoundingBox, b: &BoundingBox) -> (usize, usize) {
    let pa = box_pixels(a);
    let pb = box_pixels(b);
    (pa.intersection(&pb).count(), pa.union(&pb).count())
}

/// Union box as min/max over the member pixels of both boxes.
pub fn raster_union_box(a: &BoundingBox, b: &BoundingBox) -> BoundingBox {
    let all: Vec<(u32, u32)> = box_pixels(a).union(&box_pixels(b)).copied().collect();
    let x1 = all.iter().map(|p| p.0).min().unwrap();
    let x2 = all.iter().map(|p| p.0).max().unwrap();
    let y1 = all.iter().map(|p| p.1).min().unwrap();
    let y2 = all.iter().map(|p| p.1).max().unwrap();
    BoundingBox::new(x1, y1, x2, y2).unwrap()
}

pub fn random_box(rng: &mut impl Rng, width: u32, height: u32) -> BoundingBox {
    let x1 = rng.gen_range(0..width);
    let y1 = rng.gen_range(0..height);
    let x2 = rng.gen_range(x1..width);
    let y2 = rng.gen_range(y1..height);
    BoundingBox::new(x1, y1, x2, y2).unwrap()
}

/// Component found by the recursive flood fill.
#[derive(Debug, Clone, PartialEq)]
pub struct FloodRegion {
    pub pixels: BTreeSet<(u32, u32)>,
}

impl FloodRegion {
    pub fn count(&self) -> u64 {
        self.pixels.len() as u64
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.pixels.len() as f64;
        let sx: f64 = self.pixels.iter().map(|p| f64::from(p.0)).sum();
        let sy: f64 = self.pixels.iter().map(|p| f64::from(p.1)).sum();
        (sx / n, sy / n)
    }

    pub fn bbox(&self) -> BoundingBox {
        let x1 = self.pixels.iter().map(|p| p.0).min().unwrap();
        let x2 = self.pixels.iter().map(|p| p.0).max().unwrap();
        let y1 = self.pixels.iter().map(|p| p.1).min().unwrap();
        let y2 = self.pixels.iter().map(|p| p.1).max().unwrap();
        BoundingBox::new(x1, y1, x2, y2).unwrap()
    }
}

fn fill(bits: &[bool], w: i64, h: i64, x: i64, y: i64, seen: &mut [bool], out: &mut BTreeSet<(u32, u32)>) {
    if x < 0 || y < 0 || x >= w || y >= h {
        return;
    }
    let idx = (y * w + x) as usize;
    if !bits[idx] || seen[idx] {
        return;
    }
    seen[idx] = true;
    out.insert((x as u32, y as u32));
    for dy in -1..=1 {
        for dx in -1..=1 {
            if dx != 0 || dy != 0 {
                fill(bits, w, h, x + dx, y + dy, seen, out);
            }
        }
    }
}

/// 8-connected components by recursive flood fill, in discovery order.
pub fn flood_fill_components(bits: &[bool], width: u32, height: u32) -> Vec<FloodRegion> {
    let (w, h) = (i64::from(width), i64::from(height));
    let mut seen = vec![false; bits.len()];
    let mut regions = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if bits[idx] && !seen[idx] {
                let mut pixels = BTreeSet::new();
                fill(bits, w, h, x, y, &mut seen, &mut pixels);
                regions.push(FloodRegion { pixels });
            }
        }
    }
    regions
}

/// Direct per-pixel evaluation of the contrast saliency formula with
/// explicit window loops.
pub fn contrast_reference(image: &ColorImage, radius: u32) -> Vec<u8> {
    let (w, h) = (image.width() as i64, image.height() as i64);
    let r = i64::from(radius);
    let n = (w * h) as f64;
    let mut mean = [0f64; 3];
    let mut total = [0u64; 3];
    for p in image.pixels() {
        for c in 0..3 {
            total[c] += u64::from(p[c]);
        }
    }
    for c in 0..3 {
        mean[c] = total[c] as f64 / n;
    }

    let mut dist = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let mut sum = [0u64; 3];
            let mut count = 0u64;
            for yy in (y - r).max(0)..=(y + r).min(h - 1) {
                for xx in (x - r).max(0)..=(x + r).min(w - 1) {
                    let p = image.pixel(xx as u32, yy as u32);
                    for c in 0..3 {
                        sum[c] += u64::from(p[c]);
                    }
                    count += 1;
                }
            }
            let mut sq = 0.0;
            for c in 0..3 {
                let d = mean[c] - sum[c] as f64 / count as f64;
                sq += d * d;
            }
            dist.push(sq.sqrt());
        }
    }
    let lo = dist.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = dist.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![0; dist.len()];
    }
    dist.iter()
        .map(|&d| (255.0 * (d - lo) / (hi - lo)).round() as u8)
        .collect()
}

/// Two salient squares with one proposal each, plus `distractors` random
/// proposals that provably contain neither fixation.
pub struct TwoBlobFixture {
    pub image: ColorImage,
    pub saliency: SaliencyMap,
    pub proposals: Vec<RegionProposal>,
    pub blob_boxes: [BoundingBox; 2],
    pub fixations: [(f64, f64); 2],
}

pub fn two_blob_fixture(rng: &mut impl Rng, distractors: usize) -> TwoBlobFixture {
    let (w, h) = (160u32, 120u32);
    let blob_a = BoundingBox::new(20, 20, 49, 49).unwrap();
    let blob_b = BoundingBox::new(100, 60, 139, 99).unwrap();
    let fixations = [(34.5, 34.5), (119.5, 79.5)];

    let mut image = ColorImage::filled(w, h, [20, 60, 20]).unwrap();
    let mut saliency = SaliencyMap::blank(w, h).unwrap();
    for (b, color) in [(blob_a, [220, 30, 30]), (blob_b, [30, 30, 220])] {
        saliency.fill_box(&b, 255);
        for y in b.y1()..=b.y2() {
            for x in b.x1()..=b.x2() {
                image.set_pixel(x, y, color);
            }
        }
    }

    let mut proposals = vec![
        RegionProposal::new(blob_a, Some(0.95)).unwrap(),
        RegionProposal::new(blob_b, Some(0.9)).unwrap(),
    ];
    while proposals.len() < 2 + distractors {
        let b = random_box(rng, w, h);
        let hits = fixations.iter().any(|&(fx, fy)| {
            f64::from(b.x1()) <= fx && fx <= f64::from(b.x2()) && f64::from(b.y1()) <= fy && fy <= f64::from(b.y2())
        });
        if !hits {
            let score = rng.gen_range(0.0..1.0);
            proposals.push(RegionProposal::new(b, Some(score)).unwrap());
        }
    }
    // interleave the planted proposals among the distractors
    let n = proposals.len();
    proposals.swap(0, n / 2);
    proposals.swap(1, n - 1);

    TwoBlobFixture {
        image,
        saliency,
        proposals,
        blob_boxes: [blob_a, blob_b],
        fixations,
    }
}
