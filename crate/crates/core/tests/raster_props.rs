mod common;

use std::collections::BTreeSet;

use common::flood_fill_components;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salprop::raster::{
    area_filter, binarize, connected_components, histogram_similarity, label_components, BinaryMask, ColorHistogram,
    SaliencyMap, BINS,
};

fn random_mask(rng: &mut impl Rng, w: u32, h: u32, density: f64) -> BinaryMask {
    let bits = (0..w * h).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::new(w, h, bits).unwrap()
}

fn region_pixel_sets(labels: &[u32], width: u32, n: usize) -> Vec<BTreeSet<(u32, u32)>> {
    let mut sets = vec![BTreeSet::new(); n];
    for (i, &l) in labels.iter().enumerate() {
        if l != 0 {
            sets[l as usize - 1].insert((i as u32 % width, i as u32 / width));
        }
    }
    sets
}

#[test]
fn components_match_flood_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for density in [0.1, 0.5, 0.9] {
        for _ in 0..100 {
            let mask = random_mask(&mut rng, 32, 32, density);
            let labeling = label_components(&mask);
            let oracle = flood_fill_components(mask.bits(), 32, 32);
            assert_eq!(labeling.regions.len(), oracle.len());

            let ours: BTreeSet<BTreeSet<(u32, u32)>> = region_pixel_sets(&labeling.labels, 32, labeling.regions.len())
                .into_iter()
                .collect();
            let theirs: BTreeSet<BTreeSet<(u32, u32)>> = oracle.iter().map(|r| r.pixels.clone()).collect();
            assert_eq!(ours, theirs);

            let sets = region_pixel_sets(&labeling.labels, 32, labeling.regions.len());
            for (region, pixels) in labeling.regions.iter().zip(&sets) {
                let o = oracle.iter().find(|o| &o.pixels == pixels).unwrap();
                assert_eq!(region.pixel_count, o.count());
                assert_eq!((region.centroid_x, region.centroid_y), o.centroid());
                assert_eq!(region.bbox, o.bbox());
            }
            let total: u64 = labeling.regions.iter().map(|r| r.pixel_count).sum();
            assert_eq!(total as usize, mask.salient_count());
        }
    }
}

#[test]
fn diagonal_blocks_oracle() {
    let mut bits = vec![false; 64];
    for (x, y) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 2), (3, 2), (2, 3), (3, 3)] {
        bits[y * 8 + x] = true;
    }
    let oracle = flood_fill_components(&bits, 8, 8);
    assert_eq!(oracle.len(), 1);
    assert_eq!(oracle[0].count(), 8);
    let regions = connected_components(&BinaryMask::new(8, 8, bits).unwrap());
    assert_eq!(regions.len(), 1);
    assert_eq!(regions[0].pixel_count, 8);
}

#[test]
fn labels_independent_of_scan_direction() {
    // transposing the mask transposes every component
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let mask = random_mask(&mut rng, 24, 17, 0.45);
        let transposed: Vec<bool> = (0..24 * 17)
            .map(|i| {
                let (x, y) = (i % 17, i / 17);
                mask.get(y, x)
            })
            .collect();
        let t_mask = BinaryMask::new(17, 24, transposed).unwrap();
        let a = label_components(&mask);
        let b = label_components(&t_mask);
        let sa: BTreeSet<_> = region_pixel_sets(&a.labels, 24, a.regions.len()).into_iter().collect();
        let sb: BTreeSet<BTreeSet<(u32, u32)>> = region_pixel_sets(&b.labels, 17, b.regions.len())
            .into_iter()
            .map(|s| s.into_iter().map(|(x, y)| (y, x)).collect())
            .collect();
        assert_eq!(sa, sb);
    }
}

proptest! {
    #[test]
    fn binarize_monotone(values in prop::collection::vec(any::<u8>(), 48), t1 in any::<u8>(), t2 in any::<u8>()) {
        let map = SaliencyMap::new(8, 6, values).unwrap();
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let a = binarize(&map, lo);
        let b = binarize(&map, hi);
        prop_assert_eq!((a.width(), a.height()), (8, 6));
        prop_assert!(b.salient_count() <= a.salient_count());
    }

    #[test]
    fn area_filter_monotone(bits in prop::collection::vec(any::<bool>(), 20 * 20), t1 in 0u64..40, t2 in 0u64..40) {
        let regions = connected_components(&BinaryMask::new(20, 20, bits).unwrap());
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        prop_assert!(area_filter(&regions, hi).len() <= area_filter(&regions, lo).len());
        prop_assert_eq!(area_filter(&regions, 0).len(), regions.len());
    }

    #[test]
    fn similarity_bounded_symmetric(
        a in prop::collection::vec((0..BINS, 1u64..50), 1..12),
        b in prop::collection::vec((0..BINS, 1u64..50), 1..12),
        k in 1u64..5,
    ) {
        let h1 = ColorHistogram::from_counts(&a);
        let h2 = ColorHistogram::from_counts(&b);
        let s = histogram_similarity(&h1, &h2).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, histogram_similarity(&h2, &h1).unwrap());

        let scaled: Vec<(usize, u64)> = a.iter().map(|&(bin, n)| (bin, n * k)).collect();
        prop_assert_eq!(histogram_similarity(&h1, &ColorHistogram::from_counts(&scaled)).unwrap(), 1.0);
        let equal = h1.normalized() == h2.normalized();
        prop_assert_eq!(s == 1.0, equal);
    }
}
