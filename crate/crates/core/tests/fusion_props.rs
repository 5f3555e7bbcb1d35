mod common;

use common::{random_box, two_blob_fixture};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salprop::fusion::{filter_by_fixation, fixation_points, localize, FusionConfig, ResultDocument};
use salprop::geometry::{BoundingBox, RegionProposal};
use salprop::raster::{ColorImage, SaliencyMap};

struct Fixture {
    image: ColorImage,
    saliency: SaliencyMap,
    proposals: Vec<RegionProposal>,
}

/// Random blobs of varying size on a two-tone image, plus random proposals.
fn random_fixture(rng: &mut impl Rng) -> Fixture {
    let (w, h) = (96u32, 72u32);
    let split = rng.gen_range(10..w - 10);
    let image = ColorImage::from_fn(w, h, |x, y| {
        if x < split || (y / 12) % 2 == 0 {
            [200, 200, 40]
        } else {
            [40, 40, 200]
        }
    })
    .unwrap();
    let mut saliency = SaliencyMap::blank(w, h).unwrap();
    for _ in 0..rng.gen_range(0..6) {
        let bw = rng.gen_range(2..30);
        let bh = rng.gen_range(2..30);
        let x = rng.gen_range(0..w - bw);
        let y = rng.gen_range(0..h - bh);
        let b = BoundingBox::from_origin_size(x, y, bw, bh).unwrap();
        saliency.fill_box(&b, rng.gen_range(100..=255));
    }
    let proposals = (0..rng.gen_range(0..120))
        .map(|_| {
            let score = if rng.gen_bool(0.2) {
                None
            } else {
                Some(rng.gen_range(0.0..=1.0))
            };
            RegionProposal::new(random_box(rng, w, h), score).unwrap()
        })
        .collect();
    Fixture {
        image,
        saliency,
        proposals,
    }
}

fn lenient() -> FusionConfig {
    FusionConfig {
        t_a: 20,
        t_nms: 0.3,
        t_hist: 0.6,
        ..FusionConfig::default()
    }
}

#[test]
fn two_blob_fixture_keeps_only_planted_boxes() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let fx = two_blob_fixture(&mut rng, 50);
        let cfg = FusionConfig::default();

        let fixations = fixation_points(&fx.saliency, &cfg);
        let pts: Vec<(f64, f64)> = fixations.iter().map(|f| (f.x, f.y)).collect();
        assert_eq!(pts, vec![fx.fixations[1], fx.fixations[0]]); // larger blob first
        let filtered = filter_by_fixation(&fx.proposals, &fixations);
        assert_eq!(filtered.len(), 2);

        let res = localize(&fx.image, &fx.saliency, &fx.proposals, &cfg).unwrap();
        assert_eq!(res.boxes, fx.blob_boxes.to_vec());
        assert_eq!(res.stages.with_fixation, 2);
    }
}

#[test]
fn blank_saliency_yields_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut fx = random_fixture(&mut rng);
    fx.saliency = SaliencyMap::blank(96, 72).unwrap();
    let res = localize(&fx.image, &fx.saliency, &fx.proposals, &FusionConfig::default()).unwrap();
    assert!(res.boxes.is_empty() && res.fixations.is_empty());
}

#[test]
fn every_box_holds_a_fixation_and_stages_shrink() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut merged_somewhere = false;
    for _ in 0..200 {
        let fx = random_fixture(&mut rng);
        for cfg in [lenient(), FusionConfig::default()] {
            let res = localize(&fx.image, &fx.saliency, &fx.proposals, &cfg).unwrap();
            let s = res.stages;
            assert!(s.proposals >= s.with_fixation);
            assert!(s.with_fixation >= s.after_nms);
            assert!(s.after_nms >= s.output);
            assert_eq!(s.output, res.boxes.len());
            merged_somewhere |= s.output < s.after_nms;
            for (b, src) in res.boxes.iter().zip(&res.provenance) {
                assert!(res.fixations.iter().any(|f| b.contains_point(f.x, f.y)), "{b}");
                assert!(b.fits_within(96, 72));
                for &i in src {
                    assert!(b.contains_box(&fx.proposals[i].bbox));
                }
            }
        }
    }
    assert!(merged_somewhere, "fixtures never exercised the merge stage");
}

#[test]
fn no_suppression_no_merge_is_plain_filtering() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let fx = random_fixture(&mut rng);
        let cfg = FusionConfig {
            t_nms: 1.0,
            merge_low_overlap: false,
            ..lenient()
        };
        let res = localize(&fx.image, &fx.saliency, &fx.proposals, &cfg).unwrap();
        let mut expected: Vec<BoundingBox> = filter_by_fixation(&fx.proposals, &fixation_points(&fx.saliency, &cfg))
            .iter()
            .map(|p| p.bbox)
            .collect();
        let mut got = res.boxes.clone();
        expected.sort();
        got.sort();
        assert_eq!(got, expected);
    }
}

#[test]
fn raising_area_threshold_shrinks_survivors() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let fx = random_fixture(&mut rng);
        let lo = rng.gen_range(0..200);
        let hi = lo + rng.gen_range(0..300);
        let cfg_lo = FusionConfig { t_a: lo, ..lenient() };
        let cfg_hi = FusionConfig { t_a: hi, ..lenient() };
        let f_lo = fixation_points(&fx.saliency, &cfg_lo);
        let f_hi = fixation_points(&fx.saliency, &cfg_hi);
        assert!(f_hi.iter().all(|f| f_lo.contains(f)));
        let s_lo = filter_by_fixation(&fx.proposals, &f_lo);
        let s_hi = filter_by_fixation(&fx.proposals, &f_hi);
        assert!(s_hi.iter().all(|p| s_lo.contains(p)));
    }
}

#[test]
fn repeated_runs_serialize_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let fx = random_fixture(&mut rng);
        let cfg = lenient();
        let a = localize(&fx.image, &fx.saliency, &fx.proposals, &cfg).unwrap();
        let b = localize(&fx.image, &fx.saliency, &fx.proposals, &cfg).unwrap();
        assert_eq!(
            ResultDocument::new("x", &a, &cfg).to_json(),
            ResultDocument::new("x", &b, &cfg).to_json()
        );
    }
}

#[test]
fn proposals_outside_image_are_rejected() {
    let img = ColorImage::filled(10, 10, [0; 3]).unwrap();
    let map = SaliencyMap::blank(10, 10).unwrap();
    let p = RegionProposal::unscored(BoundingBox::new(0, 0, 10, 5).unwrap());
    assert!(localize(&img, &map, &[p], &FusionConfig::default()).is_err());
}
