mod common;

use common::{random_box, raster_jaccard};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use salprop::eval::{corloc, format_tenths, score_boxes, CategoryKey, EvalRecord, GroundTruth};
use salprop::geometry::BoundingBox;

fn arb_box() -> impl Strategy<Value = BoundingBox> {
    (0u32..40, 0u32..40, 1u32..25, 1u32..25).prop_map(|(x, y, w, h)| BoundingBox::from_origin_size(x, y, w, h).unwrap())
}

fn truth(boxes: Vec<BoundingBox>) -> GroundTruth {
    GroundTruth {
        image_id: "img".into(),
        key: CategoryKey::new("c"),
        boxes,
    }
}

#[test]
fn best_jaccard_agrees_with_raster_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let preds: Vec<_> = (0..3).map(|_| random_box(&mut rng, 32, 32)).collect();
        let gts: Vec<_> = (0..2).map(|_| random_box(&mut rng, 32, 32)).collect();
        let oracle = preds
            .iter()
            .flat_map(|p| gts.iter().map(move |t| raster_jaccard(p, t)))
            .map(|(i, u)| i as f64 / u as f64)
            .fold(0.0, f64::max);
        let r = score_boxes("img", &preds, &truth(gts)).unwrap();
        assert_eq!(r.best_jaccard, oracle);
        assert_eq!(r.localized, oracle > 0.5);
    }
}

proptest! {
    #[test]
    fn score_permutation_invariant_and_monotone(
        mut preds in prop::collection::vec(arb_box(), 0..6),
        mut gts in prop::collection::vec(arb_box(), 1..4),
        extra in arb_box(),
    ) {
        let base = score_boxes("img", &preds, &truth(gts.clone())).unwrap();
        preds.reverse();
        gts.rotate_left(1);
        let permuted = score_boxes("img", &preds, &truth(gts.clone())).unwrap();
        prop_assert_eq!(base.best_jaccard, permuted.best_jaccard);
        preds.push(extra);
        let more = score_boxes("img", &preds, &truth(gts)).unwrap();
        prop_assert!(more.best_jaccard >= base.best_jaccard);
    }

    #[test]
    fn corloc_order_and_duplication_invariant(
        flags in prop::collection::vec((0usize..3, any::<bool>()), 1..40),
    ) {
        let records: Vec<EvalRecord> = flags
            .iter()
            .enumerate()
            .map(|(i, &(c, hit))| EvalRecord {
                image_id: i.to_string(),
                key: CategoryKey::new(format!("cat{c}")),
                best_jaccard: if hit { 0.9 } else { 0.1 },
                localized: hit,
            })
            .collect();
        let base = corloc(&records).unwrap();
        let mut rev = records.clone();
        rev.reverse();
        prop_assert_eq!(&corloc(&rev).unwrap(), &base);
        let doubled: Vec<EvalRecord> = records.iter().chain(records.iter()).cloned().collect();
        let d = corloc(&doubled).unwrap();
        for (a, b) in d.categories.iter().zip(&base.categories) {
            prop_assert_eq!(format_tenths(a.corloc), format_tenths(b.corloc));
            prop_assert!((0.0..=100.0).contains(&a.corloc));
        }
    }
}
