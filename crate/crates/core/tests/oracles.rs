//! Library routines checked against the brute-force references in
//! `common`, plus the structural invariants of each stage.

mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use suturemap::decode::{
    cut_oversized, decode_trace, dilate, dilate_with_border, erode, erode_with_border, label_map,
    open, otsu_threshold_histogram, BinaryMask, Border, Connectivity, DecodeConfig, ElementShape,
    StructuringElement,
};
use suturemap::evaluation::{match_points, MatchConfig};
use suturemap::heatmap::{render_heatmap, GaussianSpec};
use suturemap::synth::{sample_scene, SceneConstraints};
use suturemap::types::{ImageDims, LandmarkSet, Point2D};
use suturemap::{decode, evaluation::f1};

fn hist(values: &[u8]) -> [u64; 256] {
    let mut h = [0u64; 256];
    for &v in values {
        h[v as usize] += 1;
    }
    h
}

fn mask_strategy() -> impl Strategy<Value = BinaryMask> {
    (1u32..24, 1u32..24, any::<u64>(), 0.2f64..0.8).prop_map(|(w, h, seed, density)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_mask(&mut rng, ImageDims::new(w, h).unwrap(), density)
    })
}

fn element_strategy() -> impl Strategy<Value = StructuringElement> {
    prop_oneof![
        Just(StructuringElement::square(3).unwrap()),
        Just(StructuringElement::shaped(ElementShape::Cross, 3).unwrap()),
        Just(StructuringElement::shaped(ElementShape::Disk, 5).unwrap()),
        Just(StructuringElement::square(1).unwrap()),
    ]
}

fn points_strategy(max: usize) -> impl Strategy<Value = Vec<Point2D>> {
    prop::collection::vec((0.0f64..30.0, 0.0f64..30.0), 0..=max)
        .prop_map(|v| v.into_iter().map(Point2D::from).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn otsu_equals_exhaustive_search(values in prop::collection::vec(any::<u8>(), 1..200)) {
        prop_assert_eq!(otsu_threshold_histogram(&hist(&values)), otsu_oracle(&values));
    }

    #[test]
    fn otsu_few_levels(levels in prop::collection::vec(any::<u8>(), 1..4), n in 1usize..120, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<u8> = (0..n).map(|_| levels[rng.random_range(0..levels.len())]).collect();
        prop_assert_eq!(otsu_threshold_histogram(&hist(&values)), otsu_oracle(&values));
    }

    #[test]
    fn morphology_matches_naive(m in mask_strategy(), se in element_strategy()) {
        prop_assert_eq!(erode(&m, &se), naive_erode(&m, &se));
        prop_assert_eq!(dilate(&m, &se), naive_dilate(&m, &se));
        prop_assert_eq!(open(&m, &se, 1), naive_open(&m, &se));
    }

    #[test]
    fn erosion_dilation_duality(m in mask_strategy(), se in element_strategy()) {
        // Complementing the mask also complements the out-of-frame value.
        let lhs = erode_with_border(&m, &se, Border::Background);
        let rhs = dilate_with_border(&m.complement(), &se, Border::Background.flipped()).complement();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn opening_idempotent_and_anti_extensive(m in mask_strategy(), se in element_strategy(), iters in 1u32..3) {
        let once = open(&m, &se, iters);
        prop_assert_eq!(open(&once, &se, iters), once.clone());
        prop_assert!(once.is_subset_of(&m));
    }

    #[test]
    fn labelling_matches_flood_fill(m in mask_strategy(), eight in any::<bool>()) {
        let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
        let labels = label_map(&m, conn);
        let flood = flood_fill_regions(&m, conn);
        prop_assert_eq!(labels.regions.len(), flood.len());
        for (r, f) in labels.regions.iter().zip(&flood) {
            prop_assert_eq!(r.pixel_count, f.area);
            prop_assert!((r.centroid.x - f.centroid.x).abs() < 1e-9);
            prop_assert!((r.centroid.y - f.centroid.y).abs() < 1e-9);
            prop_assert_eq!((r.bbox.min_x as usize, r.bbox.min_y as usize, r.bbox.max_x as usize, r.bbox.max_y as usize), f.bbox);
            prop_assert!(r.bbox.contains(r.centroid));
            for &(x, y) in &f.pixels {
                prop_assert_eq!(labels.label_at(x, y), r.label);
            }
        }
        let total: usize = labels.regions.iter().map(|r| r.pixel_count).sum();
        prop_assert_eq!(total, m.count());
    }

    #[test]
    fn cutting_never_adds_foreground(m in mask_strategy(), factor in 0.3f64..2.0) {
        let cfg = DecodeConfig { cut_area_factor: factor, ..DecodeConfig::default() };
        let labels = label_map(&m, cfg.connectivity);
        prop_assert!(cut_oversized(&m, &labels, &cfg).is_subset_of(&m));
    }

    #[test]
    fn matching_invariants(pred in points_strategy(8), gt in points_strategy(8)) {
        let dims = ImageDims::new(32, 32).unwrap();
        let p = LandmarkSet::new("p", dims, pred.clone()).unwrap();
        let g = LandmarkSet::new("g", dims, gt.clone()).unwrap();
        let cfg = MatchConfig::default();
        let r = match_points(&p, &g, &cfg).unwrap();
        prop_assert_eq!(r.tp + r.fp, pred.len());
        prop_assert_eq!(r.tp + r.fn_, gt.len());
        prop_assert_eq!(r.tp, r.pairs.len());
        let mut seen_p = std::collections::HashSet::new();
        let mut seen_g = std::collections::HashSet::new();
        for pair in &r.pairs {
            prop_assert!(seen_p.insert(pair.pred_index));
            prop_assert!(seen_g.insert(pair.gt_index));
            prop_assert!(pair.distance < 6.0);
        }
        prop_assert!(r.tp <= max_matching(&pred, &gt, |d| d < 6.0));

        let swapped = match_points(&g, &p, &cfg).unwrap();
        prop_assert_eq!(swapped.tp, r.tp);
        prop_assert_eq!(swapped.fp, r.fn_);
        prop_assert_eq!(swapped.fn_, r.fp);
    }

    #[test]
    fn f1_is_between_p_and_s(p in 0.0f64..=100.0, s in 0.0f64..=100.0) {
        let v = f1(p, s);
        if p + s > 0.0 {
            prop_assert!(v.value >= p.min(s) - 1e-9 && v.value <= p.max(s) + 1e-9);
        } else {
            prop_assert!(v.degenerate);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decode_round_trip(seed in any::<u64>()) {
        let c = SceneConstraints { seed, border_margin: 6.0, ..SceneConstraints::default() };
        let gt = sample_scene(&c).unwrap();
        let h = render_heatmap(&gt, &GaussianSpec::default()).unwrap();
        let cfg = DecodeConfig::default();
        let pred = decode(&h, &cfg).unwrap();
        prop_assert_eq!(&pred, &decode(&h, &cfg).unwrap());
        prop_assert!(pred.points.iter().all(|p| pred.dims.contains(*p)));
        let r = match_points(&pred, &gt, &MatchConfig::default()).unwrap();
        prop_assert_eq!((r.fp, r.fn_), (0, 0));
        for pair in &r.pairs {
            prop_assert!(pair.distance < 1.0);
        }
    }
}

#[test]
fn two_squares_joined_by_bridge_split_by_opening() {
    let dims = ImageDims::new(20, 12).unwrap();
    let mut m = BinaryMask::empty(dims);
    for y in 3..8 {
        for x in 2..7 {
            m.set(x, y, true);
            m.set(x + 9, y, true);
        }
    }
    for x in 7..11 {
        m.set(x, 5, true);
    }
    let se = StructuringElement::square(3).unwrap();
    assert_eq!(label_map(&m, Connectivity::Eight).regions.len(), 1);
    let opened = open(&m, &se, 1);
    assert_eq!(opened, naive_open(&m, &se));
    let regions = label_map(&opened, Connectivity::Eight).regions;
    assert_eq!(regions.len(), 2);
    assert!(regions.iter().all(|r| r.pixel_count == 25));
}

#[test]
fn greedy_counterexample_is_suboptimal_but_bounded() {
    // Greedy takes the 2.0 pair first; the leftover pair is 8 px apart.
    // The optimum pairs them crosswise at 5.0 each.
    let dims = ImageDims::new(32, 32).unwrap();
    let pred = vec![Point2D::new(10.0, 10.0), Point2D::new(7.0, 10.0)];
    let gt = vec![Point2D::new(12.0, 10.0), Point2D::new(15.0, 10.0)];
    let r = match_points(
        &LandmarkSet::new("p", dims, pred.clone()).unwrap(),
        &LandmarkSet::new("g", dims, gt.clone()).unwrap(),
        &MatchConfig::default(),
    )
    .unwrap();
    assert_eq!(r.tp, 1);
    assert_eq!(max_matching(&pred, &gt, |d| d < 6.0), 2);
}

#[test]
fn decode_trace_stages_shrink_monotonically() {
    let c = SceneConstraints {
        seed: 4,
        min_points: 8,
        max_points: 8,
        ..SceneConstraints::default()
    };
    let h = render_heatmap(&sample_scene(&c).unwrap(), &GaussianSpec::default()).unwrap();
    let t = decode_trace(&h, &DecodeConfig::default()).unwrap();
    assert!(t.opened.is_subset_of(&t.thresholded));
    assert!(t.cut.is_subset_of(&t.opened));
    assert_eq!(t.points.len(), 8);
}
