//! Oracle checks: each production metric against an independent computation.

use layout_core::{QuantGrid, TypeVocabulary};
use layout_metrics::{
    align_score, baseline_extract_structure, exact, overlap_score, s_align, s_inclusion,
    s_overlap, sliced, wasserstein_label, Box2, TypedBox,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn random_boxes(rng: &mut ChaCha8Rng, n: usize) -> Vec<Box2> {
    (0..n)
        .map(|_| {
            let x: f64 = rng.gen_range(0.0..0.7);
            let y: f64 = rng.gen_range(0.0..0.7);
            let w = rng.gen_range(0.05..(1.0 - x).min(0.6));
            let h = rng.gen_range(0.05..(1.0 - y).min(0.6));
            Box2::new(x, y, w, h)
        })
        .collect()
}

/// Rasterized overlap oracle on a 512x512 grid: count box coverage per pixel
/// center; `sum_pairs(inter) = sum_px C(k,2)` and `sum(areas) = sum_px k`.
fn overlap_rasterized(boxes: &[Box2], grid: usize) -> f64 {
    let mut inter = 0.0f64;
    let mut area = 0.0f64;
    let step = 1.0 / grid as f64;
    for py in 0..grid {
        let cy = (py as f64 + 0.5) * step;
        for px in 0..grid {
            let cx = (px as f64 + 0.5) * step;
            let k = boxes
                .iter()
                .filter(|b| cx >= b.x && cx < b.right() && cy >= b.y && cy < b.bottom())
                .count() as f64;
            inter += k * (k - 1.0) / 2.0;
            area += k;
        }
    }
    if area == 0.0 {
        0.0
    } else {
        inter / area
    }
}

#[test]
fn overlap_matches_rasterized_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..200 {
        let n = rng.gen_range(2..7);
        let boxes = random_boxes(&mut rng, n);
        let exact = overlap_score(&boxes);
        let approx = overlap_rasterized(&boxes, 512);
        assert!(
            (exact - approx).abs() < 0.01,
            "trial {trial}: exact {exact} vs raster {approx}"
        );
    }
}

#[test]
fn label_distance_matches_exact_transport_lp() {
    // random categorical histograms on supports <= 10, TV cost
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let k = rng.gen_range(2..=10);
        let mut a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut b: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        a.iter_mut().for_each(|v| *v /= sa);
        b.iter_mut().for_each(|v| *v /= sb);
        let cost: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        let lp = exact::min_cost_transport(&cost, &a, &b);
        let tv: f64 = 0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        assert!((lp - tv).abs() < 1e-9, "lp {lp} vs tv {tv}");
    }
}

#[test]
fn corpus_label_distance_agrees_with_lp_on_its_histograms() {
    // build two tiny corpora, recover their label histograms by hand, and run
    // the LP on them
    use layout_core::{LayoutNode, LayoutTree};
    let vocab = Arc::new(TypeVocabulary::synthetic());
    let grid = Arc::new(QuantGrid::default64());
    let mk = |ts: &[u16]| {
        LayoutTree::new(
            LayoutNode::internal(
                [0, 0, 63, 63],
                0,
                ts.iter().map(|&t| LayoutNode::leaf([1, 1, 5, 5], t)).collect(),
            ),
            vocab.clone(),
            grid.clone(),
        )
    };
    let a = vec![mk(&[5, 5, 6]), mk(&[7])];
    let b = vec![mk(&[5, 6, 6, 8])];
    let got = wasserstein_label(&a, &b, false);

    // histograms over types 5..=8: a = [2,1,1,0]/4, b = [1,2,0,1]/4
    let ha = [2.0, 1.0, 1.0, 0.0];
    let hb = [1.0, 2.0, 0.0, 1.0];
    let cost: Vec<Vec<f64>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
        .collect();
    let lp = exact::min_cost_transport(&cost, &ha, &hb);
    assert!((got - lp).abs() < 1e-9, "corpus {got} vs lp {lp}");
}

#[test]
fn sliced_w1_matches_lp_on_1d_supports() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.gen_range(1..8);
        let m = rng.gen_range(1..8);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let ys: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        let direct = sliced::w1_1d(&xs, &ys);
        let lp = exact::wasserstein_1d_lp(&xs, &ys);
        assert!((direct - lp).abs() < 1e-9, "direct {direct} vs lp {lp}");
    }
}

#[test]
fn sliced_one_point_clouds_match_analytic_projection_average() {
    // distance d along one axis in R^4: per-direction distance is d*|u_axis|
    let dirs = sliced::directions(4, 128, layout_metrics::SLICE_SEED);
    for axis in 0..4 {
        let d = 0.37;
        let mut p = vec![0.2; 4];
        let mut q = vec![0.2; 4];
        q[axis] += d;
        let got = sliced::sliced_w1(&[p.clone()], &[q.clone()], &dirs);
        let expect: f64 =
            dirs.iter().map(|u| (d * u[axis]).abs()).sum::<f64>() / dirs.len() as f64;
        assert!((got - expect).abs() < 1e-6, "axis {axis}: {got} vs {expect}");
        p.clear();
        q.clear();
    }
}

#[test]
fn sliced_degenerate_1d_clouds_match_sorted_oracle() {
    // clouds varying only along one axis: SW = mean|u_axis| * W1_1d
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let dirs = sliced::directions(4, 128, layout_metrics::SLICE_SEED);
    for axis in 0..4 {
        let n = 12;
        let base = [0.3, 0.4, 0.5, 0.6];
        let mk = |vals: &[f64]| -> Vec<Vec<f64>> {
            vals.iter()
                .map(|&v| {
                    let mut p = base.to_vec();
                    p[axis] = v;
                    p
                })
                .collect()
        };
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let got = sliced::sliced_w1(&mk(&xs), &mk(&ys), &dirs);
        let mut sx = xs.clone();
        let mut sy = ys.clone();
        sx.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sy.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let w1: f64 =
            sx.iter().zip(&sy).map(|(a, b)| (a - b).abs()).sum::<f64>() / n as f64;
        let mean_u: f64 = dirs.iter().map(|u| u[axis].abs()).sum::<f64>() / dirs.len() as f64;
        let expect = mean_u * w1;
        assert!((got - expect).abs() < 1e-6, "axis {axis}: {got} vs {expect}");
    }
}

#[test]
fn structure_scores_recompute_on_random_trees() {
    let vocab = Arc::new(TypeVocabulary::synthetic());
    let grid = Arc::new(QuantGrid::default64());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let tree = layout_seq::random_tree(&mut rng, &vocab, &grid, 30, 5);
        let sets = layout_metrics::sibling_sets(&tree);
        let expect_align = if sets.is_empty() {
            0.0
        } else {
            sets.iter().map(|s| align_score(s)).sum::<f64>() / sets.len() as f64
        };
        let expect_overlap = if sets.is_empty() {
            0.0
        } else {
            sets.iter().map(|s| overlap_score(s)).sum::<f64>() / sets.len() as f64
        };
        assert!((s_align(&tree) - expect_align).abs() < 1e-12);
        assert!((s_overlap(&tree) - expect_overlap).abs() < 1e-12);
        let _ = s_inclusion(&tree);
    }
}

#[test]
fn baseline_extraction_always_validates_on_random_inputs() {
    let vocab = Arc::new(TypeVocabulary::synthetic());
    let grid = Arc::new(QuantGrid::default64());
    let leafs: Vec<u16> = (0..vocab.len() as u16).filter(|&t| vocab.is_leaf(t)).collect();
    let ints: Vec<u16> = (0..vocab.len() as u16).filter(|&t| vocab.is_internal(t)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let ne = rng.gen_range(0..8);
        let ni = rng.gen_range(0..5);
        let mut elements: Vec<TypedBox> = Vec::new();
        for _ in 0..ne {
            let b = random_boxes(&mut rng, 1)[0];
            elements.push(TypedBox { box_: b, t: leafs[rng.gen_range(0..leafs.len())] });
        }
        let mut internals: Vec<TypedBox> = Vec::new();
        for _ in 0..ni {
            let b = random_boxes(&mut rng, 1)[0];
            internals.push(TypedBox { box_: b, t: ints[rng.gen_range(0..ints.len())] });
        }
        let tree = baseline_extract_structure(&elements, &internals, vocab.clone(), grid.clone());
        let violations = layout_core::validate_tree(&tree);
        assert!(violations.is_empty(), "{violations:?}");
        assert_eq!(tree.node_count(), 1 + ne + ni);
    }
}
