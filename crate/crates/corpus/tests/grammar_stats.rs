//! Statistical guarantees of the synthetic grammar, checked with the metric
//! implementations.

use layout_corpus::{generate_synthetic, SyntheticGrammarSpec};
use layout_metrics::{overlap_score, s_inclusion_detailed, Box2};

#[test]
fn synthetic_corpus_has_perfect_inclusion() {
    let spec = SyntheticGrammarSpec::default_synthetic();
    let corpus = generate_synthetic(&spec, 2000, 90);
    assert_eq!(corpus.len(), 2000);
    let mut total = 0.0;
    for tree in &corpus {
        let detail = s_inclusion_detailed(tree);
        assert_eq!(detail.skipped, 0);
        total += detail.mean;
    }
    let mean = total / corpus.len() as f64;
    assert_eq!(mean, 1.0, "containment is exact by construction");
}

#[test]
fn linear_sibling_sets_never_overlap() {
    let spec = SyntheticGrammarSpec::default_synthetic();
    let corpus = generate_synthetic(&spec, 2000, 91);
    let lin_h = spec.vocabulary.index_of("LinearH").unwrap();
    let lin_v = spec.vocabulary.index_of("LinearV").unwrap();
    let mut checked = 0usize;
    let mut total = 0.0f64;
    for tree in &corpus {
        tree.visit(|node, _| {
            if (node.t == lin_h || node.t == lin_v) && !node.children.is_empty() {
                let boxes: Vec<Box2> =
                    node.children.iter().map(|c| Box2::from_node(c, tree)).collect();
                total += overlap_score(&boxes);
                checked += 1;
            }
        });
    }
    assert!(checked > 500, "grammar produced {checked} linear containers");
    assert_eq!(total, 0.0, "mean sibling overlap under linear containers");
}

#[test]
fn trees_serialize_and_round_trip() {
    let spec = SyntheticGrammarSpec::default_synthetic();
    let corpus = generate_synthetic(&spec, 500, 92);
    for tree in &corpus {
        let seq = layout_seq::serialize(tree).unwrap();
        let back =
            layout_seq::deserialize(&seq, tree.vocabulary.clone(), tree.grid.clone()).unwrap();
        assert_eq!(back.root, tree.root);
    }
}
