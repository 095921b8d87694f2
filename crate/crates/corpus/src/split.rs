use crate::CorpusConfig;
use layout_core::LayoutTree;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic train/test split.
///
/// The test share is `floor(n * test / (train + test))`, so 10 trees at 9:1
/// give 9 train and 1 test, and a single tree goes entirely to train. Both
/// halves preserve corpus order; membership is drawn from a seeded shuffle.
pub fn split(corpus: &[LayoutTree], config: &CorpusConfig) -> (Vec<LayoutTree>, Vec<LayoutTree>) {
    let n = corpus.len();
    let (tr, te) = config.split_ratio;
    let denom = (tr + te).max(1) as usize;
    let n_test = n * te as usize / denom;

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5911_7000);
    indices.shuffle(&mut rng);
    let mut is_test = vec![false; n];
    for &i in indices.iter().take(n_test) {
        is_test[i] = true;
    }

    let mut train = Vec::with_capacity(n - n_test);
    let mut test = Vec::with_capacity(n_test);
    for (i, tree) in corpus.iter().enumerate() {
        if is_test[i] {
            test.push(tree.clone());
        } else {
            train.push(tree.clone());
        }
    }
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{generate_synthetic, SyntheticGrammarSpec};

    #[test]
    fn ten_trees_split_nine_one() {
        let corpus = generate_synthetic(&SyntheticGrammarSpec::default_synthetic(), 10, 1);
        let config = CorpusConfig::synthetic_defaults(42);
        let (train, test) = split(&corpus, &config);
        assert_eq!(train.len(), 9);
        assert_eq!(test.len(), 1);
    }

    #[test]
    fn single_tree_goes_to_train() {
        let corpus = generate_synthetic(&SyntheticGrammarSpec::default_synthetic(), 1, 1);
        let config = CorpusConfig::synthetic_defaults(42);
        let (train, test) = split(&corpus, &config);
        assert_eq!(train.len(), 1);
        assert_eq!(test.len(), 0);
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let corpus = generate_synthetic(&SyntheticGrammarSpec::default_synthetic(), 57, 3);
        let config = CorpusConfig::synthetic_defaults(7);
        let (tr1, te1) = split(&corpus, &config);
        let (tr2, te2) = split(&corpus, &config);
        assert_eq!(tr1.len(), tr2.len());
        assert_eq!(te1.len(), te2.len());
        assert_eq!(tr1.len() + te1.len(), corpus.len());
        for (a, b) in tr1.iter().zip(&tr2) {
            assert_eq!(a.root, b.root);
        }
        for (a, b) in te1.iter().zip(&te2) {
            assert_eq!(a.root, b.root);
        }
        // within one of the exact ratio
        let expect_test = corpus.len() as f64 * 0.1;
        assert!((te1.len() as f64 - expect_test).abs() <= 1.0);
    }
}
