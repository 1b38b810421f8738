use std::sync::OnceLock;

use design_miner::embedding::{
    cosine_similarity, most_similar, negative_sampling_gradient, negative_sampling_loss, train_embedding,
    train_embedding_with_report, EmbeddingConfig, EmbeddingModel,
};
use design_miner::synthetic::planted_pair_corpus;
use proptest::prelude::*;

fn small_config() -> EmbeddingConfig {
    EmbeddingConfig {
        dim: 16,
        epochs: 4,
        min_count: 2,
        bucket_count: 1 << 12,
        ..EmbeddingConfig::default()
    }
}

fn model() -> &'static EmbeddingModel {
    static MODEL: OnceLock<EmbeddingModel> = OnceLock::new();
    MODEL.get_or_init(|| train_embedding(&planted_pair_corpus(300, 4, 11).sentences, &small_config()).unwrap())
}

fn vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #[test]
    fn cosine_is_symmetric_and_bounded(
        pair in (1usize..20).prop_flat_map(|d| (prop::collection::vec(-1e3f32..1e3, d), prop::collection::vec(-1e3f32..1e3, d)))
    ) {
        let (a, b) = pair;
        let ab = cosine_similarity(&a, &b).unwrap();
        prop_assert_eq!(ab, cosine_similarity(&b, &a).unwrap());
        prop_assert!(ab.abs() <= 1.0 + 1e-9);
    }

    #[test]
    fn neighbours_sorted_above_cutoff(i in 0usize..50, k in 1usize..20, cutoff in -1.0f64..1.0) {
        let m = model();
        let word = &m.words()[i % m.vocab_len()];
        let out = most_similar(m, word, k, cutoff);
        prop_assert!(out.len() <= k);
        prop_assert!(out.iter().all(|s| s.similarity >= cutoff && &s.word != word));
        prop_assert!(out.windows(2).all(|w| w[0].similarity >= w[1].similarity));
    }

    #[test]
    fn negative_sampling_gradient_matches_differences(
        (word, subwords, positive, negatives) in (2usize..6, 0usize..4, 1usize..4).prop_flat_map(|(d, s, n)| (
            vector(d),
            prop::collection::vec(vector(d), s),
            vector(d),
            prop::collection::vec(vector(d), n),
        ))
    ) {
        let h = 1e-5;
        let g = negative_sampling_gradient(&word, &subwords, &positive, &negatives);
        let mut analytic = g.word.clone();
        analytic.extend(g.subwords.concat());
        analytic.extend(&g.positive);
        analytic.extend(g.negatives.concat());
        let d = word.len();
        let flat: Vec<f64> =
            [word.clone(), subwords.concat(), positive.clone(), negatives.concat()].concat();
        let eval = |p: &[f64]| {
            let (w, rest) = p.split_at(d);
            let (s, rest) = rest.split_at(d * subwords.len());
            let (pos, neg) = rest.split_at(d);
            negative_sampling_loss(
                w,
                &s.chunks(d).map(<[f64]>::to_vec).collect::<Vec<_>>(),
                pos,
                &neg.chunks(d).map(<[f64]>::to_vec).collect::<Vec<_>>(),
            )
        };
        let numeric: Vec<f64> = (0..flat.len())
            .map(|i| {
                let (mut a, mut b) = (flat.clone(), flat.clone());
                a[i] += h;
                b[i] -= h;
                (eval(&a) - eval(&b)) / (2.0 * h)
            })
            .collect();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&diff) <= 1e-4 * norm(&analytic).max(norm(&numeric)).max(1e-8));
    }
}

#[test]
fn corpus_loss_falls_over_training() {
    let corpus = planted_pair_corpus(400, 5, 4).sentences;
    let (_, report) = train_embedding_with_report(&corpus, &small_config(), true).unwrap();
    assert_eq!(report.epoch_losses.len(), 4);
    assert!(
        report.epoch_losses.last() < report.epoch_losses.first(),
        "{:?}",
        report.epoch_losses
    );
}

#[test]
fn save_load_round_trip_is_exact() {
    let dir = tempfile::TempDir::new().unwrap();
    let path = dir.path().join("m.vec");
    model().save(&path).unwrap();
    let back = EmbeddingModel::load(&path).unwrap();
    assert_eq!(back.fingerprint(), model().fingerprint());
    for w in model().words() {
        assert_eq!(back.word_vector(w), model().word_vector(w));
    }
    assert_eq!(back.word_vector("neverseenword"), model().word_vector("neverseenword"));
}
