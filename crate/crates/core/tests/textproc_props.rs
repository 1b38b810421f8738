use design_miner::textproc::{
    bounded_levenshtein, clean_text, preprocess, suggest_spelling, LemmaLexicon, PipelineConfig, SpellDictionary,
};
use proptest::prelude::*;

fn raw_text() -> impl Strategy<Value = String> {
    let pieces = prop::sample::select(vec![
        "The",
        "running",
        "designs",
        "were",
        "BETTER",
        "classes",
        "interfaces",
        "x",
        "a",
        "is",
        "refactoring",
        "mice",
        "studies",
        "`let x = 1;`",
        "<code>int y;</code>",
        "<p>",
        "</p>",
        "3.14",
        "v2",
        "don't",
        "e.g.",
        "café",
        "ÉCOLE",
        "٣",
        "!!",
        "--",
        "\t",
        "\n",
        "architectures",
        "supercalifragilisticexpialidocious",
        "abcdefghijklmnopqrstuvwxyzabcdef",
        "coupling",
        "modules",
        "happily",
        "went",
    ]);
    prop::collection::vec(pieces, 0..25).prop_map(|v| v.join(" "))
}

proptest! {
    #[test]
    fn preprocessing_is_idempotent(text in raw_text(), lemmatize in any::<bool>()) {
        let config = PipelineConfig { lemmatize, ..PipelineConfig::default() };
        let lex = LemmaLexicon::bundled();
        let once = preprocess(&text, &config, lex, None);
        let twice = preprocess(&once.join(), &config, lex, None);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn tokens_respect_length_and_stopwords(text in raw_text(), min_len in 1usize..4, span in 0usize..10) {
        let config = PipelineConfig { min_len, max_len: min_len + span, ..PipelineConfig::default() };
        for t in preprocess(&text, &config, LemmaLexicon::bundled(), None).iter() {
            let n = t.chars().count();
            prop_assert!(n >= config.min_len && n <= config.max_len, "{t:?}");
            prop_assert!(!config.stopword_set.contains(t), "{t:?}");
        }
    }

    #[test]
    fn clean_text_keeps_only_lowercase_letters(text in raw_text(), noise in "\\PC{0,40}", strip in any::<bool>()) {
        let cleaned = clean_text(&format!("{text} {noise}"), strip);
        for c in cleaned.chars() {
            prop_assert!(c == ' ' || (c.is_alphabetic() && !c.is_uppercase()), "{c:?} in {cleaned:?}");
            prop_assert!(!c.is_numeric());
        }
    }

    #[test]
    fn suggestions_are_bounded_and_sorted(word in "[a-z]{1,9}", max in 1usize..6) {
        let dict = SpellDictionary::bundled();
        let out = suggest_spelling(&word, dict, max);
        prop_assert!(!out.is_empty() && out.len() <= max);
        let w: Vec<char> = word.chars().collect();
        let dist: Vec<usize> = out
            .iter()
            .map(|s| bounded_levenshtein(&w, &s.chars().collect::<Vec<_>>(), 64).unwrap())
            .collect();
        prop_assert!(dist.windows(2).all(|p| p[0] <= p[1]), "{out:?} {dist:?}");
    }
}
