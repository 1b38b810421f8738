//! Seeded generators for demonstration and self-test corpora.
//!
//! * [`design_corpus`]: English-like design and general discussions built
//!   from shared vocabulary plus class-specific stock phrases.
//! * [`planted_pair_corpus`]: pseudo-word sentences where chosen word pairs
//!   only ever appear side by side.
//! * [`twin_domains`]: two domains expressing the same concepts through
//!   disjoint vocabularies, with injector embeddings that link the twins.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, Discussion, Label};
use crate::embedding::EmbeddingModel;
use crate::seeded_rng;
use crate::textproc::{default_stopwords, LemmaLexicon, SpellDictionary, TokenSeq};

const SHARED: &[&str] = &[
    "code",
    "change",
    "file",
    "function",
    "method",
    "test",
    "value",
    "line",
    "issue",
    "patch",
    "commit",
    "review",
    "comment",
    "project",
    "user",
    "case",
    "time",
    "call",
    "return",
    "error",
    "check",
    "support",
    "remove",
    "work",
    "look",
    "update",
    "problem",
    "question",
    "example",
    "idea",
    "point",
    "thing",
    "part",
    "system",
    "library",
    "feature",
    "behavior",
    "output",
    "input",
    "result",
    "option",
    "default",
    "config",
    "parameter",
    "variable",
    "type",
    "object",
    "string",
    "list",
    "array",
    "request",
    "response",
    "server",
    "client",
    "data",
    "field",
    "name",
    "path",
    "directory",
    "run",
    "script",
    "tool",
    "command",
    "flag",
    "state",
    "logic",
    "branch",
    "reason",
    "approach",
    "solution",
    "suggestion",
    "current",
    "previous",
    "simple",
    "better",
    "easy",
    "hard",
    "clear",
    "wrong",
    "right",
    "small",
    "large",
    "good",
    "nice",
    "quick",
    "possible",
    "different",
    "specific",
    "main",
    "local",
    "global",
    "internal",
    "external",
    "common",
    "similar",
    "existing",
    "original",
    "extra",
    "separate",
    "single",
    "multiple",
    "maybe",
    "probably",
    "actually",
    "instead",
    "agree",
    "think",
    "prefer",
    "handle",
    "implement",
    "support",
    "document",
    "explain",
    "consider",
    "discuss",
    "suggest",
    "expect",
    "happen",
    "help",
    "add",
    "want",
    "try",
    "keep",
    "start",
    "stop",
    "open",
    "close",
    "read",
    "write",
    "load",
    "save",
    "parse",
    "print",
    "log",
    "cache",
    "memory",
    "thread",
    "process",
    "performance",
    "speed",
    "size",
    "count",
    "number",
    "index",
    "key",
    "table",
    "query",
    "format",
    "version",
    "platform",
    "window",
    "linux",
    "python",
    "java",
];

const DESIGN_PHRASES: &[&str] = &[
    "separation of concerns",
    "single responsibility principle",
    "dependency injection container",
    "abstraction layer",
    "public interface",
    "module boundary",
    "design pattern",
    "loose coupling",
    "domain model",
    "class hierarchy",
    "service architecture",
    "api contract",
    "plugin system",
    "event driven architecture",
    "extension point",
    "strategy pattern",
    "factory method",
    "high cohesion",
    "layered architecture",
    "interface segregation",
    "composition over inheritance",
    "component diagram",
    "architectural decision",
    "encapsulate the state",
    "refactor the module",
    "split the responsibility",
    "introduce an adapter",
    "visitor pattern",
    "observer pattern",
    "facade over the subsystem",
];

const GENERAL_PHRASES: &[&str] = &[
    "fix the typo",
    "update the changelog",
    "bump the version",
    "merge conflict",
    "failing build",
    "trailing whitespace",
    "code formatting",
    "release notes",
    "broken link",
    "missing semicolon",
    "unit test failure",
    "continuous integration pipeline",
    "rebase onto master",
    "squash the commits",
    "license header",
    "readme update",
    "null pointer exception",
    "stack trace",
    "off by one error",
    "spelling mistake",
    "flaky test",
    "install instructions",
    "upgrade the dependency",
    "deprecation warning",
    "compiler warning",
    "wrong indentation",
    "rename the variable",
    "typo in the docstring",
    "version number",
    "crash on startup",
];

const FILLERS: &[&str] = &[
    "the", "we", "this", "it", "should", "could", "and", "to", "of", "in", "is", "that", "i",
];

fn zipf(n: usize, s: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((0..n).map(|r| 1.0 / (r as f64 + 1.0).powf(s))).expect("positive weights")
}

struct PhraseModel {
    shared: WeightedIndex<f64>,
    design: WeightedIndex<f64>,
    general: WeightedIndex<f64>,
}

fn document(rng: &mut ChaCha8Rng, model: &PhraseModel, design: bool) -> String {
    let (own, other, own_dist, other_dist) = if design {
        (DESIGN_PHRASES, GENERAL_PHRASES, &model.design, &model.general)
    } else {
        (GENERAL_PHRASES, DESIGN_PHRASES, &model.general, &model.design)
    };
    let mut sentences = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let mut words: Vec<&str> = Vec::new();
        for _ in 0..rng.gen_range(4..=10) {
            if rng.gen_bool(0.35) {
                words.push(FILLERS[rng.gen_range(0..FILLERS.len())]);
            }
            let u: f64 = rng.gen();
            if u < 0.22 {
                words.extend(own[own_dist.sample(rng)].split(' '));
            } else if u < 0.30 {
                words.extend(other[other_dist.sample(rng)].split(' '));
            } else {
                words.push(SHARED[model.shared.sample(rng)]);
            }
        }
        let mut s = words.join(" ");
        if let Some(first) = s.get(..1) {
            s = first.to_uppercase() + &s[1..];
        }
        s.push('.');
        sentences.push(s);
    }
    sentences.join(" ")
}

/// `n_per_class` design and general discussions of a few sentences each.
/// Design text leans on architecture phrasing, general text on maintenance
/// chores; both draw most words from a shared vocabulary.
pub fn design_corpus(n_per_class: usize, seed: u64) -> Dataset {
    let mut rng = seeded_rng(seed);
    let model = PhraseModel {
        shared: zipf(SHARED.len(), 1.0),
        design: zipf(DESIGN_PHRASES.len(), 0.8),
        general: zipf(GENERAL_PHRASES.len(), 0.8),
    };
    let mut records = Vec::with_capacity(2 * n_per_class);
    for i in 0..2 * n_per_class {
        let design = i % 2 == 0;
        let text = document(&mut rng, &model, design);
        let label = Label::from_design(design);
        records.push(Discussion::new(format!("syn-{i:06}"), text, "synthetic").with_label(label));
    }
    Dataset::new("synthetic", "synthetic", records)
}

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "kr", "st", "tr",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ae", "io", "ou"];
const CODAS: &[&str] = &["", "", "n", "r", "x", "l", "sk", "th"];

/// Distinct pronounceable non-words of 4 to 12 letters that are neither
/// dictionary words nor stopwords, so the text pipeline leaves them intact.
pub fn pseudo_words(n: usize, seed: u64) -> Vec<String> {
    let mut rng = seeded_rng(seed);
    let dict = SpellDictionary::bundled();
    let stop = default_stopwords();
    let lexicon = LemmaLexicon::bundled();
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut w = String::new();
        for _ in 0..rng.gen_range(2..=3) {
            w.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
            w.push_str(NUCLEI[rng.gen_range(0..NUCLEI.len())]);
        }
        w.push_str(CODAS[rng.gen_range(0..CODAS.len())]);
        let len = w.chars().count();
        if !(4..=12).contains(&len)
            || dict.contains(&w)
            || stop.contains(&w)
            || lexicon.lookup(&w) != w
            || !seen.insert(w.clone())
        {
            continue;
        }
        out.push(w);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCorpus {
    pub sentences: Vec<TokenSeq>,
    pub pairs: Vec<(String, String)>,
    /// Background words (excludes the planted ones).
    pub background: Vec<String>,
}

const TOPICS: usize = 40;
const TOPIC_WORDS: usize = 8;

/// Sentences about one of 40 topics, each topic owning 8 background words
/// drawn Zipf-wise. Half of the sentences also carry one planted pair, its
/// two words adjacent. Planted words occur nowhere else.
pub fn planted_pair_corpus(n_sentences: usize, n_pairs: usize, seed: u64) -> PlantedCorpus {
    let words = pseudo_words(TOPICS * TOPIC_WORDS + 2 * n_pairs, seed);
    let (planted, background) = words.split_at(2 * n_pairs);
    let pairs: Vec<(String, String)> = planted.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
    let topics: Vec<&[String]> = background.chunks(TOPIC_WORDS).collect();
    let mut rng = seeded_rng(seed ^ 0x5EED);
    let dist = zipf(TOPIC_WORDS, 1.0);
    let sentences = (0..n_sentences)
        .map(|_| {
            let topic = topics[rng.gen_range(0..topics.len())];
            let mut toks: Vec<String> = (0..rng.gen_range(8..=16))
                .map(|_| topic[dist.sample(&mut rng)].clone())
                .collect();
            if n_pairs > 0 && rng.gen_bool(0.5) {
                let (a, b) = &pairs[rng.gen_range(0..n_pairs)];
                let at = rng.gen_range(0..=toks.len());
                toks.insert(at, b.clone());
                toks.insert(at, a.clone());
            }
            TokenSeq::new(toks)
        })
        .collect();
    PlantedCorpus {
        sentences,
        pairs,
        background: background.to_vec(),
    }
}

#[derive(Debug, Clone)]
pub struct TwinDomains {
    /// Domain `alpha`.
    pub source: Dataset,
    /// Domain `beta`.
    pub target: Dataset,
    /// Injector attributed to the source domain.
    pub source_injector: EmbeddingModel,
    /// Injector attributed to the target domain.
    pub target_injector: EmbeddingModel,
}

/// Two labelled domains over the same latent concepts. Concept `c` is
/// written `alpha[c]` in the source and `beta[c]` in the target, so the
/// domains share no words. Both injectors place each twin pair close
/// together (independent noise per injector).
pub fn twin_domains(n_per_class: usize, seed: u64) -> TwinDomains {
    const DESIGN: usize = 15;
    const GENERAL: usize = 15;
    const NEUTRAL: usize = 60;
    const DIM: usize = 32;
    let k = DESIGN + GENERAL + NEUTRAL;
    let words = pseudo_words(2 * k, seed);
    let (alpha, beta) = words.split_at(k);
    let mut rng = seeded_rng(seed ^ 0x7A1);
    let gauss = |rng: &mut ChaCha8Rng| -> f32 {
        // Box-Muller
        let (u, v): (f64, f64) = (rng.gen_range(1e-12..1.0), rng.gen());
        ((-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()) as f32
    };
    let concepts: Vec<Vec<f32>> = (0..k).map(|_| (0..DIM).map(|_| gauss(&mut rng)).collect()).collect();
    let injector = |rng: &mut ChaCha8Rng| {
        let mut names = Vec::with_capacity(2 * k);
        let mut vecs = Vec::with_capacity(2 * k);
        for (c, base) in concepts.iter().enumerate() {
            for w in [&alpha[c], &beta[c]] {
                names.push(w.clone());
                vecs.push(base.iter().map(|x| x + 0.3 * gauss(rng)).collect());
            }
        }
        EmbeddingModel::from_vectors(names, vecs).expect("non-empty injector")
    };
    let source_injector = injector(&mut rng);
    let target_injector = injector(&mut rng);
    let own = |design: bool| if design { 0..DESIGN } else { DESIGN..DESIGN + GENERAL };
    let make = |surface: &[String], name: &str, rng: &mut ChaCha8Rng| {
        let records = (0..2 * n_per_class)
            .map(|i| {
                let design = i % 2 == 0;
                let toks: Vec<&str> = (0..rng.gen_range(10..=20))
                    .map(|_| {
                        let u: f64 = rng.gen();
                        let c = if u < 0.25 {
                            rng.gen_range(own(design))
                        } else if u < 0.33 {
                            rng.gen_range(own(!design))
                        } else {
                            rng.gen_range(DESIGN + GENERAL..k)
                        };
                        surface[c].as_str()
                    })
                    .collect();
                Discussion::new(format!("{name}-{i:05}"), toks.join(" "), name).with_label(Label::from_design(design))
            })
            .collect();
        Dataset::new(name, name, records)
    };
    let source = make(alpha, "alpha", &mut rng);
    let target = make(beta, "beta", &mut rng);
    TwinDomains {
        source,
        target,
        source_injector,
        target_injector,
    }
}
