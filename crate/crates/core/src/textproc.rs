//! Text cleaning pipeline: markup stripping, tokenization, spelling suggestions,
//! stopword removal, length filtering and table-driven lemmatization.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

const ENGLISH_STOPWORDS: &str = include_str!("../resources/stopwords_en.txt");
const DOMAIN_STOPWORDS: &str = include_str!("../resources/stopwords_domain.txt");
const LEMMAS: &str = include_str!("../resources/lemmas.tsv");

/// Output of the pipeline: lowercase tokens in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
}

impl TokenSeq {
    pub fn new(tokens: Vec<String>) -> Self {
        Self { tokens }
    }

    /// Splits already-pipelined text on whitespace.
    pub fn from_text(text: &str) -> Self {
        tokenize(text)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self {
            tokens: iter.into_iter().map(Into::into).collect(),
        }
    }
}

/// Parses a one-word-per-line list; `#` starts a comment.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.to_lowercase())
        .collect()
}

pub fn load_word_list(path: &Path) -> io::Result<BTreeSet<String>> {
    Ok(parse_word_list(&fs::read_to_string(path)?))
}

/// Bundled English list plus discussion-platform filler (`lgtm`, `pinging`, ...).
pub fn default_stopwords() -> BTreeSet<String> {
    let mut set = parse_word_list(ENGLISH_STOPWORDS);
    set.extend(parse_word_list(DOMAIN_STOPWORDS));
    set
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub stopword_set: BTreeSet<String>,
    pub min_len: usize,
    pub max_len: usize,
    pub lemmatize: bool,
    pub spell_correct: bool,
    pub strip_code: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stopword_set: default_stopwords(),
            min_len: 3,
            max_len: 25,
            lemmatize: true,
            spell_correct: false,
            strip_code: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(format!(
                "token length bounds must satisfy 1 <= min_len <= max_len (got {}..{})",
                self.min_len, self.max_len
            ));
        }
        Ok(())
    }

    fn keeps(&self, token: &str) -> bool {
        let n = token.chars().count();
        n >= self.min_len && n <= self.max_len && !self.stopword_set.contains(token)
    }
}

/// Surface form to base form. Lookups of unknown forms return the form itself.
///
/// Chains are resolved at construction so that every lemma is a fixed point.
#[derive(Debug, Clone, Default)]
pub struct LemmaLexicon {
    map: HashMap<String, String>,
}

impl LemmaLexicon {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let raw: HashMap<String, String> = pairs
            .into_iter()
            .map(|(a, b)| (a.into().to_lowercase(), b.into().to_lowercase()))
            .filter(|(a, b)| a != b)
            .collect();
        let mut map = HashMap::with_capacity(raw.len());
        for (surface, lemma) in &raw {
            let mut current = lemma;
            let mut steps = 0;
            while let Some(next) = raw.get(current) {
                if next == surface || steps > 8 {
                    break;
                }
                current = next;
                steps += 1;
            }
            if current != surface {
                map.insert(surface.clone(), current.clone());
            }
        }
        // lemma targets must not be remapped, or lemma(lemma(x)) != lemma(x)
        let targets: HashSet<String> = map.values().cloned().collect();
        map.retain(|surface, _| !targets.contains(surface));
        Self { map }
    }

    /// Parses `surface<TAB>lemma` lines; `#` lines are comments.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next()) {
                (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => {
                    pairs.push((a.trim().to_string(), b.trim().to_string()))
                }
                _ => return Err(format!("lemma lexicon line {}: expected surface<TAB>lemma", i + 1)),
            }
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    /// The bundled English lexicon.
    pub fn bundled() -> &'static LemmaLexicon {
        static LEX: OnceLock<LemmaLexicon> = OnceLock::new();
        LEX.get_or_init(|| LemmaLexicon::parse(LEMMAS).expect("bundled lemma table parses"))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn lookup<'a>(&'a self, token: &'a str) -> &'a str {
        self.map.get(token).map(String::as_str).unwrap_or(token)
    }

    fn words(&self) -> impl Iterator<Item = &str> {
        self.map.iter().flat_map(|(a, b)| [a.as_str(), b.as_str()])
    }
}

pub fn lemmatize(token: &str, lexicon: &LemmaLexicon) -> String {
    lexicon.lookup(token).to_string()
}

/// Accepted spellings, bucketed by length for radius-limited search.
#[derive(Debug, Clone)]
pub struct SpellDictionary {
    words: HashSet<String>,
    by_len: HashMap<usize, Vec<String>>,
}

impl SpellDictionary {
    pub fn new<I, S>(words: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: HashSet<String> = words
            .into_iter()
            .map(|w| w.into().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err("spelling dictionary is empty".into());
        }
        let mut by_len: HashMap<usize, Vec<String>> = HashMap::new();
        for w in &words {
            by_len.entry(w.chars().count()).or_default().push(w.clone());
        }
        for bucket in by_len.values_mut() {
            bucket.sort();
        }
        Ok(Self { words, by_len })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let words = load_word_list(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::new(words)
    }

    /// Words of the bundled lemma table and stopword lists.
    pub fn bundled() -> &'static SpellDictionary {
        static DICT: OnceLock<SpellDictionary> = OnceLock::new();
        DICT.get_or_init(|| {
            let mut words: BTreeSet<String> = LemmaLexicon::bundled().words().map(str::to_string).collect();
            words.extend(default_stopwords());
            SpellDictionary::new(words).expect("bundled dictionary non-empty")
        })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Levenshtein distance, or `None` once it provably exceeds `limit`.
pub fn bounded_levenshtein(a: &[char], b: &[char], limit: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > limit {
        return None;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        let mut row_min = cur[0];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
            row_min = row_min.min(cur[j + 1]);
        }
        if row_min > limit {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[b.len()];
    (d <= limit).then_some(d)
}

pub const SPELL_RADIUS: usize = 2;

/// Ranked spelling candidates for `token`.
///
/// Known words return themselves. Otherwise dictionary words within edit
/// distance 2 are ranked by (distance, longer shared prefix, lexicographic);
/// with no candidate the token itself is returned.
pub fn suggest_spelling(token: &str, dict: &SpellDictionary, max_candidates: usize) -> Vec<String> {
    if dict.contains(token) {
        return vec![token.to_string()];
    }
    let chars: Vec<char> = token.chars().collect();
    let lo = chars.len().saturating_sub(SPELL_RADIUS);
    let mut found: Vec<(usize, usize, &String)> = Vec::new();
    for len in lo..=chars.len() + SPELL_RADIUS {
        let Some(bucket) = dict.by_len.get(&len) else { continue };
        for word in bucket {
            let wc: Vec<char> = word.chars().collect();
            if let Some(d) = bounded_levenshtein(&chars, &wc, SPELL_RADIUS) {
                let prefix = chars.iter().zip(&wc).take_while(|(a, b)| a == b).count();
                found.push((d, prefix, word));
            }
        }
    }
    if found.is_empty() {
        return vec![token.to_string()];
    }
    found.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(b.2)));
    found
        .into_iter()
        .take(max_candidates.max(1))
        .map(|(_, _, w)| w.clone())
        .collect()
}

fn code_block_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?is)<pre\b[^>]*>.*?</pre\s*>|<code\b[^>]*>.*?</code\s*>|```.*?```|`[^`\n]*`")
            .expect("valid regex")
    })
}

fn markup_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)</?[A-Za-z][^<>]*>|&#?[A-Za-z0-9]+;").expect("valid regex"))
}

// Letter numerals such as U+2160 are treated as digits.
fn is_kept(c: char) -> bool {
    c.is_alphabetic() && !c.is_uppercase() && !c.is_numeric()
}

/// Strips markup and reduces text to lowercase letters separated by single spaces.
///
/// With `strip_code`, content of `<code>`/`<pre>` elements and backtick spans
/// is dropped entirely. Digits (of any script) and punctuation become spaces.
pub fn clean_text(raw: &str, strip_code: bool) -> String {
    let normalized: String = raw.nfc().collect();
    let without_code = if strip_code {
        code_block_re().replace_all(&normalized, " ")
    } else {
        std::borrow::Cow::Borrowed(normalized.as_str())
    };
    let without_tags = markup_re().replace_all(&without_code, " ");

    let mut letters = String::with_capacity(without_tags.len());
    for c in without_tags.chars() {
        if c.is_alphabetic() && !c.is_numeric() {
            for l in c.to_lowercase() {
                letters.push(if is_kept(l) { l } else { ' ' });
            }
        } else {
            letters.push(' ');
        }
    }
    // recomposition can merge letters; re-check so the output is a fixed point
    let recomposed: String = letters.nfc().collect();
    let mut out = String::with_capacity(recomposed.len());
    for word in recomposed.split_whitespace() {
        let word: String = word.chars().map(|c| if is_kept(c) { c } else { ' ' }).collect();
        for piece in word.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(piece);
        }
    }
    out
}

pub fn tokenize(clean: &str) -> TokenSeq {
    TokenSeq {
        tokens: clean.split_whitespace().map(str::to_string).collect(),
    }
}

/// Full pipeline: clean, tokenize, spell-correct (if enabled), remove
/// stopwords, filter lengths, lemmatize. Lemmas that fall outside the length
/// bounds or are stopwords are dropped as well.
pub fn preprocess(
    raw: &str,
    config: &PipelineConfig,
    lexicon: &LemmaLexicon,
    dict: Option<&SpellDictionary>,
) -> TokenSeq {
    let cleaned = clean_text(raw, config.strip_code);
    let mut out = Vec::new();
    for token in cleaned.split_whitespace() {
        let token = match (config.spell_correct, dict) {
            (true, Some(d)) => suggest_spelling(token, d, 1).swap_remove(0),
            _ => token.to_string(),
        };
        if !config.keeps(&token) {
            continue;
        }
        let token = if config.lemmatize {
            lemmatize(&token, lexicon)
        } else {
            token
        };
        if config.keeps(&token) {
            out.push(token);
        }
    }
    TokenSeq { tokens: out }
}

/// Reusable bundle of the pipeline's inputs.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: PipelineConfig,
    pub lexicon: LemmaLexicon,
    pub dictionary: Option<SpellDictionary>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        let dictionary = config.spell_correct.then(|| SpellDictionary::bundled().clone());
        Self {
            config,
            lexicon: LemmaLexicon::bundled().clone(),
            dictionary,
        }
    }

    pub fn run(&self, raw: &str) -> TokenSeq {
        preprocess(raw, &self.config, &self.lexicon, self.dictionary.as_ref())
    }
}

impl Default for Pipeline {
    fn default() -> Self {
        Self::new(PipelineConfig::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_with(stop: &[&str]) -> PipelineConfig {
        PipelineConfig {
            stopword_set: stop.iter().map(|s| s.to_string()).collect(),
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn clean_text_examples() {
        assert_eq!(
            clean_text("<p>Use a <code>HashMap</code> here!</p>", true),
            "use a here"
        );
        assert_eq!(
            clean_text("<p>Use a <code>HashMap</code> here!</p>", false),
            "use a hashmap here"
        );
        assert_eq!(clean_text("", true), "");
        assert_eq!(clean_text("Version 2.0 rocks", true), "version rocks");
        assert_eq!(clean_text("a < b and c > d", true), "a b and c d");
        assert_eq!(
            clean_text("call `foo()` then\n```\nlet x = 1;\n```\ndone", true),
            "call then done"
        );
        assert_eq!(clean_text("caf\u{0065}\u{0301} x&amp;y", true), "caf\u{e9} x y");
        assert_eq!(clean_text("v١٢ ok", true), "v ok");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("a b  c").tokens, vec!["a", "b", "c"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("design design").tokens, vec!["design", "design"]);
    }

    /// Full-matrix Levenshtein, independent of the banded search.
    fn levenshtein(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in d[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn spelling_examples() {
        let dict = SpellDictionary::new(["design", "resign"]).unwrap();
        assert_eq!(suggest_spelling("design", &dict, 5), vec!["design"]);
        assert_eq!(levenshtein("desgin", "design"), 2);
        assert_eq!(levenshtein("desgin", "resign"), 3);
        assert_eq!(suggest_spelling("desgin", &dict, 5), vec!["design"]);
        assert_eq!(
            suggest_spelling("zzzzzz", SpellDictionary::bundled(), 5),
            vec!["zzzzzz"]
        );
    }

    #[test]
    fn spelling_matches_exhaustive_oracle() {
        let dict_words = [
            "pattern", "patterns", "platter", "latter", "patron", "matter", "pastern", "pater",
        ];
        let dict = SpellDictionary::new(dict_words).unwrap();
        for query in ["pattren", "pattern", "atter", "paternn", "xyz", "plater"] {
            let got = suggest_spelling(query, &dict, 5);
            if dict_words.contains(&query) {
                assert_eq!(got, vec![query]);
                continue;
            }
            let mut expected: Vec<(usize, usize, &str)> = dict_words
                .iter()
                .map(|w| {
                    let p = query.chars().zip(w.chars()).take_while(|(a, b)| a == b).count();
                    (levenshtein(query, w), p, *w)
                })
                .filter(|(d, _, _)| *d <= 2)
                .collect();
            expected.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(b.2)));
            let expected: Vec<String> = if expected.is_empty() {
                vec![query.to_string()]
            } else {
                expected.iter().take(5).map(|e| e.2.to_string()).collect()
            };
            assert_eq!(got, expected, "query {query}");
        }
    }

    #[test]
    fn lemma_examples() {
        let lex = LemmaLexicon::bundled();
        assert_eq!(lemmatize("running", lex), "run");
        assert_eq!(lemmatize("run", lex), "run");
        assert_eq!(lemmatize("frobnicate", lex), "frobnicate");
        assert_eq!(lemmatize("patterns", lex), "pattern");
    }

    #[test]
    fn lexicon_resolves_chains_to_fixed_points() {
        let lex = LemmaLexicon::from_pairs([("a", "b"), ("b", "c"), ("x", "y")]);
        for w in ["a", "b", "c", "x", "y", "z"] {
            let once = lex.lookup(w);
            assert_eq!(lex.lookup(once), once);
        }
    }

    #[test]
    fn preprocess_examples() {
        let cfg = config_with(&["the"]);
        let lex = LemmaLexicon::bundled();
        assert_eq!(preprocess("The ab running!", &cfg, lex, None).tokens, vec!["run"]);
        let long = "a".repeat(26);
        assert!(preprocess(&long, &cfg, lex, None).is_empty());
        let exact = "b".repeat(25);
        assert_eq!(preprocess(&exact, &cfg, lex, None).tokens, vec![exact.clone()]);
        assert!(preprocess("", &cfg, lex, None).is_empty());
    }

    #[test]
    fn domain_stopwords_are_default() {
        let cfg = PipelineConfig::default();
        assert!(cfg.stopword_set.contains("lgtm"));
        assert!(cfg.stopword_set.contains("pinging"));
        assert!(cfg.stopword_set.contains("the"));
        let toks = Pipeline::default().run("LGTM, pinging @alice about the factory pattern");
        assert_eq!(toks.tokens, vec!["alice", "factory", "pattern"]);
    }

    #[test]
    fn spell_correction_takes_top_candidate() {
        let mut cfg = config_with(&[]);
        cfg.spell_correct = true;
        cfg.lemmatize = false;
        let dict = SpellDictionary::new(["design", "resign", "pattern"]).unwrap();
        let out = preprocess("desgin patern", &cfg, &LemmaLexicon::default(), Some(&dict));
        assert_eq!(out.tokens, vec!["design", "pattern"]);
    }

    #[test]
    fn word_list_comments() {
        let set = parse_word_list("# header\nfoo\n  Bar # trailing\n\n");
        assert_eq!(set.into_iter().collect::<Vec<_>>(), vec!["bar", "foo"]);
    }

    #[test]
    fn invalid_bounds_rejected() {
        let cfg = PipelineConfig {
            min_len: 5,
            max_len: 4,
            ..PipelineConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = PipelineConfig {
            min_len: 0,
            ..PipelineConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
