//! Tokenization, sentence splitting, coarse POS tagging, entity spans and
//! cue-lexicon loading.
//!
//! Offsets are byte offsets into the source `&str`, so `&text[tok.span()]`
//! always yields the token surface.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{name}:{line}: {msg}")]
    Parse {
        name: String,
        line: usize,
        msg: String,
    },
}

/// Coarse part-of-speech tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pos {
    NN,
    NNS,
    NNP,
    NNPS,
    JJ,
    CD,
    VB,
    #[serde(rename = "OTHER")]
    Other,
}

impl Pos {
    pub const ALL: [Pos; 8] = [
        Pos::NN,
        Pos::NNS,
        Pos::NNP,
        Pos::NNPS,
        Pos::JJ,
        Pos::CD,
        Pos::VB,
        Pos::Other,
    ];

    /// Tags that carry discriminating power for title/claim overlap.
    pub fn is_keyword(self) -> bool {
        matches!(
            self,
            Pos::NN | Pos::NNS | Pos::NNP | Pos::NNPS | Pos::JJ | Pos::CD
        )
    }

    /// Verbs, nouns and adjectives: the word classes a query is built from.
    pub fn is_content(self) -> bool {
        matches!(
            self,
            Pos::VB | Pos::NN | Pos::NNS | Pos::NNP | Pos::NNPS | Pos::JJ
        )
    }

    pub fn is_proper(self) -> bool {
        matches!(self, Pos::NNP | Pos::NNPS)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::NN => "NN",
            Pos::NNS => "NNS",
            Pos::NNP => "NNP",
            Pos::NNPS => "NNPS",
            Pos::JJ => "JJ",
            Pos::CD => "CD",
            Pos::VB => "VB",
            Pos::Other => "OTHER",
        }
    }

    pub fn parse(s: &str) -> Option<Pos> {
        Pos::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub pos: Pos,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn span(&self) -> Range<usize> {
        self.start..self.end
    }

    /// True for tokens containing at least one letter or digit.
    pub fn is_word(&self) -> bool {
        self.surface.chars().any(char::is_alphanumeric)
    }

    fn is_capitalized(&self) -> bool {
        self.surface.chars().next().is_some_and(char::is_uppercase)
    }

    fn is_acronym(&self) -> bool {
        self.surface.chars().filter(|c| c.is_alphabetic()).count() >= 2
            && self
                .surface
                .chars()
                .all(|c| c.is_uppercase() || !c.is_alphabetic())
            && self.surface.chars().any(char::is_alphabetic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub start: usize,
    pub end: usize,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn span(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.span()]
    }
}

/// A maximal run of proper-noun tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    /// Indices into the token list the span was extracted from.
    pub tokens: Range<usize>,
    pub text: String,
}

/// Unicode-aware case folding used everywhere a token is compared.
pub fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

/// Splits text into word and punctuation tokens.
///
/// A word is a run of alphanumerics, optionally joined by apostrophes or
/// hyphens (`don't`, `so-called`), or by `.`/`,` between digits (`3.14`).
/// Every other non-whitespace character is a token of its own.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        if c.is_alphanumeric() {
            while j < chars.len() {
                let cj = chars[j].1;
                if cj.is_alphanumeric() {
                    j += 1;
                    continue;
                }
                let next_alnum = chars.get(j + 1).is_some_and(|&(_, n)| n.is_alphanumeric());
                let digit_sep = matches!(cj, '.' | ',')
                    && chars[j - 1].1.is_ascii_digit()
                    && chars.get(j + 1).is_some_and(|&(_, n)| n.is_ascii_digit());
                if (is_joiner(cj) && next_alnum) || digit_sep {
                    j += 2;
                    continue;
                }
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        let surface = &text[start..end];
        tokens.push(Token {
            surface: surface.to_string(),
            normalized: normalize(surface),
            pos: Pos::Other,
            start,
            end,
        });
        i = j;
    }
    tokens
}

fn is_terminator(tok: &Token) -> bool {
    matches!(tok.surface.as_str(), "." | "!" | "?")
}

fn is_closer(tok: &Token) -> bool {
    matches!(
        tok.surface.as_str(),
        "\"" | "'" | ")" | "]" | "}" | "\u{201d}" | "\u{2019}"
    )
}

/// Splits text into sentences on `.`, `!` and `?`.
///
/// A period directly attached to a known abbreviation (`Dr.`) does not end
/// a sentence. Trailing terminators and closing quotes/brackets stay with the
/// sentence they close. Text without a terminator is one sentence.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let resources = Resources::bundled();
    let tokens = tokenize(text);
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i].clone();
        let ends = is_terminator(&tok) && !is_abbreviation_period(&tokens, i, resources);
        current.push(tok);
        i += 1;
        if ends {
            while i < tokens.len() && (is_terminator(&tokens[i]) || is_closer(&tokens[i])) {
                current.push(tokens[i].clone());
                i += 1;
            }
            sentences.push(make_sentence(std::mem::take(&mut current)));
        }
    }
    if !current.is_empty() {
        sentences.push(make_sentence(current));
    }
    sentences
}

fn is_abbreviation_period(tokens: &[Token], i: usize, res: &Resources) -> bool {
    if tokens[i].surface != "." || i == 0 {
        return false;
    }
    let prev = &tokens[i - 1];
    prev.end == tokens[i].start && res.abbreviations.contains(&prev.normalized)
}

fn make_sentence(tokens: Vec<Token>) -> Sentence {
    Sentence {
        start: tokens.first().map_or(0, |t| t.start),
        end: tokens.last().map_or(0, |t| t.end),
        tokens,
    }
}

/// Tags tokens in place and returns them.
///
/// Rule order: numbers are CD; punctuation is OTHER; acronyms and
/// capitalized words not at sentence start are NNP (NNPS when the tag
/// lexicon says so); sentence-initial capitalized words are NNP only when
/// they are in the gazetteer or appear capitalized elsewhere in the input.
/// Everything else goes through the tag lexicon, then suffix rules, then NN.
pub fn pos_tag(mut tokens: Vec<Token>) -> Vec<Token> {
    let res = Resources::bundled();
    let capitalized_elsewhere: HashSet<String> = {
        let mut set = HashSet::new();
        let mut initial = true;
        for tok in &tokens {
            if tok.is_word() {
                if !initial && tok.is_capitalized() {
                    set.insert(tok.normalized.clone());
                }
                initial = false;
            }
            if is_terminator(tok) {
                initial = true;
            }
        }
        set
    };

    let mut initial = true;
    for tok in tokens.iter_mut() {
        let tag = tag_one(tok, initial, &capitalized_elsewhere, res);
        tok.pos = tag;
        if tok.is_word() {
            initial = false;
        }
        if is_terminator(tok) {
            initial = true;
        }
    }
    tokens
}

fn tag_one(tok: &Token, initial: bool, cap_elsewhere: &HashSet<String>, res: &Resources) -> Pos {
    if !tok.is_word() {
        return Pos::Other;
    }
    if is_number(&tok.surface) {
        return Pos::CD;
    }
    let lex = res.tags.get(&tok.normalized).copied();
    let proper = || {
        if lex == Some(Pos::NNPS) {
            Pos::NNPS
        } else {
            Pos::NNP
        }
    };
    if tok.is_acronym() && lex != Some(Pos::Other) {
        return proper();
    }
    if tok.is_capitalized() {
        if !initial {
            return proper();
        }
        if res.gazetteer.contains_key(&tok.normalized) || cap_elsewhere.contains(&tok.normalized) {
            return proper();
        }
    }
    if let Some(tag) = lex {
        return if tag == Pos::NNPS { Pos::NNS } else { tag };
    }
    suffix_rule(&tok.normalized, res)
}

fn is_number(s: &str) -> bool {
    s.chars().any(|c| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',')
}

fn suffix_rule(word: &str, res: &Resources) -> Pos {
    if let Some(stem) = word.strip_suffix('s') {
        if res.tags.get(stem) == Some(&Pos::NN) {
            return Pos::NNS;
        }
        if let Some(stem) = word.strip_suffix("es") {
            if res.tags.get(stem) == Some(&Pos::NN) {
                return Pos::NNS;
            }
        }
    }
    const ADJ: [&str; 8] = ["ous", "ful", "ive", "able", "ible", "ical", "less", "ish"];
    if ADJ.iter().any(|s| word.ends_with(s)) {
        return Pos::JJ;
    }
    if word.len() > 4 && (word.ends_with("ing") || word.ends_with("ed")) {
        return Pos::VB;
    }
    if word.len() > 3 && word.ends_with("ly") {
        return Pos::Other;
    }
    Pos::NN
}

/// Maximal left-to-right runs of NNP/NNPS tokens.
pub fn extract_named_entities(tokens: &[Token]) -> Vec<EntitySpan> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].pos.is_proper() {
            let start = i;
            while i < tokens.len() && tokens[i].pos.is_proper() {
                i += 1;
            }
            let text = tokens[start..i]
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            spans.push(EntitySpan {
                tokens: start..i,
                text,
            });
        } else {
            i += 1;
        }
    }
    spans
}

/// Tokenize and tag in one step.
pub fn analyze(text: &str) -> Vec<Token> {
    pos_tag(tokenize(text))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub name: String,
    pub cues: BTreeSet<String>,
    pub polarity: BTreeMap<String, Polarity>,
}

impl Lexicon {
    pub fn new(name: impl Into<String>) -> Self {
        Lexicon {
            name: name.into(),
            cues: BTreeSet::new(),
            polarity: BTreeMap::new(),
        }
    }

    pub fn from_cues<I, S>(name: impl Into<String>, cues: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lex = Lexicon::new(name);
        for cue in cues {
            let cue = normalize(cue.as_ref());
            if !cue.is_empty() {
                lex.cues.insert(cue);
            }
        }
        lex
    }

    /// Parses the one-cue-per-line format. `#` lines and blank lines are
    /// skipped; an optional second column must be `+` or `-`.
    pub fn parse(name: &str, content: &str) -> Result<Self, TextError> {
        let mut lex = Lexicon::new(name);
        for (n, cue, tag) in columns(content) {
            let cue = normalize(cue);
            match tag {
                None => {}
                Some("+") => {
                    lex.polarity.insert(cue.clone(), Polarity::Positive);
                }
                Some("-") => {
                    lex.polarity.insert(cue.clone(), Polarity::Negative);
                }
                Some(other) => {
                    return Err(TextError::Parse {
                        name: name.to_string(),
                        line: n,
                        msg: format!("unknown polarity tag {other:?}"),
                    })
                }
            }
            lex.cues.insert(cue);
        }
        Ok(lex)
    }

    pub fn len(&self) -> usize {
        self.cues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cues.is_empty()
    }

    pub fn contains(&self, normalized: &str) -> bool {
        self.cues.contains(normalized)
    }

    pub fn is_polar(&self) -> bool {
        !self.polarity.is_empty()
    }

    /// The sub-lexicon of cues carrying the given polarity.
    pub fn with_polarity(&self, polarity: Polarity) -> Lexicon {
        let suffix = match polarity {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        };
        let mut sub = Lexicon::new(format!("{}_{}", self.name, suffix));
        for (cue, p) in &self.polarity {
            if *p == polarity {
                sub.cues.insert(cue.clone());
                sub.polarity.insert(cue.clone(), *p);
            }
        }
        sub
    }
}

fn read_file(path: &Path) -> Result<String, TextError> {
    std::fs::read_to_string(path).map_err(|source| TextError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_lexicon(path: impl AsRef<Path>, name: &str) -> Result<Lexicon, TextError> {
    Lexicon::parse(name, &read_file(path.as_ref())?)
}

/// Loads every `*.txt` file in a directory as a lexicon named after the
/// file stem, sorted by name.
pub fn load_lexicon_dir(dir: impl AsRef<Path>) -> Result<Vec<Lexicon>, TextError> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|source| TextError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().unwrap_or_default().to_string_lossy();
            load_lexicon(p, &name)
        })
        .collect()
}

/// (1-based line number, first column, optional second column)
fn columns(content: &str) -> impl Iterator<Item = (usize, &str, Option<&str>)> {
    content.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let mut parts = line.split_whitespace();
        let first = parts.next()?;
        Some((i + 1, first, parts.next()))
    })
}

/// Word lists the tokenizer, tagger and query generator rely on.
#[derive(Debug, Clone)]
pub struct Resources {
    pub tags: HashMap<String, Pos>,
    pub gazetteer: HashMap<String, String>,
    pub abbreviations: HashSet<String>,
    pub stopwords: HashSet<String>,
}

impl Resources {
    pub fn bundled() -> &'static Resources {
        static BUNDLED: OnceLock<Resources> = OnceLock::new();
        BUNDLED.get_or_init(|| {
            Resources::parse(
                include_str!("../data/tag_lexicon.txt"),
                include_str!("../data/gazetteer.txt"),
                include_str!("../data/abbreviations.txt"),
                include_str!("../data/stopwords.txt"),
            )
            .expect("bundled word lists are well-formed")
        })
    }

    pub fn parse(
        tags: &str,
        gazetteer: &str,
        abbreviations: &str,
        stopwords: &str,
    ) -> Result<Resources, TextError> {
        let mut tag_map = HashMap::new();
        for (line, word, tag) in columns(tags) {
            let pos = tag.and_then(Pos::parse).ok_or_else(|| TextError::Parse {
                name: "tag_lexicon".into(),
                line,
                msg: format!("missing or unknown tag {tag:?}"),
            })?;
            tag_map.insert(normalize(word), pos);
        }
        let gaz = columns(gazetteer)
            .map(|(_, w, t)| (normalize(w), t.unwrap_or("MISC").to_string()))
            .collect();
        let set = |s: &str| -> HashSet<String> { columns(s).map(|(_, w, _)| normalize(w)).collect() };
        Ok(Resources {
            tags: tag_map,
            gazetteer: gaz,
            abbreviations: set(abbreviations),
            stopwords: set(stopwords),
        })
    }

    pub fn is_stopword(&self, normalized: &str) -> bool {
        self.stopwords.contains(normalized)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    #[test]
    fn tokenize_basic() {
        assert!(tokenize("").is_empty());
        let toks = tokenize("cat");
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].span(), 0..3);
        let toks = tokenize("ISIS infilitrates the United States.");
        assert_eq!(
            surfaces(&toks),
            ["ISIS", "infilitrates", "the", "United", "States", "."]
        );
    }

    #[test]
    fn tokenize_joiners_and_numbers() {
        let toks = tokenize("It's a so-called 3.14 figure, (roughly) 1,000.");
        assert_eq!(
            surfaces(&toks),
            ["It's", "a", "so-called", "3.14", "figure", ",", "(", "roughly", ")", "1,000", "."]
        );
        assert_eq!(surfaces(&tokenize("end--start")), ["end", "-", "-", "start"]);
    }

    #[test]
    fn normalization_is_unicode_aware() {
        let toks = tokenize("ÉCOLE Straße");
        assert_eq!(toks[0].normalized, "école");
        assert_eq!(toks[1].normalized, "straße");
    }

    #[test]
    fn sentences() {
        assert_eq!(split_sentences("A. B!").len(), 2);
        assert_eq!(split_sentences("no terminator").len(), 1);
        let s = split_sentences("Dr. Smith left. He returned.");
        assert_eq!(s.len(), 2);
        let text = "Dr. Smith left. He returned.";
        assert_eq!(s[0].text(text), "Dr. Smith left.");
        assert_eq!(s[1].text(text), "He returned.");
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn sentence_keeps_closing_quote() {
        let text = "He said \"stop!\" Then left.";
        let s = split_sentences(text);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].text(text), "He said \"stop!\"");
    }

    #[test]
    fn tagging_rules() {
        let toks = analyze("7");
        assert_eq!(toks[0].pos, Pos::CD);
        let toks = analyze("ISIS infilitrates the United States.");
        let tags: Vec<Pos> = toks.iter().map(|t| t.pos).collect();
        assert_eq!(tags[0], Pos::NNP);
        assert_eq!(tags[2], Pos::Other);
        assert_eq!(tags[3], Pos::NNP);
        assert_eq!(tags[4], Pos::NNP);
        assert_eq!(tags[5], Pos::Other);
        assert_eq!(analyze("they were running")[2].pos, Pos::VB);
        assert_eq!(analyze("two towers")[1].pos, Pos::NNS);
        assert_eq!(analyze("a famous river")[1].pos, Pos::JJ);
    }

    #[test]
    fn sentence_initial_capital_needs_evidence() {
        let toks = analyze("Tower of stone.");
        assert_eq!(toks[0].pos, Pos::NN);
        let toks = analyze("Paris is big.");
        assert_eq!(toks[0].pos, Pos::NNP);
        let toks = analyze("Zorba came. We met Zorba.");
        assert_eq!(toks[0].pos, Pos::NNP);
        let toks = analyze("The Americans left.");
        assert_eq!(toks[1].pos, Pos::NNPS);
    }

    #[test]
    fn entities() {
        assert!(extract_named_entities(&analyze("all lowercase claim here")).is_empty());
        let ents = extract_named_entities(&analyze("ISIS infilitrates the United States."));
        assert_eq!(ents.len(), 2);
        assert_eq!(ents[0].text, "ISIS");
        assert_eq!(ents[0].tokens, 0..1);
        assert_eq!(ents[1].text, "United States");
        assert_eq!(ents[1].tokens.len(), 2);
    }

    #[test]
    fn lexicon_parsing() {
        let lex = Lexicon::parse("s", "good +\nbad -").unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.polarity["good"], Polarity::Positive);
        assert_eq!(lex.polarity["bad"], Polarity::Negative);
        assert_eq!(Lexicon::parse("s", "Good +\ngood +").unwrap().len(), 1);
        assert!(Lexicon::parse("s", "").unwrap().is_empty());
        let err = Lexicon::parse("s", "# c\nok\nfoo ?").unwrap_err();
        assert!(err.to_string().contains("s:3"), "{err}");
    }

    #[test]
    fn load_lexicon_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.txt");
        std::fs::write(&path, "# header\nAlpha\nbeta -\n").unwrap();
        let lex = load_lexicon(&path, "lex").unwrap();
        assert_eq!(lex.cues.iter().collect::<Vec<_>>(), ["alpha", "beta"]);
        assert!(matches!(
            load_lexicon(dir.path().join("missing.txt"), "x"),
            Err(TextError::Io { .. })
        ));
        let all = load_lexicon_dir(dir.path()).unwrap();
        assert_eq!(all.len(), 1);
    }

    #[test]
    fn bundled_lexicons_parse() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicons");
        let lexicons = load_lexicon_dir(dir).unwrap();
        assert_eq!(lexicons.len(), 3);
        assert!(lexicons.iter().any(Lexicon::is_polar));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn spans_reconstruct_input(text in "\\PC{0,80}") {
            let toks = tokenize(&text);
            let mut last = 0;
            for t in &toks {
                prop_assert!(t.start < t.end);
                prop_assert!(t.start >= last);
                prop_assert_eq!(&text[t.span()], t.surface.as_str());
                prop_assert!(text[last..t.start].chars().all(char::is_whitespace));
                last = t.end;
            }
            prop_assert!(text[last..].chars().all(char::is_whitespace));
            prop_assert_eq!(tokenize(&text), toks);
        }

        #[test]
        fn sentences_cover_tokens(text in "[A-Za-z .!?,]{0,120}") {
            let sents = split_sentences(&text);
            let all: Vec<Token> = sents.iter().flat_map(|s| s.tokens.clone()).collect();
            prop_assert_eq!(all, tokenize(&text));
            for s in &sents {
                for t in &s.tokens {
                    prop_assert!(t.start >= s.start && t.end <= s.end);
                }
            }
            if !text.trim().is_empty() {
                prop_assert!(!sents.is_empty());
            }
        }

        #[test]
        fn entities_never_overlap(text in "[A-Za-z .]{0,120}") {
            let toks = analyze(&text);
            let ents = extract_named_entities(&toks);
            for pair in ents.windows(2) {
                prop_assert!(pair[0].tokens.end < pair[1].tokens.start);
            }
            for e in &ents {
                prop_assert!(!e.tokens.is_empty());
                prop_assert!(toks[e.tokens.clone()].iter().all(|t| t.pos.is_proper()));
            }
        }
    }
}
