//! Lexicon cue density scores and per-lexicon word clouds.
//!
//! A document's score for lexicon `L` is the number of word tokens that are
//! cues of `L` divided by the number of word tokens. Punctuation is not a
//! word.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::text::{Lexicon, Polarity, Token};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticProfile {
    pub scores: BTreeMap<String, f64>,
    pub doc_token_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCloudData {
    pub lexicon: String,
    pub entries: Vec<(String, usize)>,
}

/// (cue occurrences, word tokens).
pub fn lexicon_counts(lexicon: &Lexicon, doc: &[Token]) -> (usize, usize) {
    let mut cues = 0;
    let mut words = 0;
    for t in doc.iter().filter(|t| t.is_word()) {
        words += 1;
        if lexicon.contains(&t.normalized) {
            cues += 1;
        }
    }
    (cues, words)
}

pub fn lexicon_score(lexicon: &Lexicon, doc: &[Token]) -> f64 {
    let (cues, words) = lexicon_counts(lexicon, doc);
    if words == 0 {
        0.0
    } else {
        cues as f64 / words as f64
    }
}

/// The lexicons a profile reports on: polar lexicons are replaced by their
/// positive and negative halves.
pub fn expand_lexicons(lexicons: &[Lexicon]) -> Vec<Lexicon> {
    let mut out = Vec::new();
    for lex in lexicons {
        if lex.is_polar() {
            out.push(lex.with_polarity(Polarity::Positive));
            out.push(lex.with_polarity(Polarity::Negative));
        } else {
            out.push(lex.clone());
        }
    }
    out
}

pub fn profile(doc: &[Token], lexicons: &[Lexicon]) -> LinguisticProfile {
    let scores = expand_lexicons(lexicons)
        .iter()
        .map(|l| (l.name.clone(), lexicon_score(l, doc)))
        .collect();
    LinguisticProfile {
        scores,
        doc_token_count: doc.iter().filter(|t| t.is_word()).count(),
    }
}

/// The `top_n` most frequent cues, by frequency then cue.
pub fn word_cloud(doc: &[Token], lexicon: &Lexicon, top_n: usize) -> WordCloudData {
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for t in doc.iter().filter(|t| t.is_word() && lexicon.contains(&t.normalized)) {
        *freq.entry(t.normalized.as_str()).or_default() += 1;
    }
    let mut entries: Vec<(String, usize)> = freq.into_iter().map(|(c, n)| (c.to_string(), n)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(top_n);
    WordCloudData {
        lexicon: lexicon.name.clone(),
        entries,
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::text::tokenize;
    use proptest::prelude::*;

    const VOCAB: [&str; 8] = ["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"];

    fn doc_and_lexicon() -> impl Strategy<Value = (Vec<&'static str>, Vec<&'static str>)> {
        (
            proptest::collection::vec(proptest::sample::select(&VOCAB[..]), 0..40),
            proptest::sample::subsequence(&VOCAB[..], 0..VOCAB.len()),
        )
    }

    proptest! {
        #[test]
        fn cloud_mass_matches_score((words, cues) in doc_and_lexicon()) {
            let doc = tokenize(&words.join(" "));
            let lex = Lexicon::from_cues("l", cues);
            let cloud = word_cloud(&doc, &lex, usize::MAX);
            let mass: usize = cloud.entries.iter().map(|e| e.1).sum();
            let (cue_count, word_count) = lexicon_counts(&lex, &doc);
            prop_assert_eq!(mass, cue_count);
            prop_assert!(cloud.entries.iter().all(|e| e.1 >= 1));
            let score = lexicon_score(&lex, &doc);
            prop_assert!((score * word_count as f64 - mass as f64).abs() < 1e-9);
        }

        #[test]
        fn non_cue_token_lowers_score((words, cues) in doc_and_lexicon()) {
            let lex = Lexicon::from_cues("l", cues);
            let doc = tokenize(&words.join(" "));
            let before = lexicon_score(&lex, &doc);
            let longer = tokenize(&format!("{} filler", words.join(" ")));
            let after = lexicon_score(&lex, &longer);
            if before > 0.0 {
                prop_assert!(after < before);
            } else {
                prop_assert_eq!(after, 0.0);
            }
        }
    }
}
