//! Keyword-overlap re-ranking of first-stage hits.
//!
//! `f_rank = (match / claim) * (match / title) * score_init`, where the
//! counts are over keyword-tagged tokens (NN, NNS, NNP, NNPS, JJ, CD).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::retrieval::ScoredDocument;
use crate::text::{analyze, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    /// Token occurrences; `match` is the multiset intersection.
    #[default]
    Multiset,
    /// Distinct normalized tokens.
    Types,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordCounts {
    pub claim: usize,
    pub title: usize,
    pub matched: usize,
}

fn keyword_bag(tokens: &[Token], mode: CountMode) -> HashMap<&str, usize> {
    let mut bag = HashMap::new();
    for t in tokens.iter().filter(|t| t.pos.is_keyword()) {
        let c = bag.entry(t.normalized.as_str()).or_insert(0);
        match mode {
            CountMode::Multiset => *c += 1,
            CountMode::Types => *c = 1,
        }
    }
    bag
}

pub fn keyword_counts(claim: &[Token], title: &[Token], mode: CountMode) -> KeywordCounts {
    let claim_bag = keyword_bag(claim, mode);
    let title_bag = keyword_bag(title, mode);
    let matched = claim_bag
        .iter()
        .map(|(k, &c)| c.min(title_bag.get(k).copied().unwrap_or(0)))
        .sum();
    KeywordCounts {
        claim: claim_bag.values().sum(),
        title: title_bag.values().sum(),
        matched,
    }
}

/// Zero when either side has no keywords.
pub fn rerank_score(counts: KeywordCounts, score_init: f64) -> f64 {
    if counts.claim == 0 || counts.title == 0 {
        return 0.0;
    }
    let m = counts.matched as f64;
    (m / counts.claim as f64) * (m / counts.title as f64) * score_init
}

/// Fills `f_rank` for every hit and re-sorts by it, descending. Equal
/// `f_rank` keeps the incoming order. Hits without a title get `f_rank = 0`.
pub fn rerank(
    claim: &[Token],
    hits: Vec<ScoredDocument>,
    titles: &HashMap<String, String>,
    mode: CountMode,
) -> Vec<ScoredDocument> {
    let mut scored: Vec<ScoredDocument> = hits
        .into_iter()
        .map(|mut hit| {
            let title = match titles.get(&hit.doc_id) {
                Some(t) => t.as_str(),
                None => {
                    log::warn!("no title for {}; re-rank score set to 0", hit.doc_id);
                    ""
                }
            };
            let counts = keyword_counts(claim, &analyze(title), mode);
            hit.f_rank = Some(rerank_score(counts, hit.score_init));
            hit
        })
        .collect();
    scored.sort_by(|a, b| {
        let fa = a.f_rank.unwrap_or(0.0);
        let fb = b.f_rank.unwrap_or(0.0);
        fb.total_cmp(&fa)
    });
    scored
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn counts() -> impl Strategy<Value = KeywordCounts> {
        (0usize..20, 0usize..20).prop_flat_map(|(c, t)| {
            (0..=c.min(t)).prop_map(move |m| KeywordCounts {
                claim: c,
                title: t,
                matched: m,
            })
        })
    }

    proptest! {
        #[test]
        fn linear_in_score_init(c in counts(), s in 0.0f64..100.0, a in 0.0f64..10.0) {
            let lhs = rerank_score(c, a * s);
            let rhs = a * rerank_score(c, s);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn zero_iff_no_match_or_guard(c in counts(), s in 0.001f64..100.0) {
            let f = rerank_score(c, s);
            prop_assert_eq!(f == 0.0, c.matched == 0 || c.claim == 0 || c.title == 0);
        }

        #[test]
        fn positive_scaling_preserves_order(
            scores in proptest::collection::vec(0.01f64..50.0, 1..12),
            scale in 0.01f64..100.0,
        ) {
            let claim = analyze("alpha beta gamma delta");
            let vocab = ["alpha", "beta", "zeta", "gamma delta", "eta theta"];
            let titles: HashMap<String, String> = (0..scores.len())
                .map(|i| (format!("d{i}"), vocab[i % vocab.len()].to_string()))
                .collect();
            let hits: Vec<ScoredDocument> = scores.iter().enumerate().map(|(i, &s)| ScoredDocument {
                doc_id: format!("d{i}"), score_init: s, rank: i + 1, f_rank: None,
            }).collect();
            let scaled: Vec<ScoredDocument> = hits.iter().cloned()
                .map(|mut h| { h.score_init *= scale; h }).collect();
            let a: Vec<String> = rerank(&claim, hits, &titles, CountMode::Multiset).into_iter().map(|h| h.doc_id).collect();
            let b: Vec<String> = rerank(&claim, scaled, &titles, CountMode::Multiset).into_iter().map(|h| h.doc_id).collect();
            prop_assert_eq!(a.len(), scores.len());
            prop_assert_eq!(a, b);
        }
    }
}
