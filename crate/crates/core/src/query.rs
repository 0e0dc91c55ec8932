//! Claim-to-query conversion and drop-from-the-end relaxation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{EntitySpan, Resources, Token};

pub const MAX_QUERY_TERMS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("claim has no query-eligible terms")]
    EmptyQuery,
    #[error("query is already empty")]
    CannotRelax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermOrigin {
    ContentWord,
    NamedEntity,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub terms: Vec<String>,
    pub origins: Vec<TermOrigin>,
}

impl Query {
    pub fn new() -> Self {
        Query {
            terms: Vec::new(),
            origins: Vec::new(),
        }
    }

    /// Builds a query from raw terms, dropping duplicates.
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut q = Query::new();
        for t in terms {
            q.push(t.into(), TermOrigin::ContentWord);
        }
        q
    }

    fn push(&mut self, term: String, origin: TermOrigin) -> bool {
        if self.terms.contains(&term) {
            return false;
        }
        self.terms.push(term);
        self.origins.push(origin);
        true
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Default for Query {
    fn default() -> Self {
        Query::new()
    }
}

/// Content words (verbs, nouns, adjectives outside entity spans) in claim
/// order, followed by entity tokens, capped at ten terms.
///
/// Stopwords are dropped from the content part. Entity tokens are kept even
/// when they collide with a stopword (`US`).
pub fn generate_query(tokens: &[Token], entities: &[EntitySpan]) -> Result<Query, QueryError> {
    let res = Resources::bundled();
    let in_entity: HashSet<usize> = entities.iter().flat_map(|e| e.tokens.clone()).collect();
    let mut query = Query::new();
    for (i, tok) in tokens.iter().enumerate() {
        if in_entity.contains(&i) || !tok.pos.is_content() || res.is_stopword(&tok.normalized) {
            continue;
        }
        query.push(tok.normalized.clone(), TermOrigin::ContentWord);
    }
    for entity in entities {
        for tok in &tokens[entity.tokens.clone()] {
            if tok.is_word() {
                query.push(tok.normalized.clone(), TermOrigin::NamedEntity);
            }
        }
    }
    query.terms.truncate(MAX_QUERY_TERMS);
    query.origins.truncate(MAX_QUERY_TERMS);
    if query.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    Ok(query)
}

/// The ten longest non-stopword word tokens, in claim order. Used when
/// [`generate_query`] finds nothing eligible.
pub fn fallback_query(tokens: &[Token]) -> Query {
    let res = Resources::bundled();
    let mut seen = HashSet::new();
    let mut candidates: Vec<(usize, &Token)> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_word() && !res.is_stopword(&t.normalized))
        .filter(|(_, t)| seen.insert(t.normalized.clone()))
        .collect();
    candidates.sort_by(|a, b| {
        b.1.normalized
            .chars()
            .count()
            .cmp(&a.1.normalized.chars().count())
            .then(a.0.cmp(&b.0))
    });
    candidates.truncate(MAX_QUERY_TERMS);
    candidates.sort_by_key(|(i, _)| *i);
    let mut q = Query::new();
    for (_, t) in candidates {
        q.push(t.normalized.clone(), TermOrigin::Fallback);
    }
    q
}

/// Drops the final term.
pub fn relax_query(query: &Query) -> Result<Query, QueryError> {
    if query.is_empty() {
        return Err(QueryError::CannotRelax);
    }
    let mut relaxed = query.clone();
    relaxed.terms.pop();
    relaxed.origins.pop();
    Ok(relaxed)
}

/// Query generation for a claim string, with the longest-token fallback.
pub fn query_for_claim(tokens: &[Token], entities: &[EntitySpan]) -> Query {
    generate_query(tokens, entities).unwrap_or_else(|_| fallback_query(tokens))
}
