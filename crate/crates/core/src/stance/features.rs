use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::StanceError;
use crate::retrieval::index_terms;
use crate::sources::fnv1a;
use crate::text::Resources;

/// Number of dense features appended after the two hashed blocks.
pub const EXTRA_FEATURES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Hash buckets per bag-of-words block.
    pub buckets: usize,
    pub hash_seed: u64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            buckets: 4096,
            hash_seed: 0x5eed,
        }
    }
}

impl FeatureConfig {
    pub fn dim(&self) -> usize {
        2 * self.buckets + EXTRA_FEATURES
    }

    /// Identifies the feature layout; stored in model files.
    pub fn hash(&self) -> u64 {
        let desc = format!(
            "bow-claim|bow-doc|cosine|overlap|len-claim|len-doc;v1;buckets={};seed={}",
            self.buckets, self.hash_seed
        );
        fnv1a(desc.as_bytes(), 0)
    }
}

/// Sparse feature vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub dim: usize,
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn from_map(dim: usize, map: BTreeMap<u32, f64>) -> Self {
        let (indices, values) = map.into_iter().filter(|(_, v)| *v != 0.0).unzip();
        FeatureVector { dim, indices, values }
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let map = dense
            .iter()
            .enumerate()
            .map(|(i, v)| (i as u32, *v))
            .collect();
        FeatureVector::from_map(dense.len(), map)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().map(|&i| i as usize).zip(self.values.iter().copied())
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.iter().map(|(i, v)| weights[i] * v).sum()
    }

    pub fn get(&self, i: usize) -> f64 {
        match self.indices.binary_search(&(i as u32)) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn scaled(&self, factor: f64) -> FeatureVector {
        FeatureVector {
            dim: self.dim,
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Featurizer {
    pub config: FeatureConfig,
}

impl Featurizer {
    pub fn new(config: FeatureConfig) -> Self {
        Featurizer { config }
    }

    pub fn cosine_index(&self) -> usize {
        2 * self.config.buckets
    }

    /// Hashed unigram blocks for claim and document (each L2-normalized),
    /// log-tf cosine and keyword overlap over non-stopwords, and log lengths.
    pub fn featurize(&self, claim: &str, document: &str) -> Result<FeatureVector, StanceError> {
        let claim_terms = index_terms(claim);
        let doc_terms = index_terms(document);
        if claim_terms.is_empty() || doc_terms.is_empty() {
            return Err(StanceError::EmptyText);
        }
        let b = self.config.buckets;
        let mut map = BTreeMap::new();
        self.hashed_block(&claim_terms, 0, &mut map);
        self.hashed_block(&doc_terms, b, &mut map);

        let res = Resources::bundled();
        let content = |terms: &[String]| -> BTreeMap<String, usize> {
            let mut bag = BTreeMap::new();
            for t in terms.iter().filter(|t| !res.is_stopword(t)) {
                *bag.entry(t.clone()).or_insert(0) += 1;
            }
            bag
        };
        let cb = content(&claim_terms);
        let db = content(&doc_terms);
        let base = 2 * b;
        map.insert(base as u32, log_tf_cosine(&cb, &db));
        let claim_types: HashSet<&String> = cb.keys().collect();
        let overlap = if claim_types.is_empty() {
            0.0
        } else {
            claim_types.iter().filter(|t| db.contains_key(**t)).count() as f64 / claim_types.len() as f64
        };
        map.insert(base as u32 + 1, overlap);
        map.insert(base as u32 + 2, (1.0 + claim_terms.len() as f64).ln() / 10.0);
        map.insert(base as u32 + 3, (1.0 + doc_terms.len() as f64).ln() / 10.0);
        Ok(FeatureVector::from_map(self.config.dim(), map))
    }

    fn hashed_block(&self, terms: &[String], offset: usize, map: &mut BTreeMap<u32, f64>) {
        let mut block: BTreeMap<u32, f64> = BTreeMap::new();
        for t in terms {
            let bucket = (fnv1a(t.as_bytes(), self.config.hash_seed) % self.config.buckets as u64) as u32;
            *block.entry(offset as u32 + bucket).or_insert(0.0) += 1.0;
        }
        let norm = block.values().map(|v| v * v).sum::<f64>().sqrt();
        for (k, v) in block {
            map.insert(k, v / norm);
        }
    }
}

fn log_tf_cosine(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    if a == b {
        return 1.0;
    }
    let w = |c: usize| 1.0 + (c as f64).ln();
    let dot: f64 = a
        .iter()
        .filter_map(|(t, &ca)| b.get(t).map(|&cb| w(ca) * w(cb)))
        .sum();
    let na: f64 = a.values().map(|&c| w(c) * w(c)).sum();
    let nb: f64 = b.values().map(|&c| w(c) * w(c)).sum();
    (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0)
}
