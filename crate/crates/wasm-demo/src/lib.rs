//! Browser bindings over the bundled demo corpus.
//!
//! Every export takes and returns JSON strings. The plain functions are the
//! same operations without the `JsValue` wrapping, so they run on the host.

use factcheck_core::bundled;
use factcheck_core::pipeline::{LabelMode, PipelineConfig};
use factcheck_core::rerank::{keyword_counts, rerank_score, CountMode, KeywordCounts};
use factcheck_core::linguistics::{profile, word_cloud, LinguisticProfile, WordCloudData};
use factcheck_core::retrieval::RetrievalModel;
use factcheck_core::text::analyze;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckOptions {
    pub k: Option<usize>,
    pub model: Option<String>,
    pub rerank: Option<bool>,
    pub label_mode: Option<String>,
    pub nei_threshold: Option<f64>,
}

impl CheckOptions {
    pub fn config(&self) -> Result<PipelineConfig, String> {
        let mut cfg = PipelineConfig::default();
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(m) = &self.model {
            cfg.model = m.parse::<RetrievalModel>().map_err(|e| e.to_string())?;
        }
        if let Some(r) = self.rerank {
            cfg.rerank = r;
        }
        if let Some(l) = &self.label_mode {
            cfg.label_mode = l.parse::<LabelMode>()?;
        }
        if let Some(t) = self.nei_threshold {
            cfg.nei_threshold = t;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn parse_options<T: Default + for<'de> Deserialize<'de>>(json: &str) -> Result<T, String> {
    if json.trim().is_empty() {
        return Ok(T::default());
    }
    serde_json::from_str(json).map_err(|e| format!("bad options: {e}"))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Full fact-check result; `options` may be empty.
pub fn check(claim: &str, options: &str) -> Result<String, String> {
    let cfg = parse_options::<CheckOptions>(options)?.config()?;
    let pipeline = bundled::pipeline(cfg).map_err(|e| e.to_string())?;
    let result = pipeline.check_claim(claim).map_err(|e| e.to_string())?;
    to_json(&result)
}

#[derive(Debug, Serialize)]
pub struct KeywordView {
    pub text: String,
    pub pos: &'static str,
    pub keyword: bool,
}

#[derive(Debug, Serialize)]
pub struct RerankView {
    pub claim_keywords: Vec<KeywordView>,
    pub title_keywords: Vec<KeywordView>,
    pub counts: KeywordCounts,
    pub score_init: f64,
    pub f_rank: f64,
}

fn keyword_view(text: &str) -> Vec<KeywordView> {
    analyze(text)
        .into_iter()
        .filter(|t| t.is_word())
        .map(|t| KeywordView {
            keyword: t.pos.is_keyword(),
            pos: t.pos.as_str(),
            text: t.surface,
        })
        .collect()
}

/// How the keyword-overlap re-ranker scores one title against a claim.
pub fn explain_rerank(claim: &str, title: &str, score_init: f64, mode: &str) -> Result<RerankView, String> {
    let mode = match mode {
        "" | "multiset" => CountMode::Multiset,
        "types" => CountMode::Types,
        other => return Err(format!("unknown count mode {other:?}")),
    };
    if !score_init.is_finite() {
        return Err("score must be finite".into());
    }
    let counts = keyword_counts(&analyze(claim), &analyze(title), mode);
    Ok(RerankView {
        claim_keywords: keyword_view(claim),
        title_keywords: keyword_view(title),
        counts,
        score_init,
        f_rank: rerank_score(counts, score_init),
    })
}

#[derive(Debug, Serialize)]
pub struct ProfileView {
    pub profile: LinguisticProfile,
    pub word_clouds: Vec<WordCloudData>,
}

/// Lexicon densities and word clouds for arbitrary text.
pub fn text_profile(text: &str, top_n: usize) -> ProfileView {
    let tokens = analyze(text);
    let lexicons = bundled::lexicons();
    ProfileView {
        profile: profile(&tokens, &lexicons),
        word_clouds: lexicons.iter().map(|l| word_cloud(&tokens, l, top_n)).collect(),
    }
}

pub fn models() -> Vec<String> {
    RetrievalModel::all_variants().iter().map(|m| m.name()).collect()
}

#[wasm_bindgen(js_name = checkClaim)]
pub fn check_claim(claim: &str, options: &str) -> Result<String, JsError> {
    check(claim, options).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = rerankExplain)]
pub fn rerank_explain(claim: &str, title: &str, score_init: f64, mode: &str) -> Result<String, JsError> {
    explain_rerank(claim, title, score_init, mode)
        .and_then(|v| to_json(&v))
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = linguisticProfile)]
pub fn linguistic_profile(text: &str, top_n: usize) -> Result<String, JsError> {
    to_json(&text_profile(text, top_n)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = retrievalModels)]
pub fn retrieval_models() -> Result<String, JsError> {
    to_json(&models()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = exampleClaims)]
pub fn example_claims() -> Result<String, JsError> {
    to_json(&[bundled::SUPPORTED_CLAIM, bundled::REFUTED_CLAIM, bundled::NO_OVERLAP_CLAIM]).map_err(|e| JsError::new(&e))
}
