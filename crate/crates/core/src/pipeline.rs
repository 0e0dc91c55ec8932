//! End-to-end claim check: query generation with relaxation, per-channel
//! retrieval and re-ranking, per-document stance, rationales and lexicon
//! profiles, channel aggregation and the verdict.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use web_time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linguistics::{expand_lexicons, profile, word_cloud, LinguisticProfile, WordCloudData};
use crate::query::{query_for_claim, relax_query, Query};
use crate::rerank::{rerank, CountMode};
use crate::retrieval::{DocumentRecord, Index, IndexError, RetrievalModel, ScoredDocument};
use crate::sources::{
    external_search, normalize_domain, url_host, ExternalSearchProvider, Reliability, SourceError,
    SourceRegistry,
};
use crate::stance::{score_sentences, SentenceRationale, StanceDistribution, StanceError, StanceLabel, StanceScorer};
use crate::text::{analyze, extract_named_entities, tokenize, Lexicon};

pub const CONFIG_ENV: &str = "FAKTA_CONFIG";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("claim is empty")]
    EmptyClaim,
    #[error("no documents to aggregate")]
    NoDocuments,
    #[error("every enabled channel failed: {}", .0.join("; "))]
    AllChannelsFailed(Vec<String>),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Stance(#[from] StanceError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LabelMode {
    #[serde(rename = "2lbl")]
    TwoLabel,
    #[default]
    #[serde(rename = "3lbl")]
    ThreeLabel,
}

impl FromStr for LabelMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "2lbl" | "2" => Ok(LabelMode::TwoLabel),
            "3lbl" | "3" => Ok(LabelMode::ThreeLabel),
            _ => Err(format!("unknown label mode {s:?}; expected 2lbl or 3lbl")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VerdictLabel {
    SUP,
    REF,
    NEI,
}

impl VerdictLabel {
    pub const ALL: [VerdictLabel; 3] = [VerdictLabel::SUP, VerdictLabel::REF, VerdictLabel::NEI];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictLabel::SUP => "SUP",
            VerdictLabel::REF => "REF",
            VerdictLabel::NEI => "NEI",
        }
    }
}

impl fmt::Display for VerdictLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VerdictLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SUP" | "SUPPORTED" | "SUPPORTS" => Ok(VerdictLabel::SUP),
            "REF" | "REFUTED" | "REFUTES" => Ok(VerdictLabel::REF),
            "NEI" | "NOT ENOUGH INFO" => Ok(VerdictLabel::NEI),
            _ => Err(format!("unknown verdict label {s:?}")),
        }
    }
}

/// Which channel's aggregate decides the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum VerdictBasis {
    Channel(Reliability),
    /// Mean of the non-empty channel aggregates; the top score is the
    /// largest rank-1 score over those channels.
    Mean,
}

impl Default for VerdictBasis {
    fn default() -> Self {
        VerdictBasis::Channel(Reliability::Wikipedia)
    }
}

impl fmt::Display for VerdictBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictBasis::Channel(c) => f.write_str(c.as_str()),
            VerdictBasis::Mean => f.write_str("mean"),
        }
    }
}

impl FromStr for VerdictBasis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("mean") {
            return Ok(VerdictBasis::Mean);
        }
        s.parse().map(VerdictBasis::Channel)
    }
}

impl TryFrom<String> for VerdictBasis {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<VerdictBasis> for String {
    fn from(b: VerdictBasis) -> String {
        b.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelFlags {
    pub wikipedia: bool,
    pub high: bool,
    pub mixed: bool,
    pub low: bool,
}

impl Default for ChannelFlags {
    fn default() -> Self {
        ChannelFlags {
            wikipedia: true,
            high: true,
            mixed: true,
            low: true,
        }
    }
}

impl ChannelFlags {
    pub fn only(channels: &[Reliability]) -> Self {
        let mut f = ChannelFlags {
            wikipedia: false,
            high: false,
            mixed: false,
            low: false,
        };
        for c in channels {
            *f.get_mut(*c) = true;
        }
        f
    }

    pub fn enabled(&self, channel: Reliability) -> bool {
        match channel {
            Reliability::Wikipedia => self.wikipedia,
            Reliability::High => self.high,
            Reliability::Mixed => self.mixed,
            Reliability::Low => self.low,
        }
    }

    fn get_mut(&mut self, channel: Reliability) -> &mut bool {
        match channel {
            Reliability::Wikipedia => &mut self.wikipedia,
            Reliability::High => &mut self.high,
            Reliability::Mixed => &mut self.mixed,
            Reliability::Low => &mut self.low,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Documents kept per channel.
    pub k: usize,
    pub model: RetrievalModel,
    pub nei_threshold: f64,
    pub label_mode: LabelMode,
    /// `None` allows as many relaxations as the query has terms.
    pub max_relaxations: Option<usize>,
    pub channels: ChannelFlags,
    pub basis: VerdictBasis,
    pub rerank: bool,
    /// First-stage hits considered by the re-ranker before truncation to `k`.
    pub rerank_depth: usize,
    pub count_mode: CountMode,
    pub word_cloud_size: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k: 5,
            model: RetrievalModel::default(),
            nei_threshold: 2.0,
            label_mode: LabelMode::ThreeLabel,
            max_relaxations: None,
            channels: ChannelFlags::default(),
            basis: VerdictBasis::default(),
            rerank: true,
            rerank_depth: 20,
            count_mode: CountMode::Multiset,
            word_cloud_size: 20,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.k == 0 {
            return Err(PipelineError::Config("k must be at least 1".into()));
        }
        if !(self.nei_threshold >= 0.0 && self.nei_threshold.is_finite()) {
            return Err(PipelineError::Config(format!(
                "nei_threshold must be a finite non-negative number, got {}",
                self.nei_threshold
            )));
        }
        self.model
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if let VerdictBasis::Channel(c) = self.basis {
            if !self.channels.enabled(c) {
                return Err(PipelineError::Config(format!("verdict basis channel {c} is disabled")));
            }
        }
        if !Reliability::ALL.iter().any(|c| self.channels.enabled(*c)) {
            return Err(PipelineError::Config("no channel enabled".into()));
        }
        Ok(())
    }

    pub fn from_toml(s: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig = toml::from_str(s).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn verdict_rule(&self) -> VerdictRule {
        VerdictRule {
            label_mode: self.label_mode,
            nei_threshold: self.nei_threshold,
        }
    }
}

/// Where the external channels get their results.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ProviderSpec {
    /// Search the local index restricted to each channel's domains.
    #[default]
    Index,
    /// Recorded responses keyed by query.
    Stub { dir: PathBuf },
    /// A JSON web search API; the key comes from `FAKTA_SEARCH_KEY`.
    Http { base_url: String },
    None,
}

/// Artifact locations. Unset paths fall back to the bundled demo data.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArtifactPaths {
    pub index_dir: Option<PathBuf>,
    pub stance_model: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
    pub provider: ProviderSpec,
}

impl ArtifactPaths {
    fn resolve_against(&mut self, base: &Path) {
        for p in [
            &mut self.index_dir,
            &mut self.stance_model,
            &mut self.registry,
            &mut self.lexicon_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let ProviderSpec::Stub { dir } = &mut self.provider {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
    }
}

/// The on-disk config file: pipeline settings at the top level plus an
/// optional `[artifacts]` table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfigFile {
    #[serde(flatten)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub artifacts: ArtifactPaths,
}

impl ConfigFile {
    pub fn parse(s: &str) -> Result<Self, PipelineError> {
        let mut table: toml::Table = toml::from_str(s).map_err(|e| PipelineError::Config(e.to_string()))?;
        let artifacts = match table.remove("artifacts") {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| PipelineError::Config(e.to_string()))?,
            None => ArtifactPaths::default(),
        };
        let pipeline: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| PipelineError::Config(e.to_string()))?;
        pipeline.validate()?;
        Ok(ConfigFile { pipeline, artifacts })
    }

    /// Reads a config file; relative artifact paths are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = ConfigFile::parse(&content)?;
        if let Some(dir) = path.parent() {
            cfg.artifacts.resolve_against(dir);
        }
        Ok(cfg)
    }

    /// The file named by `FAKTA_CONFIG`, if set.
    pub fn from_env() -> Result<Option<Self>, PipelineError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => ConfigFile::load(PathBuf::from(p)).map(Some),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictRule {
    pub label_mode: LabelMode,
    pub nei_threshold: f64,
}

/// `agg` is `None` when the basis channel returned no documents.
pub fn decide_verdict(agg: Option<&StanceDistribution>, top_score: f64, rule: VerdictRule) -> VerdictLabel {
    let (agree, disagree) = match agg {
        Some(d) => {
            let f = d.flattened();
            (f[0], f[1])
        }
        None => (0.0, 0.0),
    };
    match rule.label_mode {
        LabelMode::TwoLabel => {
            if agree >= disagree {
                VerdictLabel::SUP
            } else {
                VerdictLabel::REF
            }
        }
        LabelMode::ThreeLabel => {
            if agg.is_none() || top_score < rule.nei_threshold {
                VerdictLabel::NEI
            } else if agree > disagree {
                VerdictLabel::SUP
            } else if disagree > agree {
                VerdictLabel::REF
            } else {
                VerdictLabel::NEI
            }
        }
    }
}

/// Mean of the flattened distributions, summed in the given order and
/// renormalized.
pub fn aggregate(dists: &[StanceDistribution]) -> Result<StanceDistribution, PipelineError> {
    if dists.is_empty() {
        return Err(PipelineError::NoDocuments);
    }
    let mut sum = [0.0f64; 4];
    for d in dists {
        for (s, v) in sum.iter_mut().zip(d.flattened()) {
            *s += v;
        }
    }
    let n = dists.len() as f64;
    let mean = sum.map(|s| s / n);
    let total: f64 = mean.iter().sum();
    let norm = if total > 0.0 { mean.map(|m| m / total) } else { mean };
    Ok(StanceDistribution::from_flattened(norm))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relaxed<T> {
    pub query: Query,
    pub relaxations: usize,
    pub hits: Vec<T>,
}

/// Runs `fetch` on the query, dropping the last term and retrying while
/// nothing comes back, at most `max_relaxations` times.
pub fn retrieve_with_relaxation<T, E>(
    query: &Query,
    max_relaxations: usize,
    mut fetch: impl FnMut(&Query) -> Result<Vec<T>, E>,
) -> Result<Relaxed<T>, E> {
    let mut q = query.clone();
    let mut relaxations = 0;
    while !q.is_empty() {
        let hits = fetch(&q)?;
        if !hits.is_empty() {
            return Ok(Relaxed { query: q, relaxations, hits });
        }
        if relaxations == max_relaxations || q.len() == 1 {
            break;
        }
        q = relax_query(&q).expect("query is non-empty");
        relaxations += 1;
    }
    Ok(Relaxed {
        query: query.clone(),
        relaxations,
        hits: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentResult {
    pub doc_id: String,
    pub url: String,
    pub title: String,
    pub source_domain: String,
    /// Text the rationale spans index into.
    pub text: String,
    pub score_init: f64,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_rank: Option<f64>,
    pub stance: StanceDistribution,
    pub dominant: StanceLabel,
    pub rationales: Vec<SentenceRationale>,
    pub profile: LinguisticProfile,
    pub word_clouds: Vec<WordCloudData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelResult {
    pub channel: Reliability,
    pub status: ChannelStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The query that produced `documents`.
    pub query: Query,
    pub relaxations: usize,
    pub documents: Vec<DocumentResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<StanceDistribution>,
}

impl ChannelResult {
    /// Largest first-stage score, i.e. the score of the rank-1 document.
    pub fn top_score(&self) -> f64 {
        self.documents.iter().map(|d| d.score_init).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: VerdictLabel,
    pub agree_score: f64,
    pub disagree_score: f64,
    pub discuss_score: f64,
    pub top_score: f64,
    pub basis_channel: VerdictBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub analysis_ms: f64,
    pub retrieval_ms: f64,
    pub documents_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactCheckResult {
    pub claim: String,
    pub query: Query,
    pub channels: Vec<ChannelResult>,
    pub verdict: Verdict,
    #[serde(default)]
    pub diagnostics: Vec<String>,
    #[serde(default)]
    pub timing: Timing,
}

impl FactCheckResult {
    pub fn channel(&self, channel: Reliability) -> Option<&ChannelResult> {
        self.channels.iter().find(|c| c.channel == channel)
    }

    pub fn document(&self, doc_id: &str) -> Option<&DocumentResult> {
        self.channels
            .iter()
            .flat_map(|c| &c.documents)
            .find(|d| d.doc_id == doc_id)
    }

    /// Pretty JSON without the timing block; equal inputs give equal bytes.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("result is serializable");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        serde_json::to_string_pretty(&v).expect("value is serializable")
    }
}

/// Aggregate and top score for one claim on the verdict basis; enough to
/// re-decide the verdict under any threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimOutcome {
    pub top_score: f64,
    pub aggregate: Option<StanceDistribution>,
}

impl ClaimOutcome {
    pub fn verdict(&self, rule: VerdictRule) -> VerdictLabel {
        decide_verdict(self.aggregate.as_ref(), self.top_score, rule)
    }
}

/// Loaded artifacts plus default settings. Immutable once built; safe to
/// share across threads.
pub struct Pipeline {
    pub config: PipelineConfig,
    index: Arc<Index>,
    registry: SourceRegistry,
    provider: Option<Arc<dyn ExternalSearchProvider>>,
    scorer: Arc<dyn StanceScorer>,
    lexicons: Vec<Lexicon>,
}

impl fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pipeline")
            .field("config", &self.config)
            .field("documents", &self.index.len())
            .field("registry", &self.registry.len())
            .field("has_provider", &self.provider.is_some())
            .field("lexicons", &self.lexicons.len())
            .finish()
    }
}

impl Pipeline {
    pub fn new(
        config: PipelineConfig,
        index: Arc<Index>,
        registry: SourceRegistry,
        scorer: Arc<dyn StanceScorer>,
        lexicons: Vec<Lexicon>,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Pipeline {
            config,
            index,
            registry,
            provider: None,
            scorer,
            lexicons,
        })
    }

    pub fn with_provider(mut self, provider: Arc<dyn ExternalSearchProvider>) -> Self {
        self.provider = Some(provider);
        self
    }

    pub fn index(&self) -> &Arc<Index> {
        &self.index
    }

    pub fn registry(&self) -> &SourceRegistry {
        &self.registry
    }

    pub fn lexicons(&self) -> &[Lexicon] {
        &self.lexicons
    }

    pub fn check_claim(&self, claim: &str) -> Result<FactCheckResult, PipelineError> {
        self.check_claim_with(claim, &self.config)
    }

    pub fn check_claim_with(&self, claim: &str, config: &PipelineConfig) -> Result<FactCheckResult, PipelineError> {
        config.validate()?;
        let t0 = Instant::now();
        let claim = claim.trim();
        if claim.is_empty() {
            return Err(PipelineError::EmptyClaim);
        }
        let tokens = analyze(claim);
        let entities = extract_named_entities(&tokens);
        let query = query_for_claim(&tokens, &entities);
        let analysis_ms = ms(t0);
        let mut diagnostics = Vec::new();

        let t1 = Instant::now();
        let enabled: Vec<Reliability> = Reliability::ALL
            .into_iter()
            .filter(|c| config.channels.enabled(*c))
            .collect();
        let mut raw = Vec::new();
        if query.is_empty() {
            diagnostics.push("claim has no searchable terms".to_string());
            for &c in &enabled {
                raw.push((c, Ok(Relaxed { query: Query::new(), relaxations: 0, hits: Vec::new() })));
            }
        } else {
            for &c in &enabled {
                raw.push((c, self.retrieve_channel(c, &tokens, &query, config)));
            }
        }
        let retrieval_ms = ms(t1);

        let t2 = Instant::now();
        let mut channels = Vec::new();
        let mut failures = Vec::new();
        for (channel, outcome) in raw {
            match outcome {
                Ok(r) => {
                    let documents = crate::map_ordered(&r.hits, |(hit, doc)| self.analyze_document(claim, doc, hit, config))
                        .into_iter()
                        .collect::<Result<Vec<_>, _>>()?;
                    let dists: Vec<StanceDistribution> = documents.iter().map(|d| d.stance).collect();
                    channels.push(ChannelResult {
                        channel,
                        status: ChannelStatus::Ok,
                        error: None,
                        query: r.query,
                        relaxations: r.relaxations,
                        aggregate: aggregate(&dists).ok(),
                        documents,
                    });
                }
                Err(msg) => {
                    log::warn!("{channel} channel failed: {msg}");
                    failures.push(format!("{channel}: {msg}"));
                    diagnostics.push(format!("{channel} channel failed: {msg}"));
                    channels.push(ChannelResult {
                        channel,
                        status: ChannelStatus::Failed,
                        error: Some(msg),
                        query: query.clone(),
                        relaxations: 0,
                        documents: Vec::new(),
                        aggregate: None,
                    });
                }
            }
        }
        if !enabled.is_empty() && failures.len() == enabled.len() {
            return Err(PipelineError::AllChannelsFailed(failures));
        }
        let documents_ms = ms(t2);

        let outcome = basis_outcome(&channels, config.basis);
        let label = outcome.verdict(config.verdict_rule());
        let flat = outcome.aggregate.map(|a| a.flattened()).unwrap_or([0.0; 4]);
        let verdict = Verdict {
            label,
            agree_score: flat[0],
            disagree_score: flat[1],
            discuss_score: flat[2],
            top_score: outcome.top_score,
            basis_channel: config.basis,
        };
        let result_query = match config.basis {
            VerdictBasis::Channel(c) => channels
                .iter()
                .find(|r| r.channel == c && !r.documents.is_empty())
                .map(|r| r.query.clone())
                .unwrap_or_else(|| query.clone()),
            VerdictBasis::Mean => query.clone(),
        };
        Ok(FactCheckResult {
            claim: claim.to_string(),
            query: result_query,
            channels,
            verdict,
            diagnostics,
            timing: Timing {
                analysis_ms,
                retrieval_ms,
                documents_ms,
                total_ms: ms(t0),
            },
        })
    }

    /// Verdict inputs for a claim under `config`.
    pub fn outcome(&self, claim: &str, config: &PipelineConfig) -> Result<ClaimOutcome, PipelineError> {
        let result = self.check_claim_with(claim, config)?;
        Ok(basis_outcome(&result.channels, config.basis))
    }

    /// Stance, rationales, profile and word clouds for one document.
    pub fn analyze_document(
        &self,
        claim: &str,
        doc: &DocumentRecord,
        hit: &ScoredDocument,
        config: &PipelineConfig,
    ) -> Result<DocumentResult, PipelineError> {
        let text = if doc.body.trim().is_empty() { &doc.title } else { &doc.body };
        let stance = match self.scorer.score(claim, text) {
            Ok(d) => d,
            Err(StanceError::EmptyText) => StanceDistribution {
                p_related: 0.0,
                ..StanceDistribution::uniform()
            },
            Err(e) => return Err(e.into()),
        };
        let rationales = score_sentences(self.scorer.as_ref(), claim, text)?;
        let tokens = tokenize(text);
        let word_clouds = expand_lexicons(&self.lexicons)
            .iter()
            .map(|l| word_cloud(&tokens, l, config.word_cloud_size))
            .collect();
        Ok(DocumentResult {
            doc_id: doc.doc_id.clone(),
            url: crate::sources::doc_url(doc),
            title: doc.title.clone(),
            source_domain: doc.source_domain.clone(),
            text: text.clone(),
            score_init: hit.score_init,
            rank: hit.rank,
            f_rank: hit.f_rank,
            stance,
            dominant: stance.dominant(),
            rationales,
            profile: profile(&tokens, &self.lexicons),
            word_clouds,
        })
    }

    fn retrieve_channel(
        &self,
        channel: Reliability,
        claim_tokens: &[crate::text::Token],
        query: &Query,
        config: &PipelineConfig,
    ) -> Result<Relaxed<(ScoredDocument, DocumentRecord)>, String> {
        let depth = if config.rerank { config.k.max(config.rerank_depth) } else { config.k };
        let max_relax = config.max_relaxations.unwrap_or(query.len());
        let mut relaxed = if channel == Reliability::Wikipedia {
            retrieve_with_relaxation(query, max_relax, |q| {
                let hits = self
                    .index
                    .search_filtered(&q.terms, &config.model, depth, |d| self.in_wikipedia_channel(d))
                    .map_err(|e| e.to_string())?;
                Ok::<_, String>(
                    hits.into_iter()
                        .filter_map(|h| self.index.document(&h.doc_id).map(|d| (h, d.clone())))
                        .collect(),
                )
            })?
        } else {
            let Some(provider) = &self.provider else {
                return Err("no external search provider configured".into());
            };
            retrieve_with_relaxation(query, max_relax, |q| {
                external_search(provider.as_ref(), &self.registry, q, channel, depth)
                    .map(|hits| hits.into_iter().map(|h| (h.scored, h.document)).collect())
                    .map_err(|e| match e {
                        SourceError::Provider { msg, .. } => msg,
                        other => other.to_string(),
                    })
            })?
        };
        if config.rerank {
            let (hits, docs): (Vec<ScoredDocument>, Vec<DocumentRecord>) = relaxed.hits.drain(..).unzip();
            let titles: HashMap<String, String> =
                docs.iter().map(|d| (d.doc_id.clone(), d.title.clone())).collect();
            let mut by_id: HashMap<String, DocumentRecord> =
                docs.into_iter().map(|d| (d.doc_id.clone(), d)).collect();
            relaxed.hits = rerank(claim_tokens, hits, &titles, config.count_mode)
                .into_iter()
                .filter_map(|h| by_id.remove(&h.doc_id).map(|d| (h, d)))
                .collect();
        }
        relaxed.hits.truncate(config.k);
        Ok(relaxed)
    }

    /// Local documents whose domain is a Wikipedia-class domain or is not
    /// classified at all.
    fn in_wikipedia_channel(&self, doc: &DocumentRecord) -> bool {
        let host = if doc.source_domain.is_empty() {
            url_host(&doc.doc_id).unwrap_or_default()
        } else {
            normalize_domain(&doc.source_domain)
        };
        if host.is_empty() {
            return true;
        }
        matches!(self.registry.classify_host(&host), None | Some(Reliability::Wikipedia))
    }
}

fn basis_outcome(channels: &[ChannelResult], basis: VerdictBasis) -> ClaimOutcome {
    match basis {
        VerdictBasis::Channel(c) => match channels.iter().find(|r| r.channel == c) {
            Some(r) => ClaimOutcome {
                top_score: r.top_score(),
                aggregate: r.aggregate,
            },
            None => ClaimOutcome {
                top_score: 0.0,
                aggregate: None,
            },
        },
        VerdictBasis::Mean => {
            let aggs: Vec<StanceDistribution> = channels.iter().filter_map(|r| r.aggregate).collect();
            ClaimOutcome {
                top_score: channels
                    .iter()
                    .filter(|r| r.aggregate.is_some())
                    .map(ChannelResult::top_score)
                    .fold(0.0, f64::max),
                aggregate: aggregate(&aggs).ok(),
            }
        }
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}
