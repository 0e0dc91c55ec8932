//! Demo artifacts compiled into the crate: a ~50 document corpus, a 30
//! domain source registry, the cue lexicons and a stance model trained on
//! `stance::toy::toy_dataset(100, 0)`.

use std::sync::Arc;

use crate::pipeline::{ArtifactPaths, ConfigFile, Pipeline, PipelineConfig, PipelineError, ProviderSpec};
use crate::retrieval::{read_corpus, DocumentRecord, Index};
use crate::sources::{load_registry, ExternalSearchProvider, IndexProvider, SourceRegistry, StubProvider};
use crate::stance::{StanceModel, TrainConfig};
use crate::text::{load_lexicon_dir, Lexicon};

pub const CORPUS_JSONL: &str = include_str!("../data/demo/corpus.jsonl");
pub const REGISTRY_CSV: &str = include_str!("../data/demo/registry.csv");
pub const STANCE_MODEL: &[u8] = include_bytes!("../data/demo/stance_model.bin");
pub const LEXICONS: [(&str, &str); 3] = [
    ("sentiment", include_str!("../data/lexicons/sentiment.txt")),
    ("strong_subjectivity", include_str!("../data/lexicons/strong_subjectivity.txt")),
    ("wiki_bias", include_str!("../data/lexicons/wiki_bias.txt")),
];

/// Training set size per label and seed of the bundled stance model.
pub const STANCE_TOY_PER_LABEL: usize = 100;
pub const STANCE_SEED: u64 = 0;

pub const SUPPORTED_CLAIM: &str = "The Eiffel Tower is located in Paris.";
pub const REFUTED_CLAIM: &str = "The Great Wall of China is visible from the Moon.";
pub const NO_OVERLAP_CLAIM: &str = "Zorblax quintrified the velmorian gadrapod.";

pub fn corpus() -> Vec<DocumentRecord> {
    read_corpus(CORPUS_JSONL.as_bytes()).expect("bundled corpus is well-formed")
}

pub fn index() -> Index {
    Index::build(corpus()).expect("bundled corpus indexes")
}

pub fn registry() -> SourceRegistry {
    SourceRegistry::parse_csv(REGISTRY_CSV).expect("bundled registry is well-formed")
}

pub fn lexicons() -> Vec<Lexicon> {
    LEXICONS
        .iter()
        .map(|(name, content)| Lexicon::parse(name, content).expect("bundled lexicons are well-formed"))
        .collect()
}

pub fn stance_model() -> StanceModel {
    StanceModel::from_bytes(STANCE_MODEL).expect("bundled stance model is well-formed")
}

pub fn stance_train_config() -> TrainConfig {
    TrainConfig {
        seed: STANCE_SEED,
        ..TrainConfig::default()
    }
}

/// The demo pipeline: external channels are served from the same index
/// through the registry's domain lists.
pub fn pipeline(config: PipelineConfig) -> Result<Pipeline, PipelineError> {
    let index = Arc::new(index());
    let provider = IndexProvider::new(index.clone(), config.model);
    Ok(Pipeline::new(config, index, registry(), Arc::new(stance_model()), lexicons())?.with_provider(Arc::new(provider)))
}

/// Builds a pipeline from a config file, using bundled data for every
/// artifact the file does not name.
pub fn pipeline_from_config(cfg: &ConfigFile) -> Result<Pipeline, PipelineError> {
    let a: &ArtifactPaths = &cfg.artifacts;
    let load_err = |what: &str, e: &dyn std::fmt::Display| PipelineError::Config(format!("loading {what}: {e}"));
    let index = Arc::new(match &a.index_dir {
        Some(dir) => Index::load(dir).map_err(|e| load_err("index", &e))?,
        None => index(),
    });
    let registry = match &a.registry {
        Some(p) => load_registry(p).map_err(|e| load_err("registry", &e))?,
        None => registry(),
    };
    let model = match &a.stance_model {
        Some(p) => StanceModel::load(p).map_err(|e| load_err("stance model", &e))?,
        None => stance_model(),
    };
    let lexicons = match &a.lexicon_dir {
        Some(d) => load_lexicon_dir(d).map_err(|e| load_err("lexicons", &e))?,
        None => lexicons(),
    };
    let provider: Option<Arc<dyn ExternalSearchProvider>> = match &a.provider {
        ProviderSpec::Index => Some(Arc::new(IndexProvider::new(index.clone(), cfg.pipeline.model))),
        ProviderSpec::Stub { dir } => Some(Arc::new(StubProvider::new(dir.clone()))),
        #[cfg(feature = "http")]
        ProviderSpec::Http { base_url } => Some(Arc::new(crate::sources::HttpJsonProvider::from_env(base_url.clone()))),
        #[cfg(not(feature = "http"))]
        ProviderSpec::Http { .. } => {
            return Err(PipelineError::Config(
                "http provider requested but this build lacks the \"http\" feature".into(),
            ))
        }
        ProviderSpec::None => None,
    };
    let p = Pipeline::new(cfg.pipeline.clone(), index, registry, Arc::new(model), lexicons)?;
    Ok(match provider {
        Some(pr) => p.with_provider(pr),
        None => p,
    })
}
