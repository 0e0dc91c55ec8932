use factcheck_core::bundled;
use factcheck_core::pipeline::{
    ConfigFile, LabelMode, PipelineConfig, PipelineError, ProviderSpec, VerdictBasis, VerdictLabel, CONFIG_ENV,
};
use factcheck_core::retrieval::RetrievalModel;
use factcheck_core::sources::Reliability;

#[test]
fn toml_round_trip() {
    let cfg = PipelineConfig {
        k: 3,
        model: RetrievalModel::LmJelinek { lambda: 0.05 },
        nei_threshold: 1.5,
        label_mode: LabelMode::TwoLabel,
        max_relaxations: Some(2),
        basis: VerdictBasis::Mean,
        ..PipelineConfig::default()
    };
    let text = cfg.to_toml();
    assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
    assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
}

#[test]
fn parses_documented_keys() {
    let cfg = ConfigFile::parse(
        r#"
k = 4
nei_threshold = 1.5
label_mode = "2lbl"
basis = "high"
model = { name = "bm25", k1 = 1.0, b = 0.5 }

[channels]
low = false

[artifacts]
stance_model = "model.bin"
provider = { kind = "stub", dir = "fixtures" }
"#,
    )
    .unwrap();
    assert_eq!(cfg.pipeline.k, 4);
    assert_eq!(cfg.pipeline.label_mode, LabelMode::TwoLabel);
    assert_eq!(cfg.pipeline.basis, VerdictBasis::Channel(Reliability::High));
    assert_eq!(cfg.pipeline.model, RetrievalModel::Bm25 { k1: 1.0, b: 0.5 });
    assert!(!cfg.pipeline.channels.low && cfg.pipeline.channels.mixed);
    assert_eq!(cfg.artifacts.stance_model.as_deref(), Some("model.bin".as_ref()));
    assert_eq!(cfg.artifacts.provider, ProviderSpec::Stub { dir: "fixtures".into() });
}

#[test]
fn rejects_invalid_config() {
    for bad in [
        "k = 0",
        "kk = 3",
        "nei_threshold = -1.0",
        "label_mode = \"4lbl\"",
        "[channels]\nwikipedia = false",
        "[channels]\nwikipedia = false\nhigh = false\nmixed = false\nlow = false\nbasis = \"mean\"",
        "model = { name = \"lm_jelinek\", lambda = 1.5 }",
        "[artifacts]\nbogus = 1",
    ] {
        assert!(matches!(ConfigFile::parse(bad), Err(PipelineError::Config(_))), "{bad}");
    }
}

#[test]
fn loads_from_env_with_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.bin");
    std::fs::write(&model_path, bundled::STANCE_MODEL).unwrap();
    let cfg_path = dir.path().join("fakta.toml");
    std::fs::write(
        &cfg_path,
        "k = 3\nnei_threshold = 1.0\n[artifacts]\nstance_model = \"model.bin\"\n",
    )
    .unwrap();

    std::env::set_var(CONFIG_ENV, &cfg_path);
    let loaded = ConfigFile::from_env();
    std::env::remove_var(CONFIG_ENV);
    let cfg = loaded.unwrap().expect("FAKTA_CONFIG is set");
    assert_eq!(cfg.artifacts.stance_model.as_deref(), Some(model_path.as_path()));
    assert_eq!(ConfigFile::from_env().unwrap(), None);

    let pipeline = bundled::pipeline_from_config(&cfg).unwrap();
    let r = pipeline.check_claim(bundled::SUPPORTED_CLAIM).unwrap();
    assert_eq!(r.verdict.label, VerdictLabel::SUP);
    assert!(r.channels.iter().all(|c| c.documents.len() <= 3));

    let missing = ConfigFile::load(dir.path().join("nope.toml"));
    assert!(matches!(missing, Err(PipelineError::Io { .. })));
}
