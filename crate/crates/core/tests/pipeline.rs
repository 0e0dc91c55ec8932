use std::sync::Arc;

use approx::assert_abs_diff_eq;
use factcheck_core::bundled;
use factcheck_core::pipeline::{
    aggregate, retrieve_with_relaxation, ChannelFlags, ChannelStatus, LabelMode, Pipeline, PipelineConfig,
    PipelineError, VerdictBasis, VerdictLabel,
};
use factcheck_core::query::{query_for_claim, Query};
use factcheck_core::sources::{external_search, query_key, Reliability, SourceRegistry, StubProvider};
use factcheck_core::stance::StanceDistribution;
use factcheck_core::text::{analyze, extract_named_entities};

const CLAIMS: [&str; 6] = [
    bundled::SUPPORTED_CLAIM,
    bundled::REFUTED_CLAIM,
    bundled::NO_OVERLAP_CLAIM,
    "Penguins can fly.",
    "Albert Einstein developed the theory of relativity.",
    "Vaccines cause autism.",
];

fn dist(flat: [f64; 4]) -> StanceDistribution {
    StanceDistribution::from_flattened(flat)
}

fn claim_query(claim: &str) -> Query {
    let tokens = analyze(claim);
    query_for_claim(&tokens, &extract_named_entities(&tokens))
}

fn stub_registry() -> SourceRegistry {
    SourceRegistry::parse_csv("domain,reliability\nen.wikipedia.org,wikipedia\nglobewire.example,high\nrumormill.example,low\n")
        .unwrap()
}

#[test]
fn aggregate_is_the_mean() {
    let agg = aggregate(&[dist([0.6, 0.2, 0.2, 0.0]), dist([0.8, 0.0, 0.2, 0.0])]).unwrap();
    let f = agg.flattened();
    for (got, want) in f.iter().zip([0.7, 0.1, 0.2, 0.0]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
    }
    let single = dist([0.1, 0.2, 0.3, 0.4]);
    let f = aggregate(&[single]).unwrap().flattened();
    for (got, want) in f.iter().zip(single.flattened()) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
    }
    assert!(matches!(aggregate(&[]), Err(PipelineError::NoDocuments)));
}

#[test]
fn aggregate_ignores_order() {
    let dists = [
        dist([0.1, 0.2, 0.3, 0.4]),
        dist([0.5, 0.1, 0.1, 0.3]),
        dist([0.05, 0.6, 0.05, 0.3]),
        dist([0.3, 0.3, 0.3, 0.1]),
    ];
    let base = aggregate(&dists).unwrap().flattened();
    let mut rev = dists;
    rev.reverse();
    let rotated = [dists[2], dists[0], dists[3], dists[1]];
    for other in [rev, rotated] {
        let f = aggregate(&other).unwrap().flattened();
        for (a, b) in base.iter().zip(f) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }
    assert_abs_diff_eq!(base.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
}

#[test]
fn relaxation_stops_at_the_first_hit() {
    let query = Query::from_terms(["a", "b", "c", "d", "e"]);
    let r = retrieve_with_relaxation(&query, 10, |q| Ok::<_, ()>(vec![q.len()])).unwrap();
    assert_eq!(r.relaxations, 0);
    assert_eq!(r.query, query);

    let r = retrieve_with_relaxation(&query, 10, |q| Ok::<_, ()>(if q.len() <= 2 { vec![1] } else { vec![] })).unwrap();
    assert_eq!(r.relaxations, query.len() - 2);
    assert_eq!(r.query.terms, ["a", "b"]);

    let r = retrieve_with_relaxation(&query, 2, |_| Ok::<_, ()>(Vec::<u8>::new())).unwrap();
    assert_eq!(r.relaxations, 2);
    assert!(r.hits.is_empty());

    let err = retrieve_with_relaxation(&query, 2, |_| Err::<Vec<u8>, _>("down")).unwrap_err();
    assert_eq!(err, "down");
}

#[test]
fn stub_fixture_on_two_term_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let stub = StubProvider::new(dir.path());
    let query = Query::from_terms(["eiffel", "tower", "located", "paris"]);
    let prefix = &query.terms[..2];
    std::fs::write(
        stub.fixture_path(prefix),
        concat!(
            r#"{"url": "https://globewire.example/eiffel", "title": "Eiffel Tower", "body": "The tower stands in Paris."}"#,
            "\n",
            r#"{"url": "https://rumormill.example/eiffel", "title": "Tower secrets", "body": "Nobody knows."}"#,
            "\n",
        ),
    )
    .unwrap();
    assert!(stub.fixture_path(prefix).ends_with(format!("{}.jsonl", query_key(prefix))));
    let registry = stub_registry();
    let r = retrieve_with_relaxation(&query, query.len(), |q| {
        external_search(&stub, &registry, q, Reliability::High, 5)
    })
    .unwrap();
    assert_eq!(r.relaxations, query.len() - 2);
    assert_eq!(r.hits.len(), 1, "off-class hits are dropped");
    assert_eq!(r.hits[0].scored.doc_id, "https://globewire.example/eiffel");
    assert_eq!(r.hits[0].scored.score_init, 1.0);
}

fn stub_pipeline(dir: &std::path::Path) -> Pipeline {
    let config = PipelineConfig {
        channels: ChannelFlags::only(&[Reliability::Wikipedia, Reliability::High, Reliability::Low]),
        ..PipelineConfig::default()
    };
    Pipeline::new(
        config,
        Arc::new(bundled::index()),
        bundled::registry(),
        Arc::new(bundled::stance_model()),
        bundled::lexicons(),
    )
    .unwrap()
    .with_provider(Arc::new(StubProvider::new(dir)))
}

#[test]
fn pipeline_relaxes_external_channels_independently() {
    let dir = tempfile::tempdir().unwrap();
    let query = claim_query(bundled::SUPPORTED_CLAIM);
    assert!(query.len() > 2, "{query:?}");
    let stub = StubProvider::new(dir.path());
    std::fs::write(
        stub.fixture_path(&query.terms[..2]),
        concat!(
            r#"{"url": "https://globewire.example/eiffel", "title": "Eiffel Tower", "body": "Officials confirmed that the Eiffel Tower is located in Paris."}"#,
            "\n",
            r#"{"url": "https://rumormill.example/eiffel", "title": "Eiffel Tower", "body": "The Eiffel Tower is not in Paris."}"#,
        ),
    )
    .unwrap();

    let result = stub_pipeline(dir.path()).check_claim(bundled::SUPPORTED_CLAIM).unwrap();
    for channel in [Reliability::High, Reliability::Low] {
        let r = result.channel(channel).unwrap();
        assert_eq!(r.status, ChannelStatus::Ok);
        assert_eq!(r.relaxations, query.len() - 2);
        assert_eq!(r.query.terms, &query.terms[..2]);
        assert_eq!(r.documents.len(), 1);
    }
    assert_eq!(result.channel(Reliability::Low).unwrap().documents[0].source_domain, "rumormill.example");
    assert!(result.channel(Reliability::Mixed).is_none(), "disabled channels are omitted");
    let wiki = result.channel(Reliability::Wikipedia).unwrap();
    assert_eq!(wiki.relaxations, 0);
    assert_eq!(wiki.documents[0].doc_id, "https://en.wikipedia.org/wiki/Eiffel_Tower");
    assert_eq!(result.verdict.label, VerdictLabel::SUP);
}

#[test]
fn all_channels_failing_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let pipeline = stub_pipeline(dir.path());
    let query = claim_query(bundled::SUPPORTED_CLAIM);
    std::fs::write(StubProvider::new(dir.path()).fixture_path(&query.terms), r#"{"error": "down"}"#).unwrap();
    let config = PipelineConfig {
        channels: ChannelFlags::only(&[Reliability::High]),
        basis: VerdictBasis::Mean,
        ..PipelineConfig::default()
    };
    match pipeline.check_claim_with(bundled::SUPPORTED_CLAIM, &config) {
        Err(PipelineError::AllChannelsFailed(errors)) => assert_eq!(errors.len(), 1),
        other => panic!("expected AllChannelsFailed, got {other:?}"),
    }
}

#[test]
fn bundled_claims_get_expected_verdicts() {
    let pipeline = bundled::pipeline(PipelineConfig::default()).unwrap();
    let sup = pipeline.check_claim(bundled::SUPPORTED_CLAIM).unwrap();
    assert_eq!(sup.verdict.label, VerdictLabel::SUP);
    let wiki = sup.channel(Reliability::Wikipedia).unwrap();
    assert_eq!(wiki.documents[0].doc_id, "https://en.wikipedia.org/wiki/Eiffel_Tower");
    assert_eq!(wiki.documents[0].rank, 1);

    assert_eq!(pipeline.check_claim(bundled::REFUTED_CLAIM).unwrap().verdict.label, VerdictLabel::REF);

    let nei = pipeline.check_claim(bundled::NO_OVERLAP_CLAIM).unwrap();
    assert_eq!(nei.verdict.label, VerdictLabel::NEI);
    assert!(nei.channels.iter().all(|c| c.documents.is_empty()));
    assert_eq!(nei.verdict.top_score, 0.0);
}

#[test]
fn two_label_mode_never_abstains() {
    let pipeline = bundled::pipeline(PipelineConfig::default()).unwrap();
    let config = PipelineConfig {
        label_mode: LabelMode::TwoLabel,
        ..PipelineConfig::default()
    };
    for claim in CLAIMS {
        let v = pipeline.check_claim_with(claim, &config).unwrap().verdict.label;
        assert_ne!(v, VerdictLabel::NEI, "{claim}");
    }
}

#[test]
fn disabling_other_channels_keeps_the_verdict() {
    let pipeline = bundled::pipeline(PipelineConfig::default()).unwrap();
    let wiki_only = PipelineConfig {
        channels: ChannelFlags::only(&[Reliability::Wikipedia]),
        ..PipelineConfig::default()
    };
    let no_low = PipelineConfig {
        channels: ChannelFlags::only(&[Reliability::Wikipedia, Reliability::High, Reliability::Mixed]),
        ..PipelineConfig::default()
    };
    for claim in CLAIMS {
        let full = pipeline.check_claim(claim).unwrap().verdict;
        for cfg in [&wiki_only, &no_low] {
            assert_eq!(pipeline.check_claim_with(claim, cfg).unwrap().verdict, full, "{claim}");
        }
    }
}

#[test]
fn results_are_deterministic() {
    let a = bundled::pipeline(PipelineConfig::default()).unwrap();
    let b = bundled::pipeline(PipelineConfig::default()).unwrap();
    for claim in CLAIMS {
        let first = a.check_claim(claim).unwrap().canonical_json();
        assert_eq!(first, a.check_claim(claim).unwrap().canonical_json());
        assert_eq!(first, b.check_claim(claim).unwrap().canonical_json());
        assert!(!first.contains("\"timing\""));
    }
}

#[test]
fn rejects_bad_input_and_config() {
    let pipeline = bundled::pipeline(PipelineConfig::default()).unwrap();
    assert!(matches!(pipeline.check_claim("   "), Err(PipelineError::EmptyClaim)));
    let r = pipeline.check_claim("Is it the?").unwrap();
    assert_eq!(r.verdict.label, VerdictLabel::NEI);
    assert!(!r.diagnostics.is_empty());

    let bad = PipelineConfig {
        channels: ChannelFlags::only(&[Reliability::High]),
        ..PipelineConfig::default()
    };
    assert!(matches!(pipeline.check_claim_with("x", &bad), Err(PipelineError::Config(_))));
    let zero_k = PipelineConfig {
        k: 0,
        ..PipelineConfig::default()
    };
    assert!(matches!(pipeline.check_claim_with("x", &zero_k), Err(PipelineError::Config(_))));
}

#[test]
fn mean_basis_uses_every_channel() {
    let pipeline = bundled::pipeline(PipelineConfig::default()).unwrap();
    let config = PipelineConfig {
        basis: VerdictBasis::Mean,
        ..PipelineConfig::default()
    };
    let r = pipeline.check_claim_with(bundled::SUPPORTED_CLAIM, &config).unwrap();
    let aggs: Vec<StanceDistribution> = r.channels.iter().filter_map(|c| c.aggregate).collect();
    assert!(aggs.len() > 1);
    let mean = aggregate(&aggs).unwrap().flattened();
    assert_abs_diff_eq!(r.verdict.agree_score, mean[0], epsilon = 1e-12);
    let top = r.channels.iter().map(|c| c.top_score()).fold(0.0, f64::max);
    assert_eq!(r.verdict.top_score, top);
}
