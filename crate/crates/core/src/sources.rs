//! Media reliability registry and the external search provider boundary.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::query::Query;
use crate::retrieval::{DocumentRecord, Index, RetrievalModel, ScoredDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reliability {
    Wikipedia,
    High,
    Mixed,
    Low,
}

impl Reliability {
    pub const ALL: [Reliability; 4] = [
        Reliability::Wikipedia,
        Reliability::High,
        Reliability::Mixed,
        Reliability::Low,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Reliability::Wikipedia => "wikipedia",
            Reliability::High => "high",
            Reliability::Mixed => "mixed",
            Reliability::Low => "low",
        }
    }
}

impl fmt::Display for Reliability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reliability {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Reliability::ALL
            .into_iter()
            .find(|r| r.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown reliability label {s:?}"))
    }
}

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("registry line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid url {0:?}")]
    InvalidUrl(String),
    #[error("provider failed for {channel} channel: {msg}")]
    Provider { channel: Reliability, msg: String },
    #[error("no domains registered for {0} channel")]
    EmptyChannel(Reliability),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub domain: String,
    pub reliability: Reliability,
}

/// Domain → reliability class, with suffix-aware lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceRegistry {
    records: BTreeMap<String, Reliability>,
}

pub fn normalize_domain(domain: &str) -> String {
    let d = domain.trim().trim_end_matches('.').to_lowercase();
    d.strip_prefix("www.").map(str::to_string).unwrap_or(d)
}

impl SourceRegistry {
    pub fn new() -> Self {
        SourceRegistry::default()
    }

    pub fn insert(&mut self, domain: &str, reliability: Reliability) -> Option<Reliability> {
        self.records.insert(normalize_domain(domain), reliability)
    }

    /// Parses `domain,reliability` CSV with a header row. Repeated domains
    /// keep the last row.
    pub fn parse_csv(content: &str) -> Result<Self, SourceError> {
        let mut reg = SourceRegistry::new();
        let mut lines = content.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim().eq_ignore_ascii_case("domain,reliability") => {}
            Some((i, _)) => {
                return Err(SourceError::Parse {
                    line: i + 1,
                    msg: "expected header \"domain,reliability\"".into(),
                })
            }
            None => return Ok(reg),
        }
        for (i, line) in lines {
            let line_no = i + 1;
            let (domain, label) = line.split_once(',').ok_or_else(|| SourceError::Parse {
                line: line_no,
                msg: "expected two comma-separated columns".into(),
            })?;
            let reliability: Reliability = label
                .parse()
                .map_err(|msg| SourceError::Parse { line: line_no, msg })?;
            let domain = normalize_domain(domain);
            if domain.is_empty() || domain.contains('/') {
                return Err(SourceError::Parse {
                    line: line_no,
                    msg: format!("invalid domain {domain:?}"),
                });
            }
            if reg.insert(&domain, reliability).is_some() {
                log::warn!("registry line {line_no}: duplicate domain {domain}, keeping last");
            }
        }
        Ok(reg)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = SourceRecord> + '_ {
        self.records.iter().map(|(d, r)| SourceRecord {
            domain: d.clone(),
            reliability: *r,
        })
    }

    /// Longest registered suffix of `host` on a label boundary.
    pub fn classify_host(&self, host: &str) -> Option<Reliability> {
        let mut host = normalize_domain(host);
        loop {
            if let Some(r) = self.records.get(&host) {
                return Some(*r);
            }
            match host.split_once('.') {
                Some((_, rest)) if !rest.is_empty() => host = rest.to_string(),
                _ => return None,
            }
        }
    }

    /// `Ok(None)` means the domain is not registered.
    pub fn classify_domain(&self, url: &str) -> Result<Option<Reliability>, SourceError> {
        Ok(self.classify_host(&url_host(url)?))
    }

    pub fn domains(&self, class: Reliability) -> Vec<String> {
        self.records
            .iter()
            .filter(|(_, r)| **r == class)
            .map(|(d, _)| d.clone())
            .collect()
    }
}

pub fn url_host(url: &str) -> Result<String, SourceError> {
    let parsed = url::Url::parse(url.trim()).map_err(|_| SourceError::InvalidUrl(url.to_string()))?;
    parsed
        .host_str()
        .map(str::to_string)
        .ok_or_else(|| SourceError::InvalidUrl(url.to_string()))
}

pub fn load_registry(path: impl AsRef<Path>) -> Result<SourceRegistry, SourceError> {
    SourceRegistry::parse_csv(&std::fs::read_to_string(path)?)
}

/// One result as returned by a search provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderHit {
    pub url: String,
    #[serde(default)]
    pub title: String,
    /// Full text when the provider fetched it, otherwise the snippet.
    #[serde(default, alias = "snippet")]
    pub body: String,
}

/// A web search backend restricted to a domain whitelist.
pub trait ExternalSearchProvider: Send + Sync {
    /// Ranked hits, best first, for `terms` restricted to `whitelist`.
    fn search(&self, terms: &[String], whitelist: &[String], k: usize) -> Result<Vec<ProviderHit>, String>;
}

/// A hit from an external channel with the document it refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalHit {
    pub scored: ScoredDocument,
    pub document: DocumentRecord,
}

/// Queries `provider` for one reliability class. `score_init` is the
/// reciprocal of the rank among kept hits; hits outside the class are
/// dropped before ranking.
pub fn external_search(
    provider: &dyn ExternalSearchProvider,
    registry: &SourceRegistry,
    query: &Query,
    class: Reliability,
    k: usize,
) -> Result<Vec<ExternalHit>, SourceError> {
    let whitelist = registry.domains(class);
    if whitelist.is_empty() {
        return Err(SourceError::EmptyChannel(class));
    }
    let raw = provider
        .search(&query.terms, &whitelist, k)
        .map_err(|msg| SourceError::Provider { channel: class, msg })?;
    let mut out: Vec<ExternalHit> = Vec::new();
    for hit in raw {
        if out.len() >= k {
            break;
        }
        let Ok(host) = url_host(&hit.url) else {
            log::warn!("dropping provider hit with invalid url {:?}", hit.url);
            continue;
        };
        if registry.classify_host(&host) != Some(class) {
            continue;
        }
        if out.iter().any(|h| h.scored.doc_id == hit.url) {
            continue;
        }
        let rank = out.len() + 1;
        out.push(ExternalHit {
            scored: ScoredDocument {
                doc_id: hit.url.clone(),
                score_init: 1.0 / rank as f64,
                rank,
                f_rank: None,
            },
            document: DocumentRecord {
                doc_id: hit.url,
                title: hit.title,
                body: hit.body,
                source_domain: normalize_domain(&host),
            },
        });
    }
    Ok(out)
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Fixture key for a query: FNV-1a of the space-joined terms, as 16 hex digits.
pub fn query_key(terms: &[String]) -> String {
    format!("{:016x}", fnv1a(terms.join(" ").as_bytes(), 0))
}

/// Deterministic provider reading `<query_key>.jsonl` files from a
/// directory. A missing file means no results. A line of the form
/// `{"error": "..."}` makes the call fail with that message.
#[derive(Debug, Clone)]
pub struct StubProvider {
    dir: PathBuf,
}

impl StubProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        StubProvider { dir: dir.into() }
    }

    pub fn fixture_path(&self, terms: &[String]) -> PathBuf {
        self.dir.join(format!("{}.jsonl", query_key(terms)))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StubLine {
    Error { error: String },
    Hit(ProviderHit),
}

impl ExternalSearchProvider for StubProvider {
    /// Returns every fixture line; filtering and truncation happen in
    /// [`external_search`].
    fn search(&self, terms: &[String], _whitelist: &[String], _k: usize) -> Result<Vec<ProviderHit>, String> {
        let path = self.fixture_path(terms);
        let content = match std::fs::read_to_string(&path) {
            Ok(c) => c,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.to_string()),
        };
        let mut hits = Vec::new();
        for (i, line) in content.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            match serde_json::from_str::<StubLine>(line) {
                Ok(StubLine::Error { error }) => return Err(error),
                Ok(StubLine::Hit(hit)) => hits.push(hit),
                Err(e) => return Err(format!("{}:{}: {e}", path.display(), i + 1)),
            }
        }
        Ok(hits)
    }
}

/// Serves a local index through the provider interface, as a stand-in for
/// web search over the media channels.
#[derive(Debug, Clone)]
pub struct IndexProvider {
    index: Arc<Index>,
    model: RetrievalModel,
}

impl IndexProvider {
    pub fn new(index: Arc<Index>, model: RetrievalModel) -> Self {
        IndexProvider { index, model }
    }
}

impl ExternalSearchProvider for IndexProvider {
    fn search(&self, terms: &[String], whitelist: &[String], k: usize) -> Result<Vec<ProviderHit>, String> {
        if terms.is_empty() {
            return Ok(Vec::new());
        }
        let allowed = |doc: &DocumentRecord| {
            let host = normalize_domain(&doc.source_domain);
            whitelist
                .iter()
                .any(|d| host == *d || host.ends_with(&format!(".{d}")))
        };
        let hits = self
            .index
            .search_filtered(terms, &self.model, k, allowed)
            .map_err(|e| e.to_string())?;
        Ok(hits
            .into_iter()
            .filter_map(|h| self.index.document(&h.doc_id))
            .map(|doc| ProviderHit {
                url: doc_url(doc),
                title: doc.title.clone(),
                body: doc.body.clone(),
            })
            .collect())
    }
}

/// The doc_id when it is already a URL, otherwise a synthetic URL on the
/// document's domain.
pub fn doc_url(doc: &DocumentRecord) -> String {
    if url::Url::parse(&doc.doc_id).is_ok() {
        doc.doc_id.clone()
    } else {
        format!("https://{}/{}", doc.source_domain, doc.doc_id)
    }
}

#[cfg(feature = "http")]
pub use http::HttpJsonProvider;

#[cfg(feature = "http")]
mod http {
    use super::*;

    pub const API_KEY_ENV: &str = "FAKTA_SEARCH_KEY";

    /// Generic JSON search API adapter.
    ///
    /// Issues `GET <base_url>?q=<terms>&sites=<comma list>&num=<k>&key=<key>`
    /// and expects `{"items": [{"url"|"link", "title", "snippet"|"body"}]}`.
    #[derive(Debug, Clone)]
    pub struct HttpJsonProvider {
        base_url: String,
        api_key: Option<String>,
        agent: ureq::Agent,
    }

    #[derive(Deserialize)]
    struct Response {
        #[serde(default)]
        items: Vec<Item>,
    }

    #[derive(Deserialize)]
    struct Item {
        #[serde(alias = "link")]
        url: String,
        #[serde(default)]
        title: String,
        #[serde(default, alias = "snippet")]
        body: String,
    }

    impl HttpJsonProvider {
        pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
            let agent = ureq::Agent::config_builder()
                .timeout_global(Some(std::time::Duration::from_secs(10)))
                .build()
                .into();
            HttpJsonProvider {
                base_url: base_url.into(),
                api_key,
                agent,
            }
        }

        /// Reads the key from `FAKTA_SEARCH_KEY`.
        pub fn from_env(base_url: impl Into<String>) -> Self {
            HttpJsonProvider::new(base_url, std::env::var(API_KEY_ENV).ok())
        }

        pub fn parse_response(body: &str) -> Result<Vec<ProviderHit>, String> {
            let resp: Response = serde_json::from_str(body).map_err(|e| e.to_string())?;
            Ok(resp
                .items
                .into_iter()
                .map(|i| ProviderHit {
                    url: i.url,
                    title: i.title,
                    body: i.body,
                })
                .collect())
        }
    }

    impl ExternalSearchProvider for HttpJsonProvider {
        fn search(&self, terms: &[String], whitelist: &[String], k: usize) -> Result<Vec<ProviderHit>, String> {
            let mut req = self
                .agent
                .get(&self.base_url)
                .query("q", terms.join(" "))
                .query("sites", whitelist.join(","))
                .query("num", k.to_string());
            if let Some(key) = &self.api_key {
                req = req.query("key", key);
            }
            let mut resp = req.call().map_err(|e| e.to_string())?;
            let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
            HttpJsonProvider::parse_response(&body)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn registry() -> SourceRegistry {
        SourceRegistry::parse_csv(
            "domain,reliability\nexample-news.com,high\nen.wikipedia.org,wikipedia\nrumor-mill.net,low\n",
        )
        .unwrap()
    }

    #[test]
    fn registry_rows() {
        let reg = registry();
        assert_eq!(reg.classify_host("example-news.com"), Some(Reliability::High));
        assert_eq!(reg.classify_host("en.wikipedia.org"), Some(Reliability::Wikipedia));
        let err = SourceRegistry::parse_csv("domain,reliability\nfoo.com,bogus\n").unwrap_err();
        assert!(matches!(err, SourceError::Parse { line: 2, .. }), "{err}");
        assert!(SourceRegistry::parse_csv("nope\n").is_err());
    }

    #[test]
    fn duplicates_keep_last() {
        let reg = SourceRegistry::parse_csv("domain,reliability\na.com,high\nA.com,low\n").unwrap();
        assert_eq!(reg.len(), 1);
        assert_eq!(reg.classify_host("a.com"), Some(Reliability::Low));
    }

    #[test]
    fn classify_urls() {
        let reg = registry();
        assert_eq!(
            reg.classify_domain("https://news.example-news.com/a").unwrap(),
            Some(Reliability::High)
        );
        assert_eq!(reg.classify_domain("https://www.example-news.com/").unwrap(), Some(Reliability::High));
        assert_eq!(reg.classify_domain("https://elsewhere.org/x").unwrap(), None);
        assert!(matches!(reg.classify_domain("not a url"), Err(SourceError::InvalidUrl(_))));
        // suffix match respects label boundaries
        assert_eq!(reg.classify_host("badexample-news.com"), None);
    }

    struct Fixed(Vec<ProviderHit>);

    impl ExternalSearchProvider for Fixed {
        fn search(&self, _: &[String], _: &[String], _: usize) -> Result<Vec<ProviderHit>, String> {
            Ok(self.0.clone())
        }
    }

    fn ph(url: &str) -> ProviderHit {
        ProviderHit {
            url: url.into(),
            title: "t".into(),
            body: "b".into(),
        }
    }

    #[test]
    fn reciprocal_rank_scores() {
        let reg = SourceRegistry::parse_csv("domain,reliability\na.com,high\n").unwrap();
        let p = Fixed(vec![ph("https://a.com/1"), ph("https://a.com/2"), ph("https://a.com/3")]);
        let hits = external_search(&p, &reg, &Query::from_terms(["x"]), Reliability::High, 5).unwrap();
        let scores: Vec<f64> = hits.iter().map(|h| h.scored.score_init).collect();
        assert_eq!(scores, [1.0, 0.5, 1.0 / 3.0]);
        assert_eq!(hits[2].document.source_domain, "a.com");
    }

    #[test]
    fn off_class_hits_dropped() {
        let reg = registry();
        let p = Fixed(vec![
            ph("https://rumor-mill.net/x"),
            ph("https://example-news.com/y"),
            ph("garbage"),
        ]);
        let hits = external_search(&p, &reg, &Query::from_terms(["x"]), Reliability::High, 5).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].scored.doc_id, "https://example-news.com/y");
        assert_eq!(hits[0].scored.rank, 1);
        let one = external_search(
            &Fixed(vec![ph("https://example-news.com/1"), ph("https://example-news.com/2")]),
            &reg,
            &Query::from_terms(["x"]),
            Reliability::High,
            1,
        )
        .unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn stub_provider_fixtures() {
        let dir = tempfile::tempdir().unwrap();
        let stub = StubProvider::new(dir.path());
        let reg = registry();
        let q = Query::from_terms(["alpha", "beta"]);
        assert!(external_search(&stub, &reg, &q, Reliability::Low, 3).unwrap().is_empty());

        let mut f = std::fs::File::create(stub.fixture_path(&q.terms)).unwrap();
        writeln!(f, r#"{{"url":"https://rumor-mill.net/a","title":"A","snippet":"alpha"}}"#).unwrap();
        writeln!(f, r#"{{"url":"https://example-news.com/b","title":"B","body":"beta"}}"#).unwrap();
        let hits = external_search(&stub, &reg, &q, Reliability::Low, 3).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].document.body, "alpha");

        let failing = Query::from_terms(["timeout"]);
        std::fs::write(stub.fixture_path(&failing.terms), "{\"error\":\"timed out\"}\n").unwrap();
        match external_search(&stub, &reg, &failing, Reliability::Low, 3) {
            Err(SourceError::Provider { channel, msg }) => {
                assert_eq!(channel, Reliability::Low);
                assert_eq!(msg, "timed out");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_channel_is_an_error() {
        let reg = SourceRegistry::parse_csv("domain,reliability\na.com,high\n").unwrap();
        let err = external_search(&Fixed(vec![]), &reg, &Query::from_terms(["x"]), Reliability::Low, 3);
        assert!(matches!(err, Err(SourceError::EmptyChannel(Reliability::Low))));
    }

    #[test]
    fn index_provider_respects_whitelist() {
        let index = Index::build([
            DocumentRecord::new("https://a.com/1", "Cats", "cat cat", "a.com"),
            DocumentRecord::new("d2", "Cats too", "cat", "news.b.com"),
        ])
        .unwrap();
        let p = IndexProvider::new(Arc::new(index), RetrievalModel::bm25());
        let hits = p.search(&["cat".into()], &["b.com".into()], 5).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].url, "https://news.b.com/d2");
    }

    #[test]
    fn query_keys_are_stable() {
        assert_eq!(query_key(&["a".into(), "b".into()]), query_key(&["a".into(), "b".into()]));
        assert_ne!(query_key(&["a".into()]), query_key(&["b".into()]));
        assert_eq!(fnv1a(b"", 0), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a(b"a", 0), 0xaf63_dc4c_8601_ec8c);
    }

    #[cfg(feature = "http")]
    #[test]
    fn http_response_parsing() {
        let hits = HttpJsonProvider::parse_response(
            r#"{"items":[{"link":"https://a.com/x","title":"T","snippet":"S"}]}"#,
        )
        .unwrap();
        assert_eq!(hits[0].url, "https://a.com/x");
        assert_eq!(hits[0].body, "S");
        assert!(HttpJsonProvider::parse_response("{}").unwrap().is_empty());
        assert!(HttpJsonProvider::parse_response("nope").is_err());
    }
}
