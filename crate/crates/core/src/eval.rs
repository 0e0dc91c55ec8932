//! Evaluation harness: recall@K for retrieval, per-label and macro F1 for
//! verdicts, NEI threshold tuning, and a synthetic retrieval corpus.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::{ClaimOutcome, LabelMode, Pipeline, PipelineConfig, PipelineError, VerdictLabel, VerdictRule};
use crate::query::query_for_claim;
use crate::rerank::{rerank, CountMode};
use crate::retrieval::{index_terms, DocumentRecord, Index, IndexError, RetrievalModel};
use crate::text::{analyze, extract_named_entities, Resources};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0}")]
    Argument(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Validation { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeverClaim {
    pub id: String,
    pub claim: String,
    pub label: VerdictLabel,
    pub evidence: Vec<String>,
}

#[derive(Deserialize)]
struct RawClaim {
    id: serde_json::Value,
    claim: String,
    label: String,
    #[serde(default)]
    evidence: Vec<String>,
}

fn parse_label(s: &str) -> Option<VerdictLabel> {
    match s.trim().to_ascii_uppercase().as_str() {
        "SUPPORTED" | "SUPPORTS" | "SUP" => Some(VerdictLabel::SUP),
        "REFUTED" | "REFUTES" | "REF" => Some(VerdictLabel::REF),
        "NOT ENOUGH INFO" | "NEI" => Some(VerdictLabel::NEI),
        _ => None,
    }
}

fn label_name(label: VerdictLabel) -> &'static str {
    match label {
        VerdictLabel::SUP => "SUPPORTED",
        VerdictLabel::REF => "REFUTED",
        VerdictLabel::NEI => "NOT ENOUGH INFO",
    }
}

/// Parses FEVER-style JSON lines: `id`, `claim`, `label`, `evidence`.
pub fn read_fever<R: BufRead>(reader: R) -> Result<Vec<FeverClaim>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawClaim = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let label = parse_label(&raw.label).ok_or_else(|| EvalError::Parse {
            line: line_no,
            msg: format!("unknown label {:?}", raw.label),
        })?;
        match (label, raw.evidence.is_empty()) {
            (VerdictLabel::NEI, false) => {
                return Err(EvalError::Validation {
                    line: line_no,
                    msg: "NOT ENOUGH INFO claim lists evidence".into(),
                })
            }
            (VerdictLabel::SUP | VerdictLabel::REF, true) => {
                return Err(EvalError::Validation {
                    line: line_no,
                    msg: format!("{} claim has no evidence", label_name(label)),
                })
            }
            _ => {}
        }
        let id = match raw.id {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        };
        out.push(FeverClaim {
            id,
            claim: raw.claim,
            label,
            evidence: raw.evidence,
        });
    }
    Ok(out)
}

pub fn load_fever(path: impl AsRef<Path>) -> Result<Vec<FeverClaim>, EvalError> {
    read_fever(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn write_fever<W: Write>(mut w: W, claims: &[FeverClaim]) -> std::io::Result<()> {
    for c in claims {
        let line = serde_json::json!({
            "id": c.id,
            "claim": c.claim,
            "label": label_name(c.label),
            "evidence": c.evidence,
        });
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Fraction of claims with at least one gold document in the top `k`.
pub fn recall_at_k<S: AsRef<str>>(results: &[Vec<S>], gold: &[Vec<S>], k: usize) -> Result<f64, EvalError> {
    if k < 1 {
        return Err(EvalError::Argument("K must be at least 1".into()));
    }
    if results.len() != gold.len() {
        return Err(EvalError::Argument(format!(
            "{} result lists for {} claims",
            results.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(EvalError::Argument("no claims".into()));
    }
    if gold.iter().any(|g| g.is_empty()) {
        return Err(EvalError::Argument("every claim needs gold evidence".into()));
    }
    let hits = results
        .iter()
        .zip(gold)
        .filter(|(ranked, g)| {
            let g: HashSet<&str> = g.iter().map(AsRef::as_ref).collect();
            ranked.iter().take(k).any(|d| g.contains(d.as_ref()))
        })
        .count();
    Ok(hits as f64 / gold.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: BTreeMap<VerdictLabel, f64>,
    pub recall: BTreeMap<VerdictLabel, f64>,
    pub f1: BTreeMap<VerdictLabel, f64>,
    pub f1_macro: f64,
    pub accuracy: f64,
    /// `confusion[gold][predicted]`, labels in SUP, REF, NEI order.
    pub confusion: [[usize; 3]; 3],
}

impl Metrics {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<6} {:>9} {:>9} {:>9}", "label", "precision", "recall", "f1");
        for l in VerdictLabel::ALL {
            let _ = writeln!(
                s,
                "{:<6} {:>9.4} {:>9.4} {:>9.4}",
                l.as_str(),
                self.precision[&l],
                self.recall[&l],
                self.f1[&l]
            );
        }
        let _ = writeln!(s, "macro-F1 {:.4}  accuracy {:.4}", self.f1_macro, self.accuracy);
        let _ = writeln!(s, "confusion (rows gold, columns predicted: SUP REF NEI)");
        for (l, row) in VerdictLabel::ALL.iter().zip(self.confusion) {
            let _ = writeln!(s, "{:<6} {:>5} {:>5} {:>5}", l.as_str(), row[0], row[1], row[2]);
        }
        s
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-label precision, recall and F1, macro-F1 over the labels present in
/// `gold`, accuracy and the confusion matrix.
pub fn classification_metrics(preds: &[VerdictLabel], gold: &[VerdictLabel]) -> Result<Metrics, EvalError> {
    if preds.len() != gold.len() {
        return Err(EvalError::Argument(format!(
            "{} predictions for {} gold labels",
            preds.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(EvalError::Argument("no predictions".into()));
    }
    let mut confusion = [[0usize; 3]; 3];
    for (p, g) in preds.iter().zip(gold) {
        confusion[g.index()][p.index()] += 1;
    }
    let mut m = Metrics {
        confusion,
        ..Metrics::default()
    };
    let mut macro_sum = 0.0;
    let mut present = 0;
    for l in VerdictLabel::ALL {
        let i = l.index();
        let tp = confusion[i][i];
        let predicted: usize = (0..3).map(|g| confusion[g][i]).sum();
        let actual: usize = confusion[i].iter().sum();
        let p = ratio(tp, predicted);
        let r = ratio(tp, actual);
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        m.precision.insert(l, p);
        m.recall.insert(l, r);
        m.f1.insert(l, f1);
        if actual > 0 {
            macro_sum += f1;
            present += 1;
        }
    }
    m.f1_macro = macro_sum / present as f64;
    let correct: usize = (0..3).map(|i| confusion[i][i]).sum();
    m.accuracy = ratio(correct, gold.len());
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTuning {
    pub tau: f64,
    pub f1_macro: f64,
    /// (τ, macro-F1) for every grid point, in grid order.
    pub sweep: Vec<(f64, f64)>,
}

/// Picks the grid point with the best 3-label macro-F1 over precomputed
/// outcomes; ties go to the smaller τ.
pub fn tune_threshold_outcomes(
    outcomes: &[ClaimOutcome],
    gold: &[VerdictLabel],
    grid: &[f64],
) -> Result<ThresholdTuning, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::Argument("threshold grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(EvalError::Argument(format!("invalid threshold {bad}")));
    }
    if outcomes.len() != gold.len() {
        return Err(EvalError::Argument(format!(
            "{} outcomes for {} gold labels",
            outcomes.len(),
            gold.len()
        )));
    }
    let mut sweep = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &tau in grid {
        let rule = VerdictRule {
            label_mode: LabelMode::ThreeLabel,
            nei_threshold: tau,
        };
        let preds: Vec<VerdictLabel> = outcomes.iter().map(|o| o.verdict(rule)).collect();
        let f = classification_metrics(&preds, gold)?.f1_macro;
        sweep.push((tau, f));
        best = match best {
            Some((bt, bf)) if bf > f || (bf == f && bt <= tau) => Some((bt, bf)),
            _ => Some((tau, f)),
        };
    }
    let (tau, f1_macro) = best.expect("grid is non-empty");
    Ok(ThresholdTuning { tau, f1_macro, sweep })
}

/// Runs the pipeline in 3-label mode once per dev claim and tunes τ over
/// the outcomes.
pub fn tune_threshold(
    dev: &[FeverClaim],
    pipeline: &Pipeline,
    config: &PipelineConfig,
    grid: &[f64],
) -> Result<ThresholdTuning, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::Argument("threshold grid is empty".into()));
    }
    let cfg = PipelineConfig {
        label_mode: LabelMode::ThreeLabel,
        ..config.clone()
    };
    let outcomes = dev
        .iter()
        .map(|c| pipeline.outcome(&c.claim, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let gold: Vec<VerdictLabel> = dev.iter().map(|c| c.label).collect();
    tune_threshold_outcomes(&outcomes, &gold, grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelinePrediction {
    pub id: String,
    pub gold: VerdictLabel,
    pub predicted: VerdictLabel,
    pub top_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineEval {
    pub label_mode: LabelMode,
    pub nei_threshold: f64,
    pub metrics: Metrics,
    pub predictions: Vec<PipelinePrediction>,
}

/// Full-pipeline verdict metrics. In 2-label mode NEI gold claims are left
/// out.
pub fn run_pipeline_eval(
    claims: &[FeverClaim],
    pipeline: &Pipeline,
    config: &PipelineConfig,
) -> Result<PipelineEval, EvalError> {
    let claims: Vec<&FeverClaim> = claims
        .iter()
        .filter(|c| config.label_mode == LabelMode::ThreeLabel || c.label != VerdictLabel::NEI)
        .collect();
    let mut predictions = Vec::with_capacity(claims.len());
    for c in claims {
        let r = pipeline.check_claim_with(&c.claim, config)?;
        predictions.push(PipelinePrediction {
            id: c.id.clone(),
            gold: c.label,
            predicted: r.verdict.label,
            top_score: r.verdict.top_score,
        });
    }
    let preds: Vec<VerdictLabel> = predictions.iter().map(|p| p.predicted).collect();
    let gold: Vec<VerdictLabel> = predictions.iter().map(|p| p.gold).collect();
    Ok(PipelineEval {
        label_mode: config.label_mode,
        nei_threshold: config.nei_threshold,
        metrics: classification_metrics(&preds, &gold)?,
        predictions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryVariant {
    /// Every claim word as a query term.
    Raw,
    QueryGen,
    /// Query generation followed by title re-ranking.
    Reranked,
}

impl QueryVariant {
    pub const ALL: [QueryVariant; 3] = [QueryVariant::Raw, QueryVariant::QueryGen, QueryVariant::Reranked];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryVariant::Raw => "raw",
            QueryVariant::QueryGen => "query-gen",
            QueryVariant::Reranked => "reranked",
        }
    }
}

impl FromStr for QueryVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QueryVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s.trim().to_ascii_lowercase().replace('_', "-"))
            .ok_or_else(|| format!("unknown variant {s:?}; expected raw, query-gen or reranked"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalRow {
    pub model: String,
    pub variant: QueryVariant,
    /// Recall at each of the table's K values.
    pub recall: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalTable {
    pub ks: Vec<usize>,
    pub claims: usize,
    pub rows: Vec<RetrievalRow>,
}

impl RetrievalTable {
    pub fn recall(&self, model: &str, variant: QueryVariant, k: usize) -> Option<f64> {
        let col = self.ks.iter().position(|&x| x == k)?;
        self.rows
            .iter()
            .find(|r| r.model == model && r.variant == variant)
            .map(|r| r.recall[col])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("model,variant");
        for k in &self.ks {
            let _ = write!(s, ",R@{k}");
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{}", r.model, r.variant.as_str());
            for v in &r.recall {
                let _ = write!(s, ",{v:.4}");
            }
            s.push('\n');
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mw = self.rows.iter().map(|r| r.model.len()).max().unwrap_or(5).max(5);
        let mut s = format!("{:<mw$}  {:<9}", "model", "variant");
        for k in &self.ks {
            let _ = write!(s, "  {:>6}", format!("R@{k}"));
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{:<mw$}  {:<9}", r.model, r.variant.as_str());
            for v in &r.recall {
                let _ = write!(s, "  {:>6.2}", v * 100.0);
            }
            s.push('\n');
        }
        s
    }
}

fn dedup(terms: Vec<String>) -> Vec<String> {
    let mut seen = HashSet::new();
    terms.into_iter().filter(|t| seen.insert(t.clone())).collect()
}

/// First-stage hits the reranked variant reorders, unless `depth` is larger.
pub const RERANK_POOL: usize = 20;

/// Ranked doc ids for one claim under one model and variant, at most
/// `depth` long.
pub fn rank_for_claim(
    index: &Index,
    claim: &str,
    model: &RetrievalModel,
    variant: QueryVariant,
    depth: usize,
) -> Result<Vec<String>, EvalError> {
    let tokens = analyze(claim);
    let terms = match variant {
        QueryVariant::Raw => dedup(index_terms(claim)),
        QueryVariant::QueryGen | QueryVariant::Reranked => {
            query_for_claim(&tokens, &extract_named_entities(&tokens)).terms
        }
    };
    if terms.is_empty() {
        return Ok(Vec::new());
    }
    let pool = if variant == QueryVariant::Reranked { depth.max(RERANK_POOL) } else { depth };
    let hits = index.search(&terms, model, pool)?;
    let mut hits = if variant == QueryVariant::Reranked {
        let titles: HashMap<String, String> = hits
            .iter()
            .filter_map(|h| index.document(&h.doc_id).map(|d| (h.doc_id.clone(), d.title.clone())))
            .collect();
        rerank(&tokens, hits, &titles, CountMode::Multiset)
    } else {
        hits
    };
    hits.truncate(depth);
    Ok(hits.into_iter().map(|h| h.doc_id).collect())
}

/// Recall@K for every (model, variant) pair over the claims that have
/// evidence. Rows follow `models` then `variants` order.
pub fn run_retrieval_eval(
    index: &Index,
    claims: &[FeverClaim],
    models: &[RetrievalModel],
    variants: &[QueryVariant],
    ks: &[usize],
) -> Result<RetrievalTable, EvalError> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(EvalError::Argument("K values must be at least 1".into()));
    }
    let claims: Vec<&FeverClaim> = claims.iter().filter(|c| !c.evidence.is_empty()).collect();
    if claims.is_empty() {
        return Err(EvalError::Argument("no claims with evidence".into()));
    }
    let depth = *ks.iter().max().expect("ks is non-empty");
    let gold: Vec<Vec<String>> = claims.iter().map(|c| c.evidence.clone()).collect();
    let mut rows = Vec::new();
    for model in models {
        for &variant in variants {
            let ranked = crate::map_ordered(&claims, |c| rank_for_claim(index, &c.claim, model, variant, depth))
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?;
            let recall = ks
                .iter()
                .map(|&k| recall_at_k(&ranked, &gold, k))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(RetrievalRow {
                model: model.name(),
                variant,
                recall,
            });
        }
    }
    Ok(RetrievalTable {
        ks: ks.to_vec(),
        claims: claims.len(),
        rows,
    })
}

/// Random distractor documents for NEI claims, `per_claim` each, drawn
/// without replacement per claim from `doc_ids`.
pub fn sample_nei_evidence(
    claims: &[FeverClaim],
    doc_ids: &[String],
    per_claim: usize,
    seed: u64,
) -> Vec<(String, Vec<String>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    claims
        .iter()
        .filter(|c| c.label == VerdictLabel::NEI)
        .map(|c| {
            let picked = doc_ids.choose_multiple(&mut rng, per_claim).cloned().collect();
            (c.id.clone(), picked)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSet {
    pub documents: Vec<DocumentRecord>,
    pub claims: Vec<FeverClaim>,
}

pub const SYNTHETIC_CLAIMS: usize = 50;
pub const SYNTHETIC_FULL_TITLES: usize = 40;
pub const SYNTHETIC_DISTRACTORS: usize = 3;

const FILLER: &[&str] = &[
    "It was described in a regional survey.",
    "Several accounts mention it in passing.",
    "The earliest records are incomplete.",
    "Visitors rarely reach the area in winter.",
    "Local archives hold a few photographs.",
    "Little else is known about its history.",
];

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "m", "n", "p", "r", "t", "v", "z"];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
    const CODAS: &[&str] = &["k", "m", "n", "r", "t", "x", "z"];
    let mut w = String::new();
    for _ in 0..3 {
        w.push_str(ONSETS.choose(rng).expect("non-empty"));
        w.push_str(VOWELS.choose(rng).expect("non-empty"));
    }
    w.push_str(CODAS.choose(rng).expect("non-empty"));
    w
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

/// Fifty claims over four invented keywords each, with one gold document
/// per claim whose title carries the keywords (all four for the first 40
/// claims, two for the rest) and three distractors under unrelated
/// titles. Half the distractors repeat every keyword in a short body, the
/// rest mention two keywords once. Document ids are assigned
/// after shuffling.
pub fn synthetic_retrieval_set(seed: u64) -> SyntheticSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = Resources::bundled();
    let mut used = HashSet::new();
    let mut fresh = |rng: &mut ChaCha8Rng| loop {
        let w = pseudo_word(rng);
        if !res.tags.contains_key(&w) && used.insert(w.clone()) {
            return w;
        }
    };

    let mut docs: Vec<(usize, bool, String, String)> = Vec::new();
    let mut claim_texts = Vec::new();
    for i in 0..SYNTHETIC_CLAIMS {
        let kw: Vec<String> = (0..4).map(|_| fresh(&mut rng)).collect();
        claim_texts.push(format!("The {} {} is in the {} {}.", kw[0], kw[1], kw[2], kw[3]));

        let title = if i < SYNTHETIC_FULL_TITLES {
            kw.iter().map(|w| capitalize(w)).collect::<Vec<_>>().join(" ")
        } else {
            format!("{} {} {}", capitalize(&kw[0]), capitalize(&kw[2]), capitalize(&fresh(&mut rng)))
        };
        let mut body = vec![format!("The {} {} lies in the {} {}.", kw[0], kw[1], kw[2], kw[3])];
        for _ in 0..rng.random_range(3..=5) {
            body.push(FILLER.choose(&mut rng).expect("non-empty").to_string());
        }
        docs.push((i, true, title, body.join(" ")));

        for _ in 0..SYNTHETIC_DISTRACTORS {
            let title = format!("{} {}", capitalize(&fresh(&mut rng)), capitalize(&fresh(&mut rng)));
            let mut words: Vec<String> = Vec::new();
            if rng.random_bool(0.5) {
                for w in &kw {
                    for _ in 0..rng.random_range(2..=4) {
                        words.push(w.clone());
                    }
                }
            } else {
                words.extend(kw.choose_multiple(&mut rng, 2).cloned());
                words.push(fresh(&mut rng));
            }
            words.shuffle(&mut rng);
            let mut body = format!("{}.", capitalize(&words.join(" ")));
            if rng.random_bool(0.5) {
                body.push(' ');
                body.push_str(FILLER.choose(&mut rng).expect("non-empty"));
            }
            docs.push((i, false, title, body));
        }
    }
    docs.shuffle(&mut rng);

    let mut gold_ids = vec![String::new(); SYNTHETIC_CLAIMS];
    let documents = docs
        .into_iter()
        .enumerate()
        .map(|(n, (claim, is_gold, title, body))| {
            let id = format!("doc-{n:03}");
            if is_gold {
                gold_ids[claim] = id.clone();
            }
            DocumentRecord::new(id, title, body, "")
        })
        .collect();
    let claims = claim_texts
        .into_iter()
        .zip(gold_ids)
        .enumerate()
        .map(|(i, (claim, gold))| FeverClaim {
            id: format!("syn-{i:02}"),
            claim,
            label: VerdictLabel::SUP,
            evidence: vec![gold],
        })
        .collect();
    SyntheticSet { documents, claims }
}

#[cfg(test)]
mod tests {
    use super::*;
    use VerdictLabel::*;

    #[test]
    fn fever_parsing() {
        let data = r#"{"id": 1, "claim": "A", "label": "SUPPORTED", "evidence": ["d1"]}
{"id": "x", "claim": "B", "label": "refuted", "evidence": ["d2", "d3"]}
{"id": 3, "claim": "C", "label": "Not Enough Info", "evidence": []}
"#;
        let claims = read_fever(data.as_bytes()).unwrap();
        assert_eq!(claims.len(), 3);
        assert_eq!(claims[0].id, "1");
        assert_eq!(claims.iter().map(|c| c.label).collect::<Vec<_>>(), [SUP, REF, NEI]);
        assert!(read_fever("".as_bytes()).unwrap().is_empty());

        let bad = r#"{"id": 3, "claim": "C", "label": "NOT ENOUGH INFO", "evidence": ["d"]}"#;
        assert!(matches!(read_fever(bad.as_bytes()), Err(EvalError::Validation { line: 1, .. })));
        let unknown = "\n{\"id\": 3, \"claim\": \"C\", \"label\": \"MAYBE\"}";
        assert!(matches!(read_fever(unknown.as_bytes()), Err(EvalError::Parse { line: 2, .. })));

        let mut buf = Vec::new();
        write_fever(&mut buf, &claims).unwrap();
        let mut again = read_fever(buf.as_slice()).unwrap();
        again[0].id = "1".into();
        assert_eq!(again, claims);
    }

    #[test]
    fn recall_examples() {
        let gold = vec![vec!["g1".to_string()], vec!["g2".to_string()]];
        let mut r1: Vec<String> = vec!["g1".into()];
        r1.extend((0..10).map(|i| format!("x{i}")));
        let mut r2: Vec<String> = (0..6).map(|i| format!("y{i}")).collect();
        r2.push("g2".into());
        let results = vec![r1, r2];
        assert_eq!(recall_at_k(&results, &gold, 5).unwrap(), 0.5);
        assert_eq!(recall_at_k(&results, &gold, 10).unwrap(), 1.0);
        assert_eq!(recall_at_k(&results, &gold, 1).unwrap(), 0.5);
        assert!(matches!(recall_at_k(&results, &gold, 0), Err(EvalError::Argument(_))));
        let none = vec![vec!["z".to_string()], vec![]];
        assert_eq!(recall_at_k(&none, &gold, 20).unwrap(), 0.0);
    }

    #[test]
    fn metrics_examples() {
        let gold = [SUP, REF, NEI, SUP];
        let m = classification_metrics(&gold, &gold).unwrap();
        assert_eq!(m.f1_macro, 1.0);
        assert_eq!(m.accuracy, 1.0);
        assert!(m.f1.values().all(|&f| f == 1.0));

        let gold: Vec<VerdictLabel> = [SUP, REF, NEI].iter().flat_map(|l| [*l; 10]).collect();
        let m = classification_metrics(&[SUP; 30], &gold).unwrap();
        assert!((m.accuracy - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.f1[&SUP] - 0.5).abs() < 1e-15);
        assert!((m.f1_macro - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(m.confusion[1][0], 10);

        assert!(classification_metrics(&[], &[]).is_err());
        assert!(classification_metrics(&[SUP], &[SUP, REF]).is_err());

        let two = classification_metrics(&[SUP, SUP], &[SUP, REF]).unwrap();
        assert!((two.f1_macro - (2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    fn outcome(top: f64, agree: f64, disagree: f64) -> ClaimOutcome {
        use crate::stance::StanceDistribution;
        ClaimOutcome {
            top_score: top,
            aggregate: Some(StanceDistribution::from_flattened([agree, disagree, 0.0, 1.0 - agree - disagree])),
        }
    }

    #[test]
    fn tuning_edge_cases() {
        let outs = [outcome(1.0, 0.6, 0.1), outcome(3.0, 0.6, 0.1)];
        let gold = [NEI, SUP];
        assert!(matches!(tune_threshold_outcomes(&outs, &gold, &[]), Err(EvalError::Argument(_))));
        assert_eq!(tune_threshold_outcomes(&outs, &gold, &[0.7]).unwrap().tau, 0.7);
        let t = tune_threshold_outcomes(&outs, &gold, &[3.5, 0.5, 2.0, 1.5]).unwrap();
        assert_eq!(t.tau, 1.5);
        assert_eq!(t.sweep.len(), 4);

        let all_nei = [outcome(0.8, 0.6, 0.1), outcome(1.2, 0.1, 0.6)];
        let t = tune_threshold_outcomes(&all_nei, &[NEI, NEI], &[0.5, 1.0, 1.5, 2.0]).unwrap();
        assert_eq!(t.tau, 1.5);
        assert_eq!(t.f1_macro, 1.0);
    }

    #[test]
    fn nei_sampling_is_seeded() {
        let claims = vec![
            FeverClaim { id: "a".into(), claim: "x".into(), label: NEI, evidence: vec![] },
            FeverClaim { id: "b".into(), claim: "y".into(), label: SUP, evidence: vec!["d1".into()] },
            FeverClaim { id: "c".into(), claim: "z".into(), label: NEI, evidence: vec![] },
        ];
        let ids: Vec<String> = (0..20).map(|i| format!("d{i}")).collect();
        let a = sample_nei_evidence(&claims, &ids, 3, 7);
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|(_, d)| d.len() == 3 && d.iter().collect::<HashSet<_>>().len() == 3));
        assert_eq!(a, sample_nei_evidence(&claims, &ids, 3, 7));
        assert_ne!(a, sample_nei_evidence(&claims, &ids, 3, 8));
    }

    #[test]
    fn variant_names() {
        for v in QueryVariant::ALL {
            assert_eq!(v.as_str().parse::<QueryVariant>().unwrap(), v);
        }
        assert!("fancy".parse::<QueryVariant>().is_err());
    }
}
