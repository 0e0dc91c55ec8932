use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::models::{RetrievalModel, TermStats};
use crate::text::tokenize;

const MAGIC: &[u8; 6] = b"FCIDX\0";
const FORMAT_VERSION: u32 = 1;
pub const INDEX_FILE: &str = "index.bin";

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate doc_id {0:?}")]
    DuplicateId(String),
    #[error("document {0:?} has an empty body")]
    EmptyBody(String),
    #[error("unknown doc_id {0:?}")]
    NotFound(String),
    #[error("query has no terms")]
    EmptyQuery,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("line {line}: {msg}")]
    Corpus { line: usize, msg: String },
    #[error("index format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub source_domain: String,
}

impl DocumentRecord {
    pub fn new(
        doc_id: impl Into<String>,
        title: impl Into<String>,
        body: impl Into<String>,
        source_domain: impl Into<String>,
    ) -> Self {
        DocumentRecord {
            doc_id: doc_id.into(),
            title: title.into(),
            body: body.into(),
            source_domain: source_domain.into(),
        }
    }

    /// Text that gets indexed: title, then body.
    pub fn indexed_text(&self) -> String {
        if self.title.is_empty() {
            self.body.clone()
        } else {
            format!("{}\n{}", self.title, self.body)
        }
    }
}

/// Normalized word tokens, the unit of indexing and querying.
pub fn index_terms(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.is_word())
        .map(|t| t.normalized)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub doc_count: u64,
    pub total_tokens: u64,
    pub avg_doc_len: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq)]
struct TermEntry {
    ctf: u64,
    postings: Vec<Posting>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDocument {
    pub doc_id: String,
    pub score_init: f64,
    /// 1-based position in the first-stage ranking.
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_rank: Option<f64>,
}

/// Immutable inverted index over title+body tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    docs: Vec<DocumentRecord>,
    doc_lens: Vec<u32>,
    ids: HashMap<String, u32>,
    terms: HashMap<String, TermEntry>,
    stats: IndexStats,
}

impl Index {
    pub fn build<I>(docs: I) -> Result<Index, IndexError>
    where
        I: IntoIterator<Item = DocumentRecord>,
    {
        let mut builder = IndexBuilder::default();
        for doc in docs {
            builder.add(doc)?;
        }
        Ok(builder.finish())
    }

    pub fn stats(&self) -> IndexStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> &[DocumentRecord] {
        &self.docs
    }

    pub fn document(&self, doc_id: &str) -> Option<&DocumentRecord> {
        self.ids.get(doc_id).map(|&i| &self.docs[i as usize])
    }

    pub fn doc_len(&self, doc_id: &str) -> Option<u32> {
        self.ids.get(doc_id).map(|&i| self.doc_lens[i as usize])
    }

    pub fn df(&self, term: &str) -> u64 {
        self.terms.get(term).map_or(0, |e| e.postings.len() as u64)
    }

    pub fn ctf(&self, term: &str) -> u64 {
        self.terms.get(term).map_or(0, |e| e.ctf)
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.terms.get(term).map_or(&[], |e| e.postings.as_slice())
    }

    fn term_stats(&self, entry: &TermEntry, doc: u32, tf: u32) -> TermStats {
        TermStats {
            tf: tf as f64,
            dl: self.doc_lens[doc as usize] as f64,
            df: entry.postings.len() as f64,
            ctf: entry.ctf as f64,
            n: self.stats.doc_count as f64,
            total: self.stats.total_tokens as f64,
            avgdl: self.stats.avg_doc_len,
        }
    }

    /// Model score of one document for the given query terms.
    pub fn score<S: AsRef<str>>(
        &self,
        model: &RetrievalModel,
        terms: &[S],
        doc_id: &str,
    ) -> Result<f64, IndexError> {
        let doc = *self
            .ids
            .get(doc_id)
            .ok_or_else(|| IndexError::NotFound(doc_id.to_string()))?;
        let mut score = 0.0;
        for term in terms {
            let Some(entry) = self.terms.get(term.as_ref()) else {
                continue;
            };
            if let Ok(pos) = entry.postings.binary_search_by_key(&doc, |p| p.doc) {
                let tf = entry.postings[pos].tf;
                score += model.term_score(&self.term_stats(entry, doc, tf));
            }
        }
        Ok(score)
    }

    /// Top-`k` documents sharing at least one term with the query, by score
    /// descending and then doc_id ascending.
    pub fn search<S: AsRef<str>>(
        &self,
        terms: &[S],
        model: &RetrievalModel,
        k: usize,
    ) -> Result<Vec<ScoredDocument>, IndexError> {
        self.search_filtered(terms, model, k, |_| true)
    }

    /// Like [`Index::search`], restricted to documents accepted by `filter`.
    /// Collection statistics always cover the whole index.
    pub fn search_filtered<S, F>(
        &self,
        terms: &[S],
        model: &RetrievalModel,
        k: usize,
        filter: F,
    ) -> Result<Vec<ScoredDocument>, IndexError>
    where
        S: AsRef<str>,
        F: Fn(&DocumentRecord) -> bool,
    {
        if terms.is_empty() {
            return Err(IndexError::EmptyQuery);
        }
        if k == 0 {
            return Err(IndexError::ZeroK);
        }
        let mut acc = vec![0.0f64; self.docs.len()];
        let mut matched = vec![false; self.docs.len()];
        for term in terms {
            let Some(entry) = self.terms.get(term.as_ref()) else {
                continue;
            };
            for p in &entry.postings {
                acc[p.doc as usize] += model.term_score(&self.term_stats(entry, p.doc, p.tf));
                matched[p.doc as usize] = true;
            }
        }
        let mut hits: Vec<(f64, &str)> = matched
            .iter()
            .enumerate()
            .filter(|&(i, &m)| m && filter(&self.docs[i]))
            .map(|(i, _)| (acc[i], self.docs[i].doc_id.as_str()))
            .collect();
        hits.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        hits.truncate(k);
        Ok(hits
            .into_iter()
            .enumerate()
            .map(|(i, (score, id))| ScoredDocument {
                doc_id: id.to_string(),
                score_init: score,
                rank: i + 1,
                f_rank: None,
            })
            .collect())
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), IndexError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join(INDEX_FILE))?);
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        w.write_u64::<LittleEndian>(self.docs.len() as u64)?;
        for (doc, len) in self.docs.iter().zip(&self.doc_lens) {
            for s in [&doc.doc_id, &doc.title, &doc.body, &doc.source_domain] {
                write_str(&mut w, s)?;
            }
            w.write_u32::<LittleEndian>(*len)?;
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| a.0.cmp(b.0));
        w.write_u64::<LittleEndian>(terms.len() as u64)?;
        for (term, entry) in terms {
            write_str(&mut w, term)?;
            w.write_u32::<LittleEndian>(entry.postings.len() as u32)?;
            for p in &entry.postings {
                w.write_u32::<LittleEndian>(p.doc)?;
                w.write_u32::<LittleEndian>(p.tf)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Index, IndexError> {
        let mut r = BufReader::new(File::open(dir.as_ref().join(INDEX_FILE))?);
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(IndexError::Format("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != FORMAT_VERSION {
            return Err(IndexError::Format(format!("unsupported version {version}")));
        }
        let n = r.read_u64::<LittleEndian>()? as usize;
        let mut docs = Vec::with_capacity(n);
        let mut doc_lens = Vec::with_capacity(n);
        for _ in 0..n {
            docs.push(DocumentRecord {
                doc_id: read_str(&mut r)?,
                title: read_str(&mut r)?,
                body: read_str(&mut r)?,
                source_domain: read_str(&mut r)?,
            });
            doc_lens.push(r.read_u32::<LittleEndian>()?);
        }
        let term_count = r.read_u64::<LittleEndian>()? as usize;
        let mut terms = HashMap::with_capacity(term_count);
        for _ in 0..term_count {
            let term = read_str(&mut r)?;
            let count = r.read_u32::<LittleEndian>()? as usize;
            let mut postings = Vec::with_capacity(count);
            let mut ctf = 0u64;
            for _ in 0..count {
                let doc = r.read_u32::<LittleEndian>()?;
                let tf = r.read_u32::<LittleEndian>()?;
                if doc as usize >= n {
                    return Err(IndexError::Format(format!("posting for missing doc {doc}")));
                }
                ctf += tf as u64;
                postings.push(Posting { doc, tf });
            }
            terms.insert(term, TermEntry { ctf, postings });
        }
        let ids = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i as u32))
            .collect();
        let total: u64 = doc_lens.iter().map(|&l| l as u64).sum();
        Ok(Index {
            stats: make_stats(n, total),
            docs,
            doc_lens,
            ids,
            terms,
        })
    }
}

fn make_stats(n: usize, total: u64) -> IndexStats {
    IndexStats {
        doc_count: n as u64,
        total_tokens: total,
        avg_doc_len: if n == 0 { 0.0 } else { total as f64 / n as f64 },
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn read_str<R: Read>(r: &mut R) -> Result<String, IndexError> {
    let len = r.read_u32::<LittleEndian>()? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| IndexError::Format(e.to_string()))
}

/// Incremental single-writer index construction.
#[derive(Debug, Default)]
pub struct IndexBuilder {
    docs: Vec<DocumentRecord>,
    doc_lens: Vec<u32>,
    ids: HashMap<String, u32>,
    terms: HashMap<String, TermEntry>,
    total: u64,
}

impl IndexBuilder {
    pub fn add(&mut self, doc: DocumentRecord) -> Result<(), IndexError> {
        if self.ids.contains_key(&doc.doc_id) {
            return Err(IndexError::DuplicateId(doc.doc_id));
        }
        if doc.body.trim().is_empty() {
            return Err(IndexError::EmptyBody(doc.doc_id));
        }
        let idx = self.docs.len() as u32;
        let tokens = index_terms(&doc.indexed_text());
        let mut counts: HashMap<String, u32> = HashMap::new();
        for t in &tokens {
            *counts.entry(t.clone()).or_default() += 1;
        }
        for (term, tf) in counts {
            let entry = self.terms.entry(term).or_insert_with(|| TermEntry {
                ctf: 0,
                postings: Vec::new(),
            });
            entry.ctf += tf as u64;
            entry.postings.push(Posting { doc: idx, tf });
        }
        self.total += tokens.len() as u64;
        self.doc_lens.push(tokens.len() as u32);
        self.ids.insert(doc.doc_id.clone(), idx);
        self.docs.push(doc);
        Ok(())
    }

    pub fn finish(self) -> Index {
        Index {
            stats: make_stats(self.docs.len(), self.total),
            docs: self.docs,
            doc_lens: self.doc_lens,
            ids: self.ids,
            terms: self.terms,
        }
    }
}

/// Parses a JSON-lines corpus (`doc_id`, `title`, `body`, `source_domain`).
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<DocumentRecord>, IndexError> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: DocumentRecord = serde_json::from_str(&line).map_err(|e| IndexError::Corpus {
            line: i + 1,
            msg: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<DocumentRecord>, IndexError> {
    read_corpus(BufReader::new(File::open(path)?))
}

pub fn write_corpus<W: Write>(mut w: W, docs: &[DocumentRecord]) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut w, doc)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
