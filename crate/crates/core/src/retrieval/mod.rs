//! Embedded inverted-index search with eleven closed-form ranking models.

mod index;
mod models;

pub use index::{
    index_terms, load_corpus, read_corpus, write_corpus, DocumentRecord, Index, IndexBuilder,
    IndexError, IndexStats, Posting, ScoredDocument, INDEX_FILE,
};
pub use models::{ModelError, RetrievalModel, TermStats};

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Index {
        Index::build([
            DocumentRecord::new("d1", "", "the cat sat", "a.org"),
            DocumentRecord::new("d2", "", "the dog sat", "a.org"),
            DocumentRecord::new("d3", "", "cat cat cat", "b.org"),
        ])
        .unwrap()
    }

    #[test]
    fn toy_statistics() {
        let idx = toy();
        let s = idx.stats();
        assert_eq!(s.doc_count, 3);
        assert_eq!(idx.df("cat"), 2);
        assert_eq!(idx.ctf("cat"), 4);
        assert_eq!(s.avg_doc_len, 3.0);
        assert_eq!(s.total_tokens, 9);
    }

    #[test]
    fn empty_and_duplicate_builds() {
        let idx = Index::build(Vec::new()).unwrap();
        assert_eq!(idx.stats().doc_count, 0);
        assert!(idx.search(&["cat"], &RetrievalModel::bm25(), 5).unwrap().is_empty());
        let err = Index::build([
            DocumentRecord::new("x", "", "a", ""),
            DocumentRecord::new("x", "", "b", ""),
        ])
        .unwrap_err();
        assert!(matches!(err, IndexError::DuplicateId(id) if id == "x"));
    }

    #[test]
    fn bm25_toy_score_and_ranking() {
        let idx = toy();
        let bm25 = RetrievalModel::bm25();
        let s = idx.score(&bm25, &["cat"], "d3").unwrap();
        assert!((s - 0.7386).abs() < 1e-4, "{s}");
        let hits = idx.search(&["cat"], &bm25, 10).unwrap();
        let ids: Vec<_> = hits.iter().map(|h| h.doc_id.as_str()).collect();
        assert_eq!(ids, ["d3", "d1"]);
        assert_eq!(hits[0].rank, 1);
        let top = idx.search(&["cat"], &bm25, 1).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].doc_id, "d3");
        assert!(idx.search(&["zebra"], &bm25, 10).unwrap().is_empty());
    }

    #[test]
    fn errors() {
        let idx = toy();
        let empty: [&str; 0] = [];
        assert!(matches!(
            idx.search(&empty, &RetrievalModel::bm25(), 3),
            Err(IndexError::EmptyQuery)
        ));
        assert!(matches!(
            idx.score(&RetrievalModel::Dfi, &["cat"], "nope"),
            Err(IndexError::NotFound(_))
        ));
    }

    #[test]
    fn absent_terms_score_zero() {
        let idx = toy();
        for m in RetrievalModel::all_variants() {
            assert_eq!(idx.score(&m, &["zebra"], "d1").unwrap(), 0.0);
            assert_eq!(idx.score(&m, &["cat"], "d2").unwrap(), 0.0);
        }
    }

    #[test]
    fn jelinek_prefers_denser_document() {
        let idx = toy();
        let m = RetrievalModel::LmJelinek { lambda: 0.10 };
        let d1 = idx.score(&m, &["cat"], "d1").unwrap();
        let d3 = idx.score(&m, &["cat"], "d3").unwrap();
        assert!(d3 > d1);
    }

    #[test]
    fn ties_break_by_doc_id() {
        let idx = Index::build([
            DocumentRecord::new("b", "", "same text", ""),
            DocumentRecord::new("a", "", "same text", ""),
        ])
        .unwrap();
        let hits = idx.search(&["same"], &RetrievalModel::bm25(), 5).unwrap();
        assert_eq!(hits[0].doc_id, "a");
        assert_eq!(hits[0].score_init, hits[1].score_init);
    }

    #[test]
    fn filtered_search() {
        let idx = toy();
        let hits = idx
            .search_filtered(&["cat"], &RetrievalModel::bm25(), 10, |d| d.source_domain == "a.org")
            .unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].doc_id, "d1");
        assert_eq!(hits[0].rank, 1);
    }

    #[test]
    fn persistence_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let idx = toy();
        idx.save(dir.path()).unwrap();
        let loaded = Index::load(dir.path()).unwrap();
        assert_eq!(loaded, idx);
        std::fs::write(dir.path().join(INDEX_FILE), b"garbage!!!!").unwrap();
        assert!(Index::load(dir.path()).is_err());
    }

    #[test]
    fn corpus_jsonl() {
        let data = "{\"doc_id\":\"a\",\"title\":\"T\",\"body\":\"B\",\"source_domain\":\"x.org\"}\n\n{\"doc_id\":\"b\",\"body\":\"C\"}\n";
        let docs = read_corpus(data.as_bytes()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].title, "");
        let err = read_corpus("{\"doc_id\":1}".as_bytes()).unwrap_err();
        assert!(matches!(err, IndexError::Corpus { line: 1, .. }));
        let mut out = Vec::new();
        write_corpus(&mut out, &docs).unwrap();
        assert_eq!(read_corpus(out.as_slice()).unwrap(), docs);
    }
}
