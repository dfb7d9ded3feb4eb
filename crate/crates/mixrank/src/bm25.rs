//! First-stage retrieval: inverted index plus Okapi BM25 scoring.
//!
//! The idf uses the Lucene-style non-negative form
//! `ln(1 + (N - df + 0.5) / (df + 0.5))`, each distinct query term is scored
//! once, and ties are broken by ascending pid so retrieval is fully
//! deterministic.

use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{PassageStore, Query};
use crate::error::{Error, Result};
use crate::text;

/// BM25 hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 0.82, b: 0.68 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 >= 0.0) {
            return Err(Error::InvalidConfig(format!("bm25 k1 must be >= 0, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidConfig(format!("bm25 b must be in [0,1], got {}", self.b)));
        }
        Ok(())
    }
}

/// Tokenize for indexing and for query analysis: lowercase, split on
/// non-alphanumeric runs.
pub fn analyze(text: &str) -> Vec<String> {
    text::tokenize(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Posting {
    doc: u32,
    tf: u32,
}

/// Immutable inverted index over a passage store.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvertedIndex {
    params: Bm25Params,
    /// pid per internal doc id, ascending.
    pids: Vec<String>,
    /// token count per doc.
    doc_len: Vec<u32>,
    avgdl: f64,
    postings: BTreeMap<String, Vec<Posting>>,
    pid_to_doc: BTreeMap<String, u32>,
}

impl InvertedIndex {
    /// Build the index over every passage in the store. Deterministic:
    /// passages are processed in ascending pid order.
    pub fn build(store: &PassageStore, params: Bm25Params) -> Result<Self> {
        params.validate()?;
        if store.is_empty() {
            return Err(Error::Empty {
                what: "passage store for index build".into(),
            });
        }
        let mut pids = Vec::with_capacity(store.len());
        let mut doc_len = Vec::with_capacity(store.len());
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut pid_to_doc = BTreeMap::new();
        for (doc, (pid, text)) in store.iter().enumerate() {
            let doc = doc as u32;
            let terms = analyze(text);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in &terms {
                *tf.entry(t.clone()).or_insert(0) += 1;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push(Posting { doc, tf: count });
            }
            pids.push(pid.to_string());
            doc_len.push(terms.len() as u32);
            pid_to_doc.insert(pid.to_string(), doc);
        }
        let avgdl = doc_len.iter().map(|&l| l as f64).sum::<f64>() / doc_len.len() as f64;
        Ok(InvertedIndex {
            params,
            pids,
            doc_len,
            avgdl,
            postings,
            pid_to_doc,
        })
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn num_docs(&self) -> usize {
        self.pids.len()
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avgdl
    }

    pub fn doc_len(&self, pid: &str) -> Option<u32> {
        self.pid_to_doc.get(pid).map(|&d| self.doc_len[d as usize])
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// Non-negative idf: `ln(1 + (N - df + 0.5) / (df + 0.5))`.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.num_docs() as f64;
        let df = self.df(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn tf_in(&self, term: &str, doc: u32) -> u32 {
        self.postings
            .get(term)
            .and_then(|ps| {
                ps.binary_search_by_key(&doc, |p| p.doc)
                    .ok()
                    .map(|i| ps[i].tf)
            })
            .unwrap_or(0)
    }

    fn term_score(&self, idf: f64, tf: u32, dl: u32) -> f64 {
        if tf == 0 {
            return 0.0;
        }
        let Bm25Params { k1, b } = self.params;
        let tf = tf as f64;
        let norm = 1.0 - b + b * dl as f64 / self.avgdl;
        idf * tf * (k1 + 1.0) / (tf + k1 * norm)
    }

    /// BM25 score of one document for the given query terms. Each distinct
    /// term contributes once; terms absent from the document contribute 0.
    pub fn score(&self, query_terms: &[String], pid: &str) -> Result<f64> {
        let &doc = self.pid_to_doc.get(pid).ok_or_else(|| Error::UnknownId {
            id: pid.to_string(),
            context: "bm25 score".into(),
        })?;
        let dl = self.doc_len[doc as usize];
        let mut seen = Vec::new();
        let mut total = 0.0;
        for term in query_terms {
            if seen.iter().any(|s| s == term) {
                continue;
            }
            seen.push(term.clone());
            total += self.term_score(self.idf(term), self.tf_in(term, doc), dl);
        }
        Ok(total)
    }

    /// Top-k passages containing at least one query term, descending by
    /// score with ties broken by ascending pid.
    pub fn retrieve(&self, query: &Query, k: usize) -> Result<RankedList> {
        if k == 0 {
            return Err(Error::InvalidConfig("retrieval depth K must be >= 1".into()));
        }
        let terms = analyze(&query.text);
        let mut scores: HashMap<u32, f64> = HashMap::new();
        let mut seen = Vec::new();
        for term in &terms {
            if seen.iter().any(|s| s == term) {
                continue;
            }
            seen.push(term.clone());
            if let Some(postings) = self.postings.get(term) {
                let idf = self.idf(term);
                for p in postings {
                    let s = self.term_score(idf, p.tf, self.doc_len[p.doc as usize]);
                    *scores.entry(p.doc).or_insert(0.0) += s;
                }
            }
        }
        let mut entries: Vec<(String, f64)> = scores
            .into_iter()
            .map(|(doc, s)| (self.pids[doc as usize].clone(), s))
            .collect();
        entries.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(k);
        Ok(RankedList {
            qid: query.qid.clone(),
            entries,
        })
    }
}

/// Ordered candidate list for one query: (pid, score), descending score,
/// ties by ascending pid, no duplicate pid.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub qid: String,
    pub entries: Vec<(String, f64)>,
}

impl RankedList {
    pub fn new(qid: String, entries: Vec<(String, f64)>) -> Result<Self> {
        let list = RankedList { qid, entries };
        list.validate()?;
        Ok(list)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(pid, _)| pid.as_str())
    }

    /// Truncate to the top `k` entries.
    pub fn top(&self, k: usize) -> RankedList {
        RankedList {
            qid: self.qid.clone(),
            entries: self.entries.iter().take(k).cloned().collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (pid, _) in &self.entries {
            if !seen.insert(pid.clone()) {
                return Err(Error::InvalidRecord(format!(
                    "duplicate pid `{pid}` in ranked list for query `{}`",
                    self.qid
                )));
            }
        }
        for w in self.entries.windows(2) {
            let (ref p0, s0) = w[0];
            let (ref p1, s1) = w[1];
            if s1 > s0 || (s1 == s0 && p1 < p0) {
                return Err(Error::InvalidRecord(format!(
                    "ranked list for query `{}` is not sorted at pid `{p1}`",
                    self.qid
                )));
            }
        }
        Ok(())
    }
}
