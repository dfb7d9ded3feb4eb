//! MS-MARCO-style collection ingestion: passages, queries, training triples
//! and relevance judgments.
//!
//! All loaders accept LF and CRLF line endings (a trailing `\r` is stripped),
//! keep text verbatim otherwise, and fail with line-numbered errors on
//! malformed input. Stores are immutable after load and iterate in ascending
//! id order so every downstream pass is reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Lines, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A passage of the collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Passage {
    pub pid: String,
    pub text: String,
}

/// A search query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub qid: String,
    pub text: String,
}

/// One training triple: a query with one relevant and one non-relevant
/// passage, all as raw texts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainTriple {
    pub query_text: String,
    pub pos_text: String,
    pub neg_text: String,
}

impl TrainTriple {
    pub fn new(query_text: String, pos_text: String, neg_text: String) -> Result<Self> {
        if query_text.is_empty() || pos_text.is_empty() || neg_text.is_empty() {
            return Err(Error::InvalidRecord(
                "triple fields must be non-empty".into(),
            ));
        }
        if pos_text == neg_text {
            return Err(Error::InvalidRecord(
                "triple positive and negative passages are identical".into(),
            ));
        }
        Ok(TrainTriple {
            query_text,
            pos_text,
            neg_text,
        })
    }
}

/// One relevance judgment row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrelPair {
    pub qid: String,
    pub pid: String,
    pub relevance: i64,
}

/// Immutable id -> text store shared by passages and queries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Store {
    records: BTreeMap<String, String>,
}

impl Store {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&str> {
        self.records.get(id).map(String::as_str)
    }

    /// Lookup that fails loudly; use before training/evaluation starts.
    pub fn lookup(&self, id: &str, context: &str) -> Result<&str> {
        self.get(id).ok_or_else(|| Error::UnknownId {
            id: id.to_string(),
            context: context.to_string(),
        })
    }

    pub fn contains(&self, id: &str) -> bool {
        self.records.contains_key(id)
    }

    /// Ascending-id iteration.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.records.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.keys().map(String::as_str)
    }

    /// Write the store back out as `id<TAB>text` lines in ascending id order.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
        for (id, text) in self.iter() {
            writeln!(f, "{id}\t{text}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    fn insert_checked(
        &mut self,
        path: &Path,
        line_no: usize,
        seen: &mut BTreeMap<String, usize>,
        id: String,
        text: String,
        kind: &str,
    ) -> Result<()> {
        if id.is_empty() {
            return Err(Error::parse(path, line_no, format!("empty {kind} id")));
        }
        if text.trim().is_empty() {
            return Err(Error::parse(
                path,
                line_no,
                format!("empty text for {kind} `{id}`"),
            ));
        }
        if let Some(first_line) = seen.get(&id) {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                id,
                line: line_no,
                first_line: *first_line,
            });
        }
        seen.insert(id.clone(), line_no);
        self.records.insert(id, text);
        Ok(())
    }
}

pub type PassageStore = Store;
pub type QueryStore = Store;

/// Relevance judgments: every ingested pair plus a qid -> relevant-pid view.
#[derive(Debug, Clone, Default)]
pub struct QrelSet {
    pairs: Vec<QrelPair>,
    relevant: BTreeMap<String, BTreeSet<String>>,
}

impl QrelSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[QrelPair] {
        &self.pairs
    }

    /// The set of relevant pids for a query; empty if none were judged
    /// relevant.
    pub fn relevant(&self, qid: &str) -> BTreeSet<String> {
        self.relevant.get(qid).cloned().unwrap_or_default()
    }

    pub fn is_relevant(&self, qid: &str, pid: &str) -> bool {
        self.relevant
            .get(qid)
            .map(|s| s.contains(pid))
            .unwrap_or(false)
    }

    pub fn has_query(&self, qid: &str) -> bool {
        self.relevant.contains_key(qid) || self.pairs.iter().any(|p| p.qid == qid)
    }

    /// All relevant (qid, pid) pairs in ascending (qid, pid) order.
    pub fn relevant_pairs(&self) -> Vec<(String, String)> {
        self.relevant
            .iter()
            .flat_map(|(qid, pids)| pids.iter().map(move |pid| (qid.clone(), pid.clone())))
            .collect()
    }

    /// Check that every referenced id resolves against the given stores.
    pub fn resolve(&self, queries: &QueryStore, passages: &PassageStore) -> Result<()> {
        for pair in &self.pairs {
            queries.lookup(&pair.qid, "qrels query id")?;
            passages.lookup(&pair.pid, "qrels passage id")?;
        }
        Ok(())
    }

    pub fn write_trec(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
        for p in &self.pairs {
            writeln!(f, "{} 0 {} {}", p.qid, p.pid, p.relevance).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

fn open_lines(path: &Path) -> Result<Lines<BufReader<File>>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(f).lines())
}

fn strip_cr(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}

fn load_store(path: &Path, kind: &str) -> Result<Store> {
    let mut store = Store::default();
    let mut seen = BTreeMap::new();
    for (idx, line) in open_lines(path)?.enumerate() {
        let line_no = idx + 1;
        let raw = line.map_err(|e| Error::io(path, e))?;
        let line = strip_cr(&raw);
        if line.is_empty() {
            continue;
        }
        let mut fields = line.splitn(2, '\t');
        let id = fields.next().unwrap_or_default();
        let text = fields.next().ok_or_else(|| {
            Error::parse(path, line_no, format!("expected `id<TAB>text`, got 1 field"))
        })?;
        if text.contains('\t') {
            log::warn!(
                "{}:{line_no}: text contains TAB; joining extra fields into the text",
                path.display()
            );
        }
        store.insert_checked(path, line_no, &mut seen, id.to_string(), text.to_string(), kind)?;
    }
    log::info!("loaded {} {kind} records from {}", store.len(), path.display());
    Ok(store)
}

/// Load a passage collection from `pid<TAB>text` lines.
pub fn load_collection(path: &Path) -> Result<PassageStore> {
    load_store(path, "passage")
}

/// Load a query set from `qid<TAB>text` lines.
pub fn load_queries(path: &Path) -> Result<QueryStore> {
    load_store(path, "query")
}

/// Streaming iterator over `query<TAB>pos<TAB>neg` training triples.
pub struct TripleReader {
    path: PathBuf,
    lines: Lines<BufReader<File>>,
    line_no: usize,
}

impl Iterator for TripleReader {
    type Item = Result<TrainTriple>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line_no += 1;
            let raw = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            let line = strip_cr(&raw);
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Some(Err(Error::parse(
                    &self.path,
                    self.line_no,
                    format!("expected 3 TAB-separated fields, got {}", fields.len()),
                )));
            }
            return Some(
                TrainTriple::new(
                    fields[0].to_string(),
                    fields[1].to_string(),
                    fields[2].to_string(),
                )
                .map_err(|e| Error::parse(&self.path, self.line_no, e.to_string())),
            );
        }
    }
}

/// Open a triples file for streaming iteration; the whole file is never
/// materialized.
pub fn load_triples(path: &Path) -> Result<TripleReader> {
    Ok(TripleReader {
        path: path.to_path_buf(),
        lines: open_lines(path)?,
        line_no: 0,
    })
}

/// Load TREC-format qrels: `qid 0 pid rel`, whitespace-separated.
pub fn load_qrels(path: &Path) -> Result<QrelSet> {
    let mut set = QrelSet::default();
    for (idx, line) in open_lines(path)?.enumerate() {
        let line_no = idx + 1;
        let raw = line.map_err(|e| Error::io(path, e))?;
        let line = strip_cr(&raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 4 whitespace-separated fields, got {}", fields.len()),
            ));
        }
        let relevance: i64 = fields[3].parse().map_err(|_| {
            Error::parse(path, line_no, format!("non-integer relevance `{}`", fields[3]))
        })?;
        let pair = QrelPair {
            qid: fields[0].to_string(),
            pid: fields[2].to_string(),
            relevance,
        };
        if relevance >= 1 {
            set.relevant
                .entry(pair.qid.clone())
                .or_default()
                .insert(pair.pid.clone());
        }
        set.pairs.push(pair);
    }
    Ok(set)
}
