//! TREC run file I/O: `qid Q0 pid rank score tag`, rank starting at 1,
//! scores printed with 6 decimal places.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::bm25::RankedList;
use crate::error::{Error, Result};

/// Write ranked lists as a TREC run file. Queries are emitted in ascending
/// qid order regardless of input order.
pub fn write_run(path: &Path, runs: &[RankedList], tag: &str) -> Result<()> {
    let mut sorted: Vec<&RankedList> = runs.iter().collect();
    sorted.sort_by(|a, b| a.qid.cmp(&b.qid));
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    for run in sorted {
        for (rank, (pid, score)) in run.entries.iter().enumerate() {
            writeln!(f, "{} Q0 {} {} {:.6} {}", run.qid, pid, rank + 1, score, tag)
                .map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

/// Read a TREC run file back into per-query ranked lists (ascending qid,
/// entries in rank order).
pub fn read_run(path: &Path) -> Result<Vec<RankedList>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut per_query: BTreeMap<String, Vec<(u32, String, f64)>> = BTreeMap::new();
    for (idx, line) in BufReader::new(f).lines().enumerate() {
        let line_no = idx + 1;
        let raw = line.map_err(|e| Error::io(path, e))?;
        let line = raw.strip_suffix('\r').unwrap_or(&raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 6 fields in run line, got {}", fields.len()),
            ));
        }
        let rank: u32 = fields[3]
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad rank `{}`", fields[3])))?;
        let score: f64 = fields[4]
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad score `{}`", fields[4])))?;
        per_query
            .entry(fields[0].to_string())
            .or_default()
            .push((rank, fields[2].to_string(), score));
    }
    let mut runs = Vec::with_capacity(per_query.len());
    for (qid, mut rows) in per_query {
        rows.sort_by_key(|(rank, _, _)| *rank);
        let entries: Vec<(String, f64)> = rows.into_iter().map(|(_, pid, s)| (pid, s)).collect();
        let mut seen = std::collections::BTreeSet::new();
        for (pid, _) in &entries {
            if !seen.insert(pid.clone()) {
                return Err(Error::InvalidRecord(format!(
                    "duplicate pid `{pid}` for query `{qid}` in {}",
                    path.display()
                )));
            }
        }
        runs.push(RankedList { qid, entries });
    }
    Ok(runs)
}
