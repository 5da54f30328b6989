//! Documents, queries, relevance judgments and per-query candidate lists,
//! plus the on-disk formats they are exchanged in.
//!
//! * documents / queries: JSONL, one `{"id": .., "text": ..}` object per line.
//! * qrels: TREC style `qid 0 docid rel`, binary relevance.
//! * candidates: TSV `qid docid label ns_score` with a header row.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::retrieval::Sampler;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub text: String,
}

/// An ordered collection of records with unique, non-empty ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collection<T> {
    items: Vec<T>,
    by_id: HashMap<String, usize>,
}

pub type Corpus = Collection<Document>;
pub type QuerySet = Collection<Query>;

pub trait Record {
    fn id(&self) -> &str;
    fn text(&self) -> &str;
}

impl Record for Document {
    fn id(&self) -> &str {
        &self.id
    }
    fn text(&self) -> &str {
        &self.text
    }
}

impl Record for Query {
    fn id(&self) -> &str {
        &self.id
    }
    fn text(&self) -> &str {
        &self.text
    }
}

impl<T: Record> Collection<T> {
    pub fn new(items: Vec<T>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            if item.id().is_empty() {
                return Err(Error::InvalidArgument(format!("record {i} has an empty id")));
            }
            if by_id.insert(item.id().to_owned(), i).is_some() {
                return Err(Error::DuplicateId(item.id().to_owned()));
            }
        }
        Ok(Self { items, by_id })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&T> {
        self.by_id.get(id).map(|&i| &self.items[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.items.iter()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.items
    }

    pub fn text_of(&self, id: &str) -> Option<&str> {
        self.get(id).map(Record::text)
    }
}

impl<'a, T> IntoIterator for &'a Collection<T> {
    type Item = &'a T;
    type IntoIter = std::slice::Iter<'a, T>;
    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn parse_jsonl<T, R>(reader: R, source: &str) -> Result<Collection<T>>
where
    T: Record + for<'de> Deserialize<'de>,
    R: BufRead,
{
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item: T = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: source.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Collection::new(items)
}

pub fn parse_documents<R: BufRead>(reader: R, source: &str) -> Result<Corpus> {
    parse_jsonl(reader, source)
}

pub fn parse_queries<R: BufRead>(reader: R, source: &str) -> Result<QuerySet> {
    parse_jsonl(reader, source)
}

pub fn load_documents(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    parse_documents(open(path)?, &path.display().to_string())
}

pub fn load_queries(path: impl AsRef<Path>) -> Result<QuerySet> {
    let path = path.as_ref();
    parse_queries(open(path)?, &path.display().to_string())
}

fn to_jsonl<T: Serialize>(items: &[T]) -> Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_documents(path: impl AsRef<Path>, corpus: &Corpus) -> Result<()> {
    write_string(path.as_ref(), &to_jsonl(corpus.as_slice())?)
}

pub fn write_queries(path: impl AsRef<Path>, queries: &QuerySet) -> Result<()> {
    write_string(path.as_ref(), &to_jsonl(queries.as_slice())?)
}

pub(crate) fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Binary relevance judgments: query id to the set of relevant document ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeSet<String>>,
}

impl Qrels {
    pub fn insert(&mut self, query_id: impl Into<String>, doc_id: impl Into<String>) {
        self.judgments
            .entry(query_id.into())
            .or_default()
            .insert(doc_id.into());
    }

    pub fn relevant(&self, query_id: &str) -> Option<&BTreeSet<String>> {
        self.judgments.get(query_id)
    }

    /// The single positive used per query: the lexicographically smallest
    /// relevant document id.
    pub fn primary_relevant(&self, query_id: &str) -> Option<&str> {
        self.relevant(query_id)
            .and_then(|s| s.iter().next())
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.judgments.iter().map(|(q, d)| (q.as_str(), d))
    }

    /// Checks that every judged query and document exists.
    pub fn validate(&self, corpus: &Corpus, queries: &QuerySet) -> Result<()> {
        for (qid, docs) in &self.judgments {
            if !queries.contains(qid) {
                return Err(Error::UnknownQuery(qid.clone()));
            }
            if let Some(d) = docs.iter().find(|d| !corpus.contains(d)) {
                return Err(Error::UnknownDocument(d.clone()));
            }
        }
        Ok(())
    }

    pub fn to_trec_string(&self) -> String {
        let mut out = String::new();
        for (q, docs) in &self.judgments {
            for d in docs {
                let _ = writeln!(out, "{q} 0 {d} 1");
            }
        }
        out
    }
}

pub fn parse_qrels<R: Read>(reader: R, source: &str) -> Result<Qrels> {
    let mut qrels = Qrels::default();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: source.to_owned(),
            line: i + 1,
            message,
        };
        if fields.len() != 4 {
            return Err(parse_err(format!(
                "expected `qid 0 docid rel`, found {} fields",
                fields.len()
            )));
        }
        let rel: i64 = fields[3]
            .parse()
            .map_err(|_| parse_err(format!("relevance `{}` is not an integer", fields[3])))?;
        match rel {
            1 => qrels.insert(fields[0], fields[2]),
            0 => {}
            _ => {
                return Err(Error::NonBinaryRelevance {
                    line: i + 1,
                    value: fields[3].to_owned(),
                })
            }
        }
    }
    Ok(qrels)
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<Qrels> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_qrels(file, &path.display().to_string())
}

pub fn write_qrels(path: impl AsRef<Path>, qrels: &Qrels) -> Result<()> {
    write_string(path.as_ref(), &qrels.to_trec_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub doc_id: String,
    pub label: u8,
    pub ns_score: f64,
}

/// One query's re-ranking list: a single relevant document plus sampled
/// negatives, each carrying its normalized sampler score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateList {
    pub query_id: String,
    pub candidates: Vec<Candidate>,
}

impl CandidateList {
    pub fn n(&self) -> usize {
        self.candidates.len()
    }

    pub fn relevant(&self) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.label == 1)
    }

    /// Exactly one positive, no duplicate ids, scores in `[0, 1]`.
    pub fn check(&self) -> Result<()> {
        let positives = self.candidates.iter().filter(|c| c.label == 1).count();
        if positives != 1 {
            return Err(Error::InvalidArgument(format!(
                "candidate list for `{}` has {positives} relevant documents, expected 1",
                self.query_id
            )));
        }
        let mut seen = HashSet::new();
        for c in &self.candidates {
            if c.label > 1 {
                return Err(Error::InvalidArgument(format!("label {} is not binary", c.label)));
            }
            if !(0.0..=1.0).contains(&c.ns_score) {
                return Err(Error::InvalidArgument(format!(
                    "ns_score {} of `{}` outside [0, 1]",
                    c.ns_score, c.doc_id
                )));
            }
            if !seen.insert(c.doc_id.as_str()) {
                return Err(Error::DuplicateId(c.doc_id.clone()));
            }
        }
        Ok(())
    }
}

/// Builds one list of `n` candidates per query: the primary relevant
/// document followed by `n - 1` negatives from `sampler`.
pub fn build_candidate_lists(
    queries: &QuerySet,
    qrels: &Qrels,
    sampler: &Sampler<'_>,
    n: usize,
) -> Result<Vec<CandidateList>> {
    build_candidate_lists_with(queries, qrels, sampler, n, Execution::default())
}

pub fn build_candidate_lists_with(
    queries: &QuerySet,
    qrels: &Qrels,
    sampler: &Sampler<'_>,
    n: usize,
    exec: Execution,
) -> Result<Vec<CandidateList>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    let available = sampler.corpus_size();
    if available < n {
        return Err(Error::InsufficientDocuments {
            needed: n,
            available,
        });
    }
    let work: Vec<(usize, &Query)> = queries.iter().enumerate().collect();
    exec.try_map(&work, |&(ordinal, query)| {
        let relevant = qrels
            .relevant(&query.id)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| Error::NoRelevant(query.id.clone()))?;
        let positive = relevant.iter().next().expect("non-empty");
        let sampled = sampler.sample(query, ordinal as u64, relevant, n - 1)?;
        let mut candidates = Vec::with_capacity(n);
        candidates.push(Candidate {
            doc_id: positive.clone(),
            label: 1,
            ns_score: sampled.relevant_score(positive),
        });
        candidates.extend(sampled.negatives.into_iter().map(|s| Candidate {
            doc_id: s.doc_id,
            label: 0,
            ns_score: s.normalized_score,
        }));
        Ok(CandidateList {
            query_id: query.id.clone(),
            candidates,
        })
    })
}

pub const CANDIDATES_HEADER: &str = "qid\tdocid\tlabel\tns_score";

pub fn candidates_to_tsv(lists: &[CandidateList]) -> String {
    let mut out = String::from(CANDIDATES_HEADER);
    out.push('\n');
    for list in lists {
        for c in &list.candidates {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.6}",
                list.query_id, c.doc_id, c.label, c.ns_score
            );
        }
    }
    out
}

pub fn write_candidates(path: impl AsRef<Path>, lists: &[CandidateList]) -> Result<()> {
    write_string(path.as_ref(), &candidates_to_tsv(lists))
}

/// Parses candidate TSV. Rows of one query must be contiguous; each list is
/// checked with [`CandidateList::check`].
pub fn parse_candidates<R: Read>(reader: R, source: &str) -> Result<Vec<CandidateList>> {
    let mut lists: Vec<CandidateList> = Vec::new();
    let mut finished = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() || (i == 0 && line.trim_end() == CANDIDATES_HEADER) {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: source.to_owned(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let label: u8 = match fields[2] {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(format!("label `{other}` is not 0 or 1"))),
        };
        let ns_score: f64 = fields[3]
            .parse()
            .map_err(|_| parse_err(format!("ns_score `{}` is not a number", fields[3])))?;
        let candidate = Candidate {
            doc_id: fields[1].to_owned(),
            label,
            ns_score,
        };
        match lists.last_mut() {
            Some(last) if last.query_id == fields[0] => last.candidates.push(candidate),
            _ => {
                if let Some(last) = lists.last() {
                    finished.insert(last.query_id.clone());
                }
                if finished.contains(fields[0]) {
                    return Err(parse_err(format!("rows for query `{}` are not contiguous", fields[0])));
                }
                lists.push(CandidateList {
                    query_id: fields[0].to_owned(),
                    candidates: vec![candidate],
                });
            }
        }
    }
    for list in &lists {
        list.check()?;
    }
    Ok(lists)
}

pub fn load_candidates(path: impl AsRef<Path>) -> Result<Vec<CandidateList>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_candidates(file, &path.display().to_string())
}
