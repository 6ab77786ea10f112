//! Document loading, tokenization and per-category sampling.
//!
//! All three supported on-disk shapes (JSONL, CSV, one directory per
//! category) produce [`RawDocument`]s; [`tokenize`] turns those into term
//! multisets and [`Corpus`] holds the result.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Function words removed before indexing. Changing this list changes every
/// downstream vocabulary, so it is versioned.
pub const STOP_WORDS_V1: &[&str] = &[
    "an", "and", "are", "as", "at", "be", "but", "by", "for", "from", "had", "has", "have", "he",
    "her", "his", "if", "in", "is", "it", "its", "not", "of", "on", "or", "she", "that", "the",
    "their", "they", "this", "to", "was", "we", "were", "with", "you",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub id: String,
    /// Term -> occurrence count. Counts are always >= 1.
    pub terms: BTreeMap<String, u32>,
    pub label: Option<String>,
}

impl TokenizedDocument {
    pub fn len(&self) -> usize {
        self.terms.values().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopSet(BTreeSet<String>);

impl StopSet {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopSet(words.into_iter().map(|w| w.as_ref().to_lowercase()).collect())
    }

    pub fn empty() -> Self {
        StopSet(BTreeSet::new())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for StopSet {
    fn default() -> Self {
        StopSet::new(STOP_WORDS_V1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    Jsonl,
    CategoryDirs,
    Csv,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "category-dirs" | "dirs" => Ok(CorpusFormat::CategoryDirs),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(Error::InvalidConfig(format!("unknown corpus format `{other}`"))),
        }
    }
}

/// Field / column names used when reading records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadOptions {
    pub id_field: String,
    pub text_field: String,
    pub label_field: String,
    /// Drop everything up to the first blank line of each file
    /// (category-dirs only; strips mail/news headers).
    pub strip_headers: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            id_field: "id".into(),
            text_field: "text".into(),
            label_field: "label".into(),
            strip_headers: false,
        }
    }
}

pub fn load_corpus(path: &Path, format: CorpusFormat, options: &LoadOptions) -> Result<Vec<RawDocument>> {
    let docs = match format {
        CorpusFormat::Jsonl => load_jsonl(path, options)?,
        CorpusFormat::Csv => load_csv(path, options)?,
        CorpusFormat::CategoryDirs => load_category_dirs(path, options)?,
    };
    let mut seen = HashSet::with_capacity(docs.len());
    for doc in &docs {
        if doc.id.is_empty() {
            return Err(Error::MalformedRecord {
                locator: path.display().to_string(),
                message: "empty document id".into(),
            });
        }
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::DuplicateId(doc.id.clone()));
        }
    }
    Ok(docs)
}

fn load_jsonl(path: &Path, options: &LoadOptions) -> Result<Vec<RawDocument>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let locator = || format!("{}:{}", path.display(), lineno + 1);
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                locator: locator(),
                message: e.to_string(),
            })?;
        let field = |name: &str| -> Result<Option<String>> {
            match value.get(name) {
                None | Some(serde_json::Value::Null) => Ok(None),
                Some(serde_json::Value::String(s)) => Ok(Some(s.clone())),
                Some(other) => Err(Error::MalformedRecord {
                    locator: locator(),
                    message: format!("field `{name}` must be a string, found {other}"),
                }),
            }
        };
        let text = field(&options.text_field)?.ok_or_else(|| Error::MalformedRecord {
            locator: locator(),
            message: format!("missing field `{}`", options.text_field),
        })?;
        let id = field(&options.id_field)?.unwrap_or_else(|| docs.len().to_string());
        let label = field(&options.label_field)?;
        docs.push(RawDocument { id, text, label });
    }
    Ok(docs)
}

fn load_csv(path: &Path, options: &LoadOptions) -> Result<Vec<RawDocument>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::MalformedRecord {
        locator: path.display().to_string(),
        message: e.to_string(),
    })?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let text_col = column(&options.text_field).ok_or_else(|| Error::MalformedRecord {
        locator: format!("{}:1", path.display()),
        message: format!("no `{}` column", options.text_field),
    })?;
    let id_col = column(&options.id_field);
    let label_col = column(&options.label_field);

    let mut docs = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedRecord {
            locator: format!("{}:{}", path.display(), row + 2),
            message: e.to_string(),
        })?;
        let text = record.get(text_col).ok_or_else(|| Error::MalformedRecord {
            locator: format!("{}:{}", path.display(), row + 2),
            message: "missing text column".into(),
        })?;
        let id = id_col
            .and_then(|c| record.get(c))
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .unwrap_or_else(|| row.to_string());
        let label = label_col
            .and_then(|c| record.get(c))
            .filter(|s| !s.is_empty())
            .map(str::to_owned);
        docs.push(RawDocument {
            id,
            text: text.to_owned(),
            label,
        });
    }
    Ok(docs)
}

fn sorted_entries(dir: &Path) -> Result<Vec<fs::DirEntry>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

fn load_category_dirs(root: &Path, options: &LoadOptions) -> Result<Vec<RawDocument>> {
    let mut docs = Vec::new();
    for category in sorted_entries(root)? {
        let cat_path = category.path();
        if !cat_path.is_dir() {
            continue;
        }
        let label = category.file_name().to_string_lossy().into_owned();
        for entry in sorted_entries(&cat_path)? {
            let file_path = entry.path();
            if !file_path.is_file() {
                continue;
            }
            let bytes = fs::read(&file_path).map_err(|e| Error::io(&file_path, e))?;
            // Usenet archives mix in Latin-1 bytes; replace rather than abort.
            let mut text = String::from_utf8_lossy(&bytes).into_owned();
            if options.strip_headers {
                text = strip_header_block(&text).to_owned();
            }
            docs.push(RawDocument {
                id: format!("{}/{}", label, entry.file_name().to_string_lossy()),
                text,
                label: Some(label.clone()),
            });
        }
    }
    Ok(docs)
}

fn strip_header_block(text: &str) -> &str {
    let normalized = text.find("\n\n").or_else(|| text.find("\r\n\r\n"));
    match normalized {
        Some(pos) => &text[pos..],
        None => text,
    }
}

/// Writes documents in the canonical JSONL interchange format.
pub fn write_jsonl(docs: &[RawDocument], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for doc in docs {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Lowercases, splits on non-alphanumeric characters, drops tokens shorter
/// than two characters and stop words, and counts what is left.
pub fn tokenize_text(text: &str, stop: &StopSet) -> BTreeMap<String, u32> {
    let lowered = text.to_lowercase();
    let mut terms = BTreeMap::new();
    for token in lowered.split(|c: char| !c.is_alphanumeric()) {
        if token.chars().count() < 2 || stop.contains(token) {
            continue;
        }
        *terms.entry(token.to_owned()).or_insert(0) += 1;
    }
    terms
}

pub fn tokenize(doc: &RawDocument, stop: &StopSet) -> TokenizedDocument {
    TokenizedDocument {
        id: doc.id.clone(),
        terms: tokenize_text(&doc.text, stop),
        label: doc.label.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    documents: Vec<TokenizedDocument>,
    label_names: Vec<String>,
}

impl Corpus {
    /// Builds a corpus; label names are collected in order of first appearance.
    pub fn new(documents: Vec<TokenizedDocument>) -> Result<Self> {
        let mut label_names: Vec<String> = Vec::new();
        for doc in &documents {
            if let Some(label) = &doc.label {
                if !label_names.contains(label) {
                    label_names.push(label.clone());
                }
            }
        }
        Self::with_label_names(documents, label_names)
    }

    /// Builds a corpus with an explicit label ordering. Every document label
    /// must appear in `label_names`; names without documents are allowed.
    pub fn with_label_names(documents: Vec<TokenizedDocument>, label_names: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
            if let Some(label) = &doc.label {
                if !label_names.contains(label) {
                    return Err(Error::InvalidConfig(format!(
                        "document `{}` has label `{label}` not in the label list",
                        doc.id
                    )));
                }
            }
        }
        Ok(Corpus {
            documents,
            label_names,
        })
    }

    pub fn from_raw(raw: &[RawDocument], stop: &StopSet) -> Result<Self> {
        Corpus::new(raw.iter().map(|d| tokenize(d, stop)).collect())
    }

    pub fn documents(&self) -> &[TokenizedDocument] {
        &self.documents
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Per-document index into [`Corpus::label_names`].
    pub fn label_ids(&self) -> Vec<Option<usize>> {
        let lookup: HashMap<&str, usize> = self
            .label_names
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        self.documents
            .iter()
            .map(|d| d.label.as_deref().map(|l| lookup[l]))
            .collect()
    }

    /// Keeps only documents whose label is in `categories`, in the given order.
    pub fn restrict_to(&self, categories: &[String]) -> Result<Corpus> {
        for cat in categories {
            if !self.label_names.contains(cat) {
                return Err(Error::InvalidConfig(format!("unknown category `{cat}`")));
            }
        }
        let documents = self
            .documents
            .iter()
            .filter(|d| d.label.as_ref().is_some_and(|l| categories.contains(l)))
            .cloned()
            .collect();
        Corpus::with_label_names(documents, categories.to_vec())
    }
}

/// Draws exactly `n` documents from every category without replacement.
/// Unlabeled documents are dropped. Output keeps the input document order.
pub fn sample_per_category(corpus: &Corpus, n: usize, seed: u64) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let label_ids = corpus.label_ids();
    let mut keep = vec![false; corpus.len()];
    for (class, name) in corpus.label_names().iter().enumerate() {
        let members: Vec<usize> = label_ids
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(class))
            .map(|(i, _)| i)
            .collect();
        if members.len() < n {
            return Err(Error::CategoryTooSmall {
                category: name.clone(),
                available: members.len(),
                requested: n,
            });
        }
        for pick in sample(&mut rng, members.len(), n) {
            keep[members[pick]] = true;
        }
    }
    let documents = corpus
        .documents()
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(d, _)| d.clone())
        .collect();
    Corpus::with_label_names(documents, corpus.label_names().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(&str, u32)]) -> BTreeMap<String, u32> {
        pairs.iter().map(|(t, c)| (t.to_string(), *c)).collect()
    }

    fn raw(id: &str, text: &str, label: Option<&str>) -> RawDocument {
        RawDocument {
            id: id.into(),
            text: text.into(),
            label: label.map(Into::into),
        }
    }

    #[test]
    fn tokenize_splits_and_filters() {
        let stop = StopSet::new(["the"]);
        let doc = tokenize(&raw("x", "The Space-Shuttle orbits!", None), &stop);
        assert_eq!(doc.terms, counts(&[("space", 1), ("shuttle", 1), ("orbits", 1)]));
    }

    #[test]
    fn tokenize_drops_single_characters() {
        assert!(tokenize_text("a a a", &StopSet::empty()).is_empty());
    }

    #[test]
    fn tokenize_folds_case() {
        assert_eq!(tokenize_text("God god GOD", &StopSet::empty()), counts(&[("god", 3)]));
    }

    #[test]
    fn tokenize_keeps_digits() {
        assert_eq!(
            tokenize_text("in 1987, 42 x", &StopSet::default()),
            counts(&[("1987", 1), ("42", 1)])
        );
    }

    #[test]
    fn empty_text_is_legal() {
        let doc = tokenize(&raw("e", "", None), &StopSet::default());
        assert!(doc.is_empty());
        assert_eq!(doc.len(), 0);
    }

    #[test]
    fn default_stop_set_is_lowercase() {
        let stop = StopSet::default();
        assert!(stop.len() >= 30);
        assert!(STOP_WORDS_V1.iter().all(|w| w.to_lowercase() == *w));
    }

    #[test]
    fn jsonl_loads_fields_and_synthesizes_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        fs::write(
            &path,
            "{\"id\":\"a\",\"text\":\"x\",\"label\":\"y\"}\n\n{\"text\":\"second\"}\n",
        )
        .unwrap();
        let docs = load_corpus(&path, CorpusFormat::Jsonl, &LoadOptions::default()).unwrap();
        assert_eq!(docs[0], raw("a", "x", Some("y")));
        assert_eq!(docs[1], raw("1", "second", None));
    }

    #[test]
    fn jsonl_malformed_line_reports_locator() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        fs::write(&path, "{\"text\":\"ok\"}\n{not json\n").unwrap();
        let err = load_corpus(&path, CorpusFormat::Jsonl, &LoadOptions::default()).unwrap_err();
        match err {
            Error::MalformedRecord { locator, .. } => assert!(locator.ends_with(":2"), "{locator}"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn jsonl_missing_text_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        fs::write(&path, "{\"id\":\"a\"}\n").unwrap();
        assert!(matches!(
            load_corpus(&path, CorpusFormat::Jsonl, &LoadOptions::default()),
            Err(Error::MalformedRecord { .. })
        ));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.jsonl");
        fs::write(&path, "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n").unwrap();
        assert!(matches!(
            load_corpus(&path, CorpusFormat::Jsonl, &LoadOptions::default()),
            Err(Error::DuplicateId(id)) if id == "a"
        ));
    }

    #[test]
    fn category_dirs_label_by_parent() {
        let dir = tempfile::tempdir().unwrap();
        for (cat, file) in [("hockey", "1"), ("hockey", "2"), ("space", "1")] {
            let d = dir.path().join(cat);
            fs::create_dir_all(&d).unwrap();
            fs::write(d.join(file), format!("{cat} text")).unwrap();
        }
        let docs =
            load_corpus(dir.path(), CorpusFormat::CategoryDirs, &LoadOptions::default()).unwrap();
        let labels: Vec<_> = docs.iter().map(|d| d.label.clone().unwrap()).collect();
        assert_eq!(labels, ["hockey", "hockey", "space"]);
        assert_eq!(docs[2].id, "space/1");
    }

    #[test]
    fn category_dirs_can_strip_headers() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().join("sci");
        fs::create_dir_all(&d).unwrap();
        fs::write(d.join("1"), "From: someone\nSubject: x\n\nbody words").unwrap();
        let options = LoadOptions {
            strip_headers: true,
            ..LoadOptions::default()
        };
        let docs = load_corpus(dir.path(), CorpusFormat::CategoryDirs, &options).unwrap();
        assert_eq!(docs[0].text.trim(), "body words");
    }

    #[test]
    fn csv_reads_named_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut body = String::from("tweet,crisis\n");
        for label in ["fire", "flood", "bomb"] {
            for i in 0..1000 {
                body.push_str(&format!("\"message {i}, about {label}\",{label}\n"));
            }
        }
        fs::write(&path, body).unwrap();
        let options = LoadOptions {
            text_field: "tweet".into(),
            label_field: "crisis".into(),
            ..LoadOptions::default()
        };
        let docs = load_corpus(&path, CorpusFormat::Csv, &options).unwrap();
        assert_eq!(docs.len(), 3000);
        for label in ["fire", "flood", "bomb"] {
            assert_eq!(docs.iter().filter(|d| d.label.as_deref() == Some(label)).count(), 1000);
        }
        assert_eq!(docs[0].text, "message 0, about fire");
    }

    #[test]
    fn csv_without_text_column_fails() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(load_corpus(&path, CorpusFormat::Csv, &LoadOptions::default()).is_err());
    }

    #[test]
    fn unreadable_path_fails() {
        let err = load_corpus(
            Path::new("/nonexistent/corpus.jsonl"),
            CorpusFormat::Jsonl,
            &LoadOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    fn labelled_corpus(per_class: usize, classes: usize) -> Corpus {
        let stop = StopSet::default();
        let raw: Vec<_> = (0..classes * per_class)
            .map(|i| raw(&format!("d{i}"), &format!("word{i} common"), Some(&format!("c{}", i % classes))))
            .collect();
        Corpus::from_raw(&raw, &stop).unwrap()
    }

    #[test]
    fn sampling_takes_n_per_category() {
        let corpus = labelled_corpus(1000, 3);
        let sampled = sample_per_category(&corpus, 400, 7).unwrap();
        assert_eq!(sampled.len(), 1200);
        let ids = sampled.label_ids();
        for c in 0..3 {
            assert_eq!(ids.iter().filter(|l| **l == Some(c)).count(), 400);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let corpus = labelled_corpus(100, 3);
        let a = sample_per_category(&corpus, 40, 7).unwrap();
        let b = sample_per_category(&corpus, 40, 7).unwrap();
        let c = sample_per_category(&corpus, 40, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_zero_keeps_label_names() {
        let corpus = labelled_corpus(10, 3);
        let sampled = sample_per_category(&corpus, 0, 1).unwrap();
        assert!(sampled.is_empty());
        assert_eq!(sampled.label_names(), corpus.label_names());
    }

    #[test]
    fn sampling_too_many_names_category() {
        let corpus = labelled_corpus(10, 2);
        match sample_per_category(&corpus, 11, 1) {
            Err(Error::CategoryTooSmall { category, .. }) => assert_eq!(category, "c0"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn restrict_keeps_requested_order() {
        let corpus = labelled_corpus(2, 3);
        let sub = corpus.restrict_to(&["c2".into(), "c0".into()]).unwrap();
        assert_eq!(sub.len(), 4);
        assert_eq!(sub.label_names(), ["c2", "c0"]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tokenization_is_idempotent(text in "\\PC{0,80}") {
                let stop = StopSet::default();
                let once = tokenize_text(&text, &stop);
                let joined = once
                    .iter()
                    .flat_map(|(t, c)| std::iter::repeat_n(t.as_str(), *c as usize))
                    .collect::<Vec<_>>()
                    .join(" ");
                prop_assert_eq!(tokenize_text(&joined, &stop), once);
            }

            #[test]
            fn tokens_are_lowercase_and_not_stopped(text in "[A-Za-z0-9 ,.!-]{0,120}") {
                let stop = StopSet::default();
                for (term, count) in tokenize_text(&text, &stop) {
                    prop_assert!(count >= 1);
                    prop_assert_eq!(term.to_lowercase(), term.clone());
                    prop_assert!(!stop.contains(&term));
                }
            }

            #[test]
            fn sample_is_sub_multiset(n in 0usize..6, seed in any::<u64>()) {
                let corpus = labelled_corpus(6, 3);
                let sampled = sample_per_category(&corpus, n, seed).unwrap();
                let ids = sampled.label_ids();
                for c in 0..3 {
                    prop_assert_eq!(ids.iter().filter(|l| **l == Some(c)).count(), n);
                }
                for doc in sampled.documents() {
                    prop_assert!(corpus.documents().contains(doc));
                }
            }
        }
    }
}
