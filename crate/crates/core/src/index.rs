//! Immutable inverted index with bit-set match sets.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, TokenizedDocument};
use crate::docset::DocSet;
use crate::error::{Error, Result};

pub type TermId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub count: u32,
}

#[derive(Debug, Clone)]
pub struct InvertedIndex {
    doc_ids: Vec<String>,
    labels: Vec<Option<usize>>,
    label_names: Vec<String>,
    terms: Vec<String>,
    lookup: HashMap<String, TermId>,
    postings: Vec<Vec<Posting>>,
    doc_sets: Vec<DocSet>,
    doc_terms: Vec<Vec<(TermId, u32)>>,
}

impl InvertedIndex {
    /// Document ordinals follow corpus order; term ids follow sorted term order.
    pub fn build(corpus: &Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let docs = corpus.documents();
        let n = docs.len();

        let mut vocab: Vec<&str> = docs
            .iter()
            .flat_map(|d| d.terms.keys().map(String::as_str))
            .collect();
        vocab.sort_unstable();
        vocab.dedup();
        let terms: Vec<String> = vocab.into_iter().map(str::to_owned).collect();
        let lookup: HashMap<String, TermId> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermId))
            .collect();

        let mut postings = vec![Vec::new(); terms.len()];
        let mut doc_terms = Vec::with_capacity(n);
        for (ordinal, doc) in docs.iter().enumerate() {
            // BTreeMap iteration is sorted, so term ids come out ascending.
            let entries: Vec<(TermId, u32)> = doc
                .terms
                .iter()
                .filter(|(_, &c)| c > 0)
                .map(|(t, &c)| (lookup[t], c))
                .collect();
            for &(term, count) in &entries {
                postings[term as usize].push(Posting {
                    doc: ordinal as u32,
                    count,
                });
            }
            doc_terms.push(entries);
        }
        let doc_sets = postings
            .iter()
            .map(|list| DocSet::from_ordinals(n, list.iter().map(|p| p.doc as usize)))
            .collect();

        Ok(InvertedIndex {
            doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
            labels: corpus.label_ids(),
            label_names: corpus.label_names().to_vec(),
            terms,
            lookup,
            postings,
            doc_sets,
            doc_terms,
        })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_id(&self, term: &str) -> Option<TermId> {
        self.lookup.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.term_id(term)
            .map(|id| self.postings_by_id(id))
            .unwrap_or(&[])
    }

    pub fn postings_by_id(&self, id: TermId) -> &[Posting] {
        &self.postings[id as usize]
    }

    /// δ(w): the documents containing `term`.
    pub fn doc_set(&self, id: TermId) -> &DocSet {
        &self.doc_sets[id as usize]
    }

    pub fn doc_terms(&self, doc: usize) -> Result<&[(TermId, u32)]> {
        self.doc_terms
            .get(doc)
            .map(Vec::as_slice)
            .ok_or(Error::InvalidDocument(doc))
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn doc_freq_by_id(&self, id: TermId) -> usize {
        self.postings[id as usize].len()
    }

    /// Documents containing at least one of `words`. Unknown words match nothing.
    pub fn match_any<'a, I>(&self, words: I) -> DocSet
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut result = DocSet::empty(self.doc_count());
        for id in words.into_iter().filter_map(|w| self.term_id(w)) {
            result.union_with(self.doc_set(id));
        }
        result
    }

    pub fn match_any_ids<I: IntoIterator<Item = TermId>>(&self, ids: I) -> DocSet {
        let mut result = DocSet::empty(self.doc_count());
        for id in ids {
            result.union_with(self.doc_set(id));
        }
        result
    }

    /// |δ(a) ∩ δ(b)|.
    pub fn and_count(&self, a: &str, b: &str) -> usize {
        match (self.term_id(a), self.term_id(b)) {
            (Some(a), Some(b)) => self.and_count_by_id(a, b),
            _ => 0,
        }
    }

    pub fn and_count_by_id(&self, a: TermId, b: TermId) -> usize {
        self.doc_set(a).intersection_count(self.doc_set(b))
    }

    /// Reconstructs the tokenized corpus the index was built from.
    pub fn to_corpus(&self) -> Result<Corpus> {
        let documents = (0..self.doc_count())
            .map(|d| TokenizedDocument {
                id: self.doc_ids[d].clone(),
                terms: self.doc_terms[d]
                    .iter()
                    .map(|&(t, c)| (self.terms[t as usize].clone(), c))
                    .collect(),
                label: self.labels[d].map(|l| self.label_names[l].clone()),
            })
            .collect();
        Corpus::with_label_names(documents, self.label_names.clone())
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let artifact = IndexArtifact::from_index(self);
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), &artifact)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let artifact: IndexArtifact = serde_json::from_reader(std::io::BufReader::new(file))?;
        artifact.into_index()
    }
}

/// On-disk form of an index: the tokenized documents it was built from.
/// Postings and bit sets are rebuilt on load.
#[derive(Debug, Serialize, Deserialize)]
pub struct IndexArtifact {
    pub format_version: u32,
    pub label_names: Vec<String>,
    pub documents: Vec<ArtifactDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ArtifactDocument {
    pub id: String,
    pub label: Option<String>,
    pub terms: BTreeMap<String, u32>,
}

impl IndexArtifact {
    const VERSION: u32 = 1;

    fn from_index(index: &InvertedIndex) -> Self {
        let corpus = index.to_corpus().expect("index documents are consistent");
        IndexArtifact {
            format_version: Self::VERSION,
            label_names: corpus.label_names().to_vec(),
            documents: corpus
                .documents()
                .iter()
                .map(|d| ArtifactDocument {
                    id: d.id.clone(),
                    label: d.label.clone(),
                    terms: d.terms.clone(),
                })
                .collect(),
        }
    }

    fn into_index(self) -> Result<InvertedIndex> {
        if self.format_version != Self::VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported index format version {}",
                self.format_version
            )));
        }
        let documents = self
            .documents
            .into_iter()
            .map(|d| TokenizedDocument {
                id: d.id,
                terms: d.terms,
                label: d.label,
            })
            .collect();
        InvertedIndex::build(&Corpus::with_label_names(documents, self.label_names)?)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::TokenizedDocument;
    use proptest::prelude::*;

    pub(crate) fn doc(id: &str, words: &[&str], label: Option<&str>) -> TokenizedDocument {
        let mut terms = BTreeMap::new();
        for w in words {
            *terms.entry(w.to_string()).or_insert(0) += 1;
        }
        TokenizedDocument {
            id: id.into(),
            terms,
            label: label.map(Into::into),
        }
    }

    /// The six-document toy corpus used throughout the unit tests.
    /// Ordinals 0..6 correspond to d1..d6; d1-d3 are labelled X, d4-d6 Y.
    pub(crate) fn toy() -> InvertedIndex {
        let docs = vec![
            doc("d1", &["space", "orbit", "nasa"], Some("X")),
            doc("d2", &["space", "nasa"], Some("X")),
            doc("d3", &["orbit", "moon"], Some("X")),
            doc("d4", &["hockey", "game"], Some("Y")),
            doc("d5", &["game", "team", "hockey"], Some("Y")),
            doc("d6", &["team", "game"], Some("Y")),
        ];
        InvertedIndex::build(&Corpus::new(docs).unwrap()).unwrap()
    }

    fn ords(set: &DocSet) -> Vec<usize> {
        set.iter().collect()
    }

    #[test]
    fn toy_postings() {
        let index = toy();
        assert_eq!(
            index.postings("space"),
            [Posting { doc: 0, count: 1 }, Posting { doc: 1, count: 1 }]
        );
        assert!(index.postings("zzz").is_empty());
    }

    #[test]
    fn single_document_counts() {
        let corpus = Corpus::new(vec![doc("d0", &["a", "a"], None)]).unwrap();
        let index = InvertedIndex::build(&corpus).unwrap();
        assert_eq!(index.postings("a"), [Posting { doc: 0, count: 2 }]);
        assert_eq!(index.doc_count(), 1);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let corpus = Corpus::new(vec![]).unwrap();
        assert!(matches!(InvertedIndex::build(&corpus), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn toy_doc_freq() {
        let index = toy();
        assert_eq!(index.doc_freq("space"), 2);
        assert_eq!(index.doc_freq("zzz"), 0);
        assert_eq!(index.doc_freq("game"), 3);
    }

    #[test]
    fn toy_match_any() {
        let index = toy();
        assert_eq!(ords(&index.match_any(["space", "hockey"])), [0, 1, 3, 4]);
        assert!(index.match_any(std::iter::empty()).is_empty());
        assert_eq!(ords(&index.match_any(["moon"])), [2]);
    }

    #[test]
    fn toy_and_count() {
        let index = toy();
        assert_eq!(index.and_count("nasa", "space"), 2);
        assert_eq!(index.and_count("space", "space"), 2);
        assert_eq!(index.and_count("space", "hockey"), 0);
    }

    #[test]
    fn json_artifact_round_trips() {
        let index = toy();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.json");
        index.save_json(&path).unwrap();
        let loaded = InvertedIndex::load_json(&path).unwrap();
        assert_eq!(loaded.terms(), index.terms());
        assert_eq!(loaded.doc_ids(), index.doc_ids());
        assert_eq!(loaded.labels(), index.labels());
        for t in index.terms() {
            assert_eq!(loaded.postings(t), index.postings(t));
        }
    }

    fn random_corpus() -> impl Strategy<Value = Vec<Vec<u8>>> {
        proptest::collection::vec(proptest::collection::vec(0u8..12, 0..8), 1..30)
    }

    fn build_random(docs: &[Vec<u8>]) -> InvertedIndex {
        let docs = docs
            .iter()
            .enumerate()
            .map(|(i, ws)| {
                let words: Vec<String> = ws.iter().map(|w| format!("w{w}")).collect();
                let refs: Vec<&str> = words.iter().map(String::as_str).collect();
                doc(&format!("d{i}"), &refs, None)
            })
            .collect();
        InvertedIndex::build(&Corpus::new(docs).unwrap()).unwrap()
    }

    proptest! {
        #[test]
        fn match_any_equals_document_scan(
            docs in random_corpus(),
            query in proptest::collection::btree_set(0u8..14, 0..5),
        ) {
            let index = build_random(&docs);
            let words: Vec<String> = query.iter().map(|w| format!("w{w}")).collect();
            let got = index.match_any(words.iter().map(String::as_str));
            let expected: Vec<usize> = docs
                .iter()
                .enumerate()
                .filter(|(_, ws)| ws.iter().any(|w| query.contains(w)))
                .map(|(i, _)| i)
                .collect();
            prop_assert_eq!(ords(&got), expected);
        }

        #[test]
        fn single_word_match_has_doc_freq_cardinality(docs in random_corpus(), w in 0u8..12) {
            let index = build_random(&docs);
            let word = format!("w{w}");
            prop_assert_eq!(index.match_any([word.as_str()]).count(), index.doc_freq(&word));
        }

        #[test]
        fn match_any_distributes_over_union(
            docs in random_corpus(),
            a in proptest::collection::btree_set(0u8..12, 0..4),
            b in proptest::collection::btree_set(0u8..12, 0..4),
        ) {
            let index = build_random(&docs);
            let name = |s: &std::collections::BTreeSet<u8>| s.iter().map(|w| format!("w{w}")).collect::<Vec<_>>();
            let (wa, wb) = (name(&a), name(&b));
            let ma = index.match_any(wa.iter().map(String::as_str));
            let mb = index.match_any(wb.iter().map(String::as_str));
            let both = index.match_any(wa.iter().chain(&wb).map(String::as_str));
            let mut union = ma.clone();
            union.union_with(&mb);
            prop_assert_eq!(&both, &union);
            prop_assert!(ma.is_subset(&both));
        }

        #[test]
        fn and_count_is_symmetric_and_bounded(docs in random_corpus(), a in 0u8..12, b in 0u8..12) {
            let index = build_random(&docs);
            let (a, b) = (format!("w{a}"), format!("w{b}"));
            let ab = index.and_count(&a, &b);
            prop_assert_eq!(ab, index.and_count(&b, &a));
            prop_assert!(ab <= index.doc_freq(&a).min(index.doc_freq(&b)));
        }

        #[test]
        fn postings_sorted_and_positive(docs in random_corpus()) {
            let index = build_random(&docs);
            for t in index.terms() {
                let p = index.postings(t);
                prop_assert!(p.windows(2).all(|w| w[0].doc < w[1].doc));
                prop_assert!(p.iter().all(|x| x.count >= 1));
                prop_assert!(p.len() <= index.doc_count());
            }
        }
    }
}
