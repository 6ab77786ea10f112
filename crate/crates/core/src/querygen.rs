//! Decoding integer chromosomes into sets of disjunctive queries.
//!
//! Word gene `i` is a candidate for query `i mod k`. Candidates are visited in
//! genome order; a word already used anywhere in the set is skipped, the first
//! word a query receives becomes its root, and every later word is admitted
//! only if enough of its documents also contain the root.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::docset::DocSet;
use crate::error::{Error, Result};
use crate::index::{InvertedIndex, TermId};
use crate::wordlist::WordList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum KMode {
    Fixed { k: usize },
    Discovered { k_min: usize, k_max: usize },
}

impl KMode {
    pub const DISCOVERED: KMode = KMode::Discovered { k_min: 2, k_max: 9 };

    pub fn is_discovered(&self) -> bool {
        matches!(self, KMode::Discovered { .. })
    }

    /// Largest number of query slots a chromosome can declare.
    pub fn max_k(&self) -> usize {
        match *self {
            KMode::Fixed { k } => k,
            KMode::Discovered { k_max, .. } => k_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodeConfig {
    pub intersect_threshold: f64,
    pub k_mode: KMode,
    pub max_words_per_query: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            intersect_threshold: 0.5,
            k_mode: KMode::DISCOVERED,
            max_words_per_query: 4,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.intersect_threshold) {
            return Err(Error::InvalidConfig(format!(
                "intersect threshold {} outside [0, 1]",
                self.intersect_threshold
            )));
        }
        match self.k_mode {
            KMode::Fixed { k: 0 } => {
                return Err(Error::InvalidConfig("fixed k must be at least 1".into()))
            }
            KMode::Discovered { k_min, k_max } if k_min < 2 || k_max < k_min => {
                return Err(Error::InvalidConfig(format!(
                    "discovered k range [{k_min}, {k_max}] is invalid"
                )))
            }
            _ => {}
        }
        if self.max_words_per_query == 0 {
            return Err(Error::InvalidConfig("max words per query must be at least 1".into()));
        }
        Ok(())
    }

    pub fn word_gene_count(&self) -> usize {
        self.k_mode.max_k() * self.max_words_per_query
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    /// Present only when k is discovered.
    pub k_gene: Option<u32>,
    pub word_genes: Vec<u32>,
}

impl Chromosome {
    pub fn fixed(word_genes: Vec<u32>) -> Self {
        Chromosome {
            k_gene: None,
            word_genes,
        }
    }

    pub fn discovered(k: u32, word_genes: Vec<u32>) -> Self {
        Chromosome {
            k_gene: Some(k),
            word_genes,
        }
    }

    /// Number of genes including the k gene.
    pub fn len(&self) -> usize {
        self.word_genes.len() + usize::from(self.k_gene.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A disjunction of words; the first word is the root.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Query {
    pub words: Vec<String>,
}

impl Query {
    pub fn root(&self) -> Option<&str> {
        self.words.first().map(String::as_str)
    }

    pub fn extra_words(&self) -> &[String] {
        self.words.get(1..).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.words.join(" OR "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySet {
    pub declared_k: usize,
    /// Exactly `declared_k` slots; some may be empty.
    pub queries: Vec<Query>,
}

impl QuerySet {
    pub fn new(queries: Vec<Query>) -> Self {
        QuerySet {
            declared_k: queries.len(),
            queries,
        }
    }

    pub fn from_words(queries: &[&[&str]]) -> Self {
        QuerySet::new(
            queries
                .iter()
                .map(|ws| Query {
                    words: ws.iter().map(|w| w.to_string()).collect(),
                })
                .collect(),
        )
    }

    pub fn non_empty(&self) -> impl Iterator<Item = &Query> {
        self.queries.iter().filter(|q| !q.is_empty())
    }

    pub fn non_empty_count(&self) -> usize {
        self.non_empty().count()
    }

    /// One `cluster <i>: w1 OR w2 ...` line per non-empty query, numbered
    /// the same way as the seed clusters.
    pub fn to_text(&self) -> String {
        self.non_empty()
            .enumerate()
            .map(|(i, q)| format!("cluster {i}: {q}\n"))
            .collect()
    }
}

/// Fraction of `new_word`'s documents that also contain `root`.
pub fn intersect_ratio(index: &InvertedIndex, root: &str, new_word: &str) -> Result<f64> {
    let df = index.doc_freq(new_word);
    if df == 0 {
        return Err(Error::UnknownTerm(new_word.to_owned()));
    }
    Ok(ratio(index.and_count(root, new_word), df))
}

fn ratio(and_count: usize, df: usize) -> f64 {
    and_count as f64 / df as f64
}

pub fn decode(
    chromosome: &Chromosome,
    wordlist: &WordList,
    index: &InvertedIndex,
    config: &DecodeConfig,
) -> QuerySet {
    Decoder::new(index, wordlist, *config).decode(chromosome)
}

/// Queries as wordlist ranks, the form used inside the search loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedQueries {
    pub declared_k: usize,
    pub queries: Vec<Vec<usize>>,
}

/// Decoder with the wordlist's match sets and pairwise co-occurrence counts
/// precomputed. Read-only after construction.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    index: &'a InvertedIndex,
    wordlist: &'a WordList,
    config: DecodeConfig,
    term_ids: Vec<Option<TermId>>,
    doc_freq: Vec<usize>,
    and_counts: Vec<usize>,
}

impl<'a> Decoder<'a> {
    pub fn new(index: &'a InvertedIndex, wordlist: &'a WordList, config: DecodeConfig) -> Self {
        let term_ids: Vec<Option<TermId>> = wordlist.terms().map(|t| index.term_id(t)).collect();
        let doc_freq = term_ids
            .iter()
            .map(|id| id.map_or(0, |id| index.doc_freq_by_id(id)))
            .collect();
        let n = term_ids.len();
        let mut and_counts = vec![0; n * n];
        for i in 0..n {
            for j in i..n {
                if let (Some(a), Some(b)) = (term_ids[i], term_ids[j]) {
                    let c = index.and_count_by_id(a, b);
                    and_counts[i * n + j] = c;
                    and_counts[j * n + i] = c;
                }
            }
        }
        Decoder {
            index,
            wordlist,
            config,
            term_ids,
            doc_freq,
            and_counts,
        }
    }

    pub fn config(&self) -> &DecodeConfig {
        &self.config
    }

    pub fn wordlist(&self) -> &WordList {
        self.wordlist
    }

    pub fn index(&self) -> &InvertedIndex {
        self.index
    }

    pub fn declared_k(&self, chromosome: &Chromosome) -> usize {
        match (self.config.k_mode, chromosome.k_gene) {
            (KMode::Fixed { k }, _) => k,
            (KMode::Discovered { k_min, k_max }, Some(g)) => (g as usize).clamp(k_min, k_max),
            (KMode::Discovered { k_min, .. }, None) => k_min,
        }
    }

    fn admits(&self, root: usize, candidate: usize) -> bool {
        let df = self.doc_freq[candidate];
        if df == 0 {
            return false;
        }
        let n = self.term_ids.len();
        ratio(self.and_counts[root * n + candidate], df) >= self.config.intersect_threshold
    }

    pub fn decode_ranks(&self, chromosome: &Chromosome) -> RankedQueries {
        let k = self.declared_k(chromosome);
        let list_len = self.term_ids.len();
        let mut queries: Vec<Vec<usize>> = vec![Vec::new(); k];
        if list_len == 0 {
            return RankedQueries {
                declared_k: k,
                queries,
            };
        }
        let mut used = vec![false; list_len];
        for (position, &gene) in chromosome.word_genes.iter().enumerate() {
            let rank = gene as usize % list_len;
            if used[rank] {
                continue;
            }
            let query = &mut queries[position % k];
            match query.first() {
                None => query.push(rank),
                Some(&root) if self.admits(root, rank) => query.push(rank),
                Some(_) => continue,
            }
            used[rank] = true;
        }
        RankedQueries {
            declared_k: k,
            queries,
        }
    }

    pub fn decode(&self, chromosome: &Chromosome) -> QuerySet {
        self.to_query_set(&self.decode_ranks(chromosome))
    }

    pub fn to_query_set(&self, ranked: &RankedQueries) -> QuerySet {
        QuerySet {
            declared_k: ranked.declared_k,
            queries: ranked
                .queries
                .iter()
                .map(|q| Query {
                    words: q.iter().map(|&r| self.wordlist.term(r).to_owned()).collect(),
                })
                .collect(),
        }
    }

    /// δ^f(q) for a ranked query.
    pub fn match_set(&self, query: &[usize]) -> DocSet {
        self.index
            .match_any_ids(query.iter().filter_map(|&r| self.term_ids[r]))
    }
}
