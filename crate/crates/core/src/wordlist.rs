//! Candidate word list the genetic search draws query words from.
//!
//! Terms are ranked by a product-form TF*IDF: for every document containing
//! the term, multiply its occurrence count by `|2 - IDF(t)|`, then take the
//! square root. The product is computed as a sum of logarithms (dropping the
//! square root, which does not change the order) so large document
//! frequencies cannot overflow.
//!
//! The IDF inside the score uses base-10 logarithms by default; see
//! [`IdfBase`]. Nearest-neighbour and k-means features always use natural
//! logarithms via [`idf`].

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{InvertedIndex, TermId};

pub const DEFAULT_WORDLIST_SIZE: usize = 100;

/// `ln(1 + |D| / DF(t))`.
pub fn idf(doc_count: usize, doc_freq: usize) -> f64 {
    (1.0 + doc_count as f64 / doc_freq as f64).ln()
}

/// Logarithm base of the IDF inside the word score. It decides where
/// `|2 - IDF|` vanishes: at `|D| / DF = base^2 - 1`, so about 6.4 for
/// natural logs, 3 for base 2 and 99 for base 10. With natural logs the
/// zero falls among the most topical words of a few-class corpus and drops
/// them from the list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdfBase {
    Natural,
    Two,
    #[default]
    Ten,
}

impl IdfBase {
    pub fn idf(self, doc_count: usize, doc_freq: usize) -> f64 {
        let x = 1.0 + doc_count as f64 / doc_freq as f64;
        match self {
            IdfBase::Natural => x.ln(),
            IdfBase::Two => x.log2(),
            IdfBase::Ten => x.log10(),
        }
    }
}

impl std::str::FromStr for IdfBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" | "e" => Ok(IdfBase::Natural),
            "two" | "2" => Ok(IdfBase::Two),
            "ten" | "10" => Ok(IdfBase::Ten),
            other => Err(Error::InvalidConfig(format!("unknown IDF base {other:?}"))),
        }
    }
}

/// Log-space rank key of `term` with natural-log IDF; `-inf` when
/// `|2 - IDF| == 0`.
pub fn term_score(index: &InvertedIndex, term: &str) -> Result<f64> {
    term_score_with(index, term, IdfBase::Natural)
}

pub fn term_score_with(index: &InvertedIndex, term: &str, base: IdfBase) -> Result<f64> {
    let id = index
        .term_id(term)
        .ok_or_else(|| Error::UnknownTerm(term.to_owned()))?;
    Ok(term_score_by_id(index, id, base))
}

pub(crate) fn term_score_by_id(index: &InvertedIndex, id: TermId, base: IdfBase) -> f64 {
    let postings = index.postings_by_id(id);
    let factor = (2.0 - base.idf(index.doc_count(), postings.len())).abs();
    if factor == 0.0 {
        return f64::NEG_INFINITY;
    }
    let log_factor = factor.ln();
    postings
        .iter()
        .map(|p| (p.count as f64).ln() + log_factor)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordEntry {
    pub term: String,
    pub score: f64,
}

/// Fixed, score-ordered list of candidate query words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordList {
    entries: Vec<WordEntry>,
}

impl WordList {
    /// Scores every term in `index` and keeps the best `size`.
    /// Ties are broken by the term text so the list is reproducible.
    pub fn build(index: &InvertedIndex, size: usize) -> Self {
        WordList::build_with(index, size, IdfBase::default())
    }

    pub fn build_with(index: &InvertedIndex, size: usize, base: IdfBase) -> Self {
        let mut scored: Vec<(TermId, f64)> = (0..index.vocabulary_size() as TermId)
            .map(|id| (id, term_score_by_id(index, id, base)))
            .filter(|(_, s)| s.is_finite())
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| index.term(a.0).cmp(index.term(b.0)))
        });
        scored.truncate(size);
        WordList {
            entries: scored
                .into_iter()
                .map(|(id, score)| WordEntry {
                    term: index.term(id).to_owned(),
                    score,
                })
                .collect(),
        }
    }

    /// A list with the given order and zero scores, for hand-built examples.
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        WordList {
            entries: terms
                .into_iter()
                .map(|t| WordEntry {
                    term: t.into(),
                    score: 0.0,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[WordEntry] {
        &self.entries
    }

    pub fn term(&self, rank: usize) -> &str {
        &self.entries[rank].term
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.term.as_str())
    }

    /// `term,score,rank` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["term", "score", "rank"])?;
        for (rank, entry) in self.entries.iter().enumerate() {
            writer.write_record([entry.term.clone(), format!("{}", entry.score), rank.to_string()])?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }
}
