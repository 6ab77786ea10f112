//! Generated labelled corpora for tests and offline experiments.
//!
//! `Blocks` gives classes with mutually disjoint vocabularies. `TopicMixture`
//! mimics newsgroup-style text: every document mixes a Zipfian background
//! vocabulary shared by all classes with a smaller class-specific topical
//! vocabulary, and classes may borrow each other's topical words or share a
//! common domain vocabulary.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, LogNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Corpus, RawDocument, StopSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlocksSpec {
    pub classes: usize,
    pub docs_per_class: usize,
    pub terms_per_class: usize,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for BlocksSpec {
    fn default() -> Self {
        BlocksSpec {
            classes: 3,
            docs_per_class: 100,
            terms_per_class: 20,
            min_len: 8,
            max_len: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopicMixtureSpec {
    pub classes: usize,
    pub docs_per_class: usize,
    pub background_vocab: usize,
    /// Mandelbrot offset of the background rank-frequency law.
    pub background_offset: f64,
    pub topic_vocab: usize,
    pub topic_offset: f64,
    /// Mean fraction of a document's tokens drawn from its class topic.
    pub topical_share: f64,
    /// Beta concentration of the per-document topical share.
    pub share_concentration: f64,
    /// Probability that a topical token comes from another class's topic.
    pub borrow: f64,
    /// Probability that a topical token comes from a domain vocabulary
    /// common to all classes.
    pub shared_share: f64,
    pub shared_vocab: usize,
    pub median_len: f64,
    pub len_sigma: f64,
}

impl Default for TopicMixtureSpec {
    fn default() -> Self {
        TopicMixtureSpec::newsgroups_like(3)
    }
}

impl TopicMixtureSpec {
    /// Long, noisy posts on well separated topics, 400 per class.
    pub fn newsgroups_like(classes: usize) -> Self {
        TopicMixtureSpec {
            classes,
            docs_per_class: 400,
            background_vocab: 20_000,
            background_offset: 37.0,
            topic_vocab: 2000,
            topic_offset: 10.0,
            topical_share: 0.45,
            share_concentration: 4.0,
            borrow: 0.05,
            shared_share: 0.0,
            shared_vocab: 500,
            median_len: 120.0,
            len_sigma: 0.7,
        }
    }

    /// Shorter newswire-style articles, 4 classes sharing much of their
    /// topical vocabulary, 200 per class.
    pub fn newswire_like() -> Self {
        TopicMixtureSpec {
            classes: 4,
            docs_per_class: 200,
            background_vocab: 10_000,
            background_offset: 37.0,
            topic_vocab: 1500,
            topic_offset: 10.0,
            topical_share: 0.45,
            share_concentration: 4.0,
            borrow: 0.05,
            shared_share: 0.3,
            shared_vocab: 500,
            median_len: 90.0,
            len_sigma: 0.6,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.classes >= 1
            && self.docs_per_class >= 1
            && self.background_vocab >= 1
            && self.topic_vocab >= 1
            && (0.0..1.0).contains(&self.topical_share)
            && self.topical_share > 0.0
            && self.share_concentration > 0.0
            && (0.0..=1.0).contains(&self.borrow)
            && (0.0..=1.0).contains(&self.shared_share)
            && self.shared_vocab >= 1
            && self.median_len >= 1.0
            && self.len_sigma >= 0.0
            && self.background_offset >= 0.0
            && self.topic_offset >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid topic mixture parameters: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SyntheticSpec {
    Blocks(BlocksSpec),
    TopicMixture(TopicMixtureSpec),
}

impl SyntheticSpec {
    pub fn generate(&self, seed: u64) -> Result<Corpus> {
        let docs = self.raw_documents(seed)?;
        let stop = StopSet::default();
        let tokenized = docs.iter().map(|d| tokenize(d, &stop)).collect();
        Corpus::with_label_names(tokenized, (0..self.classes()).map(class_name).collect())
    }

    pub fn raw_documents(&self, seed: u64) -> Result<Vec<RawDocument>> {
        match self {
            SyntheticSpec::Blocks(spec) => blocks_raw(spec, seed),
            SyntheticSpec::TopicMixture(spec) => topic_mixture_raw(spec, seed),
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            SyntheticSpec::Blocks(spec) => spec.classes,
            SyntheticSpec::TopicMixture(spec) => spec.classes,
        }
    }
}

fn class_name(c: usize) -> String {
    format!("class{c}")
}

fn zipf_weights(n: usize, offset: f64) -> Vec<f64> {
    (0..n).map(|r| 1.0 / (r as f64 + 1.0 + offset)).collect()
}

/// Each class draws every token from its own vocabulary `b{class}x{rank}`
/// with Zipf weights, so no word is shared between classes.
pub fn blocks(spec: &BlocksSpec, seed: u64) -> Result<Corpus> {
    SyntheticSpec::Blocks(spec.clone()).generate(seed)
}

pub fn topic_mixture(spec: &TopicMixtureSpec, seed: u64) -> Result<Corpus> {
    SyntheticSpec::TopicMixture(spec.clone()).generate(seed)
}

fn blocks_raw(spec: &BlocksSpec, seed: u64) -> Result<Vec<RawDocument>> {
    if spec.classes == 0 || spec.terms_per_class == 0 || spec.min_len == 0 || spec.min_len > spec.max_len {
        return Err(Error::InvalidConfig(format!("invalid block parameters: {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = WeightedIndex::new(zipf_weights(spec.terms_per_class, 0.0)).expect("positive weights");
    let mut docs = Vec::with_capacity(spec.classes * spec.docs_per_class);
    for c in 0..spec.classes {
        for i in 0..spec.docs_per_class {
            let len = rng.random_range(spec.min_len..=spec.max_len);
            let words: Vec<String> = (0..len)
                .map(|_| format!("b{c}x{}", weights.sample(&mut rng)))
                .collect();
            docs.push(RawDocument {
                id: format!("{}-{i:04}", class_name(c)),
                text: words.join(" "),
                label: Some(class_name(c)),
            });
        }
    }
    Ok(docs)
}

fn topic_mixture_raw(spec: &TopicMixtureSpec, seed: u64) -> Result<Vec<RawDocument>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let background =
        WeightedIndex::new(zipf_weights(spec.background_vocab, spec.background_offset)).expect("positive weights");
    let topic = WeightedIndex::new(zipf_weights(spec.topic_vocab, spec.topic_offset)).expect("positive weights");
    let shared = WeightedIndex::new(zipf_weights(spec.shared_vocab, spec.topic_offset)).expect("positive weights");
    let mean = spec.topical_share;
    let share = Beta::new(mean * spec.share_concentration, (1.0 - mean) * spec.share_concentration)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let length =
        LogNormal::new(spec.median_len.ln(), spec.len_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut docs = Vec::with_capacity(spec.classes * spec.docs_per_class);
    for c in 0..spec.classes {
        for i in 0..spec.docs_per_class {
            let len = (length.sample(&mut rng).round() as usize).clamp(5, 3000);
            let theta: f64 = share.sample(&mut rng);
            let mut words = Vec::with_capacity(len);
            for _ in 0..len {
                if !rng.random_bool(theta) {
                    words.push(format!("w{}", background.sample(&mut rng)));
                } else if rng.random_bool(spec.shared_share) {
                    words.push(format!("sx{}", shared.sample(&mut rng)));
                } else {
                    let mut owner = c;
                    if spec.classes > 1 && rng.random_bool(spec.borrow) {
                        owner = (c + rng.random_range(1..spec.classes)) % spec.classes;
                    }
                    words.push(format!("t{owner}x{}", topic.sample(&mut rng)));
                }
            }
            docs.push(RawDocument {
                id: format!("{}-{i:04}", class_name(c)),
                text: words.join(" "),
                label: Some(class_name(c)),
            });
        }
    }
    Ok(docs)
}
