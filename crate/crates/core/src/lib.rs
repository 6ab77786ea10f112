//! Document clustering with evolved disjunctive search queries.
//!
//! A genetic search evolves a small set of OR-queries over a fixed list of
//! candidate words; the documents each query matches (and no other query
//! matches) form a cluster. Documents left over are placed by a nearest
//! neighbour vote, and the result can be scored against ground-truth labels.

pub mod assignment;
pub mod baseline;
pub mod corpus;
pub mod docset;
pub mod error;
pub mod evolve;
pub mod expand;
pub mod harness;
pub mod index;
pub mod metrics;
pub mod querygen;
pub mod synth;
pub mod wordlist;

pub use assignment::ClusterAssignment;
pub use corpus::{Corpus, CorpusFormat, LoadOptions, RawDocument, StopSet, TokenizedDocument};
pub use docset::DocSet;
pub use error::{Error, Result};
pub use evolve::{EvolutionResult, GaConfig};
pub use index::InvertedIndex;
pub use metrics::{ContingencyTable, ValidationScores};
pub use querygen::{Chromosome, DecodeConfig, KMode, Query, QuerySet};
pub use harness::{ExperimentConfig, Mode, Report};
pub use wordlist::{IdfBase, WordList};
