//! Nearest-neighbour expansion of partial clusterings.
//!
//! Documents are TF-IDF vectors (`count * ln(1 + |D|/DF)`, L2-normalised);
//! each unassigned document takes the majority cluster of its K nearest
//! assigned documents by Euclidean distance.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::assignment::ClusterAssignment;
use crate::error::{Error, Result};
use crate::index::{InvertedIndex, TermId};
use crate::wordlist::idf;

pub const DEFAULT_K: usize = 10;

/// Sparse unit vector sorted by term id. Empty documents give the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    pub entries: Vec<(TermId, f64)>,
}

impl DocVector {
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &DocVector) -> f64 {
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            match self.entries[i].0.cmp(&other.entries[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    sum += self.entries[i].1 * other.entries[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn weight(&self, term: TermId) -> f64 {
        self.entries
            .binary_search_by_key(&term, |e| e.0)
            .map_or(0.0, |i| self.entries[i].1)
    }
}

pub fn vectorize(index: &InvertedIndex, doc: usize) -> Result<DocVector> {
    let n = index.doc_count();
    let mut entries: Vec<(TermId, f64)> = index
        .doc_terms(doc)?
        .iter()
        .map(|&(t, c)| (t, c as f64 * idf(n, index.doc_freq_by_id(t))))
        .collect();
    let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for e in &mut entries {
            e.1 /= norm;
        }
    }
    Ok(DocVector { entries })
}

/// Assigns every unassigned document by majority vote of its `k` nearest
/// assigned documents. Seed documents keep their clusters.
///
/// Ties: equal distances are broken by lower document ordinal; equal vote
/// counts go to the tied cluster whose member appears first in the
/// neighbour list.
pub fn knn_expand(index: &InvertedIndex, seeds: &ClusterAssignment, k: usize) -> Result<ClusterAssignment> {
    if seeds.assigned_count() == 0 || seeds.cluster_count() == 0 {
        return Err(Error::NoSeeds);
    }
    if k == 0 {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    let n = index.doc_count();
    let vectors: Vec<DocVector> = (0..n).map(|d| vectorize(index, d)).collect::<Result<_>>()?;
    let sq_norms: Vec<f64> = vectors.iter().map(|v| v.entries.iter().map(|(_, w)| w * w).sum()).collect();

    // Postings of assigned documents only: term -> [(doc, weight)].
    let mut seed_postings: Vec<Vec<(usize, f64)>> = vec![Vec::new(); index.vocabulary_size()];
    let assigned: Vec<usize> = (0..n).filter(|&d| seeds.get(d).is_some()).collect();
    for &d in &assigned {
        for &(t, w) in &vectors[d].entries {
            seed_postings[t as usize].push((d, w));
        }
    }

    let unassigned: Vec<usize> = (0..n).filter(|&d| seeds.get(d).is_none()).collect();
    let votes: Vec<(usize, usize)> = unassigned
        .par_iter()
        .map(|&doc| {
            let mut dots = vec![0.0; n];
            for &(t, w) in &vectors[doc].entries {
                for &(other, ow) in &seed_postings[t as usize] {
                    dots[other] += w * ow;
                }
            }
            let mut neighbours: Vec<(f64, usize)> = assigned
                .iter()
                .map(|&other| {
                    let d2 = (sq_norms[doc] + sq_norms[other] - 2.0 * dots[other]).max(0.0);
                    (d2, other)
                })
                .collect();
            let take = k.min(neighbours.len());
            let by_distance =
                |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if take < neighbours.len() {
                neighbours.select_nth_unstable_by(take - 1, by_distance);
                neighbours.truncate(take);
            }
            neighbours.sort_by(by_distance);
            let clusters: Vec<usize> = neighbours
                .iter()
                .map(|&(_, d)| seeds.get(d).expect("neighbour is assigned"))
                .collect();
            (doc, majority(&clusters, seeds.cluster_count()))
        })
        .collect();

    let mut result = seeds.clone();
    for (doc, cluster) in votes {
        result.set(doc, cluster);
    }
    Ok(result)
}

/// Most frequent cluster in a nearest-first list; ties go to the cluster seen first.
fn majority(clusters: &[usize], cluster_count: usize) -> usize {
    let mut tally = vec![0usize; cluster_count];
    for &c in clusters {
        tally[c] += 1;
    }
    let best = tally.iter().copied().max().unwrap_or(0);
    clusters
        .iter()
        .copied()
        .find(|&c| tally[c] == best)
        .expect("at least one neighbour")
}
