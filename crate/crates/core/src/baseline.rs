//! k-means++ over a capped TF-IDF feature space, used as a comparison point.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assignment::ClusterAssignment;
use crate::error::{Error, Result};
use crate::index::{InvertedIndex, TermId};
use crate::wordlist::idf;

pub const DEFAULT_MAX_FEATURES: usize = 1000;
pub const DEFAULT_MAX_ITERS: usize = 300;

/// Dense row-major document × feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    pub feature_terms: Vec<String>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidConfig("ragged feature rows".into()));
        }
        Ok(FeatureMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
            feature_terms: (0..cols).map(|j| format!("f{j}")).collect(),
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Keeps the `max_features` terms with the highest document frequency.
pub fn tfidf_matrix(index: &InvertedIndex, max_features: usize) -> FeatureMatrix {
    let n = index.doc_count();
    let mut by_df: Vec<TermId> = (0..index.vocabulary_size() as TermId).collect();
    by_df.sort_by(|&a, &b| {
        index
            .doc_freq_by_id(b)
            .cmp(&index.doc_freq_by_id(a))
            .then_with(|| index.term(a).cmp(index.term(b)))
    });
    by_df.truncate(max_features);
    let cols = by_df.len();

    let mut data = vec![0.0; n * cols];
    for (col, &term) in by_df.iter().enumerate() {
        let weight = idf(n, index.doc_freq_by_id(term));
        for p in index.postings_by_id(term) {
            data[p.doc as usize * cols + col] = p.count as f64 * weight;
        }
    }
    for row in data.chunks_mut(cols.max(1)) {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    FeatureMatrix {
        rows: n,
        cols,
        data,
        feature_terms: by_df.iter().map(|&t| index.term(t).to_owned()).collect(),
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone)]
pub struct KMeansOutcome {
    pub assignment: ClusterAssignment,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squares after each Lloyd iteration.
    pub inertia: Vec<f64>,
    pub iterations: usize,
}

pub fn kmeans_pp(matrix: &FeatureMatrix, k: usize, seed: u64, max_iters: usize) -> Result<ClusterAssignment> {
    kmeans_pp_traced(matrix, k, seed, max_iters).map(|o| o.assignment)
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn seed_centroids(matrix: &FeatureMatrix, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = matrix.rows;
    let mut centroids = vec![matrix.row(rng.random_range(0..n)).to_vec()];
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(matrix.row(i), &centroids[0])).collect();
    while centroids.len() < k {
        let next = match WeightedIndex::new(&closest) {
            Ok(dist) => dist.sample(rng),
            // every point coincides with a centroid
            Err(_) => rng.random_range(0..n),
        };
        let c = matrix.row(next).to_vec();
        for (i, d) in closest.iter_mut().enumerate() {
            *d = d.min(sq_dist(matrix.row(i), &c));
        }
        centroids.push(c);
    }
    centroids
}

/// k-means++ seeding followed by Lloyd iterations until assignments settle.
pub fn kmeans_pp_traced(matrix: &FeatureMatrix, k: usize, seed: u64, max_iters: usize) -> Result<KMeansOutcome> {
    let n = matrix.rows;
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(matrix, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut inertia = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iters.max(1) {
        iterations += 1;
        let nearest_all: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .map(|i| nearest(matrix.row(i), &centroids))
            .collect();
        let mut new_labels: Vec<usize> = nearest_all.iter().map(|&(j, _)| j).collect();
        repair_empty(matrix, &mut centroids, &mut new_labels, &nearest_all);

        let changed = new_labels != labels;
        labels = new_labels;
        centroids = recompute(matrix, &labels, k);
        inertia.push((0..n).map(|i| sq_dist(matrix.row(i), &centroids[labels[i]])).sum());
        if !changed {
            break;
        }
    }

    Ok(KMeansOutcome {
        assignment: ClusterAssignment::from_total(&labels, k)?,
        centroids,
        inertia,
        iterations,
    })
}

/// Moves each empty cluster's centroid onto the point farthest from its own
/// centroid and hands that point over.
fn repair_empty(
    matrix: &FeatureMatrix,
    centroids: &mut [Vec<f64>],
    labels: &mut [usize],
    nearest_all: &[(usize, f64)],
) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut taken = vec![false; labels.len()];
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let far = (0..labels.len())
            .filter(|&i| !taken[i] && sizes[labels[i]] > 1)
            .max_by(|&a, &b| nearest_all[a].1.total_cmp(&nearest_all[b].1).then(b.cmp(&a)));
        let Some(far) = far else { break };
        sizes[labels[far]] -= 1;
        sizes[j] = 1;
        labels[far] = j;
        taken[far] = true;
        centroids[j] = matrix.row(far).to_vec();
    }
}

fn recompute(matrix: &FeatureMatrix, labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; matrix.cols]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(matrix.row(i)) {
            *s += x;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|x| *x /= c as f64);
        }
    }
    sums
}
