//! External cluster validation against ground-truth labels.
//!
//! Homogeneity, completeness and V-measure follow the conditional-entropy
//! definitions of Rosenberg & Hirschberg; the adjusted Rand index is the
//! Hubert & Arabie pair-counting form.

use serde::{Deserialize, Serialize};

use crate::assignment::ClusterAssignment;
use crate::error::{Error, Result};

/// Class × cluster counts over the documents that have a cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    /// Builds a table from explicit counts; rows are classes, columns clusters.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidConfig("ragged contingency table".into()));
        }
        let row_sums: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        let total = row_sums.iter().sum();
        Ok(ContingencyTable {
            counts,
            row_sums,
            col_sums,
            total,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn transpose(&self) -> ContingencyTable {
        let cols = self.col_sums.len();
        let counts = (0..cols)
            .map(|j| self.counts.iter().map(|r| r[j]).collect())
            .collect();
        ContingencyTable::from_counts(counts).expect("transpose of a rectangular table")
    }
}

/// Tabulates assigned documents by (class, cluster). Unassigned documents
/// are skipped; every assigned document needs a label.
pub fn contingency(
    assignment: &ClusterAssignment,
    labels: &[Option<usize>],
    class_count: usize,
) -> Result<ContingencyTable> {
    if class_count == 0 {
        return Err(Error::Unlabeled);
    }
    let mut counts = vec![vec![0u64; assignment.cluster_count()]; class_count];
    for (doc, cluster) in assignment.as_slice().iter().enumerate() {
        let Some(cluster) = cluster else { continue };
        let class = labels.get(doc).copied().flatten().ok_or(Error::Unlabeled)?;
        if class >= class_count {
            return Err(Error::InvalidConfig(format!("label {class} out of range")));
        }
        counts[class][*cluster] += 1;
    }
    ContingencyTable::from_counts(counts)
}

fn entropy(sums: &[u64], total: f64) -> f64 {
    sums.iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Returns `(homogeneity, completeness, v)`.
pub fn v_measure(table: &ContingencyTable, beta: f64) -> (f64, f64, f64) {
    let n = table.total as f64;
    if table.total == 0 {
        return (1.0, 1.0, 1.0);
    }
    let h_c = entropy(&table.row_sums, n);
    let h_k = entropy(&table.col_sums, n);
    let mut h_c_given_k = 0.0;
    let mut h_k_given_c = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij == 0 {
                continue;
            }
            let joint = nij as f64 / n;
            h_c_given_k -= joint * (nij as f64 / table.col_sums[j] as f64).ln();
            h_k_given_c -= joint * (nij as f64 / table.row_sums[i] as f64).ln();
        }
    }
    let h = if h_c == 0.0 { 1.0 } else { 1.0 - h_c_given_k / h_c };
    let c = if h_k == 0.0 { 1.0 } else { 1.0 - h_k_given_c / h_k };
    let denom = beta * h + c;
    let v = if denom == 0.0 { 0.0 } else { (1.0 + beta) * h * c / denom };
    (h, c, v)
}

fn pairs(n: u64) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

pub fn adjusted_rand_index(table: &ContingencyTable) -> f64 {
    if table.total < 2 {
        return 1.0;
    }
    let index: f64 = table.counts.iter().flatten().map(|&x| pairs(x)).sum();
    let rows: f64 = table.row_sums.iter().map(|&x| pairs(x)).sum();
    let cols: f64 = table.col_sums.iter().map(|&x| pairs(x)).sum();
    let expected = rows * cols / pairs(table.total);
    let max = 0.5 * (rows + cols);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// `|non-empty clusters - distinct classes present|`.
pub fn cluster_count_error(assignment: &ClusterAssignment, labels: &[Option<usize>]) -> usize {
    let mut classes: Vec<usize> = labels.iter().flatten().copied().collect();
    classes.sort_unstable();
    classes.dedup();
    assignment.non_empty_cluster_count().abs_diff(classes.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationScores {
    pub h: f64,
    pub c: f64,
    pub v: f64,
    pub ari: f64,
    pub count_error: usize,
    pub beta: f64,
}

/// All scores for an assignment over the documents it assigns.
pub fn evaluate(
    assignment: &ClusterAssignment,
    labels: &[Option<usize>],
    class_count: usize,
) -> Result<ValidationScores> {
    let table = contingency(assignment, labels, class_count)?;
    let (h, c, v) = v_measure(&table, 1.0);
    Ok(ValidationScores {
        h,
        c,
        v,
        ari: adjusted_rand_index(&table),
        count_error: cluster_count_error(assignment, labels),
        beta: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(rows: &[&[u64]]) -> ContingencyTable {
        ContingencyTable::from_counts(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn perfect_split_table() {
        let labels = [Some(0), Some(0), Some(1), Some(1), Some(1)];
        let a = ClusterAssignment::from_total(&[0, 0, 1, 1, 1], 2).unwrap();
        assert_eq!(contingency(&a, &labels, 2).unwrap(), table(&[&[2, 0], &[0, 3]]));
    }

    #[test]
    fn single_cluster_table() {
        let labels = [Some(0), Some(0), Some(0), Some(1), Some(1)];
        let a = ClusterAssignment::from_total(&[0; 5], 1).unwrap();
        assert_eq!(contingency(&a, &labels, 2).unwrap(), table(&[&[3], &[2]]));
    }

    #[test]
    fn toy_seed_table_skips_unassigned() {
        let labels = [Some(0), Some(0), Some(0), Some(1), Some(1), Some(1)];
        let seeds = ClusterAssignment::new(vec![None, Some(0), Some(1), None, None, None], 2).unwrap();
        let t = contingency(&seeds, &labels, 2).unwrap();
        assert_eq!(t, table(&[&[1, 1], &[0, 0]]));
        assert_eq!(t.total(), 2);
    }

    #[test]
    fn unlabeled_documents_are_an_error() {
        let a = ClusterAssignment::from_total(&[0, 0], 1).unwrap();
        assert!(matches!(contingency(&a, &[Some(0), None], 1), Err(Error::Unlabeled)));
        assert!(matches!(contingency(&a, &[None, None], 0), Err(Error::Unlabeled)));
    }

    #[test]
    fn v_measure_perfect() {
        let (h, c, v) = v_measure(&table(&[&[2, 0], &[0, 3]]), 1.0);
        assert_eq!((h, c, v), (1.0, 1.0, 1.0));
    }

    #[test]
    fn v_measure_single_cluster() {
        let (h, c, v) = v_measure(&table(&[&[3], &[2]]), 1.0);
        assert_eq!(h, 0.0);
        assert_eq!(c, 1.0);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn v_measure_mixed_table() {
        // Independent hand evaluation: H(C) from rows (3,2), H(C|K) from
        // columns (2,3) with cells 2|2, 1|3, 2|3.
        let hc = -(0.6f64 * 0.6f64.ln() + 0.4 * 0.4f64.ln());
        let hck = -(0.2 * (1.0f64 / 3.0).ln() + 0.4 * (2.0f64 / 3.0).ln());
        let expected_h = 1.0 - hck / hc;
        let (h, c, v) = v_measure(&table(&[&[2, 1], &[0, 2]]), 1.0);
        assert!((h - expected_h).abs() < 1e-12);
        assert!((h - 0.4325).abs() < 1e-4, "{h}");
        assert!((c - 0.4325).abs() < 1e-4, "{c}");
        assert!((v - 0.4325).abs() < 1e-4, "{v}");
    }

    #[test]
    fn ari_cases() {
        assert_eq!(adjusted_rand_index(&table(&[&[2, 0], &[0, 3]])), 1.0);
        // {1,2|3,4} against {1,2,3|4}
        assert!(adjusted_rand_index(&table(&[&[2, 0], &[1, 1]])).abs() < 1e-12);
        assert_eq!(adjusted_rand_index(&table(&[&[4]])), 1.0);
    }

    #[test]
    fn count_error_cases() {
        let labels: Vec<Option<usize>> = (0..10).map(|i| Some(i % 5)).collect();
        let five = ClusterAssignment::from_total(&(0..10).map(|i| i % 5).collect::<Vec<_>>(), 5).unwrap();
        assert_eq!(cluster_count_error(&five, &labels), 0);
        let seven = ClusterAssignment::from_total(&(0..10).map(|i| i % 7).collect::<Vec<_>>(), 7).unwrap();
        assert_eq!(cluster_count_error(&seven, &labels), 2);
        let two = ClusterAssignment::from_total(&(0..10).map(|i| i % 2).collect::<Vec<_>>(), 2).unwrap();
        assert_eq!(cluster_count_error(&two, &labels), 3);
    }

    #[test]
    fn empty_clusters_do_not_count() {
        let labels = [Some(0), Some(1)];
        let a = ClusterAssignment::from_total(&[0, 2], 4).unwrap();
        assert_eq!(cluster_count_error(&a, &labels), 0);
        assert_eq!(contingency(&a, &labels, 2).unwrap().col_sums().len(), 4);
    }

    fn arb_table() -> impl Strategy<Value = ContingencyTable> {
        (1usize..=6, 1usize..=6)
            .prop_flat_map(|(s, k)| proptest::collection::vec(proptest::collection::vec(0u64..6, k), s))
            .prop_filter("non-empty", |rows| rows.iter().flatten().sum::<u64>() >= 2)
            .prop_map(|rows| ContingencyTable::from_counts(rows).unwrap())
    }

    proptest! {
        #[test]
        fn scores_stay_in_range(t in arb_table()) {
            let (h, c, v) = v_measure(&t, 1.0);
            for x in [h, c, v] {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&x));
            }
            prop_assert!(v >= h.min(c) - 1e-12 && v <= h.max(c) + 1e-12);
            let ari = adjusted_rand_index(&t);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&ari));
        }

        #[test]
        fn transpose_swaps_h_and_c(t in arb_table()) {
            let (h, c, v) = v_measure(&t, 1.0);
            let (th, tc, tv) = v_measure(&t.transpose(), 1.0);
            prop_assert!((h - tc).abs() < 1e-12);
            prop_assert!((c - th).abs() < 1e-12);
            prop_assert!((v - tv).abs() < 1e-12);
            prop_assert!((adjusted_rand_index(&t) - adjusted_rand_index(&t.transpose())).abs() < 1e-12);
        }

        #[test]
        fn column_order_is_irrelevant(t in arb_table(), rotate in 0usize..6) {
            let k = t.col_sums().len();
            let shifted: Vec<Vec<u64>> = t
                .counts()
                .iter()
                .map(|r| (0..k).map(|j| r[(j + rotate) % k]).collect())
                .collect();
            let s = ContingencyTable::from_counts(shifted).unwrap();
            let (a, b) = (v_measure(&t, 1.0), v_measure(&s, 1.0));
            prop_assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12 && (a.2 - b.2).abs() < 1e-12);
            prop_assert!((adjusted_rand_index(&t) - adjusted_rand_index(&s)).abs() < 1e-12);
        }

        #[test]
        fn beta_one_is_harmonic_mean(t in arb_table()) {
            let (h, c, v) = v_measure(&t, 1.0);
            let harmonic = if h + c == 0.0 { 0.0 } else { 2.0 * h * c / (h + c) };
            prop_assert_eq!(v, harmonic);
        }
    }
}
