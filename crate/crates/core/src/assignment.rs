use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::InvertedIndex;

/// Partial or total map from document ordinal to cluster index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    assignment: Vec<Option<usize>>,
    cluster_count: usize,
}

impl ClusterAssignment {
    pub fn new(assignment: Vec<Option<usize>>, cluster_count: usize) -> Result<Self> {
        if let Some(bad) = assignment.iter().flatten().find(|&&c| c >= cluster_count) {
            return Err(Error::InvalidConfig(format!(
                "cluster index {bad} out of range for {cluster_count} clusters"
            )));
        }
        Ok(ClusterAssignment {
            assignment,
            cluster_count,
        })
    }

    pub fn unassigned(doc_count: usize, cluster_count: usize) -> Self {
        ClusterAssignment {
            assignment: vec![None; doc_count],
            cluster_count,
        }
    }

    pub fn from_total(labels: &[usize], cluster_count: usize) -> Result<Self> {
        ClusterAssignment::new(labels.iter().map(|&c| Some(c)).collect(), cluster_count)
    }

    pub fn doc_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn get(&self, doc: usize) -> Option<usize> {
        self.assignment.get(doc).copied().flatten()
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.assignment
    }

    pub fn set(&mut self, doc: usize, cluster: usize) {
        assert!(cluster < self.cluster_count);
        self.assignment[doc] = Some(cluster);
    }

    pub fn assigned_count(&self) -> usize {
        self.assignment.iter().flatten().count()
    }

    pub fn is_total(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    /// Fraction of documents with a cluster.
    pub fn coverage(&self) -> f64 {
        if self.assignment.is_empty() {
            return 0.0;
        }
        self.assigned_count() as f64 / self.assignment.len() as f64
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count];
        for &c in self.assignment.iter().flatten() {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn non_empty_cluster_count(&self) -> usize {
        self.cluster_sizes().iter().filter(|&&s| s > 0).count()
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, c)| **c == Some(cluster))
            .map(|(d, _)| d)
    }

    /// `docId,label,clusterIndex,assignedBy` rows. `assignedBy` is `query`
    /// for documents already placed in `seeds`, otherwise `knn`; documents
    /// without a cluster get an empty index.
    pub fn write_csv(&self, path: &Path, index: &InvertedIndex, seeds: Option<&ClusterAssignment>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["docId", "label", "clusterIndex", "assignedBy"])?;
        for (doc, cluster) in self.assignment.iter().enumerate() {
            let label = index.labels()[doc]
                .map(|l| index.label_names()[l].clone())
                .unwrap_or_default();
            let cluster_field = cluster.map(|c| c.to_string()).unwrap_or_default();
            let by = match (cluster, seeds.and_then(|s| s.get(doc))) {
                (None, _) => "",
                (Some(_), Some(_)) => "query",
                (Some(_), None) if seeds.is_some() => "knn",
                (Some(_), None) => "query",
            };
            writer.write_record([index.doc_ids()[doc].as_str(), &label, &cluster_field, by])?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }
}
