//! Recovery quality against a planted truth and reconstruction error of a
//! Boolean factorization, both computed record by record.

use std::collections::HashMap;

use serde::Serialize;

use crate::artifact::LeftAssignment;
use crate::error::{Error, Result};
use crate::stream::Record;
use crate::vector::sorted_intersection_len;

/// Jaccard coefficient of two sorted sets; 1 for two empty sets.
pub fn jaccard<T: Ord>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = sorted_intersection_len(a, b);
    inter as f64 / (a.len() + b.len() - inter) as f64
}

/// Mean over ground-truth clusters of the best Jaccard match among `found`.
/// Inputs need not be sorted.
pub fn quality<T: Ord + Clone>(ground: &[Vec<T>], found: &[Vec<T>]) -> f64 {
    if ground.is_empty() {
        return 0.0;
    }
    let sorted = |sets: &[Vec<T>]| -> Vec<Vec<T>> {
        sets.iter()
            .map(|s| {
                let mut s = s.clone();
                s.sort();
                s.dedup();
                s
            })
            .collect()
    };
    let (ground, found) = (sorted(ground), sorted(found));
    let total: f64 = ground
        .iter()
        .map(|g| found.iter().map(|f| jaccard(g, f)).fold(0.0, f64::max))
        .sum();
    total / ground.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionStats {
    pub edges: u64,
    pub mismatches: u64,
    pub covered: u64,
    pub gain: f64,
    pub recall: f64,
}

/// Compares every row `Γ(u)` with `R(u)`, the union of the right clusters
/// `u` belongs to. Left vertices missing from `left` have an empty row.
pub fn reconstruction_stats<I>(records: I, left: &LeftAssignment, right: &[Vec<u32>]) -> Result<ReconstructionStats>
where
    I: IntoIterator<Item = Result<Record>>,
{
    let members: HashMap<usize, Vec<usize>> = left.memberships().into_iter().collect();
    let (mut edges, mut mismatches, mut covered) = (0u64, 0u64, 0u64);
    let mut row: Vec<u32> = Vec::new();
    for rec in records {
        let rec = rec?;
        row.clear();
        if let Some(cs) = members.get(&rec.id) {
            for &c in cs {
                let cluster = right.get(c).ok_or_else(|| {
                    Error::InvalidParameter(format!("left vertex {} refers to missing cluster {c}", rec.id))
                })?;
                row.extend_from_slice(cluster);
            }
        }
        row.sort_unstable();
        row.dedup();
        let gamma = rec.vector.indices();
        let inter = sorted_intersection_len(gamma, &row) as u64;
        edges += gamma.len() as u64;
        covered += inter;
        mismatches += gamma.len() as u64 + row.len() as u64 - 2 * inter;
    }
    if edges == 0 {
        return Err(Error::NoEdges);
    }
    Ok(ReconstructionStats {
        edges,
        mismatches,
        covered,
        gain: 1.0 - mismatches as f64 / edges as f64,
        recall: covered as f64 / edges as f64,
    })
}

/// One evaluation result, printable as a JSON line or a TSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub quality: Option<f64>,
    pub left_quality: Option<f64>,
    pub gain: f64,
    pub recall: f64,
    pub edges: u64,
    pub peak_entries: Option<usize>,
    pub phases: Option<usize>,
    pub restarts: Option<usize>,
}

impl MetricsReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub const TSV_HEADER: &'static str = "quality\tleft_quality\tgain\trecall\tedges\tpeak_entries\tphases\trestarts";

    pub fn to_tsv_row(&self) -> String {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map_or_else(|| "-".to_string(), |x| x.to_string())
        }
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            opt(self.quality),
            opt(self.left_quality),
            self.gain,
            self.recall,
            self.edges,
            opt(self.peak_entries),
            opt(self.phases),
            opt(self.restarts)
        )
    }
}
