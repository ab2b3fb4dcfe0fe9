//! Left-side recovery during the second pass, given right clusters.
//!
//! Biclustering assigns each left vertex to the cluster that covers the
//! largest fraction of itself; BMF greedily covers each neighborhood with
//! clusters while the cover keeps shrinking the symmetric difference.

use crate::artifact::LeftAssignment;
use crate::error::{Error, Result};
use crate::stream::{Record, StreamSource};
use crate::vector::sorted_intersection_len;

/// `|(X \ Y) ∩ A| - |A \ (X ∪ Y)|` for sorted, deduplicated sets.
pub fn score(a: &[u32], x: &[u32], y: &[u32]) -> i64 {
    let mut gained = 0i64;
    let mut overcovered = 0i64;
    for &e in a {
        let in_x = x.binary_search(&e).is_ok();
        let in_y = y.binary_search(&e).is_ok();
        if in_x && !in_y {
            gained += 1;
        } else if !in_x && !in_y {
            overcovered += 1;
        }
    }
    gained - overcovered
}

/// Cluster covering the largest fraction of `gamma`; `None` when nothing
/// overlaps. Empty clusters never win.
pub fn best_exclusive(gamma: &[u32], clusters: &[Vec<u32>]) -> Option<usize> {
    let mut best: Option<(usize, usize, usize)> = None; // (cluster, overlap, size)
    for (i, c) in clusters.iter().enumerate() {
        if c.is_empty() {
            continue;
        }
        let ov = sorted_intersection_len(gamma, c);
        if ov == 0 {
            continue;
        }
        // ov / |c| > best_ov / best_size, compared exactly
        let better = match best {
            None => true,
            Some((_, bo, bs)) => ov * bs > bo * c.len(),
        };
        if better {
            best = Some((i, ov, c.len()));
        }
    }
    best.map(|b| b.0)
}

/// Greedy cover of `gamma`: clusters picked in order and the score each one
/// contributed.
pub fn cover_vertex(gamma: &[u32], clusters: &[Vec<u32>]) -> Vec<(usize, i64)> {
    let mut covered: Vec<u32> = Vec::new();
    let mut used = vec![false; clusters.len()];
    let mut picks = Vec::new();
    loop {
        let mut best: Option<(usize, i64)> = None;
        for (i, c) in clusters.iter().enumerate() {
            if used[i] {
                continue;
            }
            let s = score(c, gamma, &covered);
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((i, s));
            }
        }
        match best {
            Some((i, s)) if s > 0 => {
                used[i] = true;
                picks.push((i, s));
                covered = sorted_union(&covered, &clusters[i]);
            }
            _ => break,
        }
    }
    picks
}

fn sorted_union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn assign_left(stream: &mut StreamSource, right_clusters: &[Vec<u32>]) -> Result<LeftAssignment> {
    assign_left_over(stream.next_pass()?, right_clusters)
}

pub fn assign_left_over<I>(records: I, right_clusters: &[Vec<u32>]) -> Result<LeftAssignment>
where
    I: IntoIterator<Item = Result<Record>>,
{
    let mut out = Vec::new();
    for r in records {
        let r = r?;
        out.push((r.id, best_exclusive(r.vector.indices(), right_clusters)));
    }
    Ok(LeftAssignment::Exclusive(out))
}

/// Cover memberships plus the total score collected by each cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverResult {
    pub left: LeftAssignment,
    pub totals: Vec<i64>,
}

pub fn cover_left(stream: &mut StreamSource, right_clusters: &[Vec<u32>]) -> Result<CoverResult> {
    cover_left_over(stream.next_pass()?, right_clusters)
}

pub fn cover_left_over<I>(records: I, right_clusters: &[Vec<u32>]) -> Result<CoverResult>
where
    I: IntoIterator<Item = Result<Record>>,
{
    let mut totals = vec![0i64; right_clusters.len()];
    let mut out = Vec::new();
    for r in records {
        let r = r?;
        let picks = cover_vertex(r.vector.indices(), right_clusters);
        let mut member: Vec<usize> = picks.iter().map(|&(i, _)| i).collect();
        for &(i, s) in &picks {
            totals[i] += s;
        }
        member.sort_unstable();
        out.push((r.id, member));
    }
    Ok(CoverResult {
        left: LeftAssignment::Cover(out),
        totals,
    })
}

/// Indices of the `k` clusters with the highest totals, in original order.
/// Ties favor the lower index.
pub fn top_k_indices(totals: &[i64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..totals.len()).collect();
    order.sort_by(|&a, &b| totals[b].cmp(&totals[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Keeps the `k` best-scoring clusters and renumbers the cover to match;
/// memberships in dropped clusters are discarded.
pub fn select_top_k(right_clusters: &[Vec<u32>], cover: &CoverResult, k: usize) -> (Vec<Vec<u32>>, LeftAssignment) {
    let keep = top_k_indices(&cover.totals, k);
    let mut remap = vec![None; right_clusters.len()];
    for (new, &old) in keep.iter().enumerate() {
        remap[old] = Some(new);
    }
    let clusters = keep.iter().map(|&i| right_clusters[i].clone()).collect();
    let left = cover
        .left
        .memberships()
        .into_iter()
        .map(|(id, cs)| (id, cs.into_iter().filter_map(|c| remap[c]).collect()))
        .collect();
    (clusters, LeftAssignment::Cover(left))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignMode {
    Exclusive,
    Cover,
}

/// Outcome of assigning left vertices under several candidate clusterings.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdChoice {
    pub theta: f64,
    pub right: Vec<Vec<u32>>,
    pub left: LeftAssignment,
    /// Cover score per cluster (zeros in exclusive mode).
    pub totals: Vec<i64>,
    /// `(theta, |B △ B~|)` for every candidate, in input order.
    pub mismatches: Vec<(f64, u64)>,
}

/// Runs the left assignment for every `(theta, clusters)` candidate in one
/// sweep and keeps the candidate whose reconstruction has the fewest
/// mismatches with the input (ties: earliest candidate).
pub fn line_search<I>(records: I, candidates: Vec<(f64, Vec<Vec<u32>>)>, mode: AssignMode) -> Result<ThresholdChoice>
where
    I: IntoIterator<Item = Result<Record>>,
{
    struct State {
        theta: f64,
        right: Vec<Vec<u32>>,
        exclusive: Vec<(usize, Option<usize>)>,
        cover: Vec<(usize, Vec<usize>)>,
        totals: Vec<i64>,
        mismatches: u64,
    }
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no threshold candidates".into()));
    }
    let mut state: Vec<State> = candidates
        .into_iter()
        .map(|(theta, right)| State {
            theta,
            totals: vec![0; right.len()],
            right,
            exclusive: Vec::new(),
            cover: Vec::new(),
            mismatches: 0,
        })
        .collect();
    let mut row: Vec<u32> = Vec::new();
    for rec in records {
        let rec = rec?;
        let gamma = rec.vector.indices();
        for c in &mut state {
            row.clear();
            match mode {
                AssignMode::Exclusive => {
                    let pick = best_exclusive(gamma, &c.right);
                    if let Some(i) = pick {
                        row.extend_from_slice(&c.right[i]);
                    }
                    c.exclusive.push((rec.id, pick));
                }
                AssignMode::Cover => {
                    let picks = cover_vertex(gamma, &c.right);
                    let mut member = Vec::with_capacity(picks.len());
                    for (i, s) in picks {
                        c.totals[i] += s;
                        member.push(i);
                        row.extend_from_slice(&c.right[i]);
                    }
                    member.sort_unstable();
                    c.cover.push((rec.id, member));
                    row.sort_unstable();
                    row.dedup();
                }
            }
            let inter = sorted_intersection_len(gamma, &row) as u64;
            c.mismatches += (gamma.len() + row.len()) as u64 - 2 * inter;
        }
    }
    let mismatches = state.iter().map(|c| (c.theta, c.mismatches)).collect();
    let best = state
        .into_iter()
        .reduce(|best, c| if c.mismatches < best.mismatches { c } else { best })
        .expect("nonempty");
    let left = match mode {
        AssignMode::Exclusive => LeftAssignment::Exclusive(best.exclusive),
        AssignMode::Cover => LeftAssignment::Cover(best.cover),
    };
    Ok(ThresholdChoice {
        theta: best.theta,
        right: best.right,
        left,
        totals: best.totals,
        mismatches,
    })
}
