//! Weighted k-medians over sparse binary vectors by single-swap local search.
//!
//! Medoids are input points. Starting from a farthest-point seeding, the
//! search scans candidate points cyclically; for each candidate it finds the
//! best medoid to replace in one sweep over the data (removal losses are
//! cached, as in FasterPAM) and performs the swap eagerly if it lowers the
//! cost by more than a factor `1 - 1/1000`. The search stops after a full
//! cycle without a swap.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vector::{DistanceMetric, SparseBinaryVector};

/// Relative improvement a swap must reach to be accepted.
pub const SWAP_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct KMediansResult {
    /// Point index of each medoid, one per group; fewer than `k` when there
    /// are fewer points than groups.
    pub medoids: Vec<usize>,
    /// Group of every point.
    pub assignment: Vec<usize>,
    /// `k` groups of point indices; trailing groups may be empty.
    pub groups: Vec<Vec<usize>>,
    pub cost: f64,
    /// Cost after initialization and after every accepted swap.
    pub cost_trace: Vec<f64>,
    /// Set when `k` exceeded the number of points.
    pub padded: bool,
}

/// Distances from one point (as medoid) to all points, via an inverted
/// index of right vertex -> points containing it.
struct DistanceRows<'a> {
    points: &'a [SparseBinaryVector],
    postings: HashMap<u32, Vec<u32>>,
    metric: DistanceMetric,
    overlap: Vec<u32>,
}

impl<'a> DistanceRows<'a> {
    fn new(points: &'a [SparseBinaryVector], metric: DistanceMetric) -> Self {
        let mut postings: HashMap<u32, Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            for &j in p.indices() {
                postings.entry(j).or_default().push(i as u32);
            }
        }
        Self {
            points,
            postings,
            metric,
            overlap: vec![0; points.len()],
        }
    }

    fn row(&mut self, medoid: usize, out: &mut Vec<f64>) {
        self.overlap.iter_mut().for_each(|o| *o = 0);
        let center = &self.points[medoid];
        for j in center.indices() {
            if let Some(list) = self.postings.get(j) {
                for &p in list {
                    self.overlap[p as usize] += 1;
                }
            }
        }
        out.clear();
        out.extend(
            self.points
                .iter()
                .zip(&self.overlap)
                .map(|(p, &ov)| self.metric.from_overlap(center.len(), p.len(), ov as usize)),
        );
    }
}

struct Nearest {
    first: Vec<usize>,
    dn: Vec<f64>,
    ds: Vec<f64>,
}

fn nearest_two(dmed: &[Vec<f64>], n_points: usize) -> Nearest {
    let mut nearest = Nearest {
        first: vec![0; n_points],
        dn: vec![f64::INFINITY; n_points],
        ds: vec![f64::INFINITY; n_points],
    };
    for (m, row) in dmed.iter().enumerate() {
        for j in 0..n_points {
            let d = row[j];
            if d < nearest.dn[j] {
                nearest.ds[j] = nearest.dn[j];
                nearest.dn[j] = d;
                nearest.first[j] = m;
            } else if d < nearest.ds[j] {
                nearest.ds[j] = d;
            }
        }
    }
    nearest
}

pub fn kmedians_local_search(
    points: &[SparseBinaryVector],
    weights: &[f64],
    k: usize,
    metric: DistanceMetric,
    seed: u64,
) -> Result<KMediansResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter("k-medians needs at least one point".into()));
    }
    if weights.len() != points.len() {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {} points",
            weights.len(),
            points.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidWeight(*w));
    }
    let n0 = points[0].universe();
    if let Some(p) = points.iter().find(|p| p.universe() != n0) {
        return Err(Error::UniverseMismatch {
            left: n0,
            right: p.universe(),
        });
    }
    let np = points.len();

    if k >= np {
        let mut groups: Vec<Vec<usize>> = (0..np).map(|i| vec![i]).collect();
        groups.resize(k, Vec::new());
        return Ok(KMediansResult {
            medoids: (0..np).collect(),
            assignment: (0..np).collect(),
            groups,
            cost: 0.0,
            cost_trace: vec![0.0],
            padded: k > np,
        });
    }

    let mut rows = DistanceRows::new(points, metric);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Farthest-point seeding.
    let mut medoids = vec![rng.random_range(0..np)];
    let mut dmed: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut row = Vec::with_capacity(np);
    rows.row(medoids[0], &mut row);
    let mut closest = row.clone();
    dmed.push(row.clone());
    while medoids.len() < k {
        let next = (0..np)
            .filter(|i| !medoids.contains(i))
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if closest[b] >= closest[i] => Some(b),
                _ => Some(i),
            })
            .expect("fewer medoids than points");
        medoids.push(next);
        rows.row(next, &mut row);
        for (c, &d) in closest.iter_mut().zip(&row) {
            *c = c.min(d);
        }
        dmed.push(row.clone());
    }

    let total = |near: &Nearest| -> f64 { near.dn.iter().zip(weights).map(|(d, w)| d * w).sum() };
    let mut near = nearest_two(&dmed, np);
    let mut cost = total(&near);
    let mut cost_trace = vec![cost];

    let removal_loss = |near: &Nearest| -> Vec<f64> {
        let mut loss = vec![0.0; k];
        if k > 1 {
            for j in 0..np {
                loss[near.first[j]] += weights[j] * (near.ds[j] - near.dn[j]);
            }
        }
        loss
    };
    let mut loss = removal_loss(&near);

    let mut since_swap = 0usize;
    let mut candidate = 0usize;
    while since_swap < np && cost > 0.0 {
        let x = candidate;
        candidate = (candidate + 1) % np;
        since_swap += 1;
        if medoids.contains(&x) {
            continue;
        }
        rows.row(x, &mut row);
        let (slot, change) = if k == 1 {
            let c: f64 = (0..np).map(|j| weights[j] * (row[j] - near.dn[j])).sum();
            (0, c)
        } else {
            let mut delta = loss.clone();
            let mut gain = 0.0;
            for j in 0..np {
                let (d, dn, ds, w) = (row[j], near.dn[j], near.ds[j], weights[j]);
                if d < dn {
                    gain += w * (d - dn);
                    delta[near.first[j]] += w * (dn - ds);
                } else if d < ds {
                    delta[near.first[j]] += w * (d - ds);
                }
            }
            let (slot, best) = delta
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (m, &v)| if v < acc.1 { (m, v) } else { acc });
            (slot, best + gain)
        };
        if cost + change < (1.0 - SWAP_TOLERANCE) * cost {
            medoids[slot] = x;
            dmed[slot].clone_from(&row);
            near = nearest_two(&dmed, np);
            let new_cost = total(&near);
            debug_assert!(new_cost <= cost);
            cost = new_cost;
            cost_trace.push(cost);
            loss = removal_loss(&near);
            since_swap = 0;
        }
    }

    let mut groups = vec![Vec::new(); k];
    for (j, &g) in near.first.iter().enumerate() {
        groups[g].push(j);
    }
    Ok(KMediansResult {
        medoids,
        assignment: near.first,
        groups,
        cost,
        cost_trace,
        padded: false,
    })
}
