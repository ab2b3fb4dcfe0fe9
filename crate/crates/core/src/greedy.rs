//! Distance-threshold greedy clustering of the left stream.
//!
//! A vertex farther than the threshold from every center opens a new center;
//! otherwise it joins its closest center, whose sketch absorbs its
//! neighbors. Thresholding the sketches afterwards yields one right cluster
//! per center.

use crate::center::{CenterIndex, WeightedCenter};
use crate::error::{Error, Result};
use crate::stream::{Record, StreamSource};
use crate::vector::DistanceMetric;

/// Default for the separation constant of the planted-recovery analysis.
/// It must satisfy `K4 >= (2.02 / 0.98) * (1/2 + 2 K1)` with `K1` small.
pub const DEFAULT_K4: f64 = 2.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyConfig {
    /// Largest distance at which a vertex still joins an existing center.
    pub threshold: f64,
    pub sketch_capacity: usize,
    pub metric: DistanceMetric,
}

impl GreedyConfig {
    pub fn new(threshold: f64, sketch_capacity: usize) -> Self {
        Self {
            threshold,
            sketch_capacity,
            metric: DistanceMetric::symmetric(),
        }
    }
}

/// Parameters prescribed for exact recovery on planted instances: distance
/// threshold `0.49 * K4 * s` and rounding threshold `0.75 * p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub p: f64,
    /// Largest right cluster size.
    pub s: usize,
    pub k4: f64,
}

impl TheoryParams {
    pub fn new(p: f64, s: usize) -> Self {
        Self { p, s, k4: DEFAULT_K4 }
    }

    pub fn distance_threshold(&self) -> f64 {
        0.49 * self.k4 * self.s as f64
    }

    pub fn theta(&self) -> f64 {
        0.75 * self.p
    }
}

pub fn greedy_pass(stream: &mut StreamSource, cfg: &GreedyConfig) -> Result<Vec<WeightedCenter>> {
    let n = stream.universe();
    greedy_over(n, stream.next_pass()?, cfg)
}

/// Greedy clustering over any record sequence with right universe `n`.
pub fn greedy_over<I>(n: usize, records: I, cfg: &GreedyConfig) -> Result<Vec<WeightedCenter>>
where
    I: IntoIterator<Item = Result<Record>>,
{
    if !(cfg.threshold >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "distance threshold must be nonnegative, got {}",
            cfg.threshold
        )));
    }
    let mut centers: Vec<WeightedCenter> = Vec::new();
    let mut index = CenterIndex::new(n, cfg.metric);
    for rec in records {
        let rec = rec?;
        let (closest, d) = index.nearest(&rec.vector)?;
        match closest {
            Some(c) if d <= cfg.threshold => {
                let center = &mut centers[c];
                center.weight += 1;
                for &j in rec.vector.indices() {
                    center.sketch.insert(j, 1.0)?;
                }
            }
            _ => {
                index.push(&rec.vector)?;
                let order = centers.len();
                centers.push(WeightedCenter::open(rec.vector, cfg.sketch_capacity, order)?);
            }
        }
    }
    Ok(centers)
}

/// One right cluster per center: ids whose estimate reaches `theta` times
/// the center weight.
pub fn threshold_clusters(centers: &[WeightedCenter], theta: f64) -> Result<Vec<Vec<u32>>> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
    }
    Ok(centers.iter().map(|c| c.threshold(theta)).collect())
}
