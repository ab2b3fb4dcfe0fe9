use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::sketch::MisraGries;
use crate::vector::{DistanceMetric, SparseBinaryVector};

/// A retained left vertex: its neighborhood, how many left vertices it
/// stands for, and a frequency sketch over their neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCenter {
    pub vector: SparseBinaryVector,
    pub weight: u64,
    pub sketch: MisraGries,
    pub insertion_order: usize,
}

impl WeightedCenter {
    /// A single left vertex with weight 1 and its neighbors in a fresh sketch.
    pub fn open(vector: SparseBinaryVector, capacity: usize, insertion_order: usize) -> Result<Self> {
        let sketch = MisraGries::from_items(capacity, vector.indices())?;
        Ok(Self {
            vector,
            weight: 1,
            sketch,
            insertion_order,
        })
    }

    /// Logical memory in stored entries: vector ids plus live counters.
    pub fn entries(&self) -> usize {
        self.vector.len() + self.sketch.len()
    }

    /// Right vertices whose estimate is at least `theta * weight`.
    pub fn threshold(&self, theta: f64) -> Vec<u32> {
        self.sketch.items_at_least(theta * self.weight as f64)
    }
}

/// Inverted index over center vectors for nearest-center queries. A query
/// touches only the postings of the point's own right vertices, then scans
/// one overlap counter per center.
#[derive(Debug, Clone)]
pub struct CenterIndex {
    n: usize,
    metric: DistanceMetric,
    lens: Vec<usize>,
    postings: HashMap<u32, Vec<u32>>,
    overlap: Vec<u32>,
}

impl CenterIndex {
    pub fn new(n: usize, metric: DistanceMetric) -> Self {
        Self {
            n,
            metric,
            lens: Vec::new(),
            postings: HashMap::new(),
            overlap: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.lens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lens.is_empty()
    }

    pub fn clear(&mut self) {
        self.lens.clear();
        self.postings.clear();
    }

    pub fn push(&mut self, v: &SparseBinaryVector) -> Result<()> {
        self.check(v)?;
        let idx = self.lens.len() as u32;
        self.lens.push(v.len());
        for &j in v.indices() {
            self.postings.entry(j).or_default().push(idx);
        }
        Ok(())
    }

    fn check(&self, v: &SparseBinaryVector) -> Result<()> {
        if v.universe() != self.n {
            return Err(Error::UniverseMismatch {
                left: self.n,
                right: v.universe(),
            });
        }
        Ok(())
    }

    /// Same contract as [`crate::vector::nearest_center`].
    pub fn nearest(&mut self, point: &SparseBinaryVector) -> Result<(Option<usize>, f64)> {
        self.check(point)?;
        if self.lens.is_empty() {
            return Ok((None, f64::INFINITY));
        }
        self.overlap.clear();
        self.overlap.resize(self.lens.len(), 0);
        for j in point.indices() {
            if let Some(list) = self.postings.get(j) {
                for &c in list {
                    self.overlap[c as usize] += 1;
                }
            }
        }
        let mut best = (0usize, f64::INFINITY);
        for (c, (&len, &ov)) in self.lens.iter().zip(&self.overlap).enumerate() {
            let d = self.metric.from_overlap(len, point.len(), ov as usize);
            if d < best.1 {
                best = (c, d);
            }
        }
        Ok((Some(best.0), best.1))
    }
}
