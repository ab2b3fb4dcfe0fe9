//! Sparse binary vectors over a right-vertex universe and the Hamming-style
//! distances used by every clustering pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neighborhood of a left vertex: the sorted right-vertex ids it touches.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparseBinaryVector {
    n: usize,
    indices: Vec<u32>,
}

impl SparseBinaryVector {
    /// Builds a vector from strictly increasing indices, all `< n`.
    pub fn new(n: usize, indices: Vec<u32>) -> Result<Self> {
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::UnsortedIndices {
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        if let Some(&last) = indices.last() {
            if last as usize >= n {
                return Err(Error::IndexOutOfRange {
                    index: u64::from(last),
                    n,
                });
            }
        }
        Ok(Self { n, indices })
    }

    /// Sorts and deduplicates arbitrary indices before validating the range.
    pub fn from_unsorted(n: usize, mut indices: Vec<u32>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(n, indices)
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            indices: Vec::new(),
        }
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// Number of ones.
    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: u32) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// Size of the support intersection, by linear merge.
    pub fn intersection_len(&self, other: &Self) -> usize {
        sorted_intersection_len(&self.indices, &other.indices)
    }

    fn check_universe(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::UniverseMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

pub(crate) fn sorted_intersection_len<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Asymmetric weighted Hamming distance. A coordinate where the center has a
/// one and the point a zero costs `alpha`; the reverse costs 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceMetric {
    alpha: f64,
}

impl DistanceMetric {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    /// Plain symmetric Hamming distance.
    pub const fn symmetric() -> Self {
        Self { alpha: 1.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Distance from the support sizes and their overlap. Every distance
    /// in the crate goes through here so that indexed and direct
    /// evaluation agree bit for bit.
    #[inline]
    pub fn from_overlap(&self, center_len: usize, point_len: usize, overlap: usize) -> f64 {
        let center_only = (center_len - overlap) as f64;
        let point_only = (point_len - overlap) as f64;
        self.alpha * center_only + point_only
    }

    pub fn distance(&self, center: &SparseBinaryVector, point: &SparseBinaryVector) -> Result<f64> {
        asym_hamming(center, point, *self)
    }
}

impl Default for DistanceMetric {
    fn default() -> Self {
        Self::symmetric()
    }
}

/// `|support(x) △ support(y)|`.
pub fn hamming(x: &SparseBinaryVector, y: &SparseBinaryVector) -> Result<usize> {
    x.check_universe(y)?;
    let overlap = x.intersection_len(y);
    Ok(x.len() + y.len() - 2 * overlap)
}

/// `alpha·|center \ point| + |point \ center|`.
pub fn asym_hamming(
    center: &SparseBinaryVector,
    point: &SparseBinaryVector,
    metric: DistanceMetric,
) -> Result<f64> {
    center.check_universe(point)?;
    let overlap = center.intersection_len(point);
    Ok(metric.from_overlap(center.len(), point.len(), overlap))
}

/// Closest center by asymmetric distance. An empty collection yields
/// `(None, inf)`; ties go to the earliest center.
pub fn nearest_center<'a, I>(
    point: &SparseBinaryVector,
    centers: I,
    metric: DistanceMetric,
) -> Result<(Option<usize>, f64)>
where
    I: IntoIterator<Item = &'a SparseBinaryVector>,
{
    let mut best = (None, f64::INFINITY);
    for (i, c) in centers.into_iter().enumerate() {
        let d = asym_hamming(c, point, metric)?;
        if best.0.is_none() || d < best.1 {
            best = (Some(i), d);
        }
    }
    Ok(best)
}
