//! Mergeable Misra–Gries frequent-items summary with weighted updates.
//!
//! A sketch with `capacity` counters never overestimates a frequency and
//! underestimates it by at most `total_weight / (capacity + 1)`. Merging
//! follows the counter-sum-then-reduce scheme of Agarwal et al., which keeps
//! the same bound for the concatenated stream.
//!
//! Counters are stored relative to a running offset, so the decrement of
//! all counters is a single addition and the smallest counter is found in
//! an ordered index: every update costs `O(log capacity)`.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MisraGries {
    capacity: usize,
    /// item -> raw value; the estimate is `raw - offset`.
    raw: HashMap<u32, f64>,
    /// `(raw bits, item)`; raw values are nonnegative, so bit order is value order.
    by_value: BTreeSet<(u64, u32)>,
    offset: f64,
    total_weight: f64,
}

impl PartialEq for MisraGries {
    fn eq(&self, other: &Self) -> bool {
        self.capacity == other.capacity && self.total_weight == other.total_weight && self.entries() == other.entries()
    }
}

impl MisraGries {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::ZeroCapacity);
        }
        Ok(Self {
            capacity,
            raw: HashMap::new(),
            by_value: BTreeSet::new(),
            offset: 0.0,
            total_weight: 0.0,
        })
    }

    /// Sketch over a single neighborhood, each item with unit weight.
    pub fn from_items(capacity: usize, items: &[u32]) -> Result<Self> {
        let mut sk = Self::new(capacity)?;
        for &j in items {
            sk.insert(j, 1.0)?;
        }
        Ok(sk)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Sum of every weight ever inserted (the stream length).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Number of live counters.
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    fn set(&mut self, item: u32, raw: f64) {
        if let Some(old) = self.raw.insert(item, raw) {
            self.by_value.remove(&(old.to_bits(), item));
        }
        self.by_value.insert((raw.to_bits(), item));
    }

    pub fn insert(&mut self, item: u32, weight: f64) -> Result<()> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidWeight(weight));
        }
        self.total_weight += weight;
        if let Some(&old) = self.raw.get(&item) {
            self.set(item, old + weight);
            return Ok(());
        }
        if self.raw.len() < self.capacity {
            self.set(item, self.offset + weight);
            return Ok(());
        }
        // Full table, untracked item: one decrement of all capacity + 1
        // candidates by the smaller of the new weight and the minimum counter.
        let &(min_bits, _) = self.by_value.first().expect("full table is nonempty");
        let min = f64::from_bits(min_bits) - self.offset;
        let delta = weight.min(min);
        self.offset += delta;
        self.evict_nonpositive();
        let rest = weight - delta;
        if rest > 0.0 {
            debug_assert!(self.raw.len() < self.capacity);
            self.set(item, self.offset + rest);
        }
        Ok(())
    }

    fn evict_nonpositive(&mut self) {
        while let Some(&(bits, item)) = self.by_value.first() {
            if f64::from_bits(bits) > self.offset {
                break;
            }
            self.by_value.pop_first();
            self.raw.remove(&item);
        }
    }

    /// Replaces the contents with the given estimates and a zero offset.
    fn rebuild(&mut self, counts: Vec<(u32, f64)>) {
        self.raw.clear();
        self.by_value.clear();
        self.offset = 0.0;
        for (j, c) in counts {
            if c > 0.0 {
                self.raw.insert(j, c);
                self.by_value.insert((c.to_bits(), j));
            }
        }
    }

    /// Merges `other` into `self`; both must share a capacity.
    pub fn merge_from(&mut self, other: &MisraGries) -> Result<()> {
        if self.capacity != other.capacity {
            return Err(Error::CapacityMismatch(self.capacity, other.capacity));
        }
        self.total_weight += other.total_weight;
        let mut sum: HashMap<u32, f64> = self.iter().collect();
        for (j, c) in other.iter() {
            *sum.entry(j).or_insert(0.0) += c;
        }
        let mut counts: Vec<(u32, f64)> = sum.into_iter().collect();
        if counts.len() > self.capacity {
            let mut values: Vec<f64> = counts.iter().map(|&(_, c)| c).collect();
            let (_, pivot, _) = values.select_nth_unstable_by(self.capacity, |a, b| b.total_cmp(a));
            let pivot = *pivot;
            counts.iter_mut().for_each(|(_, c)| *c -= pivot);
        }
        self.rebuild(counts);
        debug_assert!(self.raw.len() <= self.capacity);
        Ok(())
    }

    /// Consuming merge.
    pub fn merge(mut self, other: MisraGries) -> Result<MisraGries> {
        self.merge_from(&other)?;
        Ok(self)
    }

    /// Estimated frequency; zero for untracked items.
    pub fn estimate(&self, item: u32) -> f64 {
        self.raw.get(&item).map_or(0.0, |r| r - self.offset)
    }

    /// Live counters in ascending item order.
    pub fn entries(&self) -> Vec<(u32, f64)> {
        let mut v: Vec<(u32, f64)> = self.iter().collect();
        v.sort_unstable_by_key(|&(j, _)| j);
        v
    }

    /// Live counters in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.raw.iter().map(move |(&j, &r)| (j, r - self.offset))
    }

    /// Worst-case underestimation for any item.
    pub fn error_bound(&self) -> f64 {
        self.total_weight / (self.capacity as f64 + 1.0)
    }

    /// Items whose estimate reaches `threshold`, ascending.
    pub fn items_at_least(&self, threshold: f64) -> Vec<u32> {
        let mut v: Vec<u32> = self.iter().filter(|&(_, c)| c >= threshold).map(|(j, _)| j).collect();
        v.sort_unstable();
        v
    }
}
