//! Planted bipartite model: `k` left clusters of `ell` vertices each, right
//! clusters of `r` vertices drawn uniformly from `[n]`, and independent
//! edges with probability `p` inside a bicluster and `q` elsewhere.
//!
//! Records are regenerated on demand from per-vertex random streams, so a
//! stream of millions of vertices costs only the permutation in memory.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::stream::{Record, RecordGenerator, StreamSource};
use crate::vector::SparseBinaryVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// Cross-cluster edge probability.
    Probability(f64),
    /// Expected number of noise neighbors per left vertex.
    ExpectedDegree(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedParams {
    pub n: usize,
    pub k: usize,
    /// Left cluster size.
    pub ell: usize,
    /// Right cluster size.
    pub r: usize,
    pub p: f64,
    pub noise: Noise,
    pub seed: u64,
    /// Sample the right clusters pairwise disjoint.
    pub disjoint_right: bool,
    /// Stream left vertices in random order (otherwise cluster by cluster).
    pub shuffle: bool,
}

impl Default for PlantedParams {
    /// n=8000, k=50, ell=200, r=30, p=0.7, 20 expected noise neighbors.
    fn default() -> Self {
        Self {
            n: 8000,
            k: 50,
            ell: 200,
            r: 30,
            p: 0.7,
            noise: Noise::ExpectedDegree(20.0),
            seed: 0,
            disjoint_right: false,
            shuffle: true,
        }
    }
}

impl PlantedParams {
    pub fn m(&self) -> usize {
        self.k * self.ell
    }

    pub fn q(&self) -> f64 {
        match self.noise {
            Noise::Probability(q) => q,
            Noise::ExpectedDegree(d) => {
                let rest = self.n.saturating_sub(self.r);
                if rest == 0 {
                    0.0
                } else {
                    d / rest as f64
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidParameter(s));
        let q = self.q();
        if self.n == 0 || self.n > u32::MAX as usize {
            return bad(format!("n={} out of range", self.n));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.r > self.n {
            return bad(format!("r={} exceeds n={}", self.r, self.n));
        }
        if self.disjoint_right && self.k * self.r > self.n {
            return bad(format!("disjoint right clusters need k*r <= n ({} > {})", self.k * self.r, self.n));
        }
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&q) || q >= self.p {
            return bad(format!("need 0 <= q < p <= 1, got p={} q={q}", self.p));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Cluster of every left vertex, indexed by left id.
    pub left_cluster: Vec<usize>,
    /// Right cluster index sets, ascending.
    pub right: Vec<Vec<u32>>,
}

impl GroundTruth {
    pub fn k(&self) -> usize {
        self.right.len()
    }

    pub fn left_clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k()];
        for (u, &c) in self.left_cluster.iter().enumerate() {
            out[c].push(u);
        }
        out
    }

    pub fn to_text(&self, n: usize) -> String {
        let mut s = format!(
            "#sofa-truth\tk={}\tm={}\tn={n}\n",
            self.k(),
            self.left_cluster.len()
        );
        for (i, v) in self.right.iter().enumerate() {
            let ids: Vec<String> = v.iter().map(u32::to_string).collect();
            s.push_str(&format!("V\t{i}\t{}\n", ids.join(" ")));
        }
        for (u, c) in self.left_cluster.iter().enumerate() {
            s.push_str(&format!("U\t{u}\t{c}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, reason: &str| Error::Malformed {
            path: "<truth>".into(),
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let header = lines.next().ok_or_else(|| bad(1, "empty file"))?.1;
        let mut k = None;
        let mut m = None;
        for tok in header.split('\t') {
            if let Some(v) = tok.strip_prefix("k=") {
                k = v.parse().ok();
            } else if let Some(v) = tok.strip_prefix("m=") {
                m = v.parse().ok();
            }
        }
        if !header.starts_with("#sofa-truth") {
            return Err(bad(1, "missing `#sofa-truth` header"));
        }
        let (k, m): (usize, usize) = (k.ok_or_else(|| bad(1, "missing k"))?, m.ok_or_else(|| bad(1, "missing m"))?);
        let mut right = vec![Vec::new(); k];
        let mut left_cluster = vec![usize::MAX; m];
        for (no, line) in lines {
            let f: Vec<&str> = line.split('\t').collect();
            match f.as_slice() {
                ["V", i, ids] => {
                    let i: usize = i.parse().map_err(|_| bad(no, "bad cluster index"))?;
                    let slot = right.get_mut(i).ok_or_else(|| bad(no, "cluster index out of range"))?;
                    *slot = ids
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| bad(no, "bad right id")))
                        .collect::<Result<_>>()?;
                }
                ["U", u, c] => {
                    let u: usize = u.parse().map_err(|_| bad(no, "bad left id"))?;
                    let c: usize = c.parse().map_err(|_| bad(no, "bad cluster"))?;
                    if c >= k {
                        return Err(bad(no, "cluster out of range"));
                    }
                    *left_cluster.get_mut(u).ok_or_else(|| bad(no, "left id out of range"))? = c;
                }
                _ => return Err(bad(no, "unrecognized line")),
            }
        }
        if left_cluster.contains(&usize::MAX) {
            return Err(bad(0, "some left vertices lack a cluster"));
        }
        Ok(Self { left_cluster, right })
    }

    pub fn write(&self, n: usize, path: impl AsRef<Path>) -> Result<()> {
        fs::File::create(path)?.write_all(self.to_text(n).as_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

/// Seeded planted instance; generates each record on request.
#[derive(Debug, Clone)]
pub struct PlantedModel {
    params: PlantedParams,
    q: f64,
    right: Vec<Vec<u32>>,
    order: Vec<u32>,
}

const EDGE_STREAM_SALT: u64 = 0x5eed_0f_ed9e5;

impl PlantedModel {
    pub fn new(params: PlantedParams) -> Result<Self> {
        params.validate()?;
        let m = params.m();
        if m > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("m={m} too large")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let right: Vec<Vec<u32>> = if params.disjoint_right {
            let all = index::sample(&mut rng, params.n, params.k * params.r).into_vec();
            all.chunks(params.r.max(1))
                .take(params.k)
                .map(|c| sorted_u32(c))
                .chain(std::iter::repeat_with(Vec::new))
                .take(params.k)
                .collect()
        } else {
            (0..params.k)
                .map(|_| sorted_u32(&index::sample(&mut rng, params.n, params.r).into_vec()))
                .collect()
        };
        let mut order: Vec<u32> = (0..m as u32).collect();
        if params.shuffle {
            order.shuffle(&mut rng);
        }
        let q = params.q();
        Ok(Self {
            params,
            q,
            right,
            order,
        })
    }

    pub fn params(&self) -> &PlantedParams {
        &self.params
    }

    pub fn truth(&self) -> GroundTruth {
        GroundTruth {
            left_cluster: (0..self.params.m()).map(|u| u / self.params.ell).collect(),
            right: self.right.clone(),
        }
    }

    /// Truth keyed by stream position instead of left id, matching files
    /// whose ids are line numbers.
    pub fn truth_by_position(&self) -> GroundTruth {
        GroundTruth {
            left_cluster: self.order.iter().map(|&u| u as usize / self.params.ell).collect(),
            right: self.right.clone(),
        }
    }

    /// Neighborhood of left vertex `u` (by id, not stream position).
    pub fn neighbors(&self, u: usize) -> Vec<u32> {
        let n = self.params.n;
        let cluster = &self.right[u / self.params.ell];
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed ^ EDGE_STREAM_SALT);
        rng.set_stream(u as u64);
        let mut out: Vec<u32> = cluster
            .iter()
            .copied()
            .filter(|_| rng.random::<f64>() < self.params.p)
            .collect();
        let rest = n - cluster.len();
        if self.q > 0.0 && rest > 0 {
            if self.q > 0.1 {
                out.extend(
                    (0..n as u32).filter(|v| cluster.binary_search(v).is_err() && rng.random::<f64>() < self.q),
                );
            } else {
                let count = Binomial::new(rest as u64, self.q)
                    .expect("q validated")
                    .sample(&mut rng) as usize;
                let start = out.len();
                while out.len() - start < count {
                    let v = rng.random_range(0..n as u32);
                    if cluster.binary_search(&v).is_err() && !out[start..].contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Stream records in order, without the pass budget of a source.
    pub fn records(&self) -> impl Iterator<Item = Record> + '_ {
        (0..self.order.len()).map(|i| self.record(i))
    }

    pub fn into_source(self) -> StreamSource {
        StreamSource::from_generator(Arc::new(self))
    }
}

fn sorted_u32(ix: &[usize]) -> Vec<u32> {
    let mut v: Vec<u32> = ix.iter().map(|&i| i as u32).collect();
    v.sort_unstable();
    v
}

impl RecordGenerator for PlantedModel {
    fn universe(&self) -> usize {
        self.params.n
    }

    fn len(&self) -> usize {
        self.order.len()
    }

    fn record(&self, position: usize) -> Record {
        let u = self.order[position] as usize;
        let vector = SparseBinaryVector::new(self.params.n, self.neighbors(u)).expect("sorted, in range");
        Record::new(u, vector)
    }
}

/// Planted stream plus its ground truth.
pub fn generate_planted(params: PlantedParams) -> Result<(StreamSource, GroundTruth)> {
    let model = PlantedModel::new(params)?;
    let truth = model.truth();
    Ok((model.into_source(), truth))
}
