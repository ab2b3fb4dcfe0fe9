//! Offline reference clusterers and the reservoir-sampling reduction that
//! turns any of them into a one-pass streaming algorithm.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kmedians::kmedians_local_search;
use crate::stream::{Record, StreamSource};
use crate::vector::{DistanceMetric, SparseBinaryVector};

/// Finds right clusters given the whole (sub)graph in memory.
pub trait StaticRightClusterer {
    fn right_clusters(&self, n: usize, records: &[Record]) -> Result<Vec<Vec<u32>>>;
}

/// k-medians over all left vectors followed by exact frequency counts.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticSofa {
    pub k: usize,
    pub theta: f64,
    pub metric: DistanceMetric,
    pub seed: u64,
    /// Largest number of edges the algorithm may hold.
    pub budget: Option<usize>,
}

impl StaticSofa {
    pub fn new(k: usize, theta: f64, metric: DistanceMetric, seed: u64) -> Self {
        Self {
            k,
            theta,
            metric,
            seed,
            budget: None,
        }
    }

    /// Clusters for several thresholds over one clustering.
    pub fn multi_threshold(&self, n: usize, records: &[Record], thetas: &[f64]) -> Result<Vec<Vec<Vec<u32>>>> {
        let counts = self.group_counts(n, records)?;
        Ok(thetas.iter().map(|&t| threshold_counts(&counts, t)).collect())
    }

    fn group_counts(&self, n: usize, records: &[Record]) -> Result<Vec<(usize, HashMap<u32, usize>)>> {
        if let Some(budget) = self.budget {
            let needed: usize = records.iter().map(|r| r.vector.len()).sum();
            if needed > budget {
                return Err(Error::BudgetExceeded { needed, budget });
            }
        }
        if records.is_empty() {
            return Ok(vec![(0, HashMap::new()); self.k]);
        }
        let vectors: Vec<SparseBinaryVector> = records.iter().map(|r| r.vector.clone()).collect();
        if let Some(v) = vectors.iter().find(|v| v.universe() != n) {
            return Err(Error::UniverseMismatch {
                left: n,
                right: v.universe(),
            });
        }
        let km = kmedians_local_search(&vectors, &vec![1.0; vectors.len()], self.k, self.metric, self.seed)?;
        Ok(km
            .groups
            .iter()
            .map(|g| {
                let mut counts: HashMap<u32, usize> = HashMap::new();
                for &i in g {
                    for &j in vectors[i].indices() {
                        *counts.entry(j).or_default() += 1;
                    }
                }
                (g.len(), counts)
            })
            .collect())
    }
}

fn threshold_counts(counts: &[(usize, HashMap<u32, usize>)], theta: f64) -> Vec<Vec<u32>> {
    counts
        .iter()
        .map(|(size, c)| {
            let cut = theta * *size as f64;
            let mut ids: Vec<u32> = c.iter().filter(|(_, &f)| f as f64 >= cut).map(|(&j, _)| j).collect();
            ids.sort_unstable();
            ids
        })
        .collect()
}

impl StaticRightClusterer for StaticSofa {
    fn right_clusters(&self, n: usize, records: &[Record]) -> Result<Vec<Vec<u32>>> {
        if !(self.theta > 0.0) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {}", self.theta)));
        }
        Ok(threshold_counts(&self.group_counts(n, records)?, self.theta))
    }
}

/// Uniform sample of `size` items from an iterator of unknown length.
pub fn reservoir_sample<T, I, R>(items: I, size: usize, rng: &mut R) -> Vec<T>
where
    I: IntoIterator<Item = T>,
    R: Rng + ?Sized,
{
    let mut sample = Vec::with_capacity(size);
    for (seen, item) in items.into_iter().enumerate() {
        if seen < size {
            sample.push(item);
        } else {
            let slot = rng.random_range(0..=seen);
            if slot < size {
                sample[slot] = item;
            }
        }
    }
    sample
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub right_clusters: Vec<Vec<u32>>,
    /// Left ids in the sample, in stream order.
    pub sample: Vec<usize>,
    /// Right neighbors of the sample (`V'`), ascending.
    pub touched: Vec<u32>,
    /// The `n~` highest-degree members of `touched` (`V''`), ascending.
    pub kept: Vec<u32>,
}

/// Samples `m_tilde` left vertices in one pass, clusters the subgraph induced
/// on the `n_tilde` right vertices most connected to the sample, then
/// attaches every other touched right vertex to the cluster whose mean
/// incidence vector (over the sample) is closest in Euclidean distance.
pub fn rs_reduction(
    stream: &mut StreamSource,
    m_tilde: usize,
    n_tilde: usize,
    algo: &dyn StaticRightClusterer,
    seed: u64,
) -> Result<Reduction> {
    if m_tilde == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let n = stream.universe();
    let sample = sample_records(stream.next_pass()?, m_tilde, seed)?;
    reduce_sample(n, sample, n_tilde, algo)
}

/// Reservoir sample of `m_tilde` records, returned in stream order.
pub fn sample_records<I>(records: I, m_tilde: usize, seed: u64) -> Result<Vec<Record>>
where
    I: IntoIterator<Item = Result<Record>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut err = None;
    let ok = records.into_iter().map_while(|r| r.map_err(|e| err = Some(e)).ok());
    let mut positioned = reservoir_sample(ok.enumerate(), m_tilde, &mut rng);
    if let Some(e) = err {
        return Err(e);
    }
    positioned.sort_by_key(|(pos, _)| *pos);
    Ok(positioned.into_iter().map(|(_, r)| r).collect())
}

/// The clustering half of [`rs_reduction`], on an already drawn sample.
pub fn reduce_sample(n: usize, sample: Vec<Record>, n_tilde: usize, algo: &dyn StaticRightClusterer) -> Result<Reduction> {
    // columns[j] = sample rows adjacent to right vertex j
    let mut columns: HashMap<u32, Vec<u32>> = HashMap::new();
    for (s, rec) in sample.iter().enumerate() {
        for &j in rec.vector.indices() {
            columns.entry(j).or_default().push(s as u32);
        }
    }
    let mut touched: Vec<u32> = columns.keys().copied().collect();
    touched.sort_unstable();
    let mut by_degree = touched.clone();
    by_degree.sort_by(|a, b| columns[b].len().cmp(&columns[a].len()).then(a.cmp(b)));
    by_degree.truncate(n_tilde);
    let mut kept = by_degree;
    kept.sort_unstable();

    let induced: Vec<Record> = sample
        .iter()
        .map(|r| {
            let ix = r.vector.indices().iter().copied().filter(|j| kept.binary_search(j).is_ok()).collect();
            SparseBinaryVector::new(n, ix).map(|v| Record::new(r.id, v))
        })
        .collect::<Result<_>>()?;
    let mut clusters = algo.right_clusters(n, &induced)?;

    let extra: Vec<u32> = touched.iter().copied().filter(|j| kept.binary_search(j).is_err()).collect();
    if !extra.is_empty() {
        // Mean incidence x_i[s] = |Γ(s) ∩ Ṽ_i| / |Ṽ_i| for every nonempty cluster.
        let rows = sample.len();
        let means: Vec<Option<(Vec<f64>, f64)>> = clusters
            .iter()
            .map(|c| {
                if c.is_empty() {
                    return None;
                }
                let mut x = vec![0.0; rows];
                for j in c {
                    for &s in columns.get(j).map_or(&[][..], |v| v.as_slice()) {
                        x[s as usize] += 1.0;
                    }
                }
                let size = c.len() as f64;
                x.iter_mut().for_each(|v| *v /= size);
                let norm = x.iter().map(|v| v * v).sum();
                Some((x, norm))
            })
            .collect();
        let mut additions: Vec<Vec<u32>> = vec![Vec::new(); clusters.len()];
        for &j in &extra {
            let col = &columns[&j];
            // |x_i - x_v|^2 = |x_i|^2 - 2 <x_i, x_v> + |x_v|^2; the last term is shared.
            let best = means
                .iter()
                .enumerate()
                .filter_map(|(i, m)| {
                    m.as_ref().map(|(x, norm)| {
                        let dot: f64 = col.iter().map(|&s| x[s as usize]).sum();
                        (i, norm - 2.0 * dot)
                    })
                })
                .fold(None, |acc: Option<(usize, f64)>, (i, d)| match acc {
                    Some((_, bd)) if bd <= d => acc,
                    _ => Some((i, d)),
                });
            if let Some((i, _)) = best {
                additions[i].push(j);
            }
        }
        for (c, add) in clusters.iter_mut().zip(additions) {
            c.extend(add);
            c.sort_unstable();
        }
    }
    Ok(Reduction {
        right_clusters: clusters,
        sample: sample.iter().map(|r| r.id).collect(),
        touched,
        kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::WeightedCenter;
    use crate::sofa::{sofa_postprocess, SofaConfig};

    fn records(n: usize, rows: &[Vec<u32>]) -> Vec<Record> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| Record::new(i, SparseBinaryVector::from_unsorted(n, r.clone()).unwrap()))
            .collect()
    }

    fn blocks() -> Vec<Vec<u32>> {
        let mut rows = vec![vec![0, 1, 2]; 5];
        rows.extend(vec![vec![5, 6]; 4]);
        rows
    }

    #[test]
    fn static_exact_blocks() {
        let algo = StaticSofa::new(2, 0.5, DistanceMetric::symmetric(), 1);
        let mut got = algo.right_clusters(8, &records(8, &blocks())).unwrap();
        got.sort();
        assert_eq!(got, vec![vec![0, 1, 2], vec![5, 6]]);
        let high = StaticSofa { theta: 1.01, ..algo };
        assert!(high.right_clusters(8, &records(8, &blocks())).unwrap().iter().all(Vec::is_empty));
    }

    #[test]
    fn budget_enforced() {
        let algo = StaticSofa {
            budget: Some(10),
            ..StaticSofa::new(2, 0.5, DistanceMetric::symmetric(), 1)
        };
        assert!(matches!(
            algo.right_clusters(8, &records(8, &blocks())),
            Err(Error::BudgetExceeded { needed: 23, budget: 10 })
        ));
    }

    #[test]
    fn agrees_with_sofa_postprocess_on_exact_sketches() {
        let rows: Vec<Vec<u32>> = (0..40u32).map(|i| vec![i % 5, 5 + i % 3, 9 + (i * 7) % 6]).collect();
        let recs = records(16, &rows);
        let metric = DistanceMetric::new(0.3).unwrap();
        let centers: Vec<WeightedCenter> = recs
            .iter()
            .enumerate()
            .map(|(i, r)| WeightedCenter::open(r.vector.clone(), 64, i).unwrap())
            .collect();
        let cfg = SofaConfig {
            metric,
            seed: 4,
            ..SofaConfig::new(3, 64)
        };
        let algo = StaticSofa::new(3, 0.4, metric, 4);
        assert_eq!(
            algo.right_clusters(16, &recs).unwrap(),
            sofa_postprocess(&centers, &cfg, 0.4).unwrap()
        );
    }

    #[test]
    fn reservoir_is_uniform() {
        let (m, size, trials) = (20usize, 5usize, 10_000usize);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut hits = vec![0usize; m];
        for _ in 0..trials {
            for i in reservoir_sample(0..m, size, &mut rng) {
                hits[i] += 1;
            }
        }
        let pr = size as f64 / m as f64;
        let sigma = (trials as f64 * pr * (1.0 - pr)).sqrt();
        for h in hits {
            assert!((h as f64 - trials as f64 * pr).abs() < 3.5 * sigma, "{h}");
        }
        assert_eq!(reservoir_sample(0..3, 10, &mut rng), vec![0, 1, 2]);
    }

    #[test]
    fn full_sample_means_plain_static_run() {
        let rows = blocks();
        let algo = StaticSofa::new(2, 0.5, DistanceMetric::symmetric(), 1);
        let mut s = StreamSource::from_rows(8, &rows).unwrap();
        let red = rs_reduction(&mut s, 100, 100, &algo, 3).unwrap();
        assert_eq!(red.sample, (0..9).collect::<Vec<_>>());
        assert_eq!(red.kept, red.touched);
        assert_eq!(red.right_clusters, algo.right_clusters(8, &records(8, &rows)).unwrap());
    }

    #[test]
    fn augmentation_follows_identical_incidence() {
        // Degree ties go to lower ids, so 7 is the one touched vertex left out;
        // its incidence over the sample equals that of cluster {5, 6}.
        let mut rows = vec![vec![0, 1, 2, 3]; 3];
        rows.extend(vec![vec![5, 6, 7]; 2]);
        let algo = StaticSofa::new(2, 0.5, DistanceMetric::symmetric(), 2);
        let red = reduce_sample(8, records(8, &rows), 6, &algo).unwrap();
        assert_eq!(red.kept, vec![0, 1, 2, 3, 5, 6]);
        assert_eq!(red.touched, vec![0, 1, 2, 3, 5, 6, 7]);
        let mut got = red.right_clusters.clone();
        got.sort();
        assert_eq!(got, vec![vec![0, 1, 2, 3], vec![5, 6, 7]]);
    }
}
