//! One-pass streaming clusterer built on importance sampling.
//!
//! Every arriving left vertex becomes a center with probability proportional
//! to its weighted distance from the closest existing center, and is merged
//! into that center otherwise. When the center budget fills up or the
//! running cost exceeds twice the current lower bound, the lower bound
//! doubles and the phase restarts on the stream made of the current weighted
//! centers followed by the unread vertices. Centers carry Misra–Gries
//! sketches of their members' neighborhoods, which are merged alongside.
//!
//! Postprocessing groups the surviving centers with weighted k-medians,
//! merges each group's sketches and keeps the right vertices whose estimated
//! count reaches `theta` times the group weight.

use std::collections::VecDeque;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::center::{CenterIndex, WeightedCenter};
use crate::error::{Error, Result};
use crate::kmedians::kmedians_local_search;
use crate::sketch::MisraGries;
use crate::stream::{Record, StreamSource};
use crate::vector::DistanceMetric;

/// Phases after which a pass is declared runaway.
pub const PHASE_CEILING: usize = 64;

/// Rounding thresholds tried when none are given.
pub const DEFAULT_THETAS: [f64; 5] = [0.3, 0.4, 0.5, 0.6, 0.7];

/// Asymmetry weight that works well on sparse real-world data.
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Fallback rounding threshold when the counters carry no signal.
pub const FALLBACK_THETA: f64 = 0.5;

/// Default sketch size: `max(3s, 0.05 n)` counters.
pub fn default_capacity(s: usize, n: usize) -> usize {
    (3 * s).max((0.05 * n as f64).ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaPolicy {
    Fixed(Vec<f64>),
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SofaConfig {
    pub k: usize,
    pub c_max: usize,
    pub sketch_capacity: usize,
    pub metric: DistanceMetric,
    pub seed: u64,
    pub theta_policy: ThetaPolicy,
}

impl SofaConfig {
    /// `c_max = 20k`, asymmetric distance with `alpha = 0.1`, the default
    /// threshold grid.
    pub fn new(k: usize, sketch_capacity: usize) -> Self {
        Self {
            k,
            c_max: 20 * k,
            sketch_capacity,
            metric: DistanceMetric::new(DEFAULT_ALPHA).expect("valid default alpha"),
            seed: 0,
            theta_policy: ThetaPolicy::Fixed(DEFAULT_THETAS.to_vec()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.c_max <= self.k {
            return Err(Error::InvalidParameter(format!(
                "c_max ({}) must exceed k ({})",
                self.c_max, self.k
            )));
        }
        if self.sketch_capacity == 0 {
            return Err(Error::ZeroCapacity);
        }
        if let ThetaPolicy::Fixed(ts) = &self.theta_policy {
            if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0)) {
                return Err(Error::InvalidParameter("thetas must be nonempty and positive".into()));
            }
        }
        Ok(())
    }
}

/// State at the end of a phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTelemetry {
    pub phase: usize,
    /// Lower bound the phase ran with.
    pub lb: f64,
    pub cost: f64,
    pub centers: usize,
    /// Weighted centers still queued for the next phase (not yet reprocessed).
    pub pending: usize,
    /// Original stream records read so far.
    pub records_consumed: usize,
    /// Sum of weights over active and pending centers.
    pub center_weight: u64,
    /// Stored entries (vector ids plus sketch counters) over all centers.
    pub entries: usize,
    pub restarted: bool,
}

impl PhaseTelemetry {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("telemetry serializes")
    }
}

#[derive(Debug, Clone)]
pub struct SofaRun {
    pub centers: Vec<WeightedCenter>,
    pub phases: Vec<PhaseTelemetry>,
    pub records: usize,
    /// Largest number of stored entries seen at any point of the pass.
    pub peak_entries: usize,
    /// Largest number of live plus queued centers at any point of the pass.
    pub peak_centers: usize,
    /// Largest left degree seen.
    pub max_degree: usize,
    pub lb: f64,
    pub cost: f64,
}

enum Item {
    Fresh(Record),
    Center(WeightedCenter),
}

pub fn sofa_pass(stream: &mut StreamSource, cfg: &SofaConfig) -> Result<SofaRun> {
    let n = stream.universe();
    sofa_over(n, stream.next_pass()?, cfg, |_| {})
}

/// Runs the streaming pass over `records`, reporting every phase boundary
/// to `observer`.
pub fn sofa_over<I, F>(n: usize, records: I, cfg: &SofaConfig, mut observer: F) -> Result<SofaRun>
where
    I: IntoIterator<Item = Result<Record>>,
    F: FnMut(&PhaseTelemetry),
{
    cfg.validate()?;
    let mut records = records.into_iter();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lg_n = if n > 1 { (n as f64).log2() } else { 0.0 };
    let mut lb = 1.0f64;
    let mut cost = 0.0f64;
    let mut pending: VecDeque<WeightedCenter> = VecDeque::new();
    let mut index = CenterIndex::new(n, cfg.metric);
    let mut consumed = 0usize;
    let mut entries = 0usize;
    let mut peak_entries = 0usize;
    let mut peak_centers = 0usize;
    let mut max_degree = 0usize;
    let mut phases = Vec::new();
    let mut next_order = 0usize;

    loop {
        if phases.len() >= PHASE_CEILING {
            return Err(Error::PhaseCeiling(PHASE_CEILING));
        }
        let mut centers: Vec<WeightedCenter> = Vec::new();
        index.clear();
        let f = lb / (cfg.k as f64 * (1.0 + lg_n));
        let mut flag = false;

        loop {
            let item = match pending.pop_front() {
                Some(c) => Item::Center(c),
                None => match records.next() {
                    Some(r) => {
                        let r = r?;
                        consumed += 1;
                        max_degree = max_degree.max(r.vector.len());
                        Item::Fresh(r)
                    }
                    None => break,
                },
            };
            let (vector, weight) = match &item {
                Item::Fresh(r) => (&r.vector, 1u64),
                Item::Center(c) => (&c.vector, c.weight),
            };
            let (closest, d) = index.nearest(vector)?;
            let w = weight as f64;
            let p_open = if d.is_infinite() { 1.0 } else { (w * d / f).min(1.0) };
            let draw: f64 = rng.random();
            match closest {
                Some(c) if draw >= p_open => {
                    cost += w * d;
                    let target = &mut centers[c];
                    let before = target.sketch.len();
                    target.weight += weight;
                    match item {
                        Item::Fresh(r) => {
                            for &j in r.vector.indices() {
                                target.sketch.insert(j, 1.0)?;
                            }
                        }
                        Item::Center(other) => {
                            target.sketch.merge_from(&other.sketch)?;
                            entries -= other.entries();
                        }
                    }
                    entries = entries + target.sketch.len() - before;
                }
                _ => {
                    index.push(vector)?;
                    let center = match item {
                        Item::Fresh(r) => {
                            let c = WeightedCenter::open(r.vector, cfg.sketch_capacity, next_order)?;
                            entries += c.entries();
                            c
                        }
                        Item::Center(mut c) => {
                            c.insertion_order = next_order;
                            c
                        }
                    };
                    next_order += 1;
                    centers.push(center);
                }
            }
            peak_entries = peak_entries.max(entries);
            peak_centers = peak_centers.max(centers.len() + pending.len());
            if centers.len() == cfg.c_max || cost > 2.0 * lb {
                flag = true;
                break;
            }
        }

        let center_weight = centers.iter().chain(pending.iter()).map(|c| c.weight).sum();
        let telemetry = PhaseTelemetry {
            phase: phases.len(),
            lb,
            cost,
            centers: centers.len(),
            pending: pending.len(),
            records_consumed: consumed,
            center_weight,
            entries,
            restarted: flag,
        };
        observer(&telemetry);
        phases.push(telemetry);

        if flag {
            for c in centers.into_iter().rev() {
                pending.push_front(c);
            }
            lb *= 2.0;
        } else {
            return Ok(SofaRun {
                centers,
                phases,
                records: consumed,
                peak_entries,
                peak_centers,
                max_degree,
                lb,
                cost,
            });
        }
    }
}

/// Centers grouped by offline k-medians, with merged sketches.
#[derive(Debug, Clone)]
pub struct Grouping {
    /// Center indices per group; `k` groups, possibly some empty.
    pub groups: Vec<Vec<usize>>,
    pub sketches: Vec<MisraGries>,
    pub weights: Vec<u64>,
    /// Set when there were fewer centers than groups.
    pub padded: bool,
}

impl Grouping {
    /// One group per center, without clustering.
    pub fn per_center(centers: &[WeightedCenter]) -> Self {
        Self {
            groups: (0..centers.len()).map(|i| vec![i]).collect(),
            sketches: centers.iter().map(|c| c.sketch.clone()).collect(),
            weights: centers.iter().map(|c| c.weight).collect(),
            padded: false,
        }
    }

    pub fn threshold(&self, theta: f64) -> Vec<Vec<u32>> {
        self.sketches
            .iter()
            .zip(&self.weights)
            .map(|(sk, &w)| if w == 0 { Vec::new() } else { sk.items_at_least(theta * w as f64) })
            .collect()
    }

    /// `(merged sketch, group weight)` pairs for threshold estimation.
    pub fn counters(&self) -> Vec<(&MisraGries, u64)> {
        self.sketches.iter().zip(self.weights.iter().copied()).collect()
    }
}

/// Groups centers into `cfg.k` clusters and merges their sketches.
pub fn group_centers(centers: &[WeightedCenter], cfg: &SofaConfig) -> Result<Grouping> {
    if centers.is_empty() {
        return Err(Error::InvalidParameter("no centers to postprocess".into()));
    }
    let vectors: Vec<_> = centers.iter().map(|c| c.vector.clone()).collect();
    let weights: Vec<f64> = centers.iter().map(|c| c.weight as f64).collect();
    let km = kmedians_local_search(&vectors, &weights, cfg.k, cfg.metric, cfg.seed)?;
    if km.padded {
        warn!(
            "only {} centers for k={}; {} clusters stay empty",
            centers.len(),
            cfg.k,
            cfg.k - centers.len()
        );
    }
    let mut sketches = Vec::with_capacity(cfg.k);
    let mut group_weights = Vec::with_capacity(cfg.k);
    for group in &km.groups {
        let mut sk = MisraGries::new(cfg.sketch_capacity)?;
        let mut w = 0;
        for &c in group {
            sk.merge_from(&centers[c].sketch)?;
            w += centers[c].weight;
        }
        sketches.push(sk);
        group_weights.push(w);
    }
    Ok(Grouping {
        groups: km.groups,
        sketches,
        weights: group_weights,
        padded: km.padded,
    })
}

/// Right clusters for a single threshold.
pub fn sofa_postprocess(centers: &[WeightedCenter], cfg: &SofaConfig, theta: f64) -> Result<Vec<Vec<u32>>> {
    Ok(group_centers(centers, cfg)?.threshold(theta))
}

/// Right clusters for several thresholds over one shared grouping.
pub fn multi_threshold(
    centers: &[WeightedCenter],
    cfg: &SofaConfig,
    thetas: &[f64],
) -> Result<Vec<(f64, Vec<Vec<u32>>)>> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter("at least one theta is required".into()));
    }
    let grouping = group_centers(centers, cfg)?;
    Ok(thetas.iter().map(|&t| (t, grouping.threshold(t))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaEstimate {
    pub theta: f64,
    pub p: f64,
    pub q: f64,
    pub log_likelihood: f64,
    pub fallback: bool,
}

/// Threshold at which a Binomial(w, p) count becomes likelier than a
/// Binomial(w, q) count, as a fraction of w.
pub fn crossing_threshold(p: f64, q: f64) -> f64 {
    let a = ((1.0 - q) / (1.0 - p)).ln();
    let b = (p / q).ln();
    a / (b + a)
}

/// Picks the rounding threshold from the observed counters.
///
/// Each live counter `c` of a group with weight `w` is modeled as a draw
/// from Binomial(w, p) (member) or Binomial(w, q) (non-member), whichever is
/// likelier. The pair `(p, q)` on the 0.05-grid with `q < p` that maximizes
/// the total log-likelihood determines the threshold through
/// [`crossing_threshold`].
pub fn estimate_theta(groups: &[(&MisraGries, u64)]) -> ThetaEstimate {
    let counters: Vec<(f64, f64)> = groups
        .iter()
        .filter(|(_, w)| *w > 0)
        .flat_map(|(sk, w)| {
            let w = *w as f64;
            sk.entries().into_iter().map(move |(_, c)| (c.min(w), w))
        })
        .filter(|(c, _)| *c > 0.0)
        .collect();
    if counters.len() < 2 {
        warn!("too few counters to estimate theta; using {FALLBACK_THETA}");
        return ThetaEstimate {
            theta: FALLBACK_THETA,
            p: f64::NAN,
            q: f64::NAN,
            log_likelihood: f64::NAN,
            fallback: true,
        };
    }
    let grid: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    let mut best: Option<ThetaEstimate> = None;
    for &p in &grid {
        let (lp, lp1) = (p.ln(), (1.0 - p).ln());
        for &q in grid.iter().take_while(|&&q| q < p - 1e-9) {
            let (lq, lq1) = (q.ln(), (1.0 - q).ln());
            let ll: f64 = counters
                .iter()
                .map(|&(c, w)| {
                    let member = c * lp + (w - c) * lp1;
                    let other = c * lq + (w - c) * lq1;
                    member.max(other)
                })
                .sum();
            if best.is_none_or(|b| ll > b.log_likelihood) {
                best = Some(ThetaEstimate {
                    theta: crossing_threshold(p, q),
                    p,
                    q,
                    log_likelihood: ll,
                    fallback: false,
                });
            }
        }
    }
    best.expect("grid is nonempty")
}
