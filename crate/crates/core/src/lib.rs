//! Streaming biclustering and Boolean matrix factorization of bipartite
//! graphs.
//!
//! Left vertices arrive one at a time with all of their edges. A first pass
//! ([`sofa`] or [`greedy`]) keeps a bounded set of weighted centers, each
//! with a Misra–Gries sketch of its members' right neighbors, and turns them
//! into `k` right clusters. A second pass ([`second_pass`]) assigns left
//! vertices to those clusters, either exclusively or as a Boolean cover.

pub mod artifact;
pub mod baseline;
pub mod center;
pub mod cli;
pub mod error;
pub mod greedy;
pub mod kmedians;
pub mod metrics;
pub mod second_pass;
pub mod sketch;
pub mod sofa;
pub mod stream;
pub mod synthetic;
pub mod vector;

pub use artifact::{ArtifactFormat, ClusteringArtifact, LeftAssignment, RunParams};
pub use baseline::{rs_reduction, StaticRightClusterer, StaticSofa};
pub use center::WeightedCenter;
pub use error::{Error, Result};
pub use greedy::{greedy_pass, threshold_clusters, GreedyConfig, TheoryParams};
pub use kmedians::{kmedians_local_search, KMediansResult};
pub use metrics::{quality, reconstruction_stats, ReconstructionStats};
pub use second_pass::{assign_left, cover_left, select_top_k, CoverResult};
pub use sketch::MisraGries;
pub use sofa::{
    estimate_theta, group_centers, multi_threshold, sofa_pass, sofa_postprocess, PhaseTelemetry, SofaConfig, SofaRun,
    ThetaPolicy,
};
pub use stream::{open_stream, Record, StreamFormat, StreamSource};
pub use synthetic::{generate_planted, GroundTruth, Noise, PlantedModel, PlantedParams};
pub use vector::{asym_hamming, hamming, nearest_center, DistanceMetric, SparseBinaryVector};
