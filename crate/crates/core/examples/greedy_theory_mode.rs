//! Single-pass greedy clustering with the distance threshold and column
//! threshold derived from the signal strength and cluster size.
//!
//! ```text
//! cargo run --release --example greedy_theory_mode -- [p] [seed]
//! ```

use sofa::greedy::{greedy_pass, threshold_clusters, GreedyConfig, TheoryParams};
use sofa::sofa::default_capacity;
use sofa::synthetic::{generate_planted, Noise, PlantedParams};
use sofa::quality;

fn main() -> sofa::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.9);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let (n, r) = (2000, 60);
    let params = PlantedParams {
        n,
        k: 10,
        ell: 100,
        r,
        p,
        noise: Noise::Probability(0.0),
        seed,
        disjoint_right: true,
        ..Default::default()
    };
    let (mut stream, truth) = generate_planted(params)?;
    let theory = TheoryParams::new(p, r);
    let cfg = GreedyConfig::new(theory.distance_threshold(), default_capacity(r, n));
    let centers = greedy_pass(&mut stream, &cfg)?;
    let found = threshold_clusters(&centers, theory.theta())?;
    println!(
        "threshold {:.1}, theta {:.3}: {} centers, {} right clusters, quality {:.3}",
        theory.distance_threshold(),
        theory.theta(),
        centers.len(),
        found.len(),
        quality(&truth.right, &found)
    );
    Ok(())
}
