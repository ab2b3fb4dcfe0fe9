//! One-pass BMF over a lazily generated planted stream of a million left
//! vertices (about 2 * 10^7 edges). Records are regenerated on each pass,
//! so only the centers and their sketches are held in memory.
//!
//! ```text
//! cargo run --release --example large_stream_bmf -- [left vertices]
//! ```

use std::time::Instant;

use sofa::metrics::reconstruction_stats;
use sofa::second_pass::{line_search, AssignMode};
use sofa::sofa::{default_capacity, group_centers, sofa_over, SofaConfig, DEFAULT_THETAS};
use sofa::synthetic::{Noise, PlantedModel, PlantedParams};
use sofa::quality;

fn main() -> sofa::Result<()> {
    let m: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let k = 10;
    let params = PlantedParams {
        n: 100_000,
        k,
        ell: m / k,
        r: 25,
        p: 0.6,
        noise: Noise::ExpectedDegree(5.0),
        seed: 1,
        ..Default::default()
    };
    let model = PlantedModel::new(params)?;
    let truth = model.truth();
    let mut stream = model.into_source();

    let s = 40;
    let cfg = SofaConfig {
        c_max: 20 * k,
        seed: 1,
        ..SofaConfig::new(k, default_capacity(s, 100_000))
    };
    let t0 = Instant::now();
    let run = sofa_over(100_000, stream.next_pass()?, &cfg, |_| {})?;
    let grouping = group_centers(&run.centers, &cfg)?;
    println!(
        "first pass: {} records, {} phases, {} centers, peak {} entries (bound {}), {:.1}s",
        run.records,
        run.phases.len(),
        run.centers.len(),
        run.peak_entries,
        cfg.c_max * (cfg.sketch_capacity + run.max_degree),
        t0.elapsed().as_secs_f64()
    );

    let t0 = Instant::now();
    let candidates = DEFAULT_THETAS.iter().map(|&t| (t, grouping.threshold(t))).collect();
    let choice = line_search(stream.next_pass()?, candidates, AssignMode::Cover)?;
    println!(
        "second pass: theta {} chosen, right quality {:.4}, {:.1}s",
        choice.theta,
        quality(&truth.right, &choice.right),
        t0.elapsed().as_secs_f64()
    );
    let stats = reconstruction_stats(stream.reopen().next_pass()?, &choice.left, &choice.right)?;
    println!("edges {}  gain {:.4}  recall {:.4}", stats.edges, stats.gain, stats.recall);
    Ok(())
}
