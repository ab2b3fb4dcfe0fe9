//! Two-pass biclustering and Boolean matrix factorization on a planted
//! instance: sofa first pass, grouping, then exclusive assignment and
//! greedy cover in the second pass.
//!
//! ```text
//! cargo run --release --example sofa_bmf -- [p] [seed]
//! ```

use sofa::second_pass::{line_search, AssignMode};
use sofa::sofa::{default_capacity, estimate_theta, group_centers, sofa_pass, SofaConfig, DEFAULT_THETAS};
use sofa::synthetic::{generate_planted, PlantedParams};
use sofa::{quality, reconstruction_stats};

fn main() -> sofa::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.8);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let params = PlantedParams { p, seed, ..Default::default() };
    let (n, k) = (params.n, params.k);
    let (mut stream, truth) = generate_planted(params)?;
    let cfg = SofaConfig {
        seed,
        ..SofaConfig::new(k, default_capacity(30, n))
    };
    let run = sofa_pass(&mut stream, &cfg)?;
    let grouping = group_centers(&run.centers, &cfg)?;
    let auto = estimate_theta(&grouping.counters());
    println!(
        "{} phases, {} centers, peak {} entries; estimated p {:.2} q {:.3} theta {:.2}",
        run.phases.len(),
        run.centers.len(),
        run.peak_entries,
        auto.p,
        auto.q,
        auto.theta
    );
    for mode in [AssignMode::Exclusive, AssignMode::Cover] {
        let mut replay = stream.reopen();
        let candidates = DEFAULT_THETAS.iter().map(|&t| (t, grouping.threshold(t))).collect();
        let choice = line_search(replay.next_pass()?, candidates, mode)?;
        let mut eval = stream.reopen();
        let stats = reconstruction_stats(eval.next_pass()?, &choice.left, &choice.right)?;
        println!(
            "{mode:?}: theta {:.1}, right quality {:.3}, left quality {:.3}, gain {:.3}, recall {:.3}",
            choice.theta,
            quality(&truth.right, &choice.right),
            quality(&truth.left_clusters(), &choice.left.left_clusters(choice.right.len())),
            stats.gain,
            stats.recall
        );
    }
    Ok(())
}
