//! Right- and left-cluster quality of streaming sofa against the offline
//! baseline on the default planted grid (n=8000, k=50, ell=200, r=30, 20
//! noise neighbors) for a range of signal strengths.
//!
//! Both algorithms pick their rounding threshold from {0.3, ..., 0.7} by the
//! second-pass line search; `sofa-auto` uses the likelihood estimate instead.
//!
//! ```text
//! cargo run --release --example fig1_sweep -- [seeds] [p values...]
//! ```

use std::time::Instant;

use sofa::second_pass::{line_search, AssignMode};
use sofa::sofa::{estimate_theta, group_centers, sofa_over, SofaConfig, DEFAULT_THETAS};
use sofa::synthetic::{PlantedModel, PlantedParams};
use sofa::{quality, DistanceMetric, Record, StaticSofa};

struct Outcome {
    right_q: f64,
    left_q: f64,
    theta: f64,
    secs: f64,
}

fn evaluate(records: &[Record], truth: &sofa::GroundTruth, candidates: Vec<(f64, Vec<Vec<u32>>)>, secs: f64) -> sofa::Result<Outcome> {
    let choice = line_search(records.iter().cloned().map(Ok), candidates, AssignMode::Exclusive)?;
    Ok(Outcome {
        right_q: quality(&truth.right, &choice.right),
        left_q: quality(&truth.left_clusters(), &choice.left.left_clusters(choice.right.len())),
        theta: choice.theta,
        secs,
    })
}

fn main() -> sofa::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(3);
    let ps: Vec<f64> = if args.len() > 1 {
        args[1..].iter().filter_map(|s| s.parse().ok()).collect()
    } else {
        vec![0.5, 0.6, 0.7, 0.8, 0.9]
    };
    println!("p\tseed\talgo\ttheta\tright_q\tleft_q\tseconds");
    for &p in &ps {
        for seed in 0..seeds {
            let model = PlantedModel::new(PlantedParams { p, seed, ..Default::default() })?;
            let truth = model.truth();
            let records: Vec<Record> = model.records().collect();

            let cfg = SofaConfig {
                c_max: 200,
                seed,
                ..SofaConfig::new(50, 200)
            };
            let t0 = Instant::now();
            let run = sofa_over(8000, records.iter().cloned().map(Ok), &cfg, |_| {})?;
            let grouping = group_centers(&run.centers, &cfg)?;
            let secs = t0.elapsed().as_secs_f64();
            let candidates = DEFAULT_THETAS.iter().map(|&t| (t, grouping.threshold(t))).collect();
            let o = evaluate(&records, &truth, candidates, secs)?;
            println!("{p}\t{seed}\tsofa\t{}\t{:.4}\t{:.4}\t{:.2}", o.theta, o.right_q, o.left_q, o.secs);

            let auto = estimate_theta(&grouping.counters()).theta;
            let o = evaluate(&records, &truth, vec![(auto, grouping.threshold(auto))], secs)?;
            println!("{p}\t{seed}\tsofa-auto\t{:.3}\t{:.4}\t{:.4}\t{:.2}", o.theta, o.right_q, o.left_q, o.secs);

            let t0 = Instant::now();
            let algo = StaticSofa::new(50, 0.5, DistanceMetric::new(0.1)?, seed);
            let all = algo.multi_threshold(8000, &records, &DEFAULT_THETAS)?;
            let secs = t0.elapsed().as_secs_f64();
            let o = evaluate(&records, &truth, DEFAULT_THETAS.iter().copied().zip(all).collect(), secs)?;
            println!("{p}\t{seed}\tstatic\t{}\t{:.4}\t{:.4}\t{:.2}", o.theta, o.right_q, o.left_q, o.secs);
        }
    }
    Ok(())
}
