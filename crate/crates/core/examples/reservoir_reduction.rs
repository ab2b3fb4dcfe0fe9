//! Static-to-streaming reduction: cluster a reservoir sample of the left
//! side offline, then attach the remaining right vertices by their mean
//! incidence. Compares against the offline algorithm on the full graph.
//!
//! ```text
//! cargo run --release --example reservoir_reduction -- [sample size] [kept right vertices]
//! ```

use sofa::baseline::{rs_reduction, StaticRightClusterer, StaticSofa};
use sofa::synthetic::{PlantedModel, PlantedParams};
use sofa::{quality, DistanceMetric, Noise, Record};

fn main() -> sofa::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let params = PlantedParams {
        n: 2000,
        k: 10,
        ell: 100,
        r: 30,
        p: 0.8,
        noise: Noise::ExpectedDegree(5.0),
        seed: 3,
        ..Default::default()
    };
    let m = params.m();
    let m_tilde = args.first().copied().unwrap_or(m / 4);
    let n_tilde = args.get(1).copied().unwrap_or(params.n);
    let model = PlantedModel::new(params)?;
    let truth = model.truth();
    let algo = StaticSofa::new(10, 0.5, DistanceMetric::new(0.1)?, 3);

    let all: Vec<Record> = model.records().collect();
    let full = algo.right_clusters(2000, &all)?;
    let red = rs_reduction(&mut model.into_source(), m_tilde, n_tilde, &algo, 3)?;
    println!("full static quality       {:.4}", quality(&truth.right, &full));
    println!(
        "reduction quality         {:.4}  (sample {}, touched {}, kept {})",
        quality(&truth.right, &red.right_clusters),
        red.sample.len(),
        red.touched.len(),
        red.kept.len()
    );
    Ok(())
}
