//! Heavy hitters with the Misra-Gries sketch, including a merge of two
//! sketches built over disjoint halves of the stream.
//!
//! ```text
//! cargo run --example sketch_heavy_hitters -- [capacity]
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sofa::MisraGries;

fn main() -> sofa::Result<()> {
    let capacity: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    // items 0..5 are heavy, the rest is a long uniform tail
    let stream: Vec<u32> = (0..100_000)
        .map(|_| if rng.random_bool(0.6) { rng.random_range(0..5) } else { rng.random_range(5..10_000) })
        .collect();

    let (left, right) = stream.split_at(stream.len() / 2);
    let mut a = MisraGries::new(capacity)?;
    let mut b = MisraGries::new(capacity)?;
    for &x in left {
        a.insert(x, 1.0)?;
    }
    for &x in right {
        b.insert(x, 1.0)?;
    }
    let merged = a.merge(b)?;

    let mut exact = std::collections::HashMap::new();
    for &x in &stream {
        *exact.entry(x).or_insert(0u64) += 1;
    }
    println!("capacity {capacity}, error bound {:.0}", merged.error_bound());
    println!("item\testimate\texact");
    for (item, est) in merged.entries() {
        println!("{item}\t{est:.0}\t{}", exact[&item]);
    }
    let phi = 0.05 * stream.len() as f64;
    println!("items with estimate >= {phi:.0}: {:?}", merged.items_at_least(phi - merged.error_bound()));
    Ok(())
}
