//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! ```text
//! cargo test --release -p sofa --test acceptance
//! ```

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sofa::artifact::LeftAssignment;
use sofa::baseline::StaticSofa;
use sofa::greedy::{greedy_pass, threshold_clusters, GreedyConfig, TheoryParams};
use sofa::metrics::reconstruction_stats;
use sofa::second_pass::{line_search, score, AssignMode};
use sofa::sofa::{default_capacity, estimate_theta, group_centers, sofa_over, SofaConfig, DEFAULT_THETAS};
use sofa::synthetic::{generate_planted, Noise, PlantedModel, PlantedParams};
use sofa::{quality, DistanceMetric, MisraGries, Record, StreamSource};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// 1. Sketch bounds on every prefix of 500 weighted streams, and after merges.
fn sketch_bounds() -> Verdict {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checks = 0u64;
    let mut violations = 0u64;
    let universe = 60u32;
    for _ in 0..500 {
        let len = rng.random_range(1..=2000);
        // skewed items: squares of uniforms concentrate mass on small ids
        let stream: Vec<(u32, u32)> = (0..len)
            .map(|_| {
                let u: f64 = rng.random();
                ((u * u * universe as f64) as u32, rng.random_range(1..=5))
            })
            .collect();
        for cap in [1usize, 4, 16, 64] {
            let mut sk = MisraGries::new(cap).unwrap();
            let mut exact = vec![0u64; universe as usize];
            let mut total = 0u64;
            for &(x, w) in &stream {
                sk.insert(x, w as f64).unwrap();
                exact[x as usize] += w as u64;
                total += w as u64;
                let bound = total as f64 / (cap as f64 + 1.0);
                for (item, &f) in exact.iter().enumerate() {
                    let gap = f as f64 - sk.estimate(item as u32);
                    checks += 1;
                    if !(gap >= 0.0 && gap <= bound) {
                        violations += 1;
                    }
                }
                if sk.len() > cap {
                    violations += 1;
                }
            }
            // merge of 2..=4 consecutive pieces, in shuffled order
            let pieces = rng.random_range(2..=4usize);
            let cuts: Vec<usize> = (0..=pieces).map(|i| i * stream.len() / pieces).collect();
            let mut parts: Vec<MisraGries> = cuts
                .windows(2)
                .map(|w| {
                    let mut s = MisraGries::new(cap).unwrap();
                    for &(x, wt) in &stream[w[0]..w[1]] {
                        s.insert(x, wt as f64).unwrap();
                    }
                    s
                })
                .collect();
            let rot = rng.random_range(0..parts.len());
            parts.rotate_left(rot);
            let merged = parts
                .into_iter()
                .reduce(|a, b| a.merge(b).unwrap())
                .unwrap();
            let bound = total as f64 / (cap as f64 + 1.0);
            if merged.total_weight() != total as f64 || merged.len() > cap {
                violations += 1;
            }
            for (item, &f) in exact.iter().enumerate() {
                let gap = f as f64 - merged.estimate(item as u32);
                checks += 1;
                if !(gap >= 0.0 && gap <= bound) {
                    violations += 1;
                }
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        violations == 0 && secs < 30.0,
        format!("{checks} checks, {violations} violations, {secs:.1}s"),
    )
}

/// 2. |Γ △ (Y ∪ A)| = |Γ △ Y| − score(A | Γ, Y) over subsets of a 10-element universe.
fn cover_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let to_vec = |mask: u32| -> Vec<u32> { (0..10).filter(|b| mask >> b & 1 == 1).collect() };
    let mut cases = 0u64;
    let mut violations = 0u64;
    for _ in 0..3 {
        let family: Vec<u32> = (0..33).map(|_| rng.random_range(0..1024u32)).collect();
        for &a in &family {
            for &g in &family {
                for &y in &family {
                    let lhs = (g ^ (y | a)).count_ones() as i64;
                    let rhs = (g ^ y).count_ones() as i64 - score(&to_vec(a), &to_vec(g), &to_vec(y));
                    cases += 1;
                    if lhs != rhs {
                        violations += 1;
                    }
                }
            }
        }
    }
    verdict(violations == 0 && cases >= 100_000, format!("{cases} cases, {violations} violations"))
}

/// 3. Greedy with the theory parameters recovers every right cluster exactly.
fn theory_recovery() -> Verdict {
    let t0 = Instant::now();
    let mut exact = 0;
    for seed in 0..20 {
        let params = PlantedParams {
            n: 2000,
            k: 10,
            ell: 100,
            r: 60,
            p: 0.9,
            noise: Noise::Probability(0.0),
            seed,
            disjoint_right: true,
            shuffle: true,
        };
        let (mut stream, truth) = generate_planted(params).unwrap();
        let theory = TheoryParams::new(0.9, 60);
        let cfg = GreedyConfig::new(theory.distance_threshold(), default_capacity(60, 2000));
        let centers = greedy_pass(&mut stream, &cfg).unwrap();
        let mut found = threshold_clusters(&centers, theory.theta()).unwrap();
        let mut want = truth.right.clone();
        found.sort();
        want.sort();
        if found == want {
            exact += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(exact >= 19 && secs < 60.0, format!("{exact}/20 seeds exact, {secs:.1}s"))
}

fn best_on_grid(truth: &[Vec<u32>], candidates: &[Vec<Vec<u32>>]) -> f64 {
    candidates.iter().map(|c| quality(truth, c)).fold(0.0, f64::max)
}

/// 4. Quality against the offline baseline while the signal varies.
fn fig1_trend() -> Verdict {
    let t0 = Instant::now();
    let ps = [0.5, 0.6, 0.7, 0.8, 0.9];
    let seeds = 15u64;
    let mut sofa_mean = Vec::new();
    let mut gaps = Vec::new();
    let mut lines = Vec::new();
    for &p in &ps {
        let (mut s_q, mut st_q, mut auto_q) = (0.0, 0.0, 0.0);
        for seed in 0..seeds {
            let model = PlantedModel::new(PlantedParams { p, seed, ..Default::default() }).unwrap();
            let truth = model.truth();
            let records: Vec<Record> = model.records().collect();
            let cfg = SofaConfig {
                c_max: 200,
                seed,
                ..SofaConfig::new(50, 200)
            };
            let run = sofa_over(8000, records.iter().cloned().map(Ok), &cfg, |_| {}).unwrap();
            let grouping = group_centers(&run.centers, &cfg).unwrap();
            let sofa_sets: Vec<_> = DEFAULT_THETAS.iter().map(|&t| grouping.threshold(t)).collect();
            s_q += best_on_grid(&truth.right, &sofa_sets);
            auto_q += quality(&truth.right, &grouping.threshold(estimate_theta(&grouping.counters()).theta));
            let algo = StaticSofa::new(50, 0.5, DistanceMetric::new(0.1).unwrap(), seed);
            let static_sets = algo.multi_threshold(8000, &records, &DEFAULT_THETAS).unwrap();
            st_q += best_on_grid(&truth.right, &static_sets);
        }
        let n = seeds as f64;
        sofa_mean.push(s_q / n);
        gaps.push(st_q / n - s_q / n);
        lines.push(format!("p={p}: sofa {:.3} static {:.3} sofa-auto {:.3}", s_q / n, st_q / n, auto_q / n));
    }
    let inversions = sofa_mean.windows(2).filter(|w| w[1] < w[0]).count();
    let max_gap = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let secs = t0.elapsed().as_secs_f64();
    for l in &lines {
        println!("    {l}");
    }
    verdict(
        max_gap <= 0.15 && inversions <= 1 && secs < 1800.0,
        format!("max gap {max_gap:.3}, {inversions} inversions, {secs:.0}s"),
    )
}

/// 5. Streaming time grows linearly with the number of edges.
fn linear_scaling() -> Verdict {
    let t0 = Instant::now();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ell in [100, 200, 300, 400, 600] {
        let model = PlantedModel::new(PlantedParams { ell, seed: 5, ..Default::default() }).unwrap();
        let records: Vec<Record> = model.records().collect();
        let edges: usize = records.iter().map(|r| r.vector.len()).sum();
        let cfg = SofaConfig {
            seed: 5,
            ..SofaConfig::new(50, default_capacity(30, 8000))
        };
        let best = (0..5)
            .map(|_| {
                let t = Instant::now();
                let run = sofa_over(8000, records.iter().cloned().map(Ok), &cfg, |_| {}).unwrap();
                group_centers(&run.centers, &cfg).unwrap();
                t.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min);
        xs.push(edges as f64);
        ys.push(best);
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    let secs = t0.elapsed().as_secs_f64();
    let pts: Vec<String> = xs.iter().zip(&ys).map(|(x, y)| format!("{x:.0}:{:.3}s", y)).collect();
    println!("    edges:seconds {}", pts.join(" "));
    verdict(r2 >= 0.95 && secs < 1800.0, format!("R^2 = {r2:.4}, {secs:.0}s"))
}

/// 6. Weight conservation, center budget and memory bound on 10^5 vertices.
fn conservation_and_budget() -> Verdict {
    let params = PlantedParams {
        ell: 2000,
        seed: 6,
        ..Default::default()
    };
    let m = params.m();
    let (mut stream, _) = generate_planted(params).unwrap();
    let cfg = SofaConfig {
        seed: 6,
        ..SofaConfig::new(50, default_capacity(30, 8000))
    };
    let mut violations = 0;
    let mut boundaries = 0;
    let run = sofa_over(8000, stream.next_pass().unwrap(), &cfg, |t| {
        boundaries += 1;
        if t.center_weight as usize != t.records_consumed || t.centers + t.pending > cfg.c_max {
            violations += 1;
        }
    })
    .unwrap();
    let bound = cfg.c_max * (cfg.sketch_capacity + run.max_degree);
    if run.records != m || run.peak_centers > cfg.c_max || run.peak_entries > bound {
        violations += 1;
    }
    if run.centers.iter().map(|c| c.weight).sum::<u64>() != m as u64 {
        violations += 1;
    }
    verdict(
        violations == 0,
        format!(
            "{boundaries} phase boundaries, peak {} centers (c_max {}), peak {} entries (bound {bound}), {violations} violations",
            run.peak_centers, cfg.c_max, run.peak_entries
        ),
    )
}

/// 7. Streaming gain and recall equal the dense Boolean product evaluation.
fn metrics_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatched = 0;
    let mut evaluated = 0;
    for case in 0..200 {
        let m = rng.random_range(1..=20usize);
        let n = rng.random_range(1..=20usize);
        let k = rng.random_range(1..=5usize);
        let density: f64 = rng.random_range(0.05..0.6);
        let b: Vec<Vec<bool>> = (0..m).map(|_| (0..n).map(|_| rng.random_bool(density)).collect()).collect();
        let r: Vec<Vec<bool>> = (0..k).map(|_| (0..n).map(|_| rng.random_bool(0.3)).collect()).collect();
        let l: Vec<Vec<bool>> = (0..m).map(|_| (0..k).map(|_| rng.random_bool(0.3)).collect()).collect();
        let exclusive = case % 2 == 0;
        let l: Vec<Vec<bool>> = if exclusive {
            // at most one cluster per row
            l.into_iter()
                .map(|row| {
                    let first = row.iter().position(|&x| x);
                    (0..k).map(|i| Some(i) == first).collect()
                })
                .collect()
        } else {
            l
        };

        // dense B~ = L ∘ R
        let (mut edges, mut diff, mut hit) = (0u64, 0u64, 0u64);
        for u in 0..m {
            for j in 0..n {
                let approx = (0..k).any(|i| l[u][i] && r[i][j]);
                edges += u64::from(b[u][j]);
                diff += u64::from(b[u][j] != approx);
                hit += u64::from(b[u][j] && approx);
            }
        }

        let rows: Vec<Vec<u32>> = b.iter().map(|row| (0..n as u32).filter(|&j| row[j as usize]).collect()).collect();
        let right: Vec<Vec<u32>> = r.iter().map(|row| (0..n as u32).filter(|&j| row[j as usize]).collect()).collect();
        let left = if exclusive {
            LeftAssignment::Exclusive((0..m).map(|u| (u, l[u].iter().position(|&x| x))).collect())
        } else {
            LeftAssignment::Cover((0..m).map(|u| (u, (0..k).filter(|&i| l[u][i]).collect())).collect())
        };
        let mut stream = StreamSource::from_rows(n, &rows).unwrap();
        let got = reconstruction_stats(stream.next_pass().unwrap(), &left, &right);
        if edges == 0 {
            if got.is_ok() {
                mismatched += 1;
            }
            continue;
        }
        evaluated += 1;
        let got = got.unwrap();
        let gain = 1.0 - diff as f64 / edges as f64;
        let recall = hit as f64 / edges as f64;
        if got.gain != gain || got.recall != recall || got.mismatches != diff || got.covered != hit {
            mismatched += 1;
        }
    }
    verdict(mismatched == 0, format!("{evaluated} instances with edges, {mismatched} disagreements"))
}

/// Logical bytes per stored entry: a 32-bit id plus a 64-bit counter, padded.
const BYTES_PER_ENTRY: usize = 16;
const MEMORY_BUDGET_BYTES: usize = 500 * 1024 * 1024;

/// 8. BMF over a lazily generated stream of a million left vertices.
fn large_bmf() -> Verdict {
    let t0 = Instant::now();
    let k = 10;
    let params = PlantedParams {
        n: 100_000,
        k,
        ell: 100_000,
        r: 25,
        p: 0.6,
        noise: Noise::ExpectedDegree(5.0),
        seed: 8,
        ..Default::default()
    };
    let (mut stream, truth) = generate_planted(params).unwrap();
    let cfg = SofaConfig {
        c_max: 20 * k,
        seed: 8,
        ..SofaConfig::new(k, default_capacity(40, 100_000))
    };
    let result = (|| -> sofa::Result<String> {
        let run = sofa_over(100_000, stream.next_pass()?, &cfg, |_| {})?;
        let grouping = group_centers(&run.centers, &cfg)?;
        let candidates = DEFAULT_THETAS.iter().map(|&t| (t, grouping.threshold(t))).collect();
        let choice = line_search(stream.next_pass()?, candidates, AssignMode::Cover)?;
        let edges: u64 = {
            let mut replay = stream.reopen();
            let total = replay.next_pass()?.map(|r| r.map(|r| r.vector.len() as u64)).sum::<sofa::Result<u64>>()?;
            total
        };
        let bound = cfg.c_max * (cfg.sketch_capacity + run.max_degree);
        let bytes = run.peak_entries * BYTES_PER_ENTRY;
        if run.records != 1_000_000 || run.peak_entries > bound || bytes > MEMORY_BUDGET_BYTES {
            return Err(sofa::Error::BudgetExceeded {
                needed: run.peak_entries,
                budget: bound.min(MEMORY_BUDGET_BYTES / BYTES_PER_ENTRY),
            });
        }
        Ok(format!(
            "{} records, {edges} edges, peak {} entries ({:.1} MB logical, bound {bound} entries), right quality {:.3}",
            run.records,
            run.peak_entries,
            bytes as f64 / 1e6,
            quality(&truth.right, &choice.right)
        ))
    })();
    let secs = t0.elapsed().as_secs_f64();
    match result {
        Ok(detail) => verdict(true, format!("{detail}, {secs:.0}s")),
        Err(e) => verdict(false, format!("{e}")),
    }
}

fn main() {
    // `cargo test -- --list` and friends probe the binary; nothing to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1 sketch error bounds", sketch_bounds),
        ("2 cover identity", cover_identity),
        ("3 theory-mode exact recovery", theory_recovery),
        ("4 quality vs offline baseline", fig1_trend),
        ("5 linear scaling in edges", linear_scaling),
        ("6 conservation and budget", conservation_and_budget),
        ("7 metrics vs dense oracle", metrics_oracle),
        ("8 large BMF stream", large_bmf),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let v = f();
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
