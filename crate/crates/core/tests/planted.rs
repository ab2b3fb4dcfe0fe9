use sofa::baseline::{rs_reduction, StaticRightClusterer, StaticSofa};
use sofa::greedy::{greedy_pass, threshold_clusters, GreedyConfig, TheoryParams};
use sofa::second_pass::{assign_left, cover_left};
use sofa::sofa::{default_capacity, estimate_theta, multi_threshold, sofa_pass, sofa_postprocess, SofaConfig};
use sofa::stream::{open_stream, write_adjacency, StreamFormat};
use sofa::synthetic::{generate_planted, Noise, PlantedModel, PlantedParams};
use sofa::{quality, DistanceMetric, MisraGries, Record};

fn sorted(mut v: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    v.sort();
    v
}

fn small(p: f64, seed: u64) -> PlantedParams {
    PlantedParams {
        n: 2000,
        k: 10,
        ell: 100,
        r: 30,
        p,
        noise: Noise::ExpectedDegree(5.0),
        seed,
        ..Default::default()
    }
}

#[test]
fn greedy_theory_mode_without_noise_is_exact() {
    let params = PlantedParams {
        p: 1.0,
        noise: Noise::Probability(0.0),
        disjoint_right: true,
        ..small(1.0, 5)
    };
    let (mut stream, truth) = generate_planted(params).unwrap();
    let theory = TheoryParams::new(1.0, 30);
    let cfg = GreedyConfig::new(theory.distance_threshold(), default_capacity(30, 2000));
    let centers = greedy_pass(&mut stream, &cfg).unwrap();
    assert_eq!(centers.len(), 10);
    let found = threshold_clusters(&centers, theory.theta()).unwrap();
    assert_eq!(sorted(found), sorted(truth.right.clone()));
}

#[test]
fn static_sofa_without_noise_is_exact() {
    let params = PlantedParams {
        p: 1.0,
        noise: Noise::Probability(0.0),
        disjoint_right: true,
        ..small(1.0, 6)
    };
    let model = PlantedModel::new(params).unwrap();
    let truth = model.truth();
    let all: Vec<Record> = model.records().collect();
    let algo = StaticSofa::new(10, 0.5, DistanceMetric::new(0.1).unwrap(), 6);
    assert_eq!(quality(&truth.right, &algo.right_clusters(2000, &all).unwrap()), 1.0);
}

#[test]
fn sofa_recovers_strong_signal_end_to_end() {
    let (mut stream, truth) = generate_planted(small(0.9, 7)).unwrap();
    let cfg = SofaConfig {
        seed: 7,
        ..SofaConfig::new(10, default_capacity(30, 2000))
    };
    let run = sofa_pass(&mut stream, &cfg).unwrap();
    assert!(run.centers.len() <= cfg.c_max);
    let right = sofa_postprocess(&run.centers, &cfg, 0.5).unwrap();
    assert!(quality(&truth.right, &right) >= 0.85);
    let left = assign_left(&mut stream, &right).unwrap();
    assert!(quality(&truth.left_clusters(), &left.left_clusters(right.len())) >= 0.85);
}

#[test]
fn thresholds_are_nested_on_planted_data() {
    let (mut stream, _) = generate_planted(small(0.7, 8)).unwrap();
    let cfg = SofaConfig {
        seed: 8,
        ..SofaConfig::new(10, 100)
    };
    let run = sofa_pass(&mut stream, &cfg).unwrap();
    let all = multi_threshold(&run.centers, &cfg, &[0.3, 0.4, 0.5, 0.6, 0.7]).unwrap();
    for pair in all.windows(2) {
        for (lo, hi) in pair[0].1.iter().zip(&pair[1].1) {
            assert!(hi.iter().all(|j| lo.binary_search(j).is_ok()));
        }
    }
}

#[test]
fn bmf_cover_on_planted_data() {
    let (mut stream, truth) = generate_planted(small(0.9, 9)).unwrap();
    let cfg = SofaConfig {
        seed: 9,
        ..SofaConfig::new(10, 100)
    };
    let run = sofa_pass(&mut stream, &cfg).unwrap();
    let right = sofa_postprocess(&run.centers, &cfg, 0.5).unwrap();
    let cover = cover_left(&mut stream, &right).unwrap();
    assert!(cover.totals.iter().all(|&t| t >= 0));
    let left = cover.left.left_clusters(right.len());
    assert!(quality(&truth.left_clusters(), &left) >= 0.85);
}

#[test]
fn estimated_theta_separates_binomial_counters() {
    use rand::{Rng, SeedableRng};
    use rand_distr::{Binomial, Distribution};
    for (seed, p, q) in [(1u64, 0.7, 0.05), (2, 0.5, 0.1), (3, 0.9, 0.2)] {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let w = 200u64;
        let mut groups = Vec::new();
        for _ in 0..5 {
            let mut sk = MisraGries::new(1000).unwrap();
            for j in 0..300u32 {
                let prob = if j < 30 { p } else { q };
                let c = Binomial::new(w, prob).unwrap().sample(&mut rng);
                if c > 0 {
                    sk.insert(j, c as f64).unwrap();
                }
            }
            let _ = rng.random::<u8>();
            groups.push(sk);
        }
        let input: Vec<(&MisraGries, u64)> = groups.iter().map(|g| (g, w)).collect();
        let est = estimate_theta(&input);
        assert!(!est.fallback);
        assert!((est.p - p).abs() <= 0.1, "p {} vs {}", est.p, p);
        assert!((est.q - q).abs() <= 0.1, "q {} vs {}", est.q, q);
        assert!(est.theta > q && est.theta < p);
    }
}

#[test]
fn reduction_on_quarter_sample_tracks_full_static_run() {
    let params = PlantedParams { p: 0.8, ..small(0.8, 3) };
    let model = PlantedModel::new(params).unwrap();
    let truth = model.truth();
    let algo = StaticSofa::new(10, 0.5, DistanceMetric::new(0.1).unwrap(), 3);
    let all: Vec<Record> = model.records().collect();
    let full = quality(&truth.right, &algo.right_clusters(2000, &all).unwrap());
    let red = rs_reduction(&mut model.clone().into_source(), 250, 2000, &algo, 3).unwrap();
    assert_eq!(red.sample.len(), 250);
    let reduced = quality(&truth.right, &red.right_clusters);
    assert!((full - reduced).abs() <= 0.2, "full {full} reduced {reduced}");
}

#[test]
fn augmentation_only_adds_unkept_touched_vertices() {
    let model = PlantedModel::new(small(0.8, 4)).unwrap();
    let algo = StaticSofa::new(10, 0.5, DistanceMetric::new(0.1).unwrap(), 4);
    let red = rs_reduction(&mut model.into_source(), 250, 400, &algo, 4).unwrap();
    assert!(red.kept.len() <= 400);
    for c in &red.right_clusters {
        assert!(c.iter().all(|j| red.touched.binary_search(j).is_ok()));
    }
    let extra = red.touched.len() - red.kept.len();
    let placed: usize = red.right_clusters.iter().flatten().filter(|j| red.kept.binary_search(j).is_err()).count();
    assert!(placed <= extra);
}

#[test]
fn adjacency_file_replays_generated_stream() {
    let model = PlantedModel::new(small(0.7, 11)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.adj");
    let mut f = std::fs::File::create(&path).unwrap();
    write_adjacency(&mut f, 2000, Some(1000), model.records()).unwrap();
    drop(f);
    let mut stream = open_stream(&path, StreamFormat::Adjacency, None).unwrap();
    let from_file: Vec<_> = stream.next_pass().unwrap().map(|r| r.unwrap().vector).collect();
    let generated: Vec<_> = model.records().map(|r| r.vector).collect();
    assert_eq!(from_file, generated);
    let second: Vec<_> = stream.next_pass().unwrap().map(|r| r.unwrap().vector).collect();
    assert_eq!(second, generated);
    assert!(stream.next_pass().is_err());
}
