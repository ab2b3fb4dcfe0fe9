//! Command-line front end: `gen`, `run` and `eval`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::artifact::{read_artifact, write_artifact, ArtifactFormat, ClusteringArtifact, LeftAssignment, RunParams};
use crate::baseline::{reduce_sample, sample_records, StaticSofa};
use crate::error::{Error, Result};
use crate::greedy::{greedy_over, threshold_clusters, GreedyConfig, TheoryParams};
use crate::metrics::{quality, reconstruction_stats, MetricsReport};
use crate::second_pass::{line_search, select_top_k, AssignMode, CoverResult};
use crate::sketch::MisraGries;
use crate::sofa::{
    default_capacity, estimate_theta, group_centers, sofa_over, Grouping, PhaseTelemetry, SofaConfig, ThetaPolicy,
    DEFAULT_ALPHA, DEFAULT_THETAS,
};
use crate::stream::{open_stream, write_adjacency, Record, StreamFormat, StreamSource};
use crate::synthetic::{GroundTruth, Noise, PlantedModel, PlantedParams};
use crate::vector::DistanceMetric;

/// Records buffered when estimating the cluster size bound from degrees.
pub const DEGREE_BUFFER: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "sofa", version, about = "Streaming biclustering and Boolean matrix factorization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted instance and its ground truth.
    Gen(GenArgs),
    /// Cluster a stream and write the clustering.
    Run(RunArgs),
    /// Score a clustering against its stream and, optionally, the truth.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub ell: usize,
    #[arg(long, default_value_t = 30)]
    pub r: usize,
    #[arg(long, default_value_t = 0.7)]
    pub p: f64,
    #[arg(long, conflicts_with = "noise_degree")]
    pub q: Option<f64>,
    /// Expected noise neighbors per left vertex (default 20).
    #[arg(long)]
    pub noise_degree: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub disjoint_right: bool,
    /// Stream clusters one after another instead of shuffled.
    #[arg(long)]
    pub sorted: bool,
    /// Output directory; receives `graph.adj` and `truth.tsv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Sofa,
    SofaAuto,
    Greedy,
    Static,
    RsStatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Bicluster,
    Bmf,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `adjacency` or `edge-list`.
    #[arg(long, default_value = "adjacency")]
    pub format: String,
    /// Right universe size, when the file has no header.
    #[arg(long)]
    pub n: Option<usize>,
}

impl StreamArgs {
    fn open(&self) -> Result<StreamSource> {
        open_stream(&self.input, self.format.parse::<StreamFormat>()?, self.n)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[arg(long, value_enum, default_value = "sofa")]
    pub algo: Algo,
    #[arg(long)]
    pub k: usize,
    /// Center budget (default 20k).
    #[arg(long)]
    pub cmax: Option<usize>,
    /// Sketch capacity (default max{3s, 0.05n}).
    #[arg(long)]
    pub capacity: Option<usize>,
    /// Upper bound on right cluster sizes.
    #[arg(long)]
    pub s: Option<usize>,
    /// Estimate s as the 99th percentile of the first 10^4 left degrees.
    #[arg(long, conflicts_with = "s")]
    pub estimate_s: bool,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Comma-separated thresholds or `auto`.
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long, value_enum, default_value = "bicluster")]
    pub mode: Mode,
    /// BMF over one cluster per center, keeping the k best by cover score.
    #[arg(long)]
    pub skip_grouping: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write per-phase telemetry as JSON lines.
    #[arg(long)]
    pub telemetry: Option<PathBuf>,
    /// Greedy: derive the distance threshold and theta from --p and s.
    #[arg(long)]
    pub theory_mode: bool,
    #[arg(long, requires = "theory_mode")]
    pub p: Option<f64>,
    /// Greedy: distance threshold (without --theory-mode).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Reduction: left sample size.
    #[arg(long)]
    pub m_tilde: Option<usize>,
    /// Reduction: right vertices kept for clustering.
    #[arg(long)]
    pub n_tilde: Option<usize>,
    /// Static: largest number of edges held in memory.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// `tsv` or `json`.
    #[arg(long, default_value = "tsv")]
    pub out_format: String,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[arg(long)]
    pub clusters: PathBuf,
    #[arg(long, default_value = "tsv")]
    pub clusters_format: String,
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// Telemetry written by `run`, for memory and phase summaries.
    #[arg(long)]
    pub telemetry: Option<PathBuf>,
    /// Metrics destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `json` (one line) or `tsv` (header plus one row).
    #[arg(long, default_value = "json")]
    pub out_format: String,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Eval(a) => cmd_eval(&a),
    }
}

pub fn cmd_gen(a: &GenArgs) -> Result<()> {
    let noise = match (a.q, a.noise_degree) {
        (Some(_), Some(_)) => return Err(Error::InvalidParameter("--q conflicts with --noise-degree".into())),
        (Some(q), None) => Noise::Probability(q),
        (None, d) => Noise::ExpectedDegree(d.unwrap_or(20.0)),
    };
    let params = PlantedParams {
        n: a.n,
        k: a.k,
        ell: a.ell,
        r: a.r,
        p: a.p,
        noise,
        seed: a.seed,
        disjoint_right: a.disjoint_right,
        shuffle: !a.sorted,
    };
    let model = PlantedModel::new(params)?;
    fs::create_dir_all(&a.out)?;
    let mut out = BufWriter::new(File::create(a.out.join("graph.adj"))?);
    write_adjacency(&mut out, a.n, Some(model.params().m()), model.records())?;
    out.flush()?;
    model.truth_by_position().write(a.n, a.out.join("truth.tsv"))?;
    Ok(())
}

fn parse_thetas(spec: Option<&str>) -> Result<ThetaPolicy> {
    match spec {
        None => Ok(ThetaPolicy::Fixed(DEFAULT_THETAS.to_vec())),
        Some("auto") => Ok(ThetaPolicy::Auto),
        Some(list) => {
            let ts = list
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| *v > 0.0)
                        .ok_or_else(|| Error::InvalidParameter(format!("bad theta `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ThetaPolicy::Fixed(ts))
        }
    }
}

/// 99th percentile (nearest rank) of a set of degrees.
pub fn percentile_99(degrees: &[usize]) -> usize {
    if degrees.is_empty() {
        return 0;
    }
    let mut d = degrees.to_vec();
    d.sort_unstable();
    let rank = ((0.99 * d.len() as f64).ceil() as usize).clamp(1, d.len());
    d[rank - 1]
}

/// Right clusters for each candidate threshold, plus run statistics.
struct FirstPass {
    candidates: Vec<(f64, Vec<Vec<u32>>)>,
    capacity: Option<usize>,
    c_max: Option<usize>,
}

pub fn cmd_run(a: &RunArgs) -> Result<()> {
    let mut stream = a.stream.open()?;
    let n = stream.universe();
    let out_format: ArtifactFormat = a.out_format.parse()?;
    let mut policy = parse_thetas(a.theta.as_deref())?;
    if a.algo == Algo::SofaAuto {
        policy = ThetaPolicy::Auto;
    }
    if a.skip_grouping && a.mode != Mode::Bmf {
        return Err(Error::InvalidParameter("--skip-grouping requires --mode bmf".into()));
    }
    let metric = DistanceMetric::new(a.alpha)?;
    let mut telemetry = match &a.telemetry {
        Some(p) => Some(BufWriter::new(File::create(p)?)),
        None => None,
    };

    let first = {
        let mut pass = stream.next_pass()?;
        // Degree buffer for --estimate-s; the buffered records are replayed.
        let mut buffered: Vec<Record> = Vec::new();
        let mut s = a.s;
        let needs_s = s.is_none()
            && (a.estimate_s
                || (a.capacity.is_none() && matches!(a.algo, Algo::Sofa | Algo::SofaAuto | Algo::Greedy))
                || a.theory_mode);
        if needs_s {
            for rec in pass.by_ref().take(DEGREE_BUFFER) {
                buffered.push(rec?);
            }
            let degrees: Vec<usize> = buffered.iter().map(|r| r.vector.len()).collect();
            let est = percentile_99(&degrees).max(1);
            info!("estimated s = {est} from {} degrees", degrees.len());
            s = Some(est);
        }
        let records = buffered.into_iter().map(Ok).chain(pass);
        let capacity = a.capacity.unwrap_or_else(|| default_capacity(s.unwrap_or(1), n));
        match a.algo {
            Algo::Sofa | Algo::SofaAuto => {
                let cfg = SofaConfig {
                    k: a.k,
                    c_max: a.cmax.unwrap_or(20 * a.k),
                    sketch_capacity: capacity,
                    metric,
                    seed: a.seed,
                    theta_policy: policy.clone(),
                };
                let mut io_err = None;
                let run = sofa_over(n, records, &cfg, |t: &PhaseTelemetry| {
                    if let Some(w) = telemetry.as_mut() {
                        if let Err(e) = writeln!(w, "{}", t.to_line()) {
                            io_err.get_or_insert(e);
                        }
                    }
                })?;
                if let Some(e) = io_err {
                    return Err(e.into());
                }
                if let Some(w) = telemetry.as_mut() {
                    let summary = serde_json::json!({
                        "summary": {
                            "records": run.records,
                            "phases": run.phases.len(),
                            "restarts": run.phases.iter().filter(|p| p.restarted).count(),
                            "peak_entries": run.peak_entries,
                            "peak_centers": run.peak_centers,
                            "max_degree": run.max_degree,
                            "centers": run.centers.len(),
                            "capacity": capacity,
                            "c_max": cfg.c_max,
                        }
                    });
                    writeln!(w, "{summary}")?;
                }
                let grouping = if a.skip_grouping {
                    Grouping::per_center(&run.centers)
                } else {
                    group_centers(&run.centers, &cfg)?
                };
                FirstPass {
                    candidates: thresholds(&grouping.counters(), &policy)?
                        .into_iter()
                        .map(|t| (t, grouping.threshold(t)))
                        .collect(),
                    capacity: Some(capacity),
                    c_max: Some(cfg.c_max),
                }
            }
            Algo::Greedy => {
                let (threshold, theory_theta) = if a.theory_mode {
                    let p = a
                        .p
                        .ok_or_else(|| Error::InvalidParameter("--theory-mode needs --p".into()))?;
                    let t = TheoryParams::new(p, s.expect("s is set in theory mode"));
                    (t.distance_threshold(), Some(t.theta()))
                } else {
                    let th = a
                        .threshold
                        .ok_or_else(|| Error::InvalidParameter("greedy needs --threshold or --theory-mode".into()))?;
                    (th, None)
                };
                let cfg = GreedyConfig {
                    threshold,
                    sketch_capacity: capacity,
                    metric,
                };
                let centers = greedy_over(n, records, &cfg)?;
                let thetas = match (theory_theta, a.theta.is_some()) {
                    (Some(t), false) => vec![t],
                    _ => {
                        let counters: Vec<(&MisraGries, u64)> = centers.iter().map(|c| (&c.sketch, c.weight)).collect();
                        thresholds(&counters, &policy)?
                    }
                };
                let mut candidates = Vec::new();
                for t in thetas {
                    candidates.push((t, threshold_clusters(&centers, t)?));
                }
                FirstPass {
                    candidates,
                    capacity: Some(capacity),
                    c_max: None,
                }
            }
            Algo::Static => {
                let all: Vec<Record> = records.collect::<Result<_>>()?;
                let thetas = fixed_thetas(&policy)?;
                let algo = StaticSofa {
                    budget: a.budget,
                    ..StaticSofa::new(a.k, thetas[0], metric, a.seed)
                };
                let clusters = algo.multi_threshold(n, &all, &thetas)?;
                FirstPass {
                    candidates: thetas.into_iter().zip(clusters).collect(),
                    capacity: None,
                    c_max: None,
                }
            }
            Algo::RsStatic => {
                let thetas = fixed_thetas(&policy)?;
                let m_tilde = a
                    .m_tilde
                    .ok_or_else(|| Error::InvalidParameter("rs-static needs --m-tilde".into()))?;
                let n_tilde = a.n_tilde.unwrap_or(n);
                let sample = sample_records(records, m_tilde, a.seed)?;
                let mut candidates = Vec::new();
                for &t in &thetas {
                    let algo = StaticSofa {
                        budget: a.budget,
                        ..StaticSofa::new(a.k, t, metric, a.seed)
                    };
                    let red = reduce_sample(n, sample.clone(), n_tilde, &algo)?;
                    candidates.push((t, red.right_clusters));
                }
                FirstPass {
                    candidates,
                    capacity: None,
                    c_max: None,
                }
            }
        }
    };
    if let Some(mut w) = telemetry {
        w.flush()?;
    }

    let (theta, right, left) = second_pass(&mut stream, first.candidates, a.mode, a.skip_grouping, a.k)?;
    let artifact = ClusteringArtifact {
        params: RunParams {
            algo: a.algo.to_possible_value().expect("named").get_name().to_string(),
            k: a.k,
            theta,
            alpha: a.alpha,
            c_max: first.c_max,
            capacity: first.capacity,
            seed: a.seed,
        },
        right_clusters: right,
        left,
    };
    write_artifact(&artifact, &a.out, out_format)
}

fn fixed_thetas(policy: &ThetaPolicy) -> Result<Vec<f64>> {
    match policy {
        ThetaPolicy::Fixed(ts) => Ok(ts.clone()),
        ThetaPolicy::Auto => Err(Error::InvalidParameter(
            "theta `auto` needs sketch counters; use sofa, sofa-auto or greedy".into(),
        )),
    }
}

fn thresholds(counters: &[(&MisraGries, u64)], policy: &ThetaPolicy) -> Result<Vec<f64>> {
    match policy {
        ThetaPolicy::Fixed(ts) => Ok(ts.clone()),
        ThetaPolicy::Auto => {
            let est = estimate_theta(counters);
            info!("estimated theta = {:.4} (p={}, q={}, fallback={})", est.theta, est.p, est.q, est.fallback);
            Ok(vec![est.theta])
        }
    }
}

fn second_pass(
    stream: &mut StreamSource,
    candidates: Vec<(f64, Vec<Vec<u32>>)>,
    mode: Mode,
    skip_grouping: bool,
    k: usize,
) -> Result<(f64, Vec<Vec<u32>>, LeftAssignment)> {
    let assign = match mode {
        Mode::Bicluster => AssignMode::Exclusive,
        Mode::Bmf => AssignMode::Cover,
    };
    let choice = line_search(stream.next_pass()?, candidates, assign)?;
    for (t, m) in &choice.mismatches {
        info!("theta {t}: {m} mismatches");
    }
    if skip_grouping {
        let cover = CoverResult {
            left: choice.left,
            totals: choice.totals,
        };
        let (right, left) = select_top_k(&choice.right, &cover, k);
        Ok((choice.theta, right, left))
    } else {
        Ok((choice.theta, choice.right, choice.left))
    }
}

#[derive(Debug, Default)]
struct TelemetrySummary {
    peak_entries: Option<usize>,
    phases: usize,
    restarts: usize,
}

fn read_telemetry(path: &Path) -> Result<TelemetrySummary> {
    let text = fs::read_to_string(path)?;
    let mut out = TelemetrySummary::default();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line)?;
        if let Some(s) = v.get("summary") {
            out.peak_entries = s.get("peak_entries").and_then(|x| x.as_u64()).map(|x| x as usize);
        } else {
            let t: PhaseTelemetry = serde_json::from_value(v)?;
            out.phases += 1;
            out.restarts += usize::from(t.restarted);
            out.peak_entries = Some(out.peak_entries.unwrap_or(0).max(t.entries));
        }
    }
    Ok(out)
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let artifact = read_artifact(&a.clusters, a.clusters_format.parse()?)?;
    let mut stream = a.stream.open()?;
    let stats = reconstruction_stats(stream.next_pass()?, &artifact.left, &artifact.right_clusters)?;
    let (q, left_q) = match &a.ground_truth {
        Some(p) => {
            let truth = GroundTruth::read(p)?;
            let found_left = artifact.left.left_clusters(artifact.k());
            (
                Some(quality(&truth.right, &artifact.right_clusters)),
                Some(quality(&truth.left_clusters(), &found_left)),
            )
        }
        None => (None, None),
    };
    let tel = match &a.telemetry {
        Some(p) => Some(read_telemetry(p)?),
        None => None,
    };
    let report = MetricsReport {
        quality: q,
        left_quality: left_q,
        gain: stats.gain,
        recall: stats.recall,
        edges: stats.edges,
        peak_entries: tel.as_ref().and_then(|t| t.peak_entries),
        phases: tel.as_ref().map(|t| t.phases),
        restarts: tel.as_ref().map(|t| t.restarts),
    };
    let text = match a.out_format.as_str() {
        "json" => format!("{}\n", report.to_json_line()),
        "tsv" => format!("{}\n{}\n", MetricsReport::TSV_HEADER, report.to_tsv_row()),
        other => return Err(Error::InvalidParameter(format!("unknown metrics format `{other}`"))),
    };
    match &a.out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
