// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use twistrank::analysis::{sweep, SweepTarget, DEFAULT_K_ADVERTISEMENT, DEFAULT_K_SIGNED};
use twistrank::centrality::{centrality, combine_advertisements, CentralityKind, Temperature};
use twistrank::graph::{preprocess, NegativeInjection};
use twistrank::io::{self, RunManifest};
use twistrank::sampling::WalkConfig;
use twistrank::verify::{verify_graph, VerifyReport};
use twistrank::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "twistrank", version, about = "Twisted-walk centrality for signed and attributed networks")]
struct Cli {
    /// Worker threads for the compute kernels (default: available parallelism)
    #[arg(long, global = true, env = "TWISTRANK_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetrize, deduplicate, inject negatives and filter by degree
    Preprocess(PreprocessArgs),
    /// Rank nodes by a twisted-walk centrality
    Rank(RankArgs),
    /// Compare centrality top-k sets with degree baselines across temperatures
    Sweep(SweepArgs),
    /// Check closed forms against brute-force enumeration on a small graph
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list: `u w [sign]` per line
    #[arg(long)]
    edges: PathBuf,
    /// Node attributes: `u v1 ... vp` per line
    #[arg(long)]
    attrs: Option<PathBuf>,
}

#[derive(Args)]
struct PreprocessArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = 0)]
    min_degree: usize,
    /// Number of cross-community negative edges to add
    #[arg(long, requires = "partition")]
    inject_negative: Option<usize>,
    /// Community labels: `u label` per line
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum MeasureArg {
    Influence,
    Trust,
    Ad,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    measure: MeasureArg,
    /// Weight of single-hop walks
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta1: f64,
    /// Weight of two-hop walks; beta1 + beta2 must equal 1
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta2: f64,
    /// Advertisement vector file; repeat to sum several advertisements
    #[arg(long)]
    ad_vector: Vec<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("temperature").required(true).args(["theta", "gamma"])))]
struct RankArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Target mean path measure; the matching theta is solved for
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("targets").required(true).args(["gammas", "thetas"])))]
struct SweepArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated gamma targets
    #[arg(long, allow_hyphen_values = true)]
    gammas: Option<String>,
    /// Comma-separated theta targets
    #[arg(long, allow_hyphen_values = true)]
    thetas: Option<String>,
    /// Top-k size (default 100, or 250 for the advertisement measure)
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Also write the report and a manifest here
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::InvalidWalkConfig { .. } | Error::NonFiniteTheta | Error::GammaOutOfRange(_) => {
            EXIT_USAGE
        }
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let argv: Vec<String> = std::env::args().collect();
    let result = match cli.command {
        Command::Preprocess(a) => cmd_preprocess(a, argv),
        Command::Rank(a) => cmd_rank(a, argv),
        Command::Sweep(a) => cmd_sweep(a, argv),
        Command::Verify(a) => cmd_verify(a, argv),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> twistrank::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_manifest(dir: &Path, command: &str, argv: Vec<String>, params: serde_json::Value) -> twistrank::Result<()> {
    write(dir, "manifest.json", &RunManifest::new(command, argv, params).to_json()?)
}

fn create_dir(dir: &Path) -> twistrank::Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))
}

fn cmd_preprocess(a: PreprocessArgs, argv: Vec<String>) -> twistrank::Result<u8> {
    let edges = io::read_edge_list(&a.graph.edges)?;
    let attrs = a.graph.attrs.as_deref().map(io::read_attributes).transpose()?;
    let injection = match (a.inject_negative, &a.partition) {
        (Some(count), Some(p)) => Some(NegativeInjection {
            count,
            seed: a.seed,
            partition: io::read_partition(p)?,
        }),
        _ => None,
    };
    let (g, report) = preprocess(&edges, attrs.as_deref(), a.min_degree, injection.as_ref())?;

    create_dir(&a.out)?;
    write(&a.out, "edges.txt", &io::format_edge_list(&g))?;
    if attrs.is_some() {
        write(&a.out, "attrs.txt", &io::format_attributes(&g))?;
    }
    write(&a.out, "report.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
    write_manifest(
        &a.out,
        "preprocess",
        argv,
        json!({
            "edges": a.graph.edges,
            "attrs": a.graph.attrs,
            "min_degree": a.min_degree,
            "inject_negative": a.inject_negative,
            "partition": a.partition,
            "seed": a.seed,
        }),
    )?;
    println!(
        "{} nodes, {} edges ({} positive, {} negative)",
        report.output_nodes, report.output_edges, report.output_positive, report.output_negative
    );
    Ok(0)
}

struct Model {
    kind: CentralityKind,
    walk: WalkConfig,
}

fn load_model(graph: &GraphArgs, m: &ModelArgs) -> twistrank::Result<(twistrank::graph::AttributedGraph, Model)> {
    let walk = WalkConfig::new(m.beta1, m.beta2)?;
    let kind = match m.measure {
        MeasureArg::Influence | MeasureArg::Trust if !m.ad_vector.is_empty() => {
            return Err(Error::Usage("--ad-vector only applies to --measure ad".into()))
        }
        MeasureArg::Influence => CentralityKind::Influence,
        MeasureArg::Trust => CentralityKind::Trust,
        MeasureArg::Ad => {
            let Some((first, rest)) = m.ad_vector.split_first() else {
                return Err(Error::Usage("--measure ad requires --ad-vector".into()));
            };
            if graph.attrs.is_none() {
                return Err(Error::Usage("--measure ad requires --attrs".into()));
            }
            let mut z = io::read_ad_vector(first)?;
            for path in rest {
                z = combine_advertisements(&z, &io::read_ad_vector(path)?)?;
            }
            CentralityKind::Advertisement(z)
        }
    };
    let g = io::read_graph(&graph.edges, graph.attrs.as_deref())?;
    kind.measure().validate(&g)?;
    Ok((g, Model { kind, walk }))
}

fn model_params(graph: &GraphArgs, m: &ModelArgs, model: &Model) -> serde_json::Value {
    let ad = match &model.kind {
        CentralityKind::Advertisement(z) => Some(z.clone()),
        _ => None,
    };
    json!({
        "edges": graph.edges,
        "attrs": graph.attrs,
        "measure": m.measure,
        "beta1": m.beta1,
        "beta2": m.beta2,
        "ad_vector_files": m.ad_vector,
        "ad_vector": ad,
    })
}

fn cmd_rank(a: RankArgs, argv: Vec<String>) -> twistrank::Result<u8> {
    let (g, model) = load_model(&a.graph, &a.model)?;
    let temperature = match (a.theta, a.gamma) {
        (Some(t), None) => Temperature::Theta(t),
        (None, Some(gm)) => Temperature::Gamma(gm),
        _ => return Err(Error::Usage("give exactly one of --theta or --gamma".into())),
    };
    let out = centrality(&g, &model.kind, temperature, &model.walk)?;

    create_dir(&a.out)?;
    write(&a.out, "ranking.csv", &io::ranking_csv(&out.ranking))?;
    write(&a.out, "ranking.json", &io::ranking_json(&out.ranking)?)?;
    let mut params = model_params(&a.graph, &a.model, &model);
    params["theta"] = json!(a.theta);
    params["gamma"] = json!(a.gamma);
    params["resolved_theta"] = json!(out.theta);
    write_manifest(&a.out, "rank", argv, params)?;
    if a.gamma.is_some() {
        println!("theta {}", io::fmt_sig(out.theta));
    }
    Ok(0)
}

fn parse_targets(list: &str, flag: &str) -> twistrank::Result<Vec<f64>> {
    list.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Usage(format!("{flag}: invalid number `{t}`")))
        })
        .collect()
}

fn cmd_sweep(a: SweepArgs, argv: Vec<String>) -> twistrank::Result<u8> {
    let targets: Vec<SweepTarget> = match (&a.gammas, &a.thetas) {
        (Some(list), None) => parse_targets(list, "--gammas")?.into_iter().map(SweepTarget::Gamma).collect(),
        (None, Some(list)) => parse_targets(list, "--thetas")?.into_iter().map(SweepTarget::Theta).collect(),
        _ => return Err(Error::Usage("give exactly one of --gammas or --thetas".into())),
    };
    let (g, model) = load_model(&a.graph, &a.model)?;
    let k = a.k.unwrap_or(match model.kind {
        CentralityKind::Advertisement(_) => DEFAULT_K_ADVERTISEMENT,
        _ => DEFAULT_K_SIGNED,
    });
    let rows = sweep(&g, &model.kind, &targets, &model.walk, k);

    create_dir(&a.out)?;
    write(&a.out, "sweep.csv", &io::sweep_csv(&rows))?;
    write(&a.out, "sweep.json", &io::sweep_json(&rows)?)?;
    let mut params = model_params(&a.graph, &a.model, &model);
    params["gammas"] = json!(a.gammas);
    params["thetas"] = json!(a.thetas);
    params["k"] = json!(k);
    write_manifest(&a.out, "sweep", argv, params)?;

    let failed: Vec<_> = rows.iter().filter_map(|r| r.error.as_deref()).collect();
    for e in &failed {
        eprintln!("row error: {e}");
    }
    Ok(if failed.is_empty() { 0 } else { EXIT_DATA })
}

fn cmd_verify(a: VerifyArgs, argv: Vec<String>) -> twistrank::Result<u8> {
    let report = match io::read_graph(&a.graph.edges, a.graph.attrs.as_deref()) {
        Ok(g) => verify_graph(&g)?,
        Err(e @ (Error::Io(_) | Error::Usage(_))) => return Err(e),
        Err(e) => VerifyReport::invalid_input(e.to_string()),
    };
    print!("{}", report.render());
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        write(dir, "verify.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
        write_manifest(dir, "verify", argv, json!({ "edges": a.graph.edges, "attrs": a.graph.attrs }))?;
    }
    Ok(if report.passed() { 0 } else { EXIT_VERIFY })
}
