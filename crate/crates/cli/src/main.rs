mod input;
mod report;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use commhide::experiment::{
    bench, run_node_hiding, run_protocol, sweep, Axis, BudgetSpec, GraphSource, Method, NodeBudget,
    NodeHidingSpec, Protocol,
};
use commhide::io::{write_edge_list, write_partition, NamedGraph};
use commhide::metrics::{score, Neighborhood, ReportMeta};
use commhide::par::{configure_threads, Exec};
use commhide::synth::{generate, SynthParams};
use commhide::{Budget, Graph};
use serde::Serialize;
use serde_json::json;

use input::{DetectorArg, TargetArg};
use report::{f, Report};

#[derive(Parser, Debug)]
#[command(
    name = "commhide",
    version,
    about = "Hide communities from community detection by rewiring edges"
)]
struct Cli {
    /// Emit JSON lines (first line: provenance) instead of a table.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for independent experiment cells.
    #[arg(long, global = true, env = "COMMHIDE_THREADS")]
    threads: Option<usize>,

    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a planted-partition graph.
    Generate(GenerateArgs),
    /// Detect communities and write a partition file.
    Detect(DetectArgs),
    /// Rewire a graph to hide one community.
    Deceive(DeceiveArgs),
    /// Score a rewiring, or run the full hide-and-redetect protocol.
    Evaluate(EvaluateArgs),
    /// Run the protocol over a range of budgets or mixing parameters.
    Sweep(SweepArgs),
    /// Time deception against target-community edge count.
    Bench(BenchArgs),
    /// Hide individual nodes instead of whole communities.
    HideNodes(HideNodesArgs),
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Number of communities.
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Expected fraction of each node's edges leaving its community.
    #[arg(long, default_value_t = 0.4)]
    mu: f64,
    #[arg(long, default_value_t = 20.0)]
    avg_deg: f64,
}

impl SynthArgs {
    fn params(&self, seed: u64) -> SynthParams {
        SynthParams {
            n: self.n,
            k_comms: self.k,
            mu: self.mu,
            avg_deg: self.avg_deg,
            seed,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    #[command(flatten)]
    synth: SynthArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list output.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth partition output. Isolated nodes are left out, matching the
    /// edge list.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct DetectArgs {
    /// Edge list, or builtin:karate.
    #[arg(long)]
    graph: PathBuf,
    /// louvain, labelprop, or a partition file.
    #[arg(long, default_value = "louvain")]
    detector: DetectorArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BudgetArgs {
    /// Budget as a fraction of the target community size, rounded up.
    #[arg(long, default_value_t = 0.3)]
    budget_frac: f64,
    /// Share of the budget spent on additions.
    #[arg(long, requires = "beta_del_frac")]
    beta_add_frac: Option<f64>,
    /// Share of the budget spent on deletions.
    #[arg(long, requires = "beta_add_frac")]
    beta_del_frac: Option<f64>,
}

impl BudgetArgs {
    fn spec(&self) -> BudgetSpec {
        BudgetSpec {
            fraction: self.budget_frac,
            split: self.beta_add_frac.zip(self.beta_del_frac),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct DeceiveArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Partition of the input graph; detected with --detector when absent.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, default_value = "louvain")]
    detector: DetectorArg,
    /// neural, random, dice, nagaraja-degree, nagaraja-eigen or nagaraja-random.
    #[arg(long, default_value = "neural")]
    method: Method,
    /// Community id, largest, or node:NAME for the community holding NAME.
    #[arg(long, default_value = "largest")]
    target: TargetArg,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rewired edge list.
    #[arg(long)]
    out: PathBuf,
    /// Update plan as JSON lines.
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Rewired graph to score. Without it the whole protocol runs instead.
    #[arg(long)]
    rewired: Option<PathBuf>,
    /// Partition before rewiring; detected when absent.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, default_value = "louvain")]
    detector: DetectorArg,
    #[arg(long, default_value = "neural")]
    method: Method,
    /// For a single rewiring: id, largest or node:NAME. For the protocol also
    /// each or sample:K.
    #[arg(long, default_value = "each")]
    target: TargetArg,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Take MNMI's neighborhood from the rewired graph instead of the original.
    #[arg(long)]
    rewired_neighborhood: bool,
    /// Print every cell, not just the mean.
    #[arg(long)]
    cells: bool,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    /// budget or mu.
    #[arg(long)]
    axis: Axis,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Fixed input graph; otherwise planted-partition instances.
    #[arg(long, conflicts_with = "instances")]
    graph: Option<PathBuf>,
    #[command(flatten)]
    synth: SynthArgs,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, default_value = "louvain")]
    detector: DetectorArg,
    #[arg(long, default_value = "neural")]
    method: Method,
    /// Defaults to sample:5 on synthetic graphs and each on a fixed graph.
    #[arg(long)]
    target: Option<TargetArg>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = 2)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    /// Target-community edge counts.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1000,3000,10000,30000,100000"
    )]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct HideNodesArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "louvain")]
    detector: DetectorArg,
    /// Fraction of all nodes drawn as targets in each run.
    #[arg(long, default_value_t = 0.3)]
    target_frac: f64,
    /// Budget per node as a fraction of its community size, rounded up.
    #[arg(long, default_value_t = 0.3)]
    budget_frac: f64,
    /// Fixed budget per node; overrides --budget-frac.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print every node outcome, not just the score.
    #[arg(long)]
    cells: bool,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        configure_threads(threads);
    }
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, cli.json),
        Command::Detect(a) => cmd_detect(a, cli.json),
        Command::Deceive(a) => cmd_deceive(a, cli.json, exec),
        Command::Evaluate(a) => cmd_evaluate(a, cli.json, exec),
        Command::Sweep(a) => cmd_sweep(a, cli.json, exec),
        Command::Bench(a) => cmd_bench(a, cli.json, exec),
        Command::HideNodes(a) => cmd_hide_nodes(a, cli.json, exec),
    }
}

fn cmd_generate(a: &GenerateArgs, json: bool) -> Result<()> {
    let (g, truth) = generate(&a.synth.params(a.seed))?;
    let ng = NamedGraph::numeric(g);
    let mut w = input::create(&a.out)?;
    write_edge_list(&mut w, &ng.graph, &ng.names)?;
    w.flush()?;
    if let Some(path) = &a.truth {
        let mut w = input::create(path)?;
        for v in (0..ng.graph.node_count()).filter(|&v| ng.graph.degree(v) > 0) {
            writeln!(w, "{}\t{}", ng.names.name(v), truth.label(v))?;
        }
        w.flush()?;
    }
    let isolated = (0..ng.graph.node_count())
        .filter(|&v| ng.graph.degree(v) == 0)
        .count();
    let mut r = Report::new(
        json,
        "generate",
        a,
        vec!["nodes", "edges", "communities", "isolated", "mixing"],
    )?;
    r.row(
        "graph",
        &json!({
            "nodes": ng.graph.node_count(),
            "edges": ng.graph.edge_count(),
            "communities": truth.community_count(),
            "isolated": isolated,
            "mixing": commhide::synth::external_fraction(&ng.graph, &truth),
        }),
        vec![
            ng.graph.node_count().to_string(),
            ng.graph.edge_count().to_string(),
            truth.community_count().to_string(),
            isolated.to_string(),
            f(commhide::synth::external_fraction(&ng.graph, &truth)),
        ],
    )?;
    r.finish()
}

fn cmd_detect(a: &DetectArgs, json: bool) -> Result<()> {
    let ng = input::load_graph(&a.graph)?;
    let (p, q) = input::detect_partition(&ng, &a.detector, a.seed)?;
    let mut w = input::create(&a.out)?;
    write_partition(&mut w, &p, &ng.names)?;
    w.flush()?;
    let mut r = Report::new(
        json,
        "detect",
        a,
        vec!["nodes", "communities", "modularity"],
    )?;
    r.row(
        "partition",
        &json!({"nodes": p.node_count(), "communities": p.community_count(), "modularity": q}),
        vec![
            p.node_count().to_string(),
            p.community_count().to_string(),
            q.map_or("-".into(), f),
        ],
    )?;
    r.finish()
}

fn cmd_deceive(a: &DeceiveArgs, json: bool, exec: Exec) -> Result<()> {
    let ng = input::load_graph(&a.graph)?;
    let p = match &a.partition {
        Some(path) => input::load_partition(path, &ng.names)?,
        None => input::detect_partition(&ng, &a.detector, a.seed)?.0,
    };
    let target = a.target.single(&p, &ng.names)?;
    let budget: Budget = a.budget.spec().for_size(p.members(target).len())?;
    let (rewired, plan) = a
        .method
        .deceive(&ng.graph, &p, target, budget, a.seed, exec)?;

    let mut w = input::create(&a.out)?;
    write_edge_list(&mut w, &rewired, &ng.names)?;
    w.flush()?;
    if let Some(path) = &a.plan {
        let mut w = input::create(path)?;
        for rec in plan.records(&ng.names) {
            writeln!(w, "{}", serde_json::to_string(&rec)?)?;
        }
        w.flush()?;
    }

    let mut r = Report::new(
        json,
        "deceive",
        a,
        vec![
            "method",
            "target",
            "size",
            "budget",
            "added",
            "deleted",
            "early_stop",
            "perm_loss",
        ],
    )?;
    r.row(
        "deception",
        &json!({
            "method": a.method.name(),
            "target": target,
            "target_size": p.members(target).len(),
            "budget": budget,
            "additions": plan.additions(),
            "deletions": plan.deletions(),
            "terminated_early": plan.terminated_early,
            "permanence_loss": plan.total_loss(),
        }),
        vec![
            a.method.name().into(),
            target.to_string(),
            p.members(target).len().to_string(),
            budget.beta.to_string(),
            plan.additions().to_string(),
            plan.deletions().to_string(),
            plan.terminated_early.to_string(),
            format!("{:.6}", plan.total_loss()),
        ],
    )?;
    r.finish()
}

const SCORE_HEADER: [&str; 4] = ["nmi", "mnmi", "comm_s", "comm_u"];

fn cmd_evaluate(a: &EvaluateArgs, json: bool, exec: Exec) -> Result<()> {
    let ng = input::load_graph(&a.graph)?;
    let hood = if a.rewired_neighborhood {
        Neighborhood::Rewired
    } else {
        Neighborhood::Original
    };
    let Some(rewired_path) = &a.rewired else {
        let proto = Protocol {
            detector: a.detector.built_in(a.seed)?,
            method: a.method,
            budget: a.budget.spec(),
            targets: a.target.selector()?,
            runs: a.runs,
            seed: a.seed,
            neighborhood: hood,
        };
        let result = run_protocol(&ng.graph, &proto, exec)?;
        let mut header = vec!["scope", "run", "target"];
        header.extend(SCORE_HEADER);
        let mut r = Report::new(json, "evaluate", a, header)?;
        if a.cells {
            for c in &result.cells {
                let s = c.scores;
                r.row(
                    "cell",
                    c,
                    vec![
                        "cell".into(),
                        c.run.to_string(),
                        c.target.to_string(),
                        f(s.nmi),
                        f(s.mnmi),
                        s.comm_splits.to_string(),
                        f(s.comm_uniformity),
                    ],
                )?;
            }
        }
        let m = result.mean;
        r.row(
            "mean",
            &m,
            vec![
                format!("mean of {}", m.cells),
                "-".into(),
                "-".into(),
                f(m.nmi),
                f(m.mnmi),
                f(m.comm_splits),
                f(m.comm_uniformity),
            ],
        )?;
        return r.finish();
    };

    let rewired = input::load_graph_in(rewired_path, &ng.names)?;
    let before = match &a.partition {
        Some(path) => input::load_partition(path, &ng.names)?,
        None => input::detect_partition(&ng, &a.detector, a.seed)?.0,
    };
    let target = a.target.single(&before, &ng.names)?;
    let after_graph = NamedGraph {
        graph: rewired.clone(),
        names: ng.names.clone(),
    };
    let (after, _) = input::detect_partition(&after_graph, &a.detector, a.seed)?;
    let scores = score(&ng.graph, &rewired, &before, &after, target, hood)?;
    let report = scores.report(ReportMeta {
        method: a.method.name().into(),
        seed: a.seed,
        budget: changed_edges(&ng.graph, &rewired),
        detector: a.detector.config(a.seed).name().into(),
        target,
    });
    let mut header = vec!["target"];
    header.extend(SCORE_HEADER);
    let mut r = Report::new(json, "evaluate", a, header)?;
    r.row(
        "evaluation",
        &report,
        vec![
            target.to_string(),
            f(report.nmi),
            f(report.mnmi),
            report.comm_splits.to_string(),
            f(report.comm_uniformity),
        ],
    )?;
    r.finish()
}

/// Edges present in exactly one of the two graphs.
fn changed_edges(a: &Graph, b: &Graph) -> usize {
    let gone = a.edges().filter(|&(u, v)| !b.has_edge(u, v)).count();
    let new = b.edges().filter(|&(u, v)| !a.has_edge(u, v)).count();
    gone + new
}

fn cmd_sweep(a: &SweepArgs, json: bool, exec: Exec) -> Result<()> {
    if a.values.is_empty() {
        bail!("--values needs at least one value");
    }
    let (source, default_target) = match &a.graph {
        Some(path) => (
            GraphSource::Fixed(input::load_graph(path)?.graph),
            TargetArg::Each,
        ),
        None => (
            GraphSource::Synthetic {
                params: a.synth.params(a.seed),
                instances: a.instances,
            },
            TargetArg::Sample(5),
        ),
    };
    let proto = Protocol {
        detector: a.detector.built_in(a.seed)?,
        method: a.method,
        budget: a.budget.spec(),
        targets: a.target.as_ref().unwrap_or(&default_target).selector()?,
        runs: a.runs,
        seed: a.seed,
        neighborhood: Neighborhood::Original,
    };
    let rows = sweep(&source, &proto, a.axis, &a.values, exec).context("sweep failed")?;
    let mut header = vec!["value", "cells"];
    header.extend(SCORE_HEADER);
    let mut r = Report::new(json, "sweep", a, header)?;
    for row in &rows {
        let m = row.mean;
        r.row(
            "sweep",
            &json!({"axis": row.axis, "value": row.value, "mean": m}),
            vec![
                row.value.to_string(),
                m.cells.to_string(),
                f(m.nmi),
                f(m.mnmi),
                f(m.comm_splits),
                f(m.comm_uniformity),
            ],
        )?;
    }
    r.finish()
}

fn cmd_bench(a: &BenchArgs, json: bool, exec: Exec) -> Result<()> {
    let rows = bench(&a.sizes, a.repeats, a.seed, exec)?;
    let mut r = Report::new(
        json,
        "bench",
        a,
        vec![
            "requested",
            "target_edges",
            "target_nodes",
            "budget",
            "updates",
            "seconds",
        ],
    )?;
    for row in &rows {
        r.row(
            "timing",
            row,
            vec![
                row.requested_edges.to_string(),
                row.target_edges.to_string(),
                row.target_nodes.to_string(),
                row.budget.to_string(),
                row.updates.to_string(),
                format!("{:.6}", row.seconds),
            ],
        )?;
    }
    if rows.len() >= 2 {
        let x: Vec<f64> = rows.iter().map(|r| r.target_edges as f64).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.seconds).collect();
        if let Ok(slope) = commhide::stats::log_log_slope(&x, &y) {
            if json {
                println!("{}", json!({"record": "fit", "log_log_slope": slope}));
            } else {
                r.finish()?;
                println!("log-log slope {slope:.3}");
                return Ok(());
            }
        }
    }
    r.finish()
}

fn cmd_hide_nodes(a: &HideNodesArgs, json: bool, exec: Exec) -> Result<()> {
    let ng = input::load_graph(&a.graph)?;
    let spec = NodeHidingSpec {
        detector: a.detector.built_in(a.seed)?,
        budget: match a.budget {
            Some(k) => NodeBudget::Fixed(k),
            None => NodeBudget::CommunityFraction(a.budget_frac),
        },
        target_fraction: a.target_frac,
        runs: a.runs,
        seed: a.seed,
    };
    let result = run_node_hiding(&ng.graph, &spec, exec)?;
    let mut r = Report::new(
        json,
        "hide-nodes",
        a,
        vec![
            "scope",
            "run",
            "node",
            "co_members",
            "still_together",
            "updates",
            "hidden",
        ],
    )?;
    if a.cells {
        for o in &result.outcomes {
            r.row(
                "node",
                &json!({
                    "run": o.run,
                    "node": ng.names.name(o.node),
                    "co_members": o.co_members,
                    "still_together": o.still_together,
                    "updates": o.updates,
                    "hidden": o.hidden,
                }),
                vec![
                    "node".into(),
                    o.run.to_string(),
                    ng.names.name(o.node).into(),
                    o.co_members.to_string(),
                    o.still_together.to_string(),
                    o.updates.to_string(),
                    o.hidden.to_string(),
                ],
            )?;
        }
    }
    let hidden = result.outcomes.iter().filter(|o| o.hidden).count();
    r.row(
        "score",
        &json!({"score": result.score, "targets": result.outcomes.len(), "hidden": hidden}),
        vec![
            format!("score {}", f(result.score)),
            "-".into(),
            format!("{} targets", result.outcomes.len()),
            "-".into(),
            "-".into(),
            "-".into(),
            hidden.to_string(),
        ],
    )?;
    r.finish()
}
