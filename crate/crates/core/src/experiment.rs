//! End-to-end experiment protocol: detect, deceive, re-detect, score.
//!
//! Run `r` uses seed `derive_seed(seed, [r])` for both detections, so an
//! unchanged graph is re-detected identically. Independent (run, target)
//! cells are evaluated through [`Exec`]; aggregation is sequential and in
//! cell order, so results do not depend on the thread count.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, BaselineKind};
use crate::detect::{detect, DetectorConfig};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::metrics::{score, Neighborhood, Scores};
use crate::neural;
use crate::par::Exec;
use crate::partition::{CommunityId, Partition};
use crate::plan::{fraction_of, Budget, UpdatePlan};
use crate::rng::{derive_seed, seeded};
use crate::stats::mean;
use crate::synth::{generate, SynthParams};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Neural,
    Baseline(BaselineKind),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Neural => "neural",
            Method::Baseline(b) => b.name(),
        }
    }

    pub fn deceive(
        self,
        g: &Graph,
        p: &Partition,
        target: CommunityId,
        budget: Budget,
        seed: u64,
        exec: Exec,
    ) -> Result<(Graph, UpdatePlan)> {
        match self {
            Method::Neural => neural::deceive_with(g, p, target, budget, exec),
            Method::Baseline(kind) => baselines::deceive(kind, g, p, target, budget, seed),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "neural" {
            Ok(Method::Neural)
        } else {
            s.parse().map(Method::Baseline)
        }
    }
}

/// Budget as a fraction of the target community's size, optionally split
/// between additions and deletions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetSpec {
    pub fraction: f64,
    pub split: Option<(f64, f64)>,
}

impl BudgetSpec {
    pub fn uniform(fraction: f64) -> Self {
        Self {
            fraction,
            split: None,
        }
    }

    pub fn for_size(&self, size: usize) -> Result<Budget> {
        let budget = Budget::from_fraction(self.fraction, size)?;
        match self.split {
            Some((add, del)) => budget.with_split_fractions(add, del),
            None => Ok(budget),
        }
    }
}

impl Default for BudgetSpec {
    fn default() -> Self {
        Self::uniform(0.3)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetSelector {
    Community(CommunityId),
    Largest,
    EachInTurn,
    /// This many distinct communities drawn uniformly per run.
    Sample(usize),
}

impl TargetSelector {
    pub fn resolve(&self, p: &Partition, seed: u64) -> Result<Vec<CommunityId>> {
        match *self {
            TargetSelector::Community(c) => {
                p.check_community(c)?;
                Ok(vec![c])
            }
            TargetSelector::Largest => Ok(p.largest().into_iter().collect()),
            TargetSelector::EachInTurn => Ok((0..p.community_count()).collect()),
            TargetSelector::Sample(k) => {
                let k = k.min(p.community_count());
                let mut picked = sample(&mut seeded(seed), p.community_count(), k).into_vec();
                picked.sort_unstable();
                Ok(picked)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub detector: DetectorConfig,
    pub method: Method,
    pub budget: BudgetSpec,
    pub targets: TargetSelector,
    pub runs: usize,
    pub seed: u64,
    pub neighborhood: Neighborhood,
}

impl Protocol {
    /// Every community in turn, 10 runs, Louvain, budget `ceil(0.3 |V_C|)`.
    pub fn standard(method: Method, seed: u64) -> Self {
        Self {
            detector: DetectorConfig::louvain(seed),
            method,
            budget: BudgetSpec::default(),
            targets: TargetSelector::EachInTurn,
            runs: 10,
            seed,
            neighborhood: Neighborhood::Original,
        }
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        derive_seed(self.seed, &[run as u64])
    }
}

/// Outcome of hiding one target in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub run: usize,
    pub target: CommunityId,
    pub target_size: usize,
    pub run_seed: u64,
    pub budget: Budget,
    pub updates: usize,
    pub additions: usize,
    pub deletions: usize,
    pub terminated_early: bool,
    pub permanence_loss: f64,
    pub scores: Scores,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanScores {
    pub nmi: f64,
    pub mnmi: f64,
    pub comm_splits: f64,
    pub comm_uniformity: f64,
    pub cells: usize,
}

impl MeanScores {
    pub fn of(cells: &[Cell]) -> Self {
        let pick =
            |f: fn(&Scores) -> f64| mean(&cells.iter().map(|c| f(&c.scores)).collect::<Vec<_>>());
        Self {
            nmi: pick(|s| s.nmi),
            mnmi: pick(|s| s.mnmi),
            comm_splits: pick(|s| s.comm_splits as f64),
            comm_uniformity: pick(|s| s.comm_uniformity),
            cells: cells.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub version: String,
    pub protocol: Protocol,
    pub cells: Vec<Cell>,
    pub mean: MeanScores,
}

/// Runs the protocol on one graph.
pub fn run_protocol(g: &Graph, proto: &Protocol, exec: Exec) -> Result<ProtocolResult> {
    if proto.runs == 0 {
        return Err(Error::InvalidParameters("runs must be at least 1".into()));
    }
    let detections = exec.map((0..proto.runs).collect(), |run| {
        detect(g, &proto.detector.with_seed(proto.run_seed(run)))
    });
    let mut jobs = Vec::new();
    for (run, detected) in detections.into_iter().enumerate() {
        let p = detected?;
        let targets = proto
            .targets
            .resolve(&p, derive_seed(proto.run_seed(run), &[0]))?;
        let p = std::sync::Arc::new(p);
        for t in targets {
            jobs.push((run, t, p.clone()));
        }
    }
    let cells: Result<Vec<Cell>> = exec
        .map(jobs, |(run, target, p)| run_cell(g, &p, proto, run, target))
        .into_iter()
        .collect();
    let cells = cells?;
    Ok(ProtocolResult {
        version: VERSION.to_owned(),
        protocol: proto.clone(),
        mean: MeanScores::of(&cells),
        cells,
    })
}

fn run_cell(
    g: &Graph,
    p: &Partition,
    proto: &Protocol,
    run: usize,
    target: CommunityId,
) -> Result<Cell> {
    let run_seed = proto.run_seed(run);
    let size = p.members(target).len();
    let budget = proto.budget.for_size(size)?;
    let method_seed = derive_seed(run_seed, &[1, target as u64]);
    let (rewired, plan) =
        proto
            .method
            .deceive(g, p, target, budget, method_seed, Exec::Sequential)?;
    let after = detect(&rewired, &proto.detector.with_seed(run_seed))?;
    let scores = score(g, &rewired, p, &after, target, proto.neighborhood)?;
    Ok(Cell {
        run,
        target,
        target_size: size,
        run_seed,
        budget,
        updates: plan.len(),
        additions: plan.additions(),
        deletions: plan.deletions(),
        terminated_early: plan.terminated_early,
        permanence_loss: plan.total_loss(),
        scores,
    })
}

/// Experiment axis swept by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    BudgetFraction,
    Mu,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "budget" | "budget-frac" | "budget-fraction" => Ok(Axis::BudgetFraction),
            "mu" => Ok(Axis::Mu),
            _ => Err(Error::InvalidParameters(format!("unknown sweep axis {s}"))),
        }
    }
}

/// Where sweep graphs come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Fixed(Graph),
    /// `instances` planted-partition graphs; instance `i` uses seed
    /// `derive_seed(params.seed, [i])`.
    Synthetic {
        params: SynthParams,
        instances: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: Axis,
    pub value: f64,
    pub mean: MeanScores,
    pub cells: Vec<Cell>,
}

/// Runs the protocol once per axis value and averages over every cell of
/// every graph instance.
pub fn sweep(
    source: &GraphSource,
    proto: &Protocol,
    axis: Axis,
    values: &[f64],
    exec: Exec,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut proto = proto.clone();
        let mut source = source.clone();
        match (axis, &mut source) {
            (Axis::BudgetFraction, _) => proto.budget.fraction = value,
            (Axis::Mu, GraphSource::Synthetic { params, .. }) => params.mu = value,
            (Axis::Mu, GraphSource::Fixed(_)) => {
                return Err(Error::InvalidParameters(
                    "the mu axis needs a synthetic graph source".into(),
                ))
            }
        }
        let mut cells = Vec::new();
        match &source {
            GraphSource::Fixed(g) => cells.extend(run_protocol(g, &proto, exec)?.cells),
            GraphSource::Synthetic { params, instances } => {
                for i in 0..*instances {
                    let params = SynthParams {
                        seed: derive_seed(params.seed, &[i as u64]),
                        ..*params
                    };
                    let (g, _) = generate(&params)?;
                    let mut instance = proto.clone();
                    instance.seed = derive_seed(proto.seed, &[i as u64]);
                    cells.extend(run_protocol(&g, &instance, exec)?.cells);
                }
            }
        }
        rows.push(SweepRow {
            axis,
            value,
            mean: MeanScores::of(&cells),
            cells,
        });
    }
    Ok(rows)
}

/// Budget for hiding a single node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NodeBudget {
    /// `ceil(frac * |V_C|)` for the node's original community `C`.
    CommunityFraction(f64),
    Fixed(usize),
}

impl NodeBudget {
    fn for_node(self, p: &Partition, t: NodeId) -> Budget {
        match self {
            NodeBudget::CommunityFraction(f) => {
                Budget::uniform(fraction_of(f, p.members(p.label(t)).len()))
            }
            NodeBudget::Fixed(k) => Budget::uniform(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeHidingSpec {
    pub detector: DetectorConfig,
    pub budget: NodeBudget,
    /// Targets per run: `ceil(target_fraction * |V|)` nodes drawn uniformly.
    pub target_fraction: f64,
    pub runs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeOutcome {
    pub run: usize,
    pub node: NodeId,
    pub co_members: usize,
    pub still_together: usize,
    pub updates: usize,
    pub hidden: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeHidingResult {
    pub version: String,
    pub spec: NodeHidingSpec,
    pub outcomes: Vec<NodeOutcome>,
    /// Fraction of targets hidden, averaged over runs.
    pub score: f64,
}

/// A node counts as hidden when, after re-detection, fewer than half of its
/// original co-members share its new community. A node that was alone is
/// never counted as hidden.
pub fn is_hidden(before: &Partition, after: &Partition, t: NodeId) -> (usize, usize, bool) {
    let co: Vec<NodeId> = before
        .members(before.label(t))
        .iter()
        .copied()
        .filter(|&u| u != t)
        .collect();
    let together = co
        .iter()
        .filter(|&&u| after.label(u) == after.label(t))
        .count();
    (
        co.len(),
        together,
        !co.is_empty() && 2 * together < co.len(),
    )
}

pub fn run_node_hiding(g: &Graph, spec: &NodeHidingSpec, exec: Exec) -> Result<NodeHidingResult> {
    if spec.runs == 0 || g.node_count() == 0 {
        return Err(Error::InvalidParameters(
            "node hiding needs runs and nodes".into(),
        ));
    }
    let count = fraction_of(spec.target_fraction, g.node_count()).min(g.node_count());
    let mut jobs = Vec::new();
    for run in 0..spec.runs {
        let run_seed = derive_seed(spec.seed, &[run as u64]);
        let p = std::sync::Arc::new(detect(g, &spec.detector.with_seed(run_seed))?);
        let mut nodes = sample(
            &mut seeded(derive_seed(run_seed, &[0])),
            g.node_count(),
            count,
        )
        .into_vec();
        nodes.sort_unstable();
        for t in nodes {
            jobs.push((run, run_seed, t, p.clone()));
        }
    }
    let outcomes: Result<Vec<NodeOutcome>> = exec
        .map(jobs, |(run, run_seed, t, p)| {
            let (rewired, plan) = neural::hide_node(g, &p, t, spec.budget.for_node(&p, t))?;
            let after = detect(&rewired, &spec.detector.with_seed(run_seed))?;
            let (co_members, still_together, hidden) = is_hidden(&p, &after, t);
            Ok(NodeOutcome {
                run,
                node: t,
                co_members,
                still_together,
                updates: plan.len(),
                hidden,
            })
        })
        .into_iter()
        .collect();
    let outcomes = outcomes?;
    let per_run: Vec<f64> = (0..spec.runs)
        .map(|r| {
            let mine: Vec<&NodeOutcome> = outcomes.iter().filter(|o| o.run == r).collect();
            mine.iter().filter(|o| o.hidden).count() as f64 / mine.len().max(1) as f64
        })
        .collect();
    Ok(NodeHidingResult {
        version: VERSION.to_owned(),
        spec: spec.clone(),
        score: mean(&per_run),
        outcomes,
    })
}

/// Planted-partition instance for timing runs: 10 communities, mixing 0.4,
/// mean degree 20, target community 0 with roughly `target_edges` incident
/// edges.
pub fn bench_instance(target_edges: usize, seed: u64) -> Result<(Graph, Partition)> {
    // A member has ~0.6 d internal and ~0.4 d external edges, so community
    // 0 touches ~s (0.3 d + 0.4 d) edges.
    let size = ((target_edges as f64 / (0.7 * 20.0)).round() as usize).max(22);
    generate(&SynthParams {
        n: 10 * size,
        k_comms: 10,
        mu: 0.4,
        avg_deg: 20.0,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub requested_edges: usize,
    pub target_nodes: usize,
    pub target_edges: usize,
    pub budget: usize,
    pub updates: usize,
    pub seconds: f64,
}

/// Median wall time of NEURAL's deceive (excluding generation) per size.
pub fn bench(sizes: &[usize], repeats: usize, seed: u64, exec: Exec) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &size in sizes {
        let (g, p) = bench_instance(size, derive_seed(seed, &[size as u64]))?;
        let (intra, inter) = p.classify_edges(&g, 0)?;
        let members = p.members(0).len();
        let budget = Budget::from_fraction(0.3, members)?;
        let mut times = Vec::with_capacity(repeats.max(1));
        let mut updates = 0;
        for _ in 0..repeats.max(1) {
            let start = Instant::now();
            let (_, plan) = neural::deceive_with(&g, &p, 0, budget, exec)?;
            times.push(start.elapsed().as_secs_f64());
            updates = plan.len();
        }
        times.sort_by(f64::total_cmp);
        rows.push(BenchRow {
            requested_edges: size,
            target_nodes: members,
            target_edges: intra.len() + inter.len(),
            budget: budget.beta,
            updates,
            seconds: times[times.len() / 2],
        });
    }
    Ok(rows)
}
