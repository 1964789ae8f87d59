//! Comparison deceptors: Random, DICE and centrality-ranked edge addition.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::centrality;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::partition::{CommunityId, Partition};
use crate::permanence::flip_loss;
use crate::plan::{Budget, BudgetTracker, UpdatePlan};
use crate::rng::{seeded, Rng};
use crate::update::{EdgeUpdate, UpdateKind};

/// Consecutive failed draws after which a randomized baseline gives up.
pub const MAX_RETRIES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineKind {
    Random,
    Dice,
    NagarajaDegree,
    NagarajaEigen,
    NagarajaRandom,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 5] = [
        BaselineKind::Random,
        BaselineKind::Dice,
        BaselineKind::NagarajaDegree,
        BaselineKind::NagarajaEigen,
        BaselineKind::NagarajaRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Random => "random",
            BaselineKind::Dice => "dice",
            BaselineKind::NagarajaDegree => "nagaraja-degree",
            BaselineKind::NagarajaEigen => "nagaraja-eigen",
            BaselineKind::NagarajaRandom => "nagaraja-random",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameters(format!("unknown baseline {s}")))
    }
}

/// Centrality used to rank endpoints in the Nagaraja baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralityKind {
    Degree,
    Eigenvector,
    Random,
}

pub fn deceive(
    kind: BaselineKind,
    g: &Graph,
    p: &Partition,
    target: CommunityId,
    budget: Budget,
    seed: u64,
) -> Result<(Graph, UpdatePlan)> {
    match kind {
        BaselineKind::Random => random_deceive(g, p, target, budget, seed),
        BaselineKind::Dice => dice_deceive(g, p, target, budget, seed),
        BaselineKind::NagarajaDegree => {
            nagaraja_deceive(g, p, target, budget, CentralityKind::Degree, seed)
        }
        BaselineKind::NagarajaEigen => {
            nagaraja_deceive(g, p, target, budget, CentralityKind::Eigenvector, seed)
        }
        BaselineKind::NagarajaRandom => {
            nagaraja_deceive(g, p, target, budget, CentralityKind::Random, seed)
        }
    }
}

/// Node split around the target community.
struct Sides {
    inside: Vec<NodeId>,
    outside: Vec<NodeId>,
}

impl Sides {
    fn new(p: &Partition, target: CommunityId) -> Self {
        let (inside, outside) = (0..p.node_count()).partition(|&v| p.label(v) == target);
        Self { inside, outside }
    }
}

/// Drives a baseline: `pick` proposes the next edge to flip, or `None` to stop.
/// Each applied flip is recorded with its exact permanence loss.
fn drive<F>(
    g: &Graph,
    p: &Partition,
    target: CommunityId,
    budget: Budget,
    mut pick: F,
) -> Result<(Graph, UpdatePlan)>
where
    F: FnMut(&Graph, &BudgetTracker) -> Option<(NodeId, NodeId)>,
{
    p.check_universe(g)?;
    p.check_community(target)?;
    let mut graph = g.clone();
    let mut plan = UpdatePlan::default();
    let mut tracker = budget.tracker();
    while !tracker.exhausted() {
        let Some((u, v)) = pick(&graph, &tracker) else {
            plan.terminated_early = true;
            break;
        };
        let kind = UpdateKind::of_flip(graph.has_edge(u, v), p.label(u) == p.label(v));
        let loss = flip_loss(&graph, p, u, v)?;
        let update = EdgeUpdate { kind, u, v, loss };
        update.apply(&mut graph)?;
        tracker.consume(kind);
        plan.push(update);
    }
    Ok((graph, plan))
}

fn unordered(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    (u.min(v), u.max(v))
}

/// Draws an unordered pair of distinct members of `nodes`.
fn draw_inner_pair(rng: &mut Rng, nodes: &[NodeId]) -> (NodeId, NodeId) {
    let i = rng.random_range(0..nodes.len());
    let mut j = rng.random_range(0..nodes.len() - 1);
    if j >= i {
        j += 1;
    }
    unordered(nodes[i], nodes[j])
}

/// Edges of `g` with at least one endpoint in `inside`.
fn incident_edges(
    g: &Graph,
    p: &Partition,
    target: CommunityId,
    inside: &[NodeId],
) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for &u in inside {
        for &v in g.neighbors(u) {
            if p.label(v) != target || u < v {
                edges.push(unordered(u, v));
            }
        }
    }
    edges
}

/// Each step flips a fair coin between adding a uniformly drawn absent pair
/// with an endpoint in the target and deleting a uniformly drawn edge with an
/// endpoint in the target. A draw that is impossible or lands on an existing
/// edge is retried.
pub fn random_deceive(
    g: &Graph,
    p: &Partition,
    target: CommunityId,
    budget: Budget,
    seed: u64,
) -> Result<(Graph, UpdatePlan)> {
    p.check_community(target)?;
    let sides = Sides::new(p, target);
    let mut rng = seeded(seed);
    let (k, rest) = (sides.inside.len(), sides.outside.len());
    let inner_pairs = k * k.saturating_sub(1) / 2;
    let pair_space = inner_pairs + k * rest;
    drive(g, p, target, budget, |graph, tracker| {
        for _ in 0..MAX_RETRIES {
            let add = rng.random_bool(0.5);
            if add && tracker.can_add() && pair_space > 0 {
                let r = rng.random_range(0..pair_space);
                let (u, v) = if r < inner_pairs {
                    draw_inner_pair(&mut rng, &sides.inside)
                } else {
                    let r = r - inner_pairs;
                    unordered(sides.inside[r / rest], sides.outside[r % rest])
                };
                if !graph.has_edge(u, v) {
                    return Some((u, v));
                }
            } else if !add && tracker.can_delete() {
                let edges = incident_edges(graph, p, target, &sides.inside);
                if !edges.is_empty() {
                    return Some(edges[rng.random_range(0..edges.len())]);
                }
            }
        }
        None
    })
}

/// As [`random_deceive`] restricted to inter-community additions at the
/// target and intra-community deletions inside it.
pub fn dice_deceive(
    g: &Graph,
    p: &Partition,
    target: CommunityId,
    budget: Budget,
    seed: u64,
) -> Result<(Graph, UpdatePlan)> {
    p.check_community(target)?;
    let sides = Sides::new(p, target);
    let mut rng = seeded(seed);
    drive(g, p, target, budget, |graph, tracker| {
        for _ in 0..MAX_RETRIES {
            let add = rng.random_bool(0.5);
            if add && tracker.can_add() && !sides.outside.is_empty() {
                let u = sides.inside[rng.random_range(0..sides.inside.len())];
                let v = sides.outside[rng.random_range(0..sides.outside.len())];
                if !graph.has_edge(u, v) {
                    return Some(unordered(u, v));
                }
            } else if !add && tracker.can_delete() {
                let intra: Vec<_> = incident_edges(graph, p, target, &sides.inside)
                    .into_iter()
                    .filter(|&(u, v)| p.label(u) == p.label(v))
                    .collect();
                if !intra.is_empty() {
                    return Some(intra[rng.random_range(0..intra.len())]);
                }
            }
        }
        None
    })
}

/// Additions only: each step links the highest-ranked target node that still
/// has an absent inter-community pair to the highest-ranked outside node it
/// is not yet adjacent to. Centrality is computed once on the input graph;
/// ties go to the smaller id.
pub fn nagaraja_deceive(
    g: &Graph,
    p: &Partition,
    target: CommunityId,
    budget: Budget,
    centrality: CentralityKind,
    seed: u64,
) -> Result<(Graph, UpdatePlan)> {
    p.check_universe(g)?;
    p.check_community(target)?;
    let score = match centrality {
        CentralityKind::Degree => centrality::degree(g),
        CentralityKind::Eigenvector => centrality::eigenvector(g),
        CentralityKind::Random => {
            let mut rng = seeded(seed);
            (0..g.node_count()).map(|_| rng.random::<f64>()).collect()
        }
    };
    let rank = |mut nodes: Vec<NodeId>| {
        nodes.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
        nodes
    };
    let sides = Sides::new(p, target);
    let inside = rank(sides.inside);
    let outside = rank(sides.outside);
    drive(g, p, target, budget, |graph, tracker| {
        if !tracker.can_add() {
            return None;
        }
        inside.iter().find_map(|&u| {
            outside
                .iter()
                .find(|&&v| !graph.has_edge(u, v))
                .map(|&v| unordered(u, v))
        })
    })
}
