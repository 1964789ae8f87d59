//! Vertex permanence, network permanence and the permanence loss of edge updates.
//!
//! For a node `v` with internal degree `I`, maximum external pull `E`, degree
//! `d` and internal clustering coefficient `C`:
//!
//! ```text
//! perm(v) = I / (E * d) - (1 - C)
//! ```
//!
//! Degenerate cases are fixed by convention and used everywhere, both in exact
//! recomputation and in the closed-form scores:
//!
//! * `E = 1` when `v` has no external neighbors,
//! * `C = 0` when `v` has fewer than two internal neighbors,
//! * `perm(v) = 0` for isolated nodes.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{sorted_intersection_len, Graph, NodeId};
use crate::partition::{CommunityId, Partition};
use crate::update::EdgeUpdate;

/// Raw counts behind a node's permanence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) struct Pull {
    pub internal: usize,
    /// Largest neighbor count into one other community, 0 if none.
    pub external_max: usize,
    pub degree: usize,
    /// Edges among the internal neighbors.
    pub internal_links: usize,
}

fn pairs(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

impl Pull {
    pub fn e_max(&self) -> usize {
        self.external_max.max(1)
    }

    pub fn clustering(&self) -> f64 {
        if self.internal < 2 {
            0.0
        } else {
            self.internal_links as f64 / pairs(self.internal) as f64
        }
    }

    pub fn perm(&self) -> f64 {
        if self.degree == 0 {
            return 0.0;
        }
        self.internal as f64 / (self.e_max() * self.degree) as f64 - (1.0 - self.clustering())
    }

    /// Permanence drop when the node gains a neighbor in another community
    /// that already held `count_into` of its neighbors.
    pub fn external_gain_drop(&self, count_into: usize) -> f64 {
        let after = Pull {
            external_max: self.external_max.max(count_into + 1),
            degree: self.degree + 1,
            ..*self
        };
        self.perm() - after.perm()
    }

    /// Permanence drop when the node loses an internal neighbor that shared
    /// `shared` of its other internal neighbors.
    pub fn internal_loss_drop(&self, shared: usize) -> f64 {
        let after = Pull {
            internal: self.internal - 1,
            degree: self.degree - 1,
            internal_links: self.internal_links - shared,
            ..*self
        };
        self.perm() - after.perm()
    }
}

/// Permanence of one node together with the quantities that define it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermanenceTerms {
    /// Neighbors inside the node's own community.
    pub internal: usize,
    /// Maximum external pull after the `E = 1` convention.
    pub e_max: usize,
    pub degree: usize,
    /// Internal clustering coefficient.
    pub c_in: f64,
    pub perm: f64,
}

impl From<Pull> for PermanenceTerms {
    fn from(p: Pull) -> Self {
        Self {
            internal: p.internal,
            e_max: p.e_max(),
            degree: p.degree,
            c_in: p.clustering(),
            perm: p.perm(),
        }
    }
}

/// An edge whose presence is flipped before counting.
#[derive(Debug, Clone, Copy)]
struct Toggle {
    u: NodeId,
    v: NodeId,
    add: bool,
}

fn neighbors_with<'a>(g: &'a Graph, toggle: Option<Toggle>, x: NodeId) -> Cow<'a, [NodeId]> {
    let ns = g.neighbors(x);
    let Some(t) = toggle else {
        return Cow::Borrowed(ns);
    };
    let other = if x == t.u {
        t.v
    } else if x == t.v {
        t.u
    } else {
        return Cow::Borrowed(ns);
    };
    let mut owned = ns.to_vec();
    match (owned.binary_search(&other), t.add) {
        (Err(pos), true) => owned.insert(pos, other),
        (Ok(pos), false) => {
            owned.remove(pos);
        }
        _ => {}
    }
    Cow::Owned(owned)
}

fn local_pull(g: &Graph, p: &Partition, x: NodeId, toggle: Option<Toggle>) -> Pull {
    let own = p.label(x);
    let ns = neighbors_with(g, toggle, x);
    let mut ext: HashMap<CommunityId, usize> = HashMap::new();
    let mut internal_nbrs = Vec::new();
    for &y in ns.iter() {
        let c = p.label(y);
        if c == own {
            internal_nbrs.push(y);
        } else {
            *ext.entry(c).or_insert(0) += 1;
        }
    }
    let mut twice_links = 0;
    if internal_nbrs.len() >= 2 {
        for &y in &internal_nbrs {
            twice_links += sorted_intersection_len(&neighbors_with(g, toggle, y), &internal_nbrs);
        }
    }
    Pull {
        internal: internal_nbrs.len(),
        external_max: ext.values().copied().max().unwrap_or(0),
        degree: ns.len(),
        internal_links: twice_links / 2,
    }
}

pub(crate) fn pull_of(g: &Graph, p: &Partition, v: NodeId) -> Pull {
    local_pull(g, p, v, None)
}

pub fn permanence_of(g: &Graph, p: &Partition, v: NodeId) -> Result<PermanenceTerms> {
    if !g.contains(v) || v >= p.node_count() {
        return Err(Error::UnknownNode(v));
    }
    Ok(pull_of(g, p, v).into())
}

/// Mean node permanence.
pub fn network_permanence(g: &Graph, p: &Partition) -> Result<f64> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    p.check_universe(g)?;
    let total: f64 = (0..g.node_count()).map(|v| pull_of(g, p, v).perm()).sum();
    Ok(total / g.node_count() as f64)
}

/// Permanence change caused by one edge update, restricted to the nodes it can
/// touch.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub update: EdgeUpdate,
    pub affected_nodes: Vec<NodeId>,
    /// `perm_before - perm_after` per affected node.
    pub delta_per_node: BTreeMap<NodeId, f64>,
    /// `Perm(G) - Perm(G')`, i.e. the node deltas summed and divided by `|V|`.
    pub total_loss: f64,
}

/// Nodes whose permanence can change when the edge `(u, v)` flips: the
/// endpoints, plus their common neighbors when all three share a community
/// (only then does the edge sit among a third node's internal neighbors).
fn affected_by_flip(g: &Graph, p: &Partition, u: NodeId, v: NodeId) -> Vec<NodeId> {
    let mut nodes = vec![u.min(v), u.max(v)];
    let c = p.label(u);
    if p.label(v) == c {
        nodes.extend(g.common_neighbors(u, v).filter(|&w| p.label(w) == c));
    }
    nodes
}

fn flip_deltas(g: &Graph, p: &Partition, u: NodeId, v: NodeId) -> BTreeMap<NodeId, f64> {
    let toggle = Toggle {
        u,
        v,
        add: !g.has_edge(u, v),
    };
    affected_by_flip(g, p, u, v)
        .into_iter()
        .map(|x| {
            let before = local_pull(g, p, x, None).perm();
            let after = local_pull(g, p, x, Some(toggle)).perm();
            (x, before - after)
        })
        .collect()
}

/// Exact permanence loss of a legal update. The graph is not modified.
pub fn exact_loss(g: &Graph, p: &Partition, update: &EdgeUpdate) -> Result<LossReport> {
    p.check_universe(g)?;
    update.check_legal(g, p)?;
    let deltas = flip_deltas(g, p, update.u, update.v);
    let total_loss = deltas.values().sum::<f64>() / g.node_count() as f64;
    Ok(LossReport {
        update: update.with_loss(total_loss),
        affected_nodes: deltas.keys().copied().collect(),
        delta_per_node: deltas,
        total_loss,
    })
}

/// Loss of flipping the presence of `(u, v)` with no legality check on the
/// update class, so inter-community deletions and intra-community additions
/// can be probed too.
pub fn flip_loss(g: &Graph, p: &Partition, u: NodeId, v: NodeId) -> Result<f64> {
    p.check_universe(g)?;
    for x in [u, v] {
        if !g.contains(x) {
            return Err(Error::UnknownNode(x));
        }
    }
    if u == v {
        return Err(Error::SelfLoop(u));
    }
    let deltas = flip_deltas(g, p, u, v);
    Ok(deltas.values().sum::<f64>() / g.node_count() as f64)
}

/// Pull-term drop of one endpoint when an intra-community edge is deleted:
/// `(1/E) * (d - I) / (d * (d - 1))`. `None` for `d < 2`.
pub fn deletion_pull_drop(degree: usize, internal: usize, e_max: usize) -> Option<f64> {
    if degree < 2 {
        return None;
    }
    let d = degree as f64;
    Some((degree - internal) as f64 / (e_max as f64 * d * (d - 1.0)))
}

/// Pull-term drop of an endpoint gaining an inter-community neighbor.
///
/// With `raises_max` the new neighbor sits in the community of maximum external
/// pull, so `E` grows along with the degree: `I * [1/(E d) - 1/((E+1)(d+1))]`.
/// Otherwise only the degree grows: `(I/E) * [1/d - 1/(d+1)]`.
pub fn addition_pull_drop(internal: usize, e_max: usize, degree: usize, raises_max: bool) -> f64 {
    if degree == 0 {
        return 0.0;
    }
    let (i, e, d) = (internal as f64, e_max as f64, degree as f64);
    if raises_max {
        i * (1.0 / (e * d) - 1.0 / ((e + 1.0) * (d + 1.0)))
    } else {
        i / e * (1.0 / d - 1.0 / (d + 1.0))
    }
}

/// Closed-form ranking score for deleting the intra-community edge `(u, v)`:
/// the sum of both endpoints' pull-term drops.
pub fn score_intra_deletion(g: &Graph, p: &Partition, u: NodeId, v: NodeId) -> Result<f64> {
    EdgeUpdate::delete(u, v).check_legal(g, p)?;
    let mut score = 0.0;
    for x in [u, v] {
        let pull = pull_of(g, p, x);
        score += deletion_pull_drop(pull.degree, pull.internal, pull.e_max())
            .ok_or(Error::ExcludedCandidate("endpoint degree below 2"))?;
    }
    Ok(score)
}

/// Closed-form score of `u` gaining a neighbor in community `target`.
pub fn score_inter_addition(
    g: &Graph,
    p: &Partition,
    u: NodeId,
    target: CommunityId,
) -> Result<f64> {
    if !g.contains(u) {
        return Err(Error::UnknownNode(u));
    }
    p.check_community(target)?;
    if p.label(u) == target {
        return Err(Error::IllegalUpdate {
            u,
            v: u,
            reason: "target is the node's own community",
        });
    }
    let hist = p.neighbor_community_histogram(g, u)?;
    let pull = pull_of(g, p, u);
    let into = hist.get(&target).copied().unwrap_or(0);
    let raises = pull.external_max >= 1 && into == pull.external_max;
    Ok(addition_pull_drop(
        pull.internal,
        pull.e_max(),
        pull.degree,
        raises,
    ))
}
