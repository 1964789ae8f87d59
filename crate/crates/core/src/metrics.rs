//! How well a community stays hidden after rewiring.
//!
//! All entropies use the natural logarithm.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::partition::{CommunityId, Partition};

/// Mutual information of two labelings normalized by the mean of their
/// entropies. Two single-community labelings score 1; otherwise a labeling of
/// zero entropy scores 0.
pub fn nmi(before: &Partition, after: &Partition) -> Result<f64> {
    if before.node_count() != after.node_count() {
        return Err(Error::UniverseMismatch {
            expected: before.node_count(),
            found: after.node_count(),
        });
    }
    let nodes: Vec<NodeId> = (0..before.node_count()).collect();
    nmi_over(before, after, &nodes)
}

/// [`nmi`] over the given nodes only.
pub fn nmi_over(before: &Partition, after: &Partition, nodes: &[NodeId]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptyGraph);
    }
    for &v in nodes {
        if v >= before.node_count() || v >= after.node_count() {
            return Err(Error::UnknownNode(v));
        }
    }
    let n = nodes.len() as f64;
    let mut joint: BTreeMap<(CommunityId, CommunityId), usize> = BTreeMap::new();
    let mut left: BTreeMap<CommunityId, usize> = BTreeMap::new();
    let mut right: BTreeMap<CommunityId, usize> = BTreeMap::new();
    for &v in nodes {
        let (a, b) = (before.label(v), after.label(v));
        *joint.entry((a, b)).or_insert(0) += 1;
        *left.entry(a).or_insert(0) += 1;
        *right.entry(b).or_insert(0) += 1;
    }
    let entropy = |counts: &BTreeMap<CommunityId, usize>| -> f64 {
        counts
            .values()
            .map(|&c| {
                let q = c as f64 / n;
                -q * q.ln()
            })
            .sum()
    };
    let (h1, h2) = (entropy(&left), entropy(&right));
    // Same partition up to relabeling, including two single communities.
    if joint.len() == left.len() && joint.len() == right.len() {
        return Ok(1.0);
    }
    if h1 + h2 == 0.0 {
        return Ok(0.0);
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(a, b), &c)| {
            let pab = c as f64 / n;
            let pa = left[&a] as f64 / n;
            let pb = right[&b] as f64 / n;
            pab * (pab / (pa * pb)).ln()
        })
        .sum();
    Ok((2.0 * mi / (h1 + h2)).clamp(0.0, 1.0))
}

/// Members of `target` plus their neighbors in `g`, sorted.
pub fn neighborhood(g: &Graph, p: &Partition, target: CommunityId) -> Result<Vec<NodeId>> {
    p.check_universe(g)?;
    p.check_community(target)?;
    let mut marked = vec![false; g.node_count()];
    for &v in p.members(target) {
        marked[v] = true;
        for &w in g.neighbors(v) {
            marked[w] = true;
        }
    }
    Ok((0..g.node_count()).filter(|&v| marked[v]).collect())
}

/// NMI restricted to the target community and its neighbors in `g`.
///
/// Pass the graph before rewiring to measure concealment of the original
/// local context, or the rewired graph for the alternative reading.
pub fn mnmi(before: &Partition, after: &Partition, g: &Graph, target: CommunityId) -> Result<f64> {
    if before.node_count() != after.node_count() {
        return Err(Error::UniverseMismatch {
            expected: before.node_count(),
            found: after.node_count(),
        });
    }
    let nodes = neighborhood(g, before, target)?;
    nmi_over(before, after, &nodes)
}

fn spread(after: &Partition, nodes: &[NodeId]) -> Vec<usize> {
    let mut counts: BTreeMap<CommunityId, usize> = BTreeMap::new();
    for &v in nodes {
        *counts.entry(after.label(v)).or_insert(0) += 1;
    }
    counts.into_values().collect()
}

/// Number of communities of `after` holding at least one of `nodes`.
pub fn comm_splits(after: &Partition, nodes: &[NodeId]) -> usize {
    spread(after, nodes).len()
}

/// Entropy of how `nodes` spread over the communities of `after`.
pub fn comm_uniformity(after: &Partition, nodes: &[NodeId]) -> f64 {
    let total = nodes.len() as f64;
    let counts = spread(after, nodes);
    if counts.len() <= 1 {
        return 0.0;
    }
    counts
        .into_iter()
        .map(|c| {
            let q = c as f64 / total;
            -q * q.ln()
        })
        .sum()
}

/// Which graph supplies the neighborhood for MNMI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Neighborhood {
    #[default]
    Original,
    Rewired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub method: String,
    pub seed: u64,
    pub budget: usize,
    pub detector: String,
    pub target: CommunityId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub nmi: f64,
    pub mnmi: f64,
    pub comm_splits: usize,
    pub comm_uniformity: f64,
    pub meta: ReportMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub nmi: f64,
    pub mnmi: f64,
    pub comm_splits: usize,
    pub comm_uniformity: f64,
}

/// All four scores for hiding `target` of `before`, whose re-detection on the
/// rewired graph gave `after`.
pub fn score(
    original: &Graph,
    rewired: &Graph,
    before: &Partition,
    after: &Partition,
    target: CommunityId,
    hood: Neighborhood,
) -> Result<Scores> {
    before.check_community(target)?;
    let g = match hood {
        Neighborhood::Original => original,
        Neighborhood::Rewired => rewired,
    };
    let members = before.members(target);
    Ok(Scores {
        nmi: nmi(before, after)?,
        mnmi: mnmi(before, after, g, target)?,
        comm_splits: comm_splits(after, members),
        comm_uniformity: comm_uniformity(after, members),
    })
}

impl Scores {
    pub fn report(self, meta: ReportMeta) -> EvaluationReport {
        EvaluationReport {
            nmi: self.nmi,
            mnmi: self.mnmi,
            comm_splits: self.comm_splits,
            comm_uniformity: self.comm_uniformity,
            meta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_partitions_score_one() {
        let p = Partition::from_labels([0, 0, 1, 1, 2]);
        let q = Partition::from_labels([5, 5, 3, 3, 9]);
        assert_eq!(nmi(&p, &q).unwrap(), 1.0);
    }

    #[test]
    fn single_community_conventions() {
        let one = Partition::from_labels([0; 4]);
        let two = Partition::from_labels([0, 0, 1, 1]);
        assert_eq!(nmi(&one, &two).unwrap(), 0.0);
        assert_eq!(nmi(&one, &one).unwrap(), 1.0);
    }

    #[test]
    fn crossed_halves_are_independent() {
        let a = Partition::from_labels([0, 0, 1, 1]);
        let b = Partition::from_labels([0, 1, 0, 1]);
        assert_eq!(nmi(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let a = Partition::from_labels([0, 0, 1]);
        let b = Partition::from_labels([0, 1]);
        assert!(matches!(nmi(&a, &b), Err(Error::UniverseMismatch { .. })));
    }

    #[test]
    fn splits_and_uniformity() {
        let after = Partition::from_labels([0, 0, 0, 1, 1, 2, 3]);
        let nodes = [0, 1, 2, 3, 4, 5];
        assert_eq!(comm_splits(&after, &nodes), 3);
        assert_eq!(comm_splits(&after, &[0, 1]), 1);
        assert_eq!(comm_uniformity(&after, &[0, 1, 2]), 0.0);
        let even = comm_uniformity(&after, &[0, 3, 5, 6]);
        assert!((even - 4f64.ln()).abs() < 1e-15);
        let lopsided = comm_uniformity(&after, &[0, 1, 2, 3]);
        let expect = -(0.75f64 * 0.75f64.ln()) - 0.25 * 0.25f64.ln();
        assert!((lopsided - expect).abs() < 1e-15);
    }

    #[test]
    fn mnmi_with_full_neighborhood_is_nmi() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let before = Partition::from_labels([0, 0, 1, 1]);
        let after = Partition::from_labels([0, 1, 1, 1]);
        // Nodes 0,1 plus neighbor 2 only; node 3 is outside.
        assert_eq!(neighborhood(&g, &before, 0).unwrap(), vec![0, 1, 2]);
        let full = Graph::from_edges(4, [(0, 1), (1, 2), (1, 3)]).unwrap();
        assert_eq!(
            mnmi(&before, &after, &full, 0).unwrap(),
            nmi(&before, &after).unwrap()
        );
    }
}
