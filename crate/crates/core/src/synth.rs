//! Planted-partition graphs with equal-sized communities.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::partition::Partition;
use crate::rng::{seeded, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n: usize,
    pub k_comms: usize,
    /// Expected fraction of a node's edges that leave its community.
    pub mu: f64,
    pub avg_deg: f64,
    pub seed: u64,
}

impl SynthParams {
    /// Intra- and inter-community edge probabilities for community size
    /// `s = n / k`: `p_in = (1 - mu) * d / (s - 1)`, `p_out = mu * d / (n - s)`.
    pub fn probabilities(&self) -> Result<(f64, f64)> {
        let bad = |why: &str| Err(Error::InvalidParameters(format!("{why}: {self:?}")));
        if self.k_comms == 0 || self.n < 2 * self.k_comms {
            return bad("need at least two nodes per community");
        }
        if !(0.0..=1.0).contains(&self.mu) || !(self.avg_deg >= 0.0 && self.avg_deg.is_finite()) {
            return bad("mu must lie in [0, 1] and avg_deg be non-negative");
        }
        let n = self.n as f64;
        let s = n / self.k_comms as f64;
        let p_in = (1.0 - self.mu) * self.avg_deg / (s - 1.0);
        let p_out = if self.k_comms == 1 {
            if self.mu > 0.0 {
                return bad("a single community has no external edges");
            }
            0.0
        } else {
            self.mu * self.avg_deg / (n - s)
        };
        if p_in > 1.0 || p_out > 1.0 {
            return bad("derived edge probability exceeds 1");
        }
        Ok((p_in, p_out))
    }
}

/// Gap to the next success in a run of Bernoulli(`p`) trials.
fn skip(rng: &mut Rng, p: f64) -> usize {
    if p >= 1.0 {
        return 0;
    }
    let r: f64 = rng.random();
    ((1.0 - r).ln() / (1.0 - p).ln()).floor().min(1e15) as usize
}

/// Each pair inside `block` independently with probability `p`.
fn sample_within(rng: &mut Rng, block: &[NodeId], p: f64, edges: &mut Vec<(NodeId, NodeId)>) {
    if p <= 0.0 {
        return;
    }
    let s = block.len();
    // Pairs (v, w) with w < v in row-major order; w carries over row ends.
    let (mut v, mut w) = (1usize, -1isize);
    while v < s {
        w += 1 + skip(rng, p) as isize;
        while w >= v as isize && v < s {
            w -= v as isize;
            v += 1;
        }
        if v < s {
            edges.push((block[w as usize], block[v]));
        }
    }
}

/// Each pair across `a` x `b` independently with probability `p`.
fn sample_between(
    rng: &mut Rng,
    a: &[NodeId],
    b: &[NodeId],
    p: f64,
    edges: &mut Vec<(NodeId, NodeId)>,
) {
    if p <= 0.0 {
        return;
    }
    let total = a.len() * b.len();
    let mut t = skip(rng, p);
    while t < total {
        edges.push((a[t / b.len()], b[t % b.len()]));
        t += 1 + skip(rng, p);
    }
}

/// Graph and ground-truth partition. Community sizes differ by at most one,
/// larger communities first.
pub fn generate(params: &SynthParams) -> Result<(Graph, Partition)> {
    let (p_in, p_out) = params.probabilities()?;
    let (n, k) = (params.n, params.k_comms);
    let mut blocks: Vec<Vec<NodeId>> = Vec::with_capacity(k);
    let mut labels = Vec::with_capacity(n);
    let mut next = 0;
    for c in 0..k {
        let size = n / k + usize::from(c < n % k);
        blocks.push((next..next + size).collect());
        labels.extend(std::iter::repeat_n(c, size));
        next += size;
    }
    let mut rng = seeded(params.seed);
    let mut edges = Vec::new();
    for (i, a) in blocks.iter().enumerate() {
        sample_within(&mut rng, a, p_in, &mut edges);
        for b in &blocks[i + 1..] {
            sample_between(&mut rng, a, b, p_out, &mut edges);
        }
    }
    Ok((Graph::from_edges(n, edges)?, Partition::from_labels(labels)))
}

/// Mean over non-isolated nodes of the fraction of their neighbors outside
/// their own community.
pub fn external_fraction(g: &Graph, p: &Partition) -> f64 {
    let mut sum = 0.0;
    let mut counted = 0;
    for v in 0..g.node_count() {
        let d = g.degree(v);
        if d == 0 {
            continue;
        }
        let out = g
            .neighbors(v)
            .iter()
            .filter(|&&w| p.label(w) != p.label(v))
            .count();
        sum += out as f64 / d as f64;
        counted += 1;
    }
    if counted == 0 {
        0.0
    } else {
        sum / counted as f64
    }
}

pub fn mean_degree(g: &Graph) -> f64 {
    if g.node_count() == 0 {
        return 0.0;
    }
    2.0 * g.edge_count() as f64 / g.node_count() as f64
}
