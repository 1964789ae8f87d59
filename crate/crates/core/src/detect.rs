//! Community detection: Louvain, asynchronous label propagation, and loading
//! partitions computed elsewhere.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::{read_partition, NamedGraph, NodeNames};
use crate::partition::Partition;
use crate::rng::seeded;

/// Smallest modularity gain that counts as an improvement.
pub const MIN_MODULARITY_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Algorithm {
    Louvain,
    LabelProp,
    /// Partition file in `node<TAB>community` form.
    External(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub resolution: f64,
    pub max_passes: usize,
}

impl DetectorConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        Self {
            algorithm,
            seed,
            resolution: 1.0,
            max_passes: 100,
        }
    }

    pub fn louvain(seed: u64) -> Self {
        Self::new(Algorithm::Louvain, seed)
    }

    pub fn label_prop(seed: u64) -> Self {
        Self::new(Algorithm::LabelProp, seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn name(&self) -> &'static str {
        match self.algorithm {
            Algorithm::Louvain => "louvain",
            Algorithm::LabelProp => "labelprop",
            Algorithm::External(_) => "external",
        }
    }
}

/// Detects communities on a graph whose nodes are named `"0"`, `"1"`, ...
pub fn detect(g: &Graph, cfg: &DetectorConfig) -> Result<Partition> {
    detect_named(&NamedGraph::numeric(g.clone()), cfg)
}

pub fn detect_named(ng: &NamedGraph, cfg: &DetectorConfig) -> Result<Partition> {
    detect_with_names(&ng.graph, &ng.names, cfg)
}

/// Detects communities on `g`, resolving external partition files through
/// `names`.
pub fn detect_with_names(g: &Graph, names: &NodeNames, cfg: &DetectorConfig) -> Result<Partition> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    match &cfg.algorithm {
        Algorithm::Louvain => Ok(louvain(g, cfg.resolution, cfg.max_passes, cfg.seed)),
        Algorithm::LabelProp => Ok(label_propagation(g, cfg.max_passes, cfg.seed).0),
        Algorithm::External(path) => {
            let file =
                File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let p = read_partition(BufReader::new(file), names)?;
            p.check_universe(g)?;
            Ok(p)
        }
    }
}

/// `Q = sum_C [ intra(C)/|E| - (vol(C) / 2|E|)^2 ]`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    p.check_universe(g)?;
    if g.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let m = g.edge_count() as f64;
    let k = p.community_count();
    let mut intra = vec![0usize; k];
    let mut volume = vec![0usize; k];
    for v in 0..g.node_count() {
        let c = p.label(v);
        volume[c] += g.degree(v);
        intra[c] += g.neighbors(v).iter().filter(|&&w| p.label(w) == c).count();
    }
    Ok((0..k)
        .map(|c| intra[c] as f64 / (2.0 * m) - (volume[c] as f64 / (2.0 * m)).powi(2))
        .sum())
}

/// Weighted graph for one Louvain level. Edge weight collapsed inside a node
/// lives in `self_loops`, not `adj`, and counts twice in `strength`.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    strength: Vec<f64>,
    total: f64,
}

impl Level {
    fn from_graph(g: &Graph) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = (0..g.node_count())
            .map(|v| g.neighbors(v).iter().map(|&w| (w, 1.0)).collect())
            .collect();
        let strength = adj.iter().map(|a| a.len() as f64).collect();
        Self {
            self_loops: vec![0.0; g.node_count()],
            adj,
            strength,
            total: 2.0 * g.edge_count() as f64,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn modularity(&self, community: &[usize], resolution: f64) -> f64 {
        let mut inside = vec![0.0; self.len()];
        let mut tot = vec![0.0; self.len()];
        for i in 0..self.len() {
            let c = community[i];
            tot[c] += self.strength[i];
            inside[c] += 2.0 * self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                if community[j] == c {
                    inside[c] += w;
                }
            }
        }
        (0..self.len())
            .map(|c| inside[c] / self.total - resolution * (tot[c] / self.total).powi(2))
            .sum()
    }

    /// Local-moving phase. Returns each node's community and whether any
    /// node moved.
    fn local_moves(
        &self,
        resolution: f64,
        max_sweeps: usize,
        rng: &mut crate::rng::Rng,
    ) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut community: Vec<usize> = (0..n).collect();
        let mut tot = self.strength.clone();
        let mut weight_to = vec![0.0; n];
        let mut listed = vec![false; n];
        let mut seen: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut moved_any = false;
        for _ in 0..max_sweeps {
            let mut moved = false;
            for &i in &order {
                let own = community[i];
                let k = self.strength[i];
                for &(j, w) in &self.adj[i] {
                    let c = community[j];
                    if !listed[c] {
                        listed[c] = true;
                        seen.push(c);
                    }
                    weight_to[c] += w;
                }
                tot[own] -= k;
                let gain = |c: usize, w: f64| w - resolution * tot[c] * k / self.total;
                let stay = gain(own, weight_to[own]);
                let mut best = own;
                let mut best_gain = stay;
                for &c in &seen {
                    let g = gain(c, weight_to[c]);
                    if g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                if best != own && 2.0 * (best_gain - stay) / self.total <= MIN_MODULARITY_GAIN {
                    best = own;
                }
                tot[best] += k;
                if best != own {
                    community[i] = best;
                    moved = true;
                }
                for c in seen.drain(..) {
                    weight_to[c] = 0.0;
                    listed[c] = false;
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        (community, moved_any)
    }

    /// Collapses communities into nodes; returns the coarse level and the
    /// dense index of each fine node's community.
    fn aggregate(&self, community: &[usize]) -> (Level, Vec<usize>) {
        let mut index = vec![usize::MAX; self.len()];
        let mut k = 0;
        let dense: Vec<usize> = community
            .iter()
            .map(|&c| {
                if index[c] == usize::MAX {
                    index[c] = k;
                    k += 1;
                }
                index[c]
            })
            .collect();
        let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        let mut self_loops = vec![0.0; k];
        let mut strength = vec![0.0; k];
        for i in 0..self.len() {
            let a = dense[i];
            strength[a] += self.strength[i];
            self_loops[a] += self.self_loops[i];
            for &(j, w) in &self.adj[i] {
                let b = dense[j];
                if a == b {
                    // Each internal edge is seen from both ends.
                    self_loops[a] += w / 2.0;
                } else {
                    *weights[a].entry(b).or_insert(0.0) += w;
                }
            }
        }
        let adj = weights
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        (
            Level {
                adj,
                self_loops,
                strength,
                total: self.total,
            },
            dense,
        )
    }
}

/// Multi-level Louvain modularity optimisation with a seeded node order.
///
/// A node moves to the first neighboring community (in adjacency order) of
/// maximal gain, and only when the modularity gain exceeds
/// [`MIN_MODULARITY_GAIN`]. Graphs without edges come back as singletons.
pub fn louvain(g: &Graph, resolution: f64, max_passes: usize, seed: u64) -> Partition {
    let n = g.node_count();
    if g.edge_count() == 0 {
        return Partition::singletons(n);
    }
    let mut rng = seeded(seed);
    let mut level = Level::from_graph(g);
    let mut membership: Vec<usize> = (0..n).collect();
    let mut last_q = level.modularity(&(0..n).collect::<Vec<_>>(), resolution);
    for _ in 0..max_passes {
        let (community, moved) = level.local_moves(resolution, max_passes, &mut rng);
        if !moved {
            break;
        }
        let q = level.modularity(&community, resolution);
        debug_assert!(q >= last_q - 1e-12, "modularity fell from {last_q} to {q}");
        last_q = q;
        let (coarse, dense) = level.aggregate(&community);
        for m in membership.iter_mut() {
            *m = dense[*m];
        }
        level = coarse;
    }
    Partition::from_labels(membership)
}

/// Asynchronous label propagation.
///
/// Each pass visits nodes in a fresh seeded order. A node keeps its label when
/// it is among the most frequent neighbor labels, otherwise it takes one of
/// them uniformly at random. Returns the partition and whether a pass without
/// changes was reached within `max_passes`.
pub fn label_propagation(g: &Graph, max_passes: usize, seed: u64) -> (Partition, bool) {
    let n = g.node_count();
    let mut rng = seeded(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut count = vec![0usize; n];
    let mut seen: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    let mut converged = false;
    for _ in 0..max_passes {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            if g.degree(v) == 0 {
                continue;
            }
            for &w in g.neighbors(v) {
                let l = labels[w];
                if count[l] == 0 {
                    seen.push(l);
                }
                count[l] += 1;
            }
            let best = seen.iter().map(|&l| count[l]).max().unwrap_or(0);
            if count[labels[v]] != best {
                let mut top: Vec<usize> =
                    seen.iter().copied().filter(|&l| count[l] == best).collect();
                top.sort_unstable();
                labels[v] = top[rng.random_range(0..top.len())];
                changed = true;
            }
            for l in seen.drain(..) {
                count[l] = 0;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    (Partition::from_labels(labels), converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::karate;

    fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    #[test]
    fn modularity_anchors() {
        let g = two_triangles();
        let p = Partition::from_labels([0, 0, 0, 1, 1, 1]);
        assert!((modularity(&g, &p).unwrap() - 0.5).abs() < 1e-15);
        assert!(
            modularity(&g, &Partition::from_labels([0; 6]))
                .unwrap()
                .abs()
                < 1e-15
        );
        assert_eq!(
            modularity(&Graph::new(3), &Partition::singletons(3)),
            Err(Error::NoEdges)
        );
        let k10 = complete(10);
        let p = Partition::from_labels([0, 1, 2, 0, 1, 2, 0, 1, 2, 0]);
        assert!(modularity(&k10, &p).unwrap() <= 0.0);
    }

    #[test]
    fn detectors_split_disjoint_triangles() {
        let g = two_triangles();
        let expect = Partition::from_labels([0, 0, 0, 1, 1, 1]);
        for seed in 0..5 {
            assert_eq!(detect(&g, &DetectorConfig::louvain(seed)).unwrap(), expect);
            assert_eq!(
                detect(&g, &DetectorConfig::label_prop(seed)).unwrap(),
                expect
            );
        }
    }

    #[test]
    fn complete_graph_is_one_community() {
        let g = complete(5);
        for seed in 0..5 {
            assert_eq!(
                detect(&g, &DetectorConfig::louvain(seed))
                    .unwrap()
                    .community_count(),
                1
            );
            assert_eq!(
                detect(&g, &DetectorConfig::label_prop(seed))
                    .unwrap()
                    .community_count(),
                1
            );
        }
    }

    #[test]
    fn karate_louvain_modularity() {
        let g = karate();
        for seed in 0..10 {
            let p = louvain(&g, 1.0, 100, seed);
            assert!(modularity(&g, &p).unwrap() >= 0.38, "seed {seed}");
        }
    }

    #[test]
    fn detection_is_seed_deterministic() {
        let g = karate();
        for cfg in [DetectorConfig::louvain(5), DetectorConfig::label_prop(5)] {
            assert_eq!(detect(&g, &cfg).unwrap(), detect(&g, &cfg).unwrap());
        }
    }

    #[test]
    fn label_propagation_fixed_point() {
        let g = karate();
        let (p, converged) = label_propagation(&g, 100, 3);
        assert!(converged);
        for v in 0..g.node_count() {
            let mut counts = std::collections::HashMap::new();
            for &w in g.neighbors(v) {
                *counts.entry(p.label(w)).or_insert(0) += 1;
            }
            let best = counts.values().copied().max().unwrap();
            assert_eq!(counts[&p.label(v)], best);
        }
    }

    #[test]
    fn external_partition_must_cover_graph() {
        let dir = std::env::temp_dir().join(format!("commhide-detect-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("part.tsv");
        std::fs::write(&path, "0\ta\n1\ta\n").unwrap();
        let cfg = DetectorConfig::new(Algorithm::External(path.clone()), 0);
        assert!(detect(&two_triangles(), &cfg).is_err());
        std::fs::write(&path, "0\ta\n1\ta\n2\ta\n3\tb\n4\tb\n5\tb\n").unwrap();
        assert_eq!(detect(&two_triangles(), &cfg).unwrap().community_count(), 2);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
