//! Disjoint community labelling overlaid on a [`Graph`].

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

pub type CommunityId = usize;

type Edge = (NodeId, NodeId);

/// Total, disjoint assignment of nodes to communities `0..k`.
///
/// `members` is kept as the exact inverse of `labels`; member lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<CommunityId>,
    members: Vec<Vec<NodeId>>,
}

impl Partition {
    /// Compacts arbitrary raw labels to `0..k` in order of first appearance.
    pub fn from_labels<L: AsRef<[usize]>>(raw: L) -> Self {
        let raw = raw.as_ref();
        let mut remap: HashMap<usize, CommunityId> = HashMap::new();
        let mut labels = Vec::with_capacity(raw.len());
        let mut members: Vec<Vec<NodeId>> = Vec::new();
        for (v, &r) in raw.iter().enumerate() {
            let next = remap.len();
            let c = *remap.entry(r).or_insert(next);
            if c == members.len() {
                members.push(Vec::new());
            }
            members[c].push(v);
            labels.push(c);
        }
        Self { labels, members }
    }

    /// Every node in its own community.
    pub fn singletons(n: usize) -> Self {
        Self::from_labels((0..n).collect::<Vec<_>>())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn community_count(&self) -> usize {
        self.members.len()
    }

    pub fn label(&self, v: NodeId) -> CommunityId {
        self.labels[v]
    }

    pub fn labels(&self) -> &[CommunityId] {
        &self.labels
    }

    pub fn members(&self, c: CommunityId) -> &[NodeId] {
        &self.members[c]
    }

    pub fn communities(&self) -> impl Iterator<Item = &[NodeId]> {
        self.members.iter().map(Vec::as_slice)
    }

    pub fn contains_community(&self, c: CommunityId) -> bool {
        c < self.members.len()
    }

    pub fn check_community(&self, c: CommunityId) -> Result<()> {
        if self.contains_community(c) {
            Ok(())
        } else {
            Err(Error::UnknownCommunity(c))
        }
    }

    /// Errors unless the partition labels exactly the graph's nodes.
    pub fn check_universe(&self, g: &Graph) -> Result<()> {
        if self.node_count() == g.node_count() {
            Ok(())
        } else {
            Err(Error::UniverseMismatch {
                expected: g.node_count(),
                found: self.node_count(),
            })
        }
    }

    /// Largest community, smallest id on ties.
    pub fn largest(&self) -> Option<CommunityId> {
        (0..self.members.len()).max_by(|&a, &b| {
            self.members[a]
                .len()
                .cmp(&self.members[b].len())
                .then(b.cmp(&a))
        })
    }

    /// Same partition with `t` moved into a new singleton community.
    ///
    /// Returns the partition and the id of `t`'s community in it. If `t` is
    /// already alone the partition is returned unchanged.
    pub fn with_singleton(&self, t: NodeId) -> (Self, CommunityId) {
        let c = self.labels[t];
        if self.members[c].len() == 1 {
            return (self.clone(), c);
        }
        let mut raw: Vec<usize> = self.labels.clone();
        let fresh = self.members.len();
        raw[t] = fresh;
        let p = Self::from_labels(raw);
        let id = p.label(t);
        (p, id)
    }

    /// Intra-community edges of `c` (both ends in `c`) and inter-community edges
    /// (exactly one end in `c`), each as `(u, v)` with `u < v`.
    pub fn classify_edges(&self, g: &Graph, c: CommunityId) -> Result<(Vec<Edge>, Vec<Edge>)> {
        self.check_community(c)?;
        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for &u in &self.members[c] {
            for &v in g.neighbors(u) {
                if self.labels[v] == c {
                    if u < v {
                        intra.push((u, v));
                    }
                } else {
                    inter.push((u.min(v), u.max(v)));
                }
            }
        }
        intra.sort_unstable();
        inter.sort_unstable();
        Ok((intra, inter))
    }

    /// Neighbor counts of `v` per community, own community included.
    pub fn neighbor_community_histogram(
        &self,
        g: &Graph,
        v: NodeId,
    ) -> Result<BTreeMap<CommunityId, usize>> {
        if !g.contains(v) {
            return Err(Error::UnknownNode(v));
        }
        let mut hist = BTreeMap::new();
        for &w in g.neighbors(v) {
            *hist.entry(self.labels[w]).or_insert(0) += 1;
        }
        Ok(hist)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two triangles {0,1,2} and a path {3,4,5} joined by (2,3).
    fn g6() -> (Graph, Partition) {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (2, 3)]).unwrap();
        (g, Partition::from_labels([0, 0, 0, 1, 1, 1]))
    }

    #[test]
    fn classify_g6() {
        let (g, p) = g6();
        let (intra, inter) = p.classify_edges(&g, 0).unwrap();
        assert_eq!(intra, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(inter, vec![(2, 3)]);
        assert_eq!(p.classify_edges(&g, 5), Err(Error::UnknownCommunity(5)));
    }

    #[test]
    fn classify_degenerate_partitions() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let one = Partition::from_labels([7, 7, 7, 7]);
        assert!(one.classify_edges(&g, 0).unwrap().1.is_empty());
        let sides = Partition::from_labels([0, 1, 0, 1]);
        assert!(sides.classify_edges(&g, 0).unwrap().0.is_empty());
        assert!(sides.classify_edges(&g, 1).unwrap().0.is_empty());
    }

    #[test]
    fn histogram_g6() {
        let (g, p) = g6();
        let h = p.neighbor_community_histogram(&g, 2).unwrap();
        assert_eq!(h, BTreeMap::from([(0, 2), (1, 1)]));
        let iso = Graph::new(2);
        assert!(Partition::singletons(2)
            .neighbor_community_histogram(&iso, 0)
            .unwrap()
            .is_empty());
        let k4 = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let h = Partition::from_labels([0; 4])
            .neighbor_community_histogram(&k4, 0)
            .unwrap();
        assert_eq!(h, BTreeMap::from([(0, 3)]));
    }

    #[test]
    fn from_labels_compacts_in_first_appearance_order() {
        let p = Partition::from_labels([9, 4, 9, 2]);
        assert_eq!(p.labels(), &[0, 1, 0, 2]);
        assert_eq!(p.members(0), &[0, 2]);
        assert_eq!(p.largest(), Some(0));
    }

    #[test]
    fn singleton_split() {
        let (_, p) = g6();
        let (q, c) = p.with_singleton(4);
        assert_eq!(q.members(c), &[4]);
        assert_eq!(q.community_count(), 3);
        assert_eq!(q.members(q.label(3)), &[3, 5]);
        let (r, c2) = q.with_singleton(4);
        assert_eq!((r, c2), (q, c));
    }

    fn random_instance() -> impl Strategy<Value = (Graph, Partition)> {
        (3usize..15).prop_flat_map(|n| {
            (
                prop::collection::vec((0..n, 0..n), 0..40),
                prop::collection::vec(0usize..4, n),
            )
                .prop_map(move |(es, labels)| {
                    let mut g = Graph::new(n);
                    for (u, v) in es {
                        let _ = g.add_edge(u, v);
                    }
                    (g, Partition::from_labels(labels))
                })
        })
    }

    proptest! {
        #[test]
        fn edge_classification_accounts_for_every_edge((g, p) in random_instance()) {
            let mut intra = 0;
            let mut inter = 0;
            for c in 0..p.community_count() {
                let (a, b) = p.classify_edges(&g, c).unwrap();
                intra += a.len();
                inter += b.len();
            }
            prop_assert_eq!(2 * intra + inter, 2 * g.edge_count());
        }

        #[test]
        fn histogram_sums_to_degree((g, p) in random_instance()) {
            for v in 0..g.node_count() {
                let h = p.neighbor_community_histogram(&g, v).unwrap();
                prop_assert_eq!(h.values().sum::<usize>(), g.degree(v));
            }
        }

        #[test]
        fn members_invert_labels((_g, p) in random_instance()) {
            let mut seen = 0;
            for c in 0..p.community_count() {
                prop_assert!(!p.members(c).is_empty());
                for &v in p.members(c) {
                    prop_assert_eq!(p.label(v), c);
                    seen += 1;
                }
            }
            prop_assert_eq!(seen, p.node_count());
        }
    }
}
