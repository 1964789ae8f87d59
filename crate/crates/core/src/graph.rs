//! Undirected simple graph over dense node ids.
//!
//! Neighbor lists are kept sorted so membership tests are a binary search and
//! common-neighbor counts are a linear merge.

use crate::error::{Error, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `n` isolated nodes.
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge list. Self-loops and repeated edges are errors.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut g = Self::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.adj.len()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        if !self.contains(u) || !self.contains(v) {
            return false;
        }
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].binary_search(&b).is_ok()
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownNode(v))
        }
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let pos_u = match self.adj[u].binary_search(&v) {
            Ok(_) => return Err(Error::DuplicateEdge(u, v)),
            Err(pos) => pos,
        };
        let pos_v = self.adj[v]
            .binary_search(&u)
            .expect_err("adjacency must be symmetric");
        self.adj[u].insert(pos_u, v);
        self.adj[v].insert(pos_v, u);
        self.edge_count += 1;
        Ok(())
    }

    pub fn delete_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        let pos_u = self.adj[u]
            .binary_search(&v)
            .map_err(|_| Error::MissingEdge(u, v))?;
        let pos_v = self.adj[v]
            .binary_search(&u)
            .expect("adjacency must be symmetric");
        self.adj[u].remove(pos_u);
        self.adj[v].remove(pos_v);
        self.edge_count -= 1;
        Ok(())
    }

    /// Every edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, ns)| {
            let start = ns.partition_point(|&v| v <= u);
            ns[start..].iter().map(move |&v| (u, v))
        })
    }

    /// Common neighbors of `u` and `v` in ascending order.
    pub fn common_neighbors(&self, u: NodeId, v: NodeId) -> CommonNeighbors<'_> {
        CommonNeighbors {
            a: &self.adj[u],
            b: &self.adj[v],
        }
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                i += 1;
                for &y in &self.adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Sorted-merge intersection of two neighbor lists.
pub struct CommonNeighbors<'a> {
    a: &'a [NodeId],
    b: &'a [NodeId],
}

impl Iterator for CommonNeighbors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        while let (Some(&x), Some(&y)) = (self.a.first(), self.b.first()) {
            if x < y {
                self.a = &self.a[1..];
            } else if y < x {
                self.b = &self.b[1..];
            } else {
                self.a = &self.a[1..];
                self.b = &self.b[1..];
                return Some(x);
            }
        }
        None
    }
}

/// Number of shared elements between two sorted slices.
pub(crate) fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    CommonNeighbors { a, b }.count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn add_edge_updates_degrees() {
        let mut g = Graph::new(3);
        g.add_edge(0, 1).unwrap();
        assert_eq!((g.degree(0), g.degree(1), g.degree(2)), (1, 1, 0));
        assert_eq!(g.add_edge(0, 1), Err(Error::DuplicateEdge(0, 1)));
        assert_eq!(g.add_edge(1, 0), Err(Error::DuplicateEdge(1, 0)));
    }

    #[test]
    fn rejects_bad_edges() {
        let mut g = triangle();
        assert_eq!(g.add_edge(0, 2), Err(Error::DuplicateEdge(0, 2)));
        assert_eq!(g.add_edge(1, 1), Err(Error::SelfLoop(1)));
        assert_eq!(g.add_edge(0, 7), Err(Error::UnknownNode(7)));
    }

    #[test]
    fn delete_edge_on_triangle() {
        let mut g = triangle();
        g.delete_edge(0, 1).unwrap();
        assert_eq!(g.degree(2), 2);
        assert!(!g.has_edge(1, 0));
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.delete_edge(0, 3), Err(Error::UnknownNode(3)));

        let mut g4 = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g4.delete_edge(0, 3), Err(Error::MissingEdge(0, 3)));
    }

    #[test]
    fn delete_then_readd_restores_graph() {
        let original = triangle();
        let mut g = original.clone();
        g.delete_edge(0, 1).unwrap();
        g.add_edge(0, 1).unwrap();
        assert_eq!(g, original);
    }

    #[test]
    fn edges_and_common_neighbors() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3), (1, 3)]).unwrap();
        let es: Vec<_> = g.edges().collect();
        assert_eq!(es, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        let cn: Vec<_> = g.common_neighbors(1, 2).collect();
        assert_eq!(cn, vec![0, 3]);
    }

    #[test]
    fn components_of_two_triangles() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    proptest! {
        #[test]
        fn symmetry_survives_interleaved_updates(ops in prop::collection::vec((0usize..12, 0usize..12, any::<bool>()), 0..200)) {
            let mut g = Graph::new(12);
            for (u, v, add) in ops {
                let _ = if add { g.add_edge(u, v) } else { g.delete_edge(u, v) };
            }
            let mut deg_sum = 0;
            for u in 0..12 {
                deg_sum += g.degree(u);
                prop_assert!(g.neighbors(u).windows(2).all(|w| w[0] < w[1]));
                for &v in g.neighbors(u) {
                    prop_assert!(v != u);
                    prop_assert!(g.neighbors(v).contains(&u));
                }
            }
            prop_assert_eq!(deg_sum, 2 * g.edge_count());
            prop_assert_eq!(g.edges().count(), g.edge_count());
        }
    }
}
