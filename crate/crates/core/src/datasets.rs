//! Small reference networks bundled with the crate.

use crate::graph::Graph;
use crate::io::{read_edge_list_in, NodeNames};

const KARATE: &str = include_str!("../data/karate.edges");

/// Zachary's karate club: 34 members, 78 friendships, nodes `0..34`.
pub fn karate() -> Graph {
    read_edge_list_in(KARATE.as_bytes(), &NodeNames::numeric(34))
        .expect("bundled karate edge list parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn karate_shape() {
        let g = karate();
        assert_eq!((g.node_count(), g.edge_count()), (34, 78));
        assert_eq!(g.degree(0), 16);
        assert_eq!(g.degree(33), 17);
    }
}
