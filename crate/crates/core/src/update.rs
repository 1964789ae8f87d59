use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UpdateKind {
    /// Add an absent edge between two communities.
    AddInter,
    /// Delete a present edge inside one community.
    DeleteIntra,
    /// Add an absent edge inside one community (random baseline only).
    AddIntra,
    /// Delete a present edge between two communities (random baseline only).
    DeleteInter,
}

impl UpdateKind {
    pub fn is_addition(self) -> bool {
        matches!(self, UpdateKind::AddInter | UpdateKind::AddIntra)
    }

    /// Kind of flipping `(u, v)` given whether it exists and whether both ends
    /// share a community.
    pub fn of_flip(present: bool, same_community: bool) -> Self {
        match (present, same_community) {
            (false, false) => UpdateKind::AddInter,
            (false, true) => UpdateKind::AddIntra,
            (true, true) => UpdateKind::DeleteIntra,
            (true, false) => UpdateKind::DeleteInter,
        }
    }
}

/// One rewiring step. `loss` is the network permanence loss of applying it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeUpdate {
    pub kind: UpdateKind,
    pub u: NodeId,
    pub v: NodeId,
    pub loss: f64,
}

impl EdgeUpdate {
    pub fn add(u: NodeId, v: NodeId) -> Self {
        Self {
            kind: UpdateKind::AddInter,
            u,
            v,
            loss: 0.0,
        }
    }

    pub fn delete(u: NodeId, v: NodeId) -> Self {
        Self {
            kind: UpdateKind::DeleteIntra,
            u,
            v,
            loss: 0.0,
        }
    }

    pub fn with_loss(mut self, loss: f64) -> Self {
        self.loss = loss;
        self
    }

    /// Endpoints with the smaller id first.
    pub fn key(&self) -> (NodeId, NodeId) {
        (self.u.min(self.v), self.u.max(self.v))
    }

    pub fn check_legal(&self, g: &Graph, p: &Partition) -> Result<()> {
        let (u, v) = (self.u, self.v);
        for x in [u, v] {
            if !g.contains(x) || x >= p.node_count() {
                return Err(Error::UnknownNode(x));
            }
        }
        let illegal = |reason| Err(Error::IllegalUpdate { u, v, reason });
        if u == v {
            return illegal("endpoints coincide");
        }
        let same = p.label(u) == p.label(v);
        let present = g.has_edge(u, v);
        if self.kind.is_addition() == present {
            return illegal(if present {
                "edge already present"
            } else {
                "edge absent"
            });
        }
        if UpdateKind::of_flip(present, same) != self.kind {
            return illegal("endpoints do not match the update class");
        }
        Ok(())
    }

    /// Applies the update to `g` without checking community labels.
    pub fn apply(&self, g: &mut Graph) -> Result<()> {
        if self.kind.is_addition() {
            g.add_edge(self.u, self.v)
        } else {
            g.delete_edge(self.u, self.v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legality() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        let p = Partition::from_labels([0, 0, 1, 1]);
        assert!(EdgeUpdate::delete(0, 1).check_legal(&g, &p).is_ok());
        assert!(EdgeUpdate::add(0, 3).check_legal(&g, &p).is_ok());
        assert!(EdgeUpdate::delete(1, 2).check_legal(&g, &p).is_err());
        assert!(EdgeUpdate::add(1, 2).check_legal(&g, &p).is_err());
        assert!(EdgeUpdate::add(2, 3).check_legal(&g, &p).is_err());
        assert!(EdgeUpdate::delete(2, 3).check_legal(&g, &p).is_err());
        let inter = EdgeUpdate {
            kind: UpdateKind::DeleteInter,
            ..EdgeUpdate::delete(1, 2)
        };
        assert!(inter.check_legal(&g, &p).is_ok());
        assert_eq!(
            EdgeUpdate::add(0, 9).check_legal(&g, &p),
            Err(Error::UnknownNode(9))
        );
    }
}
