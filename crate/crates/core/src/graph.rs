//! Pairwise MRF topology: hidden nodes, their observation handles, and the
//! directed message slots inference iterates over.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Opaque reference to the observation `Y_s` paired with a hidden node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ObservationHandle(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    /// `(x, y, r)`
    Circle,
    /// `(x, y, alpha, w, h)`, attached to the circle.
    InnerLink,
    /// `(x, y, alpha, w, h)`, attached to an inner link.
    OuterLink,
    /// Any other real-valued node.
    Generic { dim: usize },
}

impl NodeKind {
    pub fn dim(self) -> usize {
        match self {
            NodeKind::Circle => 3,
            NodeKind::InnerLink | NodeKind::OuterLink => 5,
            NodeKind::Generic { dim } => dim,
        }
    }

    pub fn is_link(self) -> bool {
        matches!(self, NodeKind::InnerLink | NodeKind::OuterLink)
    }

    /// Per-coordinate flag: `true` for angles living on the circle.
    pub fn periodic_mask(self) -> Vec<bool> {
        let mut mask = vec![false; self.dim()];
        if self.is_link() {
            mask[2] = true;
        }
        mask
    }
}

/// A directed message slot `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub from: NodeId,
    pub to: NodeId,
}

impl Slot {
    pub fn new(from: NodeId, to: NodeId) -> Self {
        Slot { from, to }
    }

    pub fn reversed(self) -> Self {
        Slot {
            from: self.to,
            to: self.from,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GraphSpec {
    pub nodes: Vec<(NodeId, NodeKind)>,
    pub edges: Vec<(NodeId, NodeId)>,
}

#[derive(Debug, Clone)]
struct NodeEntry {
    kind: NodeKind,
    observation: ObservationHandle,
    neighbors: Vec<NodeId>,
}

/// Validated, immutable pairwise MRF.
#[derive(Debug, Clone)]
pub struct GraphTopology {
    nodes: BTreeMap<NodeId, NodeEntry>,
    edges: Vec<(NodeId, NodeId)>,
}

impl GraphTopology {
    /// Validates `spec` and builds the topology. Every node receives the
    /// default observation handle; see [`GraphTopology::with_observations`].
    pub fn build(spec: &GraphSpec) -> Result<Self> {
        let mut nodes = BTreeMap::new();
        for &(id, kind) in &spec.nodes {
            let entry = NodeEntry {
                kind,
                observation: ObservationHandle::default(),
                neighbors: Vec::new(),
            };
            if nodes.insert(id, entry).is_some() {
                return Err(Error::DuplicateNode(id));
            }
        }

        let mut seen = BTreeSet::new();
        let mut edges = Vec::with_capacity(spec.edges.len());
        for &(a, b) in &spec.edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            for id in [a, b] {
                if !nodes.contains_key(&id) {
                    return Err(Error::UnknownNode(id));
                }
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge(a, b));
            }
            edges.push(key);
        }
        edges.sort();

        for &(a, b) in &edges {
            nodes.get_mut(&a).unwrap().neighbors.push(b);
            nodes.get_mut(&b).unwrap().neighbors.push(a);
        }
        for entry in nodes.values_mut() {
            entry.neighbors.sort();
        }

        Ok(GraphTopology { nodes, edges })
    }

    pub fn with_observations(
        mut self,
        observations: impl IntoIterator<Item = (NodeId, ObservationHandle)>,
    ) -> Result<Self> {
        for (id, handle) in observations {
            self.nodes.get_mut(&id).ok_or(Error::UnknownNode(id))?.observation = handle;
        }
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node ids in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn kind(&self, id: NodeId) -> Result<NodeKind> {
        self.entry(id).map(|e| e.kind)
    }

    pub fn dim(&self, id: NodeId) -> Result<usize> {
        self.kind(id).map(NodeKind::dim)
    }

    pub fn observation(&self, id: NodeId) -> Result<ObservationHandle> {
        self.entry(id).map(|e| e.observation)
    }

    /// Neighbors of `t` in ascending id order.
    pub fn neighbors(&self, t: NodeId) -> Result<&[NodeId]> {
        self.entry(t).map(|e| e.neighbors.as_slice())
    }

    pub fn degree(&self, t: NodeId) -> Result<usize> {
        self.neighbors(t).map(<[NodeId]>::len)
    }

    pub fn is_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.nodes
            .get(&a)
            .is_some_and(|e| e.neighbors.binary_search(&b).is_ok())
    }

    /// Both orientations of every edge, sorted by `(from, to)`.
    pub fn slots(&self) -> Vec<Slot> {
        let mut slots: Vec<Slot> = self
            .edges
            .iter()
            .flat_map(|&(a, b)| [Slot::new(a, b), Slot::new(b, a)])
            .collect();
        slots.sort();
        slots
    }

    /// Slots `u -> t` for every `u` in `neighbors(t) \ {s}`.
    pub fn incoming_slots_excluding(&self, t: NodeId, s: NodeId) -> Result<Vec<Slot>> {
        let neighbors = self.neighbors(t)?;
        if !self.contains(s) {
            return Err(Error::UnknownNode(s));
        }
        if neighbors.binary_search(&s).is_err() {
            return Err(Error::NotAdjacent(s, t));
        }
        Ok(neighbors
            .iter()
            .filter(|&&u| u != s)
            .map(|&u| Slot::new(u, t))
            .collect())
    }

    /// Slots `t -> s` for every neighbor `t` of `s`.
    pub fn incoming_slots(&self, s: NodeId) -> Result<Vec<Slot>> {
        Ok(self.neighbors(s)?.iter().map(|&t| Slot::new(t, s)).collect())
    }

    fn entry(&self, id: NodeId) -> Result<&NodeEntry> {
        self.nodes.get(&id).ok_or(Error::UnknownNode(id))
    }
}

/// Node ids of the articulated pattern: the circle is `1`, inner links are
/// `2..=5`, and outer link `i + 4` hangs off inner link `i`.
pub mod pattern {
    use super::*;

    pub const CIRCLE: NodeId = NodeId(1);
    pub const INNER: [NodeId; 4] = [NodeId(2), NodeId(3), NodeId(4), NodeId(5)];
    pub const OUTER: [NodeId; 4] = [NodeId(6), NodeId(7), NodeId(8), NodeId(9)];

    pub fn spec() -> GraphSpec {
        let mut nodes = vec![(CIRCLE, NodeKind::Circle)];
        nodes.extend(INNER.iter().map(|&i| (i, NodeKind::InnerLink)));
        nodes.extend(OUTER.iter().map(|&j| (j, NodeKind::OuterLink)));
        let mut edges: Vec<_> = INNER.iter().map(|&i| (CIRCLE, i)).collect();
        edges.extend(INNER.iter().zip(OUTER).map(|(&i, j)| (i, j)));
        GraphSpec { nodes, edges }
    }

    pub fn graph() -> GraphTopology {
        GraphTopology::build(&spec()).expect("pattern graph is valid")
    }

    /// Outer link attached to inner link `inner`.
    pub fn outer_of(inner: NodeId) -> NodeId {
        NodeId(inner.0 + 4)
    }
}
