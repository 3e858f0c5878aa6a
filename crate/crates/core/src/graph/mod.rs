//! Anonymous port-labeled graphs.
//!
//! Nodes carry internal indices `0..n` so that the harness can address them,
//! but nothing in this module hands those indices to an agent program.

mod enumerate;
mod generators;
mod io;
mod qhat;
mod shrink;
mod view;

pub use enumerate::{enumerate_graphs, graph_count, GraphIter, DEFAULT_ENUMERATION_CAP};
pub use generators::{
    gen_complete_tree, gen_k2, gen_oriented_ring, gen_oriented_torus, gen_path, gen_sym_tree,
    RootedTree, SymTree,
};
pub use io::{
    from_json, from_json_str, to_dot, to_json, to_json_string, EdgeRecord, GraphFile, LoadError,
};
pub use qhat::{gen_qh, gen_qhat, z_set, Compass, QHat};
pub use shrink::{feasible, feasibility_threshold, shrink, shrink_oracle, Stic};
pub use view::{symmetric, view, view_classes, ViewClassTable, ViewTree};

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

pub type Node = usize;
pub type Port = usize;

/// The first broken invariant found by [`PortGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("node {node}: port {port} is listed twice or ports are not contiguous")]
    PortNumbering { node: Node, port: Port },
    #[error("node {node} port {port} points outside the graph")]
    DanglingPort { node: Node, port: Port },
    #[error("port map is not an involution at node {node} port {port}")]
    NotInvolution { node: Node, port: Port },
    #[error("self-loop at node {node} port {port}")]
    SelfLoop { node: Node, port: Port },
    #[error("multiple edges between nodes {u} and {v}")]
    MultiEdge { u: Node, v: Node },
    #[error("graph is not connected: node {node} unreachable from node 0")]
    Disconnected { node: Node },
    #[error("graph has no nodes")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(#[from] Violation),
    #[error("node {node} does not exist (n = {n})")]
    NodeOutOfRange { node: Node, n: usize },
    #[error("port {port} out of range at node {node} of degree {degree}")]
    PortOutOfRange { node: Node, port: Port, degree: usize },
    #[error("invalid generator parameter: {0}")]
    BadParameter(String),
}

/// A sequence of outgoing port numbers, applied verbatim at every step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortSeq(pub Vec<Port>);

impl PortSeq {
    pub fn new(ports: Vec<Port>) -> Self {
        PortSeq(ports)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &PortSeq) -> PortSeq {
        PortSeq(self.0.iter().chain(other.0.iter()).copied().collect())
    }
}

impl From<Vec<Port>> for PortSeq {
    fn from(v: Vec<Port>) -> Self {
        PortSeq(v)
    }
}

impl fmt::Display for PortSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// A walk produced by applying an exploration sequence, with the ports used
/// at every step so that it can be retraced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub nodes: Vec<Node>,
    /// `out_ports[i]` leaves `nodes[i]`.
    pub out_ports: Vec<Port>,
    /// `in_ports[i]` is the port at `nodes[i + 1]` through which it was entered.
    pub in_ports: Vec<Port>,
}

impl Walk {
    pub fn start(&self) -> Node {
        self.nodes[0]
    }

    pub fn end(&self) -> Node {
        *self.nodes.last().expect("walk has at least one node")
    }

    pub fn steps(&self) -> usize {
        self.out_ports.len()
    }
}

/// Anonymous simple connected graph with local port numbers.
///
/// `adj[u][p] = (v, q)` means port `p` at `u` and port `q` at `v` are the two
/// ends of one edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PortGraph {
    adj: Vec<Vec<(Node, Port)>>,
}

impl PortGraph {
    /// Builds a graph from its port map and checks every invariant.
    pub fn new(adj: Vec<Vec<(Node, Port)>>) -> Result<Self, GraphError> {
        let g = PortGraph { adj };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph without the simplicity and connectivity checks. The
    /// port map must still be an involution; this is used for degenerate
    /// members of generator families that are port-labeled multigraphs.
    pub(crate) fn new_unchecked(adj: Vec<Vec<(Node, Port)>>) -> Self {
        let g = PortGraph { adj };
        debug_assert!(g.check_involution().is_ok());
        g
    }

    /// Builds a graph from an edge list `(u, pu, v, pv)`.
    pub fn from_edges(n: usize, edges: &[(Node, Port, Node, Port)]) -> Result<Self, GraphError> {
        let mut slots: Vec<Vec<Option<(Node, Port)>>> = vec![Vec::new(); n];
        for &(u, pu, v, pv) in edges {
            for (a, pa, b, pb) in [(u, pu, v, pv), (v, pv, u, pu)] {
                if a >= n {
                    return Err(GraphError::NodeOutOfRange { node: a, n });
                }
                if b >= n {
                    return Err(Violation::DanglingPort { node: a, port: pa }.into());
                }
                let row = &mut slots[a];
                if row.len() <= pa {
                    row.resize(pa + 1, None);
                }
                if row[pa].is_some() {
                    return Err(Violation::PortNumbering { node: a, port: pa }.into());
                }
                row[pa] = Some((b, pb));
            }
        }
        let mut adj = Vec::with_capacity(n);
        for (node, row) in slots.into_iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (port, slot) in row.into_iter().enumerate() {
                out.push(slot.ok_or(Violation::PortNumbering { node, port })?);
            }
            adj.push(out);
        }
        PortGraph::new(adj)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: Node) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn nodes(&self) -> std::ops::Range<Node> {
        0..self.adj.len()
    }

    /// Each edge once, as `(u, pu, v, pv)` sorted by `(u, pu)` with `u <= v`.
    pub fn edges(&self) -> Vec<(Node, Port, Node, Port)> {
        let mut out = Vec::new();
        for (u, row) in self.adj.iter().enumerate() {
            for (pu, &(v, pv)) in row.iter().enumerate() {
                if (u, pu) <= (v, pv) {
                    out.push((u, pu, v, pv));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Raw port-map entry, without range checks.
    #[inline]
    pub fn port_target(&self, v: Node, p: Port) -> (Node, Port) {
        self.adj[v][p]
    }

    pub fn succ(&self, v: Node, p: Port) -> Result<Node, GraphError> {
        self.traverse(v, p).map(|(w, _)| w)
    }

    /// Follows port `p` out of `v`, returning the neighbor and the port by
    /// which it is entered.
    pub fn traverse(&self, v: Node, p: Port) -> Result<(Node, Port), GraphError> {
        let row = self.adj.get(v).ok_or(GraphError::NodeOutOfRange {
            node: v,
            n: self.adj.len(),
        })?;
        row.get(p).copied().ok_or(GraphError::PortOutOfRange {
            node: v,
            port: p,
            degree: row.len(),
        })
    }

    pub fn check_node(&self, v: Node) -> Result<(), GraphError> {
        if v < self.adj.len() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                node: v,
                n: self.adj.len(),
            })
        }
    }

    fn check_involution(&self) -> Result<(), Violation> {
        let n = self.adj.len();
        for (u, row) in self.adj.iter().enumerate() {
            for (p, &(v, q)) in row.iter().enumerate() {
                if v >= n {
                    return Err(Violation::DanglingPort { node: u, port: p });
                }
                if self.adj[v].get(q) != Some(&(u, p)) {
                    return Err(Violation::NotInvolution { node: u, port: p });
                }
            }
        }
        Ok(())
    }

    /// Confirms contiguous ports, involution, simplicity and connectivity.
    pub fn validate(&self) -> Result<(), Violation> {
        if self.adj.is_empty() {
            return Err(Violation::Empty);
        }
        // Ports are contiguous by representation; involution covers the rest.
        self.check_involution()?;
        for (u, row) in self.adj.iter().enumerate() {
            let mut seen = vec![false; self.adj.len()];
            for (p, &(v, _)) in row.iter().enumerate() {
                if v == u {
                    return Err(Violation::SelfLoop { node: u, port: p });
                }
                if seen[v] {
                    return Err(Violation::MultiEdge { u, v });
                }
                seen[v] = true;
            }
        }
        let dist = self.bfs_from(0);
        if let Some(node) = dist.iter().position(|d| d.is_none()) {
            return Err(Violation::Disconnected { node });
        }
        Ok(())
    }

    /// Follows an absolute port sequence; `None` when a port exceeds the
    /// degree of the node it is applied at.
    pub fn apply_abs_seq(&self, x: Node, seq: &PortSeq) -> Option<Node> {
        let mut cur = x;
        for &p in &seq.0 {
            cur = self.adj.get(cur)?.get(p)?.0;
        }
        Some(cur)
    }

    /// Walks an absolute port sequence and records the ports on both ends of
    /// every traversed edge.
    pub fn walk_abs_seq(&self, x: Node, seq: &PortSeq) -> Result<Walk, GraphError> {
        self.check_node(x)?;
        let mut walk = Walk {
            nodes: vec![x],
            out_ports: Vec::with_capacity(seq.len()),
            in_ports: Vec::with_capacity(seq.len()),
        };
        let mut cur = x;
        for &p in &seq.0 {
            let (next, q) = self.traverse(cur, p)?;
            walk.nodes.push(next);
            walk.out_ports.push(p);
            walk.in_ports.push(q);
            cur = next;
        }
        Ok(walk)
    }

    /// Application of an exploration sequence at `u`: the first step takes
    /// port 0, every later step leaves by `(entry port + a_i) mod degree`.
    ///
    /// On a node without ports the walk is just `(u)`.
    pub fn apply_uxs_walk(&self, u: Node, seq: &[u32]) -> Walk {
        let mut walk = Walk {
            nodes: vec![u],
            out_ports: Vec::with_capacity(seq.len() + 1),
            in_ports: Vec::with_capacity(seq.len() + 1),
        };
        if self.degree(u) == 0 {
            return walk;
        }
        let (mut cur, mut entry) = self.adj[u][0];
        walk.nodes.push(cur);
        walk.out_ports.push(0);
        walk.in_ports.push(entry);
        for &a in seq {
            let deg = self.adj[cur].len();
            let p = (entry + a as usize) % deg;
            let (next, q) = self.adj[cur][p];
            walk.nodes.push(next);
            walk.out_ports.push(p);
            walk.in_ports.push(q);
            cur = next;
            entry = q;
        }
        walk
    }

    /// BFS distances from `x`; `None` for unreachable nodes.
    pub fn bfs_from(&self, x: Node) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.adj.len()];
        if x >= self.adj.len() {
            return dist;
        }
        let mut queue = VecDeque::new();
        dist[x] = Some(0);
        queue.push_back(x);
        while let Some(a) = queue.pop_front() {
            let da = dist[a].unwrap();
            for &(b, _) in &self.adj[a] {
                if dist[b].is_none() {
                    dist[b] = Some(da + 1);
                    queue.push_back(b);
                }
            }
        }
        dist
    }

    pub fn bfs_dist(&self, x: Node, y: Node) -> usize {
        self.bfs_from(x)[y].expect("graph is connected")
    }

    /// All-pairs distance matrix, row-major.
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        self.nodes()
            .map(|x| {
                self.bfs_from(x)
                    .into_iter()
                    .map(|d| d.unwrap_or(usize::MAX))
                    .collect()
            })
            .collect()
    }

    /// Relabels nodes in breadth-first order from `root`, scanning ports in
    /// increasing order. Two rooted port-labeled graphs are isomorphic iff
    /// their relabelings from the roots coincide.
    pub fn canonical_from(&self, root: Node) -> (PortGraph, Vec<Node>) {
        let n = self.adj.len();
        let mut order = Vec::with_capacity(n);
        let mut new_id = vec![usize::MAX; n];
        new_id[root] = 0;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let a = order[head];
            head += 1;
            for &(b, _) in &self.adj[a] {
                if new_id[b] == usize::MAX {
                    new_id[b] = order.len();
                    order.push(b);
                }
            }
        }
        let adj = order
            .iter()
            .map(|&old| {
                self.adj[old]
                    .iter()
                    .map(|&(b, q)| (new_id[b], q))
                    .collect()
            })
            .collect();
        (PortGraph { adj }, new_id)
    }
}

/// Port sequence that retraces `walk` from its end back to its start.
pub fn reverse_walk(walk: &Walk) -> PortSeq {
    PortSeq(walk.in_ports.iter().rev().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_is_valid() {
        assert_eq!(gen_k2().validate(), Ok(()));
    }

    #[test]
    fn broken_involution_is_reported() {
        let g = PortGraph {
            adj: vec![vec![(1, 0)], vec![(0, 1)]],
        };
        assert!(matches!(
            g.validate(),
            Err(Violation::DanglingPort { .. }) | Err(Violation::NotInvolution { .. })
        ));
        let g = PortGraph {
            adj: vec![vec![(1, 0), (2, 0)], vec![(0, 1)], vec![(0, 1)]],
        };
        assert_eq!(
            g.validate(),
            Err(Violation::NotInvolution { node: 0, port: 0 })
        );
    }

    #[test]
    fn disconnected_graph_is_reported() {
        let r = PortGraph::from_edges(4, &[(0, 0, 1, 0), (2, 0, 3, 0)]);
        assert_eq!(
            r,
            Err(GraphError::Invalid(Violation::Disconnected { node: 2 }))
        );
    }

    #[test]
    fn self_loops_and_multi_edges_are_rejected() {
        let r = PortGraph::from_edges(2, &[(0, 0, 0, 1), (0, 2, 1, 0)]);
        assert!(matches!(r, Err(GraphError::Invalid(Violation::SelfLoop { .. }))));
        let r = PortGraph::from_edges(2, &[(0, 0, 1, 0), (0, 1, 1, 1)]);
        assert!(matches!(r, Err(GraphError::Invalid(Violation::MultiEdge { .. }))));
    }

    #[test]
    fn gap_in_ports_is_rejected() {
        let r = PortGraph::from_edges(2, &[(0, 1, 1, 0)]);
        assert_eq!(
            r,
            Err(GraphError::Invalid(Violation::PortNumbering { node: 0, port: 0 }))
        );
    }

    #[test]
    fn succ_examples() {
        let k2 = gen_k2();
        assert_eq!(k2.succ(0, 0), Ok(1));
        let ring = gen_oriented_ring(4).unwrap();
        assert_eq!(ring.succ(0, 0), Ok(1));
        for g in [&k2, &ring] {
            for v in g.nodes() {
                assert!(matches!(
                    g.succ(v, g.degree(v)),
                    Err(GraphError::PortOutOfRange { .. })
                ));
            }
        }
    }

    #[test]
    fn abs_seq_examples() {
        let k2 = gen_k2();
        assert_eq!(k2.apply_abs_seq(0, &PortSeq(vec![0, 0])), Some(0));
        assert_eq!(k2.apply_abs_seq(1, &PortSeq::default()), Some(1));
        assert_eq!(k2.apply_abs_seq(0, &PortSeq(vec![1])), None);
        let ring = gen_oriented_ring(4).unwrap();
        assert_eq!(ring.apply_abs_seq(0, &PortSeq(vec![0, 0])), Some(2));
    }

    #[test]
    fn uxs_walk_examples() {
        let k2 = gen_k2();
        assert_eq!(k2.apply_uxs_walk(0, &[]).nodes, vec![0, 1]);
        assert_eq!(k2.apply_uxs_walk(0, &[0]).nodes, vec![0, 1, 0]);
        // ring: enter node 1 by its counter-clockwise port 1, (1 + 1) mod 2 = 0
        let ring = gen_oriented_ring(4).unwrap();
        let w = ring.apply_uxs_walk(0, &[1]);
        assert_eq!(w.nodes, vec![0, 1, 2]);
        assert_eq!(w.out_ports, vec![0, 0]);
        assert_eq!(w.in_ports, vec![1, 1]);
    }

    #[test]
    fn reverse_walk_examples() {
        let k2 = gen_k2();
        let w = k2.apply_uxs_walk(0, &[]);
        assert_eq!(reverse_walk(&w), PortSeq(vec![0]));
        let empty = k2.walk_abs_seq(0, &PortSeq::default()).unwrap();
        assert!(reverse_walk(&empty).is_empty());
    }

    #[test]
    fn bfs_dist_examples() {
        let k2 = gen_k2();
        assert_eq!(k2.bfs_dist(0, 0), 0);
        assert_eq!(k2.bfs_dist(0, 1), 1);
        let ring = gen_oriented_ring(4).unwrap();
        assert_eq!(ring.bfs_dist(0, 2), 2);
    }

    #[test]
    fn canonical_relabeling_is_port_invariant() {
        let ring = gen_oriented_ring(5).unwrap();
        let (c0, _) = ring.canonical_from(0);
        let (c3, _) = ring.canonical_from(3);
        assert_eq!(c0, c3);
        let path = gen_path(3).unwrap();
        assert_ne!(path.canonical_from(0).0, path.canonical_from(1).0);
    }
}
