use super::{GraphError, Node, Port, PortGraph};

/// The two-node graph: one edge, port 0 at both ends.
pub fn gen_k2() -> PortGraph {
    PortGraph::new_unchecked(vec![vec![(1, 0)], vec![(0, 0)]])
}

/// Path `0 - 1 - ... - (m-1)`. Interior nodes use port 0 towards the lower
/// index and port 1 towards the higher one.
pub fn gen_path(m: usize) -> Result<PortGraph, GraphError> {
    if m < 2 {
        return Err(GraphError::BadParameter(format!("path needs m >= 2, got {m}")));
    }
    let mut edges = Vec::with_capacity(m - 1);
    for i in 0..m - 1 {
        let pu = if i == 0 { 0 } else { 1 };
        edges.push((i, pu, i + 1, 0));
    }
    PortGraph::from_edges(m, &edges)
}

/// Cycle of length `m` with port 0 leading clockwise (`i -> i+1`) and port 1
/// counter-clockwise at every node.
pub fn gen_oriented_ring(m: usize) -> Result<PortGraph, GraphError> {
    if m < 3 {
        return Err(GraphError::BadParameter(format!("ring needs m >= 3, got {m}")));
    }
    let adj = (0..m)
        .map(|i| vec![((i + 1) % m, 1), ((i + m - 1) % m, 0)])
        .collect();
    PortGraph::new(adj)
}

/// `a x b` torus, node `(i, j)` at index `i * b + j`. Ports: 0 = `j+1`,
/// 1 = `i+1`, 2 = `j-1`, 3 = `i-1`, so every edge carries ports `{0,2}` or
/// `{1,3}` and all nodes have the same view.
pub fn gen_oriented_torus(a: usize, b: usize) -> Result<PortGraph, GraphError> {
    if a < 3 || b < 3 {
        return Err(GraphError::BadParameter(format!(
            "torus needs both sides >= 3, got {a}x{b}"
        )));
    }
    let idx = |i: usize, j: usize| (i % a) * b + (j % b);
    let mut adj = Vec::with_capacity(a * b);
    for i in 0..a {
        for j in 0..b {
            adj.push(vec![
                (idx(i, j + 1), 2),
                (idx(i + 1, j), 3),
                (idx(i, j + b - 1), 0),
                (idx(i + a - 1, j), 1),
            ]);
        }
    }
    PortGraph::new(adj)
}

/// A port-labeled tree with a distinguished root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    pub graph: PortGraph,
    pub root: Node,
}

impl RootedTree {
    pub fn new(graph: PortGraph, root: Node) -> Result<Self, GraphError> {
        graph.check_node(root)?;
        if graph.edge_count() + 1 != graph.node_count() {
            return Err(GraphError::BadParameter("graph is not a tree".into()));
        }
        Ok(RootedTree { graph, root })
    }

    /// Tree from a parent array (`parents[0]` is ignored, node 0 is the root,
    /// `parents[i] < i`). The incident edges of each node are ordered by
    /// neighbor index and then rotated by `rotations[node]`, which lets
    /// callers reach every port labeling up to rotation.
    pub fn from_parents(parents: &[usize], rotations: &[usize]) -> Result<Self, GraphError> {
        let m = parents.len();
        if m == 0 {
            return Err(GraphError::BadParameter("empty tree".into()));
        }
        let mut nbrs: Vec<Vec<Node>> = vec![Vec::new(); m];
        for (child, &parent) in parents.iter().enumerate().skip(1) {
            if parent >= child {
                return Err(GraphError::BadParameter(format!(
                    "parent of {child} must precede it, got {parent}"
                )));
            }
            nbrs[parent].push(child);
            nbrs[child].push(parent);
        }
        let mut port_of = vec![Vec::new(); m];
        for (v, list) in nbrs.iter_mut().enumerate() {
            list.sort_unstable();
            if !list.is_empty() {
                let r = rotations.get(v).copied().unwrap_or(0) % list.len();
                list.rotate_left(r);
            }
            port_of[v] = list.clone();
        }
        let port = |a: Node, b: Node| -> Port { port_of[a].iter().position(|&x| x == b).unwrap() };
        let adj = (0..m)
            .map(|a| port_of[a].iter().map(|&b| (b, port(b, a))).collect())
            .collect();
        RootedTree::new(PortGraph::new(adj)?, 0)
    }

    pub fn height(&self) -> usize {
        self.graph
            .bfs_from(self.root)
            .into_iter()
            .map(|d| d.unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

/// Complete `branching`-ary tree of the given height; children of every node
/// take the low ports and the parent takes the last port.
pub fn gen_complete_tree(branching: usize, height: usize) -> Result<RootedTree, GraphError> {
    if branching == 0 {
        return Err(GraphError::BadParameter("branching must be >= 1".into()));
    }
    let mut parents = vec![0];
    let mut level = vec![0usize];
    for _ in 0..height {
        let mut next = Vec::new();
        for &p in &level {
            for _ in 0..branching {
                next.push(parents.len());
                parents.push(p);
            }
        }
        level = next;
    }
    // Sorted neighbor order puts the parent first; rotate it to the end.
    let rotations: Vec<usize> = (0..parents.len()).map(|v| usize::from(v != 0)).collect();
    RootedTree::from_parents(&parents, &rotations)
}

/// Two port-preserving copies of a rooted tree joined by an edge between the
/// roots. The central edge uses port `deg(root)` at both ends.
#[derive(Debug, Clone)]
pub struct SymTree {
    pub graph: PortGraph,
    /// `mirror[x]` is the image of `x` in the other copy.
    pub mirror: Vec<Node>,
    pub roots: (Node, Node),
}

pub fn gen_sym_tree(t: &RootedTree) -> Result<SymTree, GraphError> {
    let m = t.graph.node_count();
    let central = t.graph.degree(t.root);
    let mut adj: Vec<Vec<(Node, Port)>> = Vec::with_capacity(2 * m);
    for offset in [0, m] {
        for v in 0..m {
            adj.push(
                (0..t.graph.degree(v))
                    .map(|p| {
                        let (w, q) = t.graph.port_target(v, p);
                        (w + offset, q)
                    })
                    .collect(),
            );
        }
    }
    adj[t.root].push((t.root + m, central));
    adj[t.root + m].push((t.root, central));
    let graph = PortGraph::new(adj)?;
    let mirror = (0..2 * m).map(|x| if x < m { x + m } else { x - m }).collect();
    Ok(SymTree {
        graph,
        mirror,
        roots: (t.root, t.root + m),
    })
}
