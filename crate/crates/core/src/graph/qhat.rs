//! The 4-regular lower-bound family: the tree `Q_h` and the graph `Q̂_h`
//! obtained by wiring its leaves together.

use super::{GraphError, Node, Port, PortGraph, PortSeq};

/// Cardinal port labels, encoded as `N = 0, E = 1, S = 2, W = 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Compass {
    N = 0,
    E = 1,
    S = 2,
    W = 3,
}

impl Compass {
    pub const ALL: [Compass; 4] = [Compass::N, Compass::E, Compass::S, Compass::W];

    pub fn port(self) -> Port {
        self as Port
    }

    pub fn opposite(self) -> Compass {
        Compass::ALL[(self.port() + 2) % 4]
    }

    pub fn from_port(p: Port) -> Option<Compass> {
        Compass::ALL.get(p).copied()
    }
}

/// A member of the `Q_h` / `Q̂_h` family together with the construction
/// metadata that the graph itself does not expose.
#[derive(Debug, Clone)]
pub struct QHat {
    pub graph: PortGraph,
    pub h: usize,
    pub root: Node,
    /// Leaves of the underlying tree by type (the compass label of their
    /// single tree port), each list ordered lexicographically by the
    /// root-to-leaf port sequence.
    pub leaves: [Vec<Node>; 4],
}

impl QHat {
    pub fn leaves_of(&self, kind: Compass) -> &[Node] {
        &self.leaves[kind.port()]
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.iter().map(Vec::len).sum()
    }
}

type Slots = Vec<[Option<(Node, Port)>; 4]>;

struct TreeBuild {
    slots: Slots,
    leaves: [Vec<Node>; 4],
}

fn build_tree(h: usize) -> Result<TreeBuild, GraphError> {
    if h < 1 {
        return Err(GraphError::BadParameter(format!("Q_h needs h >= 1, got {h}")));
    }
    let mut slots: Slots = vec![[None; 4]];
    let mut leaves: [Vec<Node>; 4] = Default::default();
    // (node, port towards parent) for the current level, in lexicographic order
    let mut level: Vec<(Node, Option<Compass>)> = vec![(0, None)];
    for depth in 1..=h {
        let mut next = Vec::new();
        for &(node, up) in &level {
            for c in Compass::ALL {
                if Some(c) == up {
                    continue;
                }
                let child = slots.len();
                slots.push([None; 4]);
                let back = c.opposite();
                slots[node][c.port()] = Some((child, back.port()));
                slots[child][back.port()] = Some((node, c.port()));
                if depth == h {
                    leaves[back.port()].push(child);
                }
                next.push((child, Some(back)));
            }
        }
        level = next;
    }
    Ok(TreeBuild { slots, leaves })
}

/// The tree `Q_h`: every internal node has degree 4 with ports `N,E,S,W`,
/// every edge carries `N-S` or `E-W`, and all leaves are at depth `h`.
/// Leaves have a single port, which as a graph port is numbered 0; its
/// compass label is the leaf type recorded in [`QHat::leaves`].
pub fn gen_qh(h: usize) -> Result<QHat, GraphError> {
    let TreeBuild { slots, leaves } = build_tree(h)?;
    let is_leaf = |v: Node| slots[v].iter().filter(|s| s.is_some()).count() == 1 && v != 0;
    let adj = (0..slots.len())
        .map(|v| {
            if is_leaf(v) {
                let (w, q) = slots[v].iter().flatten().next().copied().unwrap();
                vec![(w, q)]
            } else {
                slots[v]
                    .iter()
                    .map(|s| {
                        let (w, q) = s.expect("internal nodes have all four ports");
                        (w, if is_leaf(w) { 0 } else { q })
                    })
                    .collect()
            }
        })
        .collect();
    Ok(QHat {
        graph: PortGraph::new(adj)?,
        h,
        root: 0,
        leaves,
    })
}

/// The graph `Q̂_h`: `Q_h` plus, for leaf lists `A_1..A_x` (`x = 3^(h-1)`),
/// the matchings `N_i - S_i` (ports `S`/`N`) and `E_i - W_i` (ports `W`/`E`)
/// and four alternating cycles
/// `N_1 S_2 N_3 .. N_x`, `S_1 N_2 S_3 .. S_x` (port `E` forward, `W` back) and
/// `E_1 W_2 E_3 .. E_x`, `W_1 E_2 W_3 .. W_x` (port `N` forward, `S` back).
///
/// For `h = 1` the cycles have length one and become self-loops; that member
/// is still 4-regular and port-consistent but is a multigraph, so it does not
/// pass [`PortGraph::validate`].
pub fn gen_qhat(h: usize) -> Result<QHat, GraphError> {
    let TreeBuild { mut slots, leaves } = build_tree(h)?;
    let [n_leaves, e_leaves, s_leaves, w_leaves] = &leaves;
    let x = n_leaves.len();
    let mut link = |a: Node, pa: Compass, b: Node, pb: Compass| {
        debug_assert!(slots[a][pa.port()].is_none() && slots[b][pb.port()].is_none());
        slots[a][pa.port()] = Some((b, pb.port()));
        slots[b][pb.port()] = Some((a, pa.port()));
    };
    for i in 0..x {
        link(n_leaves[i], Compass::S, s_leaves[i], Compass::N);
        link(e_leaves[i], Compass::W, w_leaves[i], Compass::E);
    }
    // 1-based index j: odd positions come from `first`, even ones from `second`
    let cycles = [
        (n_leaves, s_leaves, Compass::E, Compass::W),
        (s_leaves, n_leaves, Compass::E, Compass::W),
        (e_leaves, w_leaves, Compass::N, Compass::S),
        (w_leaves, e_leaves, Compass::N, Compass::S),
    ];
    for (first, second, forward, backward) in cycles {
        let pick = |j: usize| if j.is_multiple_of(2) { first[j] } else { second[j] };
        for j in 0..x {
            link(pick(j), forward, pick((j + 1) % x), backward);
        }
    }
    let adj: Vec<Vec<(Node, Port)>> = slots
        .iter()
        .map(|row| row.iter().map(|s| s.expect("Q̂_h is 4-regular")).collect())
        .collect();
    let graph = if h == 1 {
        PortGraph::new_unchecked(adj)
    } else {
        PortGraph::new(adj)?
    };
    Ok(QHat {
        graph,
        h,
        root: 0,
        leaves,
    })
}

/// `Z = { (γ γ)(r) : γ ∈ {N, E}^k }` for `D = 2k`.
pub fn z_set(q: &QHat, d: usize) -> Result<Vec<Node>, GraphError> {
    if d == 0 || d % 2 == 1 {
        return Err(GraphError::BadParameter(format!(
            "D must be a positive even integer, got {d}"
        )));
    }
    if q.h < d {
        return Err(GraphError::BadParameter(format!(
            "Z with D = {d} needs h >= D, got h = {}",
            q.h
        )));
    }
    let k = d / 2;
    let mut out = Vec::with_capacity(1 << k);
    for mask in 0..(1usize << k) {
        let gamma: Vec<Port> = (0..k)
            .map(|i| {
                if mask >> (k - 1 - i) & 1 == 0 {
                    Compass::N.port()
                } else {
                    Compass::E.port()
                }
            })
            .collect();
        let gamma = PortSeq(gamma);
        let node = q
            .graph
            .apply_abs_seq(q.root, &gamma.concat(&gamma))
            .expect("every node of Q̂_h has degree 4");
        out.push(node);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::view_classes;

    #[test]
    fn qh_counts() {
        let q = gen_qh(2).unwrap();
        assert_eq!(q.graph.node_count(), 17);
        assert_eq!(q.leaf_count(), 12);
        for kind in Compass::ALL {
            assert_eq!(q.leaves_of(kind).len(), 3);
        }
        assert!(gen_qh(0).is_err());
    }

    #[test]
    fn qhat2_structure() {
        let q = gen_qhat(2).unwrap();
        let g = &q.graph;
        assert!(g.nodes().all(|v| g.degree(v) == 4));
        for (_, pu, _, pv) in g.edges() {
            assert_eq!((pu + 2) % 4, pv);
        }
        assert_eq!(view_classes(g).class_count, 1);
    }

    #[test]
    fn qhat1_is_a_multigraph() {
        let q = gen_qhat(1).unwrap();
        assert_eq!(q.graph.node_count(), 5);
        assert!(q.graph.validate().is_err());
        assert!(q.graph.nodes().all(|v| q.graph.degree(v) == 4));
    }

    #[test]
    fn leaf_order_is_lexicographic() {
        let q = gen_qh(2).unwrap();
        let n: Vec<_> = q
            .leaves_of(Compass::N)
            .iter()
            .map(|&v| q.graph.bfs_dist(q.root, v))
            .collect();
        assert_eq!(n, vec![2, 2, 2]);
        let mut sorted = q.leaves_of(Compass::N).to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, q.leaves_of(Compass::N));
    }

    #[test]
    fn z_set_examples() {
        let q = gen_qhat(2).unwrap();
        let z = z_set(&q, 2).unwrap();
        assert_eq!(z.len(), 2);
        for &v in &z {
            assert_eq!(q.graph.bfs_dist(q.root, v), 2);
        }
        assert!(z_set(&q, 4).is_err());
        assert!(z_set(&q, 3).is_err());
        let q4 = gen_qhat(4).unwrap();
        let z4 = z_set(&q4, 4).unwrap();
        assert_eq!(z4.len(), 4);
        for &v in &z4 {
            assert_eq!(q4.graph.bfs_dist(q4.root, v), 4);
        }
    }
}
