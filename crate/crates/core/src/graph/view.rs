use std::collections::{BTreeMap, HashSet, VecDeque};

use super::{Node, Port, PortGraph};

/// Truncated view of a node: its degree and, below the truncation depth, for
/// every outgoing port the port by which the neighbor is entered together
/// with the neighbor's view one level shallower.
///
/// The derived ordering compares the degree first and then the children by
/// outgoing port, each as `(incoming port, subtree)`. Because the degree
/// fixes the number of children this coincides with the lexicographic order
/// of [`ViewTree::serialize`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ViewTree {
    pub degree: usize,
    pub children: Vec<(Port, ViewTree)>,
}

impl ViewTree {
    /// Pre-order token stream: degree, then for each port its incoming port
    /// followed by the child's tokens. Prefix-free for a fixed depth.
    pub fn serialize(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.serialize_into(&mut out);
        out
    }

    fn serialize_into(&self, out: &mut Vec<u32>) {
        out.push(self.degree as u32);
        for (q, child) in &self.children {
            out.push(*q as u32);
            child.serialize_into(out);
        }
    }

    pub fn depth(&self) -> usize {
        self.children
            .first()
            .map(|(_, c)| c.depth() + 1)
            .unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|(_, c)| c.node_count()).sum::<usize>()
    }
}

/// The view of `v` truncated at `depth`.
pub fn view(g: &PortGraph, v: Node, depth: usize) -> ViewTree {
    let degree = g.degree(v);
    let children = if depth == 0 {
        Vec::new()
    } else {
        (0..degree)
            .map(|p| {
                let (w, q) = g.port_target(v, p);
                (q, view(g, w, depth - 1))
            })
            .collect()
    };
    ViewTree { degree, children }
}

/// Partition of the nodes by equality of their depth-`(n-1)` views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewClassTable {
    /// Class id of every node; ids follow the order of the views.
    pub class_of: Vec<usize>,
    pub class_count: usize,
    pub depth: usize,
}

impl ViewClassTable {
    pub fn members(&self, class: usize) -> Vec<Node> {
        (0..self.class_of.len())
            .filter(|&v| self.class_of[v] == class)
            .collect()
    }

    /// Lowest-index member of every class, in class order.
    pub fn representatives(&self) -> Vec<Node> {
        let mut reps = vec![usize::MAX; self.class_count];
        for (v, &c) in self.class_of.iter().enumerate().rev() {
            reps[c] = v;
        }
        reps
    }
}

/// Ranks every node by its depth-`(n-1)` view.
///
/// Level 0 ranks by degree; level `k` ranks the keys
/// `(degree, [(incoming port, level k-1 rank of neighbor)])`. Ranks at level
/// `k` are order-isomorphic to the depth-`k` views, so the final ranks give
/// the canonical class order without materialising any tree. The iteration
/// runs exactly `n-1` levels: the order between two classes may change at
/// deeper levels even after the partition itself has stabilised.
pub fn view_classes(g: &PortGraph) -> ViewClassTable {
    let n = g.node_count();
    let depth = n.saturating_sub(1);
    let initial: Vec<(usize, Vec<(Port, usize)>)> =
        g.nodes().map(|v| (g.degree(v), Vec::new())).collect();
    let mut ranks = rank_keys(&initial);
    for _ in 0..depth {
        let keys: Vec<(usize, Vec<(Port, usize)>)> = g
            .nodes()
            .map(|v| {
                let row = (0..g.degree(v))
                    .map(|p| {
                        let (w, q) = g.port_target(v, p);
                        (q, ranks[w])
                    })
                    .collect();
                (g.degree(v), row)
            })
            .collect();
        ranks = rank_keys(&keys);
    }
    let class_count = ranks.iter().copied().max().map_or(0, |m| m + 1);
    ViewClassTable {
        class_of: ranks,
        class_count,
        depth,
    }
}

fn rank_keys<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut distinct: BTreeMap<K, usize> = keys.iter().cloned().map(|k| (k, 0)).collect();
    for (i, slot) in distinct.values_mut().enumerate() {
        *slot = i;
    }
    keys.iter().map(|k| distinct[k]).collect()
}

/// Whether `u` and `v` have identical (untruncated) views.
///
/// Explores the synchronised product from `(u, v)`: the views agree iff every
/// reachable pair has equal degrees and every port leads to equal incoming
/// ports. Independent of [`view_classes`] and of any truncation depth.
pub fn symmetric(g: &PortGraph, u: Node, v: Node) -> bool {
    if u == v {
        return true;
    }
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert((u, v));
    queue.push_back((u, v));
    while let Some((x, y)) = queue.pop_front() {
        if g.degree(x) != g.degree(y) {
            return false;
        }
        for p in 0..g.degree(x) {
            let (x2, qx) = g.port_target(x, p);
            let (y2, qy) = g.port_target(y, p);
            if qx != qy {
                return false;
            }
            if seen.insert((x2, y2)) {
                queue.push_back((x2, y2));
            }
        }
    }
    true
}
