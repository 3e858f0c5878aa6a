use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{symmetric, GraphError, Node, PortGraph};

/// Space-time initial configuration: the earlier agent starts at `u`, the
/// later one at `v`, `delta` rounds afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Stic {
    pub u: Node,
    pub v: Node,
    pub delta: u64,
}

impl Stic {
    pub fn new(u: Node, v: Node, delta: u64) -> Self {
        Stic { u, v, delta }
    }

    pub fn check(&self, g: &PortGraph) -> Result<(), GraphError> {
        g.check_node(self.u)?;
        g.check_node(self.v)?;
        if self.u == self.v {
            return Err(GraphError::BadParameter(
                "the two agents must start at distinct nodes".into(),
            ));
        }
        Ok(())
    }
}

/// Smallest distance between `α(u)` and `α(v)` over port sequences `α` that
/// are valid at both nodes.
///
/// Breadth-first search over the synchronised product: from `(x, y)` every
/// port valid at both leads to `(succ(x, p), succ(y, p))`.
pub fn shrink(g: &PortGraph, u: Node, v: Node) -> usize {
    if u == v {
        return 0;
    }
    let n = g.node_count();
    let dist = g.distance_matrix();
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::new();
    seen[u * n + v] = true;
    queue.push_back((u, v));
    let mut best = usize::MAX;
    while let Some((x, y)) = queue.pop_front() {
        best = best.min(dist[x][y]);
        if best == 0 {
            break;
        }
        for p in 0..g.degree(x).min(g.degree(y)) {
            let x2 = g.port_target(x, p).0;
            let y2 = g.port_target(y, p).0;
            if !seen[x2 * n + y2] {
                seen[x2 * n + y2] = true;
                queue.push_back((x2, y2));
            }
        }
    }
    best
}

/// Independent check of [`shrink`]: enumerates every port sequence of
/// length at most `maxlen` valid at both nodes, level by level.
///
/// Level `k` holds the endpoint pairs of all sequences of length exactly `k`
/// (sequences with the same endpoints have the same continuations, so the
/// set loses nothing); there is no visited set across levels. Distances come
/// from Floyd-Warshall rather than BFS.
pub fn shrink_oracle(g: &PortGraph, u: Node, v: Node, maxlen: usize) -> usize {
    let dist = floyd_warshall(g);
    let mut level: BTreeSet<(Node, Node)> = BTreeSet::from([(u, v)]);
    let mut best = dist[u][v];
    for _ in 0..maxlen {
        let mut next = BTreeSet::new();
        for &(x, y) in &level {
            for p in 0..g.degree(x).min(g.degree(y)) {
                let pair = (g.port_target(x, p).0, g.port_target(y, p).0);
                best = best.min(dist[pair.0][pair.1]);
                next.insert(pair);
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    best
}

fn floyd_warshall(g: &PortGraph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for x in 0..n {
        d[x][x] = 0;
        for p in 0..g.degree(x) {
            d[x][g.port_target(x, p).0] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Smallest delay at which the configuration is feasible: 0 for
/// nonsymmetric starts, `Shrink(u, v)` for symmetric ones.
pub fn feasibility_threshold(g: &PortGraph, u: Node, v: Node) -> u64 {
    if symmetric(g, u, v) {
        shrink(g, u, v) as u64
    } else {
        0
    }
}

/// Rendezvous is feasible iff the starts are nonsymmetric, or they are
/// symmetric and the delay is at least their Shrink.
pub fn feasible(g: &PortGraph, s: &Stic) -> bool {
    !symmetric(g, s.u, s.v) || s.delta >= shrink(g, s.u, s.v) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_k2, gen_oriented_ring, gen_path, PortSeq};

    /// Literal enumeration of every sequence, no merging at all.
    fn brute(g: &PortGraph, x: Node, y: Node, left: usize) -> usize {
        let mut best = g.bfs_dist(x, y);
        if left > 0 {
            for p in 0..g.degree(x).min(g.degree(y)) {
                let x2 = g.port_target(x, p).0;
                let y2 = g.port_target(y, p).0;
                best = best.min(brute(g, x2, y2, left - 1));
            }
        }
        best
    }

    #[test]
    fn shrink_examples() {
        let k2 = gen_k2();
        assert_eq!(shrink(&k2, 0, 0), 0);
        assert_eq!(shrink(&k2, 0, 1), 1);
        assert_eq!(shrink_oracle(&k2, 0, 1, 4), 1);
        let ring = gen_oriented_ring(4).unwrap();
        assert_eq!(shrink(&ring, 0, 2), 2);
        assert_eq!(shrink_oracle(&ring, 0, 2, 16), 2);
    }

    #[test]
    fn level_oracle_matches_literal_enumeration() {
        for g in [gen_k2(), gen_path(3).unwrap(), gen_oriented_ring(4).unwrap()] {
            for u in g.nodes() {
                for v in g.nodes() {
                    for len in 0..6 {
                        assert_eq!(shrink_oracle(&g, u, v, len), brute(&g, u, v, len));
                    }
                }
            }
        }
    }

    #[test]
    fn nonsymmetric_pair_can_collapse() {
        let g = gen_path(3).unwrap();
        // port 0 from both ends reaches the middle
        assert_eq!(g.apply_abs_seq(0, &PortSeq(vec![0])), Some(1));
        assert_eq!(g.apply_abs_seq(2, &PortSeq(vec![0])), Some(1));
        assert_eq!(shrink(&g, 0, 2), 0);
    }

    #[test]
    fn feasibility_examples() {
        let k2 = gen_k2();
        assert!(!feasible(&k2, &Stic::new(0, 1, 0)));
        assert!(feasible(&k2, &Stic::new(0, 1, 1)));
        assert!(feasible(&k2, &Stic::new(0, 1, 3)));
        let p3 = gen_path(3).unwrap();
        assert!(feasible(&p3, &Stic::new(0, 2, 0)));
        assert_eq!(feasibility_threshold(&p3, 0, 2), 0);
        assert_eq!(feasibility_threshold(&k2, 1, 0), 1);
    }

    #[test]
    fn stic_check() {
        let k2 = gen_k2();
        assert!(Stic::new(0, 1, 0).check(&k2).is_ok());
        assert!(Stic::new(0, 0, 0).check(&k2).is_err());
        assert!(Stic::new(0, 2, 0).check(&k2).is_err());
    }
}
