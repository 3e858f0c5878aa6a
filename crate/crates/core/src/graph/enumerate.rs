use std::collections::HashSet;

use super::{GraphError, Node, Port, PortGraph};

pub const DEFAULT_ENUMERATION_CAP: usize = 5;

/// Every connected simple port-labeled graph on `n` nodes: each connected
/// labeled simple graph combined with each assignment of port numbers at
/// each node. Order is deterministic: edge sets by bitmask over the pairs
/// `(0,1), (0,2), .., (n-2,n-1)`, then port assignments in mixed radix with
/// node 0 varying fastest.
pub fn enumerate_graphs(n: usize) -> Result<GraphIter, GraphError> {
    GraphIter::with_cap(n, DEFAULT_ENUMERATION_CAP)
}

/// Number of graphs [`enumerate_graphs`] yields, without building them.
pub fn graph_count(n: usize) -> u64 {
    let pairs = pair_list(n);
    (0..1u64 << pairs.len())
        .filter_map(|mask| {
            let nbrs = neighbor_lists(n, &pairs, mask);
            connected(&nbrs).then(|| nbrs.iter().map(|l| factorial(l.len())).product::<u64>())
        })
        .sum()
}

pub struct GraphIter {
    n: usize,
    pairs: Vec<(Node, Node)>,
    next_mask: u64,
    current: Option<Assignment>,
    dedup: Option<HashSet<PortGraph>>,
}

struct Assignment {
    nbrs: Vec<Vec<Node>>,
    /// Permutation index per node, in `0..deg!`.
    digits: Vec<u64>,
    done: bool,
}

impl GraphIter {
    pub fn with_cap(n: usize, cap: usize) -> Result<Self, GraphError> {
        if n == 0 || n > cap {
            return Err(GraphError::BadParameter(format!(
                "enumeration needs 1 <= n <= {cap}, got {n}"
            )));
        }
        let pairs = pair_list(n);
        Ok(GraphIter {
            n,
            pairs,
            next_mask: 0,
            current: None,
            dedup: None,
        })
    }

    /// Skip graphs isomorphic (as port-labeled graphs) to one already
    /// yielded.
    pub fn dedup_isomorphic(mut self) -> Self {
        self.dedup = Some(HashSet::new());
        self
    }

    fn advance_mask(&mut self) -> bool {
        while self.next_mask < 1u64 << self.pairs.len() {
            let mask = self.next_mask;
            self.next_mask += 1;
            let nbrs = neighbor_lists(self.n, &self.pairs, mask);
            if connected(&nbrs) {
                let digits = vec![0; self.n];
                self.current = Some(Assignment {
                    nbrs,
                    digits,
                    done: false,
                });
                return true;
            }
        }
        false
    }

    fn next_raw(&mut self) -> Option<PortGraph> {
        if self.current.as_ref().is_none_or(|a| a.done) && !self.advance_mask() {
            return None;
        }
        let a = self.current.as_mut().unwrap();
        let g = a.build();
        a.increment();
        Some(g)
    }
}

impl Iterator for GraphIter {
    type Item = PortGraph;

    fn next(&mut self) -> Option<PortGraph> {
        loop {
            let g = self.next_raw()?;
            match &mut self.dedup {
                None => return Some(g),
                Some(seen) => {
                    let canon = g
                        .nodes()
                        .map(|r| g.canonical_from(r).0)
                        .min_by(|a, b| a.edges().cmp(&b.edges()))
                        .unwrap();
                    if seen.insert(canon) {
                        return Some(g);
                    }
                }
            }
        }
    }
}

impl Assignment {
    fn build(&self) -> PortGraph {
        let n = self.nbrs.len();
        let order: Vec<Vec<Node>> = (0..n)
            .map(|v| nth_permutation(&self.nbrs[v], self.digits[v]))
            .collect();
        let port_of = |a: Node, b: Node| -> Port { order[a].iter().position(|&x| x == b).unwrap() };
        let adj = (0..n)
            .map(|a| order[a].iter().map(|&b| (b, port_of(b, a))).collect())
            .collect();
        PortGraph::new_unchecked(adj)
    }

    fn increment(&mut self) {
        for v in 0..self.digits.len() {
            self.digits[v] += 1;
            if self.digits[v] < factorial(self.nbrs[v].len()) {
                return;
            }
            self.digits[v] = 0;
        }
        self.done = true;
    }
}

fn pair_list(n: usize) -> Vec<(Node, Node)> {
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((a, b));
        }
    }
    pairs
}

fn neighbor_lists(n: usize, pairs: &[(Node, Node)], mask: u64) -> Vec<Vec<Node>> {
    let mut nbrs = vec![Vec::new(); n];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if mask >> i & 1 == 1 {
            nbrs[a].push(b);
            nbrs[b].push(a);
        }
    }
    nbrs
}

fn connected(nbrs: &[Vec<Node>]) -> bool {
    let mut seen = vec![false; nbrs.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for &b in &nbrs[a] {
            if !seen[b] {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Permutation of `items` with the given index in lexicographic order.
fn nth_permutation(items: &[Node], mut index: u64) -> Vec<Node> {
    let mut pool = items.to_vec();
    let mut out = Vec::with_capacity(items.len());
    for i in (0..items.len()).rev() {
        let f = factorial(i);
        let pick = (index / f) as usize;
        index %= f;
        out.push(pool.remove(pick));
    }
    out
}
