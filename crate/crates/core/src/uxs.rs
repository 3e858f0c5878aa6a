//! Exploration sequences.
//!
//! A sequence `(a_1, .., a_M)` is applied at a node by leaving through port
//! 0 and then, at every step, through `(entry port + a_i) mod degree`. A
//! sequence is universal for size `n` when its application covers every
//! node of every graph with at most `n` nodes from every start.
//!
//! Universal sequences are found here by exhaustive search and exhaustive
//! verification, which is only practical for very small `n`. For larger
//! graphs an *instance-specific* sequence covering one particular graph from
//! all of its nodes stands in. Such a sequence is derived from the graph, so
//! an algorithm using it is no longer free of a priori knowledge; both agents
//! still receive the identical sequence, which is all the rendezvous
//! procedures need for their symmetry arguments.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{enumerate_graphs, GraphError, GraphIter, Node, Port, PortGraph};

/// Largest size for which universal sequences are searched by default.
pub const DEFAULT_VERIFIED_CAP: usize = 4;
/// Default number of search nodes `find_uxs` may expand.
pub const DEFAULT_SEARCH_BUDGET: u64 = 200_000_000;
/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "SYMRV_CACHE_DIR";

#[derive(Debug, Error)]
pub enum UxsError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(
        "no universal sequence for n = {n} within a budget of {budget} search nodes \
         (longest length fully searched: {searched}); use an instance-specific sequence instead"
    )]
    BudgetExhausted { n: usize, budget: u64, searched: usize },
    #[error("sequence for n = {n} does not cover the graph from node {start}")]
    NotCovering { n: usize, start: Node },
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache file is malformed: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UxsMode {
    VerifiedUniversal,
    InstanceSpecific,
}

/// An exploration sequence with its target size and origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UxsSpec {
    pub n: usize,
    pub mode: UxsMode,
    pub sequence: Vec<u32>,
    pub provenance: String,
}

impl UxsSpec {
    /// Sequence length `M`.
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

/// Whether the application of `seq` at `u` visits every node of `g`.
pub fn covers(g: &PortGraph, u: Node, seq: &[u32]) -> bool {
    let walk = g.apply_uxs_walk(u, seq);
    let mut seen = vec![false; g.node_count()];
    for &x in &walk.nodes {
        seen[x] = true;
    }
    seen.into_iter().all(|s| s)
}

/// Whether `seq` covers every graph of size at most `n` from every start.
pub fn verify_universal(seq: &[u32], n: usize) -> Result<bool, UxsError> {
    verify_universal_capped(seq, n, crate::graph::DEFAULT_ENUMERATION_CAP)
}

pub fn verify_universal_capped(seq: &[u32], n: usize, cap: usize) -> Result<bool, UxsError> {
    GraphIter::with_cap(n, cap)?;
    for m in 1..=n {
        for g in GraphIter::with_cap(m, cap)? {
            if !g.nodes().all(|u| covers(&g, u, seq)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy)]
struct WalkState {
    config: u32,
    node: u8,
    entry: u8,
    visited: u32,
}

struct SearchSpace {
    graphs: Vec<PortGraph>,
    /// Graph index of every configuration; all of them start at node 0.
    config_graph: Vec<usize>,
    full: Vec<u32>,
    entries: u32,
}

impl SearchSpace {
    fn new(n: usize) -> Result<Self, UxsError> {
        // Walks only depend on the rooted port-labeled graph, so configurations
        // are deduplicated by their breadth-first relabeling from the start.
        let mut seen = HashSet::new();
        let mut graphs = Vec::new();
        for m in 1..=n {
            for g in enumerate_graphs(m)? {
                for u in g.nodes() {
                    let (canon, _) = g.canonical_from(u);
                    if seen.insert(canon.clone()) {
                        graphs.push(canon);
                    }
                }
            }
        }
        let full = graphs.iter().map(|g| (1u32 << g.node_count()) - 1).collect();
        let config_graph = (0..graphs.len()).collect();
        Ok(SearchSpace {
            graphs,
            config_graph,
            full,
            entries: n.max(1) as u32,
        })
    }

    fn initial(&self) -> Vec<WalkState> {
        self.config_graph
            .iter()
            .enumerate()
            .filter_map(|(c, &gi)| {
                let g = &self.graphs[gi];
                if g.degree(0) == 0 {
                    return None; // single node: covered at once
                }
                let (x, q) = g.port_target(0, 0);
                let visited = 1 | 1 << x;
                (visited != self.full[c]).then_some(WalkState {
                    config: c as u32,
                    node: x as u8,
                    entry: q as u8,
                    visited,
                })
            })
            .collect()
    }
}

struct Search<'a> {
    space: &'a SearchSpace,
    budget: u64,
    expanded: u64,
    prefix: Vec<u32>,
    levels: Vec<Vec<WalkState>>,
}

enum Outcome {
    Found,
    Exhausted,
    OutOfBudget,
}

impl Search<'_> {
    fn dfs(&mut self, depth: usize, target: usize) -> Outcome {
        if self.levels[depth].is_empty() {
            return Outcome::Found;
        }
        if depth == target {
            return Outcome::Exhausted;
        }
        let remaining = (target - depth) as u32;
        for a in 0..self.space.entries {
            self.expanded += 1;
            if self.expanded > self.budget {
                return Outcome::OutOfBudget;
            }
            let mut next = std::mem::take(&mut self.levels[depth + 1]);
            next.clear();
            let mut feasible = true;
            for st in &self.levels[depth] {
                let g = &self.space.graphs[self.space.config_graph[st.config as usize]];
                let node = st.node as usize;
                let p = (st.entry as usize + a as usize) % g.degree(node);
                let (x, q) = g.port_target(node, p);
                let visited = st.visited | 1 << x;
                let full = self.space.full[st.config as usize];
                if visited == full {
                    continue;
                }
                // one new node per remaining step at most
                if (full & !visited).count_ones() > remaining - 1 {
                    feasible = false;
                    break;
                }
                next.push(WalkState {
                    config: st.config,
                    node: x as u8,
                    entry: q as u8,
                    visited,
                });
            }
            self.levels[depth + 1] = next;
            if !feasible {
                continue;
            }
            self.prefix.push(a);
            match self.dfs(depth + 1, target) {
                Outcome::Exhausted => {
                    self.prefix.pop();
                }
                other => return other,
            }
        }
        Outcome::Exhausted
    }
}

/// Shortest universal sequence for size `n` (entries in `0..n`), by
/// iterative deepening over lengths and lexicographic search within a
/// length. Deterministic for fixed `n` and `budget`; `budget` caps the
/// number of expanded search nodes over all lengths.
pub fn find_uxs(n: usize, budget: u64) -> Result<UxsSpec, UxsError> {
    let space = SearchSpace::new(n)?;
    let start = space.initial();
    let mut search = Search {
        space: &space,
        budget,
        expanded: 0,
        prefix: Vec::new(),
        levels: Vec::new(),
    };
    for target in 0.. {
        search.levels = vec![Vec::new(); target + 1];
        search.levels[0] = start.clone();
        search.prefix.clear();
        match search.dfs(0, target) {
            Outcome::Found => {
                return Ok(UxsSpec {
                    n,
                    mode: UxsMode::VerifiedUniversal,
                    sequence: search.prefix.clone(),
                    provenance: format!(
                        "iterative deepening over entries 0..{}, {} rooted configurations, {} nodes expanded",
                        space.entries,
                        space.graphs.len(),
                        search.expanded
                    ),
                })
            }
            Outcome::Exhausted => {}
            Outcome::OutOfBudget => {
                return Err(UxsError::BudgetExhausted {
                    n,
                    budget,
                    searched: target.saturating_sub(1),
                })
            }
        }
    }
    unreachable!("iterative deepening returns from inside the loop")
}

/// A sequence covering `g` from every one of its nodes. Greedy: append the
/// entry that reaches the most unvisited nodes over all starts; when no
/// single entry helps, append the shortest entry string that brings the
/// first uncovered start to a new node.
pub fn instance_seq(g: &PortGraph) -> UxsSpec {
    let n = g.node_count();
    let entries = n.max(1) as u32;
    struct Cursor {
        node: Node,
        entry: Port,
        visited: Vec<bool>,
        missing: usize,
    }
    let mut cursors: Vec<Cursor> = g
        .nodes()
        .map(|u| {
            let mut visited = vec![false; n];
            visited[u] = true;
            let mut c = Cursor {
                node: u,
                entry: 0,
                visited,
                missing: n - 1,
            };
            if g.degree(u) > 0 {
                let (x, q) = g.port_target(u, 0);
                c.node = x;
                c.entry = q;
                if !c.visited[x] {
                    c.visited[x] = true;
                    c.missing -= 1;
                }
            }
            c
        })
        .collect();
    let step = |g: &PortGraph, node: Node, entry: Port, a: u32| -> (Node, Port) {
        let p = (entry + a as usize) % g.degree(node);
        g.port_target(node, p)
    };
    let mut seq = Vec::new();
    let apply = |seq: &mut Vec<u32>, cursors: &mut Vec<Cursor>, a: u32| {
        seq.push(a);
        for c in cursors.iter_mut() {
            let (x, q) = step(g, c.node, c.entry, a);
            c.node = x;
            c.entry = q;
            if !c.visited[x] {
                c.visited[x] = true;
                c.missing -= 1;
            }
        }
    };
    while let Some(first) = cursors.iter().position(|c| c.missing > 0) {
        let gain = |a: u32| {
            cursors
                .iter()
                .filter(|c| c.missing > 0 && !c.visited[step(g, c.node, c.entry, a).0])
                .count()
        };
        let (best, best_gain) = (0..entries)
            .map(|a| (a, gain(a)))
            .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_gain > 0 {
            apply(&mut seq, &mut cursors, best);
            continue;
        }
        // BFS over (node, entry) for the first uncovered start
        let c = &cursors[first];
        let origin = (c.node, c.entry);
        let mut parent: BTreeMap<(Node, Port), ((Node, Port), u32)> = BTreeMap::new();
        let mut queue = VecDeque::from([origin]);
        let mut goal = None;
        'bfs: while let Some(s) = queue.pop_front() {
            for a in 0..g.degree(s.0) as u32 {
                let t = step(g, s.0, s.1, a);
                if t == origin || parent.contains_key(&t) {
                    continue;
                }
                parent.insert(t, (s, a));
                if !c.visited[t.0] {
                    goal = Some(t);
                    break 'bfs;
                }
                queue.push_back(t);
            }
        }
        let mut path = Vec::new();
        let mut at = goal.expect("connected graph: an unvisited node is reachable");
        while at != origin {
            let (prev, a) = parent[&at];
            path.push(a);
            at = prev;
        }
        for a in path.into_iter().rev() {
            apply(&mut seq, &mut cursors, a);
        }
    }
    UxsSpec {
        n,
        mode: UxsMode::InstanceSpecific,
        sequence: seq,
        provenance: format!("greedy cover of a {n}-node graph with {} edges", g.edge_count()),
    }
}

/// On-disk store of found sequences, one JSON file per `n`.
#[derive(Debug, Clone)]
pub struct UxsCache {
    dir: PathBuf,
}

impl UxsCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        UxsCache { dir: dir.into() }
    }

    /// `$SYMRV_CACHE_DIR`, or `symrv-cache` under the system temp directory.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) => UxsCache::new(d),
            None => UxsCache::new(std::env::temp_dir().join("symrv-cache")),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, n: usize) -> PathBuf {
        self.dir.join(format!("uxs-n{n}.json"))
    }

    pub fn load(&self, n: usize) -> Result<Option<UxsSpec>, UxsError> {
        match fs::read_to_string(self.path(n)) {
            Ok(s) => Ok(Some(serde_json::from_str(&s)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes through a temporary file and renames it into place.
    pub fn store(&self, spec: &UxsSpec) -> Result<(), UxsError> {
        fs::create_dir_all(&self.dir)?;
        let target = self.path(spec.n);
        let tmp = self
            .dir
            .join(format!(".uxs-n{}.{}.tmp", spec.n, std::process::id()));
        fs::write(&tmp, serde_json::to_string_pretty(spec)?)?;
        fs::rename(&tmp, &target)?;
        Ok(())
    }

    /// Cached universal sequence for `n`, searching (and storing) on a miss.
    /// A cached entry that no longer verifies is replaced.
    pub fn find_uxs(&self, n: usize, budget: u64) -> Result<UxsSpec, UxsError> {
        if let Some(spec) = self.load(n)? {
            if spec.n == n
                && spec.mode == UxsMode::VerifiedUniversal
                && verify_universal(&spec.sequence, n)?
            {
                return Ok(spec);
            }
        }
        let spec = find_uxs(n, budget)?;
        self.store(&spec)?;
        Ok(spec)
    }
}

/// Exploration sequences handed to the agents, by hypothesised size.
///
/// Sizes up to the verified cap get their universal sequence; any other size
/// gets the fallback (typically an instance-specific sequence). One provider
/// is shared by both agents of a run.
#[derive(Debug, Clone)]
pub struct UxsProvider {
    verified: BTreeMap<usize, Arc<UxsSpec>>,
    fallback: Arc<UxsSpec>,
}

impl UxsProvider {
    pub fn new(verified: Vec<UxsSpec>, fallback: UxsSpec) -> Self {
        UxsProvider {
            verified: verified.into_iter().map(|s| (s.n, Arc::new(s))).collect(),
            fallback: Arc::new(fallback),
        }
    }

    /// Universal sequences for `1..=cap` (through the cache) with the
    /// instance sequence of `g` as fallback.
    pub fn verified_for(g: &PortGraph, cap: usize, cache: &UxsCache) -> Result<Self, UxsError> {
        let verified = (1..=cap)
            .map(|n| cache.find_uxs(n, DEFAULT_SEARCH_BUDGET))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(UxsProvider::new(verified, instance_seq(g)))
    }

    /// The instance sequence of `g` for every size.
    pub fn instance_for(g: &PortGraph) -> Self {
        UxsProvider::new(Vec::new(), instance_seq(g))
    }

    pub fn sequence(&self, n: usize) -> Arc<UxsSpec> {
        self.verified
            .get(&n)
            .cloned()
            .unwrap_or_else(|| self.fallback.clone())
    }

    /// Checks that every sequence that may be used on `g` with a correct or
    /// larger size hypothesis covers it from every node.
    pub fn check_against(&self, g: &PortGraph) -> Result<(), UxsError> {
        let specs = self
            .verified
            .values()
            .filter(|s| s.n >= g.node_count())
            .chain(std::iter::once(&self.fallback));
        for spec in specs {
            if let Some(start) = g.nodes().find(|&u| !covers(g, u, &spec.sequence)) {
                return Err(UxsError::NotCovering { n: spec.n, start });
            }
        }
        Ok(())
    }
}
