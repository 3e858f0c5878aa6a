use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{GraphError, PortGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: usize,
    pub pu: usize,
    pub v: usize,
    pub pv: usize,
}

/// On-disk graph: `{"n": .., "edges": [{"u":..,"pu":..,"v":..,"pv":..}, ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<EdgeRecord>,
}

impl From<&PortGraph> for GraphFile {
    fn from(g: &PortGraph) -> Self {
        GraphFile {
            n: g.node_count(),
            edges: g
                .edges()
                .into_iter()
                .map(|(u, pu, v, pv)| EdgeRecord { u, pu, v, pv })
                .collect(),
        }
    }
}

impl TryFrom<GraphFile> for PortGraph {
    type Error = GraphError;

    fn try_from(f: GraphFile) -> Result<Self, GraphError> {
        let edges: Vec<_> = f.edges.iter().map(|e| (e.u, e.pu, e.v, e.pv)).collect();
        PortGraph::from_edges(f.n, &edges)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn from_json_str(s: &str) -> Result<PortGraph, LoadError> {
    let file: GraphFile = serde_json::from_str(s)?;
    Ok(PortGraph::try_from(file)?)
}

pub fn from_json<R: Read>(reader: R) -> Result<PortGraph, LoadError> {
    let file: GraphFile = serde_json::from_reader(reader)?;
    Ok(PortGraph::try_from(file)?)
}

pub fn to_json_string(g: &PortGraph) -> String {
    serde_json::to_string(&GraphFile::from(g)).expect("graph file serialises")
}

pub fn to_json<W: Write>(g: &PortGraph, writer: W) -> serde_json::Result<()> {
    serde_json::to_writer(writer, &GraphFile::from(g))
}

/// Graphviz rendering; every edge once, labelled `"pu|pv"`.
pub fn to_dot(g: &PortGraph) -> String {
    let mut out = String::from("graph G {\n");
    for v in g.nodes() {
        let _ = writeln!(out, "  {v};");
    }
    for (u, pu, v, pv) in g.edges() {
        let _ = writeln!(out, "  {u} -- {v} [label=\"{pu}|{pv}\"];");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{enumerate_graphs, gen_k2, gen_oriented_ring, Violation};

    #[test]
    fn k2_json() {
        let s = to_json_string(&gen_k2());
        assert_eq!(s, r#"{"n":2,"edges":[{"u":0,"pu":0,"v":1,"pv":0}]}"#);
        assert_eq!(from_json_str(&s).unwrap(), gen_k2());
    }

    #[test]
    fn writer_sorts_edges() {
        let ring = gen_oriented_ring(4).unwrap();
        let f = GraphFile::from(&ring);
        let keys: Vec<_> = f.edges.iter().map(|e| (e.u, e.pu)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(f.edges.len(), 4);
    }

    #[test]
    fn round_trip_on_corpus() {
        for g in enumerate_graphs(4).unwrap().step_by(37) {
            assert_eq!(from_json_str(&to_json_string(&g)).unwrap(), g);
        }
    }

    #[test]
    fn loader_checks_invariants() {
        let bad = r#"{"n":4,"edges":[{"u":0,"pu":0,"v":1,"pv":0},{"u":2,"pu":0,"v":3,"pv":0}]}"#;
        assert!(matches!(
            from_json_str(bad),
            Err(LoadError::Graph(GraphError::Invalid(Violation::Disconnected { .. })))
        ));
        assert!(matches!(from_json_str("{"), Err(LoadError::Json(_))));
    }

    #[test]
    fn dot_labels() {
        let dot = to_dot(&gen_k2());
        assert!(dot.contains("0 -- 1 [label=\"0|0\"];"));
    }
}
