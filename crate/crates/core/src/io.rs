//! Edge-list and partition text formats.
//!
//! Edge lists hold one edge per line as two whitespace-separated node names;
//! `#` starts a comment and blank lines are skipped. Input is treated as
//! undirected: `a b` and `b a` collapse into one edge. Self-loops are rejected.
//!
//! Partition files hold `node<TAB>community` per line, every node exactly once.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::partition::Partition;

/// A graph together with the external names of its nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedGraph {
    pub graph: Graph,
    pub names: NodeNames,
}

/// Bidirectional map between node names and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeNames {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl NodeNames {
    /// Names `"0"`, `"1"`, ... for graphs built in memory.
    pub fn numeric(n: usize) -> Self {
        let mut names = Self::default();
        for v in 0..n {
            names.intern(&v.to_string());
        }
        names
    }

    fn intern(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v]
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }
}

impl NamedGraph {
    pub fn numeric(graph: Graph) -> Self {
        let names = NodeNames::numeric(graph.node_count());
        Self { graph, names }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn content(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
    .trim()
}

fn collect_edges<R: BufRead>(
    reader: R,
    mut resolve: impl FnMut(&str, usize) -> Result<NodeId>,
) -> Result<Vec<(NodeId, NodeId)>> {
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let body = content(&line);
        if body.is_empty() {
            continue;
        }
        let mut fields = body.split_whitespace();
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(lineno, "expected exactly two node names")),
        };
        if a == b {
            return Err(parse_err(lineno, format!("self-loop on {a}")));
        }
        let u = resolve(a, lineno)?;
        let v = resolve(b, lineno)?;
        edges.push((u.min(v), u.max(v)));
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(edges)
}

/// Reads an edge list; nodes are numbered in order of first appearance.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<NamedGraph> {
    let mut names = NodeNames::default();
    let edges = collect_edges(reader, |name, _| Ok(names.intern(name)))?;
    let mut graph = Graph::new(names.len());
    for (u, v) in edges {
        graph.add_edge(u, v)?;
    }
    Ok(NamedGraph { graph, names })
}

/// Reads an edge list over a known node universe. Names outside it are errors;
/// universe nodes absent from the file stay isolated.
pub fn read_edge_list_in<R: BufRead>(reader: R, names: &NodeNames) -> Result<Graph> {
    let edges = collect_edges(reader, |name, line| {
        names
            .id(name)
            .ok_or_else(|| parse_err(line, format!("unknown node {name}")))
    })?;
    Graph::from_edges(names.len(), edges)
}

pub fn write_edge_list<W: Write>(mut w: W, graph: &Graph, names: &NodeNames) -> Result<()> {
    for (u, v) in graph.edges() {
        writeln!(w, "{} {}", names.name(u), names.name(v))?;
    }
    Ok(())
}

/// Reads `node<TAB>community` lines. Any whitespace separates the two fields.
pub fn read_partition<R: BufRead>(reader: R, names: &NodeNames) -> Result<Partition> {
    let mut raw: Vec<Option<usize>> = vec![None; names.len()];
    let mut community_ids: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let body = content(&line);
        if body.is_empty() {
            continue;
        }
        let mut fields = body.split_whitespace();
        let (node, comm) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(lineno, "expected node and community")),
        };
        let v = names
            .id(node)
            .ok_or_else(|| parse_err(lineno, format!("unknown node {node}")))?;
        if raw[v].is_some() {
            return Err(parse_err(lineno, format!("node {node} listed twice")));
        }
        let next = community_ids.len();
        raw[v] = Some(*community_ids.entry(comm.to_owned()).or_insert(next));
    }
    let found = raw.iter().filter(|r| r.is_some()).count();
    if found != names.len() {
        return Err(Error::UniverseMismatch {
            expected: names.len(),
            found,
        });
    }
    Ok(Partition::from_labels(
        raw.into_iter().map(Option::unwrap).collect::<Vec<_>>(),
    ))
}

pub fn write_partition<W: Write>(mut w: W, partition: &Partition, names: &NodeNames) -> Result<()> {
    for v in 0..partition.node_count() {
        writeln!(w, "{}\t{}", names.name(v), partition.label(v))?;
    }
    Ok(())
}
