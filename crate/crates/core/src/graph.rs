//! Undirected vertex-labeled graphs with deterministic text I/O.
//!
//! The text format is one record per line: `v <id> <label>` declares a vertex,
//! `e <src> <dst>` declares an undirected edge, `#` starts a comment. Vertex
//! ids must be dense `0..n-1`; labels are whitespace-free tokens. Directed or
//! repeated edge lines collapse to a single undirected edge; self-loops are
//! rejected.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
#[cfg(test)]
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type VertexId = u32;
pub type LabelId = u32;

/// Canonical undirected edge list: each pair ordered `u < w`, no duplicates.
pub type EdgeList = Vec<(VertexId, VertexId)>;

/// Bijection between raw label strings and dense ids `0..|Γ|-1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelInterner {
    names: Vec<String>,
    ids: HashMap<String, LabelId>,
}

impl LabelInterner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> LabelId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as LabelId;
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<LabelId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: LabelId) -> &str {
        &self.names[id as usize]
    }

    /// Number of distinct labels.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// All label names in id order.
    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Immutable undirected vertex-labeled graph.
///
/// Adjacency lists are sorted and symmetric; construction enforces the
/// invariants (no self-loops, no parallel edges, one label per vertex).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    labels: Vec<LabelId>,
    adjacency: Vec<Vec<VertexId>>,
    edge_count: usize,
    interner: LabelInterner,
}

impl LabeledGraph {
    /// Build a graph from per-vertex label strings and an edge list.
    ///
    /// Edges are symmetrized and deduplicated; labels are interned in vertex-id
    /// order so identical graphs produce identical ids.
    pub fn from_parts<S: AsRef<str>>(labels: &[S], edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let n = labels.len();
        let mut interner = LabelInterner::new();
        let label_ids: Vec<LabelId> = labels.iter().map(|s| interner.intern(s.as_ref())).collect();

        let mut adjacency = vec![Vec::new(); n];
        for &(u, w) in edges {
            if u == w {
                return Err(Error::Config(format!("self-loop on vertex {u}")));
            }
            if u as usize >= n || w as usize >= n {
                return Err(Error::Config(format!(
                    "edge ({u},{w}) references a vertex outside 0..{n}"
                )));
            }
            adjacency[u as usize].push(w);
            adjacency[w as usize].push(u);
        }
        let mut edge_count = 0;
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
            edge_count += adj.len();
        }
        edge_count /= 2;

        Ok(Self {
            labels: label_ids,
            adjacency,
            edge_count,
            interner,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of distinct labels present (|Γ|).
    pub fn label_count(&self) -> usize {
        self.interner.len()
    }

    pub fn label_of(&self, u: VertexId) -> LabelId {
        self.labels[u as usize]
    }

    pub fn label_name(&self, u: VertexId) -> &str {
        self.interner.name(self.labels[u as usize])
    }

    pub fn interner(&self) -> &LabelInterner {
        &self.interner
    }

    /// Sorted adjacency set of `u`. Panics on an out-of-range id.
    pub fn neighbors(&self, u: VertexId) -> &[VertexId] {
        assert!(
            (u as usize) < self.labels.len(),
            "vertex id {u} out of range (n = {})",
            self.labels.len()
        );
        &self.adjacency[u as usize]
    }

    pub fn degree(&self, u: VertexId) -> usize {
        self.neighbors(u).len()
    }

    pub fn has_edge(&self, u: VertexId, w: VertexId) -> bool {
        self.neighbors(u).binary_search(&w).is_ok()
    }

    /// Canonical edge list: pairs `(u, w)` with `u < w`, sorted.
    pub fn edges(&self) -> EdgeList {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.labels.len() as VertexId {
            for &w in &self.adjacency[u as usize] {
                if u < w {
                    out.push((u, w));
                }
            }
        }
        out
    }

    /// SHA-256 over a canonical byte stream of labels and edges.
    /// Two graphs hash equal iff they have the same labels and edge set.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(b"sigmatch-graph-v1");
        hasher.update((self.labels.len() as u64).to_le_bytes());
        for u in 0..self.labels.len() as VertexId {
            let name = self.label_name(u);
            hasher.update((name.len() as u32).to_le_bytes());
            hasher.update(name.as_bytes());
        }
        let edges = self.edges();
        hasher.update((edges.len() as u64).to_le_bytes());
        for (u, w) in edges {
            hasher.update(u.to_le_bytes());
            hasher.update(w.to_le_bytes());
        }
        hasher.finalize().into()
    }

    /// Parse the text format. `path` is used only for error messages.
    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let mut declared: HashMap<VertexId, (String, usize)> = HashMap::new();
        let mut edge_lines: Vec<(VertexId, VertexId, usize)> = Vec::new();

        let parse_id = |tok: &str, line: usize| -> Result<VertexId> {
            tok.parse::<VertexId>().map_err(|_| Error::Parse {
                path: path.to_owned(),
                line,
                message: format!("expected a non-negative vertex id, got {tok:?}"),
            })
        };

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let kind = tokens.next().unwrap();
            let rest: Vec<&str> = tokens.collect();
            match kind {
                "v" => {
                    if rest.len() != 2 {
                        return Err(Error::Parse {
                            path: path.to_owned(),
                            line,
                            message: "vertex record must be `v <id> <label>`".into(),
                        });
                    }
                    let id = parse_id(rest[0], line)?;
                    if declared.contains_key(&id) {
                        return Err(Error::Parse {
                            path: path.to_owned(),
                            line,
                            message: format!("duplicate declaration of vertex {id}"),
                        });
                    }
                    declared.insert(id, (rest[1].to_owned(), line));
                }
                "e" => {
                    if rest.len() != 2 {
                        return Err(Error::Parse {
                            path: path.to_owned(),
                            line,
                            message: "edge record must be `e <src> <dst>`".into(),
                        });
                    }
                    let u = parse_id(rest[0], line)?;
                    let w = parse_id(rest[1], line)?;
                    if u == w {
                        return Err(Error::Parse {
                            path: path.to_owned(),
                            line,
                            message: format!("self-loop on vertex {u}"),
                        });
                    }
                    edge_lines.push((u, w, line));
                }
                other => {
                    return Err(Error::Parse {
                        path: path.to_owned(),
                        line,
                        message: format!("unknown record type {other:?}"),
                    });
                }
            }
        }

        // There are exactly n declared ids, so any id >= n forces a gap in
        // 0..n; the second pass reports the smallest missing id.
        let n = declared.len();
        let mut labels: Vec<Option<String>> = vec![None; n];
        for (id, (label, _line)) in declared {
            if (id as usize) < n {
                labels[id as usize] = Some(label);
            }
        }
        let labels: Vec<String> = labels
            .into_iter()
            .enumerate()
            .map(|(k, l)| {
                l.ok_or(Error::MissingLabel {
                    path: path.to_owned(),
                    vertex: k as VertexId,
                })
            })
            .collect::<Result<_>>()?;

        for &(u, w, line) in &edge_lines {
            let bad = if u as usize >= n {
                Some(u)
            } else if w as usize >= n {
                Some(w)
            } else {
                None
            };
            if let Some(vertex) = bad {
                return Err(Error::DanglingEndpoint {
                    path: path.to_owned(),
                    line,
                    vertex,
                });
            }
        }

        let edges: Vec<(VertexId, VertexId)> =
            edge_lines.into_iter().map(|(u, w, _)| (u, w)).collect();
        Self::from_parts(&labels, &edges)
    }

    /// Render the canonical text form: v-lines in id order, then sorted e-lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for u in 0..self.labels.len() as VertexId {
            let _ = writeln!(out, "v {} {}", u, self.label_name(u));
        }
        for (u, w) in self.edges() {
            let _ = writeln!(out, "e {u} {w}");
        }
        out
    }
}

/// Load a graph from a text file.
pub fn load_graph(path: impl AsRef<Path>) -> Result<LabeledGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    LabeledGraph::from_text(&text, path)
}

/// Write a graph in the canonical text form; `load_graph` round-trips it exactly.
pub fn save_graph(g: &LabeledGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, g.to_text()).map_err(|e| Error::io(path, e))
}

/// Owned path helper for parse errors in tests and in-memory sources.
#[cfg(test)]
pub(crate) fn memory_path() -> PathBuf {
    PathBuf::from("<memory>")
}
