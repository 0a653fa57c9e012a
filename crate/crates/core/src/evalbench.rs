//! Evaluation machinery: scale-free graph generation, query extraction and
//! perturbation, the edge-retrieval accuracy metric, and the batch benchmark
//! protocol with per-query timing.
//!
//! The protocol measures how well matching survives noise: extract a small
//! connected query from the target graph, perturb it with one kind of edit
//! (relabel, vertex add/delete, edge add/delete), run the matcher, and score
//! the top match against the *unperturbed* query as ground truth.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, VertexId};
use crate::index::IndexSet;
use crate::matcher::{MatchResult, QueryContext};

/// How many fresh start vertices query extraction tries before giving up.
const EXTRACTION_ATTEMPTS: usize = 100;

/// SplitMix64 finalizer; decorrelates nearby seed values.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a base seed and a tag.
pub(crate) fn mix_seed(base: u64, tag: u64) -> u64 {
    splitmix64(base ^ splitmix64(tag))
}

// ---------------------------------------------------------------------------
// Noise taxonomy
// ---------------------------------------------------------------------------

/// The six query scenarios: unmodified, or one elementary edit kind applied
/// `noise_count` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum NoiseType {
    /// No perturbation.
    #[serde(rename = "exact")]
    Exact,
    /// Reassign a random vertex a different random label.
    #[serde(rename = "nLabel")]
    RelabelVertex,
    /// Add a vertex with a random label, attached to one random vertex.
    #[serde(rename = "nVAdd")]
    AddVertex,
    /// Delete a random non-cut vertex.
    #[serde(rename = "nVDel")]
    DeleteVertex,
    /// Add a random absent edge.
    #[serde(rename = "nEAdd")]
    AddEdge,
    /// Delete a random edge, keeping the query connected.
    #[serde(rename = "nEDel")]
    DeleteEdge,
}

impl NoiseType {
    pub const ALL: [NoiseType; 6] = [
        NoiseType::Exact,
        NoiseType::RelabelVertex,
        NoiseType::AddVertex,
        NoiseType::DeleteVertex,
        NoiseType::AddEdge,
        NoiseType::DeleteEdge,
    ];

    /// Scenario name used in reports and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            NoiseType::Exact => "exact",
            NoiseType::RelabelVertex => "nLabel",
            NoiseType::AddVertex => "nVAdd",
            NoiseType::DeleteVertex => "nVDel",
            NoiseType::AddEdge => "nEAdd",
            NoiseType::DeleteEdge => "nEDel",
        }
    }
}

impl fmt::Display for NoiseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for NoiseType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown noise type {s:?}; expected one of exact, nLabel, nVAdd, nVDel, nEAdd, nEDel"
                ))
            })
    }
}

/// Recipe for one benchmark query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuerySpec {
    /// Vertex count of the extracted query.
    pub size: usize,
    pub noise_type: NoiseType,
    /// Elementary edits applied; 0 exactly for `Exact`, otherwise 1 or 2.
    pub noise_count: usize,
    /// Base seed; extraction and perturbation derive their streams from it.
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// Query extraction
// ---------------------------------------------------------------------------

/// A connected query cut from a target graph, remembering where each query
/// vertex came from.
#[derive(Debug, Clone)]
pub struct ExtractedQuery {
    pub graph: LabeledGraph,
    /// `source_vertices[q]` is the target vertex that became query vertex `q`.
    pub source_vertices: Vec<VertexId>,
}

/// Cut a connected `size`-vertex query out of `g`: breadth-first exploration
/// from a random start with shuffled neighbor order, stopping at `size`
/// vertices; the query keeps all induced edges. Starts that cannot reach
/// `size` vertices are retried with a fresh random start.
pub fn extract_exact_query(g: &LabeledGraph, size: usize, seed: u64) -> Result<ExtractedQuery> {
    let n = g.vertex_count();
    if size == 0 || size > n {
        return Err(Error::Config(format!(
            "query size {size} not in 1..={n} for this graph"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..EXTRACTION_ATTEMPTS {
        let start = rng.random_range(0..n as u32);
        let mut visited = vec![false; n];
        let mut order: Vec<VertexId> = Vec::with_capacity(size);
        let mut queue = std::collections::VecDeque::new();
        visited[start as usize] = true;
        order.push(start);
        queue.push_back(start);
        while order.len() < size {
            let Some(u) = queue.pop_front() else {
                break; // component exhausted; try another start
            };
            let mut around: Vec<VertexId> = g.neighbors(u).to_vec();
            around.shuffle(&mut rng);
            for w in around {
                if order.len() == size {
                    break;
                }
                if !visited[w as usize] {
                    visited[w as usize] = true;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        if order.len() == size {
            return Ok(induce(g, order));
        }
    }
    Err(Error::QueryExhausted {
        size,
        attempts: EXTRACTION_ATTEMPTS,
    })
}

/// The subgraph of `g` induced on `order`, with query vertex `i` standing for
/// target vertex `order[i]`.
fn induce(g: &LabeledGraph, order: Vec<VertexId>) -> ExtractedQuery {
    let mut back = std::collections::HashMap::with_capacity(order.len());
    for (q, &v) in order.iter().enumerate() {
        back.insert(v, q as VertexId);
    }
    let labels: Vec<&str> = order.iter().map(|&v| g.label_name(v)).collect();
    let mut edges = Vec::new();
    for (q, &v) in order.iter().enumerate() {
        for &w in g.neighbors(v) {
            if let Some(&qw) = back.get(&w) {
                if (q as VertexId) < qw {
                    edges.push((q as VertexId, qw));
                }
            }
        }
    }
    let graph = LabeledGraph::from_parts(&labels, &edges)
        .expect("induced subgraph is always well-formed");
    ExtractedQuery {
        graph,
        source_vertices: order,
    }
}

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

/// A perturbed query plus a note for every edit that had to be skipped
/// (e.g. adding an edge to an already-complete query).
#[derive(Debug, Clone)]
pub struct PerturbOutcome {
    pub graph: LabeledGraph,
    /// Edits actually applied (= `noise_count` minus skips).
    pub applied: usize,
    pub warnings: Vec<String>,
}

/// Mutable query under edit: label names plus a canonical edge set. Small
/// (benchmark queries have ≤ ~15 vertices), so connectivity checks are just
/// breadth-first searches.
struct EditableQuery {
    labels: Vec<String>,
    edges: BTreeSet<(VertexId, VertexId)>,
}

impl EditableQuery {
    fn from_graph(g: &LabeledGraph) -> Self {
        EditableQuery {
            labels: (0..g.vertex_count() as VertexId)
                .map(|u| g.label_name(u).to_string())
                .collect(),
            edges: g.edges().into_iter().collect(),
        }
    }

    fn to_graph(&self) -> LabeledGraph {
        let edges: Vec<_> = self.edges.iter().copied().collect();
        LabeledGraph::from_parts(&self.labels, &edges)
            .expect("edit operations preserve well-formedness")
    }

    fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    fn neighbors(&self, u: VertexId) -> Vec<VertexId> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == u {
                    Some(b)
                } else if b == u {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Is the graph connected when `skip` is treated as absent?
    fn connected_without(&self, skip: Option<VertexId>) -> bool {
        let n = self.vertex_count();
        let alive = |u: VertexId| Some(u) != skip;
        let Some(start) = (0..n as VertexId).find(|&u| alive(u)) else {
            return true;
        };
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start as usize] = true;
        let mut count = 0;
        while let Some(u) = stack.pop() {
            count += 1;
            for w in self.neighbors(u) {
                if alive(w) && !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        count == (0..n as VertexId).filter(|&u| alive(u)).count()
    }

    fn connected(&self) -> bool {
        self.connected_without(None)
    }

    /// Drop vertex `u` and reindex the survivors densely, keeping their order.
    fn remove_vertex(&mut self, u: VertexId) {
        self.labels.remove(u as usize);
        let remap = |x: VertexId| if x > u { x - 1 } else { x };
        self.edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| a != u && b != u)
            .map(|&(a, b)| (remap(a), remap(b)))
            .collect();
    }

    /// Keep only the largest connected component (ties: the one containing
    /// the smallest vertex id), reindexing densely.
    fn keep_largest_component(&mut self) {
        let n = self.vertex_count();
        let mut component = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        for start in 0..n as VertexId {
            if component[start as usize] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut stack = vec![start];
            component[start as usize] = id;
            let mut size = 0;
            while let Some(u) = stack.pop() {
                size += 1;
                for w in self.neighbors(u) {
                    if component[w as usize] == usize::MAX {
                        component[w as usize] = id;
                        stack.push(w);
                    }
                }
            }
            sizes.push(size);
        }
        let Some(keep) = (0..sizes.len()).max_by_key(|&id| (sizes[id], usize::MAX - id)) else {
            return;
        };
        let mut new_id = vec![VertexId::MAX; n];
        let mut labels = Vec::with_capacity(sizes[keep]);
        for u in 0..n {
            if component[u] == keep {
                new_id[u] = labels.len() as VertexId;
                labels.push(std::mem::take(&mut self.labels[u]));
            }
        }
        self.edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| component[a as usize] == keep && component[b as usize] == keep)
            .map(|&(a, b)| (new_id[a as usize], new_id[b as usize]))
            .collect();
        self.labels = labels;
    }
}

/// Apply `spec.noise_count` seeded edits of `spec.noise_type` to `query`.
/// `label_universe` supplies replacement/new labels (the target graph's label
/// names). Edits that are impossible on the current graph are skipped with a
/// recorded warning; the result is always a valid connected graph.
pub fn perturb_query(
    query: &LabeledGraph,
    spec: &QuerySpec,
    label_universe: &[String],
) -> Result<PerturbOutcome> {
    match (spec.noise_type, spec.noise_count) {
        (NoiseType::Exact, 0) => {
            return Ok(PerturbOutcome {
                graph: query.clone(),
                applied: 0,
                warnings: Vec::new(),
            })
        }
        (NoiseType::Exact, c) => {
            return Err(Error::Config(format!(
                "exact queries take no edits, got noise_count {c}"
            )))
        }
        (_, c) if !(1..=2).contains(&c) => {
            return Err(Error::Config(format!(
                "noise_count must be 1 or 2, got {c}"
            )))
        }
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut q = EditableQuery::from_graph(query);
    let mut applied = 0;
    let mut warnings = Vec::new();
    for _ in 0..spec.noise_count {
        let skipped = match spec.noise_type {
            NoiseType::Exact => unreachable!("handled above"),
            NoiseType::RelabelVertex => relabel_vertex(&mut q, label_universe, &mut rng),
            NoiseType::AddVertex => add_vertex(&mut q, label_universe, &mut rng),
            NoiseType::DeleteVertex => delete_vertex(&mut q, &mut rng),
            NoiseType::AddEdge => add_edge(&mut q, &mut rng),
            NoiseType::DeleteEdge => delete_edge(&mut q, &mut rng),
        };
        match skipped {
            None => applied += 1,
            Some(reason) => warnings.push(format!("{} skipped: {reason}", spec.noise_type)),
        }
    }
    debug_assert!(q.connected());
    Ok(PerturbOutcome {
        graph: q.to_graph(),
        applied,
        warnings,
    })
}

/// Each edit returns `None` on success or `Some(reason)` when impossible.
fn relabel_vertex(
    q: &mut EditableQuery,
    universe: &[String],
    rng: &mut ChaCha8Rng,
) -> Option<String> {
    if q.vertex_count() == 0 {
        return Some("query has no vertices".into());
    }
    let u = rng.random_range(0..q.vertex_count());
    let choices: Vec<&String> = universe.iter().filter(|l| **l != q.labels[u]).collect();
    if choices.is_empty() {
        return Some("label universe has no alternative label".into());
    }
    q.labels[u] = choices[rng.random_range(0..choices.len())].clone();
    None
}

fn add_vertex(q: &mut EditableQuery, universe: &[String], rng: &mut ChaCha8Rng) -> Option<String> {
    if q.vertex_count() == 0 {
        return Some("query has no vertices to attach to".into());
    }
    if universe.is_empty() {
        return Some("label universe is empty".into());
    }
    let label = universe[rng.random_range(0..universe.len())].clone();
    let anchor = rng.random_range(0..q.vertex_count()) as VertexId;
    let new = q.vertex_count() as VertexId;
    q.labels.push(label);
    q.edges.insert((anchor, new));
    None
}

fn delete_vertex(q: &mut EditableQuery, rng: &mut ChaCha8Rng) -> Option<String> {
    if q.vertex_count() <= 1 {
        return Some("query would become empty".into());
    }
    let safe: Vec<VertexId> = (0..q.vertex_count() as VertexId)
        .filter(|&u| q.connected_without(Some(u)))
        .collect();
    if safe.is_empty() {
        // No non-cut vertex (possible only on degenerate inputs): delete an
        // arbitrary one and keep the largest remaining component.
        let u = rng.random_range(0..q.vertex_count()) as VertexId;
        q.remove_vertex(u);
        q.keep_largest_component();
    } else {
        let u = safe[rng.random_range(0..safe.len())];
        q.remove_vertex(u);
    }
    None
}

fn add_edge(q: &mut EditableQuery, rng: &mut ChaCha8Rng) -> Option<String> {
    let n = q.vertex_count() as VertexId;
    let mut absent = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if !q.edges.contains(&(a, b)) {
                absent.push((a, b));
            }
        }
    }
    if absent.is_empty() {
        return Some("query is complete".into());
    }
    let pick = absent[rng.random_range(0..absent.len())];
    q.edges.insert(pick);
    None
}

fn delete_edge(q: &mut EditableQuery, rng: &mut ChaCha8Rng) -> Option<String> {
    if q.edges.is_empty() {
        return Some("query has no edges".into());
    }
    let all: Vec<(VertexId, VertexId)> = q.edges.iter().copied().collect();
    let safe: Vec<(VertexId, VertexId)> = all
        .iter()
        .copied()
        .filter(|e| {
            q.edges.remove(e);
            let ok = q.connected();
            q.edges.insert(*e);
            ok
        })
        .collect();
    if !safe.is_empty() {
        q.edges.remove(&safe[rng.random_range(0..safe.len())]);
    } else {
        // Every edge is a bridge: cut one anyway and keep the larger side.
        q.edges.remove(&all[rng.random_range(0..all.len())]);
        q.keep_largest_component();
    }
    None
}

// ---------------------------------------------------------------------------
// Accuracy
// ---------------------------------------------------------------------------

/// Fraction of ground-truth query edges whose unordered endpoint-label pair
/// is covered by the match's induced target edges, each retrieved edge
/// consumable once (multiset intersection).
///
/// Degenerate cases: an empty match scores 0; a ground truth with no edges
/// scores 1 when some matched target vertex carries a ground-truth label,
/// else 0.
pub fn edge_retrieval_accuracy(
    ground_truth: &LabeledGraph,
    m: &MatchResult,
    target: &LabeledGraph,
) -> f64 {
    if m.pairs.is_empty() {
        return 0.0;
    }
    let label_pair = |g: &LabeledGraph, u: VertexId, w: VertexId| -> (String, String) {
        let a = g.label_name(u);
        let b = g.label_name(w);
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    };
    let mut wanted: Vec<(String, String)> = ground_truth
        .edges()
        .into_iter()
        .map(|(u, w)| label_pair(ground_truth, u, w))
        .collect();
    if wanted.is_empty() {
        let query_labels: BTreeSet<&str> = (0..ground_truth.vertex_count() as VertexId)
            .map(|u| ground_truth.label_name(u))
            .collect();
        let hit = m
            .pairs
            .values()
            .any(|&v| query_labels.contains(target.label_name(v)));
        return if hit { 1.0 } else { 0.0 };
    }
    let mut got: Vec<(String, String)> = m
        .matched_edges
        .iter()
        .map(|&(u, w)| label_pair(target, u, w))
        .collect();
    wanted.sort_unstable();
    got.sort_unstable();

    let mut covered = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < wanted.len() && j < got.len() {
        match wanted[i].cmp(&got[j]) {
            std::cmp::Ordering::Equal => {
                covered += 1;
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    covered as f64 / wanted.len() as f64
}

// ---------------------------------------------------------------------------
// Scale-free generator
// ---------------------------------------------------------------------------

/// Preferential-attachment graph: `m = ceil(avg_degree / 2)` seed vertices,
/// then each arriving vertex attaches to `m` distinct existing vertices drawn
/// proportionally to their degree (the first arrival connects to all seeds).
/// Labels `L0..L{num_labels-1}` are assigned uniformly at random. Edge count
/// is exactly `m * (n - m)`; deterministic per seed.
pub fn generate_barabasi_albert(
    n: usize,
    avg_degree: usize,
    num_labels: usize,
    seed: u64,
) -> Result<LabeledGraph> {
    if avg_degree == 0 {
        return Err(Error::Config("avg_degree must be at least 1".into()));
    }
    if num_labels == 0 {
        return Err(Error::Config("num_labels must be at least 1".into()));
    }
    let m = avg_degree.div_ceil(2);
    if n <= m {
        return Err(Error::Config(format!(
            "n must exceed the {m} attachment edges per vertex, got n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut edges: Vec<(VertexId, VertexId)> = Vec::with_capacity(m * (n - m));
    // One entry per edge endpoint; picking uniformly from this list is
    // picking a vertex proportionally to its degree.
    let mut endpoints: Vec<VertexId> = Vec::with_capacity(2 * m * (n - m));
    let mut targets: Vec<VertexId> = (0..m as VertexId).collect();
    for v in m as VertexId..n as VertexId {
        for &t in &targets {
            edges.push((t, v));
        }
        endpoints.extend_from_slice(&targets);
        endpoints.extend(std::iter::repeat_n(v, m));
        if (v as usize) + 1 < n {
            targets = distinct_sample(&endpoints, m, &mut rng);
        }
    }

    let labels: Vec<String> = (0..n)
        .map(|_| format!("L{}", rng.random_range(0..num_labels)))
        .collect();
    LabeledGraph::from_parts(&labels, &edges)
}

/// `m` distinct vertices drawn uniformly (with rejection) from a degree-
/// weighted endpoint list.
fn distinct_sample(endpoints: &[VertexId], m: usize, rng: &mut ChaCha8Rng) -> Vec<VertexId> {
    let mut picked: Vec<VertexId> = Vec::with_capacity(m);
    while picked.len() < m {
        let candidate = endpoints[rng.random_range(0..endpoints.len())];
        if !picked.contains(&candidate) {
            picked.push(candidate);
        }
    }
    picked
}

// ---------------------------------------------------------------------------
// Benchmark protocol
// ---------------------------------------------------------------------------

/// The query corpus shape: every (size, noise type) cell gets
/// `queries_per_cell` queries. The full protocol is 6 sizes x 6 types x 20
/// queries = 720.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub sizes: Vec<usize>,
    pub noise_types: Vec<NoiseType>,
    pub queries_per_cell: usize,
    pub master_seed: u64,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            sizes: vec![3, 5, 7, 9, 11, 13],
            noise_types: NoiseType::ALL.to_vec(),
            queries_per_cell: 20,
            master_seed: 0,
        }
    }
}

/// One corpus entry: the recipe, the exact base with provenance, and the
/// query actually posed (perturbed unless the scenario is `exact`).
#[derive(Debug, Clone)]
pub struct GeneratedQuery {
    pub spec: QuerySpec,
    pub exact: ExtractedQuery,
    pub query: LabeledGraph,
    pub warnings: Vec<String>,
}

/// Build the query for cell `(size, noise_type)`, member `index_in_cell`.
/// Deterministic in all arguments; noise counts alternate 1, 2, 1, 2, ...
/// within a cell so both permitted levels are exercised.
pub fn build_query(
    g: &LabeledGraph,
    size: usize,
    noise_type: NoiseType,
    index_in_cell: usize,
    master_seed: u64,
) -> Result<GeneratedQuery> {
    let type_tag = NoiseType::ALL
        .iter()
        .position(|t| *t == noise_type)
        .expect("noise type is one of ALL") as u64;
    let seed = mix_seed(
        mix_seed(mix_seed(master_seed, size as u64), type_tag),
        index_in_cell as u64,
    );
    let noise_count = match noise_type {
        NoiseType::Exact => 0,
        _ => 1 + index_in_cell % 2,
    };
    let spec = QuerySpec {
        size,
        noise_type,
        noise_count,
        seed,
    };
    let exact = extract_exact_query(g, size, mix_seed(seed, 0))?;
    let perturbed = perturb_query(
        &exact.graph,
        &spec,
        g.interner().names(),
    )?;
    Ok(GeneratedQuery {
        spec,
        exact,
        query: perturbed.graph,
        warnings: perturbed.warnings,
    })
}

/// One benchmark measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub query_id: u32,
    pub size: usize,
    pub noise_type: NoiseType,
    pub noise_count: usize,
    pub seed: u64,
    /// Edge-retrieval accuracy of the rank-1 match against the exact base.
    pub accuracy: f64,
    /// Online wall time (seed scoring + expansion) only.
    pub latency_s: f64,
    pub matched_vertices: usize,
    pub matched_edges: usize,
}

/// All rows of one protocol run plus any perturbation warnings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub warnings: Vec<String>,
    pub k: usize,
    pub master_seed: u64,
}

impl BenchmarkReport {
    pub fn mean_accuracy(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.accuracy))
    }

    pub fn mean_latency_s(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.latency_s))
    }

    pub fn mean_accuracy_for(&self, t: NoiseType) -> f64 {
        mean(self
            .rows
            .iter()
            .filter(|r| r.noise_type == t)
            .map(|r| r.accuracy))
    }

    /// Render the report as CSV. `zero_latency` writes 0 in the latency
    /// column so two runs of the same corpus compare byte-identically.
    pub fn to_csv(&self, zero_latency: bool) -> String {
        use std::fmt::Write;
        let mut out = String::from(
            "query_id,size,noise_type,noise_count,seed,accuracy,latency_s,matched_vertices,matched_edges\n",
        );
        for r in &self.rows {
            let latency = if zero_latency { 0.0 } else { r.latency_s };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.query_id,
                r.size,
                r.noise_type,
                r.noise_count,
                r.seed,
                r.accuracy,
                latency,
                r.matched_vertices,
                r.matched_edges
            );
        }
        out
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Run the protocol against an indexed target graph. Queries run one after
/// another so per-query latency is clean; the scoring inside each query uses
/// all configured workers.
pub fn run_benchmark(index: &IndexSet, protocol: &Protocol, k: usize) -> Result<BenchmarkReport> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if protocol.queries_per_cell == 0 {
        return Err(Error::Config("queries_per_cell must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut query_id = 0u32;
    for &size in &protocol.sizes {
        for &noise_type in &protocol.noise_types {
            for j in 0..protocol.queries_per_cell {
                let item = build_query(&index.graph, size, noise_type, j, protocol.master_seed)?;
                for w in &item.warnings {
                    warnings.push(format!("query {query_id}: {w}"));
                }

                let started = Instant::now();
                let matches = QueryContext::new(index, &item.query).top_k(k)?;
                let latency_s = started.elapsed().as_secs_f64();

                let (accuracy, matched_vertices, matched_edges) = match matches.first() {
                    Some(best) => (
                        edge_retrieval_accuracy(&item.exact.graph, best, &index.graph),
                        best.pairs.len(),
                        best.matched_edges.len(),
                    ),
                    None => (0.0, 0, 0),
                };
                rows.push(BenchmarkRow {
                    query_id,
                    size,
                    noise_type,
                    noise_count: item.spec.noise_count,
                    seed: item.spec.seed,
                    accuracy,
                    latency_s,
                    matched_vertices,
                    matched_edges,
                });
                query_id += 1;
            }
        }
    }
    Ok(BenchmarkReport {
        rows,
        warnings,
        k,
        master_seed: protocol.master_seed,
    })
}
