//! Online query answering: seed candidate pairs, greedy heap-driven region
//! growth, and top-k match assembly.
//!
//! A session seeds one max-heap with every label-equal (target, query) vertex
//! pair, scored by the chi-square statistic of its two-hop symbol sequence.
//! The best seed opens a match; a secondary heap grows the match outward
//! through label-equal neighbor pairs until it covers the query or runs out
//! of frontier. Target vertices are consumed for the whole session, so the k
//! matches occupy disjoint regions of the target graph.

use std::collections::BinaryHeap;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeList, LabeledGraph, VertexId};
use crate::index::{AlignedLcv, IndexSet, InvertedLabelIndex};
use crate::similarity::ScoringContext;

/// A label-equal (target, query) vertex pair, not yet scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidatePair {
    pub target: VertexId,
    pub query: VertexId,
}

/// One approximate match: an injective partial map from query vertices to
/// target vertices, the target edges induced on its image, and the sum of the
/// members' chi-square scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    /// 1-based emission rank; matches come out in non-increasing seed score.
    pub rank: usize,
    /// Sum of the chi-square scores of all member pairs.
    pub aggregate_score: f64,
    /// query vertex -> target vertex, at most one entry per side.
    pub pairs: BTreeMap<VertexId, VertexId>,
    /// Target edges with both endpoints matched, canonical and sorted.
    pub matched_edges: EdgeList,
}

/// Heap entry ordering: higher chi-square first, then higher similarity, then
/// the smaller query id, then the smaller target id. Total and deterministic.
#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    score: f64,
    eta: f64,
    query: VertexId,
    target: VertexId,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| self.eta.total_cmp(&other.eta))
            .then_with(|| other.query.cmp(&self.query))
            .then_with(|| other.target.cmp(&self.target))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Everything one query session needs against a fixed target index: the
/// query graph, its inverted label index, and its count vectors aligned to
/// the target's label universe.
pub struct QueryContext<'a> {
    index: &'a IndexSet,
    query: &'a LabeledGraph,
    query_inverted: InvertedLabelIndex,
    aligned: AlignedLcv,
}

impl<'a> QueryContext<'a> {
    pub fn new(index: &'a IndexSet, query: &'a LabeledGraph) -> Self {
        QueryContext {
            index,
            query,
            query_inverted: InvertedLabelIndex::build(query),
            aligned: AlignedLcv::build(query, index.graph.interner()),
        }
    }

    fn scoring(&self) -> ScoringContext<'_> {
        ScoringContext {
            target: &self.index.graph,
            query: self.query,
            target_lcv: &self.index.indexes.lcv,
            query_lcv: &self.aligned,
            stats: &self.index.stats,
            table: &self.index.table,
            gamma: self.index.config.gamma,
            mode: self.index.config.mode,
        }
    }

    /// Chi-square score and first-order similarity of one (target, query)
    /// vertex pair.
    pub fn score_pair(&self, target: VertexId, query: VertexId) -> (f64, f64) {
        self.scoring().score_pair(target, query)
    }

    /// All label-equal (target, query) pairs, in (query label, query id,
    /// target id) order. Empty when the label universes are disjoint.
    pub fn candidate_pairs(&self) -> Vec<CandidatePair> {
        let mut pairs = Vec::new();
        for (query_label, name) in self.query.interner().names().iter().enumerate() {
            let Some(target_label) = self.index.graph.interner().get(name) else {
                continue;
            };
            let targets = self.index.indexes.inverted.vertices(target_label);
            for &q in self.query_inverted.vertices(query_label as u32) {
                for &v in targets {
                    pairs.push(CandidatePair {
                        target: v,
                        query: q,
                    });
                }
            }
        }
        pairs
    }

    /// Run the session: grow up to `k` matches in descending seed order.
    pub fn top_k(&self, k: usize) -> Result<Vec<MatchResult>> {
        Ok(self.top_k_counted(k)?.0)
    }

    /// As [`top_k`](Self::top_k), also reporting secondary-heap pushes per
    /// match (the growth effort).
    fn top_k_counted(&self, k: usize) -> Result<(Vec<MatchResult>, Vec<u64>)> {
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let ctx = self.scoring();

        // Seed scoring is the bulk of the online cost; pairs are independent.
        let pairs = self.candidate_pairs();
        let seeds: Vec<HeapEntry> = pairs
            .par_iter()
            .map(|p| {
                let (score, eta) = ctx.score_pair(p.target, p.query);
                HeapEntry {
                    score,
                    eta,
                    query: p.query,
                    target: p.target,
                }
            })
            .collect();
        let mut primary: BinaryHeap<HeapEntry> = BinaryHeap::from(seeds);

        let mut done = vec![false; self.index.graph.vertex_count()];
        let mut matches = Vec::new();
        let mut efforts = Vec::new();

        while matches.len() < k {
            // Stale entries (done targets) are skipped lazily at pop time.
            let Some(seed) = pop_valid(&mut primary, &done, None) else {
                break;
            };
            let (result, pushes) = self.grow_match(&ctx, seed, &mut done, matches.len() + 1);
            matches.push(result);
            efforts.push(pushes);
        }
        Ok((matches, efforts))
    }

    /// Grow one match from `seed`: repeatedly add the best label-equal
    /// frontier pair until the query is covered or the frontier is exhausted.
    fn grow_match(
        &self,
        ctx: &ScoringContext<'_>,
        seed: HeapEntry,
        done: &mut [bool],
        rank: usize,
    ) -> (MatchResult, u64) {
        let mut matched_query = vec![false; self.query.vertex_count()];
        let mut pairs = BTreeMap::new();
        let mut aggregate_score = 0.0;
        let mut secondary: BinaryHeap<HeapEntry> = BinaryHeap::new();
        let mut pushes = 0u64;

        let admit = |entry: HeapEntry,
                         done: &mut [bool],
                         matched_query: &mut [bool],
                         pairs: &mut BTreeMap<VertexId, VertexId>,
                         aggregate_score: &mut f64| {
            done[entry.target as usize] = true;
            matched_query[entry.query as usize] = true;
            pairs.insert(entry.query, entry.target);
            *aggregate_score += entry.score;
        };

        admit(
            seed,
            done,
            &mut matched_query,
            &mut pairs,
            &mut aggregate_score,
        );
        let mut frontier = vec![seed];

        while pairs.len() < self.query.vertex_count() {
            // Expand every pair added since the last round.
            for added in frontier.drain(..) {
                for &q2 in self.query.neighbors(added.query) {
                    if matched_query[q2 as usize] {
                        continue;
                    }
                    let want = self.query.label_name(q2);
                    for &v2 in self.index.graph.neighbors(added.target) {
                        if done[v2 as usize] || self.index.graph.label_name(v2) != want {
                            continue;
                        }
                        let (score, eta) = ctx.score_pair(v2, q2);
                        secondary.push(HeapEntry {
                            score,
                            eta,
                            query: q2,
                            target: v2,
                        });
                        pushes += 1;
                    }
                }
            }
            let Some(next) = pop_valid(&mut secondary, done, Some(&matched_query)) else {
                break;
            };
            admit(
                next,
                done,
                &mut matched_query,
                &mut pairs,
                &mut aggregate_score,
            );
            frontier.push(next);
        }

        let matched_edges = induced_edges(&self.index.graph, &pairs);
        (
            MatchResult {
                rank,
                aggregate_score,
                pairs,
                matched_edges,
            },
            pushes,
        )
    }
}

/// Pop the best entry whose target is not done and (when growing a match)
/// whose query vertex is still free.
fn pop_valid(
    heap: &mut BinaryHeap<HeapEntry>,
    done: &[bool],
    matched_query: Option<&[bool]>,
) -> Option<HeapEntry> {
    while let Some(entry) = heap.pop() {
        if done[entry.target as usize] {
            continue;
        }
        if let Some(mq) = matched_query {
            if mq[entry.query as usize] {
                continue;
            }
        }
        return Some(entry);
    }
    None
}

/// All target edges whose endpoints are both in the image of `pairs`,
/// canonical (`src < dst`) and sorted.
pub fn induced_edges(g: &LabeledGraph, pairs: &BTreeMap<VertexId, VertexId>) -> EdgeList {
    let image: std::collections::HashSet<VertexId> = pairs.values().copied().collect();
    let mut edges: EdgeList = Vec::new();
    for &v in &image {
        for &w in g.neighbors(v) {
            if v < w && image.contains(&w) {
                edges.push((v, w));
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// One-call entry point: build the query-side context and run the session.
pub fn top_k(index: &IndexSet, query: &LabeledGraph, k: usize) -> Result<Vec<MatchResult>> {
    QueryContext::new(index, query).top_k(k)
}

/// Plain-text form of a match list:
///
/// ```text
/// 1 match
/// match 1 12.5
/// m 0 17
/// me 17 21
/// ```
///
/// `m` lines map query to target vertex in query-id order; `me` lines are the
/// induced target edges.
pub fn render_matches(results: &[MatchResult]) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let noun = if results.len() == 1 { "match" } else { "matches" };
    let _ = writeln!(out, "{} {noun}", results.len());
    for m in results {
        let _ = writeln!(out, "match {} {}", m.rank, m.aggregate_score);
        for (q, v) in &m.pairs {
            let _ = writeln!(out, "m {q} {v}");
        }
        for (src, dst) in &m.matched_edges {
            let _ = writeln!(out, "me {src} {dst}");
        }
    }
    out
}
