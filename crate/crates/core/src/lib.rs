//! Top-k approximate subgraph matching for vertex-labeled graphs.
//!
//! Given a target graph and a small query graph, the engine finds the k
//! best-matching target subgraphs. A candidate vertex pair is scored by how
//! *statistically surprising* the similarity of its two-hop neighborhood is:
//! an offline pass measures the distribution of a neighborhood-label
//! similarity over all vertex pairs of the target, deviations are bucketed
//! into symbols whose expected frequencies come from a one-sided tail bound,
//! and a candidate match is ranked by the chi-square statistic of its observed
//! symbols against those expectations.
//!
//! Pipeline:
//!
//! 1. [`graph`] — vertex-labeled undirected graphs and their text format.
//! 2. [`index`] — offline artifacts: label indexes, the similarity
//!    distribution, the symbol table, and binary persistence.
//! 3. [`similarity`] — the similarity score, symbolization, and chi-square.
//! 4. [`matcher`] — online top-k expansion of candidate pairs.
//! 5. [`evalbench`] — graph/query generators, perturbations, and the
//!    benchmark protocol.

pub mod config;
pub mod error;
pub mod evalbench;
pub mod graph;
pub mod index;
pub mod matcher;
pub mod similarity;

pub use config::EngineConfig;
pub use error::{Error, Result};
pub use graph::{load_graph, save_graph, LabelId, LabeledGraph, VertexId};
pub use index::{
    build_index, build_indexes, build_symbol_table, compute_distribution, load_index,
    persist_index, AlignedLcv, DistributionStats, GraphIndexes, IndexSet, OfflineConfig,
    SymbolTable,
};
pub use matcher::{render_matches, top_k, CandidatePair, MatchResult, QueryContext};
pub use similarity::{
    chi_square, symbolize, vertex_similarity, ScoringContext, SimilarityMode, SymbolId,
    SymbolSequence,
};
