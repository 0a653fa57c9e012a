//! Vertex-pair similarity, symbolization, greedy two-hop mapping, and the
//! chi-square statistic.
//!
//! The similarity of a target vertex `u` against a query vertex `v` is an
//! asymmetric neighborhood-recall score: with `I` the overlap of the two
//! neighborhood label multisets and `D` the query-side labels missing from the
//! target side,
//!
//! ```text
//! eta(u, v) = I / (I + D^gamma)
//! ```
//!
//! Extra target-side labels never lower the score; unmatched query-side labels
//! are penalized exponentially by `gamma`.

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, VertexId};
use crate::index::{AlignedLcv, DistributionStats, LabelCountVectors, SymbolTable};

/// Neighborhood label semantics for the similarity score.
///
/// `Multiset` keeps occurrence counts (overlap via element-wise minimum);
/// `Set` collapses counts to presence bits. Multiset is the default; Set
/// exists for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityMode {
    #[default]
    Multiset,
    Set,
}

/// Overlap `I` and query-side deficit `D` of two label-count vectors.
///
/// Panics if the vectors have different lengths; both sides must be built
/// over the same label universe.
pub fn tversky_components(target: &[u32], query: &[u32], mode: SimilarityMode) -> (u64, u64) {
    assert_eq!(
        target.len(),
        query.len(),
        "label-count vectors must share one label universe"
    );
    let mut overlap = 0u64;
    let mut deficit = 0u64;
    match mode {
        SimilarityMode::Multiset => {
            for (&t, &q) in target.iter().zip(query) {
                overlap += t.min(q) as u64;
                deficit += q.saturating_sub(t) as u64;
            }
        }
        SimilarityMode::Set => {
            for (&t, &q) in target.iter().zip(query) {
                let t = (t > 0) as u64;
                let q = (q > 0) as u64;
                overlap += t & q;
                deficit += q & (1 - t);
            }
        }
    }
    (overlap, deficit)
}

/// Evaluate `I / (I + D^gamma)` from precomputed counts.
pub fn eta_from_counts(overlap: u64, deficit: u64, gamma: f64) -> f64 {
    if overlap == 0 {
        return 0.0;
    }
    let i = overlap as f64;
    i / (i + (deficit as f64).powf(gamma))
}

/// Multiset vertex similarity of a target-side count vector against a
/// query-side count vector. Result is in `[0, 1]`; equals 1 exactly when the
/// query multiset is contained in the target multiset.
pub fn vertex_similarity(target: &[u32], query: &[u32], gamma: f64) -> f64 {
    vertex_similarity_with(target, query, gamma, SimilarityMode::Multiset)
}

pub fn vertex_similarity_with(
    target: &[u32],
    query: &[u32],
    gamma: f64,
    mode: SimilarityMode,
) -> f64 {
    let (i, d) = tversky_components(target, query, mode);
    eta_from_counts(i, d, gamma)
}

/// One-based index into a [`SymbolTable`]. `sigma_1` is the fold-in bucket for
/// below-mean and near-mean deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(u32);

impl SymbolId {
    pub const SIGMA_1: SymbolId = SymbolId(1);

    pub fn from_rank(rank: u32) -> Self {
        debug_assert!(rank >= 1);
        SymbolId(rank)
    }

    /// One-based rank `i` of `sigma_i`.
    pub fn rank(self) -> u32 {
        self.0
    }
}

/// Map a similarity score to its deviation symbol.
///
/// Scores at or below the mean fold into `sigma_1`; standardized deviations
/// below `1 + kappa` also land in `sigma_1`; beyond that each symbol covers a
/// half-open `kappa`-wide band, clamped to `sigma_tau` for deviations past the
/// offline maximum.
pub fn symbolize(eta: f64, stats: &DistributionStats, table: &SymbolTable) -> SymbolId {
    if stats.delta == 0.0 || eta <= stats.psi {
        return SymbolId::SIGMA_1;
    }
    let t = (eta - stats.psi) / stats.delta;
    if t < 1.0 + table.kappa() {
        return SymbolId::SIGMA_1;
    }
    let band = ((t - 1.0) / table.kappa()).floor();
    // Cast saturates for absurdly large deviations; the clamp below caps at tau.
    let rank = (band as u64).saturating_add(1).min(table.tau() as u64);
    SymbolId::from_rank(rank as u32)
}

/// Chi-square goodness-of-fit of a symbol sequence against the table's
/// expected occurrence probabilities: `sum_i (O_i - E_i)^2 / E_i` with
/// `E_i = len * Pr(sigma_i)` over all `tau` symbols.
pub fn chi_square(symbols: &[SymbolId], table: &SymbolTable) -> Result<f64> {
    if symbols.is_empty() {
        return Err(Error::EmptySequence);
    }
    let len = symbols.len() as f64;
    let mut ranks: Vec<u32> = symbols.iter().map(|s| s.rank()).collect();
    ranks.sort_unstable();

    // Unobserved symbols contribute (0 - E_i)^2 / E_i = E_i and the E_i sum to
    // len, so the dense sum collapses to a pass over observed symbols only.
    let mut value = len;
    let mut i = 0;
    while i < ranks.len() {
        let rank = ranks[i];
        let mut run = 1;
        while i + run < ranks.len() && ranks[i + run] == rank {
            run += 1;
        }
        let observed = run as f64;
        let expected = len * table.probability(rank);
        value += (observed - expected) * (observed - expected) / expected - expected;
        i += run;
    }
    Ok(value.max(0.0))
}

/// The two-hop symbol fingerprint of one candidate pair: the pair's own
/// symbol followed by one symbol per query neighbor in greedy-mapping order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    pub target: VertexId,
    pub query: VertexId,
    pub symbols: Vec<SymbolId>,
}

/// Borrowed view of everything needed to score candidate pairs between one
/// target graph and one query graph. All fields are immutable; scoring is safe
/// to run concurrently for many pairs.
#[derive(Clone, Copy)]
pub struct ScoringContext<'a> {
    pub target: &'a LabeledGraph,
    pub query: &'a LabeledGraph,
    pub target_lcv: &'a LabelCountVectors,
    pub query_lcv: &'a AlignedLcv,
    pub stats: &'a DistributionStats,
    pub table: &'a SymbolTable,
    pub gamma: f64,
    pub mode: SimilarityMode,
}

impl<'a> ScoringContext<'a> {
    /// Cross-graph similarity of target vertex `v` against query vertex `q`.
    pub fn eta(&self, v: VertexId, q: VertexId) -> f64 {
        let (i, d) = tversky_components(self.target_lcv.row(v), self.query_lcv.row(q), self.mode);
        // Query labels outside the target universe can never be recalled.
        let d = d + self.query_lcv.foreign(q, self.mode) as u64;
        eta_from_counts(i, d, self.gamma)
    }

    /// Greedy best mapping between the neighbors of `v` and the neighbors of
    /// `q`: repeatedly pick the highest-similarity unused pair (ties toward the
    /// smaller query id, then the smaller target id) until one side runs out.
    /// Unmatched query neighbors trail the selections as `(None, q')`.
    pub fn greedy_neighbor_mapping(
        &self,
        v: VertexId,
        q: VertexId,
    ) -> Vec<(Option<VertexId>, VertexId)> {
        let target_adj = self.target.neighbors(v);
        let query_adj = self.query.neighbors(q);

        let mut scored: Vec<(f64, VertexId, VertexId)> =
            Vec::with_capacity(target_adj.len() * query_adj.len());
        for &q2 in query_adj {
            for &v2 in target_adj {
                scored.push((self.eta(v2, q2), q2, v2));
            }
        }
        scored.sort_unstable_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then_with(|| a.1.cmp(&b.1))
                .then_with(|| a.2.cmp(&b.2))
        });

        let quota = target_adj.len().min(query_adj.len());
        let mut out = Vec::with_capacity(query_adj.len());
        let mut used_target: Vec<VertexId> = Vec::with_capacity(quota);
        let mut used_query: Vec<VertexId> = Vec::with_capacity(quota);
        for &(_, q2, v2) in &scored {
            if out.len() == quota {
                break;
            }
            if used_target.contains(&v2) || used_query.contains(&q2) {
                continue;
            }
            used_target.push(v2);
            used_query.push(q2);
            out.push((Some(v2), q2));
        }
        for &q2 in query_adj {
            if !used_query.contains(&q2) {
                out.push((None, q2));
            }
        }
        out
    }

    /// Vertex symbol sequence of the pair: its own symbol, then one per query
    /// neighbor (sigma_1 for neighbors with no counterpart). Length is always
    /// `deg(q) + 1`.
    pub fn symbol_sequence(&self, v: VertexId, q: VertexId) -> SymbolSequence {
        SymbolSequence {
            target: v,
            query: q,
            symbols: self.symbol_sequence_with_eta(v, q).0,
        }
    }

    /// Chi-square score of the pair plus its first-order similarity (the
    /// latter is kept as a heap tie-breaker).
    pub fn score_pair(&self, v: VertexId, q: VertexId) -> (f64, f64) {
        let (symbols, eta) = self.symbol_sequence_with_eta(v, q);
        let score = chi_square(&symbols, self.table).expect("sequence is never empty");
        (score, eta)
    }

    fn symbol_sequence_with_eta(&self, v: VertexId, q: VertexId) -> (Vec<SymbolId>, f64) {
        let eta = self.eta(v, q);
        let mut symbols = Vec::with_capacity(self.query.degree(q) + 1);
        symbols.push(symbolize(eta, self.stats, self.table));
        for (matched, q2) in self.greedy_neighbor_mapping(v, q) {
            let symbol = match matched {
                Some(v2) => symbolize(self.eta(v2, q2), self.stats, self.table),
                None => SymbolId::SIGMA_1,
            };
            symbols.push(symbol);
        }
        (symbols, eta)
    }
}
