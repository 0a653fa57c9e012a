//! Offline artifacts built once per target graph: label indexes, the
//! similarity distribution statistics, the symbol table, and a binary
//! persistence format for the whole bundle.
//!
//! The expensive step is [`compute_distribution`]: the mean and spread of the
//! vertex similarity over every ordered vertex pair of the target graph. All
//! other structures are linear scans. [`persist_index`] saves the bundle
//! (including the source graph) so query sessions skip the offline pass.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LabelId, LabelInterner, LabeledGraph, VertexId};
use crate::similarity::{eta_from_counts, tversky_components, SimilarityMode};

/// Pairs evaluated per work unit in the distribution pass. Partial sums are
/// folded in chunk order, so results do not depend on the worker count.
const PAIR_CHUNK: u64 = 1 << 16;

// ---------------------------------------------------------------------------
// Label indexes
// ---------------------------------------------------------------------------

/// For each label, the sorted list of vertices carrying it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedLabelIndex {
    postings: Vec<Vec<VertexId>>,
}

impl InvertedLabelIndex {
    pub fn build(g: &LabeledGraph) -> Self {
        let mut postings = vec![Vec::new(); g.label_count()];
        for u in 0..g.vertex_count() as VertexId {
            postings[g.label_of(u) as usize].push(u);
        }
        InvertedLabelIndex { postings }
    }

    /// Vertices labeled `label`, ascending. Empty for out-of-range ids.
    pub fn vertices(&self, label: LabelId) -> &[VertexId] {
        self.postings
            .get(label as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn label_count(&self) -> usize {
        self.postings.len()
    }
}

/// For each vertex, the sorted distinct labels of its neighbors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelNeighborList {
    rows: Vec<Vec<LabelId>>,
}

impl LabelNeighborList {
    pub fn build(g: &LabeledGraph) -> Self {
        let rows = (0..g.vertex_count() as VertexId)
            .map(|u| {
                let mut labels: Vec<LabelId> =
                    g.neighbors(u).iter().map(|&w| g.label_of(w)).collect();
                labels.sort_unstable();
                labels.dedup();
                labels
            })
            .collect();
        LabelNeighborList { rows }
    }

    pub fn labels(&self, u: VertexId) -> &[LabelId] {
        &self.rows[u as usize]
    }

    /// Does any neighbor of `u` carry `label`?
    pub fn has_neighbor_label(&self, u: VertexId, label: LabelId) -> bool {
        self.rows[u as usize].binary_search(&label).is_ok()
    }
}

/// For each vertex `u`, the label histogram of its closed neighborhood
/// `{u} ∪ adj(u)`, stored as one dense row per vertex over the graph's label
/// universe. These rows are the inputs to the similarity score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelCountVectors {
    width: usize,
    data: Vec<u32>,
}

impl LabelCountVectors {
    pub fn build(g: &LabeledGraph) -> Self {
        let width = g.label_count();
        let n = g.vertex_count();
        let mut data = vec![0u32; n * width];
        for u in 0..n as VertexId {
            let row = &mut data[u as usize * width..(u as usize + 1) * width];
            row[g.label_of(u) as usize] += 1;
            for &w in g.neighbors(u) {
                row[g.label_of(w) as usize] += 1;
            }
        }
        LabelCountVectors { width, data }
    }

    pub fn row(&self, u: VertexId) -> &[u32] {
        &self.data[u as usize * self.width..(u as usize + 1) * self.width]
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn vertex_count(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.data.len() / self.width
        }
    }
}

/// The three per-label index structures, built together in one pass over the
/// graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphIndexes {
    pub inverted: InvertedLabelIndex,
    pub neighbor_labels: LabelNeighborList,
    pub lcv: LabelCountVectors,
}

pub fn build_indexes(g: &LabeledGraph) -> GraphIndexes {
    GraphIndexes {
        inverted: InvertedLabelIndex::build(g),
        neighbor_labels: LabelNeighborList::build(g),
        lcv: LabelCountVectors::build(g),
    }
}

/// Query-side label-count vectors re-expressed over a *target* graph's label
/// universe, so target and query rows can be compared element-wise.
///
/// Query labels absent from the target universe can never be recalled by any
/// target vertex; their per-vertex mass is kept aside and added to the
/// deficit term at similarity time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedLcv {
    width: usize,
    data: Vec<u32>,
    foreign_total: Vec<u32>,
    foreign_distinct: Vec<u32>,
}

impl AlignedLcv {
    pub fn build(query: &LabeledGraph, target_labels: &LabelInterner) -> Self {
        let translate: Vec<Option<LabelId>> = query
            .interner()
            .names()
            .iter()
            .map(|name| target_labels.get(name))
            .collect();
        let width = target_labels.len();
        let n = query.vertex_count();
        let mut data = vec![0u32; n * width];
        let mut foreign_total = vec![0u32; n];
        let mut foreign_distinct = vec![0u32; n];
        let mut foreign: Vec<LabelId> = Vec::new();
        for q in 0..n as VertexId {
            let row = &mut data[q as usize * width..(q as usize + 1) * width];
            foreign.clear();
            let closed = std::iter::once(q).chain(query.neighbors(q).iter().copied());
            for member in closed {
                let label = query.label_of(member);
                match translate[label as usize] {
                    Some(t) => row[t as usize] += 1,
                    None => foreign.push(label),
                }
            }
            foreign_total[q as usize] = foreign.len() as u32;
            foreign.sort_unstable();
            foreign.dedup();
            foreign_distinct[q as usize] = foreign.len() as u32;
        }
        AlignedLcv {
            width,
            data,
            foreign_total,
            foreign_distinct,
        }
    }

    /// The vertex's histogram over the target label universe.
    pub fn row(&self, q: VertexId) -> &[u32] {
        &self.data[q as usize * self.width..(q as usize + 1) * self.width]
    }

    /// Closed-neighborhood mass on labels the target graph does not have,
    /// counted to match the similarity mode's semantics.
    pub fn foreign(&self, q: VertexId, mode: SimilarityMode) -> u32 {
        match mode {
            SimilarityMode::Multiset => self.foreign_total[q as usize],
            SimilarityMode::Set => self.foreign_distinct[q as usize],
        }
    }
}

// ---------------------------------------------------------------------------
// Similarity distribution
// ---------------------------------------------------------------------------

/// Mean, spread, and maximum standardized deviation of the vertex similarity
/// over ordered vertex pairs of one graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    /// Mean similarity over the evaluated pairs.
    pub psi: f64,
    /// Sample standard deviation (n-1 denominator) over the evaluated pairs.
    pub delta: f64,
    /// Largest `|eta - psi| / delta` seen; 0 when `delta` is 0.
    pub max_dev: f64,
    /// Number of ordered pairs actually evaluated.
    pub pair_count: u64,
    /// True when `pair_count` is a random subset of all ordered pairs.
    pub sampled: bool,
    /// Seed that drew the subset (recorded even for exact runs).
    pub sample_seed: u64,
}

/// Kahan-compensated running sum, squared sum, and extrema for one slice of
/// pairs. Merging is ordinary compensated addition, so folding partials in a
/// fixed order gives bit-identical results for any worker count.
#[derive(Clone, Copy)]
struct Moments {
    sum: f64,
    sum_c: f64,
    sq: f64,
    sq_c: f64,
    min: f64,
    max: f64,
}

impl Moments {
    fn new() -> Self {
        Moments {
            sum: 0.0,
            sum_c: 0.0,
            sq: 0.0,
            sq_c: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn push(&mut self, x: f64) {
        kahan_add(&mut self.sum, &mut self.sum_c, x);
        kahan_add(&mut self.sq, &mut self.sq_c, x * x);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    fn merge(&mut self, other: &Moments) {
        kahan_add(&mut self.sum, &mut self.sum_c, other.sum);
        kahan_add(&mut self.sum, &mut self.sum_c, other.sum_c);
        kahan_add(&mut self.sq, &mut self.sq_c, other.sq);
        kahan_add(&mut self.sq, &mut self.sq_c, other.sq_c);
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }
}

fn kahan_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// Decode an ordered-pair index `p` in `[0, n*(n-1))` to `(u, w)` with
/// `u != w`: the pairs are laid out row-major with the diagonal removed.
#[inline]
fn decode_pair(p: u64, n: u64) -> (VertexId, VertexId) {
    let u = p / (n - 1);
    let rem = p % (n - 1);
    let w = if rem < u { rem } else { rem + 1 };
    (u as VertexId, w as VertexId)
}

/// Compute the similarity distribution of `g` over ordered vertex pairs
/// `(u, w)` with `u != w`, `u` on the target side of the score and `w` on the
/// query side.
///
/// `sample_pairs` caps the number of evaluated pairs; when it is `None` or at
/// least the total, every pair is evaluated and `sampled` is false. Sampling
/// draws distinct pair indices with a seeded generator, so equal inputs give
/// equal statistics on any machine and worker count.
pub fn compute_distribution(
    g: &LabeledGraph,
    lcv: &LabelCountVectors,
    gamma: f64,
    mode: SimilarityMode,
    sample_pairs: Option<u64>,
    seed: u64,
) -> Result<DistributionStats> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::DegenerateStats(n));
    }
    let total = (n as u64) * (n as u64 - 1);
    if let Some(s) = sample_pairs {
        if s < 2 {
            return Err(Error::Config(format!(
                "sample-pairs must be at least 2, got {s}"
            )));
        }
    }

    let eta = |p: u64| -> f64 {
        let (u, w) = decode_pair(p, n as u64);
        let (i, d) = tversky_components(lcv.row(u), lcv.row(w), mode);
        eta_from_counts(i, d, gamma)
    };

    let (moments, evaluated, sampled) = match sample_pairs {
        Some(s) if s < total => {
            let picks = sample_distinct(total, s, seed);
            let partials: Vec<Moments> = picks
                .par_chunks(PAIR_CHUNK as usize)
                .map(|chunk| {
                    let mut m = Moments::new();
                    for &p in chunk {
                        m.push(eta(p));
                    }
                    m
                })
                .collect();
            (fold_moments(&partials), s, true)
        }
        _ => {
            let chunk_count = total.div_ceil(PAIR_CHUNK);
            let partials: Vec<Moments> = (0..chunk_count)
                .into_par_iter()
                .map(|c| {
                    let start = c * PAIR_CHUNK;
                    let end = (start + PAIR_CHUNK).min(total);
                    let mut m = Moments::new();
                    for p in start..end {
                        m.push(eta(p));
                    }
                    m
                })
                .collect();
            (fold_moments(&partials), total, false)
        }
    };

    let count = evaluated as f64;
    let psi = moments.sum / count;
    // Single-pass sample variance; clamp tiny negative cancellation noise.
    let var = ((moments.sq - count * psi * psi) / (count - 1.0)).max(0.0);
    let delta = var.sqrt();
    let max_dev = if delta == 0.0 {
        0.0
    } else {
        let spread = (moments.min - psi).abs().max((moments.max - psi).abs());
        spread / delta
    };

    Ok(DistributionStats {
        psi,
        delta,
        max_dev,
        pair_count: evaluated,
        sampled,
        sample_seed: seed,
    })
}

fn fold_moments(partials: &[Moments]) -> Moments {
    let mut acc = Moments::new();
    for p in partials {
        acc.merge(p);
    }
    acc
}

/// Floyd's algorithm: `s` distinct values from `[0, total)`, returned sorted
/// so the evaluation order is independent of the draw order.
fn sample_distinct(total: u64, s: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: HashSet<u64> = HashSet::with_capacity(s as usize);
    let mut picks: Vec<u64> = Vec::with_capacity(s as usize);
    for j in (total - s)..total {
        let t = rng.random_range(0..=j);
        if chosen.insert(t) {
            picks.push(t);
        } else {
            chosen.insert(j);
            picks.push(j);
        }
    }
    picks.sort_unstable();
    picks
}

// ---------------------------------------------------------------------------
// Symbol table
// ---------------------------------------------------------------------------

/// Occurrence probabilities for the deviation symbols `sigma_1 ..= sigma_tau`.
///
/// Symbol `sigma_i` (for `i >= 2`) covers standardized deviations in
/// `[1 + (i-1)*kappa, 1 + i*kappa)`; a one-sided tail bound gives it mass
/// `(1/(1+(i-1)k)^2 - 1/(1+i k)^2) / 2`. `sigma_1` absorbs all remaining
/// mass, so the table always sums to exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolTable {
    kappa: f64,
    probabilities: Vec<f64>,
}

impl SymbolTable {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Number of symbols.
    pub fn tau(&self) -> usize {
        self.probabilities.len()
    }

    /// `Pr(sigma_rank)`, `rank` being one-based.
    pub fn probability(&self, rank: u32) -> f64 {
        self.probabilities[rank as usize - 1]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Size the alphabet from the largest observed deviation and fill in the
/// tail-bound probabilities. `tau = ceil((max_dev - 1) / kappa)`, floored at
/// one symbol so degenerate distributions still symbolize.
pub fn build_symbol_table(stats: &DistributionStats, kappa: f64) -> Result<SymbolTable> {
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
    }
    let tau = if stats.max_dev > 1.0 {
        (((stats.max_dev - 1.0) / kappa).ceil() as u64).max(1) as usize
    } else {
        1
    };
    let mut probabilities = vec![0.0; tau];
    for i in 2..=tau {
        let lo = 1.0 + (i as f64 - 1.0) * kappa;
        let hi = 1.0 + i as f64 * kappa;
        probabilities[i - 1] = 0.5 * (1.0 / (lo * lo) - 1.0 / (hi * hi));
    }
    let rest: f64 = probabilities[1..].iter().sum();
    probabilities[0] = 1.0 - rest;
    Ok(SymbolTable {
        kappa,
        probabilities,
    })
}

// ---------------------------------------------------------------------------
// Bundled artifact + persistence
// ---------------------------------------------------------------------------

/// Parameters of the offline pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineConfig {
    pub gamma: f64,
    pub kappa: f64,
    pub mode: SimilarityMode,
    /// Cap on evaluated pairs for the distribution pass; `None` = all pairs.
    pub sample_pairs: Option<u64>,
    /// Seed for pair sampling.
    pub seed: u64,
}

impl Default for OfflineConfig {
    fn default() -> Self {
        OfflineConfig {
            gamma: 3.0,
            kappa: 0.001,
            mode: SimilarityMode::Multiset,
            sample_pairs: None,
            seed: 0,
        }
    }
}

/// Everything a query session needs: the target graph, its label indexes,
/// the similarity distribution, and the symbol table.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    pub graph: LabeledGraph,
    pub indexes: GraphIndexes,
    pub stats: DistributionStats,
    pub table: SymbolTable,
    pub config: OfflineConfig,
}

/// Run the full offline pass over `graph`.
pub fn build_index(graph: LabeledGraph, config: &OfflineConfig) -> Result<IndexSet> {
    let indexes = build_indexes(&graph);
    let stats = compute_distribution(
        &graph,
        &indexes.lcv,
        config.gamma,
        config.mode,
        config.sample_pairs,
        config.seed,
    )?;
    let table = build_symbol_table(&stats, config.kappa)?;
    Ok(IndexSet {
        graph,
        indexes,
        stats,
        table,
        config: config.clone(),
    })
}

impl IndexSet {
    /// Rebuild the symbol table for a different band width without repeating
    /// the offline distribution pass.
    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.table = build_symbol_table(&self.stats, kappa)?;
        self.config.kappa = kappa;
        Ok(self)
    }
}

const MAGIC: &[u8; 4] = b"SGMX";
const FORMAT_VERSION: u32 = 1;

/// Write the bundle to `path` in the versioned binary format. Every number is
/// little-endian and floats are raw IEEE bits, so a load is bit-exact.
pub fn persist_index(index: &IndexSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_index(index, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_index(index: &IndexSet, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;

    // Offline configuration.
    let mode = match index.config.mode {
        SimilarityMode::Multiset => 0u8,
        SimilarityMode::Set => 1u8,
    };
    w.write_all(&[mode])?;
    w.write_all(&index.config.gamma.to_le_bytes())?;
    w.write_all(&index.config.kappa.to_le_bytes())?;
    match index.config.sample_pairs {
        Some(s) => {
            w.write_all(&[1])?;
            w.write_all(&s.to_le_bytes())?;
        }
        None => {
            w.write_all(&[0])?;
            w.write_all(&0u64.to_le_bytes())?;
        }
    }
    w.write_all(&index.config.seed.to_le_bytes())?;

    // The graph itself plus its digest, so query sessions are self-contained
    // and corruption is detectable.
    w.write_all(&index.graph.digest())?;
    let text = index.graph.to_text();
    w.write_all(&(text.len() as u64).to_le_bytes())?;
    w.write_all(text.as_bytes())?;

    // Label indexes.
    let inv = &index.indexes.inverted;
    w.write_all(&(inv.label_count() as u64).to_le_bytes())?;
    for label in 0..inv.label_count() as LabelId {
        let posting = inv.vertices(label);
        w.write_all(&(posting.len() as u64).to_le_bytes())?;
        for &v in posting {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    let n = index.graph.vertex_count();
    for u in 0..n as VertexId {
        let row = index.indexes.neighbor_labels.labels(u);
        w.write_all(&(row.len() as u64).to_le_bytes())?;
        for &l in row {
            w.write_all(&l.to_le_bytes())?;
        }
    }
    let lcv = &index.indexes.lcv;
    w.write_all(&(lcv.width() as u64).to_le_bytes())?;
    for u in 0..n as VertexId {
        for &c in lcv.row(u) {
            w.write_all(&c.to_le_bytes())?;
        }
    }

    // Distribution statistics.
    w.write_all(&index.stats.psi.to_le_bytes())?;
    w.write_all(&index.stats.delta.to_le_bytes())?;
    w.write_all(&index.stats.max_dev.to_le_bytes())?;
    w.write_all(&index.stats.pair_count.to_le_bytes())?;
    w.write_all(&[index.stats.sampled as u8])?;
    w.write_all(&index.stats.sample_seed.to_le_bytes())?;

    // Symbol table.
    w.write_all(&index.table.kappa().to_le_bytes())?;
    w.write_all(&(index.table.tau() as u64).to_le_bytes())?;
    for &p in index.table.probabilities() {
        w.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

/// Load a bundle written by [`persist_index`]. Fails with `IndexFormat` on a
/// malformed file and `DigestMismatch` when the embedded graph does not hash
/// to the stored digest.
pub fn load_index(path: impl AsRef<Path>) -> Result<IndexSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        inner: BufReader::new(file),
        path,
    };
    r.load()
}

struct Reader<'a> {
    inner: BufReader<File>,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn bad(&self, message: impl Into<String>) -> Error {
        Error::IndexFormat {
            path: self.path.to_path_buf(),
            message: message.into(),
        }
    }

    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|_| self.bad("unexpected end of file"))?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    /// A u64 length that must fit comfortably in memory for this file.
    fn len(&mut self, what: &str) -> Result<usize> {
        let v = self.u64()?;
        if v > (1 << 40) {
            return Err(self.bad(format!("implausible {what} length {v}")));
        }
        Ok(v as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn load(&mut self) -> Result<IndexSet> {
        if &self.bytes::<4>()? != MAGIC {
            return Err(self.bad("bad magic bytes"));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(self.bad(format!("unsupported format version {version}")));
        }

        let mode = match self.u8()? {
            0 => SimilarityMode::Multiset,
            1 => SimilarityMode::Set,
            m => return Err(self.bad(format!("unknown similarity mode {m}"))),
        };
        let gamma = self.f64()?;
        let kappa = self.f64()?;
        let has_sample = self.u8()?;
        let sample_raw = self.u64()?;
        let sample_pairs = match has_sample {
            0 => None,
            1 => Some(sample_raw),
            b => return Err(self.bad(format!("bad sample-pairs flag {b}"))),
        };
        let seed = self.u64()?;
        let config = OfflineConfig {
            gamma,
            kappa,
            mode,
            sample_pairs,
            seed,
        };

        let digest: [u8; 32] = self.bytes()?;
        let text_len = self.len("graph text")?;
        let mut text = vec![0u8; text_len];
        self.inner
            .read_exact(&mut text)
            .map_err(|_| self.bad("unexpected end of file"))?;
        let text = String::from_utf8(text).map_err(|_| self.bad("graph text is not UTF-8"))?;
        let graph = LabeledGraph::from_text(&text, self.path)?;
        if graph.digest() != digest {
            return Err(Error::DigestMismatch);
        }

        let n = graph.vertex_count();
        let label_count = self.len("label index")?;
        if label_count != graph.label_count() {
            return Err(self.bad("label index does not match the embedded graph"));
        }
        let mut postings = Vec::with_capacity(label_count);
        for _ in 0..label_count {
            let len = self.len("posting")?;
            let mut posting = Vec::with_capacity(len);
            for _ in 0..len {
                posting.push(self.u32()?);
            }
            postings.push(posting);
        }
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let len = self.len("neighbor-label row")?;
            let mut row = Vec::with_capacity(len);
            for _ in 0..len {
                row.push(self.u32()?);
            }
            rows.push(row);
        }
        let width = self.len("count-vector width")?;
        if width != graph.label_count() {
            return Err(self.bad("count-vector width does not match the embedded graph"));
        }
        let mut data = vec![0u32; n * width];
        for slot in data.iter_mut() {
            *slot = self.u32()?;
        }
        let indexes = GraphIndexes {
            inverted: InvertedLabelIndex { postings },
            neighbor_labels: LabelNeighborList { rows },
            lcv: LabelCountVectors { width, data },
        };

        let stats = DistributionStats {
            psi: self.f64()?,
            delta: self.f64()?,
            max_dev: self.f64()?,
            pair_count: self.u64()?,
            sampled: match self.u8()? {
                0 => false,
                1 => true,
                b => return Err(self.bad(format!("bad sampled flag {b}"))),
            },
            sample_seed: self.u64()?,
        };

        let table_kappa = self.f64()?;
        let tau = self.len("symbol table")?;
        if tau == 0 {
            return Err(self.bad("symbol table must have at least one symbol"));
        }
        let mut probabilities = Vec::with_capacity(tau);
        for _ in 0..tau {
            probabilities.push(self.f64()?);
        }
        let table = SymbolTable {
            kappa: table_kappa,
            probabilities,
        };

        Ok(IndexSet {
            graph,
            indexes,
            stats,
            table,
            config,
        })
    }
}
