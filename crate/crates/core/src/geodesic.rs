//! Geodesic k nearest labeled neighbors.
//!
//! For every vertex of a weighted undirected graph, find the `k` labeled
//! vertices closest in shortest-path distance. Three routes compute the same
//! [`NeighborTable`]:
//!
//! * [`geodesic_knn_alg1`] runs one Dijkstra per labeled seed
//!   "simultaneously" over a single queue of `(seed, vertex)` pairs and stops
//!   expanding a vertex once it has `k` results.
//! * [`geodesic_knn_alg2`] keeps a local queue per vertex and a global queue
//!   holding the minimum of each local queue, so a vertex that already has
//!   `k` results is never popped again (at most `k·|V|` global pops).
//! * [`naive_multi_dijkstra`] runs a full Dijkstra from every seed and keeps
//!   the `k` smallest distances per vertex; it is the reference oracle.
//!
//! Queue priorities are ordered by `(distance, seed)`. Because floating-point
//! addition of nonnegative weights is monotone, all three routes settle on
//! bit-identical distances and pick the same seeds on exact ties.
//!
//! Heaps are binary heaps with lazy deletion: a decrease-key pushes a fresh
//! entry and superseded entries are skipped on pop. [`RunStats::pops`]
//! counts only logical pops; skipped entries go to [`RunStats::stale_pops`].

use std::cmp::{Ordering, Reverse};
use std::collections::hash_map::Entry as MapEntry;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::format_sig;
use crate::graph::Graph;

/// Labeled vertices and their responses, sorted by vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    ids: Vec<usize>,
    responses: Vec<f64>,
}

impl LabelSet {
    pub fn new(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut pairs: Vec<(usize, f64)> = pairs.into_iter().collect();
        pairs.sort_by_key(|p| p.0);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidLabels(format!(
                "vertex {} labeled twice",
                w[0].0
            )));
        }
        if let Some(&(id, y)) = pairs.iter().find(|p| !p.1.is_finite()) {
            return Err(Error::InvalidLabels(format!(
                "vertex {id} has non-finite response {y}"
            )));
        }
        let (ids, responses) = pairs.into_iter().unzip();
        Ok(Self { ids, responses })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        self.ids.iter().copied().zip(self.responses.iter().copied())
    }

    pub fn response(&self, id: usize) -> Option<f64> {
        self.ids
            .binary_search(&id)
            .ok()
            .map(|pos| self.responses[pos])
    }

    /// Same ids, responses mapped through `f`.
    pub fn map_responses(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.iter().map(|(id, y)| (id, f(y))))
    }

    pub fn check_vertices(&self, num_vertices: usize) -> Result<()> {
        match self.ids.last() {
            Some(&max) if max >= num_vertices => Err(Error::InvalidLabels(format!(
                "labeled vertex {max} out of range for {num_vertices} vertices"
            ))),
            _ => Ok(()),
        }
    }
}

/// One entry of a vertex's neighbor list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub seed: usize,
    pub dist: f64,
}

impl Neighbor {
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.seed.cmp(&other.seed))
    }
}

/// Per-vertex lists of nearest labeled vertices, sorted by
/// `(distance, seed)`. A list is shorter than `k` when fewer labeled
/// vertices share the vertex's connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    lists: Vec<Vec<Neighbor>>,
}

impl NeighborTable {
    pub fn from_lists(mut lists: Vec<Vec<Neighbor>>) -> Self {
        for list in &mut lists {
            list.sort_by(Neighbor::canonical_cmp);
        }
        Self { lists }
    }

    pub fn num_vertices(&self) -> usize {
        self.lists.len()
    }

    pub fn get(&self, v: usize) -> &[Neighbor] {
        &self.lists[v]
    }

    pub fn lists(&self) -> &[Vec<Neighbor>] {
        &self.lists
    }

    /// Keeps at most `k` entries per vertex.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            lists: self
                .lists
                .iter()
                .map(|l| l[..l.len().min(k)].to_vec())
                .collect(),
        }
    }

    /// First vertex where the two tables disagree: different seeds, list
    /// lengths, or distances further apart than `tol`.
    pub fn first_mismatch(&self, other: &Self, tol: f64) -> Option<usize> {
        if self.lists.len() != other.lists.len() {
            return Some(self.lists.len().min(other.lists.len()));
        }
        self.lists.iter().zip(&other.lists).position(|(a, b)| {
            a.len() != b.len()
                || a.iter()
                    .zip(b)
                    .any(|(x, y)| x.seed != y.seed || !((x.dist - y.dist).abs() <= tol))
        })
    }

    /// One line per vertex: `<v>: <seed>:<dist> ...`, 12 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, list) in self.lists.iter().enumerate() {
            let _ = write!(out, "{v}:");
            for nb in list {
                let _ = write!(out, " {}:{}", nb.seed, format_sig(nb.dist, 12));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let mut lists = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (v, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(path, lineno, "expected `<v>:`"))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad vertex id `{v}`")))?;
            if v != lists.len() {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected vertex {}, found {v}", lists.len()),
                ));
            }
            let list = rest
                .split_whitespace()
                .map(|tok| {
                    let (s, d) = tok
                        .split_once(':')
                        .ok_or_else(|| Error::parse(path, lineno, format!("bad entry `{tok}`")))?;
                    Ok(Neighbor {
                        seed: s
                            .parse()
                            .map_err(|_| Error::parse(path, lineno, format!("bad seed `{s}`")))?,
                        dist: d.parse().map_err(|_| {
                            Error::parse(path, lineno, format!("bad distance `{d}`"))
                        })?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            lists.push(list);
        }
        Ok(Self { lists })
    }
}

pub fn save_neighbor_table(table: &NeighborTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, table.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_neighbor_table(path: impl AsRef<Path>) -> Result<NeighborTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    NeighborTable::from_text(&text, path)
}

/// Queue instrumentation for one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// Logical pop-minimum operations (the global queue for alg2).
    pub pops: u64,
    /// Heap entries discarded because a decrease-key superseded them.
    pub stale_pops: u64,
    pub inserts: u64,
    pub decreases: u64,
    /// Peak number of live `(seed, vertex)` pairs held in queues.
    pub peak_queue_len: u64,
    /// Pops whose priority was below the previous pop's priority.
    pub order_violations: u64,
    pub wall_time_secs: f64,
}

impl RunStats {
    pub fn accumulate(&mut self, other: &RunStats) {
        self.pops += other.pops;
        self.stale_pops += other.stale_pops;
        self.inserts += other.inserts;
        self.decreases += other.decreases;
        self.peak_queue_len = self.peak_queue_len.max(other.peak_queue_len);
        self.order_violations += other.order_violations;
        self.wall_time_secs += other.wall_time_secs;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Naive,
    Alg1,
    Alg2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Naive, Algorithm::Alg1, Algorithm::Alg2];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::Alg1 => "alg1",
            Algorithm::Alg2 => "alg2",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Algorithm::Naive),
            "alg1" => Ok(Algorithm::Alg1),
            "alg2" => Ok(Algorithm::Alg2),
            _ => Err(Error::InvalidParameter(format!(
                "unknown algorithm `{s}` (expected naive, alg1 or alg2)"
            ))),
        }
    }
}

pub fn geodesic_knn(
    algorithm: Algorithm,
    g: &Graph,
    labels: &LabelSet,
    k: usize,
) -> Result<(NeighborTable, RunStats)> {
    match algorithm {
        Algorithm::Naive => naive_multi_dijkstra(g, labels, k),
        Algorithm::Alg1 => geodesic_knn_alg1(g, labels, k),
        Algorithm::Alg2 => geodesic_knn_alg2(g, labels, k),
    }
}

fn check_inputs(g: &Graph, labels: &LabelSet, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if labels.is_empty() {
        return Err(Error::EmptyLabelSet);
    }
    labels.check_vertices(g.num_vertices())?;
    if g.num_vertices() > u32::MAX as usize {
        return Err(Error::InvalidGraph("more than 2^32 vertices".into()));
    }
    if let Some((u, v, weight)) = g.find_negative_edge() {
        return Err(Error::NegativeWeight { u, v, weight });
    }
    Ok(())
}

/// Priority `(dist, seed)`, lexicographic.
#[derive(Debug, Clone, Copy)]
struct Key {
    dist: f64,
    seed: u32,
}

impl Key {
    fn new(dist: f64, seed: usize) -> Self {
        Self {
            dist,
            seed: seed as u32,
        }
    }
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.seed.cmp(&other.seed))
    }
}

/// Status of a `(seed, vertex)` pair.
#[derive(Debug, Clone, Copy)]
enum PairState {
    Queued(f64),
    Visited,
}

#[inline]
fn pair_id(seed: usize, v: usize) -> u64 {
    ((seed as u64) << 32) | v as u64
}

/// Tracks pop order; a decrease would mean a queue or weight bug.
struct PopOrder {
    last: f64,
}

impl PopOrder {
    fn new() -> Self {
        Self {
            last: f64::NEG_INFINITY,
        }
    }

    #[inline]
    fn observe(&mut self, dist: f64, stats: &mut RunStats) {
        if dist < self.last {
            stats.order_violations += 1;
            debug_assert!(
                false,
                "popped priority {dist} after {}: pop order not monotone",
                self.last
            );
        }
        self.last = dist;
    }
}

/// Multi-seed Dijkstra over `(seed, vertex)` pairs with early stopping once a
/// vertex holds `k` results.
pub fn geodesic_knn_alg1(
    g: &Graph,
    labels: &LabelSet,
    k: usize,
) -> Result<(NeighborTable, RunStats)> {
    check_inputs(g, labels, k)?;
    let start = Instant::now();
    let mut stats = RunStats::default();
    let mut lists: Vec<Vec<Neighbor>> = vec![Vec::new(); g.num_vertices()];
    let mut state: FxHashMap<u64, PairState> = FxHashMap::default();
    let mut queue: BinaryHeap<Reverse<(Key, u32)>> = BinaryHeap::new();
    let mut live = 0u64;

    for &s in labels.ids() {
        state.insert(pair_id(s, s), PairState::Queued(0.0));
        queue.push(Reverse((Key::new(0.0, s), s as u32)));
        stats.inserts += 1;
        live += 1;
    }
    stats.peak_queue_len = live;

    let mut order = PopOrder::new();
    while let Some(Reverse((key, v0))) = queue.pop() {
        let (seed, v0) = (key.seed as usize, v0 as usize);
        let id = pair_id(seed, v0);
        match state.get(&id) {
            Some(&PairState::Queued(d)) if d == key.dist => {}
            _ => {
                stats.stale_pops += 1;
                continue;
            }
        }
        state.insert(id, PairState::Visited);
        stats.pops += 1;
        live -= 1;
        order.observe(key.dist, &mut stats);

        if lists[v0].len() >= k {
            continue;
        }
        lists[v0].push(Neighbor {
            seed,
            dist: key.dist,
        });
        for (v, w) in g.neighbors(v0) {
            if lists[v].len() >= k {
                continue;
            }
            let dist = key.dist + w;
            match state.entry(pair_id(seed, v)) {
                MapEntry::Vacant(slot) => {
                    slot.insert(PairState::Queued(dist));
                    stats.inserts += 1;
                    live += 1;
                    stats.peak_queue_len = stats.peak_queue_len.max(live);
                }
                MapEntry::Occupied(mut slot) => match *slot.get() {
                    PairState::Queued(old) if dist < old => {
                        slot.insert(PairState::Queued(dist));
                        stats.decreases += 1;
                    }
                    _ => continue,
                },
            }
            queue.push(Reverse((Key::new(dist, seed), v as u32)));
        }
    }

    stats.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((NeighborTable::from_lists(lists), stats))
}

/// Global queue of vertices keyed by the minimum of their local queue.
struct GlobalQueue {
    heap: BinaryHeap<Reverse<(Key, u32, u32)>>,
    key: Vec<Option<Key>>,
    version: Vec<u32>,
}

impl GlobalQueue {
    fn new(n: usize) -> Self {
        Self {
            heap: BinaryHeap::new(),
            key: vec![None; n],
            version: vec![0; n],
        }
    }

    #[inline]
    fn decrease_or_insert(&mut self, v: usize, key: Key, stats: &mut RunStats) {
        match self.key[v] {
            Some(cur) if cur <= key => return,
            Some(_) => stats.decreases += 1,
            None => stats.inserts += 1,
        }
        self.key[v] = Some(key);
        self.version[v] = self.version[v].wrapping_add(1);
        self.heap.push(Reverse((key, v as u32, self.version[v])));
    }

    fn pop(&mut self, stats: &mut RunStats) -> Option<(usize, Key)> {
        while let Some(Reverse((key, v, version))) = self.heap.pop() {
            let v = v as usize;
            if self.key[v].is_none() || self.version[v] != version {
                stats.stale_pops += 1;
                continue;
            }
            self.key[v] = None;
            stats.pops += 1;
            return Some((v, key));
        }
        None
    }
}

/// Removes superseded entries from the top of a local queue.
fn clean_top(local: &mut BinaryHeap<Reverse<Key>>, v: usize, state: &FxHashMap<u64, PairState>) {
    while let Some(Reverse(top)) = local.peek() {
        match state.get(&pair_id(top.seed as usize, v)) {
            Some(&PairState::Queued(d)) if d == top.dist => return,
            _ => {
                local.pop();
            }
        }
    }
}

/// Per-vertex local queues plus a global queue over their minima; each
/// vertex is popped at most `k` times.
pub fn geodesic_knn_alg2(
    g: &Graph,
    labels: &LabelSet,
    k: usize,
) -> Result<(NeighborTable, RunStats)> {
    check_inputs(g, labels, k)?;
    let start = Instant::now();
    let n = g.num_vertices();
    let mut stats = RunStats::default();
    let mut lists: Vec<Vec<Neighbor>> = vec![Vec::new(); n];
    let mut state: FxHashMap<u64, PairState> = FxHashMap::default();
    let mut local: Vec<BinaryHeap<Reverse<Key>>> = (0..n).map(|_| BinaryHeap::new()).collect();
    let mut global = GlobalQueue::new(n);
    let mut live = 0u64;

    for &s in labels.ids() {
        let key = Key::new(0.0, s);
        state.insert(pair_id(s, s), PairState::Queued(0.0));
        local[s].push(Reverse(key));
        global.decrease_or_insert(s, key, &mut stats);
        live += 1;
    }
    stats.peak_queue_len = live;

    let mut order = PopOrder::new();
    while let Some((v0, gkey)) = global.pop(&mut stats) {
        clean_top(&mut local[v0], v0, &state);
        let Reverse(key) = local[v0]
            .pop()
            .expect("global entry implies a live local entry");
        debug_assert!(key == gkey, "global key out of sync with local minimum");
        let seed = key.seed as usize;
        state.insert(pair_id(seed, v0), PairState::Visited);
        live -= 1;
        order.observe(key.dist, &mut stats);

        lists[v0].push(Neighbor {
            seed,
            dist: key.dist,
        });
        if lists[v0].len() < k {
            clean_top(&mut local[v0], v0, &state);
            if let Some(&Reverse(next)) = local[v0].peek() {
                global.decrease_or_insert(v0, next, &mut stats);
            }
        } else {
            // v0 is done; drop its local queue.
            let drained = std::mem::take(&mut local[v0]);
            live -= drained
                .into_iter()
                .filter(|Reverse(e)| {
                    matches!(state.get(&pair_id(e.seed as usize, v0)),
                        Some(&PairState::Queued(d)) if d == e.dist)
                })
                .count() as u64;
        }

        for (v, w) in g.neighbors(v0) {
            if lists[v].len() >= k {
                continue;
            }
            let dist = key.dist + w;
            let nkey = Key::new(dist, seed);
            match state.entry(pair_id(seed, v)) {
                MapEntry::Vacant(slot) => {
                    slot.insert(PairState::Queued(dist));
                    local[v].push(Reverse(nkey));
                    live += 1;
                    stats.peak_queue_len = stats.peak_queue_len.max(live);
                }
                MapEntry::Occupied(mut slot) => match *slot.get() {
                    PairState::Queued(old) => {
                        if dist < old {
                            slot.insert(PairState::Queued(dist));
                            local[v].push(Reverse(nkey));
                        }
                    }
                    PairState::Visited => continue,
                },
            }
            global.decrease_or_insert(v, nkey, &mut stats);
        }
    }

    stats.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((NeighborTable::from_lists(lists), stats))
}

/// Reusable single-source Dijkstra state.
pub struct Dijkstra<'g> {
    graph: &'g Graph,
    dist: Vec<f64>,
    settled: Vec<bool>,
    touched: Vec<usize>,
    heap: BinaryHeap<Reverse<(Key, u32)>>,
}

impl<'g> Dijkstra<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        let n = graph.num_vertices();
        Self {
            graph,
            dist: vec![f64::INFINITY; n],
            settled: vec![false; n],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    /// Distances from `source`; unreachable vertices stay at `+inf`.
    /// Weights are assumed nonnegative.
    pub fn run(&mut self, source: usize, stats: &mut RunStats) -> &[f64] {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
            self.settled[v] = false;
        }
        self.touched.clear();
        self.heap.clear();

        self.dist[source] = 0.0;
        self.touched.push(source);
        self.heap.push(Reverse((Key::new(0.0, 0), source as u32)));
        stats.inserts += 1;
        let mut live = 1u64;
        let mut peak = 1u64;
        let mut order = PopOrder::new();

        while let Some(Reverse((key, u))) = self.heap.pop() {
            let u = u as usize;
            if self.settled[u] || key.dist > self.dist[u] {
                stats.stale_pops += 1;
                continue;
            }
            self.settled[u] = true;
            stats.pops += 1;
            live -= 1;
            order.observe(key.dist, stats);
            for (v, w) in self.graph.neighbors(u) {
                if self.settled[v] {
                    continue;
                }
                let nd = key.dist + w;
                if nd < self.dist[v] {
                    if self.dist[v].is_infinite() {
                        self.touched.push(v);
                        stats.inserts += 1;
                        live += 1;
                        peak = peak.max(live);
                    } else {
                        stats.decreases += 1;
                    }
                    self.dist[v] = nd;
                    self.heap.push(Reverse((Key::new(nd, 0), v as u32)));
                }
            }
        }
        stats.peak_queue_len = stats.peak_queue_len.max(peak);
        &self.dist
    }
}

/// Single-source shortest-path distances.
pub fn dijkstra(g: &Graph, source: usize) -> Result<Vec<f64>> {
    if source >= g.num_vertices() {
        return Err(Error::IndexOutOfRange {
            index: source,
            len: g.num_vertices(),
        });
    }
    if let Some((u, v, weight)) = g.find_negative_edge() {
        return Err(Error::NegativeWeight { u, v, weight });
    }
    let mut stats = RunStats::default();
    Ok(Dijkstra::new(g).run(source, &mut stats).to_vec())
}

/// Full Dijkstra from every labeled vertex, keeping the `k` smallest
/// `(distance, seed)` pairs per vertex. Reference oracle for the fast
/// routes.
pub fn naive_multi_dijkstra(
    g: &Graph,
    labels: &LabelSet,
    k: usize,
) -> Result<(NeighborTable, RunStats)> {
    check_inputs(g, labels, k)?;
    let start = Instant::now();
    let mut stats = RunStats::default();
    let mut lists: Vec<Vec<Neighbor>> = vec![Vec::new(); g.num_vertices()];
    let mut dijkstra = Dijkstra::new(g);

    for &seed in labels.ids() {
        let dist = dijkstra.run(seed, &mut stats);
        for (v, &d) in dist.iter().enumerate() {
            if d.is_finite() {
                offer_bounded(&mut lists[v], k, Neighbor { seed, dist: d });
            }
        }
    }

    stats.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((NeighborTable::from_lists(lists), stats))
}

/// Inserts into a list kept sorted by `(dist, seed)` and capped at `k`.
fn offer_bounded(list: &mut Vec<Neighbor>, k: usize, nb: Neighbor) {
    if list.len() == k {
        match list.last() {
            Some(last) if nb.canonical_cmp(last) == Ordering::Less => {
                list.pop();
            }
            _ => return,
        }
    }
    let pos = list.partition_point(|x| x.canonical_cmp(&nb) == Ordering::Less);
    list.insert(pos, nb);
}

/// Bytes charged per queued `(seed, vertex)` pair: one heap entry plus one
/// pair-state slot.
pub const QUEUE_ENTRY_BYTES: u64 =
    (std::mem::size_of::<(Key, u32)>() + std::mem::size_of::<(u64, PairState)>()) as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MemoryEstimate {
    /// `min(n·|V|, k·|E_dir|)` queue entries.
    pub entries: u64,
    pub bytes: u64,
}

/// Analytic queue-size bound for a run with `n` labeled vertices.
///
/// The bound counts entries pushed by edge relaxations. The `n` initial
/// entries are not included, so a run whose labeled vertices include
/// isolated ones can exceed it by at most `n`.
pub fn memory_estimate(g: &Graph, n: usize, k: usize) -> MemoryEstimate {
    memory_estimate_for(g.num_vertices(), g.num_directed_edges(), n, k)
}

pub fn memory_estimate_for(
    num_vertices: usize,
    num_directed_edges: usize,
    n: usize,
    k: usize,
) -> MemoryEstimate {
    let by_labels = (n as u64).saturating_mul(num_vertices as u64);
    let by_edges = (k as u64).saturating_mul(num_directed_edges as u64);
    let entries = by_labels.min(by_edges);
    MemoryEstimate {
        entries,
        bytes: entries.saturating_mul(QUEUE_ENTRY_BYTES),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> Graph {
        Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap()
    }

    fn labels(ids: &[usize]) -> LabelSet {
        LabelSet::new(ids.iter().map(|&i| (i, i as f64))).unwrap()
    }

    fn nb(seed: usize, dist: f64) -> Neighbor {
        Neighbor { seed, dist }
    }

    fn run_all(g: &Graph, l: &LabelSet, k: usize) -> [(NeighborTable, RunStats); 3] {
        Algorithm::ALL.map(|a| geodesic_knn(a, g, l, k).unwrap())
    }

    #[test]
    fn path_graph_two_labels() {
        for (table, _) in run_all(&path4(), &labels(&[0, 3]), 2) {
            assert_eq!(table.get(1), &[nb(0, 1.0), nb(3, 2.0)]);
            assert_eq!(table.get(2), &[nb(3, 1.0), nb(0, 2.0)]);
            assert_eq!(table.get(0), &[nb(0, 0.0), nb(3, 3.0)]);
        }
    }

    #[test]
    fn labeled_vertex_is_its_own_nearest() {
        let g =
            Graph::from_edges(5, &[(0, 1, 0.3), (1, 2, 0.2), (2, 3, 0.7), (3, 4, 0.1)]).unwrap();
        let l = labels(&[1, 2, 4]);
        for (table, _) in run_all(&g, &l, 1) {
            for &v in l.ids() {
                assert_eq!(table.get(v), &[nb(v, 0.0)]);
            }
        }
    }

    #[test]
    fn disconnected_component_gets_empty_lists() {
        let g = Graph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)]).unwrap();
        for (table, _) in run_all(&g, &labels(&[0, 2]), 3) {
            assert_eq!(table.get(1).len(), 2);
            assert!(table.get(3).is_empty());
            assert!(table.get(4).is_empty());
        }
    }

    #[test]
    fn star_graph_single_source() {
        let edges: Vec<_> = (1..8).map(|leaf| (0, leaf, leaf as f64 * 0.5)).collect();
        let g = Graph::from_edges(8, &edges).unwrap();
        let (table, stats) = geodesic_knn_alg2(&g, &labels(&[0]), 1).unwrap();
        for leaf in 1..8 {
            assert_eq!(table.get(leaf), &[nb(0, leaf as f64 * 0.5)]);
        }
        assert!(stats.pops <= 8);
    }

    #[test]
    fn complete_graph_all_labeled() {
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((i, j, 1.0));
            }
        }
        let g = Graph::from_edges(4, &edges).unwrap();
        for (table, _) in run_all(&g, &labels(&[0, 1, 2, 3]), 4) {
            for v in 0..4 {
                let mut expected = vec![nb(v, 0.0)];
                expected.extend((0..4).filter(|&u| u != v).map(|u| nb(u, 1.0)));
                assert_eq!(table.get(v), expected.as_slice());
            }
        }
    }

    #[test]
    fn single_seed_matches_dijkstra() {
        let g =
            Graph::from_edges(5, &[(0, 1, 2.0), (0, 2, 0.5), (2, 1, 0.5), (1, 3, 1.0)]).unwrap();
        let dist = dijkstra(&g, 0).unwrap();
        assert_eq!(dist, vec![0.0, 1.0, 0.5, 2.0, f64::INFINITY]);
        let (table, _) = naive_multi_dijkstra(&g, &labels(&[0]), 3).unwrap();
        for (v, &d) in dist.iter().enumerate().take(4) {
            assert_eq!(table.get(v), &[nb(0, d)]);
        }
        assert!(table.get(4).is_empty());
    }

    #[test]
    fn ties_resolve_to_smaller_seed() {
        // 1 and 3 are both at distance 1 from 2
        let g = Graph::from_edges(4, &[(1, 2, 1.0), (2, 3, 1.0), (0, 1, 0.0)]).unwrap();
        for (table, _) in run_all(&g, &labels(&[3, 1, 0]), 1) {
            assert_eq!(table.get(2), &[nb(0, 1.0)]);
        }
        for (table, _) in run_all(&g, &labels(&[3, 1, 0]), 2) {
            assert_eq!(table.get(2), &[nb(0, 1.0), nb(1, 1.0)]);
        }
    }

    #[test]
    fn k_larger_than_label_count() {
        for (table, _) in run_all(&path4(), &labels(&[2]), 10) {
            assert_eq!(table.get(0), &[nb(2, 2.0)]);
        }
    }

    #[test]
    fn input_errors() {
        let g = path4();
        for a in Algorithm::ALL {
            assert!(matches!(
                geodesic_knn(a, &g, &LabelSet::new([]).unwrap(), 1),
                Err(Error::EmptyLabelSet)
            ));
            assert!(geodesic_knn(a, &g, &labels(&[0]), 0).is_err());
            assert!(geodesic_knn(a, &g, &labels(&[4]), 1).is_err());
            let neg = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, -0.5)]).unwrap();
            assert!(matches!(
                geodesic_knn(a, &neg, &labels(&[0]), 1),
                Err(Error::NegativeWeight { u: 1, v: 2, .. })
            ));
        }
        assert!(LabelSet::new([(1, 1.0), (1, 2.0)]).is_err());
        assert!(LabelSet::new([(1, f64::NAN)]).is_err());
    }

    #[test]
    fn memory_formula() {
        assert_eq!(memory_estimate_for(10, 40, 1, 5).entries, 10);
        assert_eq!(
            memory_estimate_for(100_000, 800_000, 1000, 7).entries,
            5_600_000
        );
        assert_eq!(
            memory_estimate_for(10, 40, 1, 5).bytes,
            10 * QUEUE_ENTRY_BYTES
        );
    }

    #[test]
    fn table_text_round_trip() {
        let (table, _) = geodesic_knn_alg1(&path4(), &labels(&[0, 3]), 2).unwrap();
        let text = table.to_text();
        assert!(text.starts_with("0: 0:0 3:3\n1: 0:1 3:2\n"));
        assert_eq!(
            NeighborTable::from_text(&text, Path::new("mem")).unwrap(),
            table
        );
        let empty = NeighborTable::from_lists(vec![vec![], vec![nb(1, 0.0)]]);
        assert_eq!(
            NeighborTable::from_text(&empty.to_text(), Path::new("mem")).unwrap(),
            empty
        );
        assert!(NeighborTable::from_text("1: 0:1\n", Path::new("mem")).is_err());
        assert!(NeighborTable::from_text("0: 0-1\n", Path::new("mem")).is_err());
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("dijkstra".parse::<Algorithm>().is_err());
    }
}
