//! Exhaustive enumeration of palette-consistent open boxes.
//!
//! Vertices are filled in row-major order. At vertex `(x, y)` the south
//! and west arms are already fixed by earlier vertices (except on the first
//! row and column), so the candidates are the crosses indexed by that
//! pair; a forward check rejects choices that leave the next vertex to the
//! east or north without any candidate. Each coloring of the box is reached
//! by exactly one path.
//!
//! The search is split into shards, one per coloring of a prefix of the
//! first vertex row (which spans the first two rows of vertical edges and
//! the first interior row of horizontal ones). Shards run on a
//! work-stealing pool and their counters are summed in shard order, so
//! totals do not depend on the thread count.

mod checkpoint;
mod checks;

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use checkpoint::{Checkpoint, CheckpointError, ShardCounters};
pub use checks::{
    bold_mask, check_lemma2, check_no_bold_three_bar, check_no_skipped_colors,
    check_parity_enforcement, levitsky_check, palette_colors, short_bar_violation, LevitskyReport,
};

use crate::palette::PlusPalette;
use crate::tiling2d::{EdgeColor, EdgeRef, Orientation, Patch, Rect, Sym};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("boxes need width and height of at least 2, got {0}×{1}")]
    TooSmall(usize, usize),
    #[error("pinned edge {0} is not inside the box")]
    BadPin(EdgeRef),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub width: usize,
    pub height: usize,
    /// Allowed colors of selected edges, as bit masks over color codes; the
    /// box spans `[0, width) × [0, height)`.
    pub pins: Vec<(EdgeRef, u32)>,
    /// Count only the least coloring (in edge order) of each orbit under
    /// the reflections mapping the box onto itself.
    pub symmetry_reduction: bool,
    /// Stop after this many search nodes.
    pub budget: Option<u64>,
    /// Stop after this many colorings.
    pub max_count: Option<u64>,
    pub deadline: Option<Duration>,
    /// Stop after finishing this many shards in this run.
    pub max_shards: Option<usize>,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub checkpoint: Option<PathBuf>,
    /// Witnesses kept in the outcome.
    pub witness_limit: usize,
    /// Names the visitor, so checkpoints of different checks never mix.
    pub tag: String,
}

impl SearchConfig {
    pub fn new(width: usize, height: usize) -> Self {
        SearchConfig {
            width,
            height,
            pins: Vec::new(),
            symmetry_reduction: false,
            budget: None,
            max_count: None,
            deadline: None,
            max_shards: None,
            threads: 0,
            checkpoint: None,
            witness_limit: 8,
            tag: String::new(),
        }
    }

    pub fn square(size: usize) -> Self {
        SearchConfig::new(size, size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Budget,
    MaxCount,
    Deadline,
    ShardLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub shard: usize,
    pub note: String,
    /// The offending box in the patch text format.
    pub patch: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub count: u64,
    /// True when every shard ran to completion: the count is exact and the
    /// absence of witnesses is a proof for this box size.
    pub exhausted: bool,
    pub stop: Option<StopReason>,
    pub violations: u64,
    pub witnesses: Vec<Witness>,
    pub nodes: u64,
    pub propagations: u64,
    pub shards: usize,
    pub shards_done: usize,
    /// Shards finished by earlier runs and restored from the checkpoint.
    pub shards_resumed: usize,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub shard: usize,
    pub nodes: u64,
    pub found: u64,
}

/// Checks each complete coloring; `Some(note)` reports a violation.
pub type Visitor<'a> = &'a (dyn Fn(&Patch) -> Option<String> + Sync);
pub type ProgressSink<'a> = &'a (dyn Fn(Progress) + Sync);

const UNKNOWN: u8 = 32;

struct Engine {
    w: usize,
    h: usize,
    crosses: Vec<[u8; 4]>,
    /// Candidate crosses keyed by `s * 33 + w`, 32 meaning "free".
    by_sw: Vec<Vec<u16>>,
    mask: Vec<u32>,
    /// Edge slots `[n, e, s, w]` of each vertex, row-major.
    verts: Vec<[usize; 4]>,
    /// Per vertex: whether the south and west arms were set earlier.
    known: Vec<(bool, bool)>,
    /// Per vertex: the vertex east of it, and the one north of it.
    east: Vec<Option<usize>>,
    north: Vec<Option<usize>>,
    alphabet: crate::tiling2d::Alphabet,
    syms: Vec<Sym>,
}

impl Engine {
    fn new(pp: &PlusPalette, cfg: &SearchConfig) -> Result<Self, SearchError> {
        let (w, h) = (cfg.width, cfg.height);
        if w < 2 || h < 2 {
            return Err(SearchError::TooSmall(w, h));
        }
        let crosses: Vec<[u8; 4]> = pp
            .crosses
            .iter()
            .map(|c| c.arms().map(|a| a.code()))
            .collect();
        let mut by_sw = vec![Vec::new(); 33 * 33];
        for (i, c) in crosses.iter().enumerate() {
            let (s, w_) = (c[2] as usize, c[3] as usize);
            for key in [s * 33 + w_, s * 33 + 32, 32 * 33 + w_, 32 * 33 + 32] {
                by_sw[key].push(i as u16);
            }
        }
        let rect = Rect::new(0, 0, w as i64, h as i64);
        let nv = (w + 1) * h;
        let slots = nv + w * (h + 1);
        let slot = |e: EdgeRef| -> usize {
            let (x, y) = (e.x as usize, e.y as usize);
            match e.orientation {
                Orientation::V => y * (w + 1) + x,
                Orientation::H => nv + y * w + x,
            }
        };
        let mut mask = vec![u32::MAX; slots];
        for &(e, m) in &cfg.pins {
            if !rect.has_interior_edge(e) {
                return Err(SearchError::BadPin(e));
            }
            mask[slot(e)] &= m;
        }
        let mut verts = Vec::new();
        let mut known = Vec::new();
        let mut east = Vec::new();
        let mut north = Vec::new();
        let idx = |x: usize, y: usize| (y - 1) * (w - 1) + (x - 1);
        for y in 1..h {
            for x in 1..w {
                let (xi, yi) = (x as i64, y as i64);
                verts.push([
                    slot(EdgeRef::v(xi, yi)),
                    slot(EdgeRef::h(xi, yi)),
                    slot(EdgeRef::v(xi, yi - 1)),
                    slot(EdgeRef::h(xi - 1, yi)),
                ]);
                known.push((y >= 2, x >= 2));
                east.push((x + 1 < w).then(|| idx(x + 1, y)));
                north.push((y + 1 < h).then(|| idx(x, y + 1)));
            }
        }
        let syms = if cfg.symmetry_reduction {
            Sym::ALL
                .into_iter()
                .filter(|s| !s.transposes() || w == h)
                .filter(|&s| s != Sym::E)
                .collect()
        } else {
            Vec::new()
        };
        Ok(Engine {
            w,
            h,
            crosses,
            by_sw,
            mask,
            verts,
            known,
            east,
            north,
            alphabet: pp.alphabet,
            syms,
        })
    }

    fn candidates(&self, v: usize, colors: &[u8]) -> &[u16] {
        let [_, _, s, w] = self.verts[v];
        let (ks, kw) = self.known[v];
        let s = if ks { colors[s] } else { UNKNOWN } as usize;
        let w = if kw { colors[w] } else { UNKNOWN } as usize;
        &self.by_sw[s * 33 + w]
    }

    fn fits(&self, v: usize, c: &[u8; 4]) -> bool {
        self.verts[v]
            .iter()
            .zip(c)
            .all(|(&slot, &code)| self.mask[slot] >> code & 1 == 1)
    }

    /// The east and north neighbours still have candidates once `c` sits
    /// at `v`.
    fn forward_ok(&self, v: usize, c: &[u8; 4], colors: &[u8]) -> bool {
        if let Some(e) = self.east[v] {
            let s = if self.known[e].0 {
                colors[self.verts[e][2]]
            } else {
                UNKNOWN
            } as usize;
            if self.by_sw[s * 33 + c[1] as usize].is_empty() {
                return false;
            }
        }
        if let Some(n) = self.north[v] {
            if self.by_sw[c[0] as usize * 33 + UNKNOWN as usize].is_empty() {
                return false;
            }
            let _ = n;
        }
        true
    }

    fn place(&self, v: usize, c: &[u8; 4], colors: &mut [u8]) {
        for (&slot, &code) in self.verts[v].iter().zip(c) {
            colors[slot] = code;
        }
    }

    fn patch(&self, colors: &[u8]) -> Patch {
        let nv = (self.w + 1) * self.h;
        let w = self.w;
        Patch::from_fn(
            Rect::new(0, 0, self.w as i64, self.h as i64),
            self.alphabet,
            |e| {
                let (x, y) = (e.x as usize, e.y as usize);
                let slot = match e.orientation {
                    Orientation::V => y * (w + 1) + x,
                    Orientation::H => nv + y * w + x,
                };
                EdgeColor::from_code(colors[slot]).expect("assigned")
            },
        )
    }

    fn is_canonical(&self, p: &Patch) -> bool {
        let key = |q: &Patch| q.edges().map(|(_, c)| c.code()).collect::<Vec<u8>>();
        let own = key(p);
        self.syms.iter().all(|&s| {
            let q = crate::tiling2d::apply_symmetry(p, s);
            let r = q.rect();
            own <= key(&q.translated(-r.x0, -r.y0))
        })
    }
}

struct Shared<'a> {
    stop: AtomicBool,
    reason: Mutex<Option<StopReason>>,
    nodes: AtomicU64,
    found: AtomicU64,
    started: Instant,
    cfg: &'a SearchConfig,
}

impl Shared<'_> {
    fn halt(&self, why: StopReason) {
        let mut r = self.reason.lock().unwrap();
        if r.is_none() {
            *r = Some(why);
        }
        self.stop.store(true, Ordering::Relaxed);
    }
}

#[derive(Default)]
struct ShardRun {
    counters: ShardCounters,
    propagations: u64,
    witnesses: Vec<Witness>,
    complete: bool,
}

struct Walker<'a> {
    engine: &'a Engine,
    shared: &'a Shared<'a>,
    visitor: Option<Visitor<'a>>,
    shard: usize,
    run: ShardRun,
    pending_nodes: u64,
    witness_limit: usize,
}

impl Walker<'_> {
    fn flush(&mut self) -> bool {
        let total = self
            .shared
            .nodes
            .fetch_add(self.pending_nodes, Ordering::Relaxed)
            + self.pending_nodes;
        self.pending_nodes = 0;
        let cfg = self.shared.cfg;
        if cfg.budget.is_some_and(|b| total >= b) {
            self.shared.halt(StopReason::Budget);
        }
        if cfg
            .deadline
            .is_some_and(|d| self.shared.started.elapsed() >= d)
        {
            self.shared.halt(StopReason::Deadline);
        }
        !self.shared.stop.load(Ordering::Relaxed)
    }

    fn leaf(&mut self, colors: &[u8]) -> bool {
        let e = self.engine;
        let needs_patch = self.visitor.is_some() || !e.syms.is_empty();
        if needs_patch {
            let p = e.patch(colors);
            if !e.syms.is_empty() && !e.is_canonical(&p) {
                return true;
            }
            if let Some(visit) = self.visitor {
                if let Some(note) = visit(&p) {
                    self.run.counters.violations += 1;
                    if self.run.witnesses.len() < self.witness_limit {
                        self.run.witnesses.push(Witness {
                            shard: self.shard,
                            note,
                            patch: p.to_text(),
                        });
                    }
                }
            }
        }
        self.run.counters.found += 1;
        let found = self.shared.found.fetch_add(1, Ordering::Relaxed) + 1;
        if self.shared.cfg.max_count.is_some_and(|m| found >= m) {
            self.shared.halt(StopReason::MaxCount);
            return false;
        }
        true
    }

    /// Depth-first search from vertex `v`; false once the search must stop.
    fn dfs(&mut self, v: usize, colors: &mut [u8]) -> bool {
        let e = self.engine;
        if v == e.verts.len() {
            return self.leaf(colors);
        }
        let saved = e.verts[v].map(|s| colors[s]);
        for &ci in e.candidates(v, colors) {
            let c = &e.crosses[ci as usize];
            if !e.fits(v, c) {
                continue;
            }
            self.run.counters.nodes += 1;
            self.pending_nodes += 1;
            if self.pending_nodes >= 4096 && !self.flush() {
                return false;
            }
            self.run.propagations += 1;
            if !e.forward_ok(v, c, colors) {
                continue;
            }
            e.place(v, c, colors);
            let go_on = self.dfs(v + 1, colors);
            for (&slot, &old) in e.verts[v].iter().zip(&saved) {
                colors[slot] = old;
            }
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Shards wanted before the search splits; the split depends only on the
/// palette and the box, never on the thread count.
const SHARD_TARGET: usize = 2048;

/// Shard prefixes: colorings of the shortest run of first-row vertices
/// that yields at least [`SHARD_TARGET`] shards (or of the whole first
/// row), as cross indices in search order.
fn shard_prefixes(engine: &Engine) -> (Vec<Vec<u16>>, u64) {
    let row = engine.w - 1;
    for depth in 1..=row {
        let (out, nodes) = prefixes_to(engine, depth);
        if out.len() >= SHARD_TARGET || depth == row {
            return (out, nodes);
        }
    }
    unreachable!("boxes have at least one vertex")
}

fn prefixes_to(engine: &Engine, row: usize) -> (Vec<Vec<u16>>, u64) {
    let mut out = Vec::new();
    let mut nodes = 0;
    let mut colors = vec![UNKNOWN; engine.mask.len()];
    fn go(
        e: &Engine,
        v: usize,
        row: usize,
        colors: &mut [u8],
        path: &mut Vec<u16>,
        out: &mut Vec<Vec<u16>>,
        nodes: &mut u64,
    ) {
        if v == row {
            out.push(path.clone());
            return;
        }
        let saved = e.verts[v].map(|s| colors[s]);
        for &ci in e.candidates(v, colors) {
            let c = &e.crosses[ci as usize];
            if !e.fits(v, c) {
                continue;
            }
            *nodes += 1;
            if !e.forward_ok(v, c, colors) {
                continue;
            }
            e.place(v, c, colors);
            path.push(ci);
            go(e, v + 1, row, colors, path, out, nodes);
            path.pop();
            for (&slot, &old) in e.verts[v].iter().zip(&saved) {
                colors[slot] = old;
            }
        }
    }
    go(
        engine,
        0,
        row,
        &mut colors,
        &mut Vec::new(),
        &mut out,
        &mut nodes,
    );
    (out, nodes)
}

fn config_hash(pp: &PlusPalette, cfg: &SearchConfig) -> u64 {
    let mut h = Sha256::new();
    h.update(b"aptile-enumerate-v1\n");
    h.update(pp.to_text());
    h.update(format!(
        "{}x{} sym={} tag={}\n",
        cfg.width, cfg.height, cfg.symmetry_reduction, cfg.tag
    ));
    for (e, m) in &cfg.pins {
        h.update(format!("{e}={m:08x}\n"));
    }
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}

/// Visits every coloring of the open `width × height` box in which each
/// interior cross belongs to `pp` and every pinned edge takes an allowed
/// color.
pub fn enumerate_boxes(
    pp: &PlusPalette,
    cfg: &SearchConfig,
    visitor: Option<Visitor<'_>>,
    progress: Option<ProgressSink<'_>>,
) -> Result<SearchOutcome, SearchError> {
    let started = Instant::now();
    let engine = Engine::new(pp, cfg)?;
    let (prefixes, prefix_nodes) = shard_prefixes(&engine);
    let n = prefixes.len();
    let hash = config_hash(pp, cfg);
    let mut ck = match &cfg.checkpoint {
        Some(path) => Checkpoint::load_or_new(path, hash, n)?,
        None => Checkpoint::new(hash, n),
    };
    let resumed = ck.finished();
    let shared = Shared {
        stop: AtomicBool::new(false),
        reason: Mutex::new(None),
        nodes: AtomicU64::new(prefix_nodes),
        found: AtomicU64::new(ck.counters.iter().map(|c| c.found).sum()),
        started,
        cfg,
    };
    let todo: Vec<usize> = (0..n).filter(|&i| !ck.done[i]).collect();
    let finished_now = AtomicU64::new(0);
    let ck_lock = Mutex::new((&mut ck, Instant::now()));

    let run_shard = |i: usize| -> ShardRun {
        if shared.stop.load(Ordering::Relaxed) {
            return ShardRun::default();
        }
        let mut colors = vec![UNKNOWN; engine.mask.len()];
        for (v, &ci) in prefixes[i].iter().enumerate() {
            engine.place(v, &engine.crosses[ci as usize], &mut colors);
        }
        let mut walker = Walker {
            engine: &engine,
            shared: &shared,
            visitor,
            shard: i,
            run: ShardRun::default(),
            pending_nodes: 0,
            witness_limit: cfg.witness_limit,
        };
        let complete = walker.dfs(prefixes[i].len(), &mut colors);
        walker.flush();
        let mut run = walker.run;
        run.complete = complete && !shared.stop.load(Ordering::Relaxed)
            || complete && shared.reason.lock().unwrap().is_none();
        if run.complete {
            {
                let mut guard = ck_lock.lock().unwrap();
                let (ck, last) = &mut *guard;
                ck.done[i] = true;
                ck.counters[i] = run.counters;
                if let Some(path) = &cfg.checkpoint {
                    if last.elapsed() >= Duration::from_millis(500) {
                        let _ = ck.save(path);
                        *last = Instant::now();
                    }
                }
            }
            if let Some(sink) = progress {
                sink(Progress {
                    shard: i,
                    nodes: run.counters.nodes,
                    found: run.counters.found,
                });
            }
            let done = finished_now.fetch_add(1, Ordering::Relaxed) + 1;
            if cfg.max_shards.is_some_and(|m| done as usize >= m) {
                shared.halt(StopReason::ShardLimit);
            }
        }
        run
    };

    let runs: Vec<(usize, ShardRun)> = if cfg.threads == 1 {
        todo.iter().map(|&i| (i, run_shard(i))).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| SearchError::Pool(e.to_string()))?;
        pool.install(|| todo.par_iter().map(|&i| (i, run_shard(i))).collect())
    };
    drop(ck_lock);
    if let Some(path) = &cfg.checkpoint {
        ck.save(path).map_err(CheckpointError::from)?;
    }

    let mut out = SearchOutcome {
        count: 0,
        exhausted: false,
        stop: *shared.reason.lock().unwrap(),
        violations: 0,
        witnesses: Vec::new(),
        nodes: prefix_nodes,
        propagations: 0,
        shards: n,
        shards_done: ck.finished(),
        shards_resumed: resumed,
        elapsed_ms: 0,
    };
    for (i, c) in ck.counters.iter().enumerate() {
        if ck.done[i] {
            out.count += c.found;
            out.violations += c.violations;
            out.nodes += c.nodes;
        }
    }
    for (_, run) in runs {
        out.propagations += run.propagations;
        if !run.complete {
            out.count += run.counters.found;
            out.violations += run.counters.violations;
            out.nodes += run.counters.nodes;
        }
        for w in run.witnesses {
            if out.witnesses.len() < cfg.witness_limit {
                out.witnesses.push(w);
            }
        }
    }
    out.exhausted = out.shards_done == n;
    if out.exhausted {
        out.stop = None;
    }
    out.elapsed_ms = started.elapsed().as_millis() as u64;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::palette::{verify, Cross, PlusPalette, Provenance};
    use crate::tiling2d::Alphabet;

    fn ce() -> PlusPalette {
        PlusPalette::builtin("ce").unwrap()
    }

    /// Generate-and-test over every coloring of the box's edges.
    fn naive_count(pp: &PlusPalette, w: i64, h: i64) -> u64 {
        let rect = Rect::new(0, 0, w, h);
        let edges: Vec<EdgeRef> = rect.interior_edges().collect();
        let codes = pp.alphabet.codes();
        let k = codes.len() as u64;
        let total = k.pow(edges.len() as u32);
        let mut count = 0;
        for mut idx in 0..total {
            let p = Patch::from_fn(rect, pp.alphabet, |_| {
                let c = codes[(idx % k) as usize];
                idx /= k;
                EdgeColor::from_code(c).unwrap()
            });
            if verify(&p, pp).is_ok() {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn matches_generate_and_test() {
        let pp = ce();
        let cfg = SearchConfig::new(2, 2);
        assert_eq!(
            enumerate_boxes(&pp, &cfg, None, None).unwrap().count,
            pp.len() as u64
        );
        assert_eq!(naive_count(&pp, 2, 2), pp.len() as u64);
        let out = enumerate_boxes(&pp, &SearchConfig::new(2, 3), None, None).unwrap();
        assert!(out.exhausted);
        assert_eq!(out.count, naive_count(&pp, 2, 3));
        let out = enumerate_boxes(&pp, &SearchConfig::new(3, 2), None, None).unwrap();
        assert_eq!(out.count, naive_count(&pp, 3, 2));
    }

    #[test]
    fn empty_palette_and_tiny_boxes() {
        let empty = PlusPalette::new(Alphabet::Base, [], Provenance::UserSupplied);
        assert_eq!(
            enumerate_boxes(&empty, &SearchConfig::square(4), None, None)
                .unwrap()
                .count,
            0
        );
        assert!(matches!(
            enumerate_boxes(&ce(), &SearchConfig::new(1, 4), None, None),
            Err(SearchError::TooSmall(1, 4))
        ));
    }

    #[test]
    fn every_visited_box_verifies() {
        let pp = ce();
        let check = |p: &Patch| verify(p, &pp).err().map(|v| format!("{v:?}"));
        let out = enumerate_boxes(&pp, &SearchConfig::square(3), Some(&check), None).unwrap();
        assert!(out.exhausted);
        assert!(out.count > 0);
        assert_eq!(out.violations, 0);
    }

    #[test]
    fn thread_count_does_not_change_totals() {
        let pp = ce();
        let mut cfg = SearchConfig::square(5);
        cfg.threads = 1;
        let one = enumerate_boxes(&pp, &cfg, None, None).unwrap();
        cfg.threads = 4;
        let four = enumerate_boxes(&pp, &cfg, None, None).unwrap();
        assert_eq!(
            (one.count, one.nodes, one.shards),
            (four.count, four.nodes, four.shards)
        );
    }

    #[test]
    fn symmetry_reduction_counts_orbits() {
        let pp = ce();
        for size in [2usize, 3, 4] {
            let all = enumerate_boxes(&pp, &SearchConfig::square(size), None, None).unwrap();
            let mut cfg = SearchConfig::square(size);
            cfg.symmetry_reduction = true;
            let reps = enumerate_boxes(&pp, &cfg, None, None).unwrap();
            assert!(reps.count * 8 >= all.count && reps.count <= all.count);
            if size == 2 {
                let orbits = pp.orbits().len() as u64;
                assert_eq!(reps.count, orbits);
            }
        }
        let _ = Cross::key;
    }

    #[test]
    fn pins_restrict_edges() {
        let pp = ce();
        let mut cfg = SearchConfig::square(3);
        cfg.pins.push((EdgeRef::v(1, 1), bold_mask(true)));
        let bold = enumerate_boxes(&pp, &cfg, None, None).unwrap().count;
        cfg.pins[0].1 = bold_mask(false);
        let pale = enumerate_boxes(&pp, &cfg, None, None).unwrap().count;
        let all = enumerate_boxes(&pp, &SearchConfig::square(3), None, None)
            .unwrap()
            .count;
        assert_eq!(bold + pale, all);
        cfg.pins[0].0 = EdgeRef::v(0, 1);
        assert!(matches!(
            enumerate_boxes(&pp, &cfg, None, None),
            Err(SearchError::BadPin(_))
        ));
    }

    #[test]
    fn interrupted_runs_resume_to_the_same_totals() {
        let pp = ce();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ck");
        let full = enumerate_boxes(&pp, &SearchConfig::square(5), None, None).unwrap();
        let mut cfg = SearchConfig::square(5);
        cfg.checkpoint = Some(path.clone());
        cfg.max_shards = Some(3);
        cfg.threads = 2;
        let first = enumerate_boxes(&pp, &cfg, None, None).unwrap();
        assert!(!first.exhausted);
        assert_eq!(first.stop, Some(StopReason::ShardLimit));
        cfg.max_shards = None;
        let seen = Mutex::new(Vec::new());
        let sink = |p: Progress| seen.lock().unwrap().push(p.shard);
        let second = enumerate_boxes(&pp, &cfg, None, Some(&sink)).unwrap();
        assert!(second.exhausted);
        assert!(second.shards_resumed >= 3);
        assert_eq!((second.count, second.nodes), (full.count, full.nodes));
        assert_eq!(
            seen.lock().unwrap().len() + second.shards_resumed,
            second.shards
        );
    }

    #[test]
    fn budget_stops_early() {
        let pp = ce();
        let mut cfg = SearchConfig::square(6);
        cfg.budget = Some(10);
        let out = enumerate_boxes(&pp, &cfg, None, None).unwrap();
        assert!(!out.exhausted);
        assert_eq!(out.stop, Some(StopReason::Budget));
        let mut cfg = SearchConfig::square(6);
        cfg.max_count = Some(5);
        cfg.threads = 1;
        let out = enumerate_boxes(&pp, &cfg, None, None).unwrap();
        assert_eq!(out.count, 5);
        assert!(!out.exhausted);
    }
}
