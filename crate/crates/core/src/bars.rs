//! Bars (maximal bold or pale runs along a grid line), bends and passes,
//! and the torus argument for the existence of bold 2-bars.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::palette::{cross_at, Cross, PlusPalette};
use crate::tiling2d::{EdgeColor, EdgeRef, Orientation, Patch, Sign, Sym};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarCount {
    pub bold: bool,
    pub length: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarStats {
    /// Bars lying wholly inside the window.
    pub histogram: Vec<BarCount>,
    /// Bars touching the end of their line segment within the window.
    pub truncated: Vec<BarCount>,
    pub lines: usize,
    pub mean_length: f64,
}

impl BarStats {
    pub fn count(&self, bold: bool, length: usize) -> u64 {
        self.histogram
            .iter()
            .find(|b| b.bold == bold && b.length == length)
            .map_or(0, |b| b.count)
    }

    pub fn count_length(&self, length: usize) -> u64 {
        self.count(true, length) + self.count(false, length)
    }

    /// Edges covered, per boldness class, counting truncated bars too.
    pub fn covered(&self, bold: bool) -> u64 {
        self.histogram
            .iter()
            .chain(&self.truncated)
            .filter(|b| b.bold == bold)
            .map(|b| b.length as u64 * b.count)
            .sum()
    }
}

fn flatten(m: BTreeMap<(bool, usize), u64>) -> Vec<BarCount> {
    m.into_iter()
        .map(|((bold, length), count)| BarCount {
            bold,
            length,
            count,
        })
        .collect()
}

/// Boldness along every interior grid line of the patch.
pub fn line_boldness(p: &Patch) -> Vec<Vec<bool>> {
    let r = p.rect();
    let mut lines = Vec::new();
    for x in r.x0 + 1..r.x1 {
        lines.push(
            (r.y0..r.y1)
                .map(|y| p.get(EdgeRef::v(x, y)).unwrap().bold())
                .collect(),
        );
    }
    for y in r.y0 + 1..r.y1 {
        lines.push(
            (r.x0..r.x1)
                .map(|x| p.get(EdgeRef::h(x, y)).unwrap().bold())
                .collect(),
        );
    }
    lines
}

pub fn bar_histogram(p: &Patch) -> BarStats {
    let mut whole = BTreeMap::new();
    let mut cut = BTreeMap::new();
    let lines = line_boldness(p);
    for line in &lines {
        let mut i = 0;
        while i < line.len() {
            let j = (i..line.len())
                .find(|&j| line[j] != line[i])
                .unwrap_or(line.len());
            let target = if i == 0 || j == line.len() {
                &mut cut
            } else {
                &mut whole
            };
            *target.entry((line[i], j - i)).or_insert(0u64) += 1;
            i = j;
        }
    }
    let (n, total) = whole.iter().fold((0u64, 0u64), |(n, t), (&(_, len), &c)| {
        (n + c, t + c * len as u64)
    });
    BarStats {
        histogram: flatten(whole),
        truncated: flatten(cut),
        lines: lines.len(),
        mean_length: if n == 0 { 0.0 } else { total as f64 / n as f64 },
    }
}

/// A bar lying wholly inside a patch: `length` edges on grid line `line`
/// starting at coordinate `from` along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bar {
    pub orientation: Orientation,
    pub line: i64,
    pub from: i64,
    pub length: usize,
    pub bold: bool,
}

/// Bars of `p` that do not touch the ends of their line segment.
pub fn whole_bars(p: &Patch) -> Vec<Bar> {
    let r = p.rect();
    let lines = line_boldness(p);
    let nv = (r.x1 - r.x0 - 1).max(0) as usize;
    let mut out = Vec::new();
    for (li, line) in lines.iter().enumerate() {
        let (orientation, at, start) = if li < nv {
            (Orientation::V, r.x0 + 1 + li as i64, r.y0)
        } else {
            (Orientation::H, r.y0 + 1 + (li - nv) as i64, r.x0)
        };
        let mut i = 0;
        while i < line.len() {
            let j = (i..line.len())
                .find(|&j| line[j] != line[i])
                .unwrap_or(line.len());
            if i > 0 && j < line.len() {
                out.push(Bar {
                    orientation,
                    line: at,
                    from: start + i as i64,
                    length: j - i,
                    bold: line[i],
                });
            }
            i = j;
        }
    }
    out
}

/// Quadrant of a bend, named by its two bold arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    NE,
    NW,
    SW,
    SE,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrossKind {
    /// Four arms point at the vertex.
    Bend(Option<Quadrant>),
    /// Exactly one arm points at the vertex.
    Pass,
    Other,
}

fn inward(c: &Cross) -> usize {
    [
        c.n.pointer() == Sign::Neg,
        c.e.pointer() == Sign::Neg,
        c.s.pointer() == Sign::Pos,
        c.w.pointer() == Sign::Pos,
    ]
    .iter()
    .filter(|&&b| b)
    .count()
}

pub fn classify(c: &Cross) -> CrossKind {
    match inward(c) {
        4 => {
            let q = match (c.n.bold(), c.e.bold(), c.s.bold(), c.w.bold()) {
                (true, true, false, false) => Some(Quadrant::NE),
                (true, false, false, true) => Some(Quadrant::NW),
                (false, false, true, true) => Some(Quadrant::SW),
                (false, true, true, false) => Some(Quadrant::SE),
                _ => None,
            };
            CrossKind::Bend(q)
        }
        1 => CrossKind::Pass,
        _ => CrossKind::Other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossStats {
    pub crosses: u64,
    pub bends: u64,
    pub passes: u64,
    pub other: u64,
    pub bend_fraction: f64,
    /// Bends per quadrant in `NE, NW, SW, SE` order.
    pub quadrants: [u64; 4],
    /// Bends whose bold arms do not form a quadrant.
    pub irregular_bends: u64,
    /// Consecutive bends on each vertical line alternate between north and
    /// south, and on each horizontal line between east and west.
    pub alternating: bool,
}

pub fn classify_crosses(p: &Patch) -> (BTreeMap<(i64, i64), CrossKind>, CrossStats) {
    let r = p.rect();
    let mut kinds = BTreeMap::new();
    let mut st = CrossStats {
        crosses: 0,
        bends: 0,
        passes: 0,
        other: 0,
        bend_fraction: 0.0,
        quadrants: [0; 4],
        irregular_bends: 0,
        alternating: true,
    };
    for (x, y) in r.interior_vertices() {
        let k = classify(&cross_at(p, x, y).expect("interior"));
        st.crosses += 1;
        match k {
            CrossKind::Bend(q) => {
                st.bends += 1;
                match q {
                    Some(q) => st.quadrants[q as usize] += 1,
                    None => st.irregular_bends += 1,
                }
            }
            CrossKind::Pass => st.passes += 1,
            CrossKind::Other => st.other += 1,
        }
        kinds.insert((x, y), k);
    }
    if st.crosses > 0 {
        st.bend_fraction = st.bends as f64 / st.crosses as f64;
    }
    let north = |q: Quadrant| matches!(q, Quadrant::NE | Quadrant::NW);
    let east = |q: Quadrant| matches!(q, Quadrant::NE | Quadrant::SE);
    let alternates = |seq: Vec<bool>| seq.windows(2).all(|w| w[0] != w[1]);
    let quadrant_at = |x: i64, y: i64| match kinds.get(&(x, y)) {
        Some(CrossKind::Bend(Some(q))) => Some(*q),
        _ => None,
    };
    for x in r.x0 + 1..r.x1 {
        let seq = (r.y0 + 1..r.y1)
            .filter_map(|y| quadrant_at(x, y))
            .map(north)
            .collect();
        st.alternating &= alternates(seq);
    }
    for y in r.y0 + 1..r.y1 {
        let seq = (r.x0 + 1..r.x1)
            .filter_map(|x| quadrant_at(x, y))
            .map(east)
            .collect();
        st.alternating &= alternates(seq);
    }
    (kinds, st)
}

/// Outcome of a torus search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusSearch {
    pub period: usize,
    /// Boldness patterns allowed along every line, as bit strings.
    pub line_patterns: Vec<String>,
    pub solutions: u64,
    pub nodes: u64,
}

/// Exhaustive search for colorings of the `n×n` torus in which every cross
/// is in `pp` and the boldness along every line (read cyclically from
/// coordinate 0) is one of `patterns`.
pub fn torus_search(n: usize, patterns: &[Vec<bool>], pp: &PlusPalette) -> TorusSearch {
    assert!(n >= 2 && patterns.iter().all(|p| p.len() == n));
    let crosses: Vec<Cross> = pp.crosses.iter().copied().collect();
    // edges: V(x, y) at index x*n + y, H(x, y) at n*n + y*n + x, so both
    // kinds of line are contiguous runs
    let mut colors: Vec<Option<EdgeColor>> = vec![None; 2 * n * n];
    let v = |x: usize, y: usize| x * n + y;
    let h = |x: usize, y: usize| n * n + y * n + x;
    let line_ok = |colors: &[Option<EdgeColor>], start: usize| {
        patterns
            .iter()
            .any(|pat| (0..n).all(|i| colors[start + i].map_or(true, |c| c.bold() == pat[i])))
    };
    let mut out = TorusSearch {
        period: n,
        line_patterns: patterns
            .iter()
            .map(|p| p.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect(),
        solutions: 0,
        nodes: 0,
    };
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        n: usize,
        crosses: &[Cross],
        colors: &mut Vec<Option<EdgeColor>>,
        slots: &dyn Fn(usize) -> [usize; 4],
        lines_of: &dyn Fn(usize) -> [usize; 2],
        line_ok: &dyn Fn(&[Option<EdgeColor>], usize) -> bool,
        out: &mut TorusSearch,
    ) {
        out.nodes += 1;
        if i == n * n {
            out.solutions += 1;
            return;
        }
        let s = slots(i);
        for c in crosses {
            let mut fresh = [false; 4];
            let mut ok = true;
            for (k, (&slot, color)) in s.iter().zip(c.arms()).enumerate() {
                match colors[slot] {
                    None => {
                        colors[slot] = Some(color);
                        fresh[k] = true;
                    }
                    Some(old) if old == color => {}
                    Some(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && lines_of(i).iter().all(|&start| line_ok(colors, start)) {
                rec(i + 1, n, crosses, colors, slots, lines_of, line_ok, out);
            }
            for k in 0..4 {
                if fresh[k] {
                    colors[s[k]] = None;
                }
            }
        }
    }
    let slots = |i: usize| {
        let (x, y) = (i % n, i / n);
        let (xm, ym) = ((x + n - 1) % n, (y + n - 1) % n);
        [v(x, y), h(x, y), v(x, ym), h(xm, y)]
    };
    // every arm at (x, y) lies on vertical line x or horizontal line y
    let lines_of = |i: usize| [v(i % n, 0), h(0, i / n)];
    rec(
        0,
        n,
        &crosses,
        &mut colors,
        &slots,
        &lines_of,
        &line_ok,
        &mut out,
    );
    out
}

/// The palette with every color reduced to its boldness bit.
pub fn boldness_projection(pp: &PlusPalette) -> PlusPalette {
    let strip = |c: EdgeColor| EdgeColor::new(0, c.bold(), Sign::Neg);
    PlusPalette {
        crosses: pp
            .crosses
            .iter()
            .map(|c| Cross::from_arms(c.arms().map(strip)))
            .collect(),
        ..pp.clone()
    }
}

/// All cyclic rotations of `base`, deduplicated.
pub fn rotations(base: &[bool]) -> Vec<Vec<bool>> {
    let mut out: Vec<Vec<bool>> = (0..base.len())
        .map(|r| base[r..].iter().chain(&base[..r]).copied().collect())
        .collect();
    out.sort();
    out.dedup();
    out
}

fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}

/// Number of perfect matchings of `Z_n` into pairs of equal parity, by
/// enumerating all perfect matchings.
pub fn parity_matchings(n: usize) -> (u64, u64) {
    fn go(free: &mut Vec<usize>, all: &mut u64, good: &mut u64, ok: bool) {
        if free.is_empty() {
            *all += 1;
            *good += ok as u64;
            return;
        }
        let a = free.remove(0);
        for j in 0..free.len() {
            let b = free.remove(j);
            go(free, all, good, ok && a % 2 == b % 2);
            free.insert(j, b);
        }
        free.insert(0, a);
    }
    let (mut all, mut good) = (0, 0);
    go(&mut (0..n).collect(), &mut all, &mut good, true);
    (all, good)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsatCertificate {
    /// Lines of bold 4-bars and pale 2-bars on the 6×6 torus.
    pub search: TorusSearch,
    pub matchings_z6: u64,
    pub parity_matchings_z6: u64,
    /// The 6×6 search with colors reduced to boldness: the bar pattern alone
    /// does not rule the torus out.
    pub boldness_only: TorusSearch,
    /// Control: the 8×8 torus with bold 4-bars and pale 4-bars, colors
    /// reduced to boldness; solutions exist.
    pub control: TorusSearch,
    pub parity_matchings_z8: u64,
    pub elapsed_ms: u64,
}

pub fn torus_impossibility(pp: &PlusPalette) -> UnsatCertificate {
    let t0 = Instant::now();
    let search = torus_search(6, &rotations(&bits("111100")), pp);
    let bold = boldness_projection(pp);
    let boldness_only = torus_search(6, &rotations(&bits("111100")), &bold);
    let control = torus_search(8, &rotations(&bits("11110000")), &bold);
    let (matchings_z6, parity_matchings_z6) = parity_matchings(6);
    let (_, parity_matchings_z8) = parity_matchings(8);
    UnsatCertificate {
        search,
        matchings_z6,
        parity_matchings_z6,
        boldness_only,
        control,
        parity_matchings_z8,
        elapsed_ms: t0.elapsed().as_millis() as u64,
    }
}

/// A bold 2-bar: two bold edges on one line flanked by pale edges.
/// `at` is its first (lowest) edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoBar {
    pub at: EdgeRef,
}

impl TwoBar {
    fn edge(&self, lateral: i64, along: i64) -> EdgeRef {
        let e = self.at;
        match e.orientation {
            Orientation::V => EdgeRef::v(e.x + lateral, e.y + along),
            Orientation::H => EdgeRef::h(e.x + along, e.y + lateral),
        }
    }

    /// The four edges a bar at lateral offset `lateral` and the same
    /// position along the line reads: pale, bold, bold, pale.
    fn footprint(&self, lateral: i64) -> [EdgeRef; 4] {
        [-1, 0, 1, 2].map(|a| self.edge(lateral, a))
    }
}

pub fn is_bold_two_bar(p: &Patch, bar: TwoBar, lateral: i64) -> Option<bool> {
    let f = bar.footprint(lateral);
    let b: Vec<bool> = f
        .iter()
        .map(|&e| p.get(e).map(|c| c.bold()))
        .collect::<Option<_>>()?;
    Some(!b[0] && b[1] && b[2] && !b[3])
}

pub fn bold_two_bars(p: &Patch) -> Vec<TwoBar> {
    p.edges()
        .map(|(e, _)| TwoBar { at: e })
        .filter(|&b| is_bold_two_bar(p, b, 0) == Some(true))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("the neighborhood of the 2-bar at {at} leaves the patch")]
pub struct MarginTooSmall {
    pub at: EdgeRef,
}

/// Nearest lateral offset on each side at which every bold 2-bar of `p` has
/// a partner bold 2-bar at the same position along the line, searching
/// `-max..=max`.
pub fn calibrate_partners(p: &Patch, max: i64) -> Vec<i64> {
    let mut keep: Vec<i64> = (-max..=max).filter(|&d| d != 0).collect();
    for bar in bold_two_bars(p) {
        keep.retain(|&d| is_bold_two_bar(p, bar, d) != Some(false));
    }
    let nearest = |side: &mut dyn Iterator<Item = i64>| side.min_by_key(|d: &i64| d.abs());
    let below = nearest(&mut keep.iter().copied().filter(|&d| d < 0));
    let above = nearest(&mut keep.iter().copied().filter(|&d| d > 0));
    below.into_iter().chain(above).collect()
}

/// Partner offsets used by [`two_bar_neighborhood_ok`], as calibrated on
/// the enhanced tiling (see the `calibration` test).
pub const PARTNER_OFFSETS: [i64; 2] = [-2, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodWitness {
    /// The lateral offset lacking a partner bar.
    pub side: i64,
}

/// True when bold 2-bars sit two lines away on both sides of `bar`, at the
/// same position along the line.
pub fn two_bar_neighborhood_ok(
    p: &Patch,
    bar: TwoBar,
) -> Result<Result<(), NeighborhoodWitness>, MarginTooSmall> {
    for side in PARTNER_OFFSETS {
        match is_bold_two_bar(p, bar, side) {
            None => return Err(MarginTooSmall { at: bar.at }),
            Some(false) => return Ok(Err(NeighborhoodWitness { side })),
            Some(true) => {}
        }
    }
    Ok(Ok(()))
}

/// Horizontal counterpart of a vertical bar check, for symmetric callers.
pub fn transpose_bar(bar: TwoBar) -> TwoBar {
    TwoBar {
        at: Sym::D.apply_edge(bar.at),
    }
}
