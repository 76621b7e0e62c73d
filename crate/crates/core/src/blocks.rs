//! Block structure of boxes.
//!
//! A k-block is a `2^k`-square with monochromatic sides made of four
//! (k−1)-blocks; in a box the level-k block grid is a pair of residues
//! `(ox, oy)` modulo `2^k`. Sides are compared on the base colors (bracket,
//! boldness, pointer): the parity pointer alternates along even lines and
//! so is never constant on a side.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::palette::{verify, PlusPalette, Violation};
use crate::tiling2d::{generate, EdgeColor, EdgeRef, Orientation, Patch, Pose, Rect, Sym};

/// Edges `from..to` along one grid line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub orientation: Orientation,
    pub line: i64,
    pub from: i64,
    pub to: i64,
}

impl Segment {
    pub fn edges(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        (self.from..self.to).map(move |a| match self.orientation {
            Orientation::V => EdgeRef::v(self.line, a),
            Orientation::H => EdgeRef::h(a, self.line),
        })
    }

    /// The edge whose base color disagrees with the segment's majority, if
    /// the segment is not monochromatic.
    pub fn odd_edge(&self, p: &Patch) -> Option<EdgeRef> {
        let colors: Vec<(EdgeRef, EdgeColor)> = self
            .edges()
            .map(|e| (e, p.get(e).expect("inside").base()))
            .collect();
        if colors.iter().all(|&(_, c)| c == colors[0].1) {
            return None;
        }
        let majority = colors
            .iter()
            .map(|&(_, c)| c)
            .max_by_key(|&c| {
                (
                    colors.iter().filter(|&&(_, d)| d == c).count(),
                    std::cmp::Reverse(c),
                )
            })
            .unwrap();
        colors
            .iter()
            .find(|&&(_, c)| c != majority)
            .map(|&(e, _)| e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub level: u32,
    /// Residues of the block grid lines modulo `2^level`.
    pub offset: (i64, i64),
    /// The box left after trimming the margins.
    pub inner: Rect,
    pub blocks: Vec<Rect>,
}

impl BlockDecomposition {
    /// Margins trimmed as `[left, right, bottom, top]`.
    pub fn margins(&self, outer: Rect) -> [i64; 4] {
        [
            self.inner.x0 - outer.x0,
            outer.x1 - self.inner.x1,
            self.inner.y0 - outer.y0,
            outer.y1 - self.inner.y1,
        ]
    }

    /// The decomposition one level down, over the same inner box.
    pub fn quartered(&self) -> Option<BlockDecomposition> {
        let k = self.level.checked_sub(1)?;
        let side = 1i64 << k;
        Some(BlockDecomposition {
            level: k,
            offset: (
                self.offset.0.rem_euclid(side),
                self.offset.1.rem_euclid(side),
            ),
            inner: self.inner,
            blocks: blocks_of(self.inner, k),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum BlockError {
    #[error("patch violates the palette at {:?}", .0.vertex)]
    NotVerified(Violation),
    #[error("no level-{level} block grid fits (witness {witness:?})")]
    NoDecomposition {
        level: u32,
        /// An edge breaking the side of a block on the best-fitting grid;
        /// absent when not even one block fits in the box.
        witness: Option<EdgeRef>,
    },
    #[error("level-{level} block grids at several offsets: {offsets:?}")]
    NonUnique {
        level: u32,
        offsets: Vec<(i64, i64)>,
    },
}

/// The largest box inside `r` bounded by grid lines `≡ offset (mod 2^k)`,
/// if it holds at least one block.
fn inner_box(r: Rect, k: u32, (ox, oy): (i64, i64)) -> Option<Rect> {
    let s = 1i64 << k;
    let up = |a: i64, o: i64| a + (o - a).rem_euclid(s);
    let down = |a: i64, o: i64| a - (a - o).rem_euclid(s);
    let inner = Rect::new(up(r.x0, ox), up(r.y0, oy), down(r.x1, ox), down(r.y1, oy));
    (inner.width() >= s && inner.height() >= s).then_some(inner)
}

fn blocks_of(inner: Rect, k: u32) -> Vec<Rect> {
    let s = 1i64 << k;
    let mut out = Vec::new();
    let mut y = inner.y0;
    while y < inner.y1 {
        let mut x = inner.x0;
        while x < inner.x1 {
            out.push(Rect::square(x, y, s));
            x += s;
        }
        y += s;
    }
    out
}

/// Side segments of the level-`j` grid strictly inside `inner`, whose
/// corners lie on that grid.
fn grid_segments(inner: Rect, j: u32) -> Vec<Segment> {
    let s = 1i64 << j;
    let mut out = Vec::new();
    let mut x = inner.x0 + s;
    while x < inner.x1 {
        let mut y = inner.y0;
        while y < inner.y1 {
            out.push(Segment {
                orientation: Orientation::V,
                line: x,
                from: y,
                to: y + s,
            });
            y += s;
        }
        x += s;
    }
    let mut y = inner.y0 + s;
    while y < inner.y1 {
        let mut x = inner.x0;
        while x < inner.x1 {
            out.push(Segment {
                orientation: Orientation::H,
                line: y,
                from: x,
                to: x + s,
            });
            x += s;
        }
        y += s;
    }
    out
}

fn all_segments(inner: Rect, k: u32) -> impl Iterator<Item = Segment> {
    (1..=k).rev().flat_map(move |j| grid_segments(inner, j))
}

fn offsets(k: u32) -> impl Iterator<Item = (i64, i64)> {
    let s = 1i64 << k;
    (0..s).flat_map(move |oy| (0..s).map(move |ox| (ox, oy)))
}

fn grid_fits(p: &Patch, k: u32, offset: (i64, i64)) -> Option<Rect> {
    let inner = inner_box(p.rect(), k, offset)?;
    all_segments(inner, k)
        .all(|s| s.odd_edge(p).is_none())
        .then_some(inner)
}

/// Offset with the fewest broken sides, and its broken sides.
fn best_fit(p: &Patch, k: u32) -> Option<((i64, i64), Rect, Vec<(Segment, EdgeRef)>)> {
    offsets(k)
        .filter_map(|o| {
            let inner = inner_box(p.rect(), k, o)?;
            let bad: Vec<(Segment, EdgeRef)> = all_segments(inner, k)
                .filter_map(|s| s.odd_edge(p).map(|e| (s, e)))
                .collect();
            Some((o, inner, bad))
        })
        .min_by_key(|(o, _, bad)| (bad.len(), o.1, o.0))
}

/// The level-k block decomposition of the box; unique when it exists.
pub fn decompose(p: &Patch, k: u32) -> Result<BlockDecomposition, BlockError> {
    let found: Vec<((i64, i64), Rect)> = offsets(k)
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter_map(|o| grid_fits(p, k, o).map(|inner| (o, inner)))
        .collect();
    match found.len() {
        1 => {
            let (offset, inner) = found[0];
            Ok(BlockDecomposition {
                level: k,
                offset,
                inner,
                blocks: blocks_of(inner, k),
            })
        }
        0 => Err(BlockError::NoDecomposition {
            level: k,
            witness: best_fit(p, k).and_then(|(_, _, bad)| bad.first().map(|&(_, e)| e)),
        }),
        _ => Err(BlockError::NonUnique {
            level: k,
            offsets: found.iter().map(|&(o, _)| o).collect(),
        }),
    }
}

/// [`decompose`] after checking the patch against the palette.
pub fn decompose_verified(
    p: &Patch,
    k: u32,
    pp: &PlusPalette,
) -> Result<BlockDecomposition, BlockError> {
    verify(p, pp).map_err(BlockError::NotVerified)?;
    decompose(p, k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilednessReport {
    pub k: u32,
    pub tiled: bool,
    /// `[left, right, bottom, top]` margins of the first grid that works.
    pub margins: Option<[i64; 4]>,
    pub offset: Option<(i64, i64)>,
    pub witness: Option<EdgeRef>,
}

/// Whether trimming margins thinner than `2^k` leaves a box of open k-blocks.
pub fn is_k_tiled(p: &Patch, k: u32) -> TilednessReport {
    let hit = offsets(k).find_map(|o| grid_fits(p, k, o).map(|inner| (o, inner)));
    match hit {
        Some((o, inner)) => {
            let d = BlockDecomposition {
                level: k,
                offset: o,
                inner,
                blocks: Vec::new(),
            };
            TilednessReport {
                k,
                tiled: true,
                margins: Some(d.margins(p.rect())),
                offset: Some(o),
                witness: None,
            }
        }
        None => TilednessReport {
            k,
            tiled: false,
            margins: None,
            offset: None,
            witness: best_fit(p, k).and_then(|(_, _, bad)| bad.first().map(|&(_, e)| e)),
        },
    }
}

/// The four (k−1)-medians of a k-block: segments from its center to the
/// middle of each side, as `[north, east, south, west]`.
pub fn medians(block: Rect) -> [Segment; 4] {
    let h = block.width() / 2;
    let (cx, cy) = (block.x0 + h, block.y0 + h);
    [
        Segment {
            orientation: Orientation::V,
            line: cx,
            from: cy,
            to: block.y1,
        },
        Segment {
            orientation: Orientation::H,
            line: cy,
            from: cx,
            to: block.x1,
        },
        Segment {
            orientation: Orientation::V,
            line: cx,
            from: block.y0,
            to: cy,
        },
        Segment {
            orientation: Orientation::H,
            line: cy,
            from: block.x0,
            to: cx,
        },
    ]
}

/// Edges of an open block off its medians, relative to the block corner,
/// in a fixed order.
fn frame_edges(side: i64) -> Vec<EdgeRef> {
    let h = side / 2;
    Rect::new(0, 0, side, side)
        .interior_edges()
        .filter(|e| e.line() != h)
        .collect()
}

pub type Frame = Vec<EdgeColor>;

pub fn frame_at(p: &Patch, x: i64, y: i64, side: i64) -> Option<Frame> {
    frame_edges(side)
        .iter()
        .map(|e| p.get(e.translated(x, y)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub holds: bool,
    pub vacuous: bool,
    pub witness: Option<EdgeRef>,
    /// Lower-left corner of an offending block or frame occurrence.
    pub at: Option<(i64, i64)>,
}

impl Clause {
    fn ok(vacuous: bool) -> Self {
        Clause {
            holds: true,
            vacuous,
            witness: None,
            at: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub k: u32,
    pub offset: (i64, i64),
    pub blocks: usize,
    /// Borders between blocks are monochromatic.
    pub borders_monochromatic: Clause,
    /// Every occurrence of a block frame pattern sits on the block grid.
    pub frames_enclosed: Clause,
    /// All blocks have the same frame.
    pub frames_equal: Clause,
}

impl Lemma1Report {
    pub fn holds(&self) -> bool {
        self.borders_monochromatic.holds && self.frames_enclosed.holds && self.frames_equal.holds
    }
}

/// Checks the three clauses on the best-fitting level-k grid of the box, so
/// a broken border is reported as a clause failure rather than as a missing
/// decomposition.
pub fn check_lemma1(p: &Patch, k: u32) -> Result<Lemma1Report, BlockError> {
    let (offset, inner, bad) = best_fit(p, k).ok_or(BlockError::NoDecomposition {
        level: k,
        witness: None,
    })?;
    let blocks = blocks_of(inner, k);
    let borders = match bad.first() {
        None => Clause::ok(k == 0),
        Some(&(s, e)) => Clause {
            holds: false,
            vacuous: false,
            witness: Some(e),
            at: Some((s.line, s.from)),
        },
    };
    let side = 1i64 << k;
    let frames: Vec<Frame> = blocks
        .iter()
        .map(|b| frame_at(p, b.x0, b.y0, side).expect("block inside"))
        .collect();
    let empty_frame = frame_edges(side).is_empty();

    let frames_equal = match frames.iter().position(|f| f != &frames[0]) {
        None => Clause::ok(empty_frame || blocks.len() < 2),
        Some(i) => {
            let edges = frame_edges(side);
            let j = (0..edges.len())
                .find(|&j| frames[i][j] != frames[0][j])
                .unwrap();
            let b = blocks[i];
            Clause {
                holds: false,
                vacuous: false,
                witness: Some(edges[j].translated(b.x0, b.y0)),
                at: Some((b.x0, b.y0)),
            }
        }
    };

    let frames_enclosed = if empty_frame {
        Clause::ok(true)
    } else {
        let patterns: BTreeSet<&Frame> = frames.iter().collect();
        let r = p.rect();
        let positions: Vec<(i64, i64)> = (r.y0..=r.y1 - side)
            .flat_map(|y| (r.x0..=r.x1 - side).map(move |x| (x, y)))
            .collect();
        let stray = positions.into_par_iter().find_first(|&(x, y)| {
            let aligned =
                (x - offset.0).rem_euclid(side) == 0 && (y - offset.1).rem_euclid(side) == 0;
            !aligned && frame_at(p, x, y, side).is_some_and(|f| patterns.contains(&f))
        });
        match stray {
            None => Clause::ok(false),
            Some(at) => Clause {
                holds: false,
                vacuous: false,
                witness: None,
                at: Some(at),
            },
        }
    };

    Ok(Lemma1Report {
        k,
        offset,
        blocks: blocks.len(),
        borders_monochromatic: borders,
        frames_enclosed,
        frames_equal,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorollarySample {
    pub pose: Pose,
    /// Lower-left corner of the `2^k`-square.
    pub corner: (i64, i64),
    /// Lower-left corner, in the reference tiling, of the `2^(k+4)`-block
    /// containing the square's pattern.
    pub found_in: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub k: u32,
    pub samples: usize,
    pub tested: usize,
    pub extended: usize,
    pub excluded_axis: usize,
    pub excluded_not_1_tiled: usize,
    pub failures: Vec<CorollarySample>,
}

impl CorollaryReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty() && self.extended == self.tested
    }
}

/// Largest `k` accepted by [`check_corollary`]: the reference region has
/// side `17 · 2^(k+4)`.
pub const COROLLARY_MAX_K: u32 = 3;

/// Samples `2^k`-squares (closed, with their sides) of randomly shifted and
/// reflected tilings whose 3× wider cocentric box avoids the axes and is
/// 1-tiled, and looks for each square's pattern inside a `(k+4)`-block
/// (sides included) of the unshifted tiling.
pub fn check_corollary(k: u32, samples: usize, seed: u64) -> CorollaryReport {
    assert!(k <= COROLLARY_MAX_K, "k above {COROLLARY_MAX_K}");
    let s = 1i64 << k;
    let big = 1i64 << (k + 4);
    let reach = 8 * big;
    let reference = generate(
        &Pose::identity(64),
        Rect::new(-reach, -reach, reach + big, reach + big),
    )
    .expect("reference window");
    // square pattern: interior and side edges of [0, s]²
    let pattern_edges: Vec<EdgeRef> = Rect::new(-1, -1, s + 1, s + 1)
        .interior_edges()
        .filter(|e| {
            let [a, b] = e.endpoints();
            [a, b]
                .iter()
                .all(|&(x, y)| (0..=s).contains(&x) && (0..=s).contains(&y))
        })
        .collect();

    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut report = CorollaryReport {
        k,
        samples,
        tested: 0,
        extended: 0,
        excluded_axis: 0,
        excluded_not_1_tiled: 0,
        failures: Vec::new(),
    };
    for _ in 0..samples {
        let pose = Pose::shifted(rng.gen_range(-4096..4096), rng.gen_range(-4096..4096))
            .with_sym(Sym::ALL[rng.gen_range(0..8)]);
        let corner = (rng.gen_range(-64..64), rng.gen_range(-64..64));
        let wide = Rect::new(
            corner.0 - s,
            corner.1 - s,
            corner.0 + 2 * s,
            corner.1 + 2 * s,
        );
        let (ax, ay) = (pose.dx.to_i64(), pose.dy.to_i64());
        if (wide.x0..=wide.x1).contains(&ax) || (wide.y0..=wide.y1).contains(&ay) {
            report.excluded_axis += 1;
            continue;
        }
        let w = generate(&pose, wide).expect("sample window");
        if !is_k_tiled(&w, 1).tiled {
            report.excluded_not_1_tiled += 1;
            continue;
        }
        report.tested += 1;
        let pattern: Vec<(EdgeRef, EdgeColor)> = pattern_edges
            .iter()
            .map(|&e| (e, w.get(e.translated(corner.0, corner.1)).expect("inside")))
            .collect();
        let found = find_in_blocks(&reference, &pattern, s, big, reach);
        match found {
            Some(_) => report.extended += 1,
            None => report.failures.push(CorollarySample {
                pose,
                corner,
                found_in: None,
            }),
        }
    }
    report
}

fn find_in_blocks(
    reference: &Patch,
    pattern: &[(EdgeRef, EdgeColor)],
    s: i64,
    big: i64,
    reach: i64,
) -> Option<(i64, i64)> {
    let corners: Vec<(i64, i64)> = (-reach / big..=reach / big)
        .flat_map(|n| (-reach / big..=reach / big).map(move |m| (m * big, n * big)))
        .collect();
    corners.into_par_iter().find_first(|&(bx, by)| {
        (bx..=bx + big - s).any(|x| {
            (by..=by + big - s).any(|y| {
                pattern
                    .iter()
                    .all(|&(e, c)| reference.get(e.translated(x, y)) == Some(c))
            })
        })
    })
}
