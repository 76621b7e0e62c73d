//! Structural claims checked by exhaustive box enumeration.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{enumerate_boxes, ProgressSink, SearchConfig, SearchError, SearchOutcome};
use crate::bars::{two_bar_neighborhood_ok, whole_bars, Bar, TwoBar};
use crate::blocks::is_k_tiled;
use crate::palette::PlusPalette;
use crate::tiling2d::{EdgeColor, EdgeRef, Orientation, ParityMark, Patch, Sign};

/// Pin mask selecting the colors with the given boldness.
pub fn bold_mask(bold: bool) -> u32 {
    (0u8..32)
        .filter(|&c| EdgeColor::from_code(c).is_some_and(|e| e.bold() == bold))
        .fold(0, |m, c| m | 1 << c)
}

/// Every color code used by some arm of some cross.
pub fn palette_colors(pp: &PlusPalette) -> BTreeSet<u8> {
    pp.crosses
        .iter()
        .flat_map(|c| c.arms().map(|a| a.code()))
        .collect()
}

fn tagged(cfg: &SearchConfig, tag: &str) -> SearchConfig {
    SearchConfig {
        tag: tag.to_string(),
        ..cfg.clone()
    }
}

/// Boxes missing one of the palette's colors are violations.
pub fn check_no_skipped_colors(
    pp: &PlusPalette,
    cfg: &SearchConfig,
    progress: Option<ProgressSink<'_>>,
) -> Result<SearchOutcome, SearchError> {
    let all = palette_colors(pp);
    let visit = |p: &Patch| {
        let seen: BTreeSet<u8> = p.edges().map(|(_, c)| c.code()).collect();
        let missing: Vec<String> = all.difference(&seen).map(|c| format!("{c:02x}")).collect();
        (!missing.is_empty()).then(|| format!("missing colors {}", missing.join(",")))
    };
    enumerate_boxes(
        pp,
        &tagged(cfg, "no-skipped-colors"),
        Some(&visit),
        progress,
    )
}

/// Edges on lines marked odd whose pointer aims at a crossing line that is
/// visibly marked even.
fn odd_pointer_violation(p: &Patch) -> Option<EdgeRef> {
    let r = p.rect();
    let mark = |o: Orientation, line: i64| -> Option<bool> {
        let e = match o {
            Orientation::V if line > r.x0 && line < r.x1 => EdgeRef::v(line, r.y0),
            Orientation::H if line > r.y0 && line < r.y1 => EdgeRef::h(r.x0, line),
            _ => return None,
        };
        Some(p.get(e)?.parity()? == ParityMark::Odd)
    };
    p.edges().find_map(|(e, c)| {
        if c.parity() != Some(ParityMark::Odd) {
            return None;
        }
        let target = e.along() + i64::from(c.pointer() == Sign::Pos);
        let crossing = match e.orientation {
            Orientation::V => Orientation::H,
            Orientation::H => Orientation::V,
        };
        (mark(crossing, target) == Some(false)).then_some(e)
    })
}

/// Every box must be 1-tiled, and pointers on odd lines must aim at odd
/// crossing lines. Meant for the parity palette; with the base palette the
/// pointer clause is vacuous.
pub fn check_parity_enforcement(
    pp: &PlusPalette,
    cfg: &SearchConfig,
    progress: Option<ProgressSink<'_>>,
) -> Result<SearchOutcome, SearchError> {
    let visit = |p: &Patch| {
        let t = is_k_tiled(p, 1);
        if !t.tiled {
            return Some(format!(
                "not 1-tiled near {}",
                t.witness.map_or("?".into(), |e| e.to_string())
            ));
        }
        odd_pointer_violation(p).map(|e| format!("odd-line pointer at {e} aims at an even line"))
    };
    enumerate_boxes(
        pp,
        &tagged(cfg, "parity-enforcement"),
        Some(&visit),
        progress,
    )
}

/// Every 1-tiled box must also be 2-tiled. The outcome's violation count
/// covers 2-tiledness failures only.
pub fn check_lemma2(
    pp: &PlusPalette,
    cfg: &SearchConfig,
    progress: Option<ProgressSink<'_>>,
) -> Result<SearchOutcome, SearchError> {
    let visit = |p: &Patch| {
        if !is_k_tiled(p, 1).tiled {
            return None;
        }
        let t = is_k_tiled(p, 2);
        (!t.tiled).then(|| {
            format!(
                "1-tiled but not 2-tiled near {}",
                t.witness.map_or("?".into(), |e| e.to_string())
            )
        })
    };
    enumerate_boxes(pp, &tagged(cfg, "lemma2"), Some(&visit), progress)
}

/// Bars the box can refute on its own: a 1-bar lying wholly inside, or a
/// bold 3-bar lying wholly inside with both neighbouring parallel lines
/// inside too, so the tiles beside its middle link are in the box. A bold
/// 3-bar next to the border can be locally consistent.
pub fn short_bar_violation(p: &Patch) -> Option<Bar> {
    let r = p.rect();
    whole_bars(p).into_iter().find(|b| {
        let (lo, hi) = match b.orientation {
            Orientation::V => (r.x0, r.x1),
            Orientation::H => (r.y0, r.y1),
        };
        b.length == 1 || b.bold && b.length == 3 && b.line - 1 > lo && b.line + 1 < hi
    })
}

/// Boxes holding a 1-bar or a bold 3-bar away from the border are
/// violations (see [`short_bar_violation`]).
pub fn check_no_bold_three_bar(
    pp: &PlusPalette,
    cfg: &SearchConfig,
    progress: Option<ProgressSink<'_>>,
) -> Result<SearchOutcome, SearchError> {
    let visit = |p: &Patch| {
        short_bar_violation(p).map(|b| {
            let kind = if b.bold { "bold" } else { "pale" };
            format!(
                "{kind} {}-bar on {:?} line {} from {}",
                b.length, b.orientation, b.line, b.from
            )
        })
    };
    enumerate_boxes(pp, &tagged(cfg, "short-bars"), Some(&visit), progress)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevitskyReport {
    pub width: usize,
    /// Boxes whose central vertical line carries a bold 2-bar in the middle.
    pub vertical: SearchOutcome,
    /// The same with a horizontal central bar, when requested.
    pub horizontal: Option<SearchOutcome>,
}

impl LevitskyReport {
    pub fn exhausted(&self) -> bool {
        self.vertical.exhausted && self.horizontal.as_ref().map_or(true, |h| h.exhausted)
    }

    pub fn violations(&self) -> u64 {
        self.vertical.violations + self.horizontal.as_ref().map_or(0, |h| h.violations)
    }
}

/// Pins a bold 2-bar in the middle of the box's central line (pale edges
/// above and below it) and checks that partner 2-bars flank it at the same
/// height. The horizontal run is the transposed search; for a palette
/// closed under the diagonal reflection it mirrors the vertical one.
pub fn levitsky_check(
    pp: &PlusPalette,
    cfg: &SearchConfig,
    horizontal: bool,
    progress: Option<ProgressSink<'_>>,
) -> Result<LevitskyReport, SearchError> {
    let w = cfg.width;
    assert!(
        w >= 6 && cfg.height == w,
        "levitsky_check needs a square box of side at least 6"
    );
    let c = (w / 2) as i64;
    let run = |o: Orientation| {
        let edge = |along: i64| match o {
            Orientation::V => EdgeRef::v(c, c + along),
            Orientation::H => EdgeRef::h(c + along, c),
        };
        let mut cfg = tagged(
            cfg,
            if o == Orientation::V {
                "levitsky-v"
            } else {
                "levitsky-h"
            },
        );
        if let Some(path) = &cfg.checkpoint {
            if o == Orientation::H {
                cfg.checkpoint = Some(path.with_extension("h.ck"));
            }
        }
        cfg.pins.extend([
            (edge(-2), bold_mask(false)),
            (edge(-1), bold_mask(true)),
            (edge(0), bold_mask(true)),
            (edge(1), bold_mask(false)),
        ]);
        let bar = TwoBar { at: edge(-1) };
        let visit = move |p: &Patch| match two_bar_neighborhood_ok(p, bar) {
            Ok(Ok(())) => None,
            Ok(Err(w)) => Some(format!("no partner 2-bar at lateral offset {}", w.side)),
            Err(e) => Some(e.to_string()),
        };
        enumerate_boxes(pp, &cfg, Some(&visit), progress)
    };
    let vertical = run(Orientation::V)?;
    let horizontal = if horizontal {
        Some(run(Orientation::H)?)
    } else {
        None
    };
    Ok(LevitskyReport {
        width: w,
        vertical,
        horizontal,
    })
}
