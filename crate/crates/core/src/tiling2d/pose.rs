use serde::{Deserialize, Serialize};

use super::color::{Alphabet, EdgeColor, ParityMark, Sign};
use super::edge::{EdgeRef, Orientation};
use super::sym::Sym;
use crate::adics::{Adic, Rank, DEFAULT_PRECISION};
use crate::coords1d::{local_bracket, Coords1dError};

/// One tiling of the enforced family: the identity tiling with axis
/// defaults `(default_x, default_y)`, reflected by `sym` about the origin
/// and then moved by `(dx, dy)`.
///
/// `default_x` colors the vertical axis (edges whose bracket describes the
/// x coordinate), `default_y` the horizontal one; both are taken before the
/// reflection, which flips them along negated axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pose {
    pub dx: Adic,
    pub dy: Adic,
    pub sym: Sym,
    pub default_x: u8,
    pub default_y: u8,
}

impl Pose {
    pub fn identity(precision: u32) -> Self {
        Pose {
            dx: Adic::zero(precision),
            dy: Adic::zero(precision),
            sym: Sym::E,
            default_x: 0,
            default_y: 0,
        }
    }

    pub fn shifted(dx: i64, dy: i64) -> Self {
        Pose {
            dx: Adic::from_i64(dx, DEFAULT_PRECISION),
            dy: Adic::from_i64(dy, DEFAULT_PRECISION),
            ..Pose::identity(DEFAULT_PRECISION)
        }
    }

    pub fn with_sym(self, sym: Sym) -> Self {
        Pose { sym, ..self }
    }

    pub fn precision(&self) -> u32 {
        self.dx.precision()
    }

    /// `g · self` for the group element `g = (shift, reflection)`, where the
    /// reflection acts on the shift it is composed with.
    pub fn compose(g: &Pose, p: &Pose) -> Pose {
        let (sx, sy) = g.sym.apply_adic(p.dx, p.dy);
        Pose {
            dx: g.dx + sx,
            dy: g.dy + sy,
            sym: g.sym.then_after(p.sym),
            ..*p
        }
    }

    /// `s · self`: reflect the whole tiling about the fixed origin.
    pub fn reflected_by(&self, s: Sym) -> Pose {
        let (dx, dy) = s.apply_adic(self.dx, self.dy);
        Pose {
            dx,
            dy,
            sym: s.then_after(self.sym),
            ..*self
        }
    }

    /// Axis bracket bits as they appear in the tiling.
    pub fn visible_defaults(&self) -> (u8, u8) {
        self.sym.apply_defaults((self.default_x, self.default_y))
    }

    /// Offset of an integer coordinate pair from the pose origin.
    pub fn local_offset(&self, x: i64, y: i64) -> (Adic, Adic) {
        let n = self.precision();
        (
            Adic::from_i64(x, n) - self.dx,
            Adic::from_i64(y, n) - self.dy,
        )
    }

    /// True when the edge lies on one of the two unranked axes.
    pub fn on_axis(&self, e: EdgeRef) -> bool {
        let (ux, uy) = self.local_offset(e.x, e.y);
        match e.orientation {
            Orientation::V => ux.is_zero(),
            Orientation::H => uy.is_zero(),
        }
    }

    /// True when the vertex is off both axes.
    pub fn vertex_off_axis(&self, x: i64, y: i64) -> bool {
        let (ux, uy) = self.local_offset(x, y);
        !ux.is_zero() && !uy.is_zero()
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity(DEFAULT_PRECISION)
    }
}

/// Color of an identity-frame edge on the line at offset `line` from the
/// origin, starting at offset `along`.
fn identity_color(
    orientation: Orientation,
    line: Adic,
    along: Adic,
    defaults: (u8, u8),
    alphabet: Alphabet,
) -> Result<EdgeColor, Coords1dError> {
    let base = match line.valuation() {
        Rank::Unranked => {
            let bracket = match orientation {
                Orientation::V => defaults.0,
                Orientation::H => defaults.1,
            };
            // axis edges are bold and point toward the origin
            EdgeColor::new(bracket, true, Sign::from_bool(along.to_i64() < 0))
        }
        Rank::Ranked(k) => {
            // errors out unless bit k+1, and so the residue mod 2^(k+2), is retained
            let bracket = local_bracket(line)?.bit;
            let within_domain = along.residue(k + 2);
            let bold = (1u64 << k..3u64 << k).contains(&within_domain);
            let pointer = Sign::from_bool(along.residue(k + 1) < 1u64 << k);
            EdgeColor::new(bracket, bold, pointer)
        }
    };
    Ok(match alphabet {
        Alphabet::Base => base,
        Alphabet::Bracket => EdgeColor::bracket_only(base.bracket()),
        Alphabet::Parity => {
            let mark = if line.bit(0) {
                ParityMark::Odd
            } else {
                ParityMark::Even(Sign::from_bool(!along.bit(0)))
            };
            base.with_parity(Some(mark))
        }
    })
}

/// Color of edge `e` in the tiling named by `pose`.
///
/// Bracket: from the 2-adic offset of the edge's own line. Boldness: set when
/// the edge lies inside a domain of the orthogonal coordinate having the same
/// rank as the line, so bold edges outline intersections of equal-rank
/// domains. Pointer: toward the nearest orthogonal line of that rank,
/// measured from the edge midpoint.
pub fn ce_color_in(
    e: EdgeRef,
    pose: &Pose,
    alphabet: Alphabet,
) -> Result<EdgeColor, Coords1dError> {
    let inv = pose.sym.inverse();
    let [p, q] = e.endpoints();
    let n = pose.precision();
    let to_local = |(x, y): (i64, i64)| {
        let (ux, uy) = pose.local_offset(x, y);
        inv.apply_adic(ux, uy)
    };
    let (a, b) = (to_local(p), to_local(q));
    // the source edge in the identity frame: same line, unit step along it
    let (orientation, line, along) = if a.0 == b.0 {
        let start = if (b.1 - a.1).bits() == 1 { a.1 } else { b.1 };
        (Orientation::V, a.0, start)
    } else {
        let start = if (b.0 - a.0).bits() == 1 { a.0 } else { b.0 };
        (Orientation::H, a.1, start)
    };
    debug_assert_eq!(line.precision(), n);
    let c = identity_color(
        orientation,
        line,
        along,
        (pose.default_x, pose.default_y),
        alphabet,
    )?;
    Ok(pose.sym.apply_color(orientation, c))
}

pub fn ce_color(e: EdgeRef, pose: &Pose) -> Result<EdgeColor, Coords1dError> {
    ce_color_in(e, pose, Alphabet::Base)
}
