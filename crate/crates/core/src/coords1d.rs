//! The one-dimensional bracket tiling.
//!
//! A position `x = (2i+1) 2^k` carries a bracket of rank `k` whose direction
//! is `i mod 2` (0 opens, 1 closes). Brackets of one rank nest into
//! balanced pairs called domains. Shifting by a 2-adic integer and
//! reflecting produce the other tilings of the family; the unranked origin
//! takes an external default bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adics::{Adic, Rank, DEFAULT_PRECISION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Coords1dError {
    #[error("rank {rank} needs bit {} which precision {precision} does not retain", rank + 1)]
    PrecisionExhausted { rank: u32, precision: u32 },
    #[error("domain of rank {0} has no lower-rank descendants of that depth")]
    RankTooLow(u32),
    #[error("window of length {len} is shorter than the required {required}")]
    WindowTooSmall { len: u64, required: u64 },
    #[error("brackets are not a window of a shifted bracket tiling (position {0})")]
    Inconsistent(i64),
    #[error("window determines only {known} bits of the shift, {wanted} requested")]
    Ambiguous { known: u32, wanted: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    /// Even ranks, drawn `{`/`}`.
    Curly,
    /// Odd ranks, drawn `[`/`]`.
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bracket {
    /// 0 opens, 1 closes.
    pub bit: u8,
    pub rank: Rank,
}

impl Bracket {
    pub fn shape(self) -> Option<Shape> {
        match self.rank {
            Rank::Ranked(k) if k % 2 == 0 => Some(Shape::Curly),
            Rank::Ranked(_) => Some(Shape::Square),
            Rank::Unranked => None,
        }
    }

    pub fn is_opening(self) -> bool {
        self.bit == 0
    }

    pub fn glyph(self) -> char {
        match (self.shape(), self.is_opening()) {
            (Some(Shape::Curly), true) => '{',
            (Some(Shape::Curly), false) => '}',
            (Some(Shape::Square), true) => '[',
            (Some(Shape::Square), false) => ']',
            (None, true) => '(',
            (None, false) => ')',
        }
    }
}

/// One tiling of the 1-D family: the identity tiling moved by `shift`,
/// optionally reflected, with `default` coloring the unranked position
/// before reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Line1D {
    pub shift: Adic,
    pub default: u8,
    pub reflected: bool,
}

impl Line1D {
    pub fn identity(precision: u32) -> Self {
        Line1D {
            shift: Adic::zero(precision),
            default: 0,
            reflected: false,
        }
    }

    pub fn shifted(shift: Adic) -> Self {
        Line1D {
            shift,
            default: 0,
            reflected: false,
        }
    }

    pub fn precision(&self) -> u32 {
        self.shift.precision()
    }

    /// The tiling `x -> self(x - a)`.
    pub fn shift_by(self, a: Adic) -> Self {
        Line1D {
            shift: self.shift + a,
            ..self
        }
    }

    /// The tiling `x -> flip(self(-x))`.
    pub fn reflect(self) -> Self {
        Line1D {
            shift: -self.shift,
            default: self.default,
            reflected: !self.reflected,
        }
    }

    /// Offset of `x` from the line's origin in the unreflected frame.
    fn local(&self, x: Adic) -> Adic {
        if self.reflected {
            self.shift - x
        } else {
            x - self.shift
        }
    }

    /// Default bit as it appears at the origin, after reflection.
    pub fn origin_bit(&self) -> u8 {
        self.default ^ self.reflected as u8
    }
}

impl Default for Line1D {
    fn default() -> Self {
        Line1D::identity(DEFAULT_PRECISION)
    }
}

/// Bracket of an unshifted, unreflected tiling at offset `u`.
pub(crate) fn local_bracket(u: Adic) -> Result<Bracket, Coords1dError> {
    match u.valuation() {
        Rank::Unranked => Ok(Bracket {
            bit: 0,
            rank: Rank::Unranked,
        }),
        Rank::Ranked(k) if k + 1 >= u.precision() => Err(Coords1dError::PrecisionExhausted {
            rank: k,
            precision: u.precision(),
        }),
        Rank::Ranked(k) => Ok(Bracket {
            bit: u.bit(k + 1) as u8,
            rank: Rank::Ranked(k),
        }),
    }
}

pub fn bracket_at(x: Adic, line: &Line1D) -> Result<Bracket, Coords1dError> {
    let u = line.local(x);
    let mut b = local_bracket(u)?;
    if b.rank == Rank::Unranked {
        b.bit = line.origin_bit();
    } else if line.reflected {
        b.bit ^= 1;
    }
    Ok(b)
}

pub fn bracket_at_int(x: i64, line: &Line1D) -> Result<Bracket, Coords1dError> {
    bracket_at(Adic::from_i64(x, line.precision()), line)
}

pub fn brackets(line: &Line1D, lo: i64, hi: i64) -> Result<Vec<(i64, Bracket)>, Coords1dError> {
    (lo..hi)
        .map(|x| Ok((x, bracket_at_int(x, line)?)))
        .collect()
}

/// A matched pair of rank-`k` brackets and everything between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Domain1D {
    pub rank: u32,
    pub lo: i64,
    pub hi: i64,
}

impl Domain1D {
    pub fn len(&self) -> i64 {
        self.hi - self.lo
    }

    pub fn contains(&self, y: i64) -> bool {
        self.lo <= y && y <= self.hi
    }

    pub fn children(&self) -> Result<[Domain1D; 2], Coords1dError> {
        if self.rank == 0 {
            return Err(Coords1dError::RankTooLow(self.rank));
        }
        let half = 1i64 << (self.rank - 1);
        let around = |c: i64| Domain1D {
            rank: self.rank - 1,
            lo: c - half,
            hi: c + half,
        };
        Ok([around(self.lo), around(self.hi)])
    }

    /// Two inside the parent's outermost brackets and one beyond each side.
    pub fn grandchildren(&self) -> Result<[Domain1D; 4], Coords1dError> {
        if self.rank < 2 {
            return Err(Coords1dError::RankTooLow(self.rank));
        }
        let [a, b] = self.children()?;
        let [a0, a1] = a.children()?;
        let [b0, b1] = b.children()?;
        Ok([a0, a1, b0, b1])
    }
}

/// The rank-`k` domain whose closed interval contains `y`, if any.
pub fn domain_containing(y: i64, k: u32, line: &Line1D) -> Option<Domain1D> {
    let modulus = 1u64 << (k + 2);
    let u = line.local(Adic::from_i64(y, line.precision())).bits() & (modulus - 1);
    let (start, end) = (1u64 << k, 3u64 << k);
    if u < start || u > end {
        return None;
    }
    let t = (u - start) as i64;
    let len = 1i64 << (k + 1);
    let lo = if line.reflected { y + t - len } else { y - t };
    Some(Domain1D {
        rank: k,
        lo,
        hi: lo + len,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReversal {
    pub rank: u32,
    pub reversed_fraction: f64,
}

/// Comparison of the identity tiling with its shift by `(2i+1) 2^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftDiffReport {
    pub k: u32,
    pub i: i64,
    /// Every rank with at least one position of that rank in both tilings.
    /// Only ranks below `k` are constrained; higher ranks are measurements.
    pub per_rank: Vec<RankReversal>,
    pub changed_fraction: f64,
    pub bound: f64,
}

impl ShiftDiffReport {
    pub fn reversed_fraction(&self, rank: u32) -> Option<f64> {
        self.per_rank
            .iter()
            .find(|r| r.rank == rank)
            .map(|r| r.reversed_fraction)
    }

    /// Rank `k-1` fully reversed, lower ranks untouched, aggregate within bound.
    pub fn holds(&self) -> bool {
        let low_ok = (0..self.k).all(|r| match self.reversed_fraction(r) {
            Some(f) if r + 1 == self.k => f == 1.0,
            Some(f) => f == 0.0,
            None => false,
        });
        low_ok && self.changed_fraction <= self.bound
    }
}

/// Measures how a shift by `(2i+1) 2^k` changes the identity tiling over
/// the half-open window `[lo, hi)`.
pub fn remark1_report(k: u32, i: i64, lo: i64, hi: i64) -> Result<ShiftDiffReport, Coords1dError> {
    let len = (hi - lo).max(0) as u64;
    let required = 1u64 << (k + 3);
    if len < required {
        return Err(Coords1dError::WindowTooSmall { len, required });
    }
    let base = Line1D::identity(DEFAULT_PRECISION);
    let s = Adic::from_i64((2 * i + 1) << k, DEFAULT_PRECISION);
    let moved = base.shift_by(s);

    let mut same_rank = std::collections::BTreeMap::<u32, (u64, u64)>::new();
    let mut changed = 0u64;
    for x in lo..hi {
        let a = bracket_at_int(x, &base)?;
        let b = bracket_at_int(x, &moved)?;
        if a != b {
            changed += 1;
        }
        if let (Rank::Ranked(ra), Rank::Ranked(rb)) = (a.rank, b.rank) {
            if ra == rb {
                let e = same_rank.entry(ra).or_default();
                e.0 += 1;
                e.1 += (a.bit != b.bit) as u64;
            }
        }
    }
    let per_rank = same_rank
        .into_iter()
        .map(|(rank, (n, rev))| RankReversal {
            rank,
            reversed_fraction: rev as f64 / n as f64,
        })
        .collect();
    Ok(ShiftDiffReport {
        k,
        i,
        per_rank,
        changed_fraction: changed as f64 / len as f64,
        bound: 2.0 / (1u64 << k) as f64 + (1u64 << (k + 2)) as f64 / len as f64,
    })
}

/// Recovers the shift modulo `2^m` from a window of brackets.
///
/// A bracket of rank `r` at `x` pins the shift modulo `2^(r+2)`:
/// `s = x - (1 + 2 bit) 2^r`. The highest-rank observation fixes the
/// answer and every other observation is checked against it.
pub fn decode_position(
    window: &[(i64, Bracket)],
    m: u32,
    precision: u32,
) -> Result<u64, Coords1dError> {
    let best = window.iter().max_by_key(|(_, b)| b.rank);
    let Some(&(x_best, b_best)) = best else {
        return Err(Coords1dError::Ambiguous {
            known: 0,
            wanted: m,
        });
    };
    let x_best = Adic::from_i64(x_best, precision);
    let (shift, known) = match b_best.rank {
        Rank::Unranked => (x_best, precision),
        Rank::Ranked(r) => {
            if r + 2 > precision {
                return Err(Coords1dError::PrecisionExhausted { rank: r, precision });
            }
            let offset = Adic::from_bits((1 + 2 * b_best.bit as u64) << r, precision);
            (x_best - offset, r + 2)
        }
    };
    for &(x, b) in window {
        let u = Adic::from_i64(x, precision) - shift;
        let ok = match b.rank {
            Rank::Unranked => known == precision && u.is_zero(),
            Rank::Ranked(r) => {
                let low = u.residue(r + 2);
                low.trailing_zeros() == r && ((low >> (r + 1)) & 1) as u8 == b.bit
            }
        };
        if !ok {
            return Err(Coords1dError::Inconsistent(x));
        }
    }
    if known < m {
        return Err(Coords1dError::Ambiguous { known, wanted: m });
    }
    Ok(shift.residue(m))
}

/// Text drawing: one row per rank, one column per position.
pub fn render_by_rank(window: &[(i64, Bracket)]) -> String {
    let max_rank = window.iter().filter_map(|(_, b)| b.rank.value()).max();
    let Some(max_rank) = max_rank else {
        return String::new();
    };
    let mut out = String::new();
    for r in 0..=max_rank {
        let row: String = window
            .iter()
            .map(|(_, b)| {
                if b.rank == Rank::Ranked(r) {
                    b.glyph()
                } else {
                    ' '
                }
            })
            .collect();
        out.push_str(row.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn id() -> Line1D {
        Line1D::identity(64)
    }

    #[test]
    fn bracket_examples() {
        let b = |x| bracket_at_int(x, &id()).unwrap();
        assert_eq!(
            b(1),
            Bracket {
                bit: 0,
                rank: Rank::Ranked(0)
            }
        );
        assert_eq!(
            b(3),
            Bracket {
                bit: 1,
                rank: Rank::Ranked(0)
            }
        );
        assert_eq!(
            b(6),
            Bracket {
                bit: 1,
                rank: Rank::Ranked(1)
            }
        );
        assert_eq!(
            b(0),
            Bracket {
                bit: 0,
                rank: Rank::Unranked
            }
        );
    }

    #[test]
    fn precision_exhausted_near_top() {
        let line = Line1D::identity(8);
        assert_eq!(
            bracket_at_int(128, &line),
            Err(Coords1dError::PrecisionExhausted {
                rank: 7,
                precision: 8
            })
        );
        assert!(bracket_at_int(64, &line).is_ok());
    }

    /// Matches rank-k brackets as parentheses; independent of the closed form.
    fn oracle_domains(k: u32, lo: i64, hi: i64, line: &Line1D) -> Vec<Domain1D> {
        let mut open = None;
        let mut out = Vec::new();
        for (x, b) in brackets(line, lo, hi).unwrap() {
            if b.rank != Rank::Ranked(k) {
                continue;
            }
            if b.is_opening() {
                open = Some(x);
            } else if let Some(start) = open.take() {
                out.push(Domain1D {
                    rank: k,
                    lo: start,
                    hi: x,
                });
            }
        }
        out
    }

    #[test]
    fn domain_examples() {
        assert_eq!(
            domain_containing(2, 0, &id()),
            Some(Domain1D {
                rank: 0,
                lo: 1,
                hi: 3
            })
        );
        assert_eq!(domain_containing(4, 0, &id()), None);
        assert_eq!(
            domain_containing(8, 2, &id()),
            Some(Domain1D {
                rank: 2,
                lo: 4,
                hi: 12
            })
        );
        let oracle = oracle_domains(2, -64, 64, &id());
        assert!(oracle.contains(&Domain1D {
            rank: 2,
            lo: 4,
            hi: 12
        }));
    }

    #[test]
    fn domains_agree_with_bracket_matching() {
        for line in [
            id(),
            id().shift_by(Adic::from_i64(5, 64)),
            id().shift_by(Adic::from_i64(-37, 64)).reflect(),
        ] {
            for k in 0..4 {
                let domains = oracle_domains(k, -200, 200, &line);
                for y in -150..150 {
                    let expect = domains.iter().copied().find(|d| d.contains(y));
                    assert_eq!(
                        domain_containing(y, k, &line),
                        expect,
                        "y={y} k={k} {line:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn children_and_grandchildren() {
        let d = Domain1D {
            rank: 1,
            lo: 2,
            hi: 6,
        };
        assert_eq!(
            d.children().unwrap(),
            [
                Domain1D {
                    rank: 0,
                    lo: 1,
                    hi: 3
                },
                Domain1D {
                    rank: 0,
                    lo: 5,
                    hi: 7
                }
            ]
        );
        let d = Domain1D {
            rank: 2,
            lo: 4,
            hi: 12,
        };
        let g: Vec<(i64, i64)> = d
            .grandchildren()
            .unwrap()
            .iter()
            .map(|c| (c.lo, c.hi))
            .collect();
        assert_eq!(g, vec![(1, 3), (5, 7), (9, 11), (13, 15)]);
        // oracle: the rank-0 domains of the identity line meeting [1, 15]
        let oracle: Vec<(i64, i64)> = oracle_domains(0, 0, 17, &id())
            .iter()
            .map(|c| (c.lo, c.hi))
            .collect();
        assert_eq!(g, oracle);
        assert_eq!(
            Domain1D {
                rank: 0,
                lo: 1,
                hi: 3
            }
            .children(),
            Err(Coords1dError::RankTooLow(0))
        );
        assert!(Domain1D {
            rank: 1,
            lo: 2,
            hi: 6
        }
        .grandchildren()
        .is_err());
    }

    #[test]
    fn remark1_examples() {
        let r = remark1_report(1, 0, -64, 64).unwrap();
        assert_eq!(r.reversed_fraction(0), Some(1.0));
        assert!(r.holds());
        let r = remark1_report(3, 0, -512, 512).unwrap();
        assert_eq!(r.reversed_fraction(0), Some(0.0));
        assert_eq!(r.reversed_fraction(1), Some(0.0));
        assert_eq!(r.reversed_fraction(2), Some(1.0));
        let r = remark1_report(3, 5, -512, 512).unwrap();
        assert_eq!(r.bound, 0.25 + 32.0 / 1024.0);
        assert!(r.changed_fraction <= r.bound);
        assert!(r.holds());
        assert_eq!(
            remark1_report(3, 0, 0, 63),
            Err(Coords1dError::WindowTooSmall {
                len: 63,
                required: 64
            })
        );
        let json = serde_json::to_value(&r).unwrap();
        for key in ["k", "i", "per_rank", "changed_fraction", "bound"] {
            assert!(json.get(key).is_some());
        }
    }

    #[test]
    fn decode_examples() {
        let w = brackets(&id(), 1, 17).unwrap();
        assert_eq!(decode_position(&w, 3, 64), Ok(0));
        let w = brackets(&id().shift_by(Adic::from_i64(5, 64)), 1, 65).unwrap();
        assert_eq!(decode_position(&w, 4, 64), Ok(5));
        let w = brackets(&id(), 1, 5).unwrap();
        assert!(matches!(
            decode_position(&w, 6, 64),
            Err(Coords1dError::Ambiguous { .. })
        ));
        let mut w = brackets(&id(), 1, 33).unwrap();
        w[0].1.bit ^= 1;
        assert!(matches!(
            decode_position(&w, 3, 64),
            Err(Coords1dError::Inconsistent(_))
        ));
        // the unranked origin, when present, pins every bit
        let w = brackets(&id().shift_by(Adic::from_i64(9, 64)), 0, 16).unwrap();
        assert_eq!(decode_position(&w, 64, 64), Ok(9));
    }

    #[test]
    fn decode_round_trip_random() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let shift = Adic::from_bits(rng.gen(), 64);
            let mut line = id().shift_by(shift);
            if rng.gen() {
                line = Line1D {
                    shift,
                    default: 0,
                    reflected: true,
                };
            }
            let m = 6;
            let lo = rng.gen_range(-1000..1000);
            let w = brackets(&line, lo, lo + (1 << (m + 2))).unwrap();
            assert_eq!(decode_position(&w, m, 64), Ok(shift.residue(m)));
        }
    }

    #[test]
    fn rendering_by_rank() {
        let w = brackets(&id(), 1, 8).unwrap();
        assert_eq!(render_by_rank(&w), "{ } { }\n [   ]\n   {\n");
        let w = brackets(&id(), 1, 16).unwrap();
        let first = render_by_rank(&w).lines().next().unwrap().to_string();
        assert_eq!(first, "{ } { } { } { }");
        assert_eq!(render_by_rank(&[]), "");
    }

    proptest! {
        #[test]
        fn pointwise_convergence(a: u64, x in -5000i64..5000) {
            let full = Adic::from_bits(a, 64);
            let line = id().shift_by(full);
            let b = bracket_at_int(x, &line).unwrap();
            if let Rank::Ranked(r) = b.rank {
                let truncated = id().shift_by(full.truncate(r + 2));
                prop_assert_eq!(bracket_at_int(x, &truncated).unwrap(), b);
            }
        }

        #[test]
        fn group_action(a in -10_000i64..10_000, b in -10_000i64..10_000, x in -5000i64..5000, d in 0u8..2) {
            let (a, b) = (Adic::from_i64(a, 64), Adic::from_i64(b, 64));
            let base = Line1D { default: d, ..id() };
            let two_steps = base.shift_by(a).shift_by(b);
            let one_step = base.shift_by(a + b);
            prop_assert_eq!(bracket_at_int(x, &two_steps).unwrap(), bracket_at_int(x, &one_step).unwrap());
            let back = base.shift_by(a).reflect().reflect();
            prop_assert_eq!(back, base.shift_by(a));
            prop_assert_eq!(back.origin_bit(), d);
        }

        #[test]
        fn reflection_reverses_brackets_and_positions(a in -10_000i64..10_000, x in -5000i64..5000) {
            let line = id().shift_by(Adic::from_i64(a, 64));
            let r = line.reflect();
            let here = bracket_at_int(-x, &r).unwrap();
            let there = bracket_at_int(x, &line).unwrap();
            prop_assert_eq!(here.rank, there.rank);
            prop_assert_eq!(here.bit, there.bit ^ 1);
        }

        #[test]
        fn balanced_domains(m in 3u32..10, k in 0u32..3) {
            prop_assume!(k + 1 < m);
            let mut depth = 0i32;
            for (_, b) in brackets(&id(), 1, 1 << m).unwrap() {
                if b.rank == Rank::Ranked(k) {
                    depth += if b.is_opening() { 1 } else { -1 };
                    prop_assert!(depth == 0 || depth == 1);
                }
            }
            prop_assert_eq!(depth, 0);
        }
    }
}
