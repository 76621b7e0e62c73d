//! Reading the pose of a tiling back from a finite window.
//!
//! Ranks come from pointer runs: on a line of rank `k` the pointer flips
//! every `2^k` edges. The brackets of ranked lines then fix each shift
//! coordinate through [`decode_position`] (brackets are drawn relative to
//! the tiling, so reflections leave them alone). Boldness and pointers
//! decide which reflections fit: each is tried by regenerating the window
//! and comparing every edge whose color the decoded residues determine.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adics::{Adic, Rank, DEFAULT_PRECISION};
use crate::coords1d::{decode_position, Bracket, Coords1dError};
use crate::palette::{verify, PlusPalette, Violation};
use crate::tiling2d::{generate, Alphabet, EdgeRef, Orientation, Patch, Pose, Rect, Sign, Sym};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("patch is not a window of an enhanced tiling: {0:?}")]
    NotVerified(Violation),
    #[error("window of side {side} is too small to decode (need {needed})")]
    TooSmall { side: i64, needed: i64 },
    #[error("ambiguous: {0}")]
    Ambiguous(String),
    #[error("inconsistent brackets: {0}")]
    Inconsistent(Coords1dError),
}

/// Residues and fit of one reflection that reproduces the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub sym: Sym,
    /// Edges whose color the residues determine, all of which matched.
    pub compared: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseEstimate {
    /// Shift residues modulo `2^m_x` and `2^m_y`.
    pub dx_mod: u64,
    pub dy_mod: u64,
    pub m_x: u32,
    pub m_y: u32,
    /// Bits of each shift the window actually pins (at least `m_x`, `m_y`).
    pub known_x: u32,
    pub known_y: u32,
    pub sym_candidates: Vec<Sym>,
    pub candidates: Vec<Candidate>,
    /// Visible axis bracket bits `(vertical axis, horizontal axis)`, given
    /// only when both axes cross the window.
    pub defaults: Option<(u8, u8)>,
    /// Fraction of determined edges reproduced by the best candidate.
    pub score: f64,
}

impl PoseEstimate {
    /// The residues agree with `pose`, whose reflection is among the
    /// candidates.
    pub fn consistent_with(&self, pose: &Pose) -> bool {
        pose.dx.residue(self.m_x) == self.dx_mod
            && pose.dy.residue(self.m_y) == self.dy_mod
            && self.sym_candidates.contains(&pose.sym)
    }
}

/// Residue bits requested for a window side: `floor(log2 side) − 3`.
pub fn residue_width(side: i64) -> u32 {
    (63 - side.max(1).leading_zeros()).saturating_sub(3)
}

pub const MIN_SIDE: i64 = 8;

fn axis_palette() -> &'static PlusPalette {
    static PP: OnceLock<PlusPalette> = OnceLock::new();
    PP.get_or_init(|| PlusPalette::builtin("ce-axis").expect("builtin palette"))
}

/// Rank of a grid line from the pointers along it: every run strictly
/// inside the window has length `2^k`. `None` when no run is wholly
/// visible or the runs disagree.
fn rank_from_pointers(pointers: &[Sign]) -> Option<u32> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < pointers.len() {
        let j = (i..pointers.len())
            .find(|&j| pointers[j] != pointers[i])
            .unwrap_or(pointers.len());
        if i > 0 && j < pointers.len() {
            runs.push(j - i);
        }
        i = j;
    }
    let first = *runs.first()?;
    (first.is_power_of_two() && runs.iter().all(|&r| r == first)).then(|| first.trailing_zeros())
}

/// Edges of the interior grid line `line` of the given orientation.
fn line_edges(r: Rect, o: Orientation, line: i64) -> Vec<EdgeRef> {
    match o {
        Orientation::V => (r.y0..r.y1).map(|y| EdgeRef::v(line, y)).collect(),
        Orientation::H => (r.x0..r.x1).map(|x| EdgeRef::h(x, line)).collect(),
    }
}

fn interior_lines(r: Rect, o: Orientation) -> std::ops::Range<i64> {
    match o {
        Orientation::V => r.x0 + 1..r.x1,
        Orientation::H => r.y0 + 1..r.y1,
    }
}

/// Ranked brackets of the lines of one orientation, at their coordinates.
fn bracket_window(p: &Patch, o: Orientation) -> Vec<(i64, Bracket)> {
    let r = p.rect();
    interior_lines(r, o)
        .filter_map(|line| {
            let edges = line_edges(r, o, line);
            let colors: Vec<_> = edges
                .iter()
                .map(|&e| p.get(e).expect("interior edge"))
                .collect();
            let rank = rank_from_pointers(&colors.iter().map(|c| c.pointer()).collect::<Vec<_>>())?;
            let bit = colors[0].bracket();
            colors.iter().all(|c| c.bracket() == bit).then_some((
                line,
                Bracket {
                    bit,
                    rank: Rank::Ranked(rank),
                },
            ))
        })
        .collect()
}

fn decode_axis(p: &Patch, o: Orientation, m: u32) -> Result<(u64, u32), DecodeError> {
    let window = bracket_window(p, o);
    let best = window.iter().filter_map(|(_, b)| b.rank.value()).max();
    let known = best.map_or(0, |r| r + 2);
    if known < m {
        return Err(DecodeError::Ambiguous(format!(
            "{o:?} lines pin {known} bits of the shift, {m} requested"
        )));
    }
    let residue =
        decode_position(&window, known, DEFAULT_PRECISION).map_err(DecodeError::Inconsistent)?;
    Ok((residue, known))
}

/// Off-axis edges whose colors follow from the shift residues: lines of
/// rank `k` need both coordinates modulo `2^(k+2)`.
fn determined(e: EdgeRef, dx: u64, dy: u64, known: u32) -> bool {
    let (line, shift) = match e.orientation {
        Orientation::V => (e.x, dx),
        Orientation::H => (e.y, dy),
    };
    let u = Adic::from_i64(line, DEFAULT_PRECISION) - Adic::from_bits(shift, DEFAULT_PRECISION);
    match u.residue(known).trailing_zeros() {
        k if k >= known => false,
        k => k + 2 <= known,
    }
}

/// Axis crossing the window along `o`: every edge bold, pointers aiming at
/// one interior point from both sides.
fn visible_axis(p: &Patch, o: Orientation) -> Option<u8> {
    let r = p.rect();
    interior_lines(r, o).find_map(|line| {
        let colors: Vec<_> = line_edges(r, o, line)
            .iter()
            .map(|&e| p.get(e).unwrap())
            .collect();
        if !colors.iter().all(|c| c.bold()) {
            return None;
        }
        let flip = colors.iter().position(|c| c.pointer() == Sign::Neg)?;
        let inward = flip > 0
            && colors[..flip].iter().all(|c| c.pointer() == Sign::Pos)
            && colors[flip..].iter().all(|c| c.pointer() == Sign::Neg);
        inward.then_some(colors[0].bracket())
    })
}

/// Recovers shift residues and the reflections consistent with a window
/// of an enhanced tiling (base or parity alphabet).
pub fn infer_pose(p: &Patch) -> Result<PoseEstimate, DecodeError> {
    let base = p.map_colors(Alphabet::Base, |c| c.base());
    let r = base.rect();
    let side = r.width().min(r.height());
    if side < MIN_SIDE {
        return Err(DecodeError::TooSmall {
            side,
            needed: MIN_SIDE,
        });
    }
    verify(&base, axis_palette()).map_err(DecodeError::NotVerified)?;
    let (m_x, m_y) = (residue_width(r.width()), residue_width(r.height()));
    let (dx, known_x) = decode_axis(&base, Orientation::V, m_x)?;
    let (dy, known_y) = decode_axis(&base, Orientation::H, m_y)?;
    let known = known_x.min(known_y);
    let edges: Vec<(EdgeRef, _)> = base
        .edges()
        .filter(|&(e, _)| determined(e, dx, dy, known))
        .collect();
    let fits: Vec<(Sym, usize, usize)> = Sym::ALL
        .par_iter()
        .map(|&sym| {
            let pose = Pose {
                dx: Adic::from_bits(dx, DEFAULT_PRECISION),
                dy: Adic::from_bits(dy, DEFAULT_PRECISION),
                ..Pose::identity(DEFAULT_PRECISION)
            }
            .with_sym(sym);
            let g = generate(&pose, r).expect("rect is non-empty");
            let good = edges.iter().filter(|&&(e, c)| g.get(e) == Some(c)).count();
            (sym, good, edges.len())
        })
        .collect();
    let candidates: Vec<Candidate> = fits
        .iter()
        .filter(|&&(_, good, total)| good == total && total > 0)
        .map(|&(sym, compared, _)| Candidate { sym, compared })
        .collect();
    if candidates.is_empty() {
        return Err(DecodeError::Ambiguous(
            "no reflection reproduces the window".into(),
        ));
    }
    let best = fits
        .iter()
        .map(|&(_, g, t)| g as f64 / t.max(1) as f64)
        .fold(0.0, f64::max);
    let defaults = match (
        visible_axis(&base, Orientation::V),
        visible_axis(&base, Orientation::H),
    ) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    Ok(PoseEstimate {
        dx_mod: dx & ((1u64 << m_x) - 1),
        dy_mod: dy & ((1u64 << m_y) - 1),
        m_x,
        m_y,
        known_x,
        known_y,
        sym_candidates: candidates.iter().map(|c| c.sym).collect(),
        candidates,
        defaults,
        score: best,
    })
}

/// Nonzero translations `v` with `|v|∞ ≤ max_period` under which every
/// edge of the window whose image is also in the window keeps its color.
pub fn aperiodicity_check(p: &Patch, max_period: i64) -> Vec<(i64, i64)> {
    let vs: Vec<(i64, i64)> = (-max_period..=max_period)
        .flat_map(|dy| (-max_period..=max_period).map(move |dx| (dx, dy)))
        .filter(|&v| v != (0, 0))
        .collect();
    vs.into_par_iter()
        .filter(|&(dx, dy)| {
            p.edges()
                .all(|(e, c)| p.get(e.translated(dx, dy)).map_or(true, |d| d == c))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceStep {
    /// Bits of the shift kept.
    pub m: u32,
    /// Edges whose color differs from the previous step.
    pub changed: usize,
    /// Changed edges not on an axis of the limit tiling.
    pub changed_off_axis: usize,
    /// Lowest rank, in the limit tiling, among changed off-axis edges.
    pub min_changed_rank: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rect: Rect,
    pub steps: Vec<ConvergenceStep>,
    /// First step after which no off-axis edge changes again.
    pub stable_from: Option<u32>,
    /// Every change at step `m` hit ranks at least `m − 2`.
    pub low_ranks_settled: bool,
}

/// Generates the window with the shift `(a, b)` truncated to `m` bits for
/// `m = 1..=steps` and tracks which edges still change.
pub fn convergence_check(a: Adic, b: Adic, rect: Rect, steps: u32) -> ConvergenceReport {
    let n = a.precision();
    let limit = Pose {
        dx: a,
        dy: b,
        ..Pose::identity(n)
    };
    let at = |m: u32| {
        let pose = Pose {
            dx: a.truncate(m),
            dy: b.truncate(m),
            ..Pose::identity(n)
        };
        generate(&pose, rect).expect("rect is non-empty")
    };
    let rank_in_limit = |e: EdgeRef| {
        let (ux, uy) = limit.local_offset(e.x, e.y);
        match e.orientation {
            Orientation::V => ux.valuation(),
            Orientation::H => uy.valuation(),
        }
    };
    let mut prev = at(0);
    let mut out = Vec::new();
    for m in 1..=steps {
        let next = at(m);
        let mut step = ConvergenceStep {
            m,
            changed: 0,
            changed_off_axis: 0,
            min_changed_rank: None,
        };
        for (e, c) in next.edges() {
            if prev.get(e) == Some(c) {
                continue;
            }
            step.changed += 1;
            if let Rank::Ranked(k) = rank_in_limit(e) {
                step.changed_off_axis += 1;
                step.min_changed_rank = Some(step.min_changed_rank.map_or(k, |r: u32| r.min(k)));
            }
        }
        out.push(step);
        prev = next;
    }
    let stable_from = (0..=out.len())
        .rev()
        .take_while(|&i| i == out.len() || out[i].changed_off_axis == 0)
        .last()
        .map(|i| i as u32);
    let low_ranks_settled = out
        .iter()
        .all(|s| s.min_changed_rank.map_or(true, |k| k + 2 >= s.m));
    ConvergenceReport {
        rect,
        steps: out,
        stable_from,
        low_ranks_settled,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling2d::project;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_pose(rng: &mut StdRng) -> Pose {
        Pose {
            dx: Adic::from_bits(rng.gen(), DEFAULT_PRECISION),
            dy: Adic::from_bits(rng.gen(), DEFAULT_PRECISION),
            ..Pose::identity(DEFAULT_PRECISION)
        }
        .with_sym(Sym::ALL[rng.gen_range(0..8)])
    }

    #[test]
    fn residue_policy() {
        assert_eq!(residue_width(64), 3);
        assert_eq!(residue_width(127), 3);
        assert_eq!(residue_width(128), 4);
        assert_eq!(residue_width(8), 0);
    }

    #[test]
    fn pointer_runs_give_ranks() {
        use Sign::{Neg as N, Pos as P};
        assert_eq!(rank_from_pointers(&[P, N, P, N]), Some(0));
        assert_eq!(rank_from_pointers(&[P, N, N, P, P, N]), Some(1));
        assert_eq!(rank_from_pointers(&[P, P, N, N, N]), None);
        assert_eq!(rank_from_pointers(&[P, N, N, N, P, P]), None);
    }

    #[test]
    fn shifted_window_round_trip() {
        let pose = Pose::shifted(5, -3);
        let p = generate(&pose, Rect::new(100, 200, 164, 264)).unwrap();
        let est = infer_pose(&p).unwrap();
        assert_eq!((est.m_x, est.m_y), (3, 3));
        assert_eq!(est.dx_mod, 5);
        assert_eq!(est.dy_mod, (-3i64).rem_euclid(8) as u64);
        assert!(est.consistent_with(&pose));
        // the window pins more bits than the policy reports
        assert!(est.known_x >= 4 && est.known_y >= 4);
        // off the axes every reflection reproduces the window
        assert_eq!(est.sym_candidates.len(), 8);
        let id = generate(&Pose::default(), Rect::new(40, 40, 104, 104)).unwrap();
        let est = infer_pose(&id).unwrap();
        assert_eq!((est.dx_mod, est.dy_mod), (0, 0));
        assert!(est.sym_candidates.contains(&Sym::E));
    }

    #[test]
    fn small_windows_are_rejected() {
        let p = generate(&Pose::shifted(9, 9), Rect::new(0, 0, 4, 4)).unwrap();
        assert!(matches!(infer_pose(&p), Err(DecodeError::TooSmall { .. })));
    }

    #[test]
    fn broken_windows_are_rejected() {
        let mut p = generate(&Pose::shifted(9, 9), Rect::new(0, 0, 32, 32)).unwrap();
        let e = EdgeRef::v(7, 7);
        let c = p.get(e).unwrap();
        p.set(e, c.with_bracket(c.bracket() ^ 1));
        assert!(matches!(infer_pose(&p), Err(DecodeError::NotVerified(_))));
    }

    #[test]
    fn random_round_trips_recover_residues() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..60 {
            let pose = random_pose(&mut rng);
            let x0 = rng.gen_range(-500..500);
            let y0 = rng.gen_range(-500..500);
            let p = generate(&pose, Rect::new(x0, y0, x0 + 64, y0 + 64)).unwrap();
            let est = infer_pose(&p).unwrap();
            assert!(est.consistent_with(&pose), "{pose:?} {est:?}");
            assert_eq!(est.score, 1.0);
        }
    }

    #[test]
    fn both_axes_report_defaults() {
        let mut pose = Pose::shifted(3, 4);
        pose.default_x = 1;
        let p = generate(&pose, Rect::new(-20, -20, 20, 20)).unwrap();
        let est = infer_pose(&p).unwrap();
        assert_eq!(est.defaults, Some(pose.visible_defaults()));
        let off = generate(&pose, Rect::new(10, 10, 50, 50)).unwrap();
        assert_eq!(infer_pose(&off).unwrap().defaults, None);
    }

    #[test]
    fn distinct_residues_give_distinct_windows() {
        let mut rng = StdRng::seed_from_u64(5);
        let rect = Rect::new(0, 0, 16, 16);
        for _ in 0..200 {
            let a = random_pose(&mut rng);
            let b = random_pose(&mut rng);
            let m = residue_width(16);
            if a.dx.residue(m) == b.dx.residue(m) && a.dy.residue(m) == b.dy.residue(m) {
                continue;
            }
            assert_ne!(generate(&a, rect).unwrap(), generate(&b, rect).unwrap());
        }
    }

    #[test]
    fn windows_have_no_periods() {
        let p = generate(&Pose::shifted(77, -31), Rect::new(0, 0, 64, 64)).unwrap();
        assert!(aperiodicity_check(&p, 16).is_empty());
        assert!(aperiodicity_check(&project(&p), 16).is_empty());
        let flat = Patch::filled(
            Rect::new(0, 0, 10, 10),
            Alphabet::Base,
            crate::EdgeColor::new(0, true, Sign::Pos),
        );
        assert_eq!(aperiodicity_check(&flat, 3).len(), 48);
    }

    #[test]
    fn convergence() {
        let n = DEFAULT_PRECISION;
        let rect = Rect::new(-16, -16, 16, 16);
        let r = convergence_check(Adic::from_i64(-1, n), Adic::zero(n), rect, 12);
        assert!(r.low_ranks_settled);
        let ranks: Vec<u32> = r.steps.iter().filter_map(|s| s.min_changed_rank).collect();
        assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
        let r = convergence_check(Adic::from_i64(45, n), Adic::from_i64(6, n), rect, 10);
        assert_eq!(r.stable_from, Some(6));
        assert!(r.steps[6..].iter().all(|s| s.changed == 0));
    }
}
