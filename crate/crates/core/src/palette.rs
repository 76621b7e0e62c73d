//! Crosses, tiles and the palettes built from them.
//!
//! The local rule is a +palette: the set of allowed crosses, i.e. colors of
//! the four edges meeting at a vertex. Turning every edge a quarter turn
//! about its center exchanges crosses with tiles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tiling2d::{
    generate_in, Alphabet, EdgeColor, EdgeRef, Orientation, Patch, PatchError, Pose, Rect, Sym,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaletteError {
    #[error("palette text, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown built-in palette {0:?} (expected ce, ce-axis or parity)")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Patch(#[from] PatchError),
}

/// Colors of the edges at a vertex `(x, y)`: `n = V(x, y)`, `e = H(x, y)`,
/// `s = V(x, y-1)`, `w = H(x-1, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cross {
    pub n: EdgeColor,
    pub e: EdgeColor,
    pub s: EdgeColor,
    pub w: EdgeColor,
}

/// Unit directions of the cross arms, in `n, e, s, w` order.
const ARMS: [(i64, i64); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];

impl Cross {
    pub fn new(n: EdgeColor, e: EdgeColor, s: EdgeColor, w: EdgeColor) -> Self {
        Cross { n, e, s, w }
    }

    pub fn arms(&self) -> [EdgeColor; 4] {
        [self.n, self.e, self.s, self.w]
    }

    pub fn from_arms([n, e, s, w]: [EdgeColor; 4]) -> Self {
        Cross { n, e, s, w }
    }

    /// Dense key: 5 bits per arm.
    pub fn key(&self) -> u32 {
        self.arms()
            .iter()
            .fold(0u32, |k, c| k << 5 | c.code() as u32)
    }

    /// The cross seen at the image vertex after reflecting the tiling by `s`.
    pub fn transformed(&self, s: Sym) -> Cross {
        let mut out = self.arms();
        for (i, (&dir, c)) in ARMS.iter().zip(self.arms()).enumerate() {
            let orientation = if i % 2 == 0 {
                Orientation::V
            } else {
                Orientation::H
            };
            let to = s.apply(dir);
            let j = ARMS
                .iter()
                .position(|&d| d == to)
                .expect("signed permutation");
            out[j] = s.apply_color(orientation, c);
        }
        Cross::from_arms(out)
    }

    pub fn orbit(&self) -> BTreeSet<Cross> {
        Sym::ALL.iter().map(|&s| self.transformed(s)).collect()
    }

    pub fn to_hex(&self, alphabet: Alphabet) -> String {
        let mut out = String::new();
        for c in self.arms() {
            match alphabet.digits() {
                2 => write!(out, "{:02x}", c.code()).unwrap(),
                _ => write!(out, "{:x}", c.code()).unwrap(),
            }
        }
        out
    }
}

/// Least element of the orbit under the eight reflections.
pub fn canonicalize(c: &Cross) -> Cross {
    *c.orbit().iter().next().expect("orbit is nonempty")
}

/// Colors of the sides of the unit square with lower-left corner `(x, y)`:
/// `top = H(x, y+1)`, `right = V(x+1, y)`, `bottom = H(x, y)`, `left = V(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tile {
    pub top: EdgeColor,
    pub right: EdgeColor,
    pub bottom: EdgeColor,
    pub left: EdgeColor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Extracted,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlusPalette {
    pub alphabet: Alphabet,
    pub crosses: BTreeSet<Cross>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePalette {
    pub alphabet: Alphabet,
    pub tiles: BTreeSet<Tile>,
}

impl PlusPalette {
    pub fn new(
        alphabet: Alphabet,
        crosses: impl IntoIterator<Item = Cross>,
        provenance: Provenance,
    ) -> Self {
        PlusPalette {
            alphabet,
            crosses: crosses.into_iter().collect(),
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.crosses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crosses.is_empty()
    }

    pub fn contains(&self, c: &Cross) -> bool {
        self.crosses.contains(c)
    }

    pub fn orbits(&self) -> BTreeSet<Cross> {
        self.crosses.iter().map(canonicalize).collect()
    }

    /// Closure under the eight reflections.
    pub fn symmetrized(&self) -> PlusPalette {
        let crosses = self.crosses.iter().flat_map(|c| c.orbit()).collect();
        PlusPalette {
            crosses,
            ..self.clone()
        }
    }

    pub fn union(&self, other: &PlusPalette) -> PlusPalette {
        PlusPalette {
            crosses: self.crosses.union(&other.crosses).copied().collect(),
            ..self.clone()
        }
    }

    /// One cross per line as packed hex codes in `n, e, s, w` order.
    pub fn to_text(&self) -> String {
        let mut out = format!("# {} crosses, alphabet {}\n", self.len(), self.alphabet);
        for c in &self.crosses {
            out.push_str(&c.to_hex(self.alphabet));
            out.push('\n');
        }
        out
    }

    /// Parses the text form. Four hex digits per line mean the base
    /// alphabet (or the bracket one, when every code is 0 or 1); eight mean
    /// the parity alphabet.
    pub fn from_text(text: &str) -> Result<PlusPalette, PaletteError> {
        let mut crosses = BTreeSet::new();
        let mut width = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| PaletteError::Parse {
                line: i + 1,
                msg: msg.into(),
            };
            let digits = match line.len() {
                4 => 1,
                8 => 2,
                _ => return Err(err("expected 4 or 8 hex digits")),
            };
            if *width.get_or_insert(digits) != digits {
                return Err(err("mixed color widths"));
            }
            let mut arms = [EdgeColor::bracket_only(0); 4];
            for (j, arm) in arms.iter_mut().enumerate() {
                let code = line
                    .get(j * digits..(j + 1) * digits)
                    .and_then(|h| u8::from_str_radix(h, 16).ok())
                    .ok_or_else(|| err("bad hex digit"))?;
                *arm = EdgeColor::from_code(code).ok_or_else(|| err("color code out of range"))?;
            }
            crosses.insert(Cross::from_arms(arms));
        }
        let alphabet = match width {
            Some(2) => Alphabet::Parity,
            _ if crosses
                .iter()
                .all(|c| c.arms().iter().all(|a| a.code() < 2)) =>
            {
                Alphabet::Bracket
            }
            _ => Alphabet::Base,
        };
        if crosses
            .iter()
            .any(|c| !c.arms().iter().all(|&a| alphabet.admits(a)))
        {
            return Err(PaletteError::Parse {
                line: 0,
                msg: format!("colors outside alphabet {alphabet}"),
            });
        }
        Ok(PlusPalette {
            alphabet,
            crosses,
            provenance: Provenance::UserSupplied,
        })
    }

    /// A built-in palette: `ce` (bulk crosses of the enhanced tiling),
    /// `ce-axis` (those plus every axis cross for every default and
    /// reflection) or `parity` (bulk crosses with the parity extension).
    pub fn builtin(name: &str) -> Result<PlusPalette, PaletteError> {
        let id = Pose::identity(64);
        Ok(match name {
            "ce" => extract_plus_palette(&[id], 64, Alphabet::Base)?
                .off_axis
                .symmetrized(),
            "parity" => extract_plus_palette(&[id], 64, Alphabet::Parity)?
                .off_axis
                .symmetrized(),
            "ce-axis" => {
                let poses: Vec<Pose> = Sym::ALL
                    .iter()
                    .flat_map(|&s| {
                        (0..4).map(move |d| Pose {
                            sym: s,
                            default_x: d & 1,
                            default_y: d >> 1,
                            ..Pose::identity(64)
                        })
                    })
                    .collect();
                let ex = extract_plus_palette(&poses, 32, Alphabet::Base)?;
                ex.off_axis.union(&ex.axis).symmetrized()
            }
            other => return Err(PaletteError::UnknownBuiltin(other.to_string())),
        })
    }
}

/// Fast membership test over the 20-bit cross keys.
#[derive(Clone)]
pub struct CrossSet {
    bits: Vec<u64>,
}

impl CrossSet {
    pub fn new(pp: &PlusPalette) -> Self {
        let mut bits = vec![0u64; (1 << 20) / 64];
        for c in &pp.crosses {
            let k = c.key() as usize;
            bits[k / 64] |= 1 << (k % 64);
        }
        CrossSet { bits }
    }

    pub fn contains(&self, c: &Cross) -> bool {
        let k = c.key() as usize;
        self.bits[k / 64] >> (k % 64) & 1 == 1
    }
}

/// One cross per interior vertex, row-major (y ascending, then x).
pub fn crosses_of(p: &Patch) -> Vec<((i64, i64), Cross)> {
    p.rect()
        .interior_vertices()
        .map(|(x, y)| ((x, y), cross_at(p, x, y).expect("interior vertex")))
        .collect()
}

pub fn cross_at(p: &Patch, x: i64, y: i64) -> Option<Cross> {
    p.star(x, y).map(Cross::from_arms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub vertex: (i64, i64),
    pub cross: Cross,
}

/// `Ok` when every interior cross is allowed; otherwise the first offending
/// vertex in row-major order.
pub fn verify(p: &Patch, pp: &PlusPalette) -> Result<(), Violation> {
    verify_with(p, &CrossSet::new(pp))
}

pub fn verify_with(p: &Patch, set: &CrossSet) -> Result<(), Violation> {
    let r = p.rect();
    let hit = (r.y0 + 1..r.y1).into_par_iter().find_map_first(|y| {
        (r.x0 + 1..r.x1).find_map(|x| {
            let cross = cross_at(p, x, y).expect("interior vertex");
            (!set.contains(&cross)).then_some(Violation {
                vertex: (x, y),
                cross,
            })
        })
    });
    match hit {
        Some(v) => Err(v),
        None => Ok(()),
    }
}

pub fn dualize(pp: &PlusPalette) -> TilePalette {
    TilePalette {
        alphabet: pp.alphabet,
        tiles: pp
            .crosses
            .iter()
            .map(|c| Tile {
                top: c.n,
                right: c.e,
                bottom: c.s,
                left: c.w,
            })
            .collect(),
    }
}

pub fn undualize(tp: &TilePalette) -> PlusPalette {
    PlusPalette {
        alphabet: tp.alphabet,
        crosses: tp
            .tiles
            .iter()
            .map(|t| Cross::new(t.top, t.right, t.bottom, t.left))
            .collect(),
        provenance: Provenance::UserSupplied,
    }
}

/// A patch after turning every edge a quarter turn about its center and
/// moving the result by `(-1/2, -1/2)` back onto the integer grid:
/// `V(x, y)` becomes `H(x-1, y)` and `H(x, y)` becomes `V(x, y-1)`, so the
/// cross at vertex `(x, y)` becomes the tile with corner `(x-1, y-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualPatch {
    pub edges: BTreeMap<EdgeRef, EdgeColor>,
}

pub fn dual_patch(p: &Patch) -> DualPatch {
    let edges = p
        .edges()
        .map(|(e, c)| {
            let d = match e.orientation {
                Orientation::V => EdgeRef::h(e.x - 1, e.y),
                Orientation::H => EdgeRef::v(e.x, e.y - 1),
            };
            (d, c)
        })
        .collect();
    DualPatch { edges }
}

impl DualPatch {
    /// Every unit square whose four sides are present, by lower-left corner.
    pub fn tiles(&self) -> Vec<((i64, i64), Tile)> {
        let mut corners: BTreeSet<(i64, i64)> = BTreeSet::new();
        for e in self.edges.keys() {
            if e.orientation == Orientation::H {
                corners.insert((e.y, e.x));
            }
        }
        corners
            .into_iter()
            .filter_map(|(y, x)| {
                let get = |e: EdgeRef| self.edges.get(&e).copied();
                Some((
                    (x, y),
                    Tile {
                        top: get(EdgeRef::h(x, y + 1))?,
                        right: get(EdgeRef::v(x + 1, y))?,
                        bottom: get(EdgeRef::h(x, y))?,
                        left: get(EdgeRef::v(x, y))?,
                    },
                ))
            })
            .collect()
    }
}

/// First complete tile (row-major) missing from the palette.
pub fn verify_tiles(d: &DualPatch, tp: &TilePalette) -> Result<(), ((i64, i64), Tile)> {
    match d.tiles().into_iter().find(|(_, t)| !tp.tiles.contains(t)) {
        Some(v) => Err(v),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    /// Crosses at vertices off both axes.
    pub off_axis: PlusPalette,
    /// Crosses at vertices on an axis.
    pub axis: PlusPalette,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub radius: i64,
    pub poses: usize,
    pub off_axis_crosses: usize,
    pub off_axis_orbits: usize,
    pub axis_crosses: usize,
    pub axis_orbits: usize,
    pub orbit_representatives: Vec<String>,
}

impl Extraction {
    pub fn report(&self, radius: i64, poses: usize) -> ExtractionReport {
        let orbits = self.off_axis.orbits();
        ExtractionReport {
            radius,
            poses,
            off_axis_crosses: self.off_axis.len(),
            off_axis_orbits: orbits.len(),
            axis_crosses: self.axis.len(),
            axis_orbits: self.axis.orbits().len(),
            orbit_representatives: orbits
                .iter()
                .map(|c| c.to_hex(self.off_axis.alphabet))
                .collect(),
        }
    }
}

/// Every cross seen in the square `[-radius, radius)²` around the origin of
/// each pose's coordinates, split by whether its vertex lies on an axis.
pub fn extract_plus_palette(
    poses: &[Pose],
    radius: i64,
    alphabet: Alphabet,
) -> Result<Extraction, PatchError> {
    let mut off = BTreeSet::new();
    let mut axis = BTreeSet::new();
    for pose in poses {
        let (cx, cy) = (pose.dx.to_i64(), pose.dy.to_i64());
        let center_ok = cx.unsigned_abs() < 1 << 40 && cy.unsigned_abs() < 1 << 40;
        let (cx, cy) = if center_ok { (cx, cy) } else { (0, 0) };
        let rect = Rect::new(cx - radius, cy - radius, cx + radius, cy + radius);
        let p = generate_in(pose, rect, alphabet)?;
        let per_row: Vec<(BTreeSet<Cross>, BTreeSet<Cross>)> = (rect.y0 + 1..rect.y1)
            .into_par_iter()
            .map(|y| {
                let mut o = BTreeSet::new();
                let mut a = BTreeSet::new();
                for x in rect.x0 + 1..rect.x1 {
                    let c = cross_at(&p, x, y).expect("interior");
                    if pose.vertex_off_axis(x, y) {
                        o.insert(c);
                    } else {
                        a.insert(c);
                    }
                }
                (o, a)
            })
            .collect();
        for (o, a) in per_row {
            off.extend(o);
            axis.extend(a);
        }
    }
    Ok(Extraction {
        off_axis: PlusPalette {
            alphabet,
            crosses: off,
            provenance: Provenance::Extracted,
        },
        axis: PlusPalette {
            alphabet,
            crosses: axis,
            provenance: Provenance::Extracted,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling2d::{generate, Sign};

    fn ce() -> PlusPalette {
        PlusPalette::builtin("ce").unwrap()
    }

    #[test]
    fn cross_counts() {
        let p = generate(&Pose::identity(64), Rect::new(5, 5, 8, 8)).unwrap();
        assert_eq!(crosses_of(&p).len(), 4);
        let p = generate(&Pose::identity(64), Rect::new(5, 5, 7, 7)).unwrap();
        assert_eq!(crosses_of(&p).len(), 1);
        let p = generate(&Pose::identity(64), Rect::new(3, 4, 13, 11)).unwrap();
        assert_eq!(crosses_of(&p).len(), 9 * 6);
    }

    #[test]
    fn seven_orbits_off_axis() {
        let ex = extract_plus_palette(&[Pose::identity(64)], 256, Alphabet::Base).unwrap();
        assert_eq!(ex.off_axis.orbits().len(), 7);
        assert_eq!(ex.off_axis.symmetrized(), ex.off_axis.clone());
        let bigger = extract_plus_palette(&[Pose::identity(64)], 512, Alphabet::Base).unwrap();
        assert_eq!(bigger.off_axis.crosses, ex.off_axis.crosses);
        let brackets = extract_plus_palette(&[Pose::identity(64)], 64, Alphabet::Bracket).unwrap();
        assert!(brackets.off_axis.len() < ex.off_axis.len());
    }

    #[test]
    fn canonical_forms() {
        for c in ce().crosses {
            let k = canonicalize(&c);
            assert_eq!(canonicalize(&k), k);
            for s in Sym::ALL {
                assert_eq!(canonicalize(&c.transformed(s)), k);
            }
        }
        let b = EdgeColor::bracket_only(0);
        let c = Cross::new(b, b, b, b);
        assert_eq!(c.transformed(Sym::E), c);
    }

    #[test]
    fn cross_transform_matches_patch_symmetry() {
        let pose = Pose::shifted(13, -7);
        let p = generate(&pose, Rect::new(-4, -6, 9, 8)).unwrap();
        for s in Sym::ALL {
            let q = crate::tiling2d::apply_symmetry(&p, s);
            for ((x, y), c) in crosses_of(&p) {
                let (u, v) = s.apply((x, y));
                assert_eq!(cross_at(&q, u, v), Some(c.transformed(s)));
            }
        }
    }

    #[test]
    fn generated_patches_verify() {
        let pp = ce();
        for pose in [
            Pose::shifted(1000, -77),
            Pose::shifted(-5, 3).with_sym(Sym::DX),
        ] {
            let (cx, cy) = (pose.dx.to_i64(), pose.dy.to_i64());
            let r = Rect::new(cx + 1, cy + 1, cx + 90, cy + 60);
            assert_eq!(verify(&generate(&pose, r).unwrap(), &pp), Ok(()));
        }
        let tiny = generate(&Pose::identity(64), Rect::new(3, 3, 4, 4)).unwrap();
        assert_eq!(verify(&tiny, &pp), Ok(()));
    }

    #[test]
    fn flipped_bold_bit_is_caught_next_to_the_flip() {
        let pp = ce();
        let r = Rect::new(1, 1, 40, 40);
        let mut p = generate(&Pose::identity(64), r).unwrap();
        let e = EdgeRef::v(12, 20);
        let c = p.get(e).unwrap();
        p.set(e, EdgeColor::new(c.bracket(), !c.bold(), c.pointer()));
        let v = verify(&p, &pp).unwrap_err();
        assert!(v.vertex == (12, 20) || v.vertex == (12, 21), "{v:?}");
    }

    #[test]
    fn empty_palette_rejects_and_empty_patch_passes() {
        let empty = PlusPalette::new(Alphabet::Base, [], Provenance::UserSupplied);
        let p = generate(&Pose::identity(64), Rect::new(1, 1, 4, 4)).unwrap();
        assert_eq!(verify(&p, &empty).unwrap_err().vertex, (2, 2));
    }

    #[test]
    fn duality() {
        let pp = ce();
        let tp = dualize(&pp);
        assert_eq!(tp.tiles.len(), pp.len());
        assert_eq!(undualize(&tp).crosses, pp.crosses);
        let good = generate(&Pose::shifted(21, 40), Rect::new(1, 1, 17, 17)).unwrap();
        let mut bad = good.clone();
        let e = EdgeRef::h(7, 9);
        let c = bad.get(e).unwrap();
        bad.set(e, c.with_pointer(c.pointer().flip()));
        for p in [&good, &bad] {
            let d = dual_patch(p);
            assert_eq!(d.tiles().len(), crosses_of(p).len());
            assert_eq!(verify(p, &pp).is_ok(), verify_tiles(&d, &tp).is_ok());
        }
        assert!(verify(&bad, &pp).is_err());
    }

    #[test]
    fn palette_text_round_trip() {
        for name in ["ce", "parity", "ce-axis"] {
            let pp = PlusPalette::builtin(name).unwrap();
            let back = PlusPalette::from_text(&pp.to_text()).unwrap();
            assert_eq!(back.crosses, pp.crosses, "{name}");
            assert_eq!(back.alphabet, pp.alphabet);
        }
        assert!(PlusPalette::from_text("12g4\n").is_err());
        assert!(PlusPalette::from_text("123\n").is_err());
        assert_eq!(PlusPalette::from_text("# nothing\n").unwrap().len(), 0);
    }

    #[test]
    fn axis_crosses_kept_apart() {
        let ex = extract_plus_palette(&[Pose::identity(64)], 32, Alphabet::Base).unwrap();
        assert!(!ex.axis.is_empty());
        let pp = PlusPalette::builtin("ce-axis").unwrap();
        assert!(pp.len() > ce().len());
        // the origin cross: all four arms bold and pointing inward
        let o = cross_at(
            &generate(&Pose::identity(64), Rect::new(-2, -2, 2, 2)).unwrap(),
            0,
            0,
        )
        .unwrap();
        assert!(o.arms().iter().all(|c| c.bold()));
        assert_eq!(o.n.pointer(), Sign::Neg);
        assert_eq!(o.s.pointer(), Sign::Pos);
    }
}
