use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::color::{Alphabet, EdgeColor};
use super::edge::{EdgeRef, Orientation};
use super::pose::{ce_color_in, Pose};
use super::sym::Sym;
use crate::coords1d::Coords1dError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatchError {
    #[error("empty rectangle {0:?}")]
    EmptyRect(Rect),
    #[error(transparent)]
    Coords(#[from] Coords1dError),
    #[error("patch text, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0} is not an interior edge of the patch")]
    NotInterior(EdgeRef),
}

/// A rectangle of unit tiles `[x0, x1) × [y0, y1)`, i.e. the closed square
/// region with corners `(x0, y0)` and `(x1, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    /// Square of side `side` with lower-left corner `(x, y)`.
    pub fn square(x: i64, y: i64, side: i64) -> Self {
        Rect::new(x, y, x + side, y + side)
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0
    }

    pub fn is_empty(&self) -> bool {
        self.width() <= 0 || self.height() <= 0
    }

    /// Edges strictly inside the closed rectangle (the open box).
    pub fn has_interior_edge(&self, e: EdgeRef) -> bool {
        match e.orientation {
            Orientation::V => self.x0 < e.x && e.x < self.x1 && self.y0 <= e.y && e.y < self.y1,
            Orientation::H => self.x0 <= e.x && e.x < self.x1 && self.y0 < e.y && e.y < self.y1,
        }
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x0 <= other.x0 && other.x1 <= self.x1 && self.y0 <= other.y0 && other.y1 <= self.y1
    }

    pub fn translated(&self, dx: i64, dy: i64) -> Rect {
        Rect::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }

    /// Bounding rectangle of the image under a reflection.
    pub fn mapped(&self, s: Sym) -> Rect {
        let (a, b) = (s.apply((self.x0, self.y0)), s.apply((self.x1, self.y1)));
        Rect::new(a.0.min(b.0), a.1.min(b.1), a.0.max(b.0), a.1.max(b.1))
    }

    /// Interior vertices, row-major (y outer, x inner).
    pub fn interior_vertices(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (self.y0 + 1..self.y1).flat_map(move |y| (self.x0 + 1..self.x1).map(move |x| (x, y)))
    }

    /// Interior edges: all vertical ones row by row, then all horizontal ones.
    pub fn interior_edges(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        let v = (self.y0..self.y1)
            .flat_map(move |y| (self.x0 + 1..self.x1).map(move |x| EdgeRef::v(x, y)));
        let h = (self.y0 + 1..self.y1)
            .flat_map(move |y| (self.x0..self.x1).map(move |x| EdgeRef::h(x, y)));
        v.chain(h)
    }

    fn v_count(&self) -> usize {
        ((self.width() - 1).max(0) * self.height().max(0)) as usize
    }

    fn h_count(&self) -> usize {
        (self.width().max(0) * (self.height() - 1).max(0)) as usize
    }
}

/// The colors of every edge of an open box; border edges are absent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Patch {
    rect: Rect,
    alphabet: Alphabet,
    v: Vec<EdgeColor>,
    h: Vec<EdgeColor>,
}

impl Patch {
    /// A patch with every interior edge set to `fill`.
    pub fn filled(rect: Rect, alphabet: Alphabet, fill: EdgeColor) -> Self {
        Patch {
            rect,
            alphabet,
            v: vec![fill; rect.v_count()],
            h: vec![fill; rect.h_count()],
        }
    }

    pub fn from_fn(
        rect: Rect,
        alphabet: Alphabet,
        mut color: impl FnMut(EdgeRef) -> EdgeColor,
    ) -> Self {
        let mut p = Patch::filled(rect, alphabet, EdgeColor::bracket_only(0));
        for e in rect.interior_edges() {
            let c = color(e);
            p.set(e, c);
        }
        p
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn edge_count(&self) -> usize {
        self.v.len() + self.h.len()
    }

    fn index(&self, e: EdgeRef) -> Option<usize> {
        if !self.rect.has_interior_edge(e) {
            return None;
        }
        let r = &self.rect;
        Some(match e.orientation {
            Orientation::V => ((e.y - r.y0) * (r.width() - 1) + (e.x - r.x0 - 1)) as usize,
            Orientation::H => ((e.y - r.y0 - 1) * r.width() + (e.x - r.x0)) as usize,
        })
    }

    pub fn get(&self, e: EdgeRef) -> Option<EdgeColor> {
        let i = self.index(e)?;
        Some(match e.orientation {
            Orientation::V => self.v[i],
            Orientation::H => self.h[i],
        })
    }

    /// Panics when `e` is not an interior edge.
    pub fn set(&mut self, e: EdgeRef, c: EdgeColor) {
        let i = self
            .index(e)
            .unwrap_or_else(|| panic!("{e} outside {:?}", self.rect));
        match e.orientation {
            Orientation::V => self.v[i] = c,
            Orientation::H => self.h[i] = c,
        }
    }

    pub fn try_set(&mut self, e: EdgeRef, c: EdgeColor) -> Result<(), PatchError> {
        if self.index(e).is_none() {
            return Err(PatchError::NotInterior(e));
        }
        self.set(e, c);
        Ok(())
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeRef, EdgeColor)> + '_ {
        self.rect
            .interior_edges()
            .map(move |e| (e, self.get(e).expect("interior")))
    }

    /// The colors of the four edges at an interior vertex, as `[N, E, S, W]`.
    pub fn star(&self, x: i64, y: i64) -> Option<[EdgeColor; 4]> {
        Some([
            self.get(EdgeRef::v(x, y))?,
            self.get(EdgeRef::h(x, y))?,
            self.get(EdgeRef::v(x, y - 1))?,
            self.get(EdgeRef::h(x - 1, y))?,
        ])
    }

    /// The open sub-box on `sub`; `sub` must lie within this patch's rectangle.
    pub fn restrict(&self, sub: Rect) -> Option<Patch> {
        if !self.rect.contains_rect(&sub) || sub.is_empty() {
            return None;
        }
        Some(Patch::from_fn(sub, self.alphabet, |e| {
            self.get(e).expect("inside")
        }))
    }

    pub fn translated(&self, dx: i64, dy: i64) -> Patch {
        let rect = self.rect.translated(dx, dy);
        Patch {
            rect,
            alphabet: self.alphabet,
            v: self.v.clone(),
            h: self.h.clone(),
        }
    }

    /// Replaces every color through `f`, keeping geometry.
    pub fn map_colors(&self, alphabet: Alphabet, f: impl Fn(EdgeColor) -> EdgeColor) -> Patch {
        Patch {
            rect: self.rect,
            alphabet,
            v: self.v.iter().map(|&c| f(c)).collect(),
            h: self.h.iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn distinct_colors(&self) -> std::collections::BTreeSet<EdgeColor> {
        self.v.iter().chain(&self.h).copied().collect()
    }
}

/// The patch of the tiling `pose` on the open box `rect`.
pub fn generate(pose: &Pose, rect: Rect) -> Result<Patch, PatchError> {
    generate_in(pose, rect, Alphabet::Base)
}

pub fn generate_in(pose: &Pose, rect: Rect, alphabet: Alphabet) -> Result<Patch, PatchError> {
    if rect.is_empty() {
        return Err(PatchError::EmptyRect(rect));
    }
    let v_rows: Vec<Vec<EdgeColor>> = (rect.y0..rect.y1)
        .into_par_iter()
        .map(|y| {
            (rect.x0 + 1..rect.x1)
                .map(|x| ce_color_in(EdgeRef::v(x, y), pose, alphabet))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let h_rows: Vec<Vec<EdgeColor>> = (rect.y0 + 1..rect.y1)
        .into_par_iter()
        .map(|y| {
            (rect.x0..rect.x1)
                .map(|x| ce_color_in(EdgeRef::h(x, y), pose, alphabet))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(Patch {
        rect,
        alphabet,
        v: v_rows.concat(),
        h: h_rows.concat(),
    })
}

/// Reflects a patch about the origin: edges move geometrically and colors
/// follow (brackets flip along negated axes, pointers flip along negated
/// directions, boldness is untouched).
pub fn apply_symmetry(p: &Patch, s: Sym) -> Patch {
    let rect = p.rect.mapped(s);
    let mut out = Patch::filled(rect, p.alphabet, EdgeColor::bracket_only(0));
    for (e, c) in p.edges() {
        out.set(s.apply_edge(e), s.apply_color(e.orientation, c));
    }
    out
}

/// Keeps only the bracket bit of every color.
pub fn project(p: &Patch) -> Patch {
    p.map_colors(Alphabet::Bracket, |c| EdgeColor::bracket_only(c.bracket()))
}

fn put_color(out: &mut String, c: EdgeColor, alphabet: Alphabet) {
    match alphabet.digits() {
        2 => write!(out, "{:02x}", c.code()).unwrap(),
        _ => write!(out, "{:x}", c.code()).unwrap(),
    }
}

impl Patch {
    /// Text form: a `TILEPATCH v1 x0 y0 x1 y1 alphabet` header, then one
    /// `V` line per tile row (bottom first) and one `H` line per interior
    /// horizontal grid line, each a run of packed hex color codes.
    pub fn to_text(&self) -> String {
        let r = self.rect;
        let mut out = format!(
            "TILEPATCH v1 {} {} {} {} {}\n",
            r.x0, r.y0, r.x1, r.y1, self.alphabet
        );
        for y in r.y0..r.y1 {
            out.push('V');
            out.push(' ');
            for x in r.x0 + 1..r.x1 {
                put_color(&mut out, self.get(EdgeRef::v(x, y)).unwrap(), self.alphabet);
            }
            out.push('\n');
        }
        for y in r.y0 + 1..r.y1 {
            out.push('H');
            out.push(' ');
            for x in r.x0..r.x1 {
                put_color(&mut out, self.get(EdgeRef::h(x, y)).unwrap(), self.alphabet);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Patch, PatchError> {
        let err = |line: usize, msg: &str| PatchError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 7 || fields[0] != "TILEPATCH" || fields[1] != "v1" {
            return Err(err(1, "expected `TILEPATCH v1 x0 y0 x1 y1 alphabet`"));
        }
        let num = |s: &str| s.parse::<i64>().map_err(|_| err(1, "bad coordinate"));
        let rect = Rect::new(
            num(fields[2])?,
            num(fields[3])?,
            num(fields[4])?,
            num(fields[5])?,
        );
        if rect.is_empty() {
            return Err(PatchError::EmptyRect(rect));
        }
        let alphabet: Alphabet = fields[6].parse().map_err(|m: String| err(1, &m))?;
        let digits = alphabet.digits();
        let mut patch = Patch::filled(rect, alphabet, EdgeColor::bracket_only(0));

        let mut read_row =
            |tag: char, y: i64, xs: std::ops::Range<i64>, mk: fn(i64, i64) -> EdgeRef| {
                let (n, line) = lines.next().ok_or_else(|| err(0, "truncated patch"))?;
                let n = n + 1;
                let body = line
                    .strip_prefix(tag)
                    .map(str::trim)
                    .ok_or_else(|| err(n, &format!("expected a `{tag}` row")))?;
                if body.len() != xs.clone().count() * digits || !body.is_ascii() {
                    return Err(err(n, "wrong row length"));
                }
                for (i, x) in xs.enumerate() {
                    let code = u8::from_str_radix(&body[i * digits..(i + 1) * digits], 16)
                        .map_err(|_| err(n, "bad hex digit"))?;
                    let c = EdgeColor::from_code(code)
                        .filter(|&c| alphabet.admits(c))
                        .ok_or_else(|| err(n, "color outside the alphabet"))?;
                    patch.set(mk(x, y), c);
                }
                Ok(())
            };
        for y in rect.y0..rect.y1 {
            read_row('V', y, rect.x0 + 1..rect.x1, EdgeRef::v)?;
        }
        for y in rect.y0 + 1..rect.y1 {
            read_row('H', y, rect.x0..rect.x1, EdgeRef::h)?;
        }
        Ok(patch)
    }
}
