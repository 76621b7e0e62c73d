use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::color::EdgeColor;
use super::edge::{EdgeRef, Orientation};
use crate::adics::Adic;

/// One of the eight reflections and rotations fixing the origin, stored as a
/// signed permutation matrix `[[a, b], [c, d]]` acting on column vectors.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym([i8; 4]);

impl Sym {
    pub const E: Sym = Sym([1, 0, 0, 1]);
    pub const X: Sym = Sym([-1, 0, 0, 1]);
    pub const Y: Sym = Sym([1, 0, 0, -1]);
    pub const XY: Sym = Sym([-1, 0, 0, -1]);
    /// Diagonal transpose `(x, y) -> (y, x)`.
    pub const D: Sym = Sym([0, 1, 1, 0]);
    /// Transpose, then negate x.
    pub const DX: Sym = Sym([0, -1, 1, 0]);
    /// Transpose, then negate y.
    pub const DY: Sym = Sym([0, 1, -1, 0]);
    pub const DXY: Sym = Sym([0, -1, -1, 0]);

    pub const ALL: [Sym; 8] = [
        Sym::E,
        Sym::X,
        Sym::Y,
        Sym::XY,
        Sym::D,
        Sym::DX,
        Sym::DY,
        Sym::DXY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Sym::E => "e",
            Sym::X => "x",
            Sym::Y => "y",
            Sym::XY => "xy",
            Sym::D => "d",
            Sym::DX => "dx",
            Sym::DY => "dy",
            _ => "dxy",
        }
    }

    pub fn transposes(self) -> bool {
        self.0[0] == 0
    }

    pub fn apply(self, (x, y): (i64, i64)) -> (i64, i64) {
        let [a, b, c, d] = self.0.map(i64::from);
        (a * x + b * y, c * x + d * y)
    }

    pub fn apply_adic(self, x: Adic, y: Adic) -> (Adic, Adic) {
        let term = |s: i8, v: Adic| match s {
            1 => v,
            -1 => -v,
            _ => Adic::zero(v.precision()),
        };
        let [a, b, c, d] = self.0;
        (term(a, x) + term(b, y), term(c, x) + term(d, y))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn then_after(self, other: Sym) -> Sym {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = other.0;
        Sym([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    pub fn inverse(self) -> Sym {
        let [a, b, c, d] = self.0;
        Sym([a, c, b, d])
    }

    /// Image of the unit vector along axis `i` (0 = x, 1 = y): the axis it
    /// lands on and the sign it picks up.
    fn image_of_axis(self, i: usize) -> (usize, i8) {
        let (p, q) = (self.0[i], self.0[2 + i]);
        if p != 0 {
            (0, p)
        } else {
            (1, q)
        }
    }

    pub fn apply_edge(self, e: EdgeRef) -> EdgeRef {
        let [p, q] = e.endpoints();
        EdgeRef::between(self.apply(p), self.apply(q))
    }

    /// Color of the image edge, given the color and orientation of the source.
    pub fn apply_color(self, orientation: Orientation, c: EdgeColor) -> EdgeColor {
        let (line_axis, dir_axis) = match orientation {
            Orientation::V => (0, 1),
            Orientation::H => (1, 0),
        };
        let (_, line_sign) = self.image_of_axis(line_axis);
        let (_, dir_sign) = self.image_of_axis(dir_axis);
        c.transformed(line_sign, dir_sign)
    }

    /// Action on the pair of axis default bits `(x axis, y axis)`.
    pub fn apply_defaults(self, (dx, dy): (u8, u8)) -> (u8, u8) {
        let (x_to, x_sign) = self.image_of_axis(0);
        let (_, y_sign) = self.image_of_axis(1);
        let nx = dx ^ (x_sign < 0) as u8;
        let ny = dy ^ (y_sign < 0) as u8;
        if x_to == 0 {
            (nx, ny)
        } else {
            (ny, nx)
        }
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym({})", self.name())
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sym {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Sym::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown symmetry {s:?} (expected e,x,y,xy,d,dx,dy,dxy)"))
    }
}

impl Serialize for Sym {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Sym {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
