use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// From `(x, y)` to `(x, y+1)`; lies on the vertical line at abscissa `x`.
    V,
    /// From `(x, y)` to `(x+1, y)`; lies on the horizontal line at ordinate `y`.
    H,
}

/// A unit edge of the integer grid, named by orientation and lower endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeRef {
    pub orientation: Orientation,
    pub x: i64,
    pub y: i64,
}

impl EdgeRef {
    pub fn v(x: i64, y: i64) -> Self {
        EdgeRef {
            orientation: Orientation::V,
            x,
            y,
        }
    }

    pub fn h(x: i64, y: i64) -> Self {
        EdgeRef {
            orientation: Orientation::H,
            x,
            y,
        }
    }

    pub fn endpoints(&self) -> [(i64, i64); 2] {
        match self.orientation {
            Orientation::V => [(self.x, self.y), (self.x, self.y + 1)],
            Orientation::H => [(self.x, self.y), (self.x + 1, self.y)],
        }
    }

    /// The edge joining two lattice points at distance one.
    pub fn between(a: (i64, i64), b: (i64, i64)) -> Self {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo.0 == hi.0 {
            debug_assert_eq!(hi.1 - lo.1, 1);
            EdgeRef::v(lo.0, lo.1)
        } else {
            debug_assert_eq!((hi.0 - lo.0, hi.1 - lo.1), (1, 0));
            EdgeRef::h(lo.0, lo.1)
        }
    }

    /// Coordinate of the grid line the edge lies on.
    pub fn line(&self) -> i64 {
        match self.orientation {
            Orientation::V => self.x,
            Orientation::H => self.y,
        }
    }

    /// Start of the edge along its line.
    pub fn along(&self) -> i64 {
        match self.orientation {
            Orientation::V => self.y,
            Orientation::H => self.x,
        }
    }

    pub fn translated(&self, dx: i64, dy: i64) -> Self {
        EdgeRef {
            x: self.x + dx,
            y: self.y + dy,
            ..*self
        }
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({},{})", self.orientation, self.x, self.y)
    }
}
