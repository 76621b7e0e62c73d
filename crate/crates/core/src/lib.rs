//! Aperiodic tilings built from 2-adic coordinates.
//!
//! [`coords1d`] holds the bracket tiling of a line, [`tiling2d`] its planar
//! product with enforcement bits, [`palette`] the local rules, and the
//! remaining modules check the structure those rules force.

pub mod adics;
pub mod bars;
pub mod blocks;
pub mod coords1d;
pub mod decode2d;
pub mod enumerate;
pub mod palette;
pub mod tiling2d;

pub use adics::{Adic, Rank};
pub use tiling2d::{EdgeColor, EdgeRef, Patch, Pose, Rect, Sym};
