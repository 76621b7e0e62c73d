use std::fmt::Write as _;

use thiserror::Error;

use super::color::{EdgeColor, Sign};
use super::edge::{EdgeRef, Orientation};
use super::patch::Patch;
use super::pose::Pose;
use crate::adics::{Adic, Rank};
use crate::coords1d::Bracket;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("patch of {area} tiles exceeds the render limit of {limit}")]
pub struct TooLarge {
    pub area: u64,
    pub limit: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Ascii,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ascii" => Ok(Format::Ascii),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    /// When known, ranks pick bracket shapes and stroke colors; otherwise
    /// every bracket is drawn round.
    pub pose: Option<Pose>,
    pub max_area: u64,
    /// Pixels per tile side in SVG output.
    pub scale: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            pose: None,
            max_area: 1 << 20,
            scale: 12,
        }
    }
}

fn rank_of(e: EdgeRef, pose: Option<&Pose>) -> Option<Rank> {
    let pose = pose?;
    let n = pose.precision();
    let u = match e.orientation {
        Orientation::V => Adic::from_i64(e.x, n) - pose.dx,
        Orientation::H => Adic::from_i64(e.y, n) - pose.dy,
    };
    Some(u.valuation())
}

fn glyph(c: EdgeColor, rank: Option<Rank>) -> char {
    Bracket {
        bit: c.bracket(),
        rank: rank.unwrap_or(Rank::Unranked),
    }
    .glyph()
}

pub fn render(p: &Patch, format: Format, opts: &RenderOptions) -> Result<String, TooLarge> {
    let r = p.rect();
    let area = (r.width() * r.height()) as u64;
    if area > opts.max_area {
        return Err(TooLarge {
            area,
            limit: opts.max_area,
        });
    }
    Ok(match format {
        Format::Ascii => ascii(p, opts),
        Format::Svg => svg(p, opts),
    })
}

/// Text picture, top row first. Each edge is two characters: its bracket
/// glyph, doubled when bold. Vertices are blank columns.
fn ascii(p: &Patch, opts: &RenderOptions) -> String {
    if p.edge_count() == 0 {
        return String::new();
    }
    let r = p.rect();
    let pose = opts.pose.as_ref();
    let cell = |e: EdgeRef| match p.get(e) {
        Some(c) => {
            let g = glyph(c, rank_of(e, pose));
            [g, if c.bold() { g } else { ' ' }]
        }
        None => [' ', ' '],
    };
    let mut lines = Vec::new();
    for y in (r.y0..r.y1).rev() {
        if y + 1 < r.y1 {
            let mut row = String::new();
            for x in r.x0..r.x1 {
                row.push_str("  ");
                row.extend(cell(EdgeRef::h(x, y + 1)));
            }
            lines.push(row);
        }
        let mut row = String::new();
        for x in r.x0..=r.x1 {
            row.extend(cell(EdgeRef::v(x, y)));
            row.push_str("  ");
        }
        lines.push(row);
    }
    let mut out = String::new();
    for l in lines {
        out.push_str(l.trim_end());
        out.push('\n');
    }
    out
}

/// Bold edges are thick, pale ones thin; a chevron at the midpoint shows the
/// pointer. With a known pose, even ranks are red.
fn svg(p: &Patch, opts: &RenderOptions) -> String {
    let r = p.rect();
    let s = opts.scale as i64;
    let (w, h) = (r.width() * s, r.height() * s);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    if p.edge_count() > 0 {
        out.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
        out.push('\n');
    }
    // screen coordinates: y grows downward
    let px = |x: i64| (x - r.x0) * s;
    let py = |y: i64| (r.y1 - y) * s;
    let a = (s / 5).max(2);
    for (e, c) in p.edges() {
        let stroke = match rank_of(e, opts.pose.as_ref()) {
            Some(Rank::Ranked(k)) if k % 2 == 0 => "#c62828",
            Some(Rank::Unranked) => "#1565c0",
            _ => "#222",
        };
        let width = if c.bold() { 3 } else { 1 };
        let [(x0, y0), (x1, y1)] = e.endpoints();
        let (ax, ay, bx, by) = (px(x0), py(y0), px(x1), py(y1));
        writeln!(
            out,
            r#"<line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" stroke="{stroke}" stroke-width="{width}"/>"#
        )
        .unwrap();
        let (mx, my) = ((ax + bx) / 2, (ay + by) / 2);
        let d = match c.pointer() {
            Sign::Pos => 1,
            Sign::Neg => -1,
        };
        let points = match e.orientation {
            // pointer runs along the edge; screen y is flipped
            Orientation::V => {
                let tip = my - d * a;
                format!("{},{} {mx},{tip} {},{}", mx - a, my, mx + a, my)
            }
            Orientation::H => {
                let tip = mx + d * a;
                format!("{},{} {tip},{my} {},{}", mx, my - a, mx, my + a)
            }
        };
        writeln!(
            out,
            r#"<polyline points="{points}" fill="none" stroke="{stroke}" stroke-width="1"/>"#
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
