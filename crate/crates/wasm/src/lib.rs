//! Browser bindings: draw a tiling, show the brackets of a line by rank,
//! and decode the pose of a window.
//!
//! Every export takes plain numbers and strings and returns a string, so
//! the same functions run natively under `cargo test`.

use wasm_bindgen::prelude::*;

use aptile::adics::{Adic, DEFAULT_PRECISION};
use aptile::coords1d::{brackets, render_by_rank, Line1D};
use aptile::decode2d::infer_pose;
use aptile::tiling2d::{generate, render, Format, Pose, Rect, RenderOptions, Sym};

/// Largest window side the page may request.
pub const MAX_SIDE: u32 = 256;

fn adic(text: &str) -> Result<Adic, String> {
    let text = text.trim();
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let body = body.trim_start_matches("0x");
    let body = if body.is_empty() { "0" } else { body };
    let a = Adic::from_hex(&format!("0x{body}"), DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    Ok(if neg { -a } else { a })
}

fn pose(
    shift_x: &str,
    shift_y: &str,
    sym: &str,
    default_x: u8,
    default_y: u8,
) -> Result<Pose, String> {
    Ok(Pose {
        dx: adic(shift_x)?,
        dy: adic(shift_y)?,
        sym: sym.parse::<Sym>()?,
        default_x: default_x & 1,
        default_y: default_y & 1,
    })
}

fn window(x0: i32, y0: i32, side: u32) -> Result<Rect, String> {
    if side == 0 || side > MAX_SIDE {
        return Err(format!("side must be between 1 and {MAX_SIDE}"));
    }
    Ok(Rect::square(x0.into(), y0.into(), side.into()))
}

/// SVG drawing of the `side × side` window at `(x0, y0)`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn render_svg(
    shift_x: &str,
    shift_y: &str,
    sym: &str,
    default_x: u8,
    default_y: u8,
    x0: i32,
    y0: i32,
    side: u32,
    scale: u32,
) -> Result<String, String> {
    let pose = pose(shift_x, shift_y, sym, default_x, default_y)?;
    let p = generate(&pose, window(x0, y0, side)?).map_err(|e| e.to_string())?;
    let opts = RenderOptions {
        pose: Some(pose),
        scale: scale.clamp(2, 40),
        ..RenderOptions::default()
    };
    render(&p, Format::Svg, &opts).map_err(|e| e.to_string())
}

/// Brackets of the line shifted by `shift` over `[lo, lo + len)`, one text
/// row per rank.
#[wasm_bindgen]
pub fn bracket_rows(shift: &str, lo: i32, len: u32) -> Result<String, String> {
    if len == 0 || len > 4 * MAX_SIDE {
        return Err(format!("length must be between 1 and {}", 4 * MAX_SIDE));
    }
    let line = Line1D::shifted(adic(shift)?);
    let lo = i64::from(lo);
    let w = brackets(&line, lo, lo + i64::from(len)).map_err(|e| e.to_string())?;
    Ok(render_by_rank(&w))
}

/// Generates a window and decodes it again; JSON with the true pose and
/// the estimate.
#[wasm_bindgen]
pub fn decode_window(
    shift_x: &str,
    shift_y: &str,
    sym: &str,
    x0: i32,
    y0: i32,
    side: u32,
) -> Result<String, String> {
    let pose = pose(shift_x, shift_y, sym, 0, 0)?;
    let p = generate(&pose, window(x0, y0, side)?).map_err(|e| e.to_string())?;
    let est = infer_pose(&p).map_err(|e| e.to_string())?;
    let json = serde_json::json!({
        "truth": {
            "dx_mod": pose.dx.residue(est.m_x),
            "dy_mod": pose.dy.residue(est.m_y),
            "sym": pose.sym,
        },
        "estimate": est,
        "consistent": est.consistent_with(&pose),
    });
    Ok(json.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg() {
        let s = render_svg("5", "-3", "x", 0, 1, -8, -8, 16, 10).unwrap();
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(render_svg("5", "0", "q", 0, 0, 0, 0, 8, 10).is_err());
        assert!(render_svg("zz", "0", "e", 0, 0, 0, 0, 8, 10).is_err());
        assert!(render_svg("0", "0", "e", 0, 0, 0, 0, 0, 10).is_err());
    }

    #[test]
    fn rows() {
        let text = bracket_rows("0x0", 1, 16).unwrap();
        assert!(text.lines().count() >= 3);
        assert!(text.contains('{') && text.contains('['));
        assert!(bracket_rows("1", 0, 0).is_err());
    }

    #[test]
    fn decode() {
        let v: serde_json::Value =
            serde_json::from_str(&decode_window("2a", "7", "d", 40, 40, 64).unwrap()).unwrap();
        assert_eq!(v["consistent"], true);
        assert_eq!(v["estimate"]["dx_mod"], 0x2a % 8);
        assert!(decode_window("0", "0", "e", 0, 0, 4).is_err());
    }
}
