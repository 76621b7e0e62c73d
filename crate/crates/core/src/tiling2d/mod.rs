//! The two-dimensional tilings: every vertical line carries the bracket
//! tiling of its abscissa and every horizontal one that of its ordinate,
//! enhanced with a boldness bit and a pointer bit per edge.

mod color;
mod edge;
mod patch;
mod pose;
mod render;
mod sym;

pub use color::{Alphabet, EdgeColor, ParityMark, Sign};
pub use edge::{EdgeRef, Orientation};
pub use patch::{apply_symmetry, generate, generate_in, project, Patch, PatchError, Rect};
pub use pose::{ce_color, ce_color_in, Pose};
pub use render::{render, Format, RenderOptions, TooLarge};
pub use sym::Sym;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adics::{Adic, Rank};
    use crate::coords1d::{bracket_at_int, Line1D};
    use rand::rngs::StdRng as Rng64;
    use rand::{Rng, SeedableRng};

    fn id() -> Pose {
        Pose::identity(64)
    }

    /// Rank-k domains found by matching brackets emitted for positions of
    /// one line, scanning a window wide enough to close every pair near `y`.
    fn matched_domains(k: u32, lo: i64, hi: i64) -> Vec<(i64, i64)> {
        let line = Line1D::identity(64);
        let mut open = None;
        let mut out = Vec::new();
        for x in lo..=hi {
            let b = bracket_at_int(x, &line).unwrap();
            if b.rank != Rank::Ranked(k) {
                continue;
            }
            if b.is_opening() {
                open = Some(x);
            } else if let Some(a) = open.take() {
                out.push((a, x));
            }
        }
        out
    }

    /// Boldness by the word definition: the edge is part of the border of
    /// the intersection of a vertical and a horizontal domain of the line's
    /// rank, i.e. it runs inside a domain of the other coordinate.
    fn oracle_bold(line: i64, along: i64) -> bool {
        let k = line.trailing_zeros();
        let span = 1i64 << (k + 3);
        matched_domains(k, along - span, along + span)
            .iter()
            .any(|&(a, b)| a <= along && along + 1 <= b)
    }

    /// Pointer by the word definition: toward the nearest line of the same
    /// rank, measured from the edge midpoint.
    fn oracle_pointer(line: i64, along: i64) -> Sign {
        let k = line.trailing_zeros();
        let step = 1i64 << k;
        let mid2 = 2 * along + 1;
        let mut best: Option<(i64, i64)> = None;
        let mut c = (along / step - 4) * step;
        while c <= along + 4 * step {
            if c != 0 && c.trailing_zeros() == k {
                let d = (2 * c - mid2).abs();
                assert!(best.map_or(true, |(bd, _)| bd != d), "tie at {along}");
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, c));
                }
            }
            c += step;
        }
        Sign::from_bool(2 * best.unwrap().1 > mid2)
    }

    #[test]
    fn spec_examples() {
        assert!(ce_color(EdgeRef::v(1, 1), &id()).unwrap().bold());
        assert!(!ce_color(EdgeRef::v(1, 3), &id()).unwrap().bold());
        assert_eq!(
            ce_color(EdgeRef::v(2, 0), &id()).unwrap().pointer(),
            Sign::Pos
        );
        assert!(oracle_bold(1, 1));
        assert!(!oracle_bold(1, 3));
        assert_eq!(oracle_pointer(2, 0), Sign::Pos);
    }

    #[test]
    fn word_definitions_agree() {
        let mut rng = Rng64::seed_from_u64(7);
        for _ in 0..3000 {
            let x = rng.gen_range(-2000i64..2000);
            let y = rng.gen_range(-2000i64..2000);
            if x == 0 {
                continue;
            }
            let c = ce_color(EdgeRef::v(x, y), &id()).unwrap();
            assert_eq!(c.bold(), oracle_bold(x, y), "bold V({x},{y})");
            assert_eq!(c.pointer(), oracle_pointer(x, y), "pointer V({x},{y})");
            let d = ce_color(EdgeRef::h(y, x), &id()).unwrap();
            assert_eq!(d.base(), c.base(), "H mirrors V");
        }
    }

    #[test]
    fn small_generate_matches_oracle() {
        let p = generate(&id(), Rect::new(1, 1, 3, 3)).unwrap();
        assert_eq!(p.edge_count(), 4);
        for (e, c) in p.edges() {
            let (line, along) = (e.line(), e.along());
            assert_eq!(c.bold(), oracle_bold(line, along));
            assert_eq!(c.pointer(), oracle_pointer(line, along));
            assert_eq!(
                c.bracket(),
                bracket_at_int(line, &Line1D::identity(64)).unwrap().bit
            );
        }
    }

    #[test]
    fn width_one_has_only_horizontal_edges() {
        let p = generate(&id(), Rect::new(3, 0, 4, 5)).unwrap();
        assert_eq!(p.edge_count(), 4);
        assert!(p.edges().all(|(e, _)| e.orientation == Orientation::H));
    }

    #[test]
    fn shift_coherence() {
        let r = Rect::new(-20, -13, 27, 30);
        for (sx, sy) in [(2, 0), (-5, 7), (64, -3)] {
            let shifted = generate(&Pose::shifted(sx, sy), r).unwrap();
            let back = generate(&id(), r.translated(-sx, -sy))
                .unwrap()
                .translated(sx, sy);
            assert_eq!(shifted, back);
        }
    }

    fn random_pose(rng: &mut Rng64) -> Pose {
        Pose {
            dx: Adic::from_bits(rng.gen(), 64),
            dy: Adic::from_bits(rng.gen(), 64),
            sym: Sym::ALL[rng.gen_range(0..8)],
            default_x: rng.gen_range(0..2),
            default_y: rng.gen_range(0..2),
        }
    }

    #[test]
    fn equivariance_sampled() {
        let mut rng = Rng64::seed_from_u64(11);
        for _ in 0..10_000 {
            let mut pose = random_pose(&mut rng);
            if rng.gen_bool(0.3) {
                // small shifts put the axes inside the sample
                pose.dx = Adic::from_i64(rng.gen_range(-3..3), 64);
                pose.dy = Adic::from_i64(rng.gen_range(-3..3), 64);
            }
            let e = if rng.gen() {
                EdgeRef::v(rng.gen_range(-40..40), rng.gen_range(-40..40))
            } else {
                EdgeRef::h(rng.gen_range(-40..40), rng.gen_range(-40..40))
            };
            let s = Sym::ALL[rng.gen_range(0..8)];
            for alphabet in [Alphabet::Base, Alphabet::Parity] {
                let c = ce_color_in(e, &pose, alphabet).unwrap();
                let image = ce_color_in(s.apply_edge(e), &pose.reflected_by(s), alphabet).unwrap();
                assert_eq!(image, s.apply_color(e.orientation, c), "{s} {e} {pose:?}");
            }
        }
    }

    #[test]
    fn patch_symmetry_matches_generation() {
        let mut rng = Rng64::seed_from_u64(3);
        let r = Rect::new(-5, -9, 11, 7);
        for _ in 0..4 {
            let pose = random_pose(&mut rng);
            let p = generate(&pose, r).unwrap();
            for s in Sym::ALL {
                let direct = generate(&pose.reflected_by(s), r.mapped(s)).unwrap();
                assert_eq!(apply_symmetry(&p, s), direct, "{s}");
            }
            assert_eq!(apply_symmetry(&p, Sym::E), p);
            assert_eq!(apply_symmetry(&apply_symmetry(&p, Sym::X), Sym::X), p);
        }
    }

    #[test]
    fn projection_gives_line_brackets() {
        let pose = Pose::shifted(37, -11);
        let r = Rect::new(-30, -30, 30, 30);
        let p = project(&generate(&pose, r).unwrap());
        assert_eq!(p.alphabet(), Alphabet::Bracket);
        assert_eq!(project(&p), p);
        let lx = Line1D::shifted(pose.dx);
        let ly = Line1D::shifted(pose.dy);
        for (e, c) in p.edges() {
            let line = match e.orientation {
                Orientation::V => &lx,
                Orientation::H => &ly,
            };
            assert_eq!(c.bracket(), bracket_at_int(e.line(), line).unwrap().bit);
        }
    }

    #[test]
    fn truncated_shifts_agree_on_low_ranks() {
        let mut rng = Rng64::seed_from_u64(5);
        let r = Rect::new(-24, -24, 24, 24);
        for _ in 0..6 {
            let pose = Pose {
                sym: Sym::E,
                ..random_pose(&mut rng)
            };
            let full = generate(&pose, r).unwrap();
            for m in 3..12 {
                let cut = Pose {
                    dx: pose.dx.truncate(m),
                    dy: pose.dy.truncate(m),
                    ..pose
                };
                let approx = generate(&cut, r).unwrap();
                for (e, c) in full.edges() {
                    let u = Adic::from_i64(e.line(), 64)
                        - if e.orientation == Orientation::V {
                            pose.dx
                        } else {
                            pose.dy
                        };
                    if let Rank::Ranked(k) = u.valuation() {
                        if k + 2 < m {
                            assert_eq!(approx.get(e), Some(c), "m={m} {e}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn eight_colors() {
        let p = generate(&id(), Rect::new(-128, -128, 128, 128)).unwrap();
        assert_eq!(p.distinct_colors().len(), 8);
        let q = generate_in(&id(), Rect::new(1, 1, 257, 257), Alphabet::Base).unwrap();
        assert_eq!(q.distinct_colors().len(), 8);
    }

    #[test]
    fn bold_runs_have_length_twice_the_rank_step() {
        let lo = 1;
        let hi = 400;
        for x in 1..40i64 {
            let k = x.trailing_zeros();
            let colors: Vec<bool> = (lo..hi)
                .map(|y| ce_color(EdgeRef::v(x, y), &id()).unwrap().bold())
                .collect();
            let mut runs = Vec::new();
            let mut i = 0;
            while i < colors.len() {
                let j = (i..colors.len())
                    .find(|&j| colors[j] != colors[i])
                    .unwrap_or(colors.len());
                if colors[i] && i > 0 && j < colors.len() {
                    runs.push(j - i);
                }
                i = j;
            }
            assert!(!runs.is_empty() || 1 << (k + 2) > hi as usize / 2);
            assert!(runs.iter().all(|&l| l == 1 << (k + 1)), "x={x}: {runs:?}");
        }
    }

    #[test]
    fn patch_text_round_trip() {
        for alphabet in [Alphabet::Base, Alphabet::Parity, Alphabet::Bracket] {
            let p = generate_in(&Pose::shifted(3, 9), Rect::new(-4, -3, 6, 5), alphabet).unwrap();
            let text = p.to_text();
            assert!(text.starts_with(&format!("TILEPATCH v1 -4 -3 6 5 {alphabet}\n")));
            assert_eq!(Patch::from_text(&text).unwrap(), p);
        }
        assert!(Patch::from_text("TILEPATCH v1 0 0 2 2 base\nV 1\nV 9\nH 00\n").is_err());
        assert!(Patch::from_text("TILEPATCH v2 0 0 2 2 base\n").is_err());
        assert!(Patch::from_text("TILEPATCH v1 0 0 2 2 base\nV 1\n").is_err());
        assert!(Patch::from_text("TILEPATCH v1 0 0 2 2 base\nV 1\nV 3\nH 07\n").is_ok());
    }

    #[test]
    fn render_row_of_brackets() {
        let p = generate(&id(), Rect::new(0, 5, 9, 6)).unwrap();
        let opts = RenderOptions {
            pose: Some(id()),
            ..Default::default()
        };
        let text = render(&p, Format::Ascii, &opts).unwrap();
        assert_eq!(text.lines().count(), 1);
        let glyphs: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        // rank-0 brackets at 1,3,5,7 read "{ } { }"; every odd x is bold at y=5
        let rank0: String = glyphs.chars().filter(|c| "{}".contains(*c)).collect();
        assert!(rank0.starts_with("{{}}{{"), "{glyphs}");
        assert_eq!(render(&p, Format::Ascii, &opts).unwrap(), text);
    }

    #[test]
    fn render_svg_and_limits() {
        let p = generate(&id(), Rect::new(1, 1, 17, 17)).unwrap();
        let svg = render(&p, Format::Svg, &RenderOptions::default()).unwrap();
        assert_eq!(svg.matches("<line").count(), p.edge_count());
        assert!(svg.contains(r#"stroke-width="3""#));
        assert!(svg.contains(r#"stroke-width="1""#));
        let tiny = generate(&id(), Rect::new(1, 1, 2, 2)).unwrap();
        assert_eq!(
            render(&tiny, Format::Ascii, &RenderOptions::default()).unwrap(),
            ""
        );
        assert!(!render(&tiny, Format::Svg, &RenderOptions::default())
            .unwrap()
            .contains("<line"));
        let opts = RenderOptions {
            max_area: 100,
            ..Default::default()
        };
        assert!(render(&p, Format::Svg, &opts).is_err());
    }
}
