//! `aptile`: generate, check and search 2-adic aperiodic tilings.
//!
//! Every command prints JSON lines on stdout. Exit codes: 0 the property
//! holds, 1 it is violated (a witness is printed), 2 usage or input
//! error, 3 a search budget ran out before the answer was settled.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use aptile::adics::{Adic, DEFAULT_PRECISION};
use aptile::bars::{bar_histogram, classify_crosses, torus_impossibility};
use aptile::blocks::{check_corollary, check_lemma1, is_k_tiled, COROLLARY_MAX_K};
use aptile::coords1d::remark1_report;
use aptile::decode2d::{aperiodicity_check, infer_pose};
use aptile::enumerate::{
    check_lemma2, check_no_bold_three_bar, check_no_skipped_colors, check_parity_enforcement,
    enumerate_boxes, levitsky_check, Progress, SearchConfig, SearchOutcome,
};
use aptile::palette::{extract_plus_palette, verify, PlusPalette};
use aptile::tiling2d::{
    generate_in, render, Alphabet, Format, Patch, Pose, Rect, RenderOptions, Sym,
};

#[derive(Parser)]
#[command(
    name = "aptile",
    version,
    about = "2-adic aperiodic tilings: generate, verify, search, decode"
)]
struct Cli {
    /// Indent JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Keep wall-clock timings in the output (which then varies run to run).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a patch of the tiling named by a pose.
    Gen(GenArgs),
    /// Draw a patch as ASCII or SVG.
    Render(RenderArgs),
    /// Extract the cross palette from generated patches.
    Palette(PaletteArgs),
    /// Check a patch against a palette.
    Verify(VerifyArgs),
    /// Exhaustively enumerate palette-consistent boxes.
    Enum(EnumArgs),
    /// Bar and cross statistics of a patch.
    Stats(StatsArgs),
    /// The 6×6 torus impossibility certificate.
    Torus,
    /// Bold 2-bar neighbourhood check over all boxes of a given side.
    Levitsky(LevitskyArgs),
    /// Recover shift residues and reflections from a patch.
    Decode(DecodeArgs),
    /// Effect of a shift by (2i+1)·2^k on the bracket tiling of a line.
    Remark1(Remark1Args),
    /// Block structure of a patch: k-tiledness and equal frames.
    Lemma(LemmaArgs),
    /// Sampled check that small squares extend to large blocks.
    Corollary(CorollaryArgs),
}

#[derive(Args, Clone)]
struct PoseArgs {
    /// Horizontal 2-adic shift, hexadecimal (a leading `-` negates).
    #[arg(long, default_value = "0")]
    shift_x: String,
    #[arg(long, default_value = "0")]
    shift_y: String,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Reflection: e, x, y, xy, d, dx, dy or dxy.
    #[arg(long, default_value = "e")]
    sym: Sym,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    default_x: u8,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    default_y: u8,
}

impl PoseArgs {
    fn pose(&self) -> Result<Pose> {
        let n = self.precision;
        Ok(Pose {
            dx: parse_adic(&self.shift_x, n)?,
            dy: parse_adic(&self.shift_y, n)?,
            sym: self.sym,
            default_x: self.default_x,
            default_y: self.default_y,
        })
    }

    fn is_default(&self) -> bool {
        self.shift_x == "0"
            && self.shift_y == "0"
            && self.sym == Sym::E
            && self.default_x == 0
            && self.default_y == 0
    }
}

fn parse_adic(text: &str, precision: u32) -> Result<Adic> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let hex = if body.starts_with("0x") || body.starts_with("0X") {
        body.to_string()
    } else {
        format!("0x{body}")
    };
    let a =
        Adic::from_hex(&hex, precision).with_context(|| format!("bad 2-adic shift {text:?}"))?;
    Ok(if neg { -a } else { a })
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let v: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x0, y0, x1, y1] if x0 < x1 && y0 < y1 => Ok(Rect::new(x0, y0, x1, y1)),
        [_, _, _, _] => Err("rectangle must satisfy x0 < x1 and y0 < y1".into()),
        _ => Err("expected x0,y0,x1,y1".into()),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphabetArg {
    Base,
    Parity,
    Bracket,
}

impl From<AlphabetArg> for Alphabet {
    fn from(a: AlphabetArg) -> Alphabet {
        match a {
            AlphabetArg::Base => Alphabet::Base,
            AlphabetArg::Parity => Alphabet::Parity,
            AlphabetArg::Bracket => Alphabet::Bracket,
        }
    }
}

/// A patch named either by a file or by a pose and rectangle.
#[derive(Args)]
struct Source {
    /// Patch file; without it the patch is generated from the pose flags.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_parser = parse_rect, default_value = "-32,-32,32,32")]
    rect: Rect,
    #[arg(long, value_enum, default_value = "base")]
    alphabet: AlphabetArg,
    #[command(flatten)]
    pose: PoseArgs,
}

impl Source {
    fn patch(&self) -> Result<Patch> {
        match &self.input {
            Some(path) => read_patch(path),
            None => Ok(generate_in(
                &self.pose.pose()?,
                self.rect,
                self.alphabet.into(),
            )?),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_rect)]
    rect: Rect,
    #[arg(long, value_enum, default_value = "base")]
    alphabet: AlphabetArg,
    #[command(flatten)]
    pose: PoseArgs,
    /// Write the patch here instead of embedding it in the JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "ascii")]
    format: Format,
    #[arg(long, default_value_t = 12)]
    scale: u32,
    /// Output file; without it the drawing goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PaletteArgs {
    /// Half-side of the square window each pose is sampled on.
    #[arg(long, default_value_t = 256)]
    radius: i64,
    #[arg(long, value_enum, default_value = "base")]
    alphabet: AlphabetArg,
    /// Also sample reflected poses with every default pair, for axis crosses.
    #[arg(long)]
    all_poses: bool,
    /// Write the symmetrized palette (off-axis plus axis crosses) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    patch: PathBuf,
    /// Builtin palette (ce, ce-axis, parity) or palette file.
    #[arg(long, default_value = "ce-axis")]
    palette: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    None,
    Colors,
    Parity,
    Lemma2,
    Bars,
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Stop after this many boxes.
    #[arg(long)]
    max_count: Option<u64>,
    /// Stop after this many search nodes.
    #[arg(long)]
    budget: Option<u64>,
    /// Stop after this many seconds.
    #[arg(long)]
    seconds: Option<f64>,
    /// Stop after finishing this many shards (then resume from the checkpoint).
    #[arg(long)]
    max_shards: Option<usize>,
    /// Witnesses to print.
    #[arg(long, default_value_t = 4)]
    witnesses: usize,
    /// Print a JSON line per finished shard.
    #[arg(long)]
    progress: bool,
}

impl SearchArgs {
    fn config(&self, width: usize, height: usize) -> SearchConfig {
        SearchConfig {
            threads: self.threads,
            checkpoint: self.checkpoint.clone(),
            max_count: self.max_count,
            budget: self.budget,
            deadline: self.seconds.map(Duration::from_secs_f64),
            max_shards: self.max_shards,
            witness_limit: self.witnesses,
            ..SearchConfig::new(width, height)
        }
    }
}

#[derive(Args)]
struct EnumArgs {
    #[arg(long, default_value_t = 4)]
    width: usize,
    #[arg(long)]
    height: Option<usize>,
    /// Builtin palette (ce, ce-axis, parity) or palette file.
    #[arg(long, default_value = "ce")]
    palette: String,
    /// Property tested on every box.
    #[arg(long, value_enum, default_value = "none")]
    check: Check,
    /// Count one box per orbit of the box's symmetries.
    #[arg(long)]
    symmetry: bool,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    source: Source,
    /// Also list translations up to this length that preserve the patch.
    #[arg(long)]
    max_period: Option<i64>,
}

#[derive(Args)]
struct LevitskyArgs {
    /// Box side.
    #[arg(long, default_value_t = 10)]
    radius: usize,
    /// Also run the transposed search with a horizontal bar.
    #[arg(long)]
    both: bool,
    #[arg(long, default_value = "ce")]
    palette: String,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    source: Source,
    /// Patch file (same as --input).
    patch: Option<PathBuf>,
}

#[derive(Args)]
struct Remark1Args {
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 0)]
    i: i64,
    #[arg(long)]
    lo: Option<i64>,
    /// Window end; defaults to `lo + 2^(k+6)`.
    #[arg(long)]
    hi: Option<i64>,
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[command(flatten)]
    source: Source,
}

#[derive(Args)]
struct CorollaryArgs {
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

const EXIT_OK: u8 = 0;
const EXIT_VIOLATED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

struct Out {
    pretty: bool,
    timing: bool,
    lock: Mutex<()>,
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("elapsed_ms");
            map.values_mut().for_each(strip_timings);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

impl Out {
    fn emit(&self, v: &impl Serialize) {
        let mut v = serde_json::to_value(v).expect("serializable output");
        if !self.timing {
            strip_timings(&mut v);
        }
        let _guard = self.lock.lock().unwrap();
        let text = if self.pretty {
            serde_json::to_string_pretty(&v)
        } else {
            serde_json::to_string(&v)
        };
        println!("{}", text.expect("serializable output"));
    }
}

fn read_patch(path: &Path) -> Result<Patch> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Patch::from_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_palette(name: &str) -> Result<PlusPalette> {
    if let Ok(pp) = PlusPalette::builtin(name) {
        return Ok(pp);
    }
    let text = fs::read_to_string(name)
        .with_context(|| format!("{name:?} is neither a builtin palette nor a file"))?;
    Ok(PlusPalette::from_text(&text)?)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn search_exit(out: &SearchOutcome) -> u8 {
    if out.violations > 0 {
        EXIT_VIOLATED
    } else if !out.exhausted {
        EXIT_BUDGET
    } else {
        EXIT_OK
    }
}

fn verdict(holds: bool) -> u8 {
    if holds {
        EXIT_OK
    } else {
        EXIT_VIOLATED
    }
}

fn run(cli: Cli) -> Result<u8> {
    let out = Out {
        pretty: cli.pretty,
        timing: cli.timing,
        lock: Mutex::new(()),
    };
    let code = match cli.cmd {
        Cmd::Gen(a) => {
            let p = generate_in(&a.pose.pose()?, a.rect, a.alphabet.into())?;
            let mut v = json!({
                "cmd": "gen",
                "rect": a.rect,
                "alphabet": Alphabet::from(a.alphabet).to_string(),
                "edges": p.edge_count(),
            });
            match &a.out {
                Some(path) => {
                    write_file(path, &p.to_text())?;
                    v["out"] = json!(path);
                }
                None => v["patch"] = json!(p.to_text()),
            }
            out.emit(&v);
            EXIT_OK
        }
        Cmd::Render(a) => {
            let p = a.source.patch()?;
            let pose = (a.source.input.is_none() || !a.source.pose.is_default())
                .then(|| a.source.pose.pose())
                .transpose()?;
            let opts = RenderOptions {
                pose,
                scale: a.scale,
                ..RenderOptions::default()
            };
            let drawing = render(&p, a.format, &opts)?;
            match &a.out {
                Some(path) => {
                    write_file(path, &drawing)?;
                    out.emit(&json!({"cmd": "render", "out": path, "bytes": drawing.len()}));
                }
                None => print!("{drawing}"),
            }
            EXIT_OK
        }
        Cmd::Palette(a) => {
            let alphabet: Alphabet = a.alphabet.into();
            let poses: Vec<Pose> = if a.all_poses {
                Sym::ALL
                    .into_iter()
                    .flat_map(|s| {
                        (0..4u8).map(move |d| {
                            Pose {
                                default_x: d & 1,
                                default_y: d >> 1,
                                ..Pose::default()
                            }
                            .with_sym(s)
                        })
                    })
                    .collect()
            } else {
                vec![Pose::default()]
            };
            let ex = extract_plus_palette(&poses, a.radius, alphabet)?;
            let report = ex.report(a.radius, poses.len());
            if let Some(path) = &a.out {
                write_file(path, &ex.off_axis.union(&ex.axis).symmetrized().to_text())?;
            }
            out.emit(&json!({"cmd": "palette", "report": report, "out": a.out}));
            EXIT_OK
        }
        Cmd::Verify(a) => {
            let p = read_patch(&a.patch)?;
            let pp = load_palette(&a.palette)?;
            match verify(&p, &pp) {
                Ok(()) => {
                    out.emit(&json!({"cmd": "verify", "ok": true, "crosses": crosses(&p)}));
                    EXIT_OK
                }
                Err(v) => {
                    out.emit(&json!({"cmd": "verify", "ok": false, "violation": v}));
                    EXIT_VIOLATED
                }
            }
        }
        Cmd::Enum(a) => {
            let pp = load_palette(&a.palette)?;
            let mut cfg = a.search.config(a.width, a.height.unwrap_or(a.width));
            cfg.symmetry_reduction = a.symmetry;
            let sink = |p: Progress| out.emit(&json!({"progress": p}));
            let progress = a
                .search
                .progress
                .then_some(&sink as &(dyn Fn(Progress) + Sync));
            let res = match a.check {
                Check::None => enumerate_boxes(&pp, &cfg, None, progress),
                Check::Colors => check_no_skipped_colors(&pp, &cfg, progress),
                Check::Parity => check_parity_enforcement(&pp, &cfg, progress),
                Check::Lemma2 => check_lemma2(&pp, &cfg, progress),
                Check::Bars => check_no_bold_three_bar(&pp, &cfg, progress),
            }?;
            out.emit(
                &json!({"cmd": "enum", "width": cfg.width, "height": cfg.height, "outcome": res}),
            );
            search_exit(&res)
        }
        Cmd::Stats(a) => {
            let p = a.source.patch()?;
            let (_, cs) = classify_crosses(&p);
            let mut v =
                json!({"cmd": "stats", "rect": p.rect(), "bars": bar_histogram(&p), "crosses": cs});
            if let Some(m) = a.max_period {
                v["periods"] = json!(aperiodicity_check(&p, m));
            }
            out.emit(&v);
            EXIT_OK
        }
        Cmd::Torus => {
            let cert = torus_impossibility(&PlusPalette::builtin("ce")?);
            let holds = cert.search.solutions == 0 && cert.parity_matchings_z6 == 0;
            out.emit(
                &json!({"cmd": "torus", "solutions": cert.search.solutions, "certificate": cert}),
            );
            verdict(holds)
        }
        Cmd::Levitsky(a) => {
            if a.radius < 6 {
                bail!("levitsky needs --radius of at least 6");
            }
            let pp = load_palette(&a.palette)?;
            let cfg = a.search.config(a.radius, a.radius);
            let sink = |p: Progress| out.emit(&json!({"progress": p}));
            let progress = a
                .search
                .progress
                .then_some(&sink as &(dyn Fn(Progress) + Sync));
            let r = levitsky_check(&pp, &cfg, a.both, progress)?;
            out.emit(&json!({
                "cmd": "levitsky",
                "radius": a.radius,
                "exhausted": r.exhausted(),
                "violations": r.violations(),
                "report": r,
            }));
            if r.violations() > 0 {
                EXIT_VIOLATED
            } else if !r.exhausted() {
                EXIT_BUDGET
            } else {
                EXIT_OK
            }
        }
        Cmd::Decode(a) => {
            let p = match &a.patch {
                Some(path) => read_patch(path)?,
                None => a.source.patch()?,
            };
            match infer_pose(&p) {
                Ok(est) => {
                    out.emit(&json!({"cmd": "decode", "estimate": est}));
                    EXIT_OK
                }
                Err(e) => {
                    out.emit(&json!({"cmd": "decode", "error": e.to_string()}));
                    EXIT_VIOLATED
                }
            }
        }
        Cmd::Remark1(a) => {
            let lo = a.lo.unwrap_or(0);
            let hi = a.hi.unwrap_or(lo + (1i64 << (a.k + 6)));
            let r = remark1_report(a.k, a.i, lo, hi)?;
            let holds = r.holds();
            out.emit(&json!({"cmd": "remark1", "holds": holds, "report": r}));
            verdict(holds)
        }
        Cmd::Lemma(a) => {
            let p = a.source.patch()?;
            let tiled = is_k_tiled(&p, a.k);
            let r = check_lemma1(&p, a.k)?;
            let holds = r.holds() && tiled.tiled;
            out.emit(&json!({"cmd": "lemma", "holds": holds, "tiled": tiled, "lemma1": r}));
            verdict(holds)
        }
        Cmd::Corollary(a) => {
            if a.k > COROLLARY_MAX_K {
                bail!("--k must be at most {COROLLARY_MAX_K}");
            }
            let r = check_corollary(a.k, a.samples, a.seed);
            let holds = r.holds();
            out.emit(&json!({"cmd": "corollary", "holds": holds, "report": r}));
            verdict(holds)
        }
    };
    Ok(code)
}

fn crosses(p: &Patch) -> Value {
    let r = p.rect();
    json!(((r.width() - 1).max(0) * (r.height() - 1).max(0)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
