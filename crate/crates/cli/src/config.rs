//! Job configuration: a line-oriented `key = value` format with sections.
//!
//! ```text
//! mode = solve
//! n = 2
//! [piece 1]
//! lambda = 0 0.5
//! S = 0.5
//! [piece 2]
//! lambda = 0.5 0.5
//! S = bspline(4, -0.3)
//! ```
//!
//! Top-level keys configure the job and the first system. `[second]` and
//! `[second piece i]` describe the second factor of a tensor job, `[ifs]` and
//! `[map i]` a planar local IFS. Polynomials are coefficient lists, low to
//! high, in powers of `x`. `#` starts a comment.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use fractalfn_core::analysis::NormKind;
use fractalfn_core::geometry::Interval;
use fractalfn_core::piecewise::PiecewisePoly;
use fractalfn_core::rb::PartitionSpec;
use thiserror::Error;

pub const DEFAULT_GRID: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_RESOLUTION: f64 = 1.0 / 512.0;

/// Parse or validation failure; line 0 refers to the file as a whole.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}", if *.line == 0 { format!("config: {}", .message) } else { format!("line {}: {}", .line, .message) })]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line,
        message: message.into(),
    })
}

macro_rules! named_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!(
                        "unknown {} `{s}` (expected one of: {})",
                        stringify!($name).to_lowercase(),
                        [$($text),+].join(", ")
                    )),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

named_enum!(Mode {
    Solve => "solve",
    Attract => "attract",
    GlobalAttract => "global-attract",
    Check => "check",
    Interp => "interp",
    Tensor => "tensor",
    GraphIfs => "graph-ifs",
});

named_enum!(Start {
    Zero => "zero",
    Random => "random",
    Data => "data",
});

named_enum!(PartitionKind {
    Binary => "binary",
    General => "general",
});

named_enum!(Builder {
    None => "none",
    AffineFif => "affine_fif",
    PropertyS => "property_s",
});

impl Mode {
    /// Modes that iterate the operator and so need `sup|S_i| < 1`.
    pub fn needs_contraction(self) -> bool {
        matches!(self, Mode::Solve | Mode::Interp | Mode::Tensor | Mode::GraphIfs)
    }

    fn needs_system(self) -> bool {
        !matches!(self, Mode::Attract | Mode::GlobalAttract)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleSpec {
    Poly(Vec<f64>),
    Bspline { order: usize, amplitude: f64 },
}

impl fmt::Display for ScaleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleSpec::Poly(c) => f.write_str(&join(c)),
            ScaleSpec::Bspline { order, amplitude } => write!(f, "bspline({order}, {amplitude})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PieceSpec {
    pub subset: Option<(f64, f64)>,
    pub lambda: Option<Vec<f64>>,
    pub scale: Option<ScaleSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub partition: PartitionKind,
    pub n: usize,
    pub builder: Builder,
    pub knots: Option<Vec<f64>>,
    pub data: Option<Vec<f64>>,
    pub midpoints: Option<Vec<f64>>,
    pub pieces: Vec<PieceSpec>,
}

impl SystemSpec {
    /// Number of data values the partition expects.
    pub fn data_len(&self) -> usize {
        match self.partition {
            PartitionKind::Binary => self.n / 2 + 1,
            PartitionKind::General => self.n + 1,
        }
    }

    pub fn partition_spec(&self) -> Result<PartitionSpec, fractalfn_core::Error> {
        match self.partition {
            PartitionKind::Binary => PartitionSpec::binary(self.n),
            PartitionKind::General => {
                let subsets = self
                    .pieces
                    .iter()
                    .map(|p| {
                        let (a, b) = p.subset.unwrap_or((f64::NAN, f64::NAN));
                        Interval::closed(a, b)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                PartitionSpec::general(self.knots.clone().unwrap_or_default(), subsets)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    /// `x0 x1 y0 y1`
    pub domain: [f64; 4],
    /// Row-major `a b c d`.
    pub linear: [f64; 4],
    pub translation: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct IfsSpec {
    pub bounds: [f64; 4],
    pub maps: Vec<MapSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub mode: Mode,
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub resolution: f64,
    pub seed: u64,
    pub start: Start,
    /// Contractivity conditions evaluated in `check` mode.
    pub checks: Vec<NormKind>,
    /// Norms of the fixed point estimated in `solve` and `interp` modes.
    pub norms: Vec<NormKind>,
    pub system: Option<SystemSpec>,
    pub second: Option<SystemSpec>,
    pub ifs: Option<IfsSpec>,
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn join_norms(v: &[NormKind]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

fn write_system(out: &mut String, sys: &SystemSpec, prefix: &str) {
    writeln!(out, "partition = {}", sys.partition).unwrap();
    writeln!(out, "n = {}", sys.n).unwrap();
    writeln!(out, "builder = {}", sys.builder).unwrap();
    for (key, v) in [
        ("knots", &sys.knots),
        ("data", &sys.data),
        ("midpoints", &sys.midpoints),
    ] {
        if let Some(v) = v {
            writeln!(out, "{key} = {}", join(v)).unwrap();
        }
    }
    for (i, p) in sys.pieces.iter().enumerate() {
        writeln!(out, "\n[{prefix}piece {}]", i + 1).unwrap();
        if let Some((a, b)) = p.subset {
            writeln!(out, "subset = {a} {b}").unwrap();
        }
        if let Some(l) = &p.lambda {
            writeln!(out, "lambda = {}", join(l)).unwrap();
        }
        if let Some(s) = &p.scale {
            writeln!(out, "S = {s}").unwrap();
        }
    }
}

/// Canonical text of `cfg`; `parse_config` reads it back to an equal value.
pub fn print_config(cfg: &JobConfig) -> String {
    let mut out = String::new();
    writeln!(out, "mode = {}", cfg.mode).unwrap();
    writeln!(out, "grid = {}", cfg.grid).unwrap();
    writeln!(out, "tol = {}", cfg.tol).unwrap();
    writeln!(out, "max_iter = {}", cfg.max_iter).unwrap();
    writeln!(out, "resolution = {}", cfg.resolution).unwrap();
    writeln!(out, "seed = {}", cfg.seed).unwrap();
    writeln!(out, "start = {}", cfg.start).unwrap();
    if !cfg.checks.is_empty() {
        writeln!(out, "checks = {}", join_norms(&cfg.checks)).unwrap();
    }
    if !cfg.norms.is_empty() {
        writeln!(out, "norms = {}", join_norms(&cfg.norms)).unwrap();
    }
    if let Some(sys) = &cfg.system {
        write_system(&mut out, sys, "");
    }
    if let Some(sys) = &cfg.second {
        out.push_str("\n[second]\n");
        write_system(&mut out, sys, "second ");
    }
    if let Some(ifs) = &cfg.ifs {
        out.push_str("\n[ifs]\n");
        writeln!(out, "bounds = {}", join(&ifs.bounds)).unwrap();
        for (i, m) in ifs.maps.iter().enumerate() {
            writeln!(out, "\n[map {}]", i + 1).unwrap();
            writeln!(out, "domain = {}", join(&m.domain)).unwrap();
            writeln!(out, "linear = {}", join(&m.linear)).unwrap();
            writeln!(out, "translation = {}", join(&m.translation)).unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Piece(usize),
    Second,
    SecondPiece(usize),
    Ifs,
    Map(usize),
}

/// Line numbers of a system's keys, kept for validation messages.
#[derive(Default)]
struct SystemDraft {
    line: usize,
    partition: Option<PartitionKind>,
    n: Option<(usize, usize)>,
    builder: Option<Builder>,
    knots: Option<(Vec<f64>, usize)>,
    data: Option<(Vec<f64>, usize)>,
    midpoints: Option<(Vec<f64>, usize)>,
    pieces: Vec<(usize, PieceDraft)>,
}

#[derive(Default)]
struct PieceDraft {
    subset: Option<((f64, f64), usize)>,
    lambda: Option<(Vec<f64>, usize)>,
    scale: Option<(ScaleSpec, usize)>,
}

#[derive(Default)]
struct MapDraft {
    domain: Option<[f64; 4]>,
    linear: Option<[f64; 4]>,
    translation: Option<[f64; 2]>,
}

fn reals(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    let v: Vec<f64> = value
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| ConfigError {
                line,
                message: format!("`{key}`: `{t}` is not a number"),
            })
        })
        .collect::<Result<_, _>>()?;
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return err(line, format!("`{key}`: value {bad} is not finite"));
    }
    if v.is_empty() {
        return err(line, format!("`{key}` needs at least one value"));
    }
    Ok(v)
}

fn fixed<const K: usize>(line: usize, key: &str, value: &str) -> Result<[f64; K], ConfigError> {
    let v = reals(line, key, value)?;
    v.as_slice()
        .try_into()
        .or_else(|_| err(line, format!("`{key}` takes {K} values, got {}", v.len())))
}

fn scalar<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    let mut parts = value.split_whitespace();
    match (parts.next(), parts.next()) {
        (Some(t), None) => t.parse().or_else(|_| err(line, format!("`{key}`: cannot read `{t}`"))),
        (None, _) => err(line, format!("`{key}` needs a value")),
        _ => err(
            line,
            format!("`{key}` takes 1 value, got {}", value.split_whitespace().count()),
        ),
    }
}

fn named<T: FromStr<Err = String>>(line: usize, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().or_else(|e| err(line, e))
}

fn norms(line: usize, value: &str) -> Result<Vec<NormKind>, ConfigError> {
    value
        .split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.parse::<NormKind>().or_else(|e| err(line, e.to_string())))
        .collect()
}

fn scale_spec(line: usize, value: &str) -> Result<ScaleSpec, ConfigError> {
    let t = value.trim();
    if let Some(rest) = t.strip_prefix("bspline") {
        let inner = rest
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| ConfigError {
                line,
                message: "expected `bspline(order, amplitude)`".into(),
            })?;
        let args: Vec<&str> = inner.split(',').map(str::trim).collect();
        let [order, amplitude] = args.as_slice() else {
            return err(line, format!("`bspline` takes 2 arguments, got {}", args.len()));
        };
        let order = order
            .parse()
            .or_else(|_| err(line, format!("B-spline order `{order}` is not an integer")))?;
        let amplitude: f64 = amplitude
            .parse()
            .or_else(|_| err(line, format!("B-spline amplitude `{amplitude}` is not a number")))?;
        if !amplitude.is_finite() {
            return err(line, "B-spline amplitude must be finite");
        }
        return Ok(ScaleSpec::Bspline { order, amplitude });
    }
    Ok(ScaleSpec::Poly(reals(line, "S", value)?))
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, key: &str) -> Result<(), ConfigError> {
    if slot.is_some() {
        return err(line, format!("`{key}` given twice"));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_header(line: usize, inner: &str) -> Result<Section, ConfigError> {
    let words: Vec<&str> = inner.split_whitespace().collect();
    let index = |t: &str| -> Result<usize, ConfigError> {
        match t.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i),
            _ => err(line, format!("section index `{t}` must be a positive integer")),
        }
    };
    match words.as_slice() {
        ["piece", i] => Ok(Section::Piece(index(i)?)),
        ["second"] => Ok(Section::Second),
        ["second", "piece", i] => Ok(Section::SecondPiece(index(i)?)),
        ["ifs"] => Ok(Section::Ifs),
        ["map", i] => Ok(Section::Map(index(i)?)),
        _ => err(line, format!("unknown section `[{inner}]`")),
    }
}

fn system_key(d: &mut SystemDraft, line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match key {
        "partition" => set_once(&mut d.partition, named(line, value)?, line, key)?,
        "n" => set_once(&mut d.n, (scalar(line, key, value)?, line), line, key)?,
        "builder" => set_once(&mut d.builder, named(line, value)?, line, key)?,
        "knots" => set_once(&mut d.knots, (reals(line, key, value)?, line), line, key)?,
        "data" => set_once(&mut d.data, (reals(line, key, value)?, line), line, key)?,
        "midpoints" => set_once(&mut d.midpoints, (reals(line, key, value)?, line), line, key)?,
        _ => return Ok(false),
    }
    if d.line == 0 {
        d.line = line;
    }
    Ok(true)
}

fn piece_key(p: &mut PieceDraft, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
    match key {
        "subset" => {
            let [a, b] = fixed::<2>(line, key, value)?;
            set_once(&mut p.subset, ((a, b), line), line, key)
        }
        "lambda" => set_once(&mut p.lambda, (reals(line, key, value)?, line), line, key),
        "S" => set_once(&mut p.scale, (scale_spec(line, value)?, line), line, key),
        _ => err(line, format!("unknown key `{key}` in a piece section")),
    }
}

fn piece_mut(d: &mut SystemDraft, index: usize, line: usize) -> Result<&mut PieceDraft, ConfigError> {
    if d.pieces.iter().any(|(i, _)| *i == index) {
        return err(line, format!("piece {index} defined twice"));
    }
    d.pieces.push((index, PieceDraft::default()));
    if d.line == 0 {
        d.line = line;
    }
    Ok(&mut d.pieces.last_mut().unwrap().1)
}

/// Parses and validates a job. `mode` fills in a missing `mode` key; when both
/// are present they must agree.
pub fn parse_config_with_mode(text: &str, mode: Option<Mode>) -> Result<JobConfig, ConfigError> {
    let mut mode_line = None;
    let mut file_mode: Option<Mode> = None;
    let mut grid = None;
    let mut tol = None;
    let mut max_iter = None;
    let mut resolution = None;
    let mut seed = None;
    let mut start = None;
    let mut checks = None;
    let mut norm_list = None;
    let mut first = SystemDraft::default();
    let mut second = SystemDraft::default();
    let mut second_seen = false;
    let mut ifs_bounds: Option<[f64; 4]> = None;
    let mut ifs_seen = false;
    let mut maps: Vec<(usize, usize, MapDraft)> = Vec::new();
    let mut section = Section::Top;
    let mut current_piece: Option<usize> = None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError {
                    line,
                    message: format!("malformed section header `{content}`"),
                })?
                .trim();
            section = parse_header(line, inner)?;
            current_piece = None;
            match section {
                Section::Piece(i) => {
                    piece_mut(&mut first, i, line)?;
                    current_piece = Some(first.pieces.len() - 1);
                }
                Section::SecondPiece(i) => {
                    if !second_seen {
                        return err(line, "`[second piece]` must follow `[second]`");
                    }
                    piece_mut(&mut second, i, line)?;
                    current_piece = Some(second.pieces.len() - 1);
                }
                Section::Second => {
                    if second_seen {
                        return err(line, "`[second]` given twice");
                    }
                    second_seen = true;
                    second.line = line;
                }
                Section::Ifs => {
                    if ifs_seen {
                        return err(line, "`[ifs]` given twice");
                    }
                    ifs_seen = true;
                }
                Section::Map(i) => {
                    if maps.iter().any(|(j, _, _)| *j == i) {
                        return err(line, format!("map {i} defined twice"));
                    }
                    maps.push((i, line, MapDraft::default()));
                }
                Section::Top => unreachable!(),
            }
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        match section {
            Section::Top => {
                if system_key(&mut first, line, key, value)? {
                    continue;
                }
                match key {
                    "mode" => {
                        set_once(&mut file_mode, named(line, value)?, line, key)?;
                        mode_line = Some(line);
                    }
                    "grid" => set_once(&mut grid, scalar(line, key, value)?, line, key)?,
                    "tol" => set_once(&mut tol, scalar::<f64>(line, key, value)?, line, key)?,
                    "max_iter" => set_once(&mut max_iter, scalar(line, key, value)?, line, key)?,
                    "resolution" => set_once(&mut resolution, scalar::<f64>(line, key, value)?, line, key)?,
                    "seed" => set_once(&mut seed, scalar(line, key, value)?, line, key)?,
                    "start" => set_once(&mut start, named(line, value)?, line, key)?,
                    "checks" => set_once(&mut checks, norms(line, value)?, line, key)?,
                    "norms" => set_once(&mut norm_list, norms(line, value)?, line, key)?,
                    _ => return err(line, format!("unknown key `{key}`")),
                }
            }
            Section::Second => {
                if !system_key(&mut second, line, key, value)? {
                    return err(line, format!("unknown key `{key}` in `[second]`"));
                }
            }
            Section::Piece(_) => piece_key(&mut first.pieces[current_piece.unwrap()].1, line, key, value)?,
            Section::SecondPiece(_) => piece_key(&mut second.pieces[current_piece.unwrap()].1, line, key, value)?,
            Section::Ifs => match key {
                "bounds" => set_once(&mut ifs_bounds, fixed::<4>(line, key, value)?, line, key)?,
                _ => return err(line, format!("unknown key `{key}` in `[ifs]`")),
            },
            Section::Map(_) => {
                let m = &mut maps.last_mut().unwrap().2;
                match key {
                    "domain" => set_once(&mut m.domain, fixed::<4>(line, key, value)?, line, key)?,
                    "linear" => set_once(&mut m.linear, fixed::<4>(line, key, value)?, line, key)?,
                    "translation" => set_once(&mut m.translation, fixed::<2>(line, key, value)?, line, key)?,
                    _ => return err(line, format!("unknown key `{key}` in a map section")),
                }
            }
        }
    }

    let mode = match (file_mode, mode) {
        (Some(a), Some(b)) if a != b => {
            return err(
                mode_line.unwrap(),
                format!("config mode `{a}` conflicts with requested mode `{b}`"),
            )
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return err(0, "no `mode` given"),
    };
    let grid = grid.unwrap_or(DEFAULT_GRID);
    if grid < 2 {
        return err(0, format!("grid must be at least 2, got {grid}"));
    }
    let tol = tol.unwrap_or(DEFAULT_TOL);
    let resolution = resolution.unwrap_or(DEFAULT_RESOLUTION);
    if !(tol >= 0.0) || !(resolution > 0.0) || !resolution.is_finite() {
        return err(0, "`tol` must be nonnegative and `resolution` positive");
    }

    let has_first = first.line != 0;
    let system = if has_first {
        Some(finish_system(first, mode, "")?)
    } else {
        None
    };
    let second = if second_seen {
        Some(finish_system(second, mode, "second ")?)
    } else {
        None
    };
    if mode.needs_system() && system.is_none() {
        return err(
            0,
            format!("mode `{mode}` needs a system (`n` and `[piece i]` sections)"),
        );
    }
    if mode == Mode::Tensor && second.is_none() {
        return err(0, "mode `tensor` needs a `[second]` system");
    }
    let ifs = if ifs_seen || !maps.is_empty() {
        maps.sort_by_key(|(i, _, _)| *i);
        let mut out = Vec::new();
        for (expect, (i, line, m)) in maps.into_iter().enumerate() {
            if i != expect + 1 {
                return err(
                    line,
                    format!("maps must be numbered 1, 2, …; missing map {}", expect + 1),
                );
            }
            let (Some(domain), Some(linear), Some(translation)) = (m.domain, m.linear, m.translation) else {
                return err(line, format!("map {i} needs `domain`, `linear` and `translation`"));
            };
            out.push(MapSpec {
                domain,
                linear,
                translation,
            });
        }
        Some(IfsSpec {
            bounds: ifs_bounds.unwrap_or([0.0, 1.0, 0.0, 1.0]),
            maps: out,
        })
    } else {
        None
    };
    if matches!(mode, Mode::Attract | Mode::GlobalAttract) && ifs.as_ref().is_none_or(|f| f.maps.is_empty()) {
        return err(0, format!("mode `{mode}` needs `[map i]` sections"));
    }

    Ok(JobConfig {
        mode,
        grid,
        tol,
        max_iter: max_iter.unwrap_or(DEFAULT_MAX_ITER),
        resolution,
        seed: seed.unwrap_or(0),
        start: start.unwrap_or(Start::Zero),
        checks: checks.unwrap_or_default(),
        norms: norm_list.unwrap_or_default(),
        system,
        second,
        ifs,
    })
}

pub fn parse_config(text: &str) -> Result<JobConfig, ConfigError> {
    parse_config_with_mode(text, None)
}

fn finish_system(d: SystemDraft, mode: Mode, prefix: &str) -> Result<SystemSpec, ConfigError> {
    let Some((n, n_line)) = d.n else {
        return err(d.line, format!("{prefix}system needs `n`"));
    };
    let partition = d.partition.unwrap_or(PartitionKind::Binary);
    let builder = d.builder.unwrap_or(Builder::None);
    if n == 0 {
        return err(n_line, "`n` must be positive");
    }
    if partition == PartitionKind::Binary && n % 2 != 0 {
        return err(n_line, format!("binary partition needs an even `n`, got {n}"));
    }
    let mut pieces = d.pieces;
    pieces.sort_by_key(|(i, _)| *i);
    if let Some((i, _)) = pieces.iter().find(|(i, _)| *i > n) {
        return err(n_line, format!("{prefix}piece {i} exceeds n = {n}"));
    }
    if pieces.len() != n {
        let missing = (1..=n).find(|k| !pieces.iter().any(|(i, _)| i == k)).unwrap();
        return err(n_line, format!("n = {n} but {prefix}piece {missing} is missing"));
    }
    match (partition, &d.knots) {
        (PartitionKind::General, None) => return err(n_line, "general partition needs `knots`"),
        (PartitionKind::General, Some((k, line))) if k.len() != n + 1 => {
            return err(
                *line,
                format!("`knots` takes n + 1 = {} values, got {}", n + 1, k.len()),
            )
        }
        (PartitionKind::Binary, Some((_, line))) => return err(*line, "`knots` is fixed by the binary partition"),
        _ => {}
    }
    let expected = if partition == PartitionKind::Binary {
        n / 2 + 1
    } else {
        n + 1
    };
    if let Some((v, line)) = &d.data {
        if v.len() != expected {
            return err(
                *line,
                format!("`data` takes {expected} values for this partition, got {}", v.len()),
            );
        }
    }
    if let Some((v, line)) = &d.midpoints {
        if builder != Builder::AffineFif {
            return err(*line, "`midpoints` only applies to `builder = affine_fif`");
        }
        if v.len() != n / 2 {
            return err(
                *line,
                format!("`midpoints` takes n/2 = {} values, got {}", n / 2, v.len()),
            );
        }
    }
    let data_needed = builder != Builder::None || mode == Mode::Interp;
    if data_needed && d.data.is_none() {
        return err(n_line, format!("{prefix}system needs `data` here"));
    }
    match (builder, partition) {
        (Builder::AffineFif, PartitionKind::General) => return err(n_line, "`affine_fif` needs a binary partition"),
        (Builder::PropertyS, PartitionKind::Binary) => return err(n_line, "`property_s` needs a general partition"),
        _ => {}
    }

    let binary = if partition == PartitionKind::Binary {
        Some(PartitionSpec::binary(n).map_err(|e| ConfigError {
            line: n_line,
            message: e.to_string(),
        })?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(n);
    for (i, p) in pieces {
        let label = format!("{prefix}piece {i}");
        let subset = match (partition, p.subset) {
            (PartitionKind::General, None) => return err(n_line, format!("{label} needs `subset`")),
            (PartitionKind::Binary, Some((_, line))) => return err(line, "`subset` is fixed by the binary partition"),
            (_, s) => s,
        };
        let domain = match (&binary, subset) {
            (Some(b), _) => b.subsets()[i - 1],
            (None, Some(((a, b), line))) => Interval::closed(a, b).map_err(|e| ConfigError {
                line,
                message: e.to_string(),
            })?,
            (None, None) => unreachable!(),
        };
        let Some((scale, s_line)) = p.scale else {
            return err(n_line, format!("{label} needs `S`"));
        };
        match (builder, &p.lambda) {
            (Builder::None, None) => return err(n_line, format!("{label} needs `lambda`")),
            (Builder::AffineFif | Builder::PropertyS, Some((_, line))) => {
                return err(*line, format!("`lambda` is built by `builder = {builder}`"))
            }
            _ => {}
        }
        if builder == Builder::AffineFif && !matches!(&scale, ScaleSpec::Poly(c) if c.len() == 1) {
            return err(s_line, "`affine_fif` takes a constant `S` per piece");
        }
        let sup = match &scale {
            ScaleSpec::Poly(c) => {
                PiecewisePoly::polynomial(domain, c.clone())
                    .map_err(|e| ConfigError {
                        line: s_line,
                        message: e.to_string(),
                    })?
                    .sup_norm_bracket()
                    .1
            }
            ScaleSpec::Bspline { order, amplitude } => {
                fractalfn_core::piecewise::bspline(*order, domain, *amplitude).map_err(|e| ConfigError {
                    line: s_line,
                    message: e.to_string(),
                })?;
                amplitude.abs()
            }
        };
        if mode.needs_contraction() && sup >= 1.0 {
            return err(
                s_line,
                format!("{label}: sup|S| = {sup} but mode `{mode}` needs sup|S| < 1"),
            );
        }
        out.push(PieceSpec {
            subset: subset.map(|(s, _)| s),
            lambda: p.lambda.map(|(l, _)| l),
            scale: Some(scale),
        });
    }
    Ok(SystemSpec {
        partition,
        n,
        builder,
        knots: d.knots.map(|(k, _)| k),
        data: d.data.map(|(k, _)| k),
        midpoints: d.midpoints.map(|(k, _)| k),
        pieces: out,
    })
}
