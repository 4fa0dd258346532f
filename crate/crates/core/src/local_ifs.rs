//! Local iterated function systems on pixel grids.
//!
//! A local IFS is a family of maps `f_i` each defined only on a subset `X_i`
//! of the space. Its set-valued operator is
//! `F(S) = ∪ f_i(S ∩ X_i)`; starting from the whole space the iterates form
//! a decreasing nested sequence whose limit is the local attractor. The
//! global (Hutchinson) operator drops the intersections.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{
    directed_hausdorff, hausdorff_distance_with, intersect_grid_set, map_grid_set_with, AffineMap1D, AffineMap2D,
    ConvexPolygon, GridSet, Point, Rect,
};
use crate::piecewise::PiecewisePoly;
use crate::rb::{RBSystem, SampledFunction};

/// Default iteration cap for attractor iteration.
pub const DEFAULT_MAX_ITER: usize = 256;

/// `w(x, y) = (u(x), λ(x) + S(x)·y)`: a map whose images of graphs are graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMap {
    pub u: AffineMap1D,
    pub lambda: PiecewisePoly,
    pub scale: PiecewisePoly,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlaneMap {
    Affine(AffineMap2D),
    Graph(GraphMap),
}

impl PlaneMap {
    pub fn apply(&self, p: Point) -> Point {
        match self {
            PlaneMap::Affine(m) => m.apply(p),
            PlaneMap::Graph(g) => [
                g.u.apply(p[0]),
                g.lambda.eval_clamped(p[0]) + g.scale.eval_clamped(p[0]) * p[1],
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalPiece {
    pub domain: Rect,
    pub map: PlaneMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalIFS {
    bounds: Rect,
    pieces: Vec<LocalPiece>,
}

impl LocalIFS {
    /// Local IFS of affine maps `f_i` on rectangles `X_i ⊆ bounds`.
    pub fn new(bounds: Rect, pieces: Vec<(Rect, AffineMap2D)>) -> Result<Self> {
        Self::from_pieces(
            bounds,
            pieces
                .into_iter()
                .map(|(domain, m)| LocalPiece {
                    domain,
                    map: PlaneMap::Affine(m),
                })
                .collect(),
        )
    }

    pub fn from_pieces(bounds: Rect, pieces: Vec<LocalPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidGeometry("a local IFS needs at least one piece".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !bounds.contains_rect(&p.domain) {
                return Err(Error::InvalidGeometry(format!(
                    "domain of piece {} leaves the bounds",
                    i + 1
                )));
            }
        }
        Ok(Self { bounds, pieces })
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn pieces(&self) -> &[LocalPiece] {
        &self.pieces
    }

    pub fn n(&self) -> usize {
        self.pieces.len()
    }

    /// The affine maps, or `None` when some piece is a graph map.
    pub fn affine_maps(&self) -> Option<Vec<AffineMap2D>> {
        self.pieces
            .iter()
            .map(|p| match &p.map {
                PlaneMap::Affine(m) => Some(*m),
                PlaneMap::Graph(_) => None,
            })
            .collect()
    }
}

/// `F(S) = ∪ f_i(S ∩ X_i)`. Empty intersections contribute nothing.
pub fn apply_local_operator(ifs: &LocalIFS, set: &GridSet) -> GridSet {
    apply_local_operator_with(ifs, set, Execution::default())
}

pub fn apply_local_operator_with(ifs: &LocalIFS, set: &GridSet, exec: Execution) -> GridSet {
    let mut out = empty_like(set);
    for piece in &ifs.pieces {
        let part = intersect_grid_set(set, &piece.domain);
        if part.is_empty() {
            continue;
        }
        out.union_with(&map_grid_set_with(&part, exec, |p| piece.map.apply(p)));
    }
    out
}

fn apply_global(maps: &[AffineMap2D], set: &GridSet, exec: Execution) -> GridSet {
    let mut out = empty_like(set);
    for m in maps {
        out.union_with(&map_grid_set_with(set, exec, |p| m.apply(p)));
    }
    out
}

fn empty_like(set: &GridSet) -> GridSet {
    GridSet::empty(set.bounds(), set.resolution()).expect("grid of an existing set is valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub cells: usize,
    /// Hausdorff distance to the previous iterate; `None` when either is empty.
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last_distance(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.distance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateOptions {
    pub max_iter: usize,
    /// Stopping threshold on the distance between iterates; `None` means one cell width.
    pub tol: Option<f64>,
    pub exec: Execution,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            tol: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attractor {
    pub set: GridSet,
    pub trace: ConvergenceTrace,
    pub became_empty: bool,
    /// Whether the stopping threshold was reached before `max_iter`.
    pub converged: bool,
}

fn iterate(k0: &GridSet, opts: &IterateOptions, step: impl Fn(&GridSet) -> GridSet) -> Attractor {
    let tol = opts.tol.unwrap_or(k0.resolution());
    let mut cur = k0.clone();
    let mut trace = ConvergenceTrace::default();
    for iteration in 1..=opts.max_iter {
        let next = step(&cur);
        if next.is_empty() {
            trace.records.push(TraceRecord {
                iteration,
                cells: 0,
                distance: None,
            });
            return Attractor {
                set: next,
                trace,
                became_empty: true,
                converged: true,
            };
        }
        let distance = if cur.is_empty() {
            None
        } else {
            Some(hausdorff_distance_with(&next, &cur, opts.exec).expect("nonempty sets on one grid"))
        };
        trace.records.push(TraceRecord {
            iteration,
            cells: next.len(),
            distance,
        });
        cur = next;
        if distance.is_some_and(|d| d <= tol) {
            return Attractor {
                set: cur,
                trace,
                became_empty: false,
                converged: true,
            };
        }
    }
    Attractor {
        set: cur,
        trace,
        became_empty: false,
        converged: false,
    }
}

/// Iterates `K_n = F(K_{n−1})` until consecutive iterates are within `tol`,
/// an iterate becomes empty, or `max_iter` is reached.
pub fn iterate_local_attractor(ifs: &LocalIFS, k0: &GridSet, opts: &IterateOptions) -> Attractor {
    iterate(k0, opts, |s| apply_local_operator_with(ifs, s, opts.exec))
}

/// Iterates the Hutchinson operator `S ↦ ∪ f_i(S)` of contractive affine maps.
pub fn iterate_global_attractor(maps: &[AffineMap2D], k0: &GridSet, opts: &IterateOptions) -> Result<Attractor> {
    if maps.is_empty() {
        return Err(Error::InvalidGeometry("global iteration needs at least one map".into()));
    }
    for (i, m) in maps.iter().enumerate() {
        let factor = m.contractivity();
        if factor >= 1.0 {
            return Err(Error::NotContractive { index: i + 1, factor });
        }
    }
    Ok(iterate(k0, opts, |s| apply_global(maps, s, opts.exec)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetCheck {
    pub local: Attractor,
    pub global: Attractor,
    /// Directed Hausdorff distance from the local to the global attractor (0 when the local one is empty).
    pub directed: f64,
    pub holds: bool,
}

/// Iterates the local and the global operator from the full grid and checks
/// that the local attractor lies within two cell widths of the global one.
///
/// Both operators are monotone, so both sequences are nested and reach a
/// fixed set after finitely many steps. They are iterated to that point
/// (`opts.tol` is ignored) so the two limits are comparable.
pub fn check_local_subset_global(ifs: &LocalIFS, h: f64, opts: &IterateOptions) -> Result<SubsetCheck> {
    let maps = ifs
        .affine_maps()
        .ok_or_else(|| Error::InvalidParameter("subset check needs affine maps".into()))?;
    let k0 = GridSet::full(ifs.bounds(), h)?;
    let exact = IterateOptions {
        tol: Some(0.0),
        ..*opts
    };
    let local = iterate_local_attractor(ifs, &k0, &exact);
    let global = iterate_global_attractor(&maps, &k0, &exact)?;
    let directed = if local.set.is_empty() {
        0.0
    } else if global.set.is_empty() {
        f64::INFINITY
    } else {
        directed_hausdorff(&local.set, &global.set)?
    };
    Ok(SubsetCheck {
        holds: directed <= 2.0 * h,
        local,
        global,
        directed,
    })
}

/// Finite code over the symbols `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeWord {
    symbols: Vec<usize>,
}

impl CodeWord {
    pub fn new(symbols: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(pos) = symbols.iter().position(|&s| s == 0 || s > n) {
            return Err(Error::InvalidCode(format!(
                "symbol {} at position {} outside 1..={n}",
                symbols[pos],
                pos + 1
            )));
        }
        Ok(Self { symbols })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// `Σ_n |σ_n − τ_n| / (N+1)^n` over the common length of two codes.
pub fn code_metric(sigma: &CodeWord, tau: &CodeWord, n: usize) -> Result<f64> {
    if sigma.len() != tau.len() {
        return Err(Error::InvalidCode(format!(
            "codes of different lengths {} and {}",
            sigma.len(),
            tau.len()
        )));
    }
    let base = (n + 1) as f64;
    let mut weight = 1.0;
    let mut sum = 0.0;
    for (a, b) in sigma.symbols.iter().zip(&tau.symbols) {
        weight /= base;
        sum += a.abs_diff(*b) as f64 * weight;
    }
    Ok(sum)
}

/// Center of `f_{σ1} ∘ … ∘ f_{σn}(X)`, each map applied to the part of the
/// running image inside its domain, with the bound `diam(X)·∏ c_{σk}` on the
/// diameter of that image.
pub fn code_point(ifs: &LocalIFS, code: &CodeWord) -> Result<(Point, f64)> {
    let maps = ifs
        .affine_maps()
        .ok_or_else(|| Error::InvalidParameter("code points need affine maps".into()))?;
    let bounds = ifs.bounds();
    let mut image = ConvexPolygon::from_rect(&bounds);
    let mut bound = bounds.diameter();
    for (pos, &sym) in code.symbols.iter().enumerate().rev() {
        if sym == 0 || sym > ifs.n() {
            return Err(Error::InvalidCode(format!("symbol {sym} outside 1..={}", ifs.n())));
        }
        let piece = &ifs.pieces[sym - 1];
        let clipped = image.clip(&piece.domain);
        if clipped.is_empty() {
            return Err(Error::CodeNotAdmissible { position: pos + 1 });
        }
        let m = &maps[sym - 1];
        image = clipped.transform(m);
        bound *= m.contractivity();
    }
    let center = image.center().expect("admissible image is nonempty");
    Ok((center, bound))
}

/// The local IFS `w_i(x, y) = (u_i(x), λ_i(x) + S_i(x)·y)` on `X_i × Y` whose
/// attractor is the graph of the fixed point of an RB operator.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphIfs {
    pub ifs: LocalIFS,
    /// Uniform Lipschitz bound in `x` of `λ_i(x) + S_i(x)·y` over `Y`.
    pub lipschitz: f64,
    /// Weight of the vertical term in `d_θ = |x − x′| + θ|y − y′|`.
    pub theta: f64,
    /// Contraction factor of every `w_i` in `d_θ`.
    pub q: f64,
    pub y_range: (f64, f64),
}

/// Builds the graph IFS of `sys`. The vertical extent is
/// `[min f − 1, max f + 1]` widened outward to multiples of `h`, so grid sets
/// of resolution `h` fit the bounds.
pub fn graph_ifs_from_rb(sys: &RBSystem, f: &SampledFunction, h: f64) -> Result<GraphIfs> {
    let part = sys.partition();
    let a = part.max_lipschitz();
    if a >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "graph IFS needs contractive u_i, largest Lipschitz constant is {a}"
        )));
    }
    let s = sys.contraction_factor();
    if s >= 1.0 {
        return Err(Error::OperatorNotContractive { s });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("resolution must be positive, got {h}")));
    }
    let (fmin, fmax) = f.min_max();
    let y0 = ((fmin - 1.0) / h).floor() * h;
    let y1 = ((fmax + 1.0) / h).ceil() * h;
    let base = part.base();
    let x0 = (base.lo / h).floor() * h;
    let x1 = (base.hi / h).ceil() * h;
    let bounds = Rect::new(x0, x1, y0, y1)?;
    let ymax = y0.abs().max(y1.abs());
    let mut lipschitz = 0.0_f64;
    let mut pieces = Vec::with_capacity(part.n());
    for i in 0..part.n() {
        let (lam, sc) = (&sys.lambda()[i], &sys.scale()[i]);
        lipschitz = lipschitz.max(lam.lipschitz_bound() + sc.lipschitz_bound() * ymax);
        let x = part.subsets()[i];
        pieces.push(LocalPiece {
            domain: Rect::new(x.lo, x.hi, y0, y1)?,
            map: PlaneMap::Graph(GraphMap {
                u: part.maps()[i],
                lambda: lam.clone(),
                scale: sc.clone(),
            }),
        });
    }
    let theta = if lipschitz == 0.0 {
        1.0
    } else {
        (1.0 - a) / (2.0 * lipschitz)
    };
    let q = (a + theta * lipschitz).max(s);
    Ok(GraphIfs {
        ifs: LocalIFS::from_pieces(bounds, pieces)?,
        lipschitz,
        theta,
        q,
        y_range: (y0, y1),
    })
}

/// Cells met by the polyline through the samples `(x_k, f(x_k))`.
///
/// Consecutive samples are joined so that a steep stretch of the graph does
/// not leave vertical gaps between sample cells.
pub fn graph_grid_set(f: &SampledFunction, bounds: Rect, h: f64) -> Result<GridSet> {
    let v = f.values();
    let mut points = vec![[f.x(0), v[0]]];
    for k in 0..f.m() {
        let (p, q) = ([f.x(k), v[k]], [f.x(k + 1), v[k + 1]]);
        let steps = ((q[0] - p[0]).abs().max((q[1] - p[1]).abs()) / (0.5 * h))
            .ceil()
            .max(1.0) as usize;
        for t in 1..=steps {
            let w = t as f64 / steps as f64;
            points.push([p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])]);
        }
    }
    GridSet::from_points(bounds, h, points)
}
