//! Intervals, affine maps, pixel sets and the Hausdorff metric.
//!
//! A [`GridSet`] is a finite set of square cells of side `h` tiling a
//! rectangle. A cell belongs to a set through its center point, and the
//! image of a set under a planar map is the set of cells containing the
//! mapped centers. All distances between grid sets are measured between
//! cell centers.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

pub type Point = [f64; 2];

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// A real interval with explicit endpoint closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    /// Closed interval `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    /// Half-open interval `[lo, hi)`.
    pub fn half_open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, false)
    }

    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidGeometry(format!(
                "interval needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Membership in the closure `[lo, hi]`.
    pub fn contains_closure(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

/// `x ↦ slope·x + intercept` with nonzero slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap1D {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineMap1D {
    pub fn new(slope: f64, intercept: f64) -> Result<Self> {
        if slope == 0.0 || !slope.is_finite() || !intercept.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "affine map needs finite nonzero slope, got {slope}"
            )));
        }
        Ok(Self { slope, intercept })
    }

    /// The increasing affine bijection taking `[src.lo, src.hi]` onto `[lo, hi]`.
    pub fn onto(src: &Interval, lo: f64, hi: f64) -> Result<Self> {
        let slope = (hi - lo) / src.length();
        Self::new(slope, lo - slope * src.lo)
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    pub fn inverse(&self, y: f64) -> f64 {
        (y - self.intercept) / self.slope
    }

    pub fn lipschitz(&self) -> f64 {
        self.slope.abs()
    }
}

/// Axis-aligned closed rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let finite = [x0, x1, y0, y1].iter().all(|v| v.is_finite());
        if !finite || x0 >= x1 || y0 >= y1 {
            return Err(Error::InvalidGeometry(format!(
                "rectangle needs x0 < x1 and y0 < y1, got [{x0}, {x1}]×[{y0}, {y1}]"
            )));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn unit() -> Self {
        Self {
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn center(&self) -> Point {
        [0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)]
    }

    pub fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            [self.x0, self.y0],
            [self.x1, self.y0],
            [self.x1, self.y1],
            [self.x0, self.y1],
        ]
    }
}

/// Planar affine map `p ↦ linear·p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap2D {
    /// Row-major 2×2 matrix.
    pub linear: [[f64; 2]; 2],
    pub translation: [f64; 2],
}

impl AffineMap2D {
    pub fn new(linear: [[f64; 2]; 2], translation: [f64; 2]) -> Self {
        Self { linear, translation }
    }

    pub fn identity() -> Self {
        Self::new([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
    }

    /// Uniform scaling by `s` about `center`.
    pub fn scaling_about(center: Point, s: f64) -> Self {
        Self::new([[s, 0.0], [0.0, s]], [(1.0 - s) * center[0], (1.0 - s) * center[1]])
    }

    /// Constant map onto `p`.
    pub fn constant(p: Point) -> Self {
        Self::new([[0.0, 0.0], [0.0, 0.0]], p)
    }

    pub fn apply(&self, p: Point) -> Point {
        let m = &self.linear;
        [
            m[0][0] * p[0] + m[0][1] * p[1] + self.translation[0],
            m[1][0] * p[0] + m[1][1] * p[1] + self.translation[1],
        ]
    }

    pub fn compose(&self, inner: &AffineMap2D) -> AffineMap2D {
        let a = &self.linear;
        let b = &inner.linear;
        let mut linear = [[0.0; 2]; 2];
        for (r, row) in linear.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        AffineMap2D::new(linear, self.apply(inner.translation))
    }

    /// Euclidean operator norm of the linear part (largest singular value).
    pub fn contractivity(&self) -> f64 {
        let [[a, b], [c, d]] = self.linear;
        // eigenvalues of MᵀM
        let p = a * a + c * c;
        let q = a * b + c * d;
        let r = b * b + d * d;
        let mean = 0.5 * (p + r);
        let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        (mean + disc).max(0.0).sqrt()
    }
}

/// Finite set of cells of a uniform square grid over `bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    bounds: Rect,
    h: f64,
    nx: usize,
    ny: usize,
    cells: Vec<bool>,
}

impl GridSet {
    /// Empty set on the grid of resolution `h` over `bounds`. The sides of
    /// `bounds` must be integer multiples of `h`.
    pub fn empty(bounds: Rect, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGeometry(format!("resolution must be positive, got {h}")));
        }
        let count = |len: f64| -> Result<usize> {
            let n = (len / h).round();
            if n < 1.0 || ((len / h) - n).abs() > 1e-9 * n.max(1.0) {
                return Err(Error::InvalidGeometry(format!(
                    "side {len} is not a multiple of resolution {h}"
                )));
            }
            Ok(n as usize)
        };
        let nx = count(bounds.x1 - bounds.x0)?;
        let ny = count(bounds.y1 - bounds.y0)?;
        Ok(Self {
            bounds,
            h,
            nx,
            ny,
            cells: vec![false; nx * ny],
        })
    }

    /// Every cell of the grid.
    pub fn full(bounds: Rect, h: f64) -> Result<Self> {
        let mut s = Self::empty(bounds, h)?;
        s.cells.iter_mut().for_each(|c| *c = true);
        Ok(s)
    }

    /// Set of the cells containing the given points; points outside the bounds are dropped.
    pub fn from_points<I: IntoIterator<Item = Point>>(bounds: Rect, h: f64, points: I) -> Result<Self> {
        let mut s = Self::empty(bounds, h)?;
        for p in points {
            if let Some((i, j)) = s.cell_of(p) {
                s.insert(i, j);
            }
        }
        Ok(s)
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn resolution(&self) -> f64 {
        self.h
    }

    /// Number of cell columns and rows.
    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn same_grid(&self, other: &GridSet) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.h == other.h && self.bounds == other.bounds
    }

    fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        assert!(i < self.nx && j < self.ny, "cell ({i}, {j}) outside grid");
        let k = self.index(i, j);
        self.cells[k] = true;
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.nx && j < self.ny && self.cells[self.index(i, j)]
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        [
            self.bounds.x0 + (i as f64 + 0.5) * self.h,
            self.bounds.y0 + (j as f64 + 0.5) * self.h,
        ]
    }

    /// Cell containing `p`, or `None` outside the bounds. Points on the
    /// upper edges belong to the last row/column.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        if !self.bounds.contains(p) {
            return None;
        }
        let i = (((p[0] - self.bounds.x0) / self.h).floor() as usize).min(self.nx - 1);
        let j = (((p[1] - self.bounds.y0) / self.h).floor() as usize).min(self.ny - 1);
        Some((i, j))
    }

    /// Member cells in row-major order (rows of increasing y).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nx = self.nx;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(k, _)| (k % nx, k / nx))
    }

    pub fn centers(&self) -> Vec<Point> {
        self.iter().map(|(i, j)| self.center(i, j)).collect()
    }

    pub fn is_subset(&self, other: &GridSet) -> bool {
        self.same_grid(other) && self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b)
    }

    pub fn union_with(&mut self, other: &GridSet) {
        assert!(self.same_grid(other), "union of sets on different grids");
        for (a, &b) in self.cells.iter_mut().zip(&other.cells) {
            *a |= b;
        }
    }

    /// Diagonal length of one cell.
    pub fn cell_diagonal(&self) -> f64 {
        self.h * std::f64::consts::SQRT_2
    }

    /// Largest distance between member centers (0 for fewer than two cells).
    pub fn diameter(&self) -> f64 {
        let c = self.centers();
        let mut best = 0.0_f64;
        for (k, a) in c.iter().enumerate() {
            for b in &c[k + 1..] {
                best = best.max(dist(*a, *b));
            }
        }
        best
    }

    fn member_indices(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(k, _)| k)
            .collect()
    }
}

/// Image of `set` under `map`, rasterized on the same grid and clipped to its bounds.
pub fn map_grid_set(m: &AffineMap2D, set: &GridSet) -> GridSet {
    map_grid_set_with(set, Execution::default(), |p| m.apply(p))
}

/// Image of `set` under an arbitrary point map.
pub fn map_grid_set_with<F>(set: &GridSet, exec: Execution, f: F) -> GridSet
where
    F: Fn(Point) -> Point + Sync + Send,
{
    let mut out = GridSet {
        cells: vec![false; set.cells.len()],
        ..set.clone()
    };
    let members = set.member_indices();
    let images = exec::map_range(exec, members.len(), |k| {
        let idx = members[k];
        let p = set.center(idx % set.nx, idx / set.nx);
        out.cell_of(f(p)).map(|(i, j)| j * set.nx + i)
    });
    for idx in images.into_iter().flatten() {
        out.cells[idx] = true;
    }
    out
}

/// Cells of `set` whose centers lie in the closed rectangle `r`. May be empty.
pub fn intersect_grid_set(set: &GridSet, r: &Rect) -> GridSet {
    let mut out = set.clone();
    for j in 0..set.ny {
        for i in 0..set.nx {
            let k = j * set.nx + i;
            if out.cells[k] && !r.contains(set.center(i, j)) {
                out.cells[k] = false;
            }
        }
    }
    out
}

fn check_pair(a: &GridSet, b: &GridSet) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if !a.same_grid(b) {
        return Err(Error::GridMismatch("sets must share resolution and bounds".into()));
    }
    Ok(())
}

/// Hausdorff distance between two nonempty grid sets on the same grid.
pub fn hausdorff_distance(a: &GridSet, b: &GridSet) -> Result<f64> {
    hausdorff_distance_with(a, b, Execution::default())
}

pub fn hausdorff_distance_with(a: &GridSet, b: &GridSet, exec: Execution) -> Result<f64> {
    check_pair(a, b)?;
    if a.cells == b.cells {
        return Ok(0.0);
    }
    Ok(directed_unchecked(a, b, exec).max(directed_unchecked(b, a, exec)))
}

/// `max_{a∈A} min_{b∈B} |a − b|` over cell centers.
pub fn directed_hausdorff(a: &GridSet, b: &GridSet) -> Result<f64> {
    check_pair(a, b)?;
    Ok(directed_unchecked(a, b, Execution::default()))
}

fn directed_unchecked(a: &GridSet, b: &GridSet, exec: Execution) -> f64 {
    let field = squared_distance_field(b, exec);
    let members = a.member_indices();
    let worst = exec::max_range(exec, members.len(), 0.0, |k| field[members[k]]);
    worst.sqrt() * a.h
}

/// Reference implementation by the double loop over cell centers.
pub fn hausdorff_distance_brute(a: &GridSet, b: &GridSet, exec: Execution) -> Result<f64> {
    check_pair(a, b)?;
    let ca = a.centers();
    let cb = b.centers();
    Ok(directed_points(&ca, &cb, exec).max(directed_points(&cb, &ca, exec)))
}

fn directed_points(from: &[Point], to: &[Point], exec: Execution) -> f64 {
    exec::max_range(exec, from.len(), 0.0, |k| {
        to.iter().map(|q| dist(from[k], *q)).fold(f64::INFINITY, f64::min)
    })
}

/// Hausdorff distance between the cell centers of `set` and a finite point set.
pub fn hausdorff_to_points(set: &GridSet, points: &[Point]) -> Result<f64> {
    if set.is_empty() || points.is_empty() {
        return Err(Error::EmptySet);
    }
    let c = set.centers();
    let exec = Execution::default();
    Ok(directed_points(&c, points, exec).max(directed_points(points, &c, exec)))
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

/// Hausdorff distance between the cell centers of `set` and the segment `[a, b]`.
///
/// The segment-to-set half is evaluated on samples spaced `h/16` apart and
/// padded by half that spacing, so the result is an upper bound within
/// `h/32` of the exact value.
pub fn hausdorff_to_segment(set: &GridSet, a: Point, b: Point) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let c = set.centers();
    let exec = Execution::default();
    let to_seg = exec::max_range(exec, c.len(), 0.0, |k| point_segment_distance(c[k], a, b));
    let step = set.h / 16.0;
    let n = (dist(a, b) / step).ceil().max(1.0) as usize;
    let samples: Vec<Point> = (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        })
        .collect();
    let pad = 0.5 * dist(a, b) / n as f64;
    let from_seg = directed_points(&samples, &c, exec) + pad;
    Ok(to_seg.max(from_seg))
}

/// Exact squared Euclidean distance (in cell units) from every cell to the
/// nearest member of `set`; separable lower-envelope transform.
fn squared_distance_field(set: &GridSet, exec: Execution) -> Vec<f64> {
    let (nx, ny) = (set.nx, set.ny);
    let inf = f64::INFINITY;
    // column pass, stored column-major
    let mut cols = vec![inf; nx * ny];
    exec::for_each_chunk(exec, &mut cols, ny, |i, col| {
        let mut last: Option<usize> = None;
        for (j, v) in col.iter_mut().enumerate() {
            if set.cells[j * nx + i] {
                last = Some(j);
            }
            if let Some(l) = last {
                *v = (j - l) as f64;
            }
        }
        last = None;
        for j in (0..ny).rev() {
            if set.cells[j * nx + i] {
                last = Some(j);
            }
            if let Some(l) = last {
                col[j] = col[j].min((l - j) as f64);
            }
        }
        for v in col.iter_mut() {
            *v *= *v;
        }
    });
    // row pass, row-major output
    let mut out = vec![inf; nx * ny];
    exec::for_each_chunk(exec, &mut out, nx, |j, row| {
        let g: Vec<f64> = (0..nx).map(|i| cols[i * ny + j]).collect();
        lower_envelope(&g, row);
    });
    out
}

/// `out[q] = min_p (q − p)² + g[p]`, skipping infinite sites.
fn lower_envelope(g: &[f64], out: &mut [f64]) {
    let n = g.len();
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut z: Vec<f64> = Vec::with_capacity(n + 1);
    for q in 0..n {
        if !g[q].is_finite() {
            continue;
        }
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.clear();
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let (qf, pf) = (q as f64, p as f64);
                    let s = ((g[q] + qf * qf) - (g[p] + pf * pf)) / (2.0 * (qf - pf));
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                        if v.is_empty() {
                            continue;
                        }
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    z.push(f64::INFINITY);
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let p = v[k];
        let d = qf - p as f64;
        *o = d * d + g[p];
    }
}

/// Convex polygon, used to track images of rectangles under compositions of
/// affine maps restricted to rectangular domains.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    pub vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn from_rect(r: &Rect) -> Self {
        Self {
            vertices: r.corners().to_vec(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn transform(&self, m: &AffineMap2D) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| m.apply(p)).collect(),
        }
    }

    /// Intersection with a closed rectangle (Sutherland–Hodgman).
    pub fn clip(&self, r: &Rect) -> Self {
        type Edge = (fn(Point, f64) -> f64, f64);
        let edges: [Edge; 4] = [
            (|p, c| p[0] - c, r.x0),
            (|p, c| c - p[0], r.x1),
            (|p, c| p[1] - c, r.y0),
            (|p, c| c - p[1], r.y1),
        ];
        let mut poly = self.vertices.clone();
        for (side, c) in edges {
            if poly.is_empty() {
                break;
            }
            let mut next = Vec::with_capacity(poly.len() + 2);
            for k in 0..poly.len() {
                let cur = poly[k];
                let prev = poly[(k + poly.len() - 1) % poly.len()];
                let (dc, dp) = (side(cur, c), side(prev, c));
                if dc >= 0.0 {
                    if dp < 0.0 {
                        next.push(lerp(prev, cur, dp / (dp - dc)));
                    }
                    next.push(cur);
                } else if dp >= 0.0 {
                    next.push(lerp(prev, cur, dp / (dp - dc)));
                }
            }
            poly = next;
        }
        Self { vertices: poly }
    }

    /// Center of the bounding box.
    pub fn center(&self) -> Option<Point> {
        let first = *self.vertices.first()?;
        let (mut lo, mut hi) = (first, first);
        for p in &self.vertices {
            lo = [lo[0].min(p[0]), lo[1].min(p[1])];
            hi = [hi[0].max(p[0]), hi[1].max(p[1])];
        }
        Some([0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])])
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut best = 0.0_f64;
        for (k, a) in v.iter().enumerate() {
            for b in &v[k + 1..] {
                best = best.max(dist(*a, *b));
            }
        }
        best
    }
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}
