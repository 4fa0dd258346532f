//! Read–Bajraktarević operators on the real line and their fixed points.
//!
//! A system consists of a partition of the base interval into the images
//! `u_i(X_i)` of affine bijections, together with coefficient functions
//! `λ_i` and `S_i` on each `X_i`. The operator acts by
//!
//! ```text
//! (Φf)(x) = λ_i(u_i⁻¹(x)) + S_i(u_i⁻¹(x)) · f(u_i⁻¹(x)),   x ∈ u_i(X_i)
//! ```
//!
//! and is a contraction in the sup norm whenever `s = max_i ‖S_i‖_∞ < 1`.
//! Functions are represented by their values on a uniform grid; reads of
//! `f` between grid points use linear interpolation. For the binary
//! partition every `u_i⁻¹` maps the grid into itself, so reads are exact.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::{AffineMap1D, Interval};
use crate::piecewise::PiecewisePoly;

/// Residuals at or below this value count as satisfied join-up conditions.
pub const JOIN_UP_TOLERANCE: f64 = 1e-12;

/// Default number of grid intervals.
pub const DEFAULT_GRID: usize = 4096;

/// The subsets `X_i`, the knots `x_0 < … < x_N` and the maps `u_i: X_i → [x_{i−1}, x_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    base: Interval,
    knots: Vec<f64>,
    subsets: Vec<Interval>,
    maps: Vec<AffineMap1D>,
    binary: bool,
}

impl PartitionSpec {
    /// Binary partition of `[0, 1]` with an even number `n` of pieces:
    /// `X_{2j−1} = X_{2j} = [2(j−1)/n, 2j/n]` and `u_i(X_i) = [(i−1)/n, i/n]`.
    pub fn binary(n: usize) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidPartition(format!(
                "binary partition needs an even piece count >= 2, got {n}"
            )));
        }
        let nf = n as f64;
        let knots: Vec<f64> = (0..=n).map(|k| k as f64 / nf).collect();
        let mut subsets = Vec::with_capacity(n);
        let mut maps = Vec::with_capacity(n);
        for j in 1..=n / 2 {
            let x = Interval::closed(2.0 * (j - 1) as f64 / nf, 2.0 * j as f64 / nf)?;
            subsets.push(x);
            subsets.push(x);
            maps.push(AffineMap1D::new(0.5, (j - 1) as f64 / nf)?);
            maps.push(AffineMap1D::new(0.5, j as f64 / nf)?);
        }
        Ok(Self {
            base: Interval::closed(0.0, 1.0)?,
            knots,
            subsets,
            maps,
            binary: true,
        })
    }

    /// Partition with arbitrary subsets `X_i = [a_i, b_i]` of the base
    /// interval `[x_0, x_N]`, each mapped increasingly onto `[x_{i−1}, x_i]`.
    pub fn general(knots: Vec<f64>, subsets: Vec<Interval>) -> Result<Self> {
        if knots.len() < 2 || subsets.len() + 1 != knots.len() {
            return Err(Error::InvalidPartition(format!(
                "{} knots for {} subsets",
                knots.len(),
                subsets.len()
            )));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition("knots must be strictly ascending".into()));
        }
        let base = Interval::closed(knots[0], *knots.last().unwrap())?;
        let mut maps = Vec::with_capacity(subsets.len());
        for (i, x) in subsets.iter().enumerate() {
            if x.lo < base.lo || x.hi > base.hi {
                return Err(Error::InvalidPartition(format!(
                    "subset {} = [{}, {}] leaves the base interval",
                    i + 1,
                    x.lo,
                    x.hi
                )));
            }
            maps.push(AffineMap1D::onto(x, knots[i], knots[i + 1])?);
        }
        Ok(Self {
            base,
            knots,
            subsets,
            maps,
            binary: false,
        })
    }

    pub fn n(&self) -> usize {
        self.subsets.len()
    }

    pub fn base(&self) -> Interval {
        self.base
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn subsets(&self) -> &[Interval] {
        &self.subsets
    }

    pub fn maps(&self) -> &[AffineMap1D] {
        &self.maps
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    /// Lipschitz constant `a_i` of `u_i`.
    pub fn lipschitz(&self, i: usize) -> f64 {
        self.maps[i].lipschitz()
    }

    pub fn max_lipschitz(&self) -> f64 {
        self.maps.iter().map(|m| m.lipschitz()).fold(0.0, f64::max)
    }

    /// Image `u_i(X_i)`: half-open `[x_{i−1}, x_i)` except the last, which is closed.
    pub fn image(&self, i: usize) -> Interval {
        let last = i + 1 == self.n();
        Interval {
            lo: self.knots[i],
            hi: self.knots[i + 1],
            lo_closed: true,
            hi_closed: last,
        }
    }

    /// Index of the piece whose image contains `x` (interior knots go right).
    pub fn piece_of(&self, x: f64) -> usize {
        let k = self.knots.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(self.n() - 1)
    }

    /// `u_i⁻¹(x)` clamped into `X_i`.
    pub fn preimage(&self, i: usize, x: f64) -> f64 {
        self.subsets[i].clamp(self.maps[i].inverse(x))
    }
}

/// Partition together with the coefficient tuples `λ` and `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct RBSystem {
    partition: PartitionSpec,
    lambda: Vec<PiecewisePoly>,
    scale: Vec<PiecewisePoly>,
    s: f64,
    property_s: bool,
}

fn same_domain(a: &Interval, b: &Interval) -> bool {
    a.lo == b.lo && a.hi == b.hi
}

impl RBSystem {
    pub fn new(partition: PartitionSpec, lambda: Vec<PiecewisePoly>, scale: Vec<PiecewisePoly>) -> Result<Self> {
        let n = partition.n();
        if lambda.len() != n || scale.len() != n {
            return Err(Error::InvalidPartition(format!(
                "{n} pieces but {} λ and {} S functions",
                lambda.len(),
                scale.len()
            )));
        }
        for (i, x) in partition.subsets().iter().enumerate() {
            if !same_domain(&lambda[i].domain(), x) || !same_domain(&scale[i].domain(), x) {
                return Err(Error::InvalidPartition(format!(
                    "λ_{0} and S_{0} must be defined on X_{0} = [{1}, {2}]",
                    i + 1,
                    x.lo,
                    x.hi
                )));
            }
        }
        let s = scale.iter().map(|f| f.sup_norm_bracket().1).fold(0.0, f64::max);
        Ok(Self {
            partition,
            lambda,
            scale,
            s,
            property_s: false,
        })
    }

    /// Same partition and scalings with new `λ`.
    pub fn with_lambda(&self, lambda: Vec<PiecewisePoly>) -> Result<Self> {
        let mut sys = Self::new(self.partition.clone(), lambda, self.scale.clone())?;
        sys.property_s = self.property_s;
        Ok(sys)
    }

    pub fn partition(&self) -> &PartitionSpec {
        &self.partition
    }

    pub fn lambda(&self) -> &[PiecewisePoly] {
        &self.lambda
    }

    pub fn scale(&self) -> &[PiecewisePoly] {
        &self.scale
    }

    /// Certified upper bound of `max_i ‖S_i‖_∞`.
    pub fn contraction_factor(&self) -> f64 {
        self.s
    }

    /// Certified upper bound of `max_i ‖λ_i‖_∞`.
    pub fn lambda_sup(&self) -> f64 {
        self.lambda.iter().map(|f| f.sup_norm_bracket().1).fold(0.0, f64::max)
    }

    /// Whether the system was assembled by [`build_property_s_system`].
    pub fn property_s_verified(&self) -> bool {
        self.property_s
    }

    /// `v_i(x, y) = λ_i(x) + S_i(x)·y` with `x` clamped into `X_i`.
    pub fn v(&self, i: usize, x: f64, y: f64) -> f64 {
        self.lambda[i].eval_clamped(x) + self.scale[i].eval_clamped(x) * y
    }
}

/// Values of a real function on `M + 1` uniform points of `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || !(lo < hi) {
            return Err(Error::InvalidData(
                "sampled function needs lo < hi and at least two values".into(),
            ));
        }
        Ok(Self { lo, hi, values })
    }

    pub fn zeros(base: Interval, m: usize) -> Result<Self> {
        Self::new(base.lo, base.hi, vec![0.0; m + 1])
    }

    pub fn from_fn(base: Interval, m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = Self::zeros(base, m)?;
        for k in 0..=m {
            out.values[k] = f(out.x(k));
        }
        Ok(out)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Number of grid intervals.
    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.m() as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        if k == self.m() {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / self.m() as f64
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_grid(&self, other: &SampledFunction) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.values.len() == other.values.len()
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let m = self.m();
        let pos = ((x - self.lo) / (self.hi - self.lo) * m as f64).clamp(0.0, m as f64);
        let mut j = pos.floor() as usize;
        let mut w = pos - j as f64;
        if w < 1e-9 {
            w = 0.0;
        } else if w > 1.0 - 1e-9 {
            j += 1;
            w = 0.0;
        }
        if j >= m {
            (m, 0.0)
        } else {
            (j, w)
        }
    }

    /// Linear interpolation of the samples, clamped to `[lo, hi]`.
    pub fn value_at(&self, x: f64) -> f64 {
        let (j, w) = self.locate(x);
        read(&self.values, j, w)
    }

    pub fn sup_distance(&self, other: &SampledFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

fn read(values: &[f64], j: usize, w: f64) -> f64 {
    if w == 0.0 {
        values[j]
    } else {
        (1.0 - w) * values[j] + w * values[j + 1]
    }
}

/// Precomputed coefficients of `Φ` on one grid.
#[derive(Debug, Clone)]
pub struct RbPlan {
    lo: f64,
    hi: f64,
    lam: Vec<f64>,
    sc: Vec<f64>,
    src: Vec<(usize, f64)>,
}

impl RbPlan {
    pub fn new(sys: &RBSystem, grid: &SampledFunction, exec: Execution) -> Self {
        let part = sys.partition();
        let entries = exec::map_range(exec, grid.values.len(), |k| {
            let x = grid.x(k);
            let i = part.piece_of(x);
            let y = part.preimage(i, x);
            (
                sys.lambda[i].eval_clamped(y),
                sys.scale[i].eval_clamped(y),
                grid.locate(y),
            )
        });
        let mut plan = RbPlan {
            lo: grid.lo,
            hi: grid.hi,
            lam: Vec::with_capacity(entries.len()),
            sc: Vec::with_capacity(entries.len()),
            src: Vec::with_capacity(entries.len()),
        };
        for (l, s, src) in entries {
            plan.lam.push(l);
            plan.sc.push(s);
            plan.src.push(src);
        }
        plan
    }

    pub fn apply_into(&self, f: &[f64], out: &mut [f64], exec: Execution) {
        assert_eq!(f.len(), self.lam.len());
        exec::fill(exec, out, |k| {
            let (j, w) = self.src[k];
            self.lam[k] + self.sc[k] * read(f, j, w)
        });
    }

    pub fn apply(&self, f: &SampledFunction, exec: Execution) -> SampledFunction {
        assert!(f.lo == self.lo && f.hi == self.hi, "plan built for another grid");
        let mut out = vec![0.0; f.values.len()];
        self.apply_into(&f.values, &mut out, exec);
        SampledFunction {
            lo: f.lo,
            hi: f.hi,
            values: out,
        }
    }
}

/// One application of `Φ` on the grid of `f`.
pub fn apply_rb(sys: &RBSystem, f: &SampledFunction) -> SampledFunction {
    apply_rb_with(sys, f, Execution::default())
}

pub fn apply_rb_with(sys: &RBSystem, f: &SampledFunction, exec: Execution) -> SampledFunction {
    RbPlan::new(sys, f, exec).apply(f, exec)
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Iterate even when `s ≥ 1`.
    pub force: bool,
    pub exec: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            force: false,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub function: SampledFunction,
    /// `sup|f_k − f_{k−1}|` for `k = 1, 2, …`.
    pub residuals: Vec<f64>,
}

impl FixedPoint {
    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }
}

/// Iteration count sufficient for a contraction with factor `s` and first residual `r1`.
pub fn iteration_bound(s: f64, r1: f64, tol: f64) -> usize {
    if r1 <= tol {
        return 1;
    }
    if s <= 0.0 {
        return 2;
    }
    ((tol / r1).ln() / s.ln()).ceil() as usize + 1
}

/// Banach iteration `f_k = Φ f_{k−1}` until `sup|f_k − f_{k−1}| ≤ tol`.
pub fn solve_fixed_point(sys: &RBSystem, f0: &SampledFunction, opts: &SolveOptions) -> Result<FixedPoint> {
    let s = sys.contraction_factor();
    if s >= 1.0 && !opts.force {
        return Err(Error::OperatorNotContractive { s });
    }
    let plan = RbPlan::new(sys, f0, opts.exec);
    let mut cur = f0.values.clone();
    let mut next = vec![0.0; cur.len()];
    let mut residuals = Vec::new();
    for _ in 0..opts.max_iter {
        plan.apply_into(&cur, &mut next, opts.exec);
        let r = cur.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut cur, &mut next);
        residuals.push(r);
        if r <= opts.tol {
            return Ok(FixedPoint {
                function: SampledFunction {
                    lo: f0.lo,
                    hi: f0.hi,
                    values: cur,
                },
                residuals,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: residuals.len(),
        last: residuals.last().copied().unwrap_or(f64::NAN),
        residuals,
    })
}

/// Unrolls `f(x) = λ_i(y) + S_i(y)·f(y)`, `y = u_i⁻¹(x)`, `depth` levels deep
/// from the base value 0. Returns the value and the bound `s^depth · ‖λ‖/(1−s)`
/// on its distance to the fixed point.
pub fn eval_recursive(sys: &RBSystem, x: f64, depth: usize) -> Result<(f64, f64)> {
    let s = sys.contraction_factor();
    if s >= 1.0 {
        return Err(Error::OperatorNotContractive { s });
    }
    let part = sys.partition();
    let base = part.base();
    if !base.contains_closure(x) {
        return Err(Error::OutOfDomain {
            x,
            lo: base.lo,
            hi: base.hi,
        });
    }
    let mut x = x;
    let mut value = 0.0;
    let mut weight = 1.0;
    for _ in 0..depth {
        let i = part.piece_of(x);
        let y = part.preimage(i, x);
        value += weight * sys.lambda[i].eval_clamped(y);
        weight *= sys.scale[i].eval_clamped(y);
        if weight == 0.0 {
            break;
        }
        x = y;
    }
    let bound = sys.lambda_sup() / (1.0 - s);
    Ok((value, s.powi(depth as i32) * bound))
}

/// Interpolation sites with one value vector `(y, y′, …, y^{(n)})` per site.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationData {
    sites: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl InterpolationData {
    pub fn new(sites: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if sites.is_empty() || sites.len() != values.len() {
            return Err(Error::InvalidData("one value vector per site required".into()));
        }
        let width = values[0].len();
        if width == 0 || values.iter().any(|v| v.len() != width) {
            return Err(Error::InvalidData("value vectors must share a nonzero length".into()));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidData("sites must be strictly ascending".into()));
        }
        Ok(Self { sites, values })
    }

    /// Plain values at the given sites.
    pub fn from_values(sites: Vec<f64>, ys: &[f64]) -> Result<Self> {
        Self::new(sites, ys.iter().map(|&y| vec![y]).collect())
    }

    /// Values at the even knots `x_{2j} = 2j/N` of the binary partition with `N = 2(len − 1)`.
    pub fn binary(ys: &[f64]) -> Result<Self> {
        Self::binary_with_derivatives(ys.iter().map(|&y| vec![y]).collect())
    }

    /// Derivative vectors at the even knots of the binary partition.
    pub fn binary_with_derivatives(values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidData("binary data needs at least two sites".into()));
        }
        let half = (values.len() - 1) as f64;
        let sites = (0..values.len()).map(|j| j as f64 / half).collect();
        Self::new(sites, values)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    /// Highest derivative order carried.
    pub fn order(&self) -> usize {
        self.values[0].len() - 1
    }

    pub fn y(&self, j: usize) -> f64 {
        self.values[j][0]
    }

    pub fn derivative(&self, j: usize, k: usize) -> f64 {
        self.values[j][k]
    }

    pub fn ys(&self) -> Vec<f64> {
        self.values.iter().map(|v| v[0]).collect()
    }

    /// Piecewise-affine interpolant of the data sampled on `M + 1` points of `base`.
    pub fn piecewise_affine(&self, base: Interval, m: usize) -> Result<SampledFunction> {
        let ys = self.ys();
        SampledFunction::from_fn(base, m, |x| {
            let k = self.sites.partition_point(|&s| s <= x);
            if k == 0 {
                ys[0]
            } else if k >= self.sites.len() {
                ys[ys.len() - 1]
            } else {
                let (x0, x1) = (self.sites[k - 1], self.sites[k]);
                ys[k - 1] + (ys[k] - ys[k - 1]) * (x - x0) / (x1 - x0)
            }
        })
    }
}

/// Named residuals of a family of join-up equations.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinUpReport {
    pub residuals: Vec<(String, f64)>,
    pub max_residual: f64,
    pub pass: bool,
}

impl JoinUpReport {
    fn from_residuals(residuals: Vec<(String, f64)>) -> Self {
        let max_residual = residuals.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
        Self {
            residuals,
            max_residual,
            pass: max_residual <= JOIN_UP_TOLERANCE,
        }
    }
}

fn require_binary_data(sys: &RBSystem, data: &InterpolationData) -> Result<()> {
    let part = sys.partition();
    if !part.is_binary() {
        return Err(Error::InvalidPartition(
            "join-up conditions need a binary partition".into(),
        ));
    }
    if data.len() != part.n() / 2 + 1 {
        return Err(Error::InvalidData(format!(
            "binary partition with N = {} needs {} sites, got {}",
            part.n(),
            part.n() / 2 + 1,
            data.len()
        )));
    }
    for (j, &x) in data.sites().iter().enumerate() {
        if (x - part.knots()[2 * j]).abs() > 1e-12 {
            return Err(Error::InvalidData(format!(
                "site {j} = {x} is not the knot x_{}",
                2 * j
            )));
        }
    }
    Ok(())
}

/// Endpoint and join-up residuals for the binary partition.
pub fn check_property_j(sys: &RBSystem, data: &InterpolationData) -> Result<JoinUpReport> {
    require_binary_data(sys, data)?;
    let knots = sys.partition().knots();
    let (lam, sc) = (sys.lambda(), sys.scale());
    let mut out = Vec::new();
    for j in 1..=sys.partition().n() / 2 {
        let (odd, even) = (2 * j - 2, 2 * j - 1);
        let (a, b) = (knots[2 * (j - 1)], knots[2 * j]);
        let (y0, y1) = (data.y(j - 1), data.y(j));
        let left = lam[odd].eval_clamped(a) + (sc[odd].eval_clamped(a) - 1.0) * y0;
        let right = lam[even].eval_clamped(b) + (sc[even].eval_clamped(b) - 1.0) * y1;
        let join = lam[even].eval_clamped(a) + sc[even].eval_clamped(a) * y0
            - lam[odd].eval_clamped(b)
            - sc[odd].eval_clamped(b) * y1;
        out.push((format!("endpoint j={j} left"), left));
        out.push((format!("endpoint j={j} right"), right));
        out.push((format!("join-up j={j}"), join));
    }
    Ok(JoinUpReport::from_residuals(out))
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Smoothness tolerance for derivative jumps inside a piece.
const SMOOTHNESS_TOLERANCE: f64 = 1e-9;

/// `C^n` endpoint and join-up residuals via the Leibniz expansion
/// `D^k(Φf) = 2^k (D^kλ_i + Σ_l C(k,l) D^{k−l}f · D^l S_i)` on the binary partition.
pub fn check_cn_conditions(sys: &RBSystem, data: &InterpolationData, n: usize) -> Result<JoinUpReport> {
    require_binary_data(sys, data)?;
    if data.order() < n {
        return Err(Error::InvalidData(format!(
            "C^{n} conditions need derivative data up to order {n}, got {}",
            data.order()
        )));
    }
    for (i, (l, s)) in sys.lambda().iter().zip(sys.scale()).enumerate() {
        let jump = l.max_jump(n).max(s.max_jump(n));
        if jump > SMOOTHNESS_TOLERANCE {
            return Err(Error::InsufficientSmoothness(format!(
                "λ_{0} or S_{0} is not C^{n} (jump {jump:e})",
                i + 1
            )));
        }
    }
    let knots = sys.partition().knots();
    let dl: Vec<Vec<PiecewisePoly>> = sys
        .lambda()
        .iter()
        .map(|f| (0..=n).map(|k| f.derivative(k)).collect())
        .collect();
    let ds: Vec<Vec<PiecewisePoly>> = sys
        .scale()
        .iter()
        .map(|f| (0..=n).map(|k| f.derivative(k)).collect())
        .collect();
    // D^k(Φf) at the image of x, computed from piece i with f-derivatives taken from site j
    let dk = |i: usize, x: f64, site: usize, k: usize| -> f64 {
        let mut acc = dl[i][k].eval_clamped(x);
        for (l, d) in ds[i][..=k].iter().enumerate() {
            acc += binom(k, l) * data.derivative(site, k - l) * d.eval_clamped(x);
        }
        2f64.powi(k as i32) * acc
    };
    let mut out = Vec::new();
    for k in 0..=n {
        for j in 1..=sys.partition().n() / 2 {
            let (odd, even) = (2 * j - 2, 2 * j - 1);
            let (a, b) = (knots[2 * (j - 1)], knots[2 * j]);
            out.push((
                format!("k={k} endpoint j={j} left"),
                dk(odd, a, j - 1, k) - data.derivative(j - 1, k),
            ));
            out.push((
                format!("k={k} endpoint j={j} right"),
                dk(even, b, j, k) - data.derivative(j, k),
            ));
            out.push((format!("k={k} join-up j={j}"), dk(odd, b, j, k) - dk(even, a, j - 1, k)));
        }
    }
    Ok(JoinUpReport::from_residuals(out))
}

/// Continuous fractal interpolant on the binary partition with constant
/// scalings `s_i` and affine `λ_i`. The value at each odd knot `x_{2j−1}` is
/// the free parameter `midpoints[j−1]`, defaulting to `(y_{j−1} + y_j)/2`.
pub fn build_affine_fif(data: &InterpolationData, s_values: &[f64], midpoints: Option<&[f64]>) -> Result<RBSystem> {
    if data.len() < 2 {
        return Err(Error::InvalidData("need at least two interpolation sites".into()));
    }
    let n = 2 * (data.len() - 1);
    if s_values.len() != n {
        return Err(Error::InvalidData(format!(
            "{n} scaling factors required, got {}",
            s_values.len()
        )));
    }
    if let Some((piece, &value)) = s_values.iter().enumerate().find(|(_, s)| !(s.abs() < 1.0)) {
        return Err(Error::ScalingTooLarge {
            piece: piece + 1,
            value,
        });
    }
    let part = PartitionSpec::binary(n)?;
    let binary_data = InterpolationData::binary(&data.ys())?;
    require_binary_data_sites(&part, data)?;
    let mids: Vec<f64> = match midpoints {
        Some(m) if m.len() != n / 2 => {
            return Err(Error::InvalidData(format!(
                "{} midpoint values required, got {}",
                n / 2,
                m.len()
            )))
        }
        Some(m) => m.to_vec(),
        None => (1..=n / 2)
            .map(|j| 0.5 * (binary_data.y(j - 1) + binary_data.y(j)))
            .collect(),
    };
    let mut lambda = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    for j in 1..=n / 2 {
        let x = part.subsets()[2 * j - 2];
        let (y0, y1, m) = (data.y(j - 1), data.y(j), mids[j - 1]);
        let (so, se) = (s_values[2 * j - 2], s_values[2 * j - 1]);
        lambda.push(PiecewisePoly::affine(x, (1.0 - so) * y0, m - so * y1)?);
        lambda.push(PiecewisePoly::affine(x, m - se * y0, (1.0 - se) * y1)?);
        scale.push(PiecewisePoly::constant(x, so)?);
        scale.push(PiecewisePoly::constant(x, se)?);
    }
    RBSystem::new(part, lambda, scale)
}

fn require_binary_data_sites(part: &PartitionSpec, data: &InterpolationData) -> Result<()> {
    for (j, &x) in data.sites().iter().enumerate() {
        if (x - part.knots()[2 * j]).abs() > 1e-12 {
            return Err(Error::InvalidData(format!(
                "site {j} = {x} is not the knot x_{}",
                2 * j
            )));
        }
    }
    Ok(())
}

/// The affine `λ_i` through `(a_i, y_{i−1})` and `(b_i, y_i)`.
pub fn linear_lambdas(subsets: &[Interval], ys: &[f64]) -> Result<Vec<PiecewisePoly>> {
    if ys.len() != subsets.len() + 1 {
        return Err(Error::InvalidData(format!(
            "{} values for {} subsets",
            ys.len(),
            subsets.len()
        )));
    }
    subsets
        .iter()
        .enumerate()
        .map(|(i, x)| PiecewisePoly::affine(*x, ys[i], ys[i + 1]))
        .collect()
}

/// Assembles a system whose `S_i` vanish at both ends of `X_i` and whose
/// `λ_i` match the data at the ends, so that the fixed point is continuous
/// and interpolates the data at every knot.
pub fn build_property_s_system(
    knots: Vec<f64>,
    subsets: Vec<Interval>,
    data: &InterpolationData,
    scale: Vec<PiecewisePoly>,
    lambda: Vec<PiecewisePoly>,
) -> Result<RBSystem> {
    let part = PartitionSpec::general(knots, subsets)?;
    let n = part.n();
    if data.len() != n + 1 {
        return Err(Error::InvalidData(format!("{} data values for {n} pieces", data.len())));
    }
    for (j, (&site, &knot)) in data.sites().iter().zip(part.knots()).enumerate() {
        if (site - knot).abs() > 1e-12 {
            return Err(Error::InvalidData(format!("site {j} = {site} is not the knot {knot}")));
        }
    }
    if scale.len() != n || lambda.len() != n {
        return Err(Error::InvalidData(format!("{n} λ and S functions required")));
    }
    let mut offenders = Vec::new();
    for (i, x) in part.subsets().iter().enumerate() {
        let p = i + 1;
        for (end, at) in [("a", x.lo), ("b", x.hi)] {
            let v = scale[i].eval_clamped(at);
            if v != 0.0 {
                offenders.push(format!("S_{p}({end}_{p}) = {v:e}"));
            }
        }
        let lo = lambda[i].eval_clamped(x.lo) - data.y(i);
        if lo.abs() > JOIN_UP_TOLERANCE {
            offenders.push(format!("λ_{p}(a_{p}) − y_{i} = {lo:e}"));
        }
        let hi = lambda[i].eval_clamped(x.hi) - data.y(i + 1);
        if hi.abs() > JOIN_UP_TOLERANCE {
            offenders.push(format!("λ_{p}(b_{p}) − y_{p} = {hi:e}"));
        }
    }
    if !offenders.is_empty() {
        return Err(Error::EndpointConditions(offenders));
    }
    let mut sys = RBSystem::new(part, lambda, scale)?;
    sys.property_s = true;
    Ok(sys)
}

/// For every grid point `x′` in `u_i(X_i)`: `(i, x = u_i⁻¹(x′), k)` with `k` the grid index of `x′`.
fn piece_samples(part: &PartitionSpec, f: &SampledFunction) -> Vec<(usize, f64, usize)> {
    (0..=f.m())
        .map(|k| {
            let xp = f.x(k);
            let i = part.piece_of(xp);
            (i, part.preimage(i, xp), k)
        })
        .collect()
}

/// `max |f(u_i(x)) − λ_i(x) − S_i(x)·f(x)|` over sample points of every `X_i`.
pub fn verify_self_referential(sys: &RBSystem, f: &SampledFunction) -> f64 {
    piece_samples(sys.partition(), f)
        .into_iter()
        .map(|(i, x, k)| (f.values[k] - sys.v(i, x, f.value_at(x))).abs())
        .fold(0.0, f64::max)
}

/// Samples `(x, f(u_i(x)) − S_i(x)·f(x))` of the `λ_i` generating `f`.
pub fn recover_lambda(partition: &PartitionSpec, scale: &[PiecewisePoly], f: &SampledFunction) -> Vec<Vec<(f64, f64)>> {
    let mut out = vec![Vec::new(); partition.n()];
    for (i, x, k) in piece_samples(partition, f) {
        let v = f.values[k] - scale[i].eval_clamped(x) * f.value_at(x);
        out[i].push((x, v));
    }
    out
}
