//! Piecewise polynomials on an interval.
//!
//! Each piece stores its coefficients in powers of `(x − origin)`, where the
//! origin is a breakpoint of that piece. B-splines put the origin of the
//! right half of their pieces on the right breakpoint, so derivative
//! conditions at both ends of the support hold at the coefficient level.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::Interval;

/// Samples per piece used by [`PiecewisePoly::sup_norm_bracket`].
pub const DEFAULT_SUP_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub origin: f64,
    /// Low-to-high coefficients in powers of `(x − origin)`.
    pub coeffs: Vec<f64>,
}

impl Piece {
    pub fn new(origin: f64, coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Self { origin, coeffs }
    }

    fn eval(&self, x: f64) -> f64 {
        let t = x - self.origin;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    fn derivative(&self, k: usize) -> Piece {
        if k >= self.coeffs.len() {
            return Piece::new(self.origin, vec![0.0]);
        }
        let coeffs = (k..self.coeffs.len()).map(|m| self.coeffs[m] * falling(m, k)).collect();
        Piece::new(self.origin, coeffs)
    }

    /// Upper bound of `|D^k p|` on `[a, b]` by absolute coefficient sums.
    fn derivative_bound(&self, k: usize, a: f64, b: f64) -> f64 {
        let r = (a - self.origin).abs().max((b - self.origin).abs());
        (k..self.coeffs.len())
            .map(|m| self.coeffs[m].abs() * falling(m, k) * r.powi((m - k) as i32))
            .sum()
    }
}

/// `m (m−1) … (m−k+1)`.
fn falling(m: usize, k: usize) -> f64 {
    (0..k).map(|i| (m - i) as f64).product()
}

/// Piecewise polynomial with strictly ascending breakpoints spanning its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    domain: Interval,
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
}

impl PiecewisePoly {
    pub fn new(domain: Interval, breakpoints: Vec<f64>, pieces: Vec<Piece>) -> Result<Self> {
        if breakpoints.len() < 2 || pieces.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidPolynomial(format!(
                "{} breakpoints for {} pieces",
                breakpoints.len(),
                pieces.len()
            )));
        }
        if breakpoints[0] != domain.lo || *breakpoints.last().unwrap() != domain.hi {
            return Err(Error::InvalidPolynomial(
                "breakpoints must start at domain.lo and end at domain.hi".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPolynomial(
                "breakpoints must be strictly ascending".into(),
            ));
        }
        if pieces.iter().any(|p| p.coeffs.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidPolynomial("non-finite coefficient".into()));
        }
        Ok(Self {
            domain,
            breakpoints,
            pieces,
        })
    }

    /// Single polynomial with low-to-high coefficients in powers of `x`.
    pub fn polynomial(domain: Interval, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(domain, vec![domain.lo, domain.hi], vec![Piece::new(0.0, coeffs)])
    }

    pub fn constant(domain: Interval, c: f64) -> Result<Self> {
        Self::polynomial(domain, vec![c])
    }

    /// The affine function through `(domain.lo, y_lo)` and `(domain.hi, y_hi)`.
    pub fn affine(domain: Interval, y_lo: f64, y_hi: f64) -> Result<Self> {
        let slope = (y_hi - y_lo) / domain.length();
        Self::new(
            domain,
            vec![domain.lo, domain.hi],
            vec![Piece::new(domain.lo, vec![y_lo, slope])],
        )
    }

    /// Interpolating polynomial through `(xs[k], ys[k])` by divided differences.
    pub fn interpolate(domain: Interval, xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::InvalidPolynomial(
                "interpolation needs matching nonempty nodes".into(),
            ));
        }
        let n = xs.len();
        let mut dd = ys.to_vec();
        for level in 1..n {
            for k in (level..n).rev() {
                let den = xs[k] - xs[k - level];
                if den == 0.0 {
                    return Err(Error::InvalidPolynomial("repeated interpolation node".into()));
                }
                dd[k] = (dd[k] - dd[k - 1]) / den;
            }
        }
        // expand the Newton form about origin xs[0]
        let origin = xs[0];
        let mut coeffs = vec![0.0; n];
        for k in (0..n).rev() {
            // coeffs ← coeffs·(t − (xs[k] − origin)) + dd[k]
            let shift = xs[k] - origin;
            let mut next = vec![0.0; n];
            for m in 0..n {
                if m + 1 < n {
                    next[m + 1] += coeffs[m];
                }
                next[m] -= shift * coeffs[m];
            }
            next[0] += dd[k];
            coeffs = next;
        }
        Self::new(domain, vec![domain.lo, domain.hi], vec![Piece::new(origin, coeffs)])
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|p| p.coeffs.len() - 1).max().unwrap_or(0)
    }

    /// Constant value when every piece is the same constant.
    pub fn as_constant(&self) -> Option<f64> {
        let c = self.pieces[0].coeffs[0];
        self.pieces
            .iter()
            .all(|p| p.coeffs[0] == c && p.coeffs[1..].iter().all(|&v| v == 0.0))
            .then_some(c)
    }

    fn piece_index(&self, x: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(self.pieces.len() - 1)
    }

    /// Value at `x`; breakpoints use the right-hand piece, `domain.hi` the last.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.domain.contains_closure(x) {
            return Err(Error::OutOfDomain {
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        Ok(self.eval_clamped(x))
    }

    /// Value at `x` clamped into the domain.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let x = self.domain.clamp(x);
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// Value of the piece to the left of `x` (the same as [`eval`](Self::eval) except at interior breakpoints).
    pub fn eval_left(&self, x: f64) -> f64 {
        let x = self.domain.clamp(x);
        let k = self.breakpoints.partition_point(|&b| b < x);
        self.pieces[k.saturating_sub(1).min(self.pieces.len() - 1)].eval(x)
    }

    /// Piecewise `k`-th derivative.
    pub fn derivative(&self, k: usize) -> PiecewisePoly {
        PiecewisePoly {
            domain: self.domain,
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.derivative(k)).collect(),
        }
    }

    /// Piecewise antiderivative vanishing at each piece origin.
    pub fn antiderivative(&self) -> PiecewisePoly {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut c = vec![0.0];
                c.extend(p.coeffs.iter().enumerate().map(|(m, &v)| v / (m + 1) as f64));
                Piece::new(p.origin, c)
            })
            .collect();
        PiecewisePoly {
            domain: self.domain,
            breakpoints: self.breakpoints.clone(),
            pieces,
        }
    }

    /// Largest jump of `D^k`, `k = 0..=order`, across interior breakpoints,
    /// relative to the larger one-sided value when that exceeds 1.
    pub fn max_jump(&self, order: usize) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..=order {
            let d = self.derivative(k);
            for (b, w) in self.breakpoints[1..self.breakpoints.len() - 1]
                .iter()
                .zip(d.pieces.windows(2))
            {
                let (l, r) = (w[0].eval(*b), w[1].eval(*b));
                worst = worst.max((l - r).abs() / l.abs().max(r.abs()).max(1.0));
            }
        }
        worst
    }

    /// Certified bracket `lower ≤ sup|f| ≤ upper` with the default sampling.
    pub fn sup_norm_bracket(&self) -> (f64, f64) {
        self.sup_norm_bracket_with(DEFAULT_SUP_SAMPLES)
    }

    /// `lower` is the largest sampled `|f|`; `upper` pads it by
    /// `min(Lip·δ/2, M₂·δ²/8)` per piece, with `δ` the sample spacing and the
    /// derivative bounds taken from coefficient sums.
    pub fn sup_norm_bracket_with(&self, samples: usize) -> (f64, f64) {
        let samples = samples.max(2);
        let mut lower = 0.0_f64;
        let mut upper = 0.0_f64;
        for (p, w) in self.pieces.iter().zip(self.breakpoints.windows(2)) {
            let (a, b) = (w[0], w[1]);
            let delta = (b - a) / (samples - 1) as f64;
            let mut piece_max = 0.0_f64;
            for k in 0..samples {
                let x = if k + 1 == samples { b } else { a + k as f64 * delta };
                piece_max = piece_max.max(p.eval(x).abs());
            }
            let lip = p.derivative_bound(1, a, b);
            let curv = p.derivative_bound(2, a, b);
            let pad = (lip * delta / 2.0).min(curv * delta * delta / 8.0);
            lower = lower.max(piece_max);
            upper = upper.max(piece_max + pad);
        }
        (lower, upper)
    }

    /// Upper bound of the Lipschitz constant on each piece (jumps ignored).
    pub fn lipschitz_bound(&self) -> f64 {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| p.derivative_bound(1, w[0], w[1]))
            .fold(0.0, f64::max)
    }

    pub fn map_coeffs(&self, f: impl Fn(f64) -> f64) -> PiecewisePoly {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece::new(p.origin, p.coeffs.iter().map(|&c| f(c)).collect()))
            .collect();
        PiecewisePoly {
            domain: self.domain,
            breakpoints: self.breakpoints.clone(),
            pieces,
        }
    }
}

/// Lower estimate of the Hölder seminorm `sup |f(x)−f(x′)|/|x−x′|^s` over
/// all pairs of a uniform grid of spacing at most `h`.
pub fn holder_seminorm_estimate(f: &PiecewisePoly, s: f64, h: f64) -> Result<f64> {
    holder_seminorm_estimate_with(f, s, h, Execution::default())
}

pub fn holder_seminorm_estimate_with(f: &PiecewisePoly, s: f64, h: f64, exec: Execution) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Hölder exponent must lie in (0, 1), got {s}"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid spacing must be positive, got {h}"
        )));
    }
    let d = f.domain();
    let n = (d.length() / h).ceil().max(1.0) as usize;
    let xs: Vec<f64> = (0..=n)
        .map(|k| {
            if k == n {
                d.hi
            } else {
                d.lo + d.length() * k as f64 / n as f64
            }
        })
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f.eval_clamped(x)).collect();
    Ok(pairwise_holder(&xs, &ys, s, exec))
}

/// Maximum of `|y_i − y_j| / |x_i − x_j|^s` over all pairs `i < j`.
pub(crate) fn pairwise_holder(xs: &[f64], ys: &[f64], s: f64, exec: Execution) -> f64 {
    exec::max_range(exec, xs.len(), 0.0, |i| {
        let mut best = 0.0_f64;
        for j in i + 1..xs.len() {
            let r = (ys[i] - ys[j]).abs() / (xs[j] - xs[i]).abs().powf(s);
            best = best.max(r);
        }
        best
    })
}

fn binom_i128(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: i128 = 1;
    for i in 0..k {
        r = r * (n - i) as i128 / (i + 1) as i128;
    }
    r
}

/// Largest supported B-spline order.
pub const MAX_BSPLINE_ORDER: usize = 16;

/// Uniform-knot polynomial B-spline of order `n` (degree `n − 1`) supported on
/// `domain`, centered at its midpoint and scaled so that its maximum is `c`.
/// Derivatives of order `0..=n−2` vanish at both endpoints.
pub fn bspline(n: usize, domain: Interval, c: f64) -> Result<PiecewisePoly> {
    if n < 3 {
        return Err(Error::BsplineOrder(n));
    }
    if n > MAX_BSPLINE_ORDER {
        return Err(Error::InvalidParameter(format!(
            "B-spline order {n} exceeds {MAX_BSPLINE_ORDER}"
        )));
    }
    let deg = n - 1;
    // integer coefficients of (n−1)!·M_n on [j, j+1] in powers of τ = t − j
    let cardinal = |j: usize| -> Vec<i128> {
        let mut out = vec![0i128; n];
        for k in 0..=j {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let d = (j - k) as i128;
            for (m, o) in out.iter_mut().enumerate() {
                *o += sign * binom_i128(n, k) * binom_i128(deg, m) * d.pow((deg - m) as u32);
            }
        }
        out
    };
    let fact: f64 = (1..=deg).map(|v| v as f64).product();
    let len = domain.length();
    let rate = n as f64 / len;
    let mut breakpoints: Vec<f64> = (0..=n).map(|k| domain.lo + len * k as f64 / n as f64).collect();
    breakpoints[n] = domain.hi;
    let mut pieces = Vec::with_capacity(n);
    for p in 0..n {
        let (j, origin, flip) = if 2 * p < n {
            (p, breakpoints[p], 1.0)
        } else {
            (n - 1 - p, breakpoints[p + 1], -1.0)
        };
        let coeffs = cardinal(j)
            .into_iter()
            .enumerate()
            .map(|(m, v)| v as f64 / fact * (flip * rate).powi(m as i32))
            .collect();
        pieces.push(Piece::new(origin, coeffs));
    }
    let unit = PiecewisePoly::new(domain, breakpoints, pieces)?;
    let peak = unit.eval_clamped(domain.midpoint());
    Ok(unit.map_coeffs(|v| v * c / peak))
}
