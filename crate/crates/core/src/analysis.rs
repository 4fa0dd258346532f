//! Sufficient conditions for the fixed point of an RB operator to lie in
//! `L^p`, `Ċ^s`, `C^n` or `W^{m,p}`, and empirical norm estimates of sampled
//! functions.
//!
//! Every left-hand side is computed from certified upper brackets of the
//! sup norms involved, so a passing verdict is conservative.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::piecewise::{holder_seminorm_estimate, pairwise_holder};
use crate::rb::{PartitionSpec, RBSystem, SampledFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Lp,
    Sup,
    Holder,
    Cn,
    Sobolev,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Lp => "Lp",
            Space::Sup => "sup",
            Space::Holder => "holder",
            Space::Cn => "Cn",
            Space::Sobolev => "sobolev",
        })
    }
}

/// Verdict of a contractivity condition `lhs < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub space: Space,
    pub params: Vec<(String, String)>,
    /// Which case of a piecewise-defined condition was evaluated.
    pub branch: Option<String>,
    pub lhs: f64,
    pub threshold: f64,
    pub pass: bool,
    pub per_piece: Vec<(String, f64)>,
}

impl ConditionReport {
    fn new(space: Space, params: Vec<(String, String)>, lhs: f64, per_piece: Vec<(String, f64)>) -> Self {
        Self {
            space,
            params,
            branch: None,
            lhs,
            threshold: 1.0,
            pass: lhs < 1.0,
            per_piece,
        }
    }

    /// Flat `key = value` block, one line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "space = {}", self.space).unwrap();
        for (k, v) in &self.params {
            writeln!(out, "{k} = {v}").unwrap();
        }
        if let Some(b) = &self.branch {
            writeln!(out, "branch = {b}").unwrap();
        }
        writeln!(out, "lhs = {}", self.lhs).unwrap();
        writeln!(out, "threshold = {}", self.threshold).unwrap();
        writeln!(out, "pass = {}", self.pass).unwrap();
        for (k, v) in &self.per_piece {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }
}

fn param(key: &str, value: impl fmt::Display) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn fmt_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        p.to_string()
    }
}

fn sup_upper(sys: &RBSystem) -> Vec<f64> {
    sys.scale().iter().map(|s| s.sup_norm_bracket().1).collect()
}

/// `L^p` condition on `S` with the Lipschitz constants `a_i` of the `u_i`:
/// `Σ a_i‖S_i‖^p` for `0 < p < 1`, its `p`-th root for `1 ≤ p < ∞` and
/// `max ‖S_i‖` for `p = ∞`.
pub fn check_lp(sys: &RBSystem, p: f64) -> Result<ConditionReport> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("exponent p must be positive, got {p}")));
    }
    let norms = sup_upper(sys);
    if p.is_infinite() {
        let per = norms
            .iter()
            .enumerate()
            .map(|(i, &n)| (format!("piece {}", i + 1), n))
            .collect();
        let lhs = norms.iter().copied().fold(0.0, f64::max);
        let mut r = ConditionReport::new(Space::Sup, vec![param("p", "inf")], lhs, per);
        r.branch = Some("p = inf".into());
        return Ok(r);
    }
    let part = sys.partition();
    let terms: Vec<f64> = norms
        .iter()
        .enumerate()
        .map(|(i, &n)| part.lipschitz(i) * n.powf(p))
        .collect();
    let sum: f64 = terms.iter().sum();
    let (lhs, branch) = if p < 1.0 {
        (sum, "0 < p < 1")
    } else {
        (sum.powf(1.0 / p), "1 <= p < inf")
    };
    let per = terms
        .into_iter()
        .enumerate()
        .map(|(i, t)| (format!("piece {}", i + 1), t))
        .collect();
    let mut r = ConditionReport::new(Space::Lp, vec![param("p", fmt_p(p))], lhs, per);
    r.branch = Some(branch.into());
    Ok(r)
}

fn require_binary(sys: &RBSystem, what: &str) -> Result<()> {
    if sys.partition().is_binary() {
        Ok(())
    } else {
        Err(Error::InvalidPartition(format!(
            "{what} criterion defined for binary partitions"
        )))
    }
}

/// `2^s · max ‖S_i‖` on the binary partition.
pub fn check_holder(sys: &RBSystem, s_exp: f64) -> Result<ConditionReport> {
    if !(s_exp > 0.0 && s_exp < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Hölder exponent must lie in (0, 1), got {s_exp}"
        )));
    }
    require_binary(sys, "Hölder")?;
    let factor = 2f64.powf(s_exp);
    let per: Vec<(String, f64)> = sup_upper(sys)
        .into_iter()
        .enumerate()
        .map(|(i, n)| (format!("piece {}", i + 1), factor * n))
        .collect();
    let lhs = per.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    Ok(ConditionReport::new(Space::Holder, vec![param("s", s_exp)], lhs, per))
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

const SMOOTHNESS_TOLERANCE: f64 = 1e-9;

/// `2^n · max_i max_{k ≤ n} Σ_{l ≤ k} C(n−k+l, l)·‖D^l S_i‖` on the binary partition.
pub fn check_cn(sys: &RBSystem, n: usize) -> Result<ConditionReport> {
    require_binary(sys, "C^n")?;
    let factor = 2f64.powi(n as i32);
    let mut per = Vec::with_capacity(sys.partition().n());
    for (i, s) in sys.scale().iter().enumerate() {
        let jump = s.max_jump(n);
        if jump > SMOOTHNESS_TOLERANCE {
            return Err(Error::InsufficientSmoothness(format!(
                "S_{} is not C^{n} (jump {jump:e})",
                i + 1
            )));
        }
        let d: Vec<f64> = (0..=n).map(|l| s.derivative(l).sup_norm_bracket().1).collect();
        let worst = (0..=n)
            .map(|k| (0..=k).map(|l| binom(n - k + l, l) * d[l]).sum::<f64>())
            .fold(0.0, f64::max);
        per.push((format!("piece {}", i + 1), factor * worst));
    }
    let lhs = per.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    Ok(ConditionReport::new(Space::Cn, vec![param("n", n)], lhs, per))
}

/// Sobolev condition for constant scalings `s_i`:
/// `(max_k Σ |s_i|^p a_i^{1−kp})^{1/p}` for `1 ≤ p < ∞` and
/// `max_k Σ |s_i| / a_i^k` for `p = ∞`, with `k = 0..=m`.
pub fn check_sobolev(partition: &PartitionSpec, s_values: &[f64], m: usize, p: f64) -> Result<ConditionReport> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Sobolev condition needs p >= 1, got {p}"
        )));
    }
    if s_values.len() != partition.n() {
        return Err(Error::InvalidData(format!(
            "{} scaling factors for {} pieces",
            s_values.len(),
            partition.n()
        )));
    }
    let a: Vec<f64> = (0..partition.n()).map(|i| partition.lipschitz(i)).collect();
    let mut per = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let v = if p.is_infinite() {
            s_values
                .iter()
                .zip(&a)
                .map(|(s, a)| s.abs() / a.powi(k as i32))
                .sum::<f64>()
        } else {
            let sum: f64 = s_values
                .iter()
                .zip(&a)
                .map(|(s, a)| s.abs().powf(p) * a.powf(1.0 - k as f64 * p))
                .sum();
            sum.powf(1.0 / p)
        };
        per.push((format!("k = {k}"), v));
    }
    let lhs = per.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let mut r = ConditionReport::new(Space::Sobolev, vec![param("m", m), param("p", fmt_p(p))], lhs, per);
    r.branch = Some(if p.is_infinite() { "p = inf" } else { "1 <= p < inf" }.into());
    Ok(r)
}

/// [`check_sobolev`] for a system whose scalings are all constant.
pub fn check_sobolev_system(sys: &RBSystem, m: usize, p: f64) -> Result<ConditionReport> {
    let s: Option<Vec<f64>> = sys.scale().iter().map(|f| f.as_constant()).collect();
    let s = s.ok_or_else(|| Error::InvalidParameter("Sobolev condition needs constant scalings".into()))?;
    check_sobolev(sys.partition(), &s, m, p)
}

/// Norm or seminorm to estimate from samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// `(∫|f|^p)^{1/p}`; `p = ∞` is the sup norm.
    Lp(f64),
    Sup,
    /// Hölder seminorm of exponent `s`.
    Holder(f64),
    /// `Σ_{k ≤ n} ‖D^k f‖_∞`.
    Cn(usize),
    /// `(Σ_{k ≤ m} ‖D^k f‖_p^p)^{1/p}`, or `max_k ‖D^k f‖_∞` for `p = ∞`.
    Sobolev {
        m: usize,
        p: f64,
    },
}

fn parse_real(s: &str) -> std::result::Result<f64, Error> {
    match s.trim() {
        "inf" | "∞" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| Error::UnknownNorm(s.to_string())),
    }
}

impl FromStr for NormKind {
    type Err = Error;

    /// `sup`, `lp(p)`, `holder(s)`, `cn(n)` or `sobolev(m, p)`; `p` may be `inf`.
    fn from_str(s: &str) -> std::result::Result<Self, Error> {
        let t = s.trim();
        let unknown = || Error::UnknownNorm(s.to_string());
        if t == "sup" {
            return Ok(NormKind::Sup);
        }
        let (name, rest) = t.split_once('(').ok_or_else(unknown)?;
        let args: Vec<&str> = rest.strip_suffix(')').ok_or_else(unknown)?.split(',').collect();
        match (name.trim(), args.as_slice()) {
            ("lp", [p]) => Ok(NormKind::Lp(parse_real(p)?)),
            ("holder", [s_exp]) => Ok(NormKind::Holder(parse_real(s_exp)?)),
            ("cn", [n]) => Ok(NormKind::Cn(n.trim().parse().map_err(|_| unknown())?)),
            ("sobolev", [m, p]) => Ok(NormKind::Sobolev {
                m: m.trim().parse().map_err(|_| unknown())?,
                p: parse_real(p)?,
            }),
            _ => Err(unknown()),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::Sup => f.write_str("sup"),
            NormKind::Lp(p) => write!(f, "lp({})", fmt_p(*p)),
            NormKind::Holder(s) => write!(f, "holder({s})"),
            NormKind::Cn(n) => write!(f, "cn({n})"),
            NormKind::Sobolev { m, p } => write!(f, "sobolev({m}, {})", fmt_p(*p)),
        }
    }
}

/// Grid size above which the Hölder estimate uses strided pairs.
pub const ALL_PAIRS_LIMIT: usize = 10_000;

fn lp_of(values: &[f64], h: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    let n = values.len();
    let mut sum = 0.0;
    for (k, v) in values.iter().enumerate() {
        let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        sum += w * v.abs().powf(p);
    }
    (sum * h).powf(1.0 / p)
}

/// Central differences inside, second-order one-sided differences at the ends.
fn differentiate(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    if n < 3 {
        let d = (values[n - 1] - values[0]) / (h * (n - 1) as f64);
        return vec![d; n];
    }
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    for k in 1..n - 1 {
        out[k] = (values[k + 1] - values[k - 1]) / (2.0 * h);
    }
    out
}

fn derivatives(f: &SampledFunction, m: usize) -> Vec<Vec<f64>> {
    let h = f.spacing();
    let mut out = vec![f.values().to_vec()];
    for _ in 0..m {
        let next = differentiate(out.last().unwrap(), h);
        out.push(next);
    }
    out
}

/// Hölder quotient over all pairs for small grids, over the pairs `(i, i + 2^k)` otherwise.
pub fn holder_estimate_sampled(f: &SampledFunction, s: f64, exec: Execution) -> f64 {
    let xs: Vec<f64> = (0..=f.m()).map(|k| f.x(k)).collect();
    let ys = f.values();
    if xs.len() <= ALL_PAIRS_LIMIT {
        return pairwise_holder(&xs, ys, s, exec);
    }
    let n = xs.len();
    let strides: Vec<usize> = std::iter::successors(Some(1usize), |d| d.checked_mul(2))
        .take_while(|&d| d < n)
        .collect();
    exec::max_range(exec, strides.len(), 0.0, |k| {
        let d = strides[k];
        (0..n - d)
            .map(|i| (ys[i + d] - ys[i]).abs() / (xs[i + d] - xs[i]).powf(s))
            .fold(0.0, f64::max)
    })
}

/// Empirical norm of a sampled function.
pub fn estimate_norm(f: &SampledFunction, kind: NormKind) -> Result<f64> {
    let h = f.spacing();
    match kind {
        NormKind::Sup => Ok(f.sup_norm()),
        NormKind::Lp(p) => {
            if !(p > 0.0) {
                return Err(Error::InvalidParameter(format!("exponent p must be positive, got {p}")));
            }
            Ok(lp_of(f.values(), h, p))
        }
        NormKind::Holder(s) => {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "Hölder exponent must lie in (0, 1), got {s}"
                )));
            }
            Ok(holder_estimate_sampled(f, s, Execution::default()))
        }
        NormKind::Cn(n) => Ok(derivatives(f, n).iter().map(|d| lp_of(d, h, f64::INFINITY)).sum()),
        NormKind::Sobolev { m, p } => {
            if !(p >= 1.0) {
                return Err(Error::InvalidParameter(format!("Sobolev norm needs p >= 1, got {p}")));
            }
            let ds = derivatives(f, m);
            if p.is_infinite() {
                Ok(ds.iter().map(|d| lp_of(d, h, p)).fold(0.0, f64::max))
            } else {
                Ok(ds.iter().map(|d| lp_of(d, h, p).powf(p)).sum::<f64>().powf(1.0 / p))
            }
        }
    }
}

/// Upper bound of `|λ|_{Ċ^s}` on an interval of length `ℓ`: `Lip(λ)·ℓ^{1−s}`,
/// never below the sampled estimate.
fn lambda_holder_upper(f: &crate::piecewise::PiecewisePoly, s: f64) -> Result<f64> {
    let len = f.domain().length();
    let analytic = f.lipschitz_bound() * len.powf(1.0 - s);
    let sampled = holder_seminorm_estimate(f, s, len / 256.0)?;
    Ok(analytic.max(sampled))
}

/// Bound `2^s Σ|λ_i|_{Ċ^s} / (1 − 2^s max‖S_i‖)` on the Hölder seminorm of the fixed point.
pub fn holder_bound(sys: &RBSystem, s_exp: f64) -> Result<f64> {
    let report = check_holder(sys, s_exp)?;
    if !report.pass {
        return Err(Error::BoundDiverges(format!(
            "2^s max ||S_i|| = {} is not below 1",
            report.lhs
        )));
    }
    let mut sum = 0.0;
    for l in sys.lambda() {
        sum += lambda_holder_upper(l, s_exp)?;
    }
    let factor = 2f64.powf(s_exp);
    Ok(factor * sum / (1.0 - report.lhs))
}
