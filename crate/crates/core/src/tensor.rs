//! Tensor products of RB operators: `(Φ⊗Φ̄)(f⊗g) = (Φf)⊗(Φ̄g)`.
//!
//! Surfaces are rank one by construction. The iteration is carried out on the
//! factor pair and the surface is formed at the end.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::rb::{apply_rb_with, RBSystem, RbPlan, SampledFunction, SolveOptions};

/// Values `values[i][j]` over the grid points `x_i` and `y_j`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSurface {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl TensorSurface {
    /// Outer product of two sampled functions.
    pub fn outer(f: &SampledFunction, g: &SampledFunction) -> Self {
        Self::outer_with(f, g, Execution::default())
    }

    pub fn outer_with(f: &SampledFunction, g: &SampledFunction, exec: Execution) -> Self {
        let (a, b) = (f.values(), g.values());
        let ny = b.len();
        let mut values = vec![0.0; a.len() * ny];
        exec::for_each_chunk(exec, &mut values, ny, |i, row| {
            for (v, bj) in row.iter_mut().zip(b) {
                *v = a[i] * bj;
            }
        });
        Self {
            x_range: (f.lo(), f.hi()),
            y_range: (g.lo(), g.hi()),
            nx: a.len(),
            ny,
            values,
        }
    }

    /// Number of grid points along each axis.
    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.ny..(i + 1) * self.ny]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transpose(&self) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.nx {
            for j in 0..self.ny {
                values[j * self.nx + i] = self.get(i, j);
            }
        }
        Self {
            x_range: self.y_range,
            y_range: self.x_range,
            nx: self.ny,
            ny: self.nx,
            values,
        }
    }

    pub fn max_abs_difference(&self, other: &TensorSurface) -> f64 {
        assert_eq!(self.dims(), other.dims(), "surfaces of different shape");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|v_ij v_kl − v_il v_kj|` over all index quadruples, which
    /// vanishes exactly when the surface has rank at most one.
    pub fn rank_one_defect(&self) -> f64 {
        self.rank_one_defect_with(Execution::default())
    }

    pub fn rank_one_defect_with(&self, exec: Execution) -> f64 {
        exec::max_range(exec, self.nx, 0.0, |i| {
            let mut worst = 0.0_f64;
            for k in i + 1..self.nx {
                let (ri, rk) = (self.row(i), self.row(k));
                for j in 0..self.ny {
                    for l in j + 1..self.ny {
                        worst = worst.max((ri[j] * rk[l] - ri[l] * rk[j]).abs());
                    }
                }
            }
            worst
        })
    }
}

/// `(Φf)(x_i)·(Φ̄g)(y_j)`.
pub fn tensor_apply(a: &RBSystem, b: &RBSystem, f: &SampledFunction, g: &SampledFunction) -> TensorSurface {
    let exec = Execution::default();
    TensorSurface::outer_with(&apply_rb_with(a, f, exec), &apply_rb_with(b, g, exec), exec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFixedPoint {
    pub surface: TensorSurface,
    pub first: SampledFunction,
    pub second: SampledFunction,
    /// `sup|f_k − f_{k−1}| + sup|g_k − g_{k−1}|` per iteration.
    pub residuals: Vec<f64>,
}

/// Iterates both factors in lockstep until the summed factor residual is at
/// most `tol`, then forms the surface.
pub fn tensor_fixed_point(
    a: &RBSystem,
    b: &RBSystem,
    f0: &SampledFunction,
    g0: &SampledFunction,
    opts: &SolveOptions,
) -> Result<TensorFixedPoint> {
    for sys in [a, b] {
        let s = sys.contraction_factor();
        if s >= 1.0 {
            return Err(Error::OperatorNotContractive { s });
        }
    }
    let (pa, pb) = (RbPlan::new(a, f0, opts.exec), RbPlan::new(b, g0, opts.exec));
    let (mut f, mut g) = (f0.clone(), g0.clone());
    let mut residuals = Vec::new();
    for _ in 0..opts.max_iter {
        let (nf, ng) = (pa.apply(&f, opts.exec), pb.apply(&g, opts.exec));
        let r = nf.sup_distance(&f) + ng.sup_distance(&g);
        f = nf;
        g = ng;
        residuals.push(r);
        if r <= opts.tol {
            return Ok(TensorFixedPoint {
                surface: TensorSurface::outer_with(&f, &g, opts.exec),
                first: f,
                second: g,
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
