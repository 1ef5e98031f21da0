//! Product-space reformulation.
//!
//! With `q = (w_1, ..., w_n, z)` the inclusion becomes `0 ∈ 𝒜(q) + ℬ(q)`,
//! where `𝒜 = A_1⁻¹ × ... × A_n⁻¹ × {0}` is maximal monotone and
//! `ℬ(q) = (−z, ..., −z, Σ w_i + B(z))` is monotone and Lipschitz.

use ndarray::{s, Array1, ArrayView1, ArrayViewMut1, Zip};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::operators::prox::inverse_resolvent_into;
use crate::operators::Problem;

#[derive(Debug, Clone, Copy)]
pub struct ProductSpace<'a> {
    problem: &'a Problem,
}

impl<'a> ProductSpace<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        ProductSpace { problem }
    }

    pub fn problem(&self) -> &'a Problem {
        self.problem
    }

    pub fn dim(&self) -> usize {
        (self.problem.n() + 1) * self.problem.dim()
    }

    fn block(&self, i: usize) -> std::ops::Range<usize> {
        let d = self.problem.dim();
        i * d..(i + 1) * d
    }

    /// The `z` block of `q`.
    pub fn primal<'q>(&self, q: &'q Vector) -> ArrayView1<'q, f64> {
        q.slice(s![self.block(self.problem.n())])
    }

    pub fn dual<'q>(&self, q: &'q Vector, i: usize) -> ArrayView1<'q, f64> {
        q.slice(s![self.block(i)])
    }

    /// `q = (0, ..., 0, z)`.
    pub fn from_primal(&self, z: ArrayView1<f64>) -> Vector {
        let mut q = Array1::zeros(self.dim());
        q.slice_mut(s![self.block(self.problem.n())]).assign(&z);
        q
    }

    pub fn pack(&self, duals: &[Vector], z: &Vector) -> Result<Vector> {
        Error::check_dim(self.problem.n(), duals.len())?;
        let mut q = Array1::zeros(self.dim());
        for (i, w) in duals.iter().enumerate() {
            Error::check_dim(self.problem.dim(), w.len())?;
            q.slice_mut(s![self.block(i)]).assign(w);
        }
        Error::check_dim(self.problem.dim(), z.len())?;
        q.slice_mut(s![self.block(self.problem.n())]).assign(z);
        Ok(q)
    }

    /// Skew-symmetric part `(−z, ..., −z, Σ w_i)`.
    pub fn linear_part_into(&self, q: ArrayView1<f64>, mut out: ArrayViewMut1<f64>) {
        let n = self.problem.n();
        let z = q.slice(s![self.block(n)]);
        let mut last = out.slice_mut(s![self.block(n)]);
        last.fill(0.0);
        for i in 0..n {
            Zip::from(&mut last)
                .and(q.slice(s![self.block(i)]))
                .for_each(|o, &w| *o += w);
        }
        for i in 0..n {
            Zip::from(out.slice_mut(s![self.block(i)]))
                .and(z)
                .for_each(|o, &z| *o = -z);
        }
    }

    /// `ℬ(q)` into `out`.
    pub fn field_into(&self, q: ArrayView1<f64>, mut out: ArrayViewMut1<f64>) {
        let n = self.problem.n();
        self.linear_part_into(q, out.view_mut());
        let bz = self.problem.field().eval(q.slice(s![self.block(n)]));
        Zip::from(out.slice_mut(s![self.block(n)]))
            .and(&bz)
            .for_each(|o, &b| *o += b);
    }

    pub fn field(&self, q: &Vector) -> Vector {
        let mut out = Array1::zeros(self.dim());
        self.field_into(q.view(), out.view_mut());
        out
    }

    /// `J_{α𝒜}(q)`: `J_{αA_i⁻¹}` on each dual block, identity on `z`.
    pub fn resolvent(&self, alpha: f64, q: &Vector) -> Vector {
        let n = self.problem.n();
        let mut out = Array1::zeros(self.dim());
        for (i, op) in self.problem.operators().iter().enumerate() {
            inverse_resolvent_into(
                op.as_ref(),
                alpha,
                q.slice(s![self.block(i)]),
                out.slice_mut(s![self.block(i)]),
            );
        }
        out.slice_mut(s![self.block(n)]).assign(&q.slice(s![self.block(n)]));
        out
    }
}

/// `ℬ(q)` for the problem's product-space reformulation.
pub fn product_field_b(problem: &Problem, q: &Vector) -> Result<Vector> {
    let space = ProductSpace::new(problem);
    Error::check_dim(space.dim(), q.len())?;
    Ok(space.field(q))
}

/// `J_{α𝒜}(q)`.
pub fn product_resolvent_a(problem: &Problem, alpha: f64, q: &Vector) -> Result<Vector> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("stepsize must be positive, got {alpha}")));
    }
    let space = ProductSpace::new(problem);
    Error::check_dim(space.dim(), q.len())?;
    Ok(space.resolvent(alpha, q))
}
