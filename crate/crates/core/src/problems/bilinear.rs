use std::sync::Arc;

use ndarray::{s, ArrayView1, ArrayViewMut1, Zip};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::SolverRng;
use crate::operators::{LipschitzMap, Problem};

/// `B(x, y) = (scale·Cy, −scale·Cᵀx)` for `min_x max_y scale·⟨x, Cy⟩`, with `C`
/// the rectangular identity. The unique solution is `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearGame {
    pub d_x: usize,
    pub d_y: usize,
    pub scale: f64,
    /// Standard deviation of additive Gaussian oracle noise.
    pub sigma: f64,
}

impl BilinearGame {
    pub fn new(d_x: usize, d_y: usize, scale: f64, sigma: f64) -> Result<Self> {
        if d_x == 0 || d_y == 0 {
            return Err(Error::invalid("bilinear game needs positive block sizes"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("coupling scale must be positive, got {scale}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("noise level must be nonnegative, got {sigma}")));
        }
        Ok(BilinearGame { d_x, d_y, scale, sigma })
    }

    /// Index where the maximising block starts.
    pub fn max_block_start(&self) -> usize {
        self.d_x
    }
}

impl LipschitzMap for BilinearGame {
    fn dim(&self) -> usize {
        self.d_x + self.d_y
    }

    fn eval_into(&self, z: ArrayView1<f64>, mut out: ArrayViewMut1<f64>) {
        let k = self.d_x.min(self.d_y);
        out.fill(0.0);
        let (x, y) = z.split_at(ndarray::Axis(0), self.d_x);
        Zip::from(out.slice_mut(s![..k]))
            .and(y.slice(s![..k]))
            .for_each(|o, &y| *o = self.scale * y);
        Zip::from(out.slice_mut(s![self.d_x..self.d_x + k]))
            .and(x.slice(s![..k]))
            .for_each(|o, &x| *o = -self.scale * x);
    }

    fn sample_into(&self, z: ArrayView1<f64>, rng: &mut SolverRng, mut out: ArrayViewMut1<f64>) {
        self.eval_into(z, out.view_mut());
        if self.sigma > 0.0 {
            for o in out.iter_mut() {
                let e: f64 = StandardNormal.sample(rng);
                *o += self.sigma * e;
            }
        }
    }

    fn lipschitz_bound(&self) -> f64 {
        self.scale
    }
}

/// Noise-free bilinear game with no set-valued operators.
pub fn make_bilinear_game(d_x: usize, d_y: usize, scale: f64) -> Result<Problem> {
    make_noisy_bilinear_game(d_x, d_y, scale, 0.0)
}

pub fn make_noisy_bilinear_game(d_x: usize, d_y: usize, scale: f64, sigma: f64) -> Result<Problem> {
    Problem::new(Vec::new(), Arc::new(BilinearGame::new(d_x, d_y, scale, sigma)?))
}
