use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{rng_for, standard_normal, SolverRng, Vector, INIT_STREAM};
use crate::operators::{BoxSet, LipschitzMap, NormalCone, Problem, ScaledL1, SetValuedOperator};
use crate::sps::ExtendedPoint;

/// `B(z) = Mz + b` with an exact oracle. Monotone when `M + Mᵀ ⪰ 0`.
#[derive(Debug, Clone)]
pub struct AffineField {
    matrix: Array2<f64>,
    offset: Vector,
    lipschitz: f64,
}

impl AffineField {
    /// The Lipschitz bound is the Frobenius norm of `matrix`.
    pub fn new(matrix: Array2<f64>, offset: Vector) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        Error::check_dim(rows, cols)?;
        Error::check_dim(rows, offset.len())?;
        let lipschitz = matrix.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(AffineField {
            matrix,
            offset,
            lipschitz,
        })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }
}

impl LipschitzMap for AffineField {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn eval_into(&self, z: ArrayView1<f64>, mut out: ArrayViewMut1<f64>) {
        out.assign(&(self.matrix.dot(&z) + &self.offset));
    }

    fn sample_into(&self, z: ArrayView1<f64>, _rng: &mut SolverRng, out: ArrayViewMut1<f64>) {
        self.eval_into(z, out)
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }
}

/// An inclusion `0 ∈ N_{[-1,1]^d}(z) + c∂‖z‖₁ + Mz + b` built backwards from
/// a chosen extended solution `(z*, w₁*, w₂*, w₃*)`.
///
/// `M` is a scaled skew matrix plus a small positive semidefinite part with
/// Frobenius norm 1, so `L = 1`. A third of the coordinates of `z*` sit on
/// the box boundary with a strictly positive normal-cone multiplier; the
/// rest are interior and nonzero.
#[derive(Debug, Clone)]
pub struct KnownSolution {
    pub problem: Problem,
    pub solution: ExtendedPoint,
}

impl KnownSolution {
    pub fn generate(dim: usize, l1_weight: f64, seed: u64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::invalid("known-solution instance needs dim >= 3"));
        }
        if !(l1_weight > 0.0 && l1_weight.is_finite()) {
            return Err(Error::invalid(format!("l1 weight must be positive, got {l1_weight}")));
        }
        let mut rng = rng_for(seed, INIT_STREAM);
        let g = Array2::from_shape_fn((dim, dim), |_| standard_normal(1, &mut rng)[0]);
        let h = Array2::from_shape_fn((dim, dim), |_| standard_normal(1, &mut rng)[0]);
        let mut m = &g - &g.t() + h.dot(&h.t()) * 0.1;
        let frobenius = m.iter().map(|v| v * v).sum::<f64>().sqrt();
        m /= frobenius;

        let boundary = dim / 3;
        let mut z = Array1::zeros(dim);
        let mut w_box = Array1::zeros(dim);
        for i in 0..dim {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            if i < boundary {
                z[i] = sign;
                w_box[i] = sign * rng.random_range(0.1..1.0);
            } else {
                z[i] = sign * rng.random_range(0.1..0.8);
            }
        }
        let w_l1 = z.mapv(|v: f64| l1_weight * v.signum());
        let w_field = -(&w_box + &w_l1);
        let offset = &w_field - &m.dot(&z);

        let lower = Array1::from_elem(dim, -1.0);
        let upper = Array1::from_elem(dim, 1.0);
        let operators: Vec<Arc<dyn SetValuedOperator>> = vec![
            Arc::new(NormalCone(BoxSet { lower, upper })),
            Arc::new(ScaledL1 { dim, weight: l1_weight }),
        ];
        let field = Arc::new(AffineField::new(m, offset)?);
        Ok(KnownSolution {
            problem: Problem::new(operators, field)?,
            solution: ExtendedPoint::new(z, vec![w_box, w_l1, w_field])?,
        })
    }
}
