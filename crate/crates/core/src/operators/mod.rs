//! Operator abstractions consumed by every solver, plus the resolvent
//! toolbox in [`prox`].

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, ArrayView1, ArrayViewMut1};

use crate::error::{Error, Result};
use crate::linalg::{SolverRng, Vector};

pub mod prox;

pub use prox::{
    inverse_resolvent_via_moreau, product_resolvent, project_linf_ball, project_scaled_soc, resolvent_of_normal_cone,
    soft_threshold, BoxSet, LinfBall, NormalCone, Origin, ProductOperator, Projection, ScaledL1, ScaledSoc,
    ZeroOperator,
};

/// A maximal monotone operator `A` handled only through its resolvent
/// `J_{τA} = (I + τA)^{-1}`.
///
/// Implementations must be single-valued and nonexpansive in `t`. Callers
/// guarantee `tau > 0` and matching dimensions.
pub trait SetValuedOperator: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn resolvent_into(&self, tau: f64, t: ArrayView1<f64>, out: ArrayViewMut1<f64>);

    fn resolvent(&self, tau: f64, t: ArrayView1<f64>) -> Vector {
        let mut out = Array1::zeros(self.dim());
        self.resolvent_into(tau, t, out.view_mut());
        out
    }
}

/// A monotone, Lipschitz single-valued map `B` with exact and stochastic
/// evaluation. Randomness is always owned by the caller.
pub trait LipschitzMap: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Exact `B(z)`.
    fn eval_into(&self, z: ArrayView1<f64>, out: ArrayViewMut1<f64>);

    /// Unbiased estimate `B(z) + ε`.
    fn sample_into(&self, z: ArrayView1<f64>, rng: &mut SolverRng, out: ArrayViewMut1<f64>);

    fn lipschitz_bound(&self) -> f64;

    fn eval(&self, z: ArrayView1<f64>) -> Vector {
        let mut out = Array1::zeros(self.dim());
        self.eval_into(z, out.view_mut());
        out
    }

    fn sample(&self, z: ArrayView1<f64>, rng: &mut SolverRng) -> Vector {
        let mut out = Array1::zeros(self.dim());
        self.sample_into(z, rng, out.view_mut());
        out
    }
}

/// Wraps a map so that its oracle is exact. Sampling never touches the rng.
#[derive(Debug, Clone)]
pub struct ExactOracle(pub Arc<dyn LipschitzMap>);

impl LipschitzMap for ExactOracle {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval_into(&self, z: ArrayView1<f64>, out: ArrayViewMut1<f64>) {
        self.0.eval_into(z, out)
    }

    fn sample_into(&self, z: ArrayView1<f64>, _rng: &mut SolverRng, out: ArrayViewMut1<f64>) {
        self.0.eval_into(z, out)
    }

    fn lipschitz_bound(&self) -> f64 {
        self.0.lipschitz_bound()
    }
}

/// The inclusion `0 ∈ Σ A_i(z) + B(z)`.
#[derive(Debug, Clone)]
pub struct Problem {
    operators: Vec<Arc<dyn SetValuedOperator>>,
    field: Arc<dyn LipschitzMap>,
}

impl Problem {
    pub fn new(operators: Vec<Arc<dyn SetValuedOperator>>, field: Arc<dyn LipschitzMap>) -> Result<Self> {
        let dim = field.dim();
        for op in &operators {
            Error::check_dim(dim, op.dim())?;
        }
        let lipschitz = field.lipschitz_bound();
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::invalid(format!(
                "Lipschitz bound must be positive and finite, got {lipschitz}"
            )));
        }
        Ok(Problem { operators, field })
    }

    /// Number of set-valued operators `n`.
    pub fn n(&self) -> usize {
        self.operators.len()
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn operators(&self) -> &[Arc<dyn SetValuedOperator>] {
        &self.operators
    }

    pub fn field(&self) -> &Arc<dyn LipschitzMap> {
        &self.field
    }

    pub fn lipschitz(&self) -> f64 {
        self.field.lipschitz_bound()
    }

    /// Same operators with the oracle replaced by exact evaluation.
    pub fn with_exact_oracle(&self) -> Problem {
        Problem {
            operators: self.operators.clone(),
            field: Arc::new(ExactOracle(self.field.clone())),
        }
    }

    pub fn with_field(&self, field: Arc<dyn LipschitzMap>) -> Result<Problem> {
        Problem::new(self.operators.clone(), field)
    }
}
