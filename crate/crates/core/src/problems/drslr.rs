//! Distributionally robust sparse logistic regression.
//!
//! `min_{λ,β} max_γ ℒ(λ, β, γ) + c‖β‖₁` subject to `‖β‖₂ ≤ λ/2` and
//! `‖γ‖_∞ ≤ 1`, where
//! `ℒ = λ(δ − κ) + m⁻¹ Σ Ψ(⟨x̂_i, β⟩) + m⁻¹ Σ γ_i(ŷ_i⟨x̂_i, β⟩ − λκ)` and
//! `Ψ(t) = log(eᵗ + e⁻ᵗ)`. The variable is `z = (λ, β, γ) ∈ ℝ^{1+d+m}`.

use std::sync::Arc;

use ndarray::{s, Array1, ArrayView1, ArrayViewMut1};
use rand::Rng;

use crate::data::SparseDataset;
use crate::error::{Error, Result};
use crate::linalg::{rng_for, SolverRng, Vector, INIT_STREAM};
use crate::lipschitz::{estimate_lipschitz, EstimatorOptions};
use crate::operators::{
    LinfBall, LipschitzMap, NormalCone, Problem, ProductOperator, ScaledL1, ScaledSoc, SetValuedOperator, ZeroOperator,
};

/// `L_Ψ + 1` with `L_Ψ = 1`.
const SOC_SCALE: f64 = 2.0;

pub const DEFAULT_BATCH: usize = 100;

/// `Ψ(t) = log(eᵗ + e⁻ᵗ)` in overflow-free form.
pub fn psi(t: f64) -> f64 {
    t.abs() + (-2.0 * t.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrslrParams {
    pub delta: f64,
    pub kappa: f64,
    pub c: f64,
}

impl Default for DrslrParams {
    fn default() -> Self {
        DrslrParams {
            delta: 1.0,
            kappa: 1.0,
            c: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DrslrProblem {
    data: Arc<SparseDataset>,
    params: DrslrParams,
}

impl DrslrProblem {
    pub fn new(data: Arc<SparseDataset>, params: DrslrParams) -> Result<Self> {
        for (name, v) in [("delta", params.delta), ("kappa", params.kappa), ("c", params.c)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if data.n_samples() == 0 {
            return Err(Error::invalid("dataset has no samples"));
        }
        Ok(DrslrProblem { data, params })
    }

    pub fn data(&self) -> &SparseDataset {
        &self.data
    }

    pub fn params(&self) -> DrslrParams {
        self.params
    }

    pub fn m(&self) -> usize {
        self.data.n_samples()
    }

    pub fn d(&self) -> usize {
        self.data.n_features()
    }

    /// `D = 1 + d + m`.
    pub fn dim(&self) -> usize {
        1 + self.d() + self.m()
    }

    /// First coordinate of `γ`.
    pub fn gamma_start(&self) -> usize {
        1 + self.d()
    }

    /// Adds `B_i(z)` to `out` (0-based `i`).
    fn add_component(&self, i: usize, z: ArrayView1<f64>, out: &mut ArrayViewMut1<f64>) {
        let DrslrParams { delta, kappa, .. } = self.params;
        let d = self.d();
        let lambda = z[0];
        let beta = z.slice(s![1..1 + d]);
        let gamma_i = z[1 + d + i];
        let y = self.data.label(i);
        let t = self.data.row_dot(i, beta);
        out[0] += delta - kappa * (1.0 + gamma_i);
        let weight = t.tanh() + gamma_i * y;
        let (idx, vals) = self.data.row(i);
        for (&j, &x) in idx.iter().zip(vals) {
            out[1 + j as usize] += weight * x;
        }
        out[1 + d + i] += -(y * t - lambda * kappa);
    }

    fn average_into(
        &self,
        indices: impl ExactSizeIterator<Item = usize>,
        z: ArrayView1<f64>,
        mut out: ArrayViewMut1<f64>,
    ) {
        let count = indices.len() as f64;
        out.fill(0.0);
        for i in indices {
            self.add_component(i, z, &mut out);
        }
        out.mapv_inplace(|v| v / count);
    }

    fn check_z(&self, z: ArrayView1<f64>) -> Result<()> {
        Error::check_dim(self.dim(), z.len())
    }

    /// `B(z) = m⁻¹ Σ B_i(z)`.
    pub fn full_field(&self, z: ArrayView1<f64>) -> Result<Vector> {
        self.check_z(z)?;
        let mut out = Array1::zeros(self.dim());
        self.average_into(0..self.m(), z, out.view_mut());
        Ok(out)
    }

    /// Single-sample field `B_i(z)`, `i` 0-based.
    pub fn component(&self, i: usize, z: ArrayView1<f64>) -> Result<Vector> {
        self.check_z(z)?;
        if i >= self.m() {
            return Err(Error::Index {
                index: i,
                len: self.m(),
            });
        }
        let mut out = Array1::zeros(self.dim());
        self.add_component(i, z, &mut out.view_mut());
        Ok(out)
    }

    /// Average of `B_i(z)` over the given (possibly repeated) indices.
    pub fn batch_field(&self, indices: &[usize], z: ArrayView1<f64>) -> Result<Vector> {
        self.check_z(z)?;
        if indices.is_empty() {
            return Err(Error::invalid("batch must contain at least one index"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.m()) {
            return Err(Error::Index {
                index: bad,
                len: self.m(),
            });
        }
        let mut out = Array1::zeros(self.dim());
        self.average_into(indices.iter().copied(), z, out.view_mut());
        Ok(out)
    }

    /// Minibatch estimate with indices drawn uniformly with replacement.
    pub fn minibatch(&self, z: ArrayView1<f64>, batch: usize, rng: &mut SolverRng) -> Result<Vector> {
        self.check_batch(batch)?;
        let indices: Vec<usize> = (0..batch).map(|_| rng.random_range(0..self.m())).collect();
        self.batch_field(&indices, z)
    }

    fn check_batch(&self, batch: usize) -> Result<()> {
        if batch == 0 || batch > self.m() {
            return Err(Error::invalid(format!(
                "batch size must lie in [1, {}], got {batch}",
                self.m()
            )));
        }
        Ok(())
    }

    /// `ℒ(z)`, without the `ℓ₁` term and constraints.
    pub fn objective(&self, z: ArrayView1<f64>) -> Result<f64> {
        self.check_z(z)?;
        let DrslrParams { delta, kappa, .. } = self.params;
        let d = self.d();
        let lambda = z[0];
        let beta = z.slice(s![1..1 + d]);
        let m = self.m() as f64;
        let mut loss = 0.0;
        let mut coupling = 0.0;
        for i in 0..self.m() {
            let t = self.data.row_dot(i, beta);
            loss += psi(t);
            coupling += z[1 + d + i] * (self.data.label(i) * t - lambda * kappa);
        }
        Ok(lambda * (delta - kappa) + loss / m + coupling / m)
    }

    /// Estimated Lipschitz bound of `B` (power iteration at random points with
    /// a 1.5 safety factor).
    pub fn lipschitz_bound(&self) -> Result<f64> {
        let field = ExactDrslr(self.clone());
        estimate_lipschitz(&field, self.gamma_start(), &EstimatorOptions::default())
    }

    /// `A₁ = N_{C₁} × N_{C₂}` and `A₂ = {0} × c∂‖·‖₁ × {0}`.
    pub fn operators(&self) -> Vec<Arc<dyn SetValuedOperator>> {
        let d = self.d();
        let m = self.m();
        let constraints = ProductOperator::new(vec![
            Arc::new(NormalCone(ScaledSoc {
                dim: 1 + d,
                scale: SOC_SCALE,
            })),
            Arc::new(NormalCone(LinfBall { dim: m, radius: 1.0 })),
        ]);
        let l1 = ProductOperator::new(vec![
            Arc::new(ZeroOperator { dim: 1 }),
            Arc::new(ScaledL1 {
                dim: d,
                weight: self.params.c,
            }),
            Arc::new(ZeroOperator { dim: m }),
        ]);
        vec![Arc::new(constraints), Arc::new(l1)]
    }

    /// Field with a minibatch oracle of size `batch`, or the exact oracle for
    /// `None`.
    pub fn field(&self, batch: Option<usize>, lipschitz: f64) -> Result<DrslrField> {
        if let Some(b) = batch {
            self.check_batch(b)?;
        }
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::invalid(format!(
                "Lipschitz bound must be positive, got {lipschitz}"
            )));
        }
        Ok(DrslrField {
            problem: self.clone(),
            batch,
            lipschitz,
        })
    }

    pub fn into_problem(&self, batch: Option<usize>, lipschitz: f64) -> Result<Problem> {
        Problem::new(self.operators(), Arc::new(self.field(batch, lipschitz)?))
    }
}

#[derive(Debug)]
struct ExactDrslr(DrslrProblem);

impl LipschitzMap for ExactDrslr {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval_into(&self, z: ArrayView1<f64>, out: ArrayViewMut1<f64>) {
        self.0.average_into(0..self.0.m(), z, out);
    }

    fn sample_into(&self, z: ArrayView1<f64>, _rng: &mut SolverRng, out: ArrayViewMut1<f64>) {
        self.eval_into(z, out);
    }

    fn lipschitz_bound(&self) -> f64 {
        f64::INFINITY
    }
}

/// DRSLR vector field with a minibatch (or exact) oracle.
#[derive(Debug, Clone)]
pub struct DrslrField {
    problem: DrslrProblem,
    batch: Option<usize>,
    lipschitz: f64,
}

impl DrslrField {
    pub fn batch(&self) -> Option<usize> {
        self.batch
    }
}

impl LipschitzMap for DrslrField {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn eval_into(&self, z: ArrayView1<f64>, out: ArrayViewMut1<f64>) {
        self.problem.average_into(0..self.problem.m(), z, out);
    }

    fn sample_into(&self, z: ArrayView1<f64>, rng: &mut SolverRng, out: ArrayViewMut1<f64>) {
        match self.batch {
            None => self.eval_into(z, out),
            Some(batch) => {
                let m = self.problem.m();
                let indices: Vec<usize> = (0..batch).map(|_| rng.random_range(0..m)).collect();
                self.problem.average_into(indices.into_iter(), z, out);
            }
        }
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }
}

/// Random sparse classification data: each entry is nonzero with
/// probability `density`, values `N(0, 1)`, labels from a random linear
/// rule with 10% flips.
pub fn synthetic_dataset(m: usize, d: usize, density: f64, seed: u64) -> Result<SparseDataset> {
    if m == 0 || d == 0 {
        return Err(Error::invalid("synthetic dataset needs m, d >= 1"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::invalid(format!("density must lie in (0, 1], got {density}")));
    }
    let mut rng = rng_for(seed, INIT_STREAM);
    let truth = crate::linalg::standard_normal(d, &mut rng);
    let rows: Vec<(f64, Vec<(usize, f64)>)> = (0..m)
        .map(|_| {
            let mut entries = Vec::new();
            for j in 0..d {
                if rng.random::<f64>() < density {
                    entries.push((j, rng.sample::<f64, _>(rand_distr::StandardNormal)));
                }
            }
            let score: f64 = entries.iter().map(|&(j, v)| truth[j] * v).sum();
            let mut label = if score >= 0.0 { 1.0 } else { -1.0 };
            if rng.random::<f64>() < 0.1 {
                label = -label;
            }
            (label, entries)
        })
        .collect();
    SparseDataset::from_rows(rows, d)
}
