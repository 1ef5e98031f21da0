//! Proximal operators, projections and the resolvents built from them.

use std::fmt;
use std::sync::Arc;

use ndarray::{s, Array1, ArrayView1, ArrayViewMut1, Zip};

use super::SetValuedOperator;
use crate::error::{Error, Result};
use crate::linalg::{norm, Vector};

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("stepsize must be positive, got {tau}")))
    }
}

/// `prox_{κ‖·‖₁}(t)`: componentwise `sign(t)·max(|t| − κ, 0)`.
pub fn soft_threshold(t: ArrayView1<f64>, kappa: f64) -> Result<Vector> {
    if !(kappa >= 0.0) {
        return Err(Error::invalid(format!("threshold must be nonnegative, got {kappa}")));
    }
    let mut out = Array1::zeros(t.len());
    soft_threshold_into(t, kappa, out.view_mut());
    Ok(out)
}

pub(crate) fn soft_threshold_into(t: ArrayView1<f64>, kappa: f64, out: ArrayViewMut1<f64>) {
    Zip::from(out).and(t).for_each(|o, &v| {
        let m = v.abs() - kappa;
        *o = if m > 0.0 { m.copysign(v) } else { 0.0 };
    });
}

/// Projection onto `{g : ‖g‖∞ ≤ radius}`.
pub fn project_linf_ball(g: ArrayView1<f64>, radius: f64) -> Result<Vector> {
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    Ok(g.mapv(|v| v.clamp(-radius, radius)))
}

/// Projection of `(λ, β)` onto `K = {(λ, β) : ‖β‖₂ ≤ λ/s}`.
pub fn project_scaled_soc(lambda: f64, beta: ArrayView1<f64>, s: f64) -> Result<(f64, Vector)> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid(format!("cone scale must be positive, got {s}")));
    }
    let mut beta_out = Array1::zeros(beta.len());
    let lambda_out = soc_project_parts(lambda, beta, s, beta_out.view_mut());
    Ok((lambda_out, beta_out))
}

fn soc_project_parts(lambda: f64, beta: ArrayView1<f64>, s: f64, mut beta_out: ArrayViewMut1<f64>) -> f64 {
    let aperture = 1.0 / s;
    let r = norm(beta);
    if r <= aperture * lambda {
        beta_out.assign(&beta);
        lambda
    } else if r <= -lambda / aperture {
        beta_out.fill(0.0);
        0.0
    } else {
        let c = (aperture * r + lambda) / (aperture * aperture + 1.0);
        let factor = c * aperture / r;
        Zip::from(beta_out).and(beta).for_each(|o, &b| *o = factor * b);
        c
    }
}

/// `J_{τ N_C}(t) = proj_C(t)`, for any `τ > 0`.
pub fn resolvent_of_normal_cone(proj: &dyn Projection, tau: f64, t: ArrayView1<f64>) -> Result<Vector> {
    check_tau(tau)?;
    Error::check_dim(proj.dim(), t.len())?;
    Ok(proj.project(t))
}

/// Applies each block's resolvent to its slice of `t` and concatenates.
pub fn product_resolvent(blocks: &[Arc<dyn SetValuedOperator>], tau: f64, t: ArrayView1<f64>) -> Result<Vector> {
    check_tau(tau)?;
    let op = ProductOperator::new(blocks.to_vec());
    Error::check_dim(op.dim(), t.len())?;
    Ok(op.resolvent(tau, t))
}

/// `J_{αA⁻¹}(w) = w − α·J_{A/α}(w/α)` by Moreau's identity.
pub fn inverse_resolvent_via_moreau(op: &dyn SetValuedOperator, alpha: f64, w: ArrayView1<f64>) -> Result<Vector> {
    check_tau(alpha)?;
    Error::check_dim(op.dim(), w.len())?;
    let mut out = Array1::zeros(w.len());
    inverse_resolvent_into(op, alpha, w, out.view_mut());
    Ok(out)
}

pub(crate) fn inverse_resolvent_into(
    op: &dyn SetValuedOperator,
    alpha: f64,
    w: ArrayView1<f64>,
    mut out: ArrayViewMut1<f64>,
) {
    let scaled = w.mapv(|v| v / alpha);
    op.resolvent_into(1.0 / alpha, scaled.view(), out.view_mut());
    Zip::from(&mut out).and(w).for_each(|o, &wv| *o = wv - alpha * *o);
}

/// Exact Euclidean projection onto a closed convex set.
pub trait Projection: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn project_into(&self, x: ArrayView1<f64>, out: ArrayViewMut1<f64>);

    fn project(&self, x: ArrayView1<f64>) -> Vector {
        let mut out = Array1::zeros(self.dim());
        self.project_into(x, out.view_mut());
        out
    }
}

#[derive(Debug, Clone)]
pub struct LinfBall {
    pub dim: usize,
    pub radius: f64,
}

impl Projection for LinfBall {
    fn dim(&self) -> usize {
        self.dim
    }

    fn project_into(&self, x: ArrayView1<f64>, out: ArrayViewMut1<f64>) {
        let r = self.radius;
        Zip::from(out).and(x).for_each(|o, &v| *o = v.clamp(-r, r));
    }
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone)]
pub struct BoxSet {
    pub lower: Vector,
    pub upper: Vector,
}

impl Projection for BoxSet {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn project_into(&self, x: ArrayView1<f64>, out: ArrayViewMut1<f64>) {
        Zip::from(out)
            .and(x)
            .and(&self.lower)
            .and(&self.upper)
            .for_each(|o, &v, &lo, &hi| *o = v.clamp(lo, hi));
    }
}

/// `{(λ, β) : ‖β‖₂ ≤ λ/s}` with `λ` stored in coordinate 0.
#[derive(Debug, Clone)]
pub struct ScaledSoc {
    pub dim: usize,
    pub scale: f64,
}

impl Projection for ScaledSoc {
    fn dim(&self) -> usize {
        self.dim
    }

    fn project_into(&self, x: ArrayView1<f64>, mut out: ArrayViewMut1<f64>) {
        let lambda = soc_project_parts(x[0], x.slice(s![1..]), self.scale, out.slice_mut(s![1..]));
        out[0] = lambda;
    }
}

/// The singleton `{0}`. Its normal cone is all of ℝ^d, whose inverse is the
/// zero operator.
#[derive(Debug, Clone)]
pub struct Origin {
    pub dim: usize,
}

impl Projection for Origin {
    fn dim(&self) -> usize {
        self.dim
    }

    fn project_into(&self, _x: ArrayView1<f64>, mut out: ArrayViewMut1<f64>) {
        out.fill(0.0);
    }
}

/// Normal cone `N_C`; its resolvent is `proj_C` regardless of the stepsize.
#[derive(Debug, Clone)]
pub struct NormalCone<P>(pub P);

impl<P: Projection> SetValuedOperator for NormalCone<P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn resolvent_into(&self, _tau: f64, t: ArrayView1<f64>, out: ArrayViewMut1<f64>) {
        self.0.project_into(t, out)
    }
}

/// `weight·∂‖·‖₁`, resolved by soft-thresholding at `τ·weight`.
#[derive(Debug, Clone)]
pub struct ScaledL1 {
    pub dim: usize,
    pub weight: f64,
}

impl SetValuedOperator for ScaledL1 {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolvent_into(&self, tau: f64, t: ArrayView1<f64>, out: ArrayViewMut1<f64>) {
        soft_threshold_into(t, tau * self.weight, out)
    }
}

/// The zero operator; its resolvent is the identity.
#[derive(Debug, Clone)]
pub struct ZeroOperator {
    pub dim: usize,
}

impl SetValuedOperator for ZeroOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolvent_into(&self, _tau: f64, t: ArrayView1<f64>, mut out: ArrayViewMut1<f64>) {
        out.assign(&t)
    }
}

/// Block-diagonal operator `A_1 × ... × A_b` on consecutive slices.
#[derive(Debug, Clone)]
pub struct ProductOperator {
    blocks: Vec<Arc<dyn SetValuedOperator>>,
    dim: usize,
}

impl ProductOperator {
    pub fn new(blocks: Vec<Arc<dyn SetValuedOperator>>) -> Self {
        let dim = blocks.iter().map(|b| b.dim()).sum();
        ProductOperator { blocks, dim }
    }

    pub fn blocks(&self) -> &[Arc<dyn SetValuedOperator>] {
        &self.blocks
    }
}

impl SetValuedOperator for ProductOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolvent_into(&self, tau: f64, t: ArrayView1<f64>, mut out: ArrayViewMut1<f64>) {
        let mut start = 0;
        for block in &self.blocks {
            let end = start + block.dim();
            block.resolvent_into(tau, t.slice(s![start..end]), out.slice_mut(s![start..end]));
            start = end;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist_sq, rng_for, standard_normal};
    use crate::verify::oracles;
    use ndarray::array;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(array![0.0, 0.0].view(), 0.5).unwrap(), array![0.0, 0.0]);
        assert_eq!(soft_threshold(array![-0.3].view(), 0.5).unwrap(), array![0.0]);
        // frozen from golden-section minimisation of 0.5|x| + (x - 2)^2 / 2
        let oracle = oracles::prox_abs_golden(2.0, 0.5);
        assert!((oracle - 1.5).abs() < 1e-8);
        assert_eq!(soft_threshold(array![2.0].view(), 0.5).unwrap(), array![1.5]);
        assert!(matches!(
            soft_threshold(array![1.0].view(), -0.1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn linf_examples() {
        assert_eq!(
            project_linf_ball(array![0.5, -0.2].view(), 1.0).unwrap(),
            array![0.5, -0.2]
        );
        assert_eq!(
            project_linf_ball(array![3.0, -2.0].view(), 1.0).unwrap(),
            array![1.0, -1.0]
        );
        assert!(project_linf_ball(array![3.0].view(), 0.0).is_err());
        let mut rng = rng_for(3, 0);
        for _ in 0..50 {
            let g = standard_normal(4, &mut rng) * 2.0;
            let p = project_linf_ball(g.view(), 0.7).unwrap();
            for j in 0..4 {
                let o = oracles::project_interval_golden(g[j], -0.7, 0.7);
                assert!((o - p[j]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn soc_examples() {
        let (l, b) = project_scaled_soc(3.0, array![1.0, 0.0].view(), 2.0).unwrap();
        assert_eq!((l, b), (3.0, array![1.0, 0.0]));
        let (l, b) = project_scaled_soc(-4.0, array![1.0, 0.0].view(), 2.0).unwrap();
        assert_eq!((l, b), (0.0, array![0.0, 0.0]));
        // frozen from the boundary-ray golden-section oracle: (0.4, [0.2, 0])
        let (ol, ob) = oracles::project_scaled_soc_search(0.0, array![1.0, 0.0].view(), 2.0);
        assert!((ol - 0.4).abs() < 1e-8 && dist_sq(ob.view(), array![0.2, 0.0].view()) < 1e-16);
        let (l, b) = project_scaled_soc(0.0, array![1.0, 0.0].view(), 2.0).unwrap();
        assert!((l - 0.4).abs() < 1e-15);
        assert!(dist_sq(b.view(), array![0.2, 0.0].view()) < 1e-30);
        assert!(project_scaled_soc(1.0, array![1.0].view(), 0.0).is_err());
    }

    #[test]
    fn soc_output_is_feasible() {
        let mut rng = rng_for(5, 0);
        for _ in 0..200 {
            let x = standard_normal(6, &mut rng) * 3.0;
            let (l, b) = project_scaled_soc(x[0], x.slice(s![1..]), 2.0).unwrap();
            assert!(norm(b.view()) <= l / 2.0 + 1e-12);
        }
    }

    #[test]
    fn normal_cone_resolvent_ignores_tau() {
        let ball = LinfBall { dim: 3, radius: 1.0 };
        let t = array![2.0, -0.5, -7.0];
        let a = resolvent_of_normal_cone(&ball, 0.1, t.view()).unwrap();
        let b = resolvent_of_normal_cone(&ball, 10.0, t.view()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, array![1.0, -0.5, -1.0]);
        let inside = array![0.1, 0.2, -0.3];
        assert_eq!(resolvent_of_normal_cone(&ball, 1.0, inside.view()).unwrap(), inside);
        assert!(resolvent_of_normal_cone(&ball, 0.0, inside.view()).is_err());
    }

    #[test]
    fn product_resolvent_examples() {
        let l1: Arc<dyn SetValuedOperator> = Arc::new(ScaledL1 { dim: 3, weight: 0.4 });
        let t = array![1.0, -0.2, 0.5];
        assert_eq!(
            product_resolvent(std::slice::from_ref(&l1), 1.0, t.view()).unwrap(),
            l1.resolvent(1.0, t.view())
        );
        let ids: Vec<Arc<dyn SetValuedOperator>> =
            vec![Arc::new(ZeroOperator { dim: 1 }), Arc::new(ZeroOperator { dim: 2 })];
        assert_eq!(product_resolvent(&ids, 2.0, t.view()).unwrap(), t);
        assert!(matches!(
            product_resolvent(&ids, 2.0, array![1.0].view()),
            Err(Error::Shape { expected: 3, actual: 1 })
        ));

        // SOC on the first slice, prox-l1 on the second, each checked against
        // its own oracle
        let soc: Arc<dyn SetValuedOperator> = Arc::new(NormalCone(ScaledSoc { dim: 3, scale: 2.0 }));
        let l1: Arc<dyn SetValuedOperator> = Arc::new(ScaledL1 { dim: 2, weight: 0.3 });
        let mut rng = rng_for(11, 0);
        for _ in 0..20 {
            let t = standard_normal(5, &mut rng) * 2.0;
            let got = product_resolvent(&[soc.clone(), l1.clone()], 0.5, t.view()).unwrap();
            let (ol, ob) = oracles::project_scaled_soc_search(t[0], t.slice(s![1..3]), 2.0);
            assert!((got[0] - ol).abs() < 1e-7);
            assert!((got[1] - ob[0]).abs() < 1e-7 && (got[2] - ob[1]).abs() < 1e-7);
            for j in 3..5 {
                assert!((got[j] - oracles::prox_abs_golden(t[j], 0.15)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn moreau_examples() {
        // A = N_{0}: A^{-1} is the zero operator, so the resolvent is identity
        let cone = NormalCone(Origin { dim: 2 });
        let w = array![0.3, -1.2];
        assert_eq!(inverse_resolvent_via_moreau(&cone, 0.7, w.view()).unwrap(), w);

        // A = ∂|·|: x = 1 must satisfy x ∈ ∂|(w − x)/α| at w = 2, α = 1
        let l1 = ScaledL1 { dim: 1, weight: 1.0 };
        let x = inverse_resolvent_via_moreau(&l1, 1.0, array![2.0].view()).unwrap();
        assert_eq!(x, array![1.0]);
        let u = (2.0 - x[0]) / 1.0;
        assert!(u > 0.0 && x[0] == 1.0);

        // 1-D grid search for x + A^{-1}(x) ∋ w with A^{-1} = N_{[-1,1]}
        for &w in &[-2.5, -0.4, 0.0, 0.9, 3.1] {
            let got = inverse_resolvent_via_moreau(&l1, 1.0, array![w].view()).unwrap()[0];
            let grid = oracles::inverse_abs_resolvent_grid(w, 1.0);
            assert!((got - grid).abs() < 1e-3, "w={w}: {got} vs {grid}");
        }
        assert!(inverse_resolvent_via_moreau(&l1, 0.0, array![1.0].view()).is_err());
    }
}
