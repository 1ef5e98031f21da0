//! Brute-force reference computations.
//!
//! Nothing here calls into the closed-form toolbox; each routine solves the
//! defining minimisation problem numerically so it can serve as an
//! independent check.

use ndarray::{Array1, ArrayView1};

use crate::linalg::Vector;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimiser of a unimodal `f` on `[a, b]`, bracketed down to `tol`.
pub fn golden_section(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    golden_section_by(|x, y| f(x) < f(y), a, b, tol)
}

/// Golden-section search driven by a comparison `better(x, y)` meaning
/// `f(x) < f(y)`. Comparing through an exactly factored difference
/// `f(x) − f(y)` resolves the minimiser to near machine precision, where
/// comparing raw values stalls at the square root of it.
pub fn golden_section_by(better: impl Fn(f64, f64) -> bool, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    while (b - a).abs() > tol && c > a && d < b {
        if better(c, d) {
            b = d;
            d = c;
            c = b - INV_PHI * (b - a);
        } else {
            a = c;
            c = d;
            d = a + INV_PHI * (b - a);
        }
    }
    0.5 * (a + b)
}

/// argmin_x κ|x| + ½(x − t)².
pub fn prox_abs_golden(t: f64, kappa: f64) -> f64 {
    let lo = t.min(0.0) - 1.0;
    let hi = t.max(0.0) + 1.0;
    // f(x) − f(y) = ½(x − y)(x + y − 2t) + κ(|x| − |y|)
    let better = |x: f64, y: f64| 0.5 * (x - y) * (x + y - 2.0 * t) + kappa * (x.abs() - y.abs()) < 0.0;
    golden_section_by(better, lo, hi, 1e-14)
}

/// argmin_{x ∈ [lo, hi]} (x − g)².
pub fn project_interval_golden(g: f64, lo: f64, hi: f64) -> f64 {
    let better = |x: f64, y: f64| (x - y) * (x + y - 2.0 * g) < 0.0;
    let x = golden_section_by(better, lo, hi, 1e-14);
    // endpoints are candidates the bracket only approaches
    [lo, hi, x]
        .into_iter()
        .fold(x, |best, cand| if better(cand, best) { cand } else { best })
}

/// Projection onto `{‖β‖ ≤ λ/s}` by searching the boundary ray through `β`.
///
/// A point outside a closed convex cone projects onto its boundary, and by
/// rotational symmetry the projected `β` is parallel to the input `β`, so the
/// problem reduces to minimising a 1-D distance along that ray.
pub fn project_scaled_soc_search(lambda: f64, beta: ArrayView1<f64>, s: f64) -> (f64, Vector) {
    let r = beta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r * s <= lambda {
        return (lambda, beta.to_owned());
    }
    let dir: Vector = if r > 0.0 {
        beta.mapv(|v| v / r)
    } else {
        let mut e = Array1::zeros(beta.len());
        if !e.is_empty() {
            e[0] = 1.0;
        }
        e
    };
    let k = 1.0 / s;
    // squared distance along the ray is (a − λ)² + (ka − r)²; compare via
    // the factored difference
    let better = |a: f64, c: f64| (a - c) * ((a + c - 2.0 * lambda) + k * (k * (a + c) - 2.0 * r)) < 0.0;
    let hi = lambda.abs() + r + 1.0;
    let a = golden_section_by(better, 0.0, hi, 1e-14).max(0.0);
    let a = if better(0.0, a) { 0.0 } else { a };
    (a, dir.mapv(|u| a * k * u))
}

/// Solves `x + α N_{[-1,1]}(x) ∋ w` (the resolvent of `α(∂|·|)⁻¹`) by a
/// grid search minimising the distance from `((w − x)/α, x)` to the graph
/// of `∂|·|`.
pub fn inverse_abs_resolvent_grid(w: f64, alpha: f64) -> f64 {
    let graph_dist = |u: f64, x: f64| -> f64 {
        let ray_pos = (u.min(0.0).powi(2) + (x - 1.0).powi(2)).sqrt();
        let ray_neg = (u.max(0.0).powi(2) + (x + 1.0).powi(2)).sqrt();
        let seg = (u * u + (x.abs() - 1.0).max(0.0).powi(2)).sqrt();
        ray_pos.min(ray_neg).min(seg)
    };
    let lo = -w.abs() - 2.0;
    let steps = ((2.0 * (w.abs() + 2.0)) / 1e-4) as usize;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=steps {
        let x = lo + i as f64 * 1e-4;
        let v = graph_dist((w - x) / alpha, x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}
