//! Elementwise kernels shared by the standard and the memory-saving SPS
//! loops. Both loops must perform identical floating-point operations in
//! identical order, so every update goes through these.

use ndarray::{ArrayView1, ArrayViewMut1, Zip};

/// `t = z + τ w`
#[inline]
pub(crate) fn resolvent_input(z: ArrayView1<f64>, w: ArrayView1<f64>, tau: f64, t: ArrayViewMut1<f64>) {
    Zip::from(t).and(z).and(w).for_each(|t, &z, &w| *t = z + tau * w);
}

/// `y = τ⁻¹(t − x)`
#[inline]
pub(crate) fn resolvent_output(t: ArrayView1<f64>, x: ArrayView1<f64>, tau: f64, y: ArrayViewMut1<f64>) {
    Zip::from(y).and(t).and(x).for_each(|y, &t, &x| *y = (t - x) / tau);
}

/// `x = z − ρ(r − w)`
#[inline]
pub(crate) fn forward_point(
    z: ArrayView1<f64>,
    r: ArrayView1<f64>,
    w: ArrayView1<f64>,
    rho: f64,
    x: ArrayViewMut1<f64>,
) {
    Zip::from(x)
        .and(z)
        .and(r)
        .and(w)
        .for_each(|x, &z, &r, &w| *x = z - rho * (r - w));
}

/// `y += a·x`
#[inline]
pub(crate) fn axpy(y: ArrayViewMut1<f64>, a: f64, x: ArrayView1<f64>) {
    Zip::from(y).and(x).for_each(|y, &x| *y += a * x);
}

/// `acc += v`
#[inline]
pub(crate) fn accumulate(acc: ArrayViewMut1<f64>, v: ArrayView1<f64>) {
    Zip::from(acc).and(v).for_each(|a, &v| *a += v);
}

/// `‖a + b‖²`
#[inline]
pub(crate) fn norm_sq_of_sum(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| {
        let s = x + y;
        acc + s * s
    })
}
