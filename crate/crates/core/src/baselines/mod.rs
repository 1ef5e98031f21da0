//! Comparison solvers built on the product-space reformulation, plus the
//! deterministic projective splitting method, DSEG and simultaneous GDA.

use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, Vector};
use crate::sps::{TraceRecord, DIVERGENCE_NORM};

mod dseg;
mod frb;
mod product;
mod ps;
mod tseng;

pub use dseg::{dseg_run, dseg_step, gda_iterates};
pub use frb::{frb_iterate, run_frb, FrbState, FrbStep};
pub use product::{product_field_b, product_resolvent_a, ProductSpace};
pub use ps::{deterministic_ps_iterate, run_ps, PsStep, PS_STEP_FACTOR};
pub use tseng::{run_tseng, tseng_iterate, tseng_residual, TsengStep};

/// Hard cap on stepsize reductions within one linesearch.
pub const MAX_REDUCTIONS: usize = 100;

/// Backtracking parameters shared by Tseng and FRB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linesearch {
    pub initial: f64,
    pub theta: f64,
    pub shrink: f64,
}

impl Default for Linesearch {
    fn default() -> Self {
        Linesearch {
            initial: 1.0,
            theta: 0.8,
            shrink: 0.7,
        }
    }
}

impl Linesearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial > 0.0 && self.initial.is_finite()) {
            return Err(Error::invalid(format!(
                "initial stepsize must be positive, got {}",
                self.initial
            )));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::invalid(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::invalid(format!(
                "shrink factor must lie in (0, 1), got {}",
                self.shrink
            )));
        }
        Ok(())
    }
}

/// Trace and final primal iterate of a baseline run.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub trace: Vec<TraceRecord>,
    pub z: Vector,
}

/// A step shorter than the floating-point resolution of `q`. The linesearch
/// test then compares rounding noise and is skipped.
pub(crate) fn below_resolution(step: f64, q: &Vector) -> bool {
    step <= f64::EPSILON * (1.0 + norm_sq(q.view()).sqrt())
}

pub(crate) fn check_bounded(q: ArrayView1<f64>, k: usize) -> Result<()> {
    let size = norm_sq(q);
    if size.is_finite() && size <= DIVERGENCE_NORM * DIVERGENCE_NORM {
        Ok(())
    } else {
        Err(Error::Diverged {
            last_finite: k,
            trace: Vec::new(),
        })
    }
}
