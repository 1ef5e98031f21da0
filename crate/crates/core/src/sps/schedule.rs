use crate::error::{Error, Result};

pub const DEFAULT_ALPHA_EXPONENT: f64 = 0.51;
pub const DEFAULT_RHO_EXPONENT: f64 = 0.25;

/// How `(α_k, ρ_k)` evolve over the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `α_k = C·k^{-a}`, `ρ_k = C·k^{-r}`.
    Decay {
        scale: f64,
        alpha_exponent: f64,
        rho_exponent: f64,
    },
    /// `ρ = min{K^{-1/4}, 1/(2L)}`, `α = C·ρ²` for every iteration.
    Fixed { scale: f64, budget: usize, lipschitz: f64 },
}

/// Deterministic stepsizes plus the resolvent stepsize `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub rule: StepRule,
    pub tau: f64,
}

impl StepSchedule {
    pub fn decay(scale: f64) -> Result<Self> {
        Self::decay_with_exponents(scale, DEFAULT_ALPHA_EXPONENT, DEFAULT_RHO_EXPONENT)
    }

    /// Rejects exponent pairs for which `Σα_kρ_k = ∞`, `Σα_k² < ∞` and
    /// `Σα_kρ_k² < ∞` do not all hold.
    pub fn decay_with_exponents(scale: f64, alpha_exponent: f64, rho_exponent: f64) -> Result<Self> {
        positive("decay scale", scale)?;
        if !(alpha_exponent > 0.5 && alpha_exponent <= 1.0) {
            return Err(Error::invalid(format!(
                "alpha exponent must lie in (0.5, 1], got {alpha_exponent}"
            )));
        }
        if !(rho_exponent >= 0.0) {
            return Err(Error::invalid(format!(
                "rho exponent must be nonnegative, got {rho_exponent}"
            )));
        }
        if alpha_exponent + rho_exponent > 1.0 {
            return Err(Error::invalid(format!(
                "sum of alpha_k*rho_k converges for exponents ({alpha_exponent}, {rho_exponent})"
            )));
        }
        if alpha_exponent + 2.0 * rho_exponent <= 1.0 {
            return Err(Error::invalid(format!(
                "sum of alpha_k*rho_k^2 diverges for exponents ({alpha_exponent}, {rho_exponent})"
            )));
        }
        Ok(StepSchedule {
            rule: StepRule::Decay {
                scale,
                alpha_exponent,
                rho_exponent,
            },
            tau: 1.0,
        })
    }

    pub fn fixed(scale: f64, budget: usize, lipschitz: f64) -> Result<Self> {
        positive("fixed scale", scale)?;
        positive("Lipschitz bound", lipschitz)?;
        if budget == 0 {
            return Err(Error::invalid("iteration budget must be at least 1"));
        }
        Ok(StepSchedule {
            rule: StepRule::Fixed {
                scale,
                budget,
                lipschitz,
            },
            tau: 1.0,
        })
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        positive("tau", tau)?;
        self.tau = tau;
        Ok(self)
    }

    /// `(α_k, ρ_k)` for iteration `k ≥ 1`.
    pub fn steps(&self, k: usize) -> Result<(f64, f64)> {
        if k == 0 {
            return Err(Error::InvalidIteration(k));
        }
        Ok(match self.rule {
            StepRule::Decay {
                scale,
                alpha_exponent,
                rho_exponent,
            } => {
                let kf = k as f64;
                (scale * kf.powf(-alpha_exponent), scale * kf.powf(-rho_exponent))
            }
            StepRule::Fixed {
                scale,
                budget,
                lipschitz,
            } => schedule_fixed(scale, budget, lipschitz, k),
        })
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be positive, got {v}")))
    }
}

/// `(C_d·k^{-0.51}, C_d·k^{-0.25})`.
pub fn schedule_decay(scale: f64, k: usize) -> Result<(f64, f64)> {
    StepSchedule::decay(scale)?.steps(k)
}

/// Constant `(α, ρ) = (C_f·ρ², min{K^{-1/4}, 1/(2L)})`, independent of `k`.
pub fn schedule_fixed(scale: f64, budget: usize, lipschitz: f64, _k: usize) -> (f64, f64) {
    let rho = (budget as f64).powf(-0.25).min(1.0 / (2.0 * lipschitz));
    (scale * rho * rho, rho)
}
